"""Small-scope symbolic execution for VL, a compact imperative verification language.

VL programs declare bounded symbolic inputs, build data structures with
nondeterministic choices, and check assertions. The engine explores every
feasible path within the input bounds, so a clean report is a proof of the
asserted properties at that scope.
"""

__version__ = "0.1.0"
