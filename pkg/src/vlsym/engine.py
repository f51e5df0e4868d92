"""Symbolic executor for VL programs.

One stepper drives three modes through a choice policy: exhaustive
exploration fans out at every decision point, random runs pick one
successor per decision, and trail replay follows a recorded decision
list. Decisions come in three flavors and make up the trail of a path:

- ``C i/k``   a choose_int picked i out of k alternatives
- ``B t|e``   a symbolic branch took the then or else side
- ``Z N=v/k`` a symbolic int was pinned to v, one of k feasible values

States are mutated in place along straight-line code and cloned only
where paths fork. Integer inputs stay symbolic until a strict position
(array extent, array index, choose_int argument) forces a value, at
which point the path fans out over the feasible range.
"""

from __future__ import annotations

import enum
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from random import Random

from . import ast
from .diagnostics import Loc
from .solver import (
    DEFAULT_BUDGET,
    Atom,
    EnumerationBudgetExceeded,
    PathCondition,
    Rel,
    SatStatus,
    UnboundedSymbol,
    pc_sat,
)
from .values import (
    UNDEFINED,
    ConcreteInt,
    Poly,
    RealVal,
    SymConst,
    SymInt,
    SymKind,
    SymValue,
    int_poly,
    make_int,
)

MAX_ARRAY_CELLS = 1 << 20
MAX_DNF_DISJUNCTS = 4096


class Property(enum.Enum):
    ASSERTION_VIOLATION = "ASSERTION_VIOLATION"
    OUT_OF_BOUNDS = "OUT_OF_BOUNDS"
    DIVISION_BY_ZERO = "DIVISION_BY_ZERO"
    READ_UNDEFINED = "READ_UNDEFINED"
    WRITE_TO_INPUT = "WRITE_TO_INPUT"
    ENUM_BUDGET = "ENUM_BUDGET"


class Certainty(enum.Enum):
    PROVEABLE = "PROVEABLE"
    MAYBE = "MAYBE"


# ---------------------------------------------------------------------------
# decisions and trails


@dataclass(frozen=True)
class ChooseInt:
    index: int
    fanout: int

    def render(self) -> str:
        return f"C {self.index}/{self.fanout}"

    def key(self) -> tuple:
        return (0, self.index)


@dataclass(frozen=True)
class Branch:
    then_taken: bool

    def render(self) -> str:
        return f"B {'t' if self.then_taken else 'e'}"

    def key(self) -> tuple:
        return (1, 0 if self.then_taken else 1)


@dataclass(frozen=True)
class ConcretizeInt:
    name: str
    value: int
    fanout: int
    ord: int = field(default=0, compare=False)

    def render(self) -> str:
        return f"Z {self.name}={self.value}/{self.fanout}"

    def key(self) -> tuple:
        return (2, self.ord, self.value)


Decision = ChooseInt | Branch | ConcretizeInt


def trail_key(trail) -> tuple:
    return tuple(d.key() for d in trail)


class TrailFormatError(Exception):
    pass


class TrailMismatch(Exception):
    pass


def render_trail(decisions) -> str:
    lines = ["# trail v1"]
    lines.extend(d.render() for d in decisions)
    return "\n".join(lines) + "\n"


def parse_trail(text: str) -> list[Decision]:
    out: list[Decision] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        try:
            kind, rest = line.split(None, 1)
            if kind == "C":
                i, k = rest.split("/")
                out.append(ChooseInt(int(i), int(k)))
            elif kind == "B":
                if rest not in ("t", "e"):
                    raise ValueError(rest)
                out.append(Branch(rest == "t"))
            elif kind == "Z":
                name, tail = rest.split("=")
                v, k = tail.split("/")
                out.append(ConcretizeInt(name.strip(), int(v), int(k)))
            else:
                raise ValueError(kind)
        except ValueError:
            raise TrailFormatError(f"line {lineno}: cannot parse {line!r}") from None
    return out


# ---------------------------------------------------------------------------
# boolean formulas (kept in negation normal form by construction)


class _Const:
    __slots__ = ("truth",)

    def __init__(self, truth: bool):
        self.truth = truth


TRUE = _Const(True)
FALSE = _Const(False)


@dataclass(frozen=True)
class FAtom:
    atom: Atom


@dataclass(frozen=True)
class FAnd:
    parts: tuple


@dataclass(frozen=True)
class FOr:
    parts: tuple


def f_and(parts) -> object:
    flat = []
    for p in parts:
        if p is TRUE:
            continue
        if p is FALSE:
            return FALSE
        if isinstance(p, FAnd):
            flat.extend(p.parts)
        else:
            flat.append(p)
    if not flat:
        return TRUE
    if len(flat) == 1:
        return flat[0]
    return FAnd(tuple(flat))


def f_or(parts) -> object:
    flat = []
    for p in parts:
        if p is FALSE:
            continue
        if p is TRUE:
            return TRUE
        if isinstance(p, FOr):
            flat.extend(p.parts)
        else:
            flat.append(p)
    if not flat:
        return FALSE
    if len(flat) == 1:
        return flat[0]
    return FOr(tuple(flat))


def f_not(f) -> object:
    if f is TRUE:
        return FALSE
    if f is FALSE:
        return TRUE
    if isinstance(f, FAtom):
        return FAtom(f.atom.negated())
    if isinstance(f, FAnd):
        return f_or(tuple(f_not(p) for p in f.parts))
    return f_and(tuple(f_not(p) for p in f.parts))


class _DnfBlowup(Exception):
    pass


def dnf(f) -> list[list[Atom]]:
    """Disjunctive normal form as a list of atom conjunctions."""
    if f is TRUE:
        return [[]]
    if f is FALSE:
        return []
    if isinstance(f, FAtom):
        return [[f.atom]]
    if isinstance(f, FOr):
        out = []
        for p in f.parts:
            out.extend(dnf(p))
            if len(out) > MAX_DNF_DISJUNCTS:
                raise _DnfBlowup
        return out
    out = [[]]
    for p in f.parts:
        step = dnf(p)
        out = [left + right for left in out for right in step]
        if len(out) > MAX_DNF_DISJUNCTS:
            raise _DnfBlowup
    return out


# ---------------------------------------------------------------------------
# runtime state


@dataclass(frozen=True)
class ArrayRef:
    addr: int


class ArrayStorage:
    __slots__ = ("cells", "elem_kind", "read_only", "label")

    def __init__(self, cells, elem_kind: SymKind, read_only: bool = False, label: str = ""):
        self.cells = cells
        self.elem_kind = elem_kind
        self.read_only = read_only
        self.label = label

    def clone(self) -> "ArrayStorage":
        return ArrayStorage(list(self.cells), self.elem_kind, self.read_only, self.label)


class Cursor:
    __slots__ = ("stmts", "idx")

    def __init__(self, stmts, idx: int = 0):
        self.stmts = stmts
        self.idx = idx

    def done(self) -> bool:
        return self.idx >= len(self.stmts)

    def clone(self) -> "Cursor":
        return Cursor(self.stmts, self.idx)


class Frame:
    __slots__ = ("func", "scopes", "control", "ret_target")

    def __init__(self, func: str, params: dict, ret_target: "str | None" = None):
        self.func = func
        self.scopes = [params]
        self.control: list[Cursor] = []
        self.ret_target = ret_target

    def push_block(self, stmts) -> None:
        self.scopes.append({})
        self.control.append(Cursor(stmts))

    def pop_block(self) -> None:
        self.control.pop()
        self.scopes.pop()

    def declare(self, name: str, value) -> None:
        self.scopes[-1][name] = value

    def clone(self) -> "Frame":
        f = Frame(self.func, dict(self.scopes[0]), self.ret_target)
        f.scopes = [dict(s) for s in self.scopes]
        f.control = [c.clone() for c in self.control]
        return f


class Status(enum.Enum):
    RUNNING = "running"
    DONE = "done"


class ExecState:
    __slots__ = (
        "frames",
        "heap",
        "next_addr",
        "globals",
        "pc",
        "pins",
        "trail",
        "prints",
        "status",
    )

    def __init__(self, frames, heap, next_addr, globals_, pc, pins, trail, prints):
        self.frames = frames
        self.heap = heap
        self.next_addr = next_addr
        self.globals = globals_
        self.pc = pc
        self.pins = pins
        self.trail = trail
        self.prints = prints
        self.status = Status.RUNNING

    def clone(self) -> "ExecState":
        st = ExecState(
            [f.clone() for f in self.frames],
            {addr: s.clone() for addr, s in self.heap.items()},
            self.next_addr,
            self.globals,
            self.pc,
            dict(self.pins),
            list(self.trail),
            list(self.prints),
        )
        return st

    def alloc(self, storage: ArrayStorage) -> ArrayRef:
        addr = self.next_addr
        self.next_addr += 1
        self.heap[addr] = storage
        return ArrayRef(addr)

    def lookup(self, name: str):
        frame = self.frames[-1]
        for scope in reversed(frame.scopes):
            if name in scope:
                return scope[name]
        return self.globals.get(name)

    def assign_var(self, name: str, value) -> None:
        frame = self.frames[-1]
        for scope in reversed(frame.scopes):
            if name in scope:
                scope[name] = value
                return
        raise AssertionError(f"assignment to undeclared '{name}'")

    def depth(self) -> int:
        return len(self.trail)


# ---------------------------------------------------------------------------
# violations


@dataclass
class Violation:
    prop: Property
    certainty: Certainty
    loc: Loc
    message: str
    trail: tuple
    witness: "dict[SymConst, int | Fraction] | None"
    detail: "list[tuple[str, str]] | None" = None

    @property
    def depth(self) -> int:
        return len(self.trail)


class Violating(Exception):
    """Raised inside evaluation when a path hits a definite error site."""

    def __init__(self, prop: Property, loc: Loc, message: str, force_maybe: bool = False):
        super().__init__(message)
        self.prop = prop
        self.loc = loc
        self.message = message
        self.force_maybe = force_maybe


class NeedsConcretize(Exception):
    """A strict position needs a concrete int; carries the symbol to pin."""

    def __init__(self, sym: SymConst):
        super().__init__(sym.render())
        self.sym = sym


class EngineInitError(Exception):
    pass


# ---------------------------------------------------------------------------
# choice policies


class ExploreAll:
    def pick_branch(self, feasible: list[bool]) -> list[bool]:
        return feasible

    def pick_choice(self, fanout: int) -> list[int]:
        return list(range(fanout))

    def pick_concrete(self, name: str, feasible: list[int], fanout: int) -> list[int]:
        return feasible


class RandomPolicy:
    def __init__(self, rng: Random):
        self.rng = rng

    def pick_branch(self, feasible: list[bool]) -> list[bool]:
        return [self.rng.choice(feasible)]

    def pick_choice(self, fanout: int) -> list[int]:
        return [self.rng.randrange(fanout)]

    def pick_concrete(self, name: str, feasible: list[int], fanout: int) -> list[int]:
        return [self.rng.choice(feasible)]


class TrailPolicy:
    def __init__(self, trail: list[Decision]):
        self.trail = trail
        self.pos = 0

    def _next(self, want: str) -> Decision:
        if self.pos >= len(self.trail):
            raise TrailMismatch(f"trail ended but the path needs another {want} decision")
        d = self.trail[self.pos]
        self.pos += 1
        return d

    def exhausted(self) -> bool:
        return self.pos >= len(self.trail)

    def pick_branch(self, feasible: list[bool]) -> list[bool]:
        d = self._next("branch")
        if not isinstance(d, Branch):
            raise TrailMismatch(f"expected a branch decision, trail has {d.render()}")
        if d.then_taken not in feasible:
            raise TrailMismatch(f"{d.render()} is not feasible here")
        return [d.then_taken]

    def pick_choice(self, fanout: int) -> list[int]:
        d = self._next("choice")
        if not isinstance(d, ChooseInt):
            raise TrailMismatch(f"expected a choice decision, trail has {d.render()}")
        if d.fanout != fanout:
            raise TrailMismatch(f"{d.render()} at a site with {fanout} alternatives")
        if not 0 <= d.index < fanout:
            raise TrailMismatch(f"{d.render()} is out of range")
        return [d.index]

    def pick_concrete(self, name: str, feasible: list[int], fanout: int) -> list[int]:
        d = self._next("concretization")
        if not isinstance(d, ConcretizeInt):
            raise TrailMismatch(f"expected a concretization, trail has {d.render()}")
        if d.name != name or d.fanout != fanout:
            raise TrailMismatch(
                f"{d.render()} at a site pinning {name} with {fanout} feasible values"
            )
        if d.value not in feasible:
            raise TrailMismatch(f"{d.render()} is not feasible here")
        return [d.value]


# ---------------------------------------------------------------------------
# stats and configuration


@dataclass
class Stats:
    states: int = 0
    terminals: int = 0
    pruned: int = 0
    solver_calls: int = 0

    def merge(self, other: "Stats") -> None:
        self.states += other.states
        self.terminals += other.terminals
        self.pruned += other.pruned
        self.solver_calls += other.solver_calls


@dataclass
class SearchConfig:
    budget: int = DEFAULT_BUDGET
    seed: int = 0
    max_depth: int = 0  # 0 means unlimited
    workers: int = 1
    first_only: bool = False
    overrides: dict = field(default_factory=dict)


@dataclass
class SearchResult:
    violations: list
    stats: Stats
    incomplete: bool
    inputs_desc: list


_REL_OF = {"<": Rel.LT, "<=": Rel.LE, "==": Rel.EQ, "!=": Rel.NE}


class Engine:
    """Holds the validated program plus everything shared across paths."""

    def __init__(self, program: ast.Program, config: SearchConfig):
        diags = ast.validate(program)
        if diags:
            raise EngineInitError("; ".join(d.render() for d in diags))
        self.program = program
        self.config = config
        self.funcs = {f.name: f for f in program.funcs}
        self.inputs_desc: list[str] = []

    # --- initial state ---

    def init_state(
        self,
        random_reals: "Random | None" = None,
        fixed_reals: "dict[str, list[Fraction]] | None" = None,
    ) -> ExecState:
        overrides = dict(self.config.overrides)
        for name in overrides:
            matches = [d for d in self.program.inputs if d.name == name]
            if not matches or matches[0].ty is not ast.Type.INT:
                raise EngineInitError(f"-input{name} does not name an int input")
        self.inputs_desc = []
        globals_: dict[str, object] = {}
        heap: dict[int, ArrayStorage] = {}
        next_addr = 0
        ordinal = 0
        for decl in self.program.inputs:
            if decl.ty is ast.Type.INT:
                if decl.name in overrides:
                    globals_[decl.name] = ConcreteInt(overrides[decl.name])
                    self.inputs_desc.append(f"{decl.name} = {overrides[decl.name]} (override)")
                elif decl.default is not None:
                    globals_[decl.name] = ConcreteInt(decl.default)
                    self.inputs_desc.append(f"{decl.name} = {decl.default} (default)")
                else:
                    sym = SymConst(decl.name, None, SymKind.INT, ordinal)
                    ordinal += 1
                    globals_[decl.name] = SymInt(Poly.symbol(sym))
                    self.inputs_desc.append(f"{decl.name} : int, symbolic")
            else:
                extent = _input_extent(decl, globals_)
                cells = []
                if fixed_reals is not None and decl.name in fixed_reals:
                    given = fixed_reals[decl.name]
                    if len(given) != extent:
                        raise EngineInitError(
                            f"input '{decl.name}' needs {extent} values, got {len(given)}"
                        )
                    cells = [RealVal(Poly.const(Fraction(v))) for v in given]
                    self.inputs_desc.append(f"{decl.name} : real[{extent}], given")
                elif random_reals is not None:
                    cells = [
                        RealVal(
                            Poly.const(
                                Fraction(
                                    random_reals.randint(-99, 99),
                                    random_reals.randint(1, 16),
                                )
                            )
                        )
                        for _ in range(extent)
                    ]
                    self.inputs_desc.append(f"{decl.name} : real[{extent}], random")
                else:
                    for i in range(extent):
                        sym = SymConst(decl.name, i, SymKind.REAL, ordinal)
                        ordinal += 1
                        cells.append(RealVal(Poly.symbol(sym)))
                    self.inputs_desc.append(f"{decl.name} : real[{extent}], symbolic")
                storage = ArrayStorage(cells, SymKind.REAL, read_only=True, label=decl.name)
                heap[next_addr] = storage
                globals_[decl.name] = ArrayRef(next_addr)
                next_addr += 1
        main = self.funcs["main"]
        frame = Frame("main", {})
        frame.push_block(main.body.stmts)
        state = ExecState([frame], heap, next_addr, globals_, PathCondition(), {}, [], [])
        _normalize(state)
        return state


def _input_extent(decl: ast.InputDecl, globals_: dict) -> int:
    def ev(e: ast.Expr) -> int:
        if isinstance(e, ast.IntLit):
            return e.value
        if isinstance(e, ast.Name):
            v = globals_[e.name]
            if isinstance(v, ConcreteInt):
                return v.value
            raise EngineInitError(
                f"extent of input '{decl.name}' depends on '{e.name}', which has no "
                f"concrete value; give it a default or an -input override"
            )
        if isinstance(e, ast.Unary) and e.op == "-":
            return -ev(e.operand)
        if isinstance(e, ast.Binary) and e.op in ("+", "-", "*"):
            a, b = ev(e.lhs), ev(e.rhs)
            return a + b if e.op == "+" else a - b if e.op == "-" else a * b
        raise EngineInitError(f"extent of input '{decl.name}' is not a simple int expression")

    n = ev(decl.extent)
    if n < 0:
        raise EngineInitError(f"extent of input '{decl.name}' is negative ({n})")
    if n > MAX_ARRAY_CELLS:
        raise EngineInitError(f"extent of input '{decl.name}' is too large ({n})")
    return n


def _fan(state: ExecState, n: int) -> list[ExecState]:
    """n working copies of state; the original is reused as the last one."""
    if n == 1:
        return [state]
    return [state.clone() for _ in range(n - 1)] + [state]


class _Executor:
    """Per-task execution context: one policy, private stats and findings."""

    def __init__(self, engine: Engine, policy):
        self.eng = engine
        self.policy = policy
        self.stats = Stats()
        self.violations: list[Violation] = []
        self.incomplete = False

    def sat(self, pc: PathCondition):
        self.stats.solver_calls += 1
        return pc_sat(pc, self.eng.config.budget, self.eng.config.seed)

    # --- expression evaluation (pure: no state mutation) ---

    def _subst(self, state: ExecState, v: SymValue) -> SymValue:
        if isinstance(v, SymInt) and state.pins:
            return make_int(v.poly.substitute(state.pins))
        return v

    def _array(self, state: ExecState, base: ast.Name) -> ArrayStorage:
        ref = state.lookup(base.name)
        assert isinstance(ref, ArrayRef), f"'{base.name}' is not an array"
        return state.heap[ref.addr]

    def _int_value(self, state: ExecState, e: ast.Expr) -> int:
        v = self.eval_value(state, e)
        if isinstance(v, ConcreteInt):
            return v.value
        assert isinstance(v, SymInt)
        sym = min(v.poly.symbols(), key=lambda s: s.ord)
        raise NeedsConcretize(sym)

    def eval_value(self, state: ExecState, e: ast.Expr) -> SymValue:
        if isinstance(e, ast.IntLit):
            return ConcreteInt(e.value)
        if isinstance(e, ast.DecLit):
            return RealVal(Poly.const(e.value))
        if isinstance(e, ast.Name):
            v = state.lookup(e.name)
            assert v is not None, f"unknown name '{e.name}' survived validation"
            if v is UNDEFINED:
                raise Violating(
                    Property.READ_UNDEFINED, e.loc, f"'{e.name}' is read before assignment"
                )
            return self._subst(state, v)
        if isinstance(e, ast.Index):
            storage = self._array(state, e.base)
            i = self._int_value(state, e.index)
            if i < 0 or i >= len(storage.cells):
                raise Violating(
                    Property.OUT_OF_BOUNDS,
                    e.loc,
                    f"index {i} outside '{e.base.name}' of length {len(storage.cells)}",
                )
            cell = storage.cells[i]
            if cell is UNDEFINED:
                raise Violating(
                    Property.READ_UNDEFINED,
                    e.loc,
                    f"'{e.base.name}[{i}]' is read before assignment",
                )
            return self._subst(state, cell)
        if isinstance(e, ast.Unary):
            assert e.op == "-", "boolean operators never reach eval_value"
            v = self.eval_value(state, e.operand)
            if isinstance(v, RealVal):
                return RealVal(-v.poly)
            return make_int(-int_poly(v))
        if isinstance(e, ast.Binary):
            assert e.op in ("+", "-", "*", "/"), "comparisons never reach eval_value"
            lhs = self.eval_value(state, e.lhs)
            rhs = self.eval_value(state, e.rhs)
            if e.ty is ast.Type.INT:
                lp, rp = int_poly(lhs), int_poly(rhs)
                if e.op == "+":
                    return make_int(lp + rp)
                if e.op == "-":
                    return make_int(lp - rp)
                return make_int(lp * rp)
            lp, rp = lhs.poly, rhs.poly
            if e.op == "+":
                return RealVal(lp + rp)
            if e.op == "-":
                return RealVal(lp - rp)
            if e.op == "*":
                return RealVal(lp * rp)
            if not rp.is_const():
                raise Violating(
                    Property.DIVISION_BY_ZERO,
                    e.loc,
                    f"cannot show the divisor {rp.render()} is never zero",
                    force_maybe=True,
                )
            if rp.const_value() == 0:
                raise Violating(Property.DIVISION_BY_ZERO, e.loc, "division by zero")
            return RealVal(lp.scale(1 / rp.const_value()))
        if isinstance(e, ast.LenCall):
            assert isinstance(e.arg, ast.Name)
            return ConcreteInt(len(self._array(state, e.arg).cells))
        raise AssertionError(f"eval_value cannot handle {type(e).__name__}")

    def eval_bool(self, state: ExecState, e: ast.Expr):
        if isinstance(e, ast.Unary) and e.op == "!":
            return f_not(self.eval_bool(state, e.operand))
        if isinstance(e, ast.Binary) and e.op in ("&&", "||"):
            lhs = self.eval_bool(state, e.lhs)
            # short-circuit on a decided left side so guarded accesses on
            # the right stay unevaluated, matching run-time behavior
            if e.op == "&&":
                if lhs is FALSE:
                    return FALSE
                return f_and((lhs, self.eval_bool(state, e.rhs)))
            if lhs is TRUE:
                return TRUE
            return f_or((lhs, self.eval_bool(state, e.rhs)))
        if isinstance(e, ast.Binary) and e.op in _REL_OF:
            lhs = self.eval_value(state, e.lhs)
            rhs = self.eval_value(state, e.rhs)
            if e.lhs.ty is ast.Type.REAL:
                poly = lhs.poly - rhs.poly
                kind = SymKind.REAL
            else:
                poly = int_poly(lhs) - int_poly(rhs)
                kind = SymKind.INT
            return self._atom_formula(Atom(kind, _REL_OF[e.op], poly))
        if isinstance(e, ast.EqualsCall):
            assert isinstance(e.lhs, ast.Name) and isinstance(e.rhs, ast.Name)
            a = self._array(state, e.lhs)
            b = self._array(state, e.rhs)
            if len(a.cells) != len(b.cells):
                return FALSE
            parts = []
            for i in range(len(a.cells)):
                for arr, name in ((a, e.lhs.name), (b, e.rhs.name)):
                    if arr.cells[i] is UNDEFINED:
                        raise Violating(
                            Property.READ_UNDEFINED,
                            e.loc,
                            f"'{name}[{i}]' is read before assignment",
                        )
                va = self._subst(state, a.cells[i])
                vb = self._subst(state, b.cells[i])
                if a.elem_kind is SymKind.REAL:
                    poly = va.poly - vb.poly
                else:
                    poly = int_poly(va) - int_poly(vb)
                parts.append(self._atom_formula(Atom(a.elem_kind, Rel.EQ, poly)))
            return f_and(parts)
        raise AssertionError(f"eval_bool cannot handle {type(e).__name__}")

    @staticmethod
    def _atom_formula(atom: Atom):
        if atom.poly.is_const():
            return TRUE if atom.holds({}) else FALSE
        return FAtom(atom)

    # --- forks ---

    def branch_walk(self, state: ExecState, f) -> list[tuple[ExecState, bool]]:
        if f is TRUE:
            return [(state, True)]
        if f is FALSE:
            return [(state, False)]
        if isinstance(f, FAtom):
            sides = []
            for taken, atom in ((True, f.atom), (False, f.atom.negated())):
                pc2 = state.pc.add(atom)
                if self.sat(pc2).status is SatStatus.UNSAT:
                    self.stats.pruned += 1
                    continue
                sides.append((taken, pc2))
            if not sides:
                return []
            picks = self.policy.pick_branch([t for t, _ in sides])
            chosen = [(t, pc2) for t, pc2 in sides if t in picks]
            out = []
            for st, (taken, pc2) in zip(_fan(state, len(chosen)), chosen):
                st.pc = pc2
                st.trail.append(Branch(taken))
                out.append((st, taken))
            return out
        if isinstance(f, FAnd):
            head, rest = f.parts[0], f_and(f.parts[1:])
            out = []
            for st, truth in self.branch_walk(state, head):
                if truth:
                    out.extend(self.branch_walk(st, rest))
                else:
                    out.append((st, False))
            return out
        if isinstance(f, FOr):
            head, rest = f.parts[0], f_or(f.parts[1:])
            out = []
            for st, truth in self.branch_walk(state, head):
                if truth:
                    out.append((st, True))
                else:
                    out.extend(self.branch_walk(st, rest))
            return out
        raise AssertionError(f"not a formula: {f!r}")

    def _concretize(self, state: ExecState, sym: SymConst) -> list[ExecState]:
        lo, hi = state.pc.bounds(sym)
        if lo is None or hi is None:
            raise UnboundedSymbol(sym)
        if hi - lo + 1 > self.eng.config.budget:
            raise EnumerationBudgetExceeded(hi - lo + 1, self.eng.config.budget)
        feasible = []
        for v in range(lo, hi + 1):
            pin = Atom(SymKind.INT, Rel.EQ, Poly.symbol(sym) - Poly.const(v))
            pc2 = state.pc.add(pin)
            if self.sat(pc2).status is SatStatus.UNSAT:
                self.stats.pruned += 1
                continue
            feasible.append((v, pc2))
        if not feasible:
            return []
        fanout = len(feasible)
        picks = self.policy.pick_concrete(sym.render(), [v for v, _ in feasible], fanout)
        chosen = [(v, pc2) for v, pc2 in feasible if v in picks]
        out = []
        for st, (v, pc2) in zip(_fan(state, len(chosen)), chosen):
            st.pc = pc2
            st.pins[sym] = v
            st.trail.append(ConcretizeInt(sym.render(), v, fanout, sym.ord))
            out.append(st)
        return out

    # --- violations ---

    def _record(self, violation: Violation) -> None:
        self.violations.append(violation)

    def _violation_from_exc(self, state: ExecState, exc: Violating) -> None:
        res = self.sat(state.pc)
        if res.status is SatStatus.UNSAT:
            self.stats.pruned += 1
            return
        if res.status is SatStatus.SAT and not exc.force_maybe:
            certainty, witness = Certainty.PROVEABLE, res.witness
        else:
            certainty, witness = Certainty.MAYBE, None
        self._record(
            Violation(exc.prop, certainty, exc.loc, exc.message, tuple(state.trail), witness)
        )

    def _budget_violation(self, state: ExecState, exc: Exception, loc: Loc) -> None:
        self.incomplete = True
        self._record(
            Violation(
                Property.ENUM_BUDGET,
                Certainty.MAYBE,
                loc,
                str(exc),
                tuple(state.trail),
                None,
            )
        )

    # --- statements ---

    def step(self, state: ExecState) -> list[ExecState]:
        self.stats.states += 1
        if self.eng.config.max_depth and state.depth() >= self.eng.config.max_depth:
            self.incomplete = True
            return []
        frame = state.frames[-1]
        cursor = frame.control[-1]
        stmt = cursor.stmts[cursor.idx]
        try:
            succs = self._exec(state, stmt)
        except NeedsConcretize as nc:
            try:
                return self._concretize(state, nc.sym)
            except (UnboundedSymbol, EnumerationBudgetExceeded) as exc:
                self._budget_violation(state, exc, stmt.loc)
                return []
        except Violating as exc:
            try:
                self._violation_from_exc(state, exc)
            except (UnboundedSymbol, EnumerationBudgetExceeded) as budget_exc:
                self._budget_violation(state, budget_exc, exc.loc)
            return []
        except (UnboundedSymbol, EnumerationBudgetExceeded) as exc:
            self._budget_violation(state, exc, stmt.loc)
            return []
        for s in succs:
            _normalize(s)
        return succs

    def _exec(self, state: ExecState, s: ast.Stmt) -> list[ExecState]:
        frame = state.frames[-1]
        cursor = frame.control[-1]
        if isinstance(s, ast.VarDecl):
            v = self.eval_value(state, s.init) if s.init is not None else UNDEFINED
            cursor.idx += 1
            frame.declare(s.name, v)
            return [state]
        if isinstance(s, ast.ArrDecl):
            n = self._int_value(state, s.extent)
            if n < 0:
                raise Violating(
                    Property.OUT_OF_BOUNDS, s.extent.loc, f"negative extent {n} for '{s.name}'"
                )
            if n > MAX_ARRAY_CELLS:
                raise EnumerationBudgetExceeded(n, MAX_ARRAY_CELLS)
            kind = SymKind.INT if s.elem_ty is ast.Type.INT else SymKind.REAL
            cursor.idx += 1
            ref = state.alloc(ArrayStorage([UNDEFINED] * n, kind, False, s.name))
            frame.declare(s.name, ref)
            return [state]
        if isinstance(s, ast.Assign):
            v = self.eval_value(state, s.value)
            if isinstance(s.target, ast.Name):
                cursor.idx += 1
                state.assign_var(s.target.name, v)
                return [state]
            storage = self._array(state, s.target.base)
            i = self._int_value(state, s.target.index)
            if i < 0 or i >= len(storage.cells):
                raise Violating(
                    Property.OUT_OF_BOUNDS,
                    s.target.loc,
                    f"index {i} outside '{s.target.base.name}' of length {len(storage.cells)}",
                )
            if storage.read_only:
                raise Violating(
                    Property.WRITE_TO_INPUT, s.loc, f"write to input '{storage.label}'"
                )
            cursor.idx += 1
            storage.cells[i] = v
            return [state]
        if isinstance(s, ast.ChooseAssign):
            k = self._int_value(state, s.arg)
            if k <= 0:
                self.stats.pruned += 1
                return []
            cursor.idx += 1
            picks = self.policy.pick_choice(k)
            out = []
            for st, i in zip(_fan(state, len(picks)), picks):
                st.trail.append(ChooseInt(i, k))
                st.assign_var(s.target.name, ConcreteInt(i))
                out.append(st)
            return out
        if isinstance(s, ast.Block):
            cursor.idx += 1
            frame.push_block(s.stmts)
            return [state]
        if isinstance(s, ast.CallStmt):
            callee = self.eng.funcs[s.name]
            args = [self.eval_value(state, a) for a in s.args]
            cursor.idx += 1
            nf = Frame(
                callee.name,
                {p.name: v for p, v in zip(callee.params, args)},
                s.target.name if s.target is not None else None,
            )
            nf.push_block(callee.body.stmts)
            state.frames.append(nf)
            return [state]
        if isinstance(s, ast.If):
            f = self.eval_bool(state, s.cond)
            cursor.idx += 1
            out = []
            for st, truth in self.branch_walk(state, f):
                fr = st.frames[-1]
                if truth:
                    fr.push_block(s.then.stmts)
                elif isinstance(s.els, ast.Block):
                    fr.push_block(s.els.stmts)
                elif isinstance(s.els, ast.If):
                    fr.push_block((s.els,))
                out.append(st)
            return out
        if isinstance(s, ast.While):
            f = self.eval_bool(state, s.cond)
            out = []
            for st, truth in self.branch_walk(state, f):
                fr = st.frames[-1]
                if truth:
                    fr.push_block(s.body.stmts)
                else:
                    fr.control[-1].idx += 1
                out.append(st)
            return out
        if isinstance(s, ast.Assert):
            return self._check_assert(state, s)
        if isinstance(s, ast.Assume):
            f = self.eval_bool(state, s.cond)
            cursor.idx += 1
            return self._apply_assume(state, f)
        if isinstance(s, ast.Return):
            v = self.eval_value(state, s.value) if s.value is not None else None
            if len(state.frames) == 1:
                state.status = Status.DONE
                return [state]
            target = frame.ret_target
            state.frames.pop()
            if target is not None:
                state.assign_var(target, v)
            return [state]
        if isinstance(s, ast.Print):
            line = self._render_print(state, s.args)
            cursor.idx += 1
            state.prints.append(line)
            return [state]
        raise AssertionError(f"unhandled statement {type(s).__name__}")

    def _apply_assume(self, state: ExecState, f) -> list[ExecState]:
        if f is TRUE:
            return [state]
        if f is FALSE:
            self.stats.pruned += 1
            return []
        conjuncts = f.parts if isinstance(f, FAnd) else (f,)
        if all(isinstance(p, FAtom) for p in conjuncts):
            pc = state.pc
            for p in conjuncts:
                pc = pc.add(p.atom)
            if self.sat(pc).status is SatStatus.UNSAT:
                self.stats.pruned += 1
                return []
            state.pc = pc
            return [state]
        out = []
        for st, truth in self.branch_walk(state, f):
            if truth:
                out.append(st)
            else:
                self.stats.pruned += 1
        return out

    def _check_assert(self, state: ExecState, s: ast.Assert) -> list[ExecState]:
        f = self.eval_bool(state, s.cond)
        neg = f_not(f)
        if neg is FALSE:
            state.frames[-1].control[-1].idx += 1
            return [state]
        try:
            disjuncts = dnf(neg)
        except _DnfBlowup:
            self._record(
                Violation(
                    Property.ASSERTION_VIOLATION,
                    Certainty.MAYBE,
                    s.loc,
                    "condition is too large to check",
                    tuple(state.trail),
                    None,
                )
            )
            return []
        saw_unknown = False
        for atoms in disjuncts:
            pc = state.pc
            for a in atoms:
                pc = pc.add(a)
            res = self.sat(pc)
            if res.status is SatStatus.SAT:
                detail = self._assert_detail(state, s, res.witness)
                self._record(
                    Violation(
                        Property.ASSERTION_VIOLATION,
                        Certainty.PROVEABLE,
                        s.loc,
                        "asserted condition fails",
                        tuple(state.trail),
                        res.witness,
                        detail,
                    )
                )
                return []
            if res.status is SatStatus.UNKNOWN:
                saw_unknown = True
        if saw_unknown:
            self._record(
                Violation(
                    Property.ASSERTION_VIOLATION,
                    Certainty.MAYBE,
                    s.loc,
                    "asserted condition cannot be proved",
                    tuple(state.trail),
                    None,
                )
            )
            return []
        state.frames[-1].control[-1].idx += 1
        return [state]

    def _assert_detail(self, state, s: ast.Assert, witness) -> "list[tuple[str, str]] | None":
        if not isinstance(s.cond, ast.EqualsCall):
            return None
        cond = s.cond
        if not (isinstance(cond.lhs, ast.Name) and isinstance(cond.rhs, ast.Name)):
            return None
        out = []
        for name_expr in (cond.lhs, cond.rhs):
            storage = self._array(state, name_expr)
            vals = []
            for cell in storage.cells:
                vals.append(_render_under(self._subst(state, cell), witness))
            out.append((name_expr.name, "[ " + " ".join(vals) + " ]" if vals else "[ ]"))
        return out

    # --- printing ---

    def _render_print(self, state: ExecState, args) -> str:
        parts = []
        for a in args:
            if isinstance(a, ast.StrLit):
                parts.append(a.value)
                continue
            if a.ty is not None and a.ty.is_array():
                assert isinstance(a, ast.Name)
                storage = self._array(state, a)
                cells = [self._render_value(state, c) for c in storage.cells]
                parts.append("[ " + " ".join(cells) + " ]" if cells else "[ ]")
                continue
            v = self.eval_value(state, a)
            parts.append(self._render_value(state, v))
        return "".join(parts)

    def _render_value(self, state: ExecState, v: SymValue) -> str:
        if v is UNDEFINED:
            return "undef"
        v = self._subst(state, v)
        if isinstance(v, RealVal) and v.poly.is_const():
            return str(v.poly.const_value())
        return v.render()

    # --- search ---

    def dfs(self, root: ExecState, first_only: bool = False, on_terminal=None) -> None:
        stack = [root]
        while stack:
            st = stack.pop()
            if st.status is Status.DONE:
                self.stats.terminals += 1
                if on_terminal is not None:
                    on_terminal(st)
                continue
            succs = self.step(st)
            stack.extend(reversed(succs))
            if first_only and self.violations:
                return


def _normalize(state: ExecState) -> None:
    """Pop exhausted blocks and frames; mark the state done at main's end."""
    while state.frames:
        frame = state.frames[-1]
        while frame.control and frame.control[-1].done():
            if len(frame.control) == 1 and len(state.frames) == 1:
                state.status = Status.DONE
                return
            frame.pop_block()
        if frame.control:
            return
        # a void function fell off its end
        state.frames.pop()
    state.status = Status.DONE


def _render_under(v: SymValue, witness) -> str:
    if v is UNDEFINED:
        return "undef"
    if isinstance(v, ConcreteInt):
        return str(v.value)
    poly = v.poly
    if witness is None:
        return poly.render()
    point = {sym: witness.get(sym, 0) for sym in poly.symbols()}
    return str(poly.eval(point))


# ---------------------------------------------------------------------------
# entry points


def explore(program: ast.Program, config: SearchConfig, on_terminal=None) -> SearchResult:
    eng = Engine(program, config)
    root = eng.init_state()
    if config.first_only or config.workers <= 1:
        ex = _Executor(eng, ExploreAll())
        ex.dfs(root, first_only=config.first_only, on_terminal=on_terminal)
        violations, stats, incomplete = ex.violations, ex.stats, ex.incomplete
    else:
        seed_ex = _Executor(eng, ExploreAll())
        hook = on_terminal
        if hook is not None:
            lock = threading.Lock()
            plain = on_terminal

            def hook(st, _lock=lock, _plain=plain):
                with _lock:
                    _plain(st)

        frontier: list[ExecState] = [root]
        target = config.workers * 8
        while frontier and len(frontier) < target:
            st = frontier.pop(0)
            if st.status is Status.DONE:
                seed_ex.stats.terminals += 1
                if hook is not None:
                    hook(st)
                continue
            frontier.extend(seed_ex.step(st))
        tasks = frontier

        def work(st: ExecState) -> _Executor:
            ex = _Executor(eng, ExploreAll())
            ex.dfs(st, on_terminal=hook)
            return ex

        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            results = list(pool.map(work, tasks))
        violations = list(seed_ex.violations)
        stats = seed_ex.stats
        incomplete = seed_ex.incomplete
        for ex in results:
            violations.extend(ex.violations)
            stats.merge(ex.stats)
            incomplete = incomplete or ex.incomplete
    violations.sort(key=lambda v: trail_key(v.trail))
    return SearchResult(violations, stats, incomplete, eng.inputs_desc)


@dataclass
class PathOutcome:
    state: "ExecState | None"
    violations: list
    prints: list


def _follow(ex: _Executor, state: ExecState) -> PathOutcome:
    while state.status is not Status.DONE:
        succs = ex.step(state)
        if not succs:
            prints = list(state.prints)
            return PathOutcome(None, ex.violations, prints)
        assert len(succs) == 1, "policy must yield a single successor"
        state = succs[0]
    return PathOutcome(state, ex.violations, list(state.prints))


def replay(program: ast.Program, config: SearchConfig, trail: list[Decision]) -> PathOutcome:
    eng = Engine(program, config)
    policy = TrailPolicy(trail)
    ex = _Executor(eng, policy)
    outcome = _follow(ex, eng.init_state())
    if outcome.state is not None and not policy.exhausted():
        unused = len(policy.trail) - policy.pos
        raise TrailMismatch(f"path finished with {unused} unused trail decision(s)")
    return outcome


def run_path(
    program: ast.Program,
    config: SearchConfig,
    trail: "list[Decision] | None" = None,
    reals: "dict[str, list[Fraction]] | None" = None,
) -> PathOutcome:
    """Execute one path with concrete real inputs: given values or seeded
    random ones, following the trail if given and random choices if not."""
    eng = Engine(program, config)
    rng = Random(config.seed)
    if reals is not None:
        state = eng.init_state(fixed_reals=reals)
    else:
        state = eng.init_state(random_reals=rng)
    policy = TrailPolicy(trail) if trail is not None else RandomPolicy(rng)
    ex = _Executor(eng, policy)
    outcome = _follow(ex, state)
    if trail is not None and outcome.state is not None and not policy.exhausted():
        unused = len(policy.trail) - policy.pos
        raise TrailMismatch(f"path finished with {unused} unused trail decision(s)")
    return outcome


def run_random(program: ast.Program, config: SearchConfig) -> PathOutcome:
    return run_path(program, config)


def run_concrete(
    program: ast.Program,
    config: SearchConfig,
    trail: list[Decision],
    reals: dict[str, list[Fraction]],
) -> PathOutcome:
    return run_path(program, config, trail=trail, reals=reals)
