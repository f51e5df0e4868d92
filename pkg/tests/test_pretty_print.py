from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from vlsym.ast import frac_to_decimal, pretty_print
from vlsym.parser import parse_program

SAMPLES = [
    "func main() {}",
    "input int N_B = 3;\ninput int N;\ninput real V[N_B];\nfunc main() { assume(1 <= N); }",
    """
func f(int n, real[] v) -> real {
  var real s = 0.0;
  var int i;
  for (i = 0; i < n; i++) {
    if (v[i] < 0.0) {
      s = s - v[i];
    } else if (v[i] < 1.0) {
      s = s + 1.0;
    } else {
      s = s + v[i];
    }
  }
  return s;
}
func main() {
  var int x;
  x = choose_int(4);
  while (0 < x) {
    x = x - 1;
  }
  print("x: ", x);
}
""",
    "func main() { var int x = (1 + 2) * 3 - (4 - 5); assert(!(x < 0) || x == 0); }",
    "func main() { var real a[3]; a[0] = 0.5; assert(equals(a, a) && len(a) == 3); }",
]


@pytest.mark.parametrize("src", SAMPLES)
def test_round_trip(src):
    prog = parse_program(src)
    printed = pretty_print(prog)
    again = parse_program(printed)
    assert again == prog


@pytest.mark.parametrize("src", SAMPLES)
def test_idempotent(src):
    printed = pretty_print(parse_program(src))
    assert pretty_print(parse_program(printed)) == printed


def test_minimal_parens():
    out = pretty_print(parse_program("func main() { var int x = 1 + 2 * 3; }"))
    assert "var int x = 1 + 2 * 3;" in out
    out = pretty_print(parse_program("func main() { var int x = (1 + 2) * 3; }"))
    assert "var int x = (1 + 2) * 3;" in out
    out = pretty_print(parse_program("func main() { var int x = 1 - (2 - 3); }"))
    assert "var int x = 1 - (2 - 3);" in out
    out = pretty_print(parse_program("func main() { var int x = 1 - 2 - 3; }"))
    assert "var int x = 1 - 2 - 3;" in out


def test_flipped_comparison_prints_flipped():
    out = pretty_print(parse_program("func main() { var int a = 1; assert(a > 0); }"))
    assert "assert(0 < a);" in out


def test_decimal_rendering():
    assert frac_to_decimal(Fraction(1, 10)) == "0.1"
    assert frac_to_decimal(Fraction(5, 2)) == "2.5"
    assert frac_to_decimal(Fraction(2)) == "2.0"
    assert frac_to_decimal(Fraction(0)) == "0.0"
    assert frac_to_decimal(Fraction(125, 1000)) == "0.125"
    with pytest.raises(ValueError):
        frac_to_decimal(Fraction(1, 3))


@given(st.integers(0, 10**6), st.integers(0, 6))
def test_decimal_round_trips(num, places):
    v = Fraction(num, 10**places)
    text = frac_to_decimal(v)
    whole, frac = text.split(".")
    assert Fraction(int(whole + frac), 10 ** len(frac)) == v


def test_for_desugar_round_trips():
    src = (
        "func main() {\n"
        "  var int s = 0;\n"
        "  {\n"
        "    var int i = 0;\n"
        "    while (i < 4) {\n"
        "      s = s + i;\n"
        "      i = i + 1;\n"
        "    }\n"
        "  }\n"
        "  print(s);\n"
        "}\n"
    )
    prog = parse_program(
        "func main() { var int s = 0;"
        " for (var int i = 0; i < 4; i++) { s = s + i; } print(s); }"
    )
    assert pretty_print(prog) == src
    assert pretty_print(parse_program(src)) == src
