"""Noncommutative expressions: AST, parser, pretty-printer, evaluation.

Expressions live in the free algebra over variables x1..xd with complex
scalar constants, formal negation, and formal inverses.  Product order is
preserved exactly; there is no simplification.  Evaluation substitutes the
components of a :class:`~freecalc.linalg.MatrixTuple` for the variables,
sends a constant c to c times the identity, and realizes ``inv`` by direct
matrix inversion.

Grammar (whitespace-insensitive except inside complex literals)::

    expr   := term (('+'|'-') term)*
    term   := factor ('*' factor)*
    factor := scalar | 'x'INT | '(' expr ')' | 'inv' '(' expr ')'
            | factor '^' UINT | '-' factor
    scalar := NUM | NUM 'i' | NUM('+'|'-')NUM'i'     (no internal spaces)

``^`` expands to a repeated product at parse time.  A leading ``-`` on a
factor is accepted so that every AST the pretty-printer emits re-parses to
an identical AST.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

import numpy as np

from .errors import ArityError, InvalidInput, ParseError, SingularError
from .linalg import MatrixTuple, op_norm, svd_extremes

__all__ = [
    "NcExpr",
    "Const",
    "Var",
    "Sum",
    "Prod",
    "Neg",
    "Inv",
    "NcMap",
    "UNBOUNDED",
    "parse",
    "parse_map",
    "pretty",
    "evaluate",
    "eval_map",
    "EvalStats",
    "poly_degree",
    "max_var_index",
    "nc_sum",
    "nc_prod",
]

# Degree reported for expressions containing a formal inverse.
UNBOUNDED = math.inf

# Inverses of matrices conditioned worse than this raise SingularError.
INV_COND_CAP = 1e12


class NcExpr:
    """Base class of all expression nodes."""

    __slots__ = ()


@dataclass(frozen=True)
class Const(NcExpr):
    """Scalar constant, meaning (value * identity) under evaluation."""

    value: complex

    def __post_init__(self):
        v = complex(self.value)
        if not (math.isfinite(v.real) and math.isfinite(v.imag)):
            raise InvalidInput("expression constants must be finite")
        object.__setattr__(self, "value", v)


@dataclass(frozen=True)
class Var(NcExpr):
    """Variable x{index}, 1-based."""

    index: int

    def __post_init__(self):
        if not isinstance(self.index, int) or self.index < 1:
            raise InvalidInput("variable indices are 1-based positive integers")


@dataclass(frozen=True)
class Sum(NcExpr):
    terms: tuple[NcExpr, ...]

    def __post_init__(self):
        terms = tuple(self.terms)
        if len(terms) < 2 or not all(isinstance(t, NcExpr) for t in terms):
            raise InvalidInput("Sum needs at least two NcExpr terms")
        object.__setattr__(self, "terms", terms)


@dataclass(frozen=True)
class Prod(NcExpr):
    factors: tuple[NcExpr, ...]

    def __post_init__(self):
        factors = tuple(self.factors)
        if len(factors) < 2 or not all(isinstance(f, NcExpr) for f in factors):
            raise InvalidInput("Prod needs at least two NcExpr factors")
        object.__setattr__(self, "factors", factors)


@dataclass(frozen=True)
class Neg(NcExpr):
    operand: NcExpr


@dataclass(frozen=True)
class Inv(NcExpr):
    operand: NcExpr


def nc_sum(terms) -> NcExpr:
    """Sum of a sequence, collapsing the empty and singleton cases."""
    terms = tuple(terms)
    if not terms:
        return Const(0)
    if len(terms) == 1:
        return terms[0]
    return Sum(terms)


def nc_prod(factors) -> NcExpr:
    """Product of a sequence, collapsing the empty and singleton cases."""
    factors = tuple(factors)
    if not factors:
        return Const(1)
    if len(factors) == 1:
        return factors[0]
    return Prod(factors)


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------

_NUM = r"(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?"
_COMPLEX_RE = re.compile(rf"([+-]?{_NUM})([+-]{_NUM})i")
_IMAG_RE = re.compile(rf"([+-]?{_NUM})i")
_REAL_RE = re.compile(rf"[+-]?{_NUM}")
_VAR_RE = re.compile(r"x(\d+)")
_UINT_RE = re.compile(r"\d+")


class _Scanner:
    __slots__ = ("text", "pos")

    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def skip_ws(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self) -> str:
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def at_end(self) -> bool:
        return self.pos >= len(self.text)

    def match(self, regex):
        m = regex.match(self.text, self.pos)
        if m:
            self.pos = m.end()
        return m

    def expect(self, ch: str, what: str):
        self.skip_ws()
        if self.peek() != ch:
            raise ParseError(f"expected {what}", self.pos)
        self.pos += 1


def _parse_factor(st: _Scanner) -> NcExpr:
    st.skip_ws()
    if st.at_end():
        raise ParseError("unexpected end of input", st.pos)
    m = st.match(_COMPLEX_RE)
    if m:
        base = Const(complex(float(m.group(1)), float(m.group(2))))
        return _parse_power(st, base)
    m = st.match(_IMAG_RE)
    if m:
        return _parse_power(st, Const(complex(0.0, float(m.group(1)))))
    m = st.match(_REAL_RE)
    if m:
        return _parse_power(st, Const(complex(float(m.group(0)), 0.0)))
    if st.text.startswith("inv", st.pos):
        st.pos += 3
        st.expect("(", "'(' after inv")
        inner = _parse_expr(st)
        st.expect(")", "closing ')' of inv")
        return _parse_power(st, Inv(inner))
    m = st.match(_VAR_RE)
    if m:
        idx = int(m.group(1))
        if idx < 1:
            raise ArityError("variable indices are 1-based; x0 is not a variable")
        return _parse_power(st, Var(idx))
    ch = st.peek()
    if ch == "(":
        st.pos += 1
        inner = _parse_expr(st)
        st.expect(")", "closing ')'")
        return _parse_power(st, inner)
    if ch == "-":
        st.pos += 1
        return Neg(_parse_factor(st))
    raise ParseError(f"unexpected character {ch!r}", st.pos)


def _parse_power(st: _Scanner, base: NcExpr) -> NcExpr:
    while True:
        st.skip_ws()
        if st.peek() != "^":
            return base
        st.pos += 1
        st.skip_ws()
        m = st.match(_UINT_RE)
        if not m:
            raise ParseError("expected an unsigned integer exponent", st.pos)
        k = int(m.group(0))
        base = nc_prod([base] * k)


def _parse_term(st: _Scanner) -> NcExpr:
    factors = [_parse_factor(st)]
    while True:
        st.skip_ws()
        if st.peek() != "*":
            break
        st.pos += 1
        factors.append(_parse_factor(st))
    return factors[0] if len(factors) == 1 else Prod(tuple(factors))


def _parse_expr(st: _Scanner) -> NcExpr:
    terms = [_parse_term(st)]
    while True:
        st.skip_ws()
        ch = st.peek()
        if ch == "+":
            st.pos += 1
            terms.append(_parse_term(st))
        elif ch == "-":
            st.pos += 1
            terms.append(Neg(_parse_term(st)))
        else:
            break
    return terms[0] if len(terms) == 1 else Sum(tuple(terms))


def max_var_index(e: NcExpr) -> int:
    """Largest variable index appearing in ``e`` (0 if none)."""
    if isinstance(e, Var):
        return e.index
    if isinstance(e, Const):
        return 0
    if isinstance(e, Sum):
        return max(max_var_index(t) for t in e.terms)
    if isinstance(e, Prod):
        return max(max_var_index(f) for f in e.factors)
    if isinstance(e, (Neg, Inv)):
        return max_var_index(e.operand)
    raise InvalidInput(f"unknown expression node {type(e).__name__}")


def parse(text: str, d: int) -> NcExpr:
    """Parse ``text`` into an expression over d variables.

    Raises :class:`ParseError` with a character offset on malformed input
    and :class:`ArityError` when a variable index falls outside [1, d].
    """
    if d < 1:
        raise InvalidInput("d must be positive")
    st = _Scanner(text)
    e = _parse_expr(st)
    st.skip_ws()
    if not st.at_end():
        raise ParseError("unexpected trailing input", st.pos)
    _check_arity(e, d)
    return e


def _check_arity(e: NcExpr, d: int):
    idx = max_var_index(e)
    if idx > d:
        raise ArityError(f"variable index {idx} out of range for d={d}")


# ---------------------------------------------------------------------------
# Pretty-printing (parse(pretty(e), d) == e for every AST)
# ---------------------------------------------------------------------------


def _fmt_real(v: float) -> str:
    return repr(float(v))


def _const_str(c: Const) -> str:
    v = c.value
    if v.imag == 0.0:
        return _fmt_real(v.real)
    if v.real == 0.0:
        return _fmt_real(v.imag) + "i"
    sign = "+" if v.imag > 0 else "-"
    return f"{_fmt_real(v.real)}{sign}{_fmt_real(abs(v.imag))}i"


def _factor_str(e: NcExpr) -> str:
    # Sums and nested products need parentheses inside a product.
    if isinstance(e, (Sum, Prod)):
        return f"({pretty(e)})"
    return pretty(e)


def _chain_term_str(e: NcExpr) -> str:
    # An element of an additive chain; only a nested Sum needs parentheses.
    if isinstance(e, Sum):
        return f"({pretty(e)})"
    return pretty(e)


def pretty(e: NcExpr) -> str:
    """Render an AST in the surface grammar; re-parsing gives back ``e``."""
    if isinstance(e, Const):
        return _const_str(e)
    if isinstance(e, Var):
        return f"x{e.index}"
    if isinstance(e, Inv):
        return f"inv({pretty(e.operand)})"
    if isinstance(e, Neg):
        if isinstance(e.operand, (Var, Inv)):
            return f"-{pretty(e.operand)}"
        return f"-({pretty(e.operand)})"
    if isinstance(e, Prod):
        return " * ".join(_factor_str(f) for f in e.factors)
    if isinstance(e, Sum):
        parts = [_chain_term_str(e.terms[0])]
        for t in e.terms[1:]:
            if isinstance(t, Neg):
                parts.append(f" - {_chain_term_str(t.operand)}")
            else:
                parts.append(f" + {_chain_term_str(t)}")
        return "".join(parts)
    raise InvalidInput(f"unknown expression node {type(e).__name__}")


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------


@dataclass
class EvalStats:
    """Accumulates the largest intermediate operator norm and the worst
    inverse conditioning seen during an evaluation."""

    max_norm: float = 0.0
    worst_cond: float = 1.0

    def observe(self, m: np.ndarray):
        self.max_norm = max(self.max_norm, op_norm(m))

    def observe_cond(self, c: float):
        self.worst_cond = max(self.worst_cond, c)


def _eval(e: NcExpr, x: MatrixTuple, stats: EvalStats | None) -> np.ndarray:
    if isinstance(e, Const):
        r = e.value * np.eye(x.n, dtype=np.complex128)
    elif isinstance(e, Var):
        if e.index > x.d:
            raise ArityError(
                f"variable x{e.index} exceeds the tuple arity d={x.d}"
            )
        r = x[e.index - 1]
    elif isinstance(e, Sum):
        r = _eval(e.terms[0], x, stats).copy()
        for t in e.terms[1:]:
            r += _eval(t, x, stats)
    elif isinstance(e, Prod):
        r = _eval(e.factors[0], x, stats)
        for f in e.factors[1:]:
            r = r @ _eval(f, x, stats)
    elif isinstance(e, Neg):
        r = -_eval(e.operand, x, stats)
    elif isinstance(e, Inv):
        m = _eval(e.operand, x, stats)
        smax, smin = svd_extremes(m)
        if smin == 0.0 or smax / smin > INV_COND_CAP:
            raise SingularError(
                f"inverse of subexpression '{pretty(e.operand)}' is singular "
                "or over-conditioned",
                expr=e,
            )
        r = np.linalg.inv(m)
        if stats is not None:
            stats.observe_cond(smax / smin if smin > 0 else np.inf)
    else:
        raise InvalidInput(f"unknown expression node {type(e).__name__}")
    if stats is not None:
        stats.observe(r)
    return r


def evaluate(e: NcExpr, x: MatrixTuple, stats: EvalStats | None = None) -> np.ndarray:
    """Evaluate ``e`` at the tuple ``x``; the result is n x n."""
    return _eval(e, x, stats)


@dataclass(frozen=True)
class NcMap:
    """A map with r components, each an expression over d variables."""

    d: int
    components: tuple[NcExpr, ...]

    def __post_init__(self):
        if self.d < 1:
            raise InvalidInput("d must be positive")
        comps = tuple(self.components)
        if not comps:
            raise InvalidInput("a map needs at least one component")
        object.__setattr__(self, "components", comps)
        for c in comps:
            if max_var_index(c) > self.d:
                raise ArityError(
                    f"component uses x{max_var_index(c)} but d={self.d}"
                )

    @property
    def r(self) -> int:
        return len(self.components)


def parse_map(texts, d: int) -> NcMap:
    """Parse a list of component expressions into an :class:`NcMap`."""
    return NcMap(d, tuple(parse(t, d) for t in texts))


def eval_map(f: NcMap, x: MatrixTuple, stats: EvalStats | None = None) -> MatrixTuple:
    """Evaluate all components of ``f`` at ``x``; the result is an r-tuple."""
    if x.d != f.d:
        raise ArityError(f"map expects d={f.d} variables, tuple has d={x.d}")
    return MatrixTuple(_eval(c, x, stats) for c in f.components)


def poly_degree(e: NcExpr):
    """Total degree of an inverse-free expression, or UNBOUNDED."""
    if isinstance(e, Const):
        return 0
    if isinstance(e, Var):
        return 1
    if isinstance(e, Sum):
        return max(poly_degree(t) for t in e.terms)
    if isinstance(e, Prod):
        degs = [poly_degree(f) for f in e.factors]
        return UNBOUNDED if UNBOUNDED in degs else sum(degs)
    if isinstance(e, Neg):
        return poly_degree(e.operand)
    if isinstance(e, Inv):
        return UNBOUNDED
    raise InvalidInput(f"unknown expression node {type(e).__name__}")
