"""Shared generators for the test suite: random ASTs, polynomial maps, and
a small pool of representative maps."""

from __future__ import annotations

import numpy as np

from freecalc import (
    Const,
    Inv,
    MatrixTuple,
    NcMap,
    Neg,
    Prod,
    Sum,
    Var,
    parse_map,
)
from freecalc.expr import nc_prod, nc_sum


def random_expr(rng: np.random.Generator, d: int, depth: int = 3):
    """Random AST over d variables, including inverses, negations, and
    complex constants.  Used for parse/pretty round trips."""
    if depth == 0 or rng.random() < 0.3:
        if rng.random() < 0.5:
            return Var(int(rng.integers(1, d + 1)))
        re = round(float(rng.normal()), 3)
        im = round(float(rng.normal()), 3) if rng.random() < 0.5 else 0.0
        return Const(complex(re, im))
    kind = rng.integers(0, 4)
    if kind == 0:
        k = int(rng.integers(2, 4))
        return Sum(tuple(random_expr(rng, d, depth - 1) for _ in range(k)))
    if kind == 1:
        k = int(rng.integers(2, 4))
        return Prod(tuple(random_expr(rng, d, depth - 1) for _ in range(k)))
    if kind == 2:
        return Neg(random_expr(rng, d, depth - 1))
    return Inv(random_expr(rng, d, depth - 1))


def random_word(rng: np.random.Generator, d: int, max_len: int):
    """A product of up to max_len variables (possibly empty -> constant 1)."""
    length = int(rng.integers(0, max_len + 1))
    return nc_prod([Var(int(rng.integers(1, d + 1))) for _ in range(length)])


def random_poly_expr(
    rng: np.random.Generator, d: int, max_degree: int = 4, max_terms: int = 4
):
    """Inverse-free random polynomial with complex Gaussian coefficients."""
    terms = []
    for _ in range(int(rng.integers(1, max_terms + 1))):
        c = complex(rng.normal(), rng.normal()) / np.sqrt(2.0)
        word = random_word(rng, d, max_degree)
        terms.append(nc_prod([Const(c), word]))
    return nc_sum(terms)


def random_poly_map(
    rng: np.random.Generator, d: int, r: int, max_degree: int = 4
) -> NcMap:
    return NcMap(d, tuple(random_poly_expr(rng, d, max_degree) for _ in range(r)))


def map_pool() -> list[NcMap]:
    """Representative maps (d <= 2) exercising the axiom suites."""
    return [
        parse_map(["x1^2"], 1),
        parse_map(["x1 + 0.25 * x1^2"], 1),
        parse_map(["x1*x2 - x2*x1"], 2),
        parse_map(["x1 + x2", "x1 - x2"], 2),
        parse_map(["inv(1 - x1*x2)"], 2),
        parse_map(["0.5 * x1^3 - x2 + 2i * x2 * x1"], 2),
    ]


def geometric_inv_oracle(a: np.ndarray, b: np.ndarray, order: int) -> np.ndarray:
    """Truncated series sum_{m<=order} (a b)^m; oracle for inv(1 - x1*x2)
    on points with ||a||, ||b|| < 1."""
    n = a.shape[0]
    acc = np.eye(n, dtype=np.complex128)
    term = np.eye(n, dtype=np.complex128)
    ab = a @ b
    for _ in range(order):
        term = term @ ab
        acc = acc + term
    return acc


def tuples_close(x: MatrixTuple, y: MatrixTuple, tol: float) -> bool:
    return (x - y).norm() <= tol
