"""Exact differentiation of noncommutative maps by block dilation.

Evaluating a map at the 2n x 2n dilation [[x, e*h], [0, x]] places exactly
e times the derivative in direction h into the upper-right n x n block of
every component; dividing by e recovers the derivative with no truncation
error for any admissible e.  A 4n x 4n nesting of the same trick yields the
Hessian from the top-right block.  The scale e starts at 1 and is halved
whenever an inverse inside the map is not evaluable at the dilated point;
correctness is independent of the e finally used.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DilationError, InvalidInput, SingularError
from .expr import EvalStats, NcMap, eval_map
from .linalg import (
    MatrixTuple,
    basis_tuple,
    direct_sum,
    op_norm,
    upper_block2,
)

__all__ = [
    "DerivativeReport",
    "DirectSumCheck",
    "derivative",
    "derivative_fd",
    "hessian",
    "linearize",
    "partial_linearize",
    "directsum_derivative_check",
    "EPS_FLOOR",
    "INJECTIVITY_TOL",
]

# Off-diagonal scale is halved down to this floor before giving up.
EPS_FLOOR = 1e-8

# sigma_min above this (relative to max(1, sigma_max)) counts as injective.
INJECTIVITY_TOL = 1e-9


def _derivative_with_eps(
    f: NcMap,
    x: MatrixTuple,
    h: MatrixTuple,
    eps: float | None,
    stats: EvalStats | None,
) -> tuple[MatrixTuple, float]:
    x._check_shape(h)
    n = x.n
    e = 1.0 if eps is None else float(eps)
    if e <= 0:
        raise InvalidInput("eps must be positive")
    while True:
        try:
            y = eval_map(f, upper_block2(x, e * h), stats)
        except SingularError as exc:
            if eps is not None or e / 2 < EPS_FLOOR:
                raise DilationError(
                    f"dilated point not evaluable down to eps={e:.3e}: {exc}"
                ) from exc
            e /= 2
            continue
        return MatrixTuple(c[:n, n:] / e for c in y), e


def derivative(
    f: NcMap,
    x: MatrixTuple,
    h: MatrixTuple,
    eps: float | None = None,
    stats: EvalStats | None = None,
) -> MatrixTuple:
    """Derivative of ``f`` at ``x`` in direction ``h`` (exact where defined).

    ``eps`` forces a fixed off-diagonal scale; by default the scale starts
    at 1 and is halved until the dilated point is evaluable, raising
    :class:`DilationError` below the floor.
    """
    res, _ = _derivative_with_eps(f, x, h, eps, stats)
    return res


def derivative_fd(
    f: NcMap,
    x: MatrixTuple,
    h: MatrixTuple,
    t: float,
    stats: EvalStats | None = None,
) -> MatrixTuple:
    """First-order difference quotient (f(x + t h) - f(x)) / t."""
    if not t > 0:
        raise InvalidInput("t must be positive")
    x._check_shape(h)
    return (eval_map(f, x + t * h, stats) - eval_map(f, x, stats)) * (1.0 / t)


def hessian(
    f: NcMap,
    x: MatrixTuple,
    h: MatrixTuple,
    k: MatrixTuple,
    eps: float | None = None,
    stats: EvalStats | None = None,
) -> MatrixTuple:
    """Second derivative of ``f`` at ``x``: linear in each of ``h``, ``k``.

    Read from the (1,4) block of the 4n x 4n evaluation at the nested
    dilation of x by k (inner) and h (outer); the block scales as the
    product of the two direction scales, which are shrunk together.
    """
    x._check_shape(h)
    x._check_shape(k)
    n = x.n
    e = 1.0 if eps is None else float(eps)
    if e <= 0:
        raise InvalidInput("eps must be positive")
    while True:
        inner = upper_block2(x, e * k)
        outer_dir = direct_sum([e * h, e * h])
        try:
            y = eval_map(f, upper_block2(inner, outer_dir), stats)
        except SingularError as exc:
            if eps is not None or e / 2 < EPS_FLOOR:
                raise DilationError(
                    f"dilated point not evaluable down to eps={e:.3e}: {exc}"
                ) from exc
            e /= 2
            continue
        return MatrixTuple(c[:n, 3 * n:] / (e * e) for c in y)


@dataclass
class DerivativeReport:
    """Linearization of the derivative at a point in the entry basis.

    ``matrixization`` is the (n^2 r) x (n^2 d) matrix of the map h -> Df(x)[h],
    columns ordered by (variable, row, column) and rows by (component, row,
    column), both row-major.  ``epsilon`` is the smallest dilation scale any
    column needed.
    """

    x: MatrixTuple
    matrixization: np.ndarray
    sigma_min: float
    sigma_max: float
    injective: bool
    surjective_rank: int
    epsilon: float


def _vec(y: MatrixTuple) -> np.ndarray:
    return np.concatenate([c.reshape(-1) for c in y])


def _unvec(v: np.ndarray, d: int, n: int) -> MatrixTuple:
    return MatrixTuple(
        v[i * n * n:(i + 1) * n * n].reshape(n, n) for i in range(d)
    )


def _report_from_columns(x, cols, eps_used) -> DerivativeReport:
    mat = np.column_stack(cols)
    ncols = mat.shape[1]
    s = np.linalg.svd(mat, compute_uv=False)
    sigma_max = float(s[0]) if s.size else 0.0
    # Bounded below needs full column rank; a wide-kernel map has sigma_min 0.
    sigma_min = float(s[-1]) if mat.shape[0] >= ncols else 0.0
    rank = int(np.sum(s > INJECTIVITY_TOL * sigma_max)) if sigma_max > 0 else 0
    return DerivativeReport(
        x=x,
        matrixization=mat,
        sigma_min=sigma_min,
        sigma_max=sigma_max,
        injective=sigma_min > INJECTIVITY_TOL * max(1.0, sigma_max),
        surjective_rank=rank,
        epsilon=eps_used,
    )


def linearize(f: NcMap, x: MatrixTuple) -> DerivativeReport:
    """Matrixization of h -> Df(x)[h] over the full n^2 d entry basis."""
    return partial_linearize(f, x, range(1, f.d + 1))


def partial_linearize(f: NcMap, x: MatrixTuple, active: Sequence[int]) -> DerivativeReport:
    """Matrixization restricted to directions in the 1-based variables
    ``active`` (the partial derivative map used by implicit solving)."""
    active = list(active)
    if not active or any(a < 1 or a > f.d for a in active):
        raise InvalidInput("active variables must be 1-based indices within d")
    n = x.n
    cols = []
    eps_used = 1.0
    for a in active:
        for p in range(n):
            for q in range(n):
                hbasis = basis_tuple(f.d, n, a - 1, p, q)
                res, e = _derivative_with_eps(f, x, hbasis, None, None)
                eps_used = min(eps_used, e)
                cols.append(_vec(res))
    return _report_from_columns(x, cols, eps_used)


@dataclass
class DirectSumCheck:
    """Outcome of the derivative direct-sum verification.

    ``sigma_restricted`` is the smallest singular value of the linearization
    at the direct-sum point restricted to block-diagonal directions; the
    full map can only be smaller, never larger.
    """

    identity_discrepancy: float
    identity_ok: bool
    sigma_summands: tuple[float, ...]
    sigma_restricted: float
    sigma_full: float
    equality_ok: bool
    inequality_ok: bool
    scale: float

    @property
    def all_ok(self) -> bool:
        return self.identity_ok and self.equality_ok and self.inequality_ok


def directsum_derivative_check(
    f: NcMap,
    points: Sequence[MatrixTuple],
    hs: Sequence[MatrixTuple],
    tol_identity: float = 1e-9,
    tol_sigma: float = 1e-7,
) -> DirectSumCheck:
    """Verify the derivative identity at a direct sum of points.

    Checks that the derivative at the block-diagonal point, in a
    block-diagonal direction, is the direct sum of the summand derivatives,
    and that over block-diagonal directions the smallest singular value of
    the linearization equals the minimum over the summands.  For the
    unrestricted map only the <= inequality holds (off-diagonal directions
    can degenerate further), so that is what is asserted for it.
    """
    points = list(points)
    hs = list(hs)
    if len(points) != len(hs) or not points:
        raise InvalidInput("need matching nonempty lists of points and directions")
    z = direct_sum(points)
    hz = direct_sum(hs)
    stats = EvalStats()
    lhs = derivative(f, z, hz, stats=stats)
    parts = [derivative(f, x, h, stats=stats) for x, h in zip(points, hs)]
    rhs = direct_sum(parts)
    disc = max(op_norm(a - b) for a, b in zip(lhs, rhs))
    scale = 1.0 + stats.max_norm
    identity_ok = disc <= tol_identity * scale

    sigma_summands = tuple(linearize(f, x).sigma_min for x in points)

    # Columns of the linearization at z over directions supported on the
    # diagonal blocks only.
    offsets = np.cumsum([0] + [x.n for x in points])
    big_n = z.n
    cols = []
    for i, x in enumerate(points):
        off = int(offsets[i])
        for a in range(f.d):
            for p in range(x.n):
                for q in range(x.n):
                    hb = basis_tuple(f.d, big_n, a, off + p, off + q)
                    res, _ = _derivative_with_eps(f, z, hb, None, None)
                    cols.append(_vec(res))
    mat = np.column_stack(cols)
    s = np.linalg.svd(mat, compute_uv=False)
    sigma_restricted = float(s[-1]) if mat.shape[0] >= mat.shape[1] else 0.0

    sigma_full = linearize(f, z).sigma_min
    min_summand = min(sigma_summands)
    return DirectSumCheck(
        identity_discrepancy=disc,
        identity_ok=identity_ok,
        sigma_summands=sigma_summands,
        sigma_restricted=sigma_restricted,
        sigma_full=sigma_full,
        equality_ok=abs(sigma_restricted - min_summand) <= tol_sigma,
        inequality_ok=sigma_full <= min_summand + tol_sigma,
        scale=scale,
    )
