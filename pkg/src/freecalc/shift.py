"""Shift forms of matrix tuples via graded word subspaces.

For a d-tuple X on C^n, the subspace of degree k is spanned by all words of
length at most k in the components of X and the coordinate shift M (here
truncated nilpotently, M e_n = 0) applied to the first basis vector.  The
shift ensures the subspaces grow by at least one dimension per degree until
they saturate at C^n, and their dimension never exceeds alpha(k, d), the
number of words of length at most k in d + 1 letters.  Ordering an
orthonormal basis of C^n by degree of first appearance yields a unitary u;
the conjugate u* X u is the shift form of X: it maps the span of the first
k coordinates into the span of the first alpha(k, d), which pins the action
on leading coordinates into fixed finite blocks and makes compressions of
bounded families converge along subsequences.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .errors import DemoInsufficient, InvalidInput, RangeError
from .linalg import MatrixTuple, op_norm

__all__ = [
    "GradedFlag",
    "ShiftFormResult",
    "SizeshiftCheck",
    "DemoReport",
    "alpha",
    "build_flag",
    "build_shift_form",
    "sizeshift_check",
    "sizeshift_components",
    "sizeshift_refined_check",
    "truncated_sot_demo",
    "GS_RANK_TOL",
]

# Gram-Schmidt rank tolerance, relative to the candidate column norm.
GS_RANK_TOL = 1e-10

# alpha values beyond this are refused rather than silently used as dims.
_ALPHA_CAP = 10**18


def alpha(k: int, d: int) -> int:
    """Number of words of length <= k in d + 1 letters: sum_j (d+1)^j."""
    if k < 0 or d < 1:
        raise InvalidInput("need k >= 0 and d >= 1")
    value = ((d + 1) ** (k + 1) - 1) // d
    if value > _ALPHA_CAP:
        raise RangeError(f"alpha({k}, {d}) exceeds the representable range")
    return value


@dataclass
class GradedFlag:
    """Nested orthonormal bases of the graded word subspaces.

    ``bases[k]`` is an n x dims[k] matrix whose columns extend exactly those
    of ``bases[k-1]``; ``K`` is the largest degree constructed.
    """

    X: MatrixTuple
    K: int
    bases: list[np.ndarray]
    dims: list[int]

    @property
    def saturated(self) -> bool:
        return self.dims[-1] == self.X.n


def _shift_matrix(n: int) -> np.ndarray:
    return np.eye(n, k=-1, dtype=np.complex128)


def build_flag(X: MatrixTuple, K: int) -> GradedFlag:
    """Construct the graded flag of X up to degree K (or until saturation).

    Degree 0 is the span of e_1.  Each next degree adjoins, in a fixed
    order (shift image first, then the images under each component, each
    applied to the previous basis columns in order), the candidates that
    survive two-pass Gram-Schmidt at the relative rank tolerance.
    """
    if K < 1:
        raise InvalidInput("K must be at least 1")
    n = X.n
    if n < 2:
        raise InvalidInput("flag construction needs dimension n >= 2")
    ops = [_shift_matrix(n), *X.mats]
    basis = np.zeros((n, 1), dtype=np.complex128)
    basis[0, 0] = 1.0
    bases = [basis]
    dims = [1]
    for _ in range(K):
        if dims[-1] == n:
            break
        prev = bases[-1]
        cur = prev
        for op in ops:
            for j in range(prev.shape[1]):
                v = op @ prev[:, j]
                nrm0 = float(np.linalg.norm(v))
                if nrm0 == 0.0:
                    continue
                v = v - cur @ (cur.conj().T @ v)
                v = v - cur @ (cur.conj().T @ v)
                nrm = float(np.linalg.norm(v))
                if nrm <= GS_RANK_TOL * nrm0:
                    continue
                cur = np.column_stack([cur, v / nrm])
        bases.append(cur)
        dims.append(cur.shape[1])
    return GradedFlag(X=X, K=len(bases) - 1, bases=bases, dims=dims)


@dataclass
class ShiftFormResult:
    """A shift form u* X u with its flag and the two adaptation checks."""

    u: np.ndarray
    tilde: MatrixTuple
    flag: GradedFlag
    sh1_ok: bool
    sh2_ok: bool


def build_shift_form(X: MatrixTuple) -> ShiftFormResult:
    """Shift form of X: conjugation by the degree-ordered flag basis.

    The flag saturates in at most n - 1 degrees because the shift image
    alone grows every unsaturated degree, so u is always a full n x n
    unitary.  sh1 records that u sends the first k + 1 coordinates into the
    degree-k subspace; sh2 that u* sends the degree-k subspace into the
    first alpha(k, d) coordinates.
    """
    n = X.n
    flag = build_flag(X, K=n)
    if not flag.saturated:
        raise InvalidInput("flag failed to saturate; input is inconsistent")
    u = flag.bases[-1]

    sh1_ok = True
    for j in range(1, n + 1):
        k = min(j - 1, flag.K)
        b = flag.bases[k]
        col = u[:, j - 1]
        resid = col - b @ (b.conj().T @ col)
        if float(np.linalg.norm(resid)) > 1e-10:
            sh1_ok = False
            break

    sh2_ok = True
    uh = u.conj().T
    for k in range(flag.K + 1):
        a = min(alpha(k, X.d), n)
        coords = uh @ flag.bases[k]
        if a < n and float(np.linalg.norm(coords[a:, :])) > 1e-10:
            sh2_ok = False
            break

    tilde = MatrixTuple(uh @ m @ u for m in X)
    return ShiftFormResult(u=u, tilde=tilde, flag=flag, sh1_ok=sh1_ok, sh2_ok=sh2_ok)


class SizeshiftCheck(NamedTuple):
    lhs: float
    rhs: float
    holds: bool


def sizeshift_components(
    X: MatrixTuple, k: int, form: ShiftFormResult | None = None
) -> list[SizeshiftCheck]:
    """Per-component (lhs, rhs, holds) of the compression-norm comparison."""
    if k < 1:
        raise InvalidInput("k must be at least 1")
    a = alpha(k, X.d)
    if a > X.n:
        raise RangeError(
            f"alpha({k}, {X.d}) = {a} exceeds the truncation dimension n={X.n}"
        )
    form = form or build_shift_form(X)
    checks = []
    for xi, ti in zip(X, form.tilde):
        lhs = op_norm(xi[:k, :k])
        rhs = op_norm(ti[:a, :a])
        checks.append(SizeshiftCheck(lhs, rhs, lhs <= rhs + 1e-9))
    return checks


def sizeshift_check(
    X: MatrixTuple, k: int, form: ShiftFormResult | None = None
) -> SizeshiftCheck:
    """Compression-norm comparison between X and its shift form.

    For every component, the norm of the leading k x k compression of X is
    bounded by the norm of the leading alpha(k, d) compression of the shift
    form.  Returns the worst (lhs, rhs) pair over the components and
    whether the inequality held (with 1e-9 slack) for all of them.
    """
    checks = sizeshift_components(X, k, form)
    worst = max(checks, key=lambda c: c.lhs - c.rhs)
    return SizeshiftCheck(worst.lhs, worst.rhs, all(c.holds for c in checks))


def sizeshift_refined_check(
    X: MatrixTuple, k: int, form: ShiftFormResult | None = None
) -> SizeshiftCheck:
    """Sharper variant: ||X^i P_k|| against the alpha(k) x alpha(k-1)
    corner of the shift form."""
    if k < 1:
        raise InvalidInput("k must be at least 1")
    a = alpha(k, X.d)
    a_prev = alpha(k - 1, X.d)
    if a > X.n:
        raise RangeError(
            f"alpha({k}, {X.d}) = {a} exceeds the truncation dimension n={X.n}"
        )
    form = form or build_shift_form(X)
    worst = None
    holds = True
    for xi, ti in zip(X, form.tilde):
        lhs = op_norm(xi[:, :k])
        rhs = op_norm(ti[:a, :a_prev])
        holds = holds and lhs <= rhs + 1e-9
        if worst is None or lhs - rhs > worst[0] - worst[1]:
            worst = (lhs, rhs)
    return SizeshiftCheck(worst[0], worst[1], holds)


@dataclass
class DemoReport:
    """Outcome of the leading-block convergence demonstration."""

    lead: int
    alpha_dim: int
    containment: list[bool]
    selected: list[int]
    limit: list[np.ndarray]
    diameter: float


def truncated_sot_demo(
    Xs: Sequence[MatrixTuple], lead: int, tol: float = 1e-3
) -> DemoReport:
    """Select a subsequence with convergent leading compressions.

    Shift forms confine the image of the first ``lead`` coordinates to the
    first alpha(lead, d) coordinates, so the leading alpha x alpha
    compressions of the shift forms live in one fixed finite block.  The
    members whose containment verifies are repeatedly bisected (keeping the
    larger half, measured from the two farthest members) until the
    compressions are mutually within ``tol``; the centroid of the surviving
    compressions estimates the limit block.
    """
    Xs = list(Xs)
    if len(Xs) < 2:
        raise DemoInsufficient("need at least two sequence members")
    d, n = Xs[0].d, Xs[0].n
    if any(x.d != d or x.n != n for x in Xs):
        raise InvalidInput("sequence members must share arity and dimension")
    if lead < 1:
        raise InvalidInput("lead must be at least 1")
    a = min(alpha(lead, d), n)
    lead = min(lead, n)

    containment = []
    comps = []
    for x in Xs:
        form = build_shift_form(x)
        ok = True
        if a < n:
            for ti in form.tilde:
                if op_norm(ti[a:, :lead]) > 1e-9 * (1.0 + x.norm()):
                    ok = False
                    break
        containment.append(ok)
        comps.append(np.stack([ti[:a, :a] for ti in form.tilde]))

    usable = [i for i, ok in enumerate(containment) if ok]
    if len(usable) < 2:
        raise DemoInsufficient("fewer than two members pass the containment check")

    def dist(i: int, j: int) -> float:
        return max(op_norm(ci - cj) for ci, cj in zip(comps[i], comps[j]))

    selected = usable
    while True:
        diam, pair = 0.0, None
        for ii in range(len(selected)):
            for jj in range(ii + 1, len(selected)):
                dij = dist(selected[ii], selected[jj])
                if dij > diam:
                    diam, pair = dij, (selected[ii], selected[jj])
        if diam <= tol:
            break
        p, q = pair
        near_p = [s for s in selected if dist(s, p) <= dist(s, q)]
        near_q = [s for s in selected if s not in near_p]
        selected = near_p if len(near_p) >= len(near_q) else near_q
        if len(selected) < 2:
            raise DemoInsufficient("bisection exhausted the sequence")

    limit = [
        np.mean([comps[i][c] for i in selected], axis=0) for c in range(d)
    ]
    return DemoReport(
        lead=lead,
        alpha_dim=a,
        containment=containment,
        selected=selected,
        limit=limit,
        diameter=diam,
    )
