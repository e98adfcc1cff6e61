"""Domains of matrix tuples with level exhaustions.

A domain is either a sublevel set { x : ||delta(x)|| < 1 } of a matrix of
expressions ``delta`` (the polydisk and the row ball are the two built-in
special cases) or, for d = 1, the set of invertible matrices.  Each domain
carries a sequence of levels

    level k:  ||delta(x)|| <= 1 - 1/k  and  ||x|| <= k
    (invertibles: ||x|| <= k and ||x^-1|| <= k)

whose union exhausts the domain; :func:`level_index` returns the smallest k
containing a point.  Boundary ties resolve into level k (the comparisons
are non-strict), while membership in the domain itself is strict.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ArityError, InvalidInput
from .expr import Const, EvalStats, NcExpr, Var, evaluate, max_var_index
from .linalg import (
    MatrixTuple,
    direct_sum,
    op_norm,
    random_tuple,
    random_unitary,
    svd_extremes,
    tuple_norm,
)

__all__ = [
    "DomainSpec",
    "polydisk",
    "rowball",
    "bdelta",
    "invertibles",
    "delta_eval",
    "contains",
    "level_index",
    "exhaustion_audit",
    "sample_point",
    "AuditEntry",
    "AuditReport",
    "LEVEL_SEARCH_CUTOFF",
]

# Linear level search gives up beyond this index and reports no level.
LEVEL_SEARCH_CUTOFF = 10**6

# "Invertible" means the condition number stays within float range.
_FLOAT_COND_MAX = 1.0 / np.finfo(float).eps


@dataclass(frozen=True, eq=False)
class DomainSpec:
    """A domain description: kind, arity, and (unless invertibles) the
    defining matrix of expressions."""

    kind: str
    d: int
    delta: tuple[tuple[NcExpr, ...], ...] | None

    def __post_init__(self):
        if self.kind not in ("polydisk", "rowball", "bdelta", "invertibles"):
            raise InvalidInput(f"unknown domain kind {self.kind!r}")
        if self.d < 1:
            raise InvalidInput("domain arity must be positive")
        if self.kind == "invertibles":
            if self.d != 1:
                raise InvalidInput("the invertibles domain is univariate")
            if self.delta is not None:
                raise InvalidInput("the invertibles domain carries no delta")
            return
        if not self.delta or any(not row for row in self.delta):
            raise InvalidInput("delta must be a nonempty matrix of expressions")
        cols = len(self.delta[0])
        if any(len(row) != cols for row in self.delta):
            raise InvalidInput("delta rows must have equal length")
        for row in self.delta:
            for e in row:
                if max_var_index(e) > self.d:
                    raise ArityError(
                        f"delta entry uses x{max_var_index(e)} but d={self.d}"
                    )


def polydisk(d: int) -> DomainSpec:
    """{ x : max ||x^i|| < 1 }, realized by the diagonal delta matrix."""
    rows = tuple(
        tuple(Var(i + 1) if i == j else Const(0) for j in range(d))
        for i in range(d)
    )
    return DomainSpec("polydisk", d, rows)


def rowball(d: int) -> DomainSpec:
    """{ x : ||[x^1 ... x^d]|| < 1 }, realized by the 1 x d row delta."""
    return DomainSpec("rowball", d, (tuple(Var(i + 1) for i in range(d)),))


def bdelta(rows, d: int) -> DomainSpec:
    """General sublevel domain for an I x J matrix of expressions."""
    return DomainSpec("bdelta", d, tuple(tuple(row) for row in rows))


def invertibles() -> DomainSpec:
    """Invertible matrices (d = 1), exhausted by ||x||, ||x^-1|| <= k."""
    return DomainSpec("invertibles", 1, None)


def _check_arity(spec: DomainSpec, x: MatrixTuple):
    if x.d != spec.d:
        raise ArityError(f"domain has arity d={spec.d}, tuple has d={x.d}")


def delta_eval(spec: DomainSpec, x: MatrixTuple, stats: EvalStats | None = None) -> np.ndarray:
    """The (I*n) x (J*n) block matrix of entrywise evaluations of delta."""
    _check_arity(spec, x)
    if spec.delta is None:
        raise InvalidInput("the invertibles domain has no delta matrix")
    return np.block(
        [[evaluate(e, x, stats) for e in row] for row in spec.delta]
    )


def _inverse_norm(x: MatrixTuple) -> float:
    """||x^-1|| for a univariate tuple; inf when not numerically invertible."""
    smax, smin = svd_extremes(x[0])
    if smin == 0.0 or smax / smin > _FLOAT_COND_MAX:
        return np.inf
    return 1.0 / smin


def contains(spec: DomainSpec, x: MatrixTuple) -> bool:
    """Strict membership in the domain."""
    _check_arity(spec, x)
    if spec.kind == "invertibles":
        return bool(np.isfinite(_inverse_norm(x)))
    return op_norm(delta_eval(spec, x)) < 1.0


def _level_data(spec: DomainSpec, x: MatrixTuple) -> tuple[float, float]:
    """The two scalars the level-k inequalities compare against."""
    if spec.kind == "invertibles":
        return _inverse_norm(x), tuple_norm(x)
    return op_norm(delta_eval(spec, x)), tuple_norm(x)


def _in_level(spec: DomainSpec, x: MatrixTuple, k: int, tol: float = 0.0) -> bool:
    a, b = _level_data(spec, x)
    if spec.kind == "invertibles":
        return a <= k + tol and b <= k + tol
    return a <= 1.0 - 1.0 / k + tol and b <= k + tol


def level_index(spec: DomainSpec, x: MatrixTuple) -> int | None:
    """Smallest level index containing ``x``; None when ``x`` is outside the
    domain or the search passes the cutoff."""
    if not contains(spec, x):
        return None
    a, b = _level_data(spec, x)
    for k in range(1, LEVEL_SEARCH_CUTOFF + 1):
        if spec.kind == "invertibles":
            if a <= k and b <= k:
                return k
        elif a <= 1.0 - 1.0 / k and b <= k:
            return k
    return None


@dataclass
class AuditEntry:
    check: str
    passed: bool
    detail: str


@dataclass
class AuditReport:
    """Findings of the exhaustion audit; failures are entries, never raised."""

    entries: list[AuditEntry] = field(default_factory=list)
    levels: list[int | None] = field(default_factory=list)
    no_common_level: bool = False

    @property
    def all_passed(self) -> bool:
        return all(e.passed for e in self.entries)

    def add(self, check: str, passed: bool, detail: str = ""):
        self.entries.append(AuditEntry(check, passed, detail))


def exhaustion_audit(spec: DomainSpec, samples, seed: int) -> AuditReport:
    """Audit the level axioms on the given samples at finite multiplicity.

    Checks (a) invariance of the level index under 20 random unitaries,
    (b) for samples sharing one level k, that direct sums of up to 4 of
    them still satisfy the level-k inequalities, and (c) that each sample
    sits inside the next level together with an epsilon-neighborhood probe
    at radius 1/(k(k+1)).  When every sample has a distinct level the
    report flags that no common level exists.
    """
    samples = list(samples)
    report = AuditReport()
    if not samples:
        report.add("nonempty", True, "no samples supplied")
        return report
    for x in samples:
        _check_arity(spec, x)
    rng = np.random.default_rng(seed)
    report.levels = [level_index(spec, x) for x in samples]

    # (a) unitary invariance of the level index.  Singular values are
    # unitarily invariant exactly, but a point sitting on a level boundary
    # can flip its integer index by one float ulp, so the inequalities are
    # compared with 1e-12 slack instead of demanding equal integers.
    for i, (x, lev) in enumerate(zip(samples, report.levels)):
        ok = True
        for _ in range(20):
            u = random_unitary(x.n, rng)
            rotated = MatrixTuple(u.conj().T @ m @ u for m in x)
            if lev is None:
                if contains(spec, rotated) and _level_data(spec, rotated)[0] < 1.0 - 1e-12:
                    ok = False
                    break
                continue
            still_inside = _in_level(spec, rotated, lev, tol=1e-12)
            still_minimal = lev == 1 or not _in_level(spec, rotated, lev - 1, tol=-1e-12)
            if not (still_inside and still_minimal):
                ok = False
                break
        report.add(
            "unitary-invariance",
            ok,
            f"sample {i}: level {lev}" + ("" if ok else " changed under a unitary"),
        )

    # (b) direct sums within a common level stay in that level
    groups: dict[int, list[int]] = {}
    for i, lev in enumerate(report.levels):
        if lev is not None:
            groups.setdefault(lev, []).append(i)
    multi = {k: idxs for k, idxs in groups.items() if len(idxs) >= 2}
    report.no_common_level = not multi and len(samples) > 1
    for k, idxs in sorted(multi.items()):
        for size in range(2, min(4, len(idxs)) + 1):
            chunk = [samples[i] for i in idxs[:size]]
            summed = direct_sum(chunk)
            ok = _in_level(spec, summed, k)
            report.add(
                "direct-sum-closure",
                ok,
                f"level {k}, {size} summands",
            )

    # (c) monotonicity and the epsilon-neighborhood of the next level
    for i, (x, lev) in enumerate(zip(samples, report.levels)):
        if lev is None:
            report.add("monotonicity", True, f"sample {i}: outside the domain")
            continue
        ok_next = _in_level(spec, x, lev + 1)
        report.add("monotonicity", ok_next, f"sample {i}: level {lev} in level {lev + 1}")
        eps = 1.0 / (lev * (lev + 1))
        ok_eps = True
        for _ in range(3):
            # The neighborhood is open: probe strictly inside radius eps.
            p = random_tuple(x.d, x.n, rng, target_norm=0.999 * eps)
            if not _in_level(spec, x + p, lev + 1):
                ok_eps = False
                break
        report.add(
            "epsilon-neighborhood",
            ok_eps,
            f"sample {i}: radius {eps:.3e} around level {lev}",
        )
    return report


def sample_point(
    spec: DomainSpec,
    n: int,
    seed,
    target: float = 0.5,
    attempts: int = 20,
) -> MatrixTuple:
    """Seeded random tuple inside the domain.

    For sublevel domains a Gaussian draw is scaled radially until
    ||delta|| is approximately ``target`` (exactly for degree-one deltas
    such as the polydisk and row ball, by bisection otherwise).  For the
    invertibles domain, draws are rejected until well invertible.
    """
    if not 0.0 < target < 1.0 and spec.kind != "invertibles":
        raise InvalidInput("target must lie in (0, 1)")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    for _ in range(attempts):
        x = random_tuple(spec.d, n, rng, target_norm=1.0)
        if spec.kind == "invertibles":
            if np.isfinite(_inverse_norm(x)) and _inverse_norm(x) <= 1e6:
                return x
            continue
        dn = op_norm(delta_eval(spec, x))
        if dn == 0.0:
            continue
        if spec.kind in ("polydisk", "rowball"):
            y = (target / dn) * x
            if contains(spec, y):
                return y
            continue
        # General delta: bisect the radial scale.
        hi = 1.0
        for _ in range(60):
            if op_norm(delta_eval(spec, hi * x)) >= target:
                break
            hi *= 2.0
        lo = 0.0
        for _ in range(80):
            mid = 0.5 * (lo + hi)
            if op_norm(delta_eval(spec, mid * x)) < target:
                lo = mid
            else:
                hi = mid
        y = lo * x
        if contains(spec, y):
            return y
    raise InvalidInput("could not sample a point inside the domain")
