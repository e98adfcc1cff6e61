"""Newton-based inversion and implicit parametrization of NC maps.

The solvers damp a plain Newton iteration with residual-halving
backtracking and solve each linearized system by least squares on the
matrixization of the derivative, guarded by its smallest singular value.
Starting points are always caller-supplied; there is no continuation.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .domain import DomainSpec, contains, sample_point
from .errors import (
    DegenerateDerivative,
    FreecalcError,
    InvalidInput,
    StallError,
)
from .expr import NcMap, eval_map
from .diff import DerivativeReport, linearize, partial_linearize, _unvec, _vec
from .linalg import MatrixTuple, direct_sum

__all__ = [
    "NewtonTrace",
    "ProbeReport",
    "newton_invert",
    "implicit_solve",
    "injectivity_probe",
    "MAX_BACKTRACKS",
]

# Residual-halving attempts per Newton step before declaring a stall.
MAX_BACKTRACKS = 30


@dataclass
class NewtonTrace:
    """Accepted iterates, their residual norms, and the final diagnostics."""

    iterates: list[MatrixTuple]
    residual_norms: list[float]
    converged: bool
    sigma_min_at_solution: float

    @property
    def solution(self) -> MatrixTuple:
        return self.iterates[-1]

    @property
    def iterations(self) -> int:
        return len(self.iterates) - 1


def _newton_loop(
    residual: Callable[[MatrixTuple], MatrixTuple],
    linearizer: Callable[[MatrixTuple], DerivativeReport],
    z0: MatrixTuple,
    tol: float,
    max_iter: int,
) -> NewtonTrace:
    if tol <= 0 or max_iter < 0:
        raise InvalidInput("tol must be positive and max_iter nonnegative")
    z = z0
    r = residual(z)
    rn = r.norm()
    iterates = [z]
    norms = [rn]
    d, n = z.d, z.n
    for _ in range(max_iter):
        if rn <= tol:
            break
        rep = linearizer(z)
        if not rep.injective:
            raise DegenerateDerivative(
                f"derivative numerically non-injective (sigma_min={rep.sigma_min:.3e})",
                iterate=z,
                trace=NewtonTrace(iterates, norms, False, rep.sigma_min),
            )
        step_vec, *_ = np.linalg.lstsq(rep.matrixization, -_vec(r), rcond=1e-9)
        step = _unvec(step_vec, d, n)
        lam = 1.0
        accepted = False
        for _ in range(MAX_BACKTRACKS + 1):
            cand = z + lam * step
            try:
                rc = residual(cand)
                rcn = rc.norm()
            except FreecalcError:
                lam /= 2
                continue
            if rcn < rn:
                accepted = True
                break
            lam /= 2
        if not accepted:
            raise StallError(
                f"no residual decrease after {MAX_BACKTRACKS} halvings "
                f"(residual {rn:.3e})",
                iterate=z,
                trace=NewtonTrace(iterates, norms, False, rep.sigma_min),
            )
        z, r, rn = cand, rc, rcn
        iterates.append(z)
        norms.append(rn)
    try:
        sigma = linearizer(z).sigma_min
    except FreecalcError:
        sigma = float("nan")
    return NewtonTrace(iterates, norms, rn <= tol, sigma)


def newton_invert(
    f: NcMap,
    y: MatrixTuple,
    x0: MatrixTuple,
    tol: float = 1e-12,
    max_iter: int = 50,
) -> NewtonTrace:
    """Solve f(x) = y by damped Newton from x0.

    Requires a square map (r = d) and a numerically injective derivative
    along the iterates; raises :class:`DegenerateDerivative` or
    :class:`StallError` otherwise, each carrying the offending iterate and
    the partial trace.
    """
    if f.r != f.d:
        raise InvalidInput(f"inversion needs r = d, got r={f.r}, d={f.d}")
    if y.d != f.r or x0.d != f.d or y.n != x0.n:
        raise InvalidInput("target and start shapes do not match the map")
    return _newton_loop(
        residual=lambda z: eval_map(f, z) - y,
        linearizer=lambda z: linearize(f, z),
        z0=x0,
        tol=tol,
        max_iter=max_iter,
    )


def implicit_solve(
    f: NcMap,
    y: MatrixTuple,
    z0: MatrixTuple,
    tol: float = 1e-12,
    max_iter: int = 50,
) -> NewtonTrace:
    """Solve f(y, z) = 0 for the trailing r variables, y fixed.

    ``y`` supplies the first d - r variables, ``z0`` starts the last r; the
    Newton steps use the partial linearization over the trailing variables
    only.  The returned trace lives in z-space.
    """
    if not 1 <= f.r <= f.d - 1:
        raise InvalidInput(f"implicit solving needs 1 <= r <= d-1, got r={f.r}, d={f.d}")
    if y.d != f.d - f.r or z0.d != f.r or y.n != z0.n:
        raise InvalidInput("parameter and start shapes do not match the map")
    active = range(f.d - f.r + 1, f.d + 1)

    def glue(z: MatrixTuple) -> MatrixTuple:
        return MatrixTuple(y.mats + z.mats)

    def residual(z: MatrixTuple) -> MatrixTuple:
        return eval_map(f, glue(z))

    def linearizer(z: MatrixTuple) -> DerivativeReport:
        return partial_linearize(f, glue(z), active)

    return _newton_loop(residual, linearizer, z0, tol, max_iter)


@dataclass
class ProbeReport:
    """Findings of the two-sided injectivity probe."""

    trials: int
    collisions: list[dict] = field(default_factory=list)
    degenerate_points: list[tuple[MatrixTuple, float]] = field(default_factory=list)
    min_sigma: float = float("inf")
    min_sigma_point: MatrixTuple | None = None
    suspected_violation: bool = False

    @property
    def collision_found(self) -> bool:
        return bool(self.collisions)


def injectivity_probe(
    f: NcMap,
    spec: DomainSpec,
    trials: int,
    seed: int,
    dims: Sequence[int] = (1, 2, 3),
) -> ProbeReport:
    """Empirical probe of the injectivity dichotomy on a domain.

    Per trial, a domain point x is drawn and Newton is started from a fresh
    random point toward f(z) = f(x); a convergent solution well separated
    from x and still inside the domain is a collision witness.  Alongside,
    the smallest singular value of the linearization is sampled at each x.
    For every collision (x, x'), the direct-sum point x (+) x' is examined:
    there the derivative kills the off-diagonal difference direction, so a
    degenerate point of twice the dimension is recorded when its sampled
    sigma_min vanishes.  A collision coexisting with uniformly large
    sampled sigma_min everywhere is flagged as a suspected violation, which
    exact arithmetic rules out.
    """
    if spec.d != f.d:
        raise InvalidInput(f"domain arity {spec.d} does not match map arity {f.d}")
    if f.r != f.d:
        # Collisions are searched with the square-map Newton solver.
        raise InvalidInput("the probe needs a square map (r = d)")
    report = ProbeReport(trials=trials)
    dims = list(dims)
    for t in range(trials):
        rng = np.random.default_rng([abs(seed) + 1, t])
        n = dims[t % len(dims)]
        radius = 0.2 + 0.6 * rng.random()
        try:
            x = sample_point(spec, n, rng, target=radius)
        except FreecalcError:
            continue
        try:
            rep = linearize(f, x)
        except FreecalcError:
            continue
        if rep.sigma_min < report.min_sigma:
            report.min_sigma = rep.sigma_min
            report.min_sigma_point = x
        try:
            target = eval_map(f, x)
            start = sample_point(spec, n, rng, target=0.2 + 0.6 * rng.random())
            trace = newton_invert(f, target, start, tol=1e-12, max_iter=40)
        except FreecalcError:
            continue
        if not trace.converged:
            continue
        z = trace.solution
        sep = (z - x).norm()
        if sep <= 1e-3 * (1.0 + x.norm()):
            continue
        if not contains(spec, z):
            continue
        resid = (eval_map(f, z) - target).norm()
        if resid > 1e-8:
            continue
        report.collisions.append(
            {"x": x, "x_prime": z, "separation": sep, "residual": resid, "n": n}
        )
        pair = direct_sum([x, z])
        if contains(spec, pair):
            try:
                srep = linearize(f, pair)
            except FreecalcError:
                continue
            if srep.sigma_min <= 1e-10:
                report.degenerate_points.append((pair, srep.sigma_min))
    degenerate_seen = bool(report.degenerate_points) or report.min_sigma <= 1e-6
    report.suspected_violation = report.collision_found and not degenerate_seen
    return report
