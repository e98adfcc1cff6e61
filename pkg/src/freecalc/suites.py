"""Randomized property suites for the structural axioms of NC maps.

Each suite draws seeded random points, directions, and conjugating maps,
evaluates both sides of a structural identity (direct-sum preservation,
intertwining transport, similarity transport, or the direct-sum axiom of
the derivative map itself), and compares them relative to the scale
1 + (largest intermediate norm encountered).  Trials whose inverses are not
evaluable are skipped, not failed.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .errors import DilationError, InvalidInput, SingularError
from .expr import EvalStats, NcMap, eval_map
from .diff import derivative
from .linalg import (
    MatrixTuple,
    conjugate,
    direct_sum,
    op_norm,
    random_invertible,
    random_tuple,
)

__all__ = ["SuiteConfig", "SuiteReport", "run_suite", "SUITE_NAMES", "trial_rng"]

SUITE_NAMES = ("directsum", "intertwine", "similarity", "derivative-nc")


@dataclass(frozen=True)
class SuiteConfig:
    """Knobs shared by all suites.

    ``cond_cap`` bounds the conditioning of the random conjugating maps (a
    deliberately small default: identity checks degrade with the square of
    the conditioning, and the suites must separate method error from
    conditioning error).  Discrepancies are compared against
    ``tol * (1 + max intermediate norm)``.
    """

    seed: int = 0
    trials: int = 200
    dims: tuple[int, ...] = (1, 2, 3, 4)
    cond_cap: float = 10.0
    tol: float = 1e-9
    scale_policy: str = "relative-to-intermediate-norms"

    def __post_init__(self):
        if self.trials < 1:
            raise InvalidInput("trials must be at least 1")
        if not self.dims:
            raise InvalidInput("dims must be nonempty")
        if not self.tol > 0:
            raise InvalidInput("tol must be positive")
        if self.scale_policy != "relative-to-intermediate-norms":
            raise InvalidInput(f"unknown scale policy {self.scale_policy!r}")
        object.__setattr__(self, "dims", tuple(self.dims))


@dataclass
class SuiteReport:
    """Aggregate outcome of one suite run."""

    suite: str
    trials: int
    failures: int
    skipped: int
    worst_discrepancy: float
    worst_witness: dict | None
    runtime_seconds: float

    @property
    def passes(self) -> int:
        return self.trials - self.failures - self.skipped

    @property
    def passed(self) -> bool:
        return self.failures == 0


def trial_rng(seed: int, index: int) -> np.random.Generator:
    """Deterministic per-trial generator derived from (seed, trial index)."""
    return np.random.default_rng([abs(seed), index])


def _draw_norm(rng) -> float:
    return 0.3 + 0.4 * rng.random()


def _directsum_trial(f, n, rng, cond_cap, evaluator):
    x = random_tuple(f.d, n, rng, target_norm=_draw_norm(rng))
    y = random_tuple(f.d, n, rng, target_norm=_draw_norm(rng))
    s = random_invertible(2 * n, cond_cap, rng)
    stats = EvalStats()
    z = conjugate(s, direct_sum([x, y]))
    lhs = evaluator(f, z, stats)
    fx = evaluator(f, x, stats)
    fy = evaluator(f, y, stats)
    rhs = conjugate(s, direct_sum([fx, fy]))
    disc = max(op_norm(a - b) for a, b in zip(lhs, rhs))
    witness = {"n": n, "x": x, "y": y, "s": s}
    return disc, 1.0 + stats.max_norm, witness


def _intertwine_trial(f, n, rng, cond_cap, evaluator):
    x = random_tuple(f.d, n, rng, target_norm=_draw_norm(rng))
    L = random_invertible(n, cond_cap, rng)
    Linv = np.linalg.inv(L)
    y = MatrixTuple(L @ m @ Linv for m in x)
    stats = EvalStats()
    fx = evaluator(f, x, stats)
    fy = evaluator(f, y, stats)
    disc = max(op_norm(L @ a - b @ L) for a, b in zip(fx, fy))
    witness = {"n": n, "x": x, "L": L}
    return disc, 1.0 + stats.max_norm, witness


def _similarity_trial(f, n, rng, cond_cap, evaluator):
    x = random_tuple(f.d, n, rng, target_norm=_draw_norm(rng))
    s = random_invertible(n, cond_cap, rng)
    stats = EvalStats()
    lhs = evaluator(f, conjugate(s, x), stats)
    rhs = conjugate(s, evaluator(f, x, stats))
    disc = max(op_norm(a - b) for a, b in zip(lhs, rhs))
    witness = {"n": n, "x": x, "s": s}
    return disc, 1.0 + stats.max_norm, witness


def _derivative_nc_trial(f, n, rng, cond_cap, evaluator):
    # The derivative map (x, h) -> Df(x)[h] must itself preserve direct sums.
    x1 = random_tuple(f.d, n, rng, target_norm=_draw_norm(rng))
    h1 = random_tuple(f.d, n, rng, target_norm=1.0)
    x2 = random_tuple(f.d, n, rng, target_norm=_draw_norm(rng))
    h2 = random_tuple(f.d, n, rng, target_norm=1.0)
    s = random_invertible(2 * n, cond_cap, rng)
    stats = EvalStats()
    lhs = derivative(
        f, conjugate(s, direct_sum([x1, x2])), conjugate(s, direct_sum([h1, h2])),
        stats=stats,
    )
    d1 = derivative(f, x1, h1, stats=stats)
    d2 = derivative(f, x2, h2, stats=stats)
    rhs = conjugate(s, direct_sum([d1, d2]))
    disc = max(op_norm(a - b) for a, b in zip(lhs, rhs))
    witness = {"n": n, "x1": x1, "h1": h1, "x2": x2, "h2": h2, "s": s}
    return disc, 1.0 + stats.max_norm, witness


_TRIALS = {
    "directsum": _directsum_trial,
    "intertwine": _intertwine_trial,
    "similarity": _similarity_trial,
    "derivative-nc": _derivative_nc_trial,
}


def run_suite(
    name: str,
    f: NcMap,
    config: SuiteConfig,
    evaluator=None,
) -> SuiteReport:
    """Run the named suite against ``f`` and aggregate a report.

    ``evaluator`` substitutes for map evaluation in the three evaluation
    suites (a test hook); it must accept (f, x, stats).  Worst-case
    discrepancy and its witnessing inputs are retained whether or not the
    suite passes.
    """
    if name not in _TRIALS:
        raise InvalidInput(f"unknown suite {name!r}; choose from {SUITE_NAMES}")
    trial = _TRIALS[name]
    evaluator = evaluator or eval_map
    start = time.perf_counter()
    failures = 0
    skipped = 0
    worst = -1.0
    worst_witness = None
    for t in range(config.trials):
        rng = trial_rng(config.seed, t)
        n = config.dims[t % len(config.dims)]
        try:
            disc, scale, witness = trial(f, n, rng, config.cond_cap, evaluator)
        except (SingularError, DilationError):
            skipped += 1
            continue
        rel = disc / scale
        if rel > worst:
            worst = rel
            worst_witness = {"trial": t, "discrepancy": disc, "scale": scale, **witness}
        if rel > config.tol:
            failures += 1
    return SuiteReport(
        suite=name,
        trials=config.trials,
        failures=failures,
        skipped=skipped,
        worst_discrepancy=max(worst, 0.0),
        worst_witness=worst_witness,
        runtime_seconds=time.perf_counter() - start,
    )
