"""Monte Carlo convergence studies and bound-verification suites."""
from __future__ import annotations

import itertools
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from . import bounds
from .errors import ConfigError
from .estimator import estimate_divergence
from .partitioner import build_partition, cell_counts, classify_cells, count_infinitely_large, partition_l1_error
from .phi import get_family
from .synthdata import DistributionSpec, discretized_divergence, divergence_oracle, draw, gaussian

log = logging.getLogger(__name__)

TRIANGLE_TOL = 1e-12


@dataclass
class ExperimentConfig:
    p_spec: DistributionSpec
    q_spec: DistributionSpec
    family: str = "kl"
    n_schedule: list = field(default_factory=lambda: [1000, 10000])
    m0_schedule: list = field(default_factory=lambda: [8])
    replications: int = 20
    base_seed: int = 0
    decompose: bool = True
    # draw n P-samples but round the Q-sample count up to a multiple of m
    round_q_up: bool = False

    def __post_init__(self):
        if self.p_spec.d != self.q_spec.d:
            raise ConfigError("P and Q must have the same dimension")
        if not self.n_schedule or not self.m0_schedule:
            raise ConfigError("schedules must be nonempty")
        if self.replications < 1:
            raise ConfigError("replications must be >= 1")
        get_family(self.family)
        d = self.q_spec.d
        for n, m0 in itertools.product(self.n_schedule, self.m0_schedule):
            m = int(m0) ** d
            if not self.round_q_up and (n < m or n % m):
                raise ConfigError(f"m0^d = {m} does not divide n = {n}")

    @classmethod
    def from_json(cls, obj: dict) -> "ExperimentConfig":
        obj = dict(obj)
        try:
            obj["p_spec"] = DistributionSpec.from_json(obj.pop("p_spec", None) or obj.pop("p"))
            obj["q_spec"] = DistributionSpec.from_json(obj.pop("q_spec", None) or obj.pop("q"))
        except KeyError as exc:
            raise ConfigError(f"missing distribution {exc}") from None
        try:
            return cls(**obj)
        except TypeError as exc:
            raise ConfigError(str(exc)) from None

    def to_json(self) -> dict:
        out = asdict(self)
        out["p_spec"] = self.p_spec.to_json()
        out["q_spec"] = self.q_spec.to_json()
        return out


@dataclass
class ConvergenceRow:
    n: int
    n2: int
    m: int
    m0: int
    oracle_value: float
    mean_estimate: float
    std_estimate: float
    mean_abs_error: float
    mean_T1: Optional[float] = None
    mean_T2: Optional[float] = None
    triangle_violations: int = 0
    estimates: list = field(default_factory=list)
    T1: list = field(default_factory=list)
    T2: list = field(default_factory=list)

    def to_json(self) -> dict:
        return asdict(self)


def replication_seeds(base_seed: int, k: int):
    """Independent P and Q streams for replication ``k``."""
    ss = np.random.SeedSequence(base_seed + k)
    return ss.spawn(2)


def q_sample_size(n: int, m: int, round_up: bool) -> int:
    if not round_up:
        return n
    return max(m, -(-n // m) * m)


def _replicate(config: ExperimentConfig, n: int, m0: int, k: int, oracle: float):
    sp, sq = replication_seeds(config.base_seed, k)
    n2 = q_sample_size(n, int(m0) ** config.q_spec.d, config.round_q_up)
    xp = draw(config.p_spec, n, sp)
    xq = draw(config.q_spec, n2, sq)
    part = build_partition(xq, m0)
    est = estimate_divergence(xp, xq, m0, config.family, partition=part).value
    if not config.decompose:
        return est, None, None
    mid = discretized_divergence(part, config.p_spec, config.q_spec, config.family)
    return est, abs(mid - oracle), abs(est - mid)


def run_convergence(config: ExperimentConfig, threads: int = 1, oracle: Optional[float] = None):
    """Replicated estimates over the ``(n, m0)`` grid, rows sorted by ``(n, m)``.

    ``T1`` is the gap between the true-mass discretised divergence and the
    oracle, ``T2`` the gap between the estimate and that discretised value.
    """
    if oracle is None:
        oracle = divergence_oracle(config.p_spec, config.q_spec, config.family)
    d = config.q_spec.d
    grid = sorted(
        itertools.product(config.n_schedule, config.m0_schedule), key=lambda t: (t[0], int(t[1]) ** d)
    )
    rows = []
    for n, m0 in grid:
        log.info("n=%d m0=%d: %d replications", n, m0, config.replications)
        reps = range(config.replications)
        if threads > 1:
            with ThreadPoolExecutor(threads) as pool:
                out = list(pool.map(lambda k: _replicate(config, n, m0, k, oracle), reps))
        else:
            out = [_replicate(config, n, m0, k, oracle) for k in reps]
        est = np.array([o[0] for o in out])
        row = ConvergenceRow(
            n=int(n),
            n2=q_sample_size(int(n), int(m0) ** d, config.round_q_up),
            m=int(m0) ** d,
            m0=int(m0),
            oracle_value=float(oracle),
            mean_estimate=float(est.mean()),
            std_estimate=float(est.std(ddof=1)) if est.size > 1 else 0.0,
            mean_abs_error=float(np.abs(est - oracle).mean()),
            estimates=est.tolist(),
        )
        if config.decompose:
            t1 = np.array([o[1] for o in out])
            t2 = np.array([o[2] for o in out])
            row.mean_T1, row.mean_T2 = float(t1.mean()), float(t2.mean())
            row.T1, row.T2 = t1.tolist(), t2.tolist()
            row.triangle_violations = int(np.sum(np.abs(est - oracle) > t1 + t2 + TRIANGLE_TOL))
        rows.append(row)
    return rows


# ------------------------------------------------------------- bound suites


def _check(name, observed, bound, passed, **extra):
    return {"name": name, "observed": observed, "bound": bound, "passed": bool(passed), **extra}


def _suite_report(suite, checks, **extra):
    violations = sum(not c["passed"] for c in checks)
    return {"suite": suite, "violations": violations, "passed": violations == 0, "checks": checks, **extra}


def gamma_suite(seeds: int = 100, base_seed: int = 0, dims=(1, 2), m0s=range(2, 9), radii=(1.0, 3.0, 10.0),
                cells_per_m: int = 8):
    """Deterministic cell-class caps and the equal-mass invariant on Gaussian data."""
    checks = []
    for d, m0 in itertools.product(dims, m0s):
        m = m0**d
        n = m * cells_per_m
        spec = gaussian(0.0, 1.0, d)
        worst = {R: [0, 0] for R in radii}
        worst_inf = 0
        unequal = 0
        for s in range(seeds):
            x = draw(spec, n, [base_seed, s, d, m0])
            part = build_partition(x, m0)
            unequal += int(np.any(cell_counts(part, x) != n // m))
            worst_inf = max(worst_inf, count_infinitely_large(part))
            for R in radii:
                g1, _, g3 = classify_cells(part, R)
                worst[R][0] = max(worst[R][0], len(g1))
                worst[R][1] = max(worst[R][1], len(g3))
        b1, _ = bounds.gamma_bounds(m, d, 1.0)
        checks.append(_check(f"equal_mass d={d} m0={m0}", unequal, 0, unequal == 0))
        checks.append(_check(f"infinitely_large d={d} m0={m0}", worst_inf, b1, worst_inf <= b1))
        for R in radii:
            g1b, g3b = bounds.gamma_bounds(m, d, R)
            checks.append(_check(f"gamma1 d={d} m0={m0} R={R}", worst[R][0], g1b, worst[R][0] <= g1b))
            checks.append(_check(f"gamma3 d={d} m0={m0} R={R}", worst[R][1], g3b, worst[R][1] <= g3b))
    return checks


def gamma2_suite(seeds: int = 200, base_seed: int = 0, eps2: float = 0.2, delta: float = 0.2, dims=(1, 2),
                 m0s=(2, 4, 8)):
    """Frequency of ``|outside cells| >= eps2 * m`` against ``delta``.

    Standard Gaussians satisfy the tail condition with ``c = d, alpha = 2``
    (Chebyshev on ``E|X|^2 = d``).
    """
    checks = []
    for d, m0 in itertools.product(dims, m0s):
        m = m0**d
        params = bounds.RegularityParams(c=float(d), alpha=2.0)
        R = bounds.tail_radius(params, eps2)
        n_min = bounds.n_for_gamma2(eps2, delta)
        n = (math.floor(n_min / m) + 1) * m
        spec = gaussian(0.0, 1.0, d)
        bad = 0
        for s in range(seeds):
            part = build_partition(draw(spec, n, [base_seed, s, d, m0, 2]), m0)
            _, g2, _ = classify_cells(part, R)
            bad += len(g2) >= eps2 * m
        frac = bad / seeds
        checks.append(_check(f"gamma2 d={d} m0={m0} n={n} R={R:.4g}", frac, delta, frac < delta))
    return checks


def partition_error_suite(seeds: int = 50, base_seed: int = 0, m0: int = 4, eps: float = 1.0, delta: float = 0.05):
    """Fraction of replications whose partition L1 error exceeds ``eps`` at ``n > N*``.

    Run at a relaxed ``eps`` so that ``N*`` stays at desk scale.
    """
    ns, _, _ = bounds.n_star(m0, 1, eps, delta)
    n = (math.floor(ns / m0) + 1) * m0
    spec = gaussian(0.0, 1.0)
    errs = []
    for s in range(seeds):
        x = draw(spec, n, [base_seed, s, 7])
        part = build_partition(x, m0)
        errs.append(partition_l1_error(part, x, spec))
    frac = float(np.mean(np.array(errs) > eps))
    return [_check(f"partition_error m={m0} eps={eps} n={n}", frac, delta, frac <= delta, max_error=max(errs))]


def count_induced_partitions_1d(n_points: int, m0: int) -> int:
    """Distinct labelings of ``n_points`` collinear points by ``m0 - 1`` ordered cuts."""
    pts = np.arange(n_points, dtype=float)
    gaps = np.arange(-0.5, n_points, 1.0)
    seen = set()
    for cuts in itertools.combinations_with_replacement(gaps, m0 - 1):
        labels = np.searchsorted(np.array(cuts), pts, side="left")
        seen.add(tuple(labels.tolist()))
    return len(seen)


def count_induced_partitions_2d(points: np.ndarray, m0: int) -> int:
    """Distinct labelings of a 2-d point set by x-slabs, each cut independently in y."""
    xs = np.sort(points[:, 0])
    xgaps = np.concatenate([[xs[0] - 1], 0.5 * (xs[:-1] + xs[1:]), [xs[-1] + 1]])
    seen = set()
    for xc in itertools.combinations_with_replacement(xgaps, m0 - 1):
        slab = np.searchsorted(np.array(xc), points[:, 0], side="left")
        per_slab = []
        for j in range(m0):
            idx = np.flatnonzero(slab == j)
            ys = np.sort(points[idx, 1])
            if ys.size:
                ygaps = np.concatenate([[ys[0] - 1], 0.5 * (ys[:-1] + ys[1:]), [ys[-1] + 1]])
            else:
                ygaps = np.array([0.0])
            options = []
            for yc in itertools.combinations_with_replacement(ygaps, m0 - 1):
                options.append((idx, np.searchsorted(np.array(yc), points[idx, 1], side="left")))
            per_slab.append(options)
        for combo in itertools.product(*per_slab):
            labels = np.empty(points.shape[0], dtype=int)
            for j, (idx, row) in enumerate(combo):
                labels[idx] = j * m0 + row
            seen.add(tuple(labels.tolist()))
    return len(seen)


def growth_suite(max_n: int = 5, max_m0: int = 3, base_seed: int = 0):
    """Exhaustive induced-partition counts on ``2n`` points against the growth bound."""
    checks = []
    for n in range(1, max_n + 1):
        for m0 in range(1, max_m0 + 1):
            count = count_induced_partitions_1d(2 * n, m0)
            bound = math.exp(bounds.log_growth_bound(n, m0, 1))
            checks.append(_check(f"growth d=1 n={n} m0={m0}", count, bound, count <= bound * (1 + 1e-12)))
    rng = np.random.default_rng(base_seed)
    for n in (1, 2):
        best = max(count_induced_partitions_2d(rng.uniform(size=(2 * n, 2)), 2) for _ in range(5))
        bound = math.exp(bounds.log_growth_bound(n, 4, 2))
        checks.append(_check(f"growth d=2 n={n} m0=2", best, bound, best <= bound * (1 + 1e-12)))
    return checks


def chernoff_suite(reps: int = 10_000, base_seed: int = 0, n: int = 100, p: float = 0.1):
    """Empirical binomial upper tail against the additive Chernoff bound (3-sigma slack)."""
    rng = np.random.default_rng([base_seed, 11])
    x = rng.binomial(n, p, size=reps)
    mu = n * p
    checks = []
    for t in np.arange(mu, mu + 21, 2.0):
        freq = float(np.mean(x >= t))
        b = bounds.chernoff_tail(n, mu, float(t))
        slack = 3.0 * math.sqrt(b * (1 - b) / reps)
        checks.append(_check(f"chernoff t={t:g}", freq, b, freq <= b + slack))
    return checks


SUITES = ("gamma", "partition_error", "growth", "chernoff")


def run_bound_suite(suite: str, seeds: int = 100, base_seed: int = 0) -> dict:
    if suite == "gamma":
        checks = gamma_suite(seeds, base_seed) + gamma2_suite(max(seeds, 200), base_seed)
    elif suite == "partition_error":
        checks = partition_error_suite(seeds, base_seed)
    elif suite == "growth":
        checks = growth_suite(base_seed=base_seed)
    elif suite == "chernoff":
        checks = chernoff_suite(max(seeds, 10_000), base_seed)
    else:
        raise ConfigError(f"unknown suite {suite!r}; choose from {SUITES}")
    return _suite_report(suite, checks, seeds=seeds, base_seed=base_seed)

