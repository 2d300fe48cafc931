"""Plug-in phi-divergence estimate over a data-dependent partition."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BadRange, DimensionMismatch, ZeroMass
from .geometry import Partition
from .partitioner import as_samples, build_partition, cell_counts
from .phi import PhiFamily, get_family, phi_eval


@dataclass(frozen=True)
class EstimateResult:
    value: float
    p_counts: np.ndarray
    q_counts: np.ndarray
    q_masses: np.ndarray
    ratios: np.ndarray
    contributions: np.ndarray
    n1: int
    n2: int
    m: int
    family: str

    @property
    def per_cell(self):
        """``(index, p_count, q_count, ratio, contribution)`` for every cell."""
        return [
            (i, int(p), int(q), float(r), float(c))
            for i, (p, q, r, c) in enumerate(
                zip(self.p_counts, self.q_counts, self.ratios, self.contributions)
            )
        ]

    def to_json(self) -> dict:
        return {
            "value": self.value,
            "family": self.family,
            "n1": self.n1,
            "n2": self.n2,
            "m": self.m,
            "per_cell": [
                {"cell": i, "p_count": p, "q_count": q, "ratio": r, "contribution": c}
                for i, p, q, r, c in self.per_cell
            ],
        }


def estimate_divergence(
    samples_p,
    samples_q,
    m0: int,
    family="kl",
    *,
    weighted: bool = True,
    jitter: float = 0.0,
    seed=None,
    partition: Partition | None = None,
) -> EstimateResult:
    """Estimate ``D_phi(P || Q)`` from samples of ``P`` and ``Q``.

    ``R^d`` is cut into ``m = m0**d`` cells of equal empirical ``Q``-mass and
    the estimate is ``sum_i phi(m * p_i / n1) / m``. ``weighted=False`` drops
    the ``1/m`` weight (debug only; it does not approximate the integral).
    A prebuilt ``partition`` of ``samples_q`` may be passed to skip the split.
    """
    family = get_family(family)
    xq = as_samples(samples_q)
    xp = as_samples(samples_p)
    if xp.shape[1] != xq.shape[1]:
        raise DimensionMismatch(f"P has dimension {xp.shape[1]}, Q has {xq.shape[1]}")
    if xp.shape[0] == 0:
        raise BadRange("need at least one P-sample")
    if partition is None:
        partition = build_partition(xq, m0, jitter=jitter, seed=seed)
    n2 = xq.shape[0]
    m = partition.m
    q_counts = np.full(m, n2 // m, dtype=np.int64)
    q_masses = np.full(m, 1.0 / m)
    p_counts = cell_counts(partition, xp)
    n1 = xp.shape[0]
    ratios = (p_counts / n1) * m
    phis = phi_eval(family, ratios)
    contributions = phis * q_masses if weighted else phis
    return EstimateResult(
        value=float(contributions.sum()),
        p_counts=p_counts,
        q_counts=q_counts,
        q_masses=q_masses,
        ratios=ratios,
        contributions=contributions,
        n1=n1,
        n2=n2,
        m=m,
        family=family.name,
    )


def estimate_with_partition(
    partition: Partition,
    samples_p,
    n1: int | None,
    family,
    q_masses,
) -> EstimateResult:
    """``sum_i phi((p_i / n1) / q_i) * q_i`` for arbitrary positive cell weights.

    Substituting true ``Q``-masses for the empirical ``1/m`` separates the
    integration error from the sampling error.
    """
    family = get_family(family)
    q = np.asarray(q_masses, dtype=float).reshape(-1)
    if q.shape[0] != partition.m:
        raise DimensionMismatch(f"{q.shape[0]} masses for {partition.m} cells")
    if np.any(q < 0) or not np.isclose(q.sum(), 1.0, rtol=0, atol=1e-9):
        raise BadRange("q_masses must be nonnegative and sum to 1")
    p_counts = cell_counts(partition, samples_p)
    n1 = int(p_counts.sum()) if n1 is None else int(n1)
    if n1 <= 0:
        raise BadRange("n1 must be positive")
    if np.any((q == 0) & (p_counts > 0)):
        i = int(np.argmax((q == 0) & (p_counts > 0)))
        raise ZeroMass(f"cell {i} has P-samples but zero Q-mass")
    live = q > 0
    ratios = np.zeros(partition.m)
    ratios[live] = (p_counts[live] / n1) / q[live]
    contributions = np.zeros(partition.m)
    contributions[live] = phi_eval(family, ratios[live]) * q[live]
    return EstimateResult(
        value=float(contributions.sum()),
        p_counts=p_counts,
        q_counts=np.zeros(partition.m, dtype=np.int64),
        q_masses=q,
        ratios=ratios,
        contributions=contributions,
        n1=n1,
        n2=0,
        m=partition.m,
        family=family.name,
    )


__all__ = ["EstimateResult", "estimate_divergence", "estimate_with_partition", "PhiFamily"]
