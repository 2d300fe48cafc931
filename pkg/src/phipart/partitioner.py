"""Equal-empirical-mass recursive partitioning of R^d.

The splitter works axis by axis. At depth ``k`` every ``k``-level cell holds
``n / m0**k`` samples; those samples are sorted along axis ``k`` and cut into
``m0`` slabs of equal count. The ``j``-th cut is the ``(j * n_cell / m0)``-th
order statistic, so slab ``j`` is ``(a_{j-1}, a_j]`` with the outer slabs
unbounded.
"""
from __future__ import annotations

from typing import Callable, Union

import numpy as np

from .errors import DimensionMismatch, DuplicateOverflow, IndivisibleSampleCount, BadRange
from .geometry import HyperRectangle, Partition, max_edge_length


def as_samples(samples, d: int | None = None) -> np.ndarray:
    """Coerce to a finite ``(n, d)`` float matrix; 1-d input is a column."""
    x = np.asarray(samples, dtype=float)
    if x.ndim == 1:
        x = x.reshape(-1, 1)
    if x.ndim != 2:
        raise DimensionMismatch(f"samples must be a 2-d matrix, got shape {x.shape}")
    if d is not None and x.shape[0] and x.shape[1] != d:
        raise DimensionMismatch(f"samples have dimension {x.shape[1]}, expected {d}")
    if not np.all(np.isfinite(x)):
        raise DimensionMismatch("samples must be finite")
    return x


def build_partition(samples, m0: int, *, jitter: float = 0.0, seed=None) -> Partition:
    """Split R^d into ``m0**d`` cells that each hold exactly ``n / m0**d`` samples.

    ``jitter > 0`` adds ``Uniform(-jitter, jitter)`` noise to every coordinate
    first, which breaks ties in discretised data. Without it, a tie across a
    cut raises :class:`DuplicateOverflow`.
    """
    x = as_samples(samples)
    n, d = x.shape
    m0 = int(m0)
    if m0 < 1:
        raise BadRange("m0 must be a positive integer")
    m = m0**d
    if n < m or n % m:
        raise IndivisibleSampleCount(f"m = {m0}^{d} = {m} must divide n = {n} (and n >= m)")
    if jitter:
        rng = np.random.default_rng(seed)
        x = x + rng.uniform(-jitter, jitter, size=x.shape)

    order = np.arange(n).reshape(1, n)
    splits = []
    for k in range(d):
        groups, size = order.shape
        vals = x[order, k]
        idx = np.argsort(vals, axis=1, kind="stable")
        order = np.take_along_axis(order, idx, axis=1)
        vals = np.take_along_axis(vals, idx, axis=1)
        child = size // m0
        if m0 > 1:
            pos = child * np.arange(1, m0)
            cuts = vals[:, pos - 1]
            if np.any(cuts == vals[:, pos]):
                g, j = np.argwhere(cuts == vals[:, pos])[0]
                raise DuplicateOverflow(
                    f"tied value {cuts[g, j]!r} on axis {k} straddles a cut; "
                    "equal empirical mass is impossible (use jitter)"
                )
        else:
            cuts = np.empty((groups, 0))
        splits.append(cuts)
        order = order.reshape(groups * m0, child)
    return Partition.from_splits(splits, m0, d)


def cell_counts(partition: Partition, samples) -> np.ndarray:
    x = np.asarray(samples, dtype=float)
    if x.size == 0:
        return np.zeros(partition.m, dtype=np.int64)
    x = as_samples(x, partition.d)
    return np.bincount(partition.locate_many(x), minlength=partition.m)


MassOracle = Callable[[HyperRectangle], float]


def partition_l1_error(partition: Partition, samples, true_mass: Union[MassOracle, object]) -> float:
    """``sum_i |mu_n(I_i) - mu(I_i)|`` for empirical measure ``mu_n`` of ``samples``.

    ``true_mass`` is either a callable on cells or a distribution spec accepted
    by :func:`phipart.synthdata.cell_masses`.
    """
    counts = cell_counts(partition, samples)
    n = counts.sum()
    emp = counts / n if n else np.zeros(partition.m)
    if callable(true_mass):
        mass = np.array([float(true_mass(c)) for c in partition.cells])
    else:
        from .synthdata import cell_masses

        mass = cell_masses(true_mass, partition)
    return float(np.abs(emp - mass).sum())


def gamma_threshold(m: int, d: int) -> float:
    """Edge length above which an interior cell counts as oversized."""
    return float(m) ** (-(2 * d + 1) / (2 * d * (d + 1)))


def classify_cells(partition: Partition, R: float, m: int | None = None):
    """Split cell indices into the classes (boundary, outside, oversized).

    With ``H = [-R, R]^d``: ``gamma1`` are cells meeting the boundary of ``H``,
    ``gamma2`` cells disjoint from ``H``, ``gamma3`` cells inside ``H`` (and not
    touching its boundary) whose longest edge is at least
    ``m ** (-(2d+1) / (2d(d+1)))``.
    """
    if not R > 0:
        raise BadRange("R must be positive")
    m = partition.m if m is None else int(m)
    d = partition.d
    thr = gamma_threshold(m, d)
    g1, g2, g3 = [], [], []
    for i, cell in enumerate(partition.cells):
        lo, hi = cell.lowers, cell.uppers
        # (a, b] meets [-R, R] iff a < R and b >= -R
        meets = np.all((lo < R) & (hi >= -R))
        if not meets:
            g2.append(i)
            continue
        on_face = np.any(((lo < R) & (R <= hi)) | ((lo < -R) & (-R <= hi)))
        if on_face:
            g1.append(i)
        elif max_edge_length(cell) >= thr:
            g3.append(i)
    return set(g1), set(g2), set(g3)


def count_infinitely_large(partition: Partition) -> int:
    return sum(c.is_infinitely_large for c in partition.cells)
