"""Seeded product-form benchmark distributions and divergence oracles.

Every distribution factors over axes, so the mass of an axis-aligned box is a
product of 1-d CDF differences and the closed-form divergences reduce to
per-axis formulas. Sampling goes through ``numpy.random.Generator``; CDFs and
densities come from ``scipy.stats``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import stats

from .errors import BadParams, Unavailable, ZeroDensity
from .geometry import HyperRectangle, Partition
from .phi import get_family, phi_eval

KINDS = ("GaussianDiag", "Exponential", "Uniform", "Chi2", "Cauchy")

# quadrature box half-width, in scale units
BOX_SCALES = 10.0


@dataclass(frozen=True)
class DistributionSpec:
    """Product-form distribution on R^d.

    ``GaussianDiag``/``Cauchy`` use ``loc`` and ``scale``; ``Exponential`` uses
    ``scale`` (support ``[0, inf)``); ``Uniform`` uses ``low``/``high``;
    ``Chi2`` uses ``dof``. Scalars broadcast to ``d`` axes.
    """

    kind: str
    d: int = 1
    loc: tuple = ()
    scale: tuple = ()
    low: tuple = ()
    high: tuple = ()
    dof: tuple = ()

    def __post_init__(self):
        if self.kind not in KINDS:
            raise BadParams(f"unknown distribution kind {self.kind!r}")
        d = int(self.d)
        if d < 1:
            raise BadParams("d must be >= 1")
        object.__setattr__(self, "d", d)

        def vec(name, default=None):
            raw = getattr(self, name)
            if raw is None or (isinstance(raw, tuple) and not raw):
                if default is None:
                    return ()
                raw = default
            arr = np.broadcast_to(np.asarray(raw, dtype=float).reshape(-1), (d,))
            return tuple(float(v) for v in arr)

        k = self.kind
        if k in ("GaussianDiag", "Cauchy"):
            object.__setattr__(self, "loc", vec("loc", 0.0))
            object.__setattr__(self, "scale", vec("scale", 1.0))
        elif k == "Exponential":
            object.__setattr__(self, "scale", vec("scale", 1.0))
        elif k == "Uniform":
            object.__setattr__(self, "low", vec("low", 0.0))
            object.__setattr__(self, "high", vec("high", 1.0))
            if any(not lo < hi for lo, hi in zip(self.low, self.high)):
                raise BadParams("uniform bounds must satisfy low < high")
        elif k == "Chi2":
            object.__setattr__(self, "dof", vec("dof", 1.0))
            if any(v <= 0 for v in self.dof):
                raise BadParams("dof must be positive")
        if any(s <= 0 for s in self.scale):
            raise BadParams("scales must be positive")

    # -- scipy marginals
    def marginal(self, j: int):
        k = self.kind
        if k == "GaussianDiag":
            return stats.norm(self.loc[j], self.scale[j])
        if k == "Cauchy":
            return stats.cauchy(self.loc[j], self.scale[j])
        if k == "Exponential":
            return stats.expon(scale=self.scale[j])
        if k == "Uniform":
            return stats.uniform(self.low[j], self.high[j] - self.low[j])
        return stats.chi2(self.dof[j])

    def extent(self, j: int):
        """Bounded axis range used as the default quadrature window."""
        k = self.kind
        if k in ("GaussianDiag", "Cauchy"):
            w = BOX_SCALES * self.scale[j]
            return self.loc[j] - w, self.loc[j] + w
        if k == "Exponential":
            return 0.0, BOX_SCALES * self.scale[j] * 4.0
        if k == "Uniform":
            return self.low[j], self.high[j]
        v = self.dof[j]
        return 0.0, v + BOX_SCALES * math.sqrt(2.0 * v) + 10.0

    def breakpoints(self, j: int):
        """Points where the axis density is not smooth."""
        if self.kind == "Uniform":
            return [self.low[j], self.high[j]]
        if self.kind in ("Exponential", "Chi2"):
            return [0.0]
        return []

    def to_json(self) -> dict:
        out = {"kind": self.kind, "d": self.d}
        for name in ("loc", "scale", "low", "high", "dof"):
            val = getattr(self, name)
            if val:
                out[name] = list(val)
        return out

    @classmethod
    def from_json(cls, obj: dict) -> "DistributionSpec":
        obj = dict(obj)
        # accept "mean" as an alias of "loc"
        if "mean" in obj:
            obj["loc"] = obj.pop("mean")
        unknown = set(obj) - {"kind", "d", "loc", "scale", "low", "high", "dof"}
        if unknown:
            raise BadParams(f"unknown distribution fields {sorted(unknown)}")
        kw = {k: (tuple(np.atleast_1d(v).tolist()) if k not in ("kind", "d") else v) for k, v in obj.items()}
        if "d" not in kw:
            lens = [len(v) for k, v in kw.items() if k not in ("kind", "d")]
            kw["d"] = max(lens) if lens else 1
        return cls(**kw)


def gaussian(loc=0.0, scale=1.0, d: int = 1) -> DistributionSpec:
    return DistributionSpec("GaussianDiag", d, loc=_t(loc), scale=_t(scale))


def uniform(low=0.0, high=1.0, d: int = 1) -> DistributionSpec:
    return DistributionSpec("Uniform", d, low=_t(low), high=_t(high))


def _t(v):
    return tuple(np.atleast_1d(np.asarray(v, dtype=float)).tolist())


def draw(spec: DistributionSpec, n: int, seed) -> np.ndarray:
    """``n`` i.i.d. rows from ``spec``; ``seed`` is anything ``default_rng`` accepts."""
    if int(n) < 1:
        raise BadParams("n must be >= 1")
    n = int(n)
    rng = np.random.default_rng(seed)
    size = (n, spec.d)
    k = spec.kind
    if k == "GaussianDiag":
        return rng.normal(spec.loc, spec.scale, size=size)
    if k == "Cauchy":
        return np.asarray(spec.loc) + np.asarray(spec.scale) * rng.standard_cauchy(size)
    if k == "Exponential":
        return rng.exponential(spec.scale, size=size)
    if k == "Uniform":
        return rng.uniform(spec.low, spec.high, size=size)
    return rng.chisquare(spec.dof, size=size)


def _axis_mass(dist, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    # upper-tail differences via sf keep far-right cells accurate
    med = dist.median()
    upper = lo >= med
    out = np.where(upper, dist.sf(lo) - dist.sf(hi), dist.cdf(hi) - dist.cdf(lo))
    return np.clip(out, 0.0, 1.0)


def cell_mass(spec: DistributionSpec, box: HyperRectangle) -> float:
    if box.d != spec.d:
        raise BadParams(f"box dimension {box.d} != distribution dimension {spec.d}")
    total = 1.0
    for j, side in enumerate(box.sides):
        total *= float(_axis_mass(spec.marginal(j), np.array(side.lower), np.array(side.upper)))
    return total


def cell_masses(spec: DistributionSpec, partition: Partition) -> np.ndarray:
    """Vectorised :func:`cell_mass` over every cell of ``partition``."""
    if partition.d != spec.d:
        raise BadParams(f"partition dimension {partition.d} != distribution dimension {spec.d}")
    lows = np.array([c.lowers for c in partition.cells])
    highs = np.array([c.uppers for c in partition.cells])
    out = np.ones(partition.m)
    for j in range(spec.d):
        out *= _axis_mass(spec.marginal(j), lows[:, j], highs[:, j])
    return out


def discretized_divergence(partition: Partition, p: DistributionSpec, q: DistributionSpec, family) -> float:
    """``sum_i phi(P(I_i) / Q(I_i)) Q(I_i)`` with exact cell masses."""
    family = get_family(family)
    pm = cell_masses(p, partition)
    qm = cell_masses(q, partition)
    if np.any((qm == 0) & (pm > 0)):
        return math.inf
    live = qm > 0
    return float(np.sum(phi_eval(family, pm[live] / qm[live]) * qm[live]))


# ---------------------------------------------------------------- oracles


def closed_form_divergence(p: DistributionSpec, q: DistributionSpec, family) -> float:
    """Exact ``D_phi(P || Q)`` where a closed form is known.

    Supported: KL, squared Hellinger and chi-squared between diagonal
    Gaussians; all four built-ins between nested uniform boxes. Anything else
    raises :class:`Unavailable`.
    """
    family = get_family(family)
    if p.d != q.d:
        raise BadParams("dimension mismatch")
    if p == q:
        return 0.0
    name = family.name
    if p.kind == q.kind == "GaussianDiag":
        m1, s1 = np.array(p.loc), np.array(p.scale)
        m2, s2 = np.array(q.loc), np.array(q.scale)
        if name == "kl":
            return float(np.sum(np.log(s2 / s1) + (s1**2 + (m1 - m2) ** 2) / (2 * s2**2) - 0.5))
        if name == "hellinger":
            v = s1**2 + s2**2
            bc = np.prod(np.sqrt(2 * s1 * s2 / v) * np.exp(-((m1 - m2) ** 2) / (4 * v)))
            return float(2.0 * (1.0 - bc))
        if name == "chi2":
            v = 2 * s2**2 - s1**2
            if np.any(v <= 0):
                raise Unavailable("chi-squared divergence is infinite (2*s_q^2 <= s_p^2)")
            moment = np.prod(s2**2 / (s1 * np.sqrt(v)) * np.exp((m1 - m2) ** 2 / v))
            return float(moment - 1.0)
        raise Unavailable(f"no Gaussian closed form for {name}")
    if p.kind == q.kind == "Uniform":
        lp, hp = np.array(p.low), np.array(p.high)
        lq, hq = np.array(q.low), np.array(q.high)
        if np.any(lp < lq) or np.any(hp > hq):
            raise Unavailable("P is not absolutely continuous w.r.t. Q")
        frac = float(np.prod((hp - lp) / (hq - lq)))
        # dP/dQ is 1/frac on P's box and 0 on the rest of Q's box
        return float(phi_eval(family, 1.0 / frac)) * frac + family.phi_at_zero * (1.0 - frac)
    raise Unavailable(f"no closed form for {p.kind} vs {q.kind}")


def default_box(p: DistributionSpec, q: DistributionSpec, family=None) -> HyperRectangle:
    """Hull of both extents; for chi-squared between Gaussians also covers
    the (wider) Gaussian proportional to ``p**2 / q``."""
    chi2_gauss = (
        family is not None
        and get_family(family).name == "chi2"
        and p.kind == q.kind == "GaussianDiag"
    )
    bounds = []
    for j in range(p.d):
        a1, b1 = p.extent(j)
        a2, b2 = q.extent(j)
        lo, hi = min(a1, a2), max(b1, b2)
        if chi2_gauss:
            prec = 2.0 / p.scale[j] ** 2 - 1.0 / q.scale[j] ** 2
            if prec > 0:
                mid = (2.0 * p.loc[j] / p.scale[j] ** 2 - q.loc[j] / q.scale[j] ** 2) / prec
                w = BOX_SCALES * prec**-0.5
                lo, hi = min(lo, mid - w), max(hi, mid + w)
        bounds.append((lo, hi))
    return HyperRectangle.from_bounds(bounds)


def _axis_nodes(lo: float, hi: float, grid: int, breaks) -> tuple:
    """Midpoints and widths on ``[lo, hi]`` with every breakpoint a cell edge."""
    edges = sorted({lo, hi, *[b for b in breaks if lo < b < hi]})
    spans = np.diff(edges)
    counts = np.maximum(1, np.round(grid * spans / (hi - lo)).astype(int))
    mids, widths = [], []
    for a, b, c in zip(edges[:-1], edges[1:], counts):
        e = np.linspace(a, b, c + 1)
        mids.append(0.5 * (e[:-1] + e[1:]))
        widths.append(np.diff(e))
    return np.concatenate(mids), np.concatenate(widths)


def quadrature_divergence(
    p: DistributionSpec,
    q: DistributionSpec,
    family,
    box: Optional[HyperRectangle] = None,
    grid: Optional[int] = None,
    *,
    full_output: bool = False,
    chunk: int = 1 << 20,
):
    """Tensor-product midpoint rule for ``int phi(p/q) q`` over ``box``.

    Density discontinuities (uniform edges, the origin for one-sided laws)
    are placed on cell edges. With ``full_output`` a second value reports the
    ``P`` and ``Q`` mass lying outside the box (the truncated tail).
    """
    family = get_family(family)
    d = p.d
    if d > 3:
        raise BadParams("quadrature is limited to d <= 3")
    if grid is None:
        grid = {1: 4096, 2: 1024, 3: 128}[d]
    if grid < 64:
        raise BadParams("grid must be >= 64")
    box = default_box(p, q, family) if box is None else box
    if box.is_infinitely_large:
        raise BadParams("quadrature box must be bounded")

    axes = []
    for j, side in enumerate(box.sides):
        mids, widths = _axis_nodes(side.lower, side.upper, grid, p.breakpoints(j) + q.breakpoints(j))
        with np.errstate(divide="ignore"):
            lp = p.marginal(j).logpdf(mids)
            lq = q.marginal(j).logpdf(mids)
        axes.append((lp, lq, widths))

    total = 0.0
    # log densities add across axes; blocks over the first axis bound memory
    rest = axes[1:]
    rest_p = _outer_sum([a[0] for a in rest])
    rest_q = _outer_sum([a[1] for a in rest])
    rest_w = _outer_prod([a[2] for a in rest])
    p0, q0, w0 = axes[0]
    step = max(1, chunk // max(1, rest_w.size))
    for s in range(0, p0.size, step):
        lp = np.add.outer(p0[s : s + step], rest_p).reshape(-1)
        lq = np.add.outer(q0[s : s + step], rest_q).reshape(-1)
        ww = np.multiply.outer(w0[s : s + step], rest_w).reshape(-1)
        live = np.isfinite(lq)
        if np.any(~live & np.isfinite(lp)):
            raise ZeroDensity("q vanishes where p does not")
        lp, lq, ww = lp[live], lq[live], ww[live]
        ratio = np.exp(lp - lq)
        total += float(np.sum(phi_eval(family, ratio) * np.exp(lq) * ww))
    if not full_output:
        return total
    info = {
        "box": box.to_json(),
        "grid": grid,
        "tail_mass_p": 1.0 - cell_mass(p, box),
        "tail_mass_q": 1.0 - cell_mass(q, box),
    }
    return total, info


def _outer_sum(vectors):
    out = np.zeros(())
    for v in vectors:
        out = np.add.outer(out, v)
    return out


def _outer_prod(vectors):
    out = np.ones(())
    for v in vectors:
        out = np.multiply.outer(out, v)
    return out


def divergence_oracle(p: DistributionSpec, q: DistributionSpec, family) -> float:
    """Closed form when available, otherwise quadrature on the default box."""
    try:
        return closed_form_divergence(p, q, family)
    except Unavailable:
        return quadrature_divergence(p, q, family)

