"""Sample-size thresholds, cell-class bounds and the m-selection rule.

All constants are the explicit ones from the concentration argument:
``2 * 288**2`` and ``96`` in the partition-error threshold. The constants
that the m-selection rule leaves unspecified (``C`` and ``K3``) are caller
supplied and always echoed back in :class:`PlannerReport`.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from .errors import BadRange
from .geometry import HyperRectangle
from .phi import PhiFamily, get_family, inverse_k2, k_triple

C1_PARTITION = 2 * 288**2
C2_TAIL = 96.0


@dataclass(frozen=True)
class RegularityParams:
    """Tail and smoothness constants of the density pair.

    ``c``, ``alpha``: tail mass beyond radius ``r`` is below ``c / r**alpha``.
    ``L1``: Lipschitz constant of both densities. ``L2``: bound on ``p/q``.
    """

    c: float = 1.0
    alpha: float = 2.0
    L1: float = 1.0
    L2: float = 2.0

    def __post_init__(self):
        for name in ("c", "alpha", "L1", "L2"):
            if not getattr(self, name) > 0:
                raise BadRange(f"{name} must be positive")


@dataclass
class PlannerReport:
    m: int
    d: int
    eps: float
    delta: float
    n_star: float
    term_partition: float
    term_tail: float
    log_growth_at_n_star: float
    gamma1_bound: float
    gamma3_bound: Optional[float] = None
    radius: Optional[float] = None
    n_gamma2: Optional[float] = None
    m_required: Optional[float] = None
    eps1: Optional[float] = None
    constants_used: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return asdict(self)


def n_star(m: int, d: int, eps: float, delta: float):
    """Partition-error sample threshold; returns ``(n_star, term_partition, term_tail)``.

    Above ``n_star`` the worst-case L1 error of any partition from the
    splitter family exceeds ``eps`` with probability at most ``delta``.
    """
    if m < 2 or d < 1:
        raise BadRange("need m >= 2 and d >= 1")
    if not 0 < eps < 2:
        raise BadRange("eps must lie in (0, 2)")
    if not 0 < delta < 1:
        raise BadRange("delta must lie in (0, 1)")
    term_partition = C1_PARTITION * float(m) ** (d + 1.0 / d - 1.0) / eps**4
    term_tail = C2_TAIL * (math.log(1.0 / delta) + m * math.log(2.0) + math.log(4.0)) / eps**2
    return max(term_partition, term_tail), term_partition, term_tail


def log_growth_bound(n: int, m: int, d: int) -> float:
    """``m**((d-1)/2) * log binom(2n + m**(1/d), m**(1/d))``.

    Log of the bound on the number of distinct partitions the splitter
    family induces on ``2n`` points. Generalised binomial via log-gamma.
    """
    if n < 1 or m < 1 or d < 1:
        raise BadRange("n, m, d must be >= 1")
    r = float(m) ** (1.0 / d)
    top = 2.0 * n + r
    log_binom = math.lgamma(top + 1.0) - math.lgamma(r + 1.0) - math.lgamma(top - r + 1.0)
    return float(m) ** ((d - 1) / 2.0) * log_binom


def gamma_bounds(m: int, d: int, R: float):
    """Deterministic caps ``(|boundary cells|, |oversized interior cells|)``."""
    if m < 1 or not R > 0:
        raise BadRange("need m >= 1 and R > 0")
    g1 = 2.0 * d * float(m) ** ((d - 1) / d)
    g3 = 2.0 * d * R * float(m) ** ((2 * d * d + 2 * d - 1) / (2 * d * d + 2 * d))
    return g1, g3


def tail_radius(params: RegularityParams, eps2: float) -> float:
    if not eps2 > 0:
        raise BadRange("eps2 must be positive")
    return (2.0 * params.c / eps2) ** (1.0 / params.alpha)


def n_for_gamma2(eps: float, delta: float) -> float:
    if not eps > 0 or not 0 < delta <= 1:
        raise BadRange("need eps > 0 and delta in (0, 1]")
    return 2.0 * math.log(1.0 / delta) / eps**2


def m_exponents(alpha: float, d: int):
    """``(K exponent, eps exponent)`` of the m-selection rule."""
    s = 2 * d * d + 2 * d
    return (1.0 + alpha) / alpha * s, max(s / alpha, 2.0 * d)


def required_m(
    params: RegularityParams,
    family,
    eps: float,
    d: int,
    C_user: float = 1.0,
    K3_user: float = 1.0,
) -> float:
    """``C * K(eps / (5 K3), L2)**((1+a)/a * (2d^2+2d)) * eps**-max((2d^2+2d)/a, 2d)``."""
    family = get_family(family)
    if not eps > 0 or not C_user > 0 or not K3_user > 0:
        raise BadRange("eps, C and K3 must be positive")
    K = k_triple(family, eps / (5.0 * K3_user), params.L2).K
    k_exp, e_exp = m_exponents(params.alpha, d)
    return C_user * K**k_exp * eps ** (-e_exp)


def integration_eps1(family, eps: float) -> float:
    """Largest ``eps1`` with ``k2(eps1) <= eps / 10`` (capped at 1/e for KL)."""
    return inverse_k2(get_family(family), eps / 10.0)


def check_power_law(samples, params: RegularityParams, radii):
    """Empirical tail fraction beyond each radius versus ``c / r**alpha``.

    A radius passes when the fraction is below the bound plus three binomial
    standard deviations.
    """
    x = np.asarray(samples, dtype=float)
    if x.ndim == 1:
        x = x.reshape(-1, 1)
    norms = np.linalg.norm(x, axis=1)
    n = norms.shape[0]
    out = []
    for r in radii:
        if not r > 0:
            raise BadRange("radii must be positive")
        frac = float(np.count_nonzero(norms > r)) / n
        bound = params.c / r**params.alpha
        p = min(bound, 1.0)
        slack = 3.0 * math.sqrt(p * (1.0 - p) / n)
        out.append({"radius": float(r), "empirical": frac, "bound": bound, "passed": frac < bound + slack})
    return out


def _abs_dev_integral(a: float, b: float, x: float) -> float:
    # closed form of the integral of |y - x| over [a, b]
    if x <= a:
        return 0.5 * ((b - x) ** 2 - (a - x) ** 2)
    if x >= b:
        return 0.5 * ((x - a) ** 2 - (x - b) ** 2)
    return 0.5 * ((x - a) ** 2 + (b - x) ** 2)


def integral_edge_bound(box: HyperRectangle, x):
    """``(lhs, rhs)`` with lhs the integral over the box of ``sum_j |y_j - x_j|``
    and ``rhs = d/2 * l(box) * v(box)``."""
    if not box.is_bounded:
        raise BadRange("box must be bounded")
    x = np.asarray(x, dtype=float).reshape(-1)
    lens = [s.length for s in box.sides]
    vol = math.prod(lens)
    lhs = 0.0
    for j, side in enumerate(box.sides):
        others = vol / lens[j] if lens[j] > 0 else math.prod(lens[:j] + lens[j + 1 :])
        lhs += _abs_dev_integral(side.lower, side.upper, float(x[j])) * others
    rhs = 0.5 * box.d * max(lens) * vol
    return lhs, rhs


def chernoff_tail(n: int, mu: float, threshold: float) -> float:
    """``exp(-2 (threshold - mu)**2 / n)``, the bound on ``P{X >= threshold}``."""
    if n < 1 or not 0 <= mu <= n or threshold < mu:
        raise BadRange("need n >= 1, 0 <= mu <= n and threshold >= mu")
    return math.exp(-2.0 * (threshold - mu) ** 2 / n)


def plan(
    m: int,
    d: int,
    eps: float,
    delta: float,
    *,
    family: Optional[PhiFamily | str] = None,
    params: Optional[RegularityParams] = None,
    C_user: float = 1.0,
    K3_user: float = 1.0,
) -> PlannerReport:
    ns, tp, tt = n_star(m, d, eps, delta)
    g1, _ = gamma_bounds(m, d, 1.0)
    report = PlannerReport(
        m=int(m),
        d=int(d),
        eps=eps,
        delta=delta,
        n_star=ns,
        term_partition=tp,
        term_tail=tt,
        log_growth_at_n_star=log_growth_bound(math.ceil(ns), m, d),
        gamma1_bound=g1,
        constants_used={"c1": C1_PARTITION, "c2": C2_TAIL},
    )
    if params is not None:
        report.radius = tail_radius(params, eps)
        report.gamma3_bound = gamma_bounds(m, d, report.radius)[1]
        report.n_gamma2 = n_for_gamma2(eps, delta)
        report.constants_used.update(asdict(params))
    if family is not None and params is not None:
        fam = get_family(family)
        report.m_required = required_m(params, fam, eps, d, C_user, K3_user)
        report.eps1 = integration_eps1(fam, eps)
        report.constants_used.update({"C": C_user, "K3": K3_user, "family": fam.name})
    return report
