"""Divergence generators and their epsilon-regularisation bounds.

A generator ``phi`` on ``[0, inf)`` comes with three bounding maps

* ``k0(L)``      >= max over ``[0, L]`` of ``|phi|``
* ``k1(eps, L)`` >= max over ``[eps, L]`` of ``|phi'|``
* ``k2(eps)``    >= oscillation of ``phi`` on ``[0, eps]``

and ``K(eps, L) = max(k0, k1, k2)``. The four built-ins are KL, squared
Hellinger, total variation and chi-squared.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple, Optional

import numpy as np

from .errors import BadRange, NegativeRatio, NoSolution, RegularizationViolation

_INV_E = math.exp(-1.0)


@dataclass(frozen=True)
class PhiFamily:
    name: str
    phi: Callable[[np.ndarray], np.ndarray]
    phi_at_zero: float
    k0: Callable[[float], float]
    k1: Callable[[float, float], float]
    k2: Callable[[float], float]
    dphi: Optional[Callable[[np.ndarray], np.ndarray]] = None
    convex: bool = True
    # largest eps for which k2 is a valid, increasing bound
    eps_max: float = math.inf

    @property
    def phi_of_one(self) -> float:
        return float(self.phi(np.array([1.0]))[0])

    def __call__(self, t):
        return phi_eval(self, t)

    @classmethod
    def custom(
        cls,
        name: str,
        phi,
        k0,
        k1,
        k2,
        *,
        phi_at_zero: float | None = None,
        dphi=None,
        convex: bool = True,
        eps_max: float = math.inf,
        check_eps=(1e-3, 1e-2, 0.1, 0.3),
        check_L=(0.5, 1.0, 2.0, 5.0),
        grid: int = 2000,
    ) -> "PhiFamily":
        """Register a user generator after grid spot-checks of its k-maps.

        ``phi`` must accept numpy arrays. Without ``dphi`` the derivative is
        taken by central differences. Violations raise
        :class:`RegularizationViolation`.
        """
        if phi_at_zero is None:
            phi_at_zero = float(phi(np.array([1e-300]))[0])
        fam = cls(name, phi, float(phi_at_zero), k0, k1, k2, dphi, convex, eps_max)
        problems = check_regularization(fam, check_eps, check_L, grid)
        if problems:
            raise RegularizationViolation(f"{name}: " + "; ".join(problems[:5]))
        return fam


class KTriple(NamedTuple):
    K0: float
    K1: float
    K2: float
    K: float


def phi_eval(family: PhiFamily, t):
    """Evaluate ``phi`` elementwise, using the continuous extension at 0."""
    arr = np.asarray(t, dtype=float)
    if np.any(arr < 0) or np.any(np.isnan(arr)):
        raise NegativeRatio("phi is defined on [0, inf) only")
    flat = arr.reshape(-1)
    out = np.empty_like(flat)
    zero = flat == 0
    out[zero] = family.phi_at_zero
    if np.any(~zero):
        out[~zero] = family.phi(flat[~zero])
    out = out.reshape(arr.shape)
    return float(out) if out.ndim == 0 else out


def k_triple(family: PhiFamily, eps: float, L: float) -> KTriple:
    if not 0 < eps < L:
        raise BadRange(f"need 0 < eps < L, got eps={eps}, L={L}")
    k0, k1, k2 = float(family.k0(L)), float(family.k1(eps, L)), float(family.k2(eps))
    return KTriple(k0, k1, k2, max(k0, k1, k2))


def inverse_k2(family: PhiFamily, target: float, rtol: float = 1e-12) -> float:
    """Largest ``eps`` with ``k2(eps) <= target``, by bisection.

    The search is capped at ``family.eps_max`` (``1/e`` for KL, where
    ``2|eps log eps|`` stops being monotone).
    """
    if not target > 0:
        raise NoSolution("target must be positive")
    k2 = family.k2
    hi = min(1.0, family.eps_max)
    while k2(hi) <= target:
        if hi >= family.eps_max:
            return float(family.eps_max)
        hi = min(2.0 * hi, family.eps_max)
        if hi > 1e300:
            return hi
    lo = hi / 2.0
    while k2(lo) > target:
        hi = lo
        lo /= 2.0
        if lo < 1e-300:
            raise NoSolution(f"k2(eps) > {target} for every representable eps")
    # invariant: k2(lo) <= target < k2(hi)
    while hi - lo > rtol * lo:
        mid = 0.5 * (lo + hi)
        if k2(mid) <= target:
            lo = mid
        else:
            hi = mid
    return lo


def k12(family: PhiFamily, eps: float, L: float) -> float:
    """``k1(inverse_k2(eps), L)``, the composite constant of the sample-size rule."""
    return float(family.k1(inverse_k2(family, eps), L))


# ---------------------------------------------------------------- built-ins


def _xlogx(t):
    t = np.asarray(t, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(t > 0, t * np.log(np.where(t > 0, t, 1.0)), 0.0)


def _kl_k0(L: float) -> float:
    # sup of |s log s| on [0, L]; the tabulated |L log L| alone misses the
    # interior maximum 1/e at s = 1/e whenever 1/e < L < ~1.763
    if L <= _INV_E:
        return abs(L * math.log(L))
    return max(_INV_E, L * math.log(L))


def _kl_k0_tabulated(L: float) -> float:
    return abs(L * math.log(L))


KL = PhiFamily(
    name="kl",
    phi=_xlogx,
    phi_at_zero=0.0,
    k0=_kl_k0,
    k1=lambda eps, L: max(abs(math.log(eps)), abs(math.log(L))) + 1.0,
    k2=lambda eps: 2.0 * abs(eps * math.log(eps)),
    dphi=lambda t: np.log(t) + 1.0,
    eps_max=_INV_E,
)

HELLINGER = PhiFamily(
    name="hellinger",
    phi=lambda t: (np.sqrt(t) - 1.0) ** 2,
    phi_at_zero=1.0,
    k0=lambda L: max(1.0, (math.sqrt(L) - 1.0) ** 2),
    k1=lambda eps, L: max(abs(1.0 - 1.0 / math.sqrt(eps)), abs(1.0 - 1.0 / math.sqrt(L))),
    k2=lambda eps: 2.0 * math.sqrt(eps),
    dphi=lambda t: 1.0 - 1.0 / np.sqrt(t),
)

TOTAL_VARIATION = PhiFamily(
    name="tv",
    phi=lambda t: 0.5 * np.abs(t - 1.0),
    phi_at_zero=0.5,
    k0=lambda L: max(0.5, 0.5 * abs(L - 1.0)),
    k1=lambda eps, L: 0.5,
    k2=lambda eps: 0.5 * eps,
    dphi=lambda t: 0.5 * np.sign(t - 1.0),
)

CHI_SQUARED = PhiFamily(
    name="chi2",
    phi=lambda t: (t - 1.0) ** 2,
    phi_at_zero=1.0,
    k0=lambda L: max(1.0, (L - 1.0) ** 2),
    k1=lambda eps, L: max(2.0, 2.0 * abs(L - 1.0)),
    k2=lambda eps: 2.0 * eps,
    dphi=lambda t: 2.0 * (t - 1.0),
)

FAMILIES = {f.name: f for f in (KL, HELLINGER, TOTAL_VARIATION, CHI_SQUARED)}
_ALIASES = {
    "kullback-leibler": "kl",
    "total_variation": "tv",
    "totalvariation": "tv",
    "chisquared": "chi2",
    "chi-squared": "chi2",
    "chi_squared": "chi2",
}


def get_family(name) -> PhiFamily:
    if isinstance(name, PhiFamily):
        return name
    key = str(name).lower()
    key = _ALIASES.get(key, key)
    try:
        return FAMILIES[key]
    except KeyError:
        raise BadRange(f"unknown phi family {name!r}; choose from {sorted(FAMILIES)}") from None


def _derivative(family: PhiFamily, s: np.ndarray) -> np.ndarray:
    if family.dphi is not None:
        return np.asarray(family.dphi(s), dtype=float)
    h = 1e-6 * np.maximum(s, 1e-3)
    lo = np.maximum(s - h, 0.0)
    return (phi_eval(family, s + h) - phi_eval(family, lo)) / (s + h - lo)


def check_regularization(family: PhiFamily, eps_values, L_values, grid: int = 10_000, rtol: float = 1e-9):
    """Grid spot-check of the three bounding inequalities; returns violations."""
    problems = []
    for L in L_values:
        s = np.linspace(0.0, L, grid)
        worst = float(np.max(np.abs(phi_eval(family, s))))
        if worst > family.k0(L) * (1 + rtol) + rtol:
            problems.append(f"k0({L})={family.k0(L):.6g} < max|phi|={worst:.6g}")
    for eps in eps_values:
        if eps > family.eps_max:
            continue
        s = np.linspace(0.0, eps, grid)
        vals = phi_eval(family, s)
        osc = float(vals.max() - vals.min())
        if osc > family.k2(eps) * (1 + rtol) + rtol:
            problems.append(f"k2({eps})={family.k2(eps):.6g} < oscillation={osc:.6g}")
        for L in L_values:
            if not eps < L:
                continue
            s = np.linspace(eps, L, grid)
            worst = float(np.max(np.abs(_derivative(family, s))))
            if worst > family.k1(eps, L) * (1 + rtol) + rtol:
                problems.append(f"k1({eps},{L})={family.k1(eps, L):.6g} < max|phi'|={worst:.6g}")
    return problems
