"""Radial overlap integrals entering the spin expectation values.

For one orbital quantum number ``l`` the set holds

    Gp  = int (g+_l)^2 r^2 dr          Fp  = int (f+_l)^2 r^2 dr
    Gm  = int (g-_l)^2 r^2 dr          Fm  = int (f-_l)^2 r^2 dr
    Gpm = int g+_l g-_l r^2 dr
    Fpm = int f+_{l+2} f-_l r^2 dr     Fmp = int f+_{l-2} f-_l r^2 dr
    Fmp_prime = int f+_l f-_{l+2} r^2 dr

where ``+``/``-`` label ``j = l +/- 1/2``.  Integrals that involve a level
which does not exist (``l = 0`` has no ``-`` branch, ``l - 2 < 0``,
``l + 2 > n - 1``) are zero.

Every integrand is ``r^(gamma_a + gamma_b) exp(-(lam_a + lam_b) r)`` times a
polynomial, so a generalized Gauss-Laguerre rule matched to that weight is
exact once it has more nodes than half the polynomial degree.  Each value is
confirmed by re-evaluating with twice the nodes.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from functools import lru_cache

import numpy as np

from .core_model import format_real
from .dirac_coulomb import RadialPair, default_order, radial_pair
from .numerics import gauss_laguerre

DOUBLING_TOL = 1e-9

FIELDS = ("Gp", "Gm", "Fp", "Fm", "Gpm", "Fpm", "Fmp", "Fmp_prime")


class QuadratureError(RuntimeError):
    """Node doubling moved an integral by more than the tolerance."""


@dataclass(frozen=True)
class RadialIntegralSet:
    l: int
    Gp: float
    Gm: float
    Fp: float
    Fm: float
    Gpm: float
    Fpm: float
    Fmp: float
    Fmp_prime: float
    err_estimate: float = 0.0

    def as_row(self) -> list[str]:
        d = asdict(self)
        return [str(self.l)] + [format_real(d[k]) for k in FIELDS] + [format_real(self.err_estimate)]


def overlap(pa: RadialPair, pb: RadialPair, comp_a: str, comp_b: str, order: int) -> float:
    """``int u_a(r) u_b(r) r^2 dr`` for components ``'g'`` or ``'f'``."""
    alpha = pa.gamma + pb.gamma
    lam_sum = pa.lam + pb.lam
    x, log_w = gauss_laguerre(order, alpha)
    r = x / lam_sum
    parts = []
    log_const = -(alpha + 1.0) * math.log(lam_sum)
    for p, comp in ((pa, comp_a), (pb, comp_b)):
        pg, pf, log_scale = p.poly(2.0 * p.lam * r)
        norm = p.log_norm_g if comp == "g" else p.log_norm_f
        if norm == -math.inf:
            return 0.0
        log_const += norm + (p.gamma - 1.0) * math.log(2.0 * p.lam)
        parts.append((pg if comp == "g" else pf, log_scale))
    (ma, sa), (mb, sb) = parts
    terms = ma * mb * np.exp(log_w + sa + sb + log_const)
    return math.fsum(terms)


def _pair(n: int, kappa: int, Z: int, order: int) -> RadialPair:
    return radial_pair(n, kappa, Z, order)


def _integrals(n: int, l: int, Z: int, order: int) -> dict[str, float]:
    plus = _pair(n, -(l + 1), Z, order)
    minus = _pair(n, l, Z, order) if l >= 1 else None
    out = dict.fromkeys(FIELDS, 0.0)
    out["Gp"] = overlap(plus, plus, "g", "g", order)
    out["Fp"] = overlap(plus, plus, "f", "f", order)
    if minus is not None:
        out["Gm"] = overlap(minus, minus, "g", "g", order)
        out["Fm"] = overlap(minus, minus, "f", "f", order)
        out["Gpm"] = overlap(plus, minus, "g", "g", order)
        if l + 2 <= n - 1:
            out["Fpm"] = overlap(_pair(n, -(l + 3), Z, order), minus, "f", "f", order)
        if l >= 2:
            out["Fmp"] = overlap(_pair(n, -(l - 1), Z, order), minus, "f", "f", order)
    if l + 2 <= n - 1:
        out["Fmp_prime"] = overlap(plus, _pair(n, l + 2, Z, order), "f", "f", order)
    return out


@lru_cache(maxsize=None)
def compute_integral_set(n: int, l: int, Z: int, order: int | None = None) -> RadialIntegralSet:
    """All eight integrals for one ``l``, verified by node doubling.

    Raises
    ------
    QuadratureError
        If doubling the node count changes any integral by more than 1e-9.
    """
    if not 0 <= l <= n - 1:
        raise ValueError(f"l must satisfy 0 <= l <= n-1, got n={n}, l={l}")
    order = order or default_order(n)
    base = _integrals(n, l, Z, order)
    check = _integrals(n, l, Z, 2 * order)
    err = max(abs(base[k] - check[k]) for k in FIELDS)
    if err > DOUBLING_TOL:
        raise QuadratureError(
            f"radial integrals for n={n}, l={l}, Z={Z} moved by {err:.3g} under node doubling"
        )
    return RadialIntegralSet(l=l, err_estimate=err, **base)


def integral_table(n: int, Z: int, order: int | None = None) -> list[RadialIntegralSet]:
    return [compute_integral_set(n, l, Z, order) for l in range(n)]


@dataclass(frozen=True)
class SelfTestReport:
    n: int
    Z: int
    max_norm_deviation: float
    max_doubling_change: float
    max_F: float
    max_G_deviation: float


def quadrature_selftest(n: int, Z: int, order: int | None = None) -> SelfTestReport:
    """Normalization and node-doubling diagnostics over every ``l``."""
    norm_dev = 0.0
    doubling = 0.0
    max_f = 0.0
    g_dev = 0.0
    for s in integral_table(n, Z, order):
        norm_dev = max(norm_dev, abs(s.Gp + s.Fp - 1.0))
        if s.l >= 1:
            norm_dev = max(norm_dev, abs(s.Gm + s.Fm - 1.0))
            g_dev = max(g_dev, abs(s.Gm - 1.0), abs(s.Gpm - 1.0))
        g_dev = max(g_dev, abs(s.Gp - 1.0))
        doubling = max(doubling, s.err_estimate)
        max_f = max(max_f, abs(s.Fp), abs(s.Fm), abs(s.Fpm), abs(s.Fmp), abs(s.Fmp_prime))
    return SelfTestReport(n, Z, norm_dev, doubling, max_f, g_dev)
