"""Dirac-Coulomb bound states of a point nucleus.

Energies are dimensionless (units of m0 c^2) unless a name says ``_au``
(Hartree).  Radial functions are in atomic units and use the spinor layout
``psi = (i g Omega_{kappa,mj}, -f Omega_{-kappa,mj})``, which for the
equations below is

    g' = -(1 + kappa) g / r + (E + c^2 - V) f / c
    f' = -(1 - kappa) f / r - (E - c^2 - V) g / c

with ``V = -Z / r`` and ``c = 1 / alpha``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.special import eval_genlaguerre, gammaln

from .core_model import ALPHA, DomainError
from .numerics import gauss_laguerre, laguerre_scaled


def kappa_of(l: int, s_sign: int) -> int:
    """Relativistic quantum number for ``j = l + s_sign / 2``."""
    if s_sign not in (1, -1):
        raise DomainError(f"s_sign must be +1 or -1, got {s_sign!r}")
    if s_sign == 1:
        return -(l + 1)
    if l == 0:
        raise DomainError("j = l - 1/2 does not exist for l = 0")
    return l


def l_of(kappa: int) -> int:
    return kappa if kappa > 0 else -kappa - 1


def _check_level(n: int, kappa: int, Z: int) -> None:
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    if kappa == 0:
        raise DomainError("kappa must be nonzero")
    k = abs(kappa)
    if k > n:
        raise DomainError(f"|kappa| must not exceed n, got n={n}, kappa={kappa}")
    if kappa == n:
        raise DomainError(f"kappa = +n is not a bound level (n={n})")
    if Z < 0:
        raise DomainError(f"Z must be non-negative, got {Z}")
    if (Z * ALPHA) ** 2 >= k * k or Z * ALPHA >= 1.0:
        raise DomainError(f"supercritical charge: Z*alpha={Z * ALPHA:.6g} for |kappa|={k}")


def exact_energy(n: int, kappa: int, Z: float) -> float:
    """Total energy in units of m0 c^2 (Sommerfeld formula, x = Z alpha)."""
    _check_level(n, kappa, Z)
    k = abs(kappa)
    x = Z * ALPHA
    denom = n - k + math.sqrt(k * k - x * x)
    return 1.0 / math.sqrt(1.0 + (x / denom) ** 2)


def exact_binding_energy(n: int, kappa: int, Z: float) -> float:
    """``E - 1`` in units of m0 c^2, free of the cancellation in ``E - 1``.

    At small ``Z`` the binding part sits eight or more digits below the rest
    energy, so it is formed directly from ``q = (x / denom)^2``.
    """
    _check_level(n, kappa, Z)
    k = abs(kappa)
    x = Z * ALPHA
    q = (x / (n - k + math.sqrt(k * k - x * x))) ** 2
    root = math.sqrt(1.0 + q)
    return -q / (root * (1.0 + root))


def fine_structure_energy(n: int, l: int, s_sign: int, Z: float) -> float:
    """Lowest-order spin-orbit energy in Hartree, n-only constant dropped."""
    if not 0 <= l <= n - 1:
        raise DomainError(f"l must satisfy 0 <= l <= n-1, got n={n}, l={l}")
    kappa_of(l, s_sign)
    k = l + 0.5 * s_sign + 0.5
    return -0.5 * Z**4 * ALPHA**2 / (n**3 * k)


@dataclass(frozen=True)
class DiracLevel:
    n: int
    kappa: int
    Z: int
    energy_exact: float
    energy_fs: float
    binding: float = 0.0

    @property
    def k(self) -> int:
        return abs(self.kappa)

    @property
    def l(self) -> int:
        return l_of(self.kappa)

    @property
    def j2(self) -> int:
        """Twice the total angular momentum."""
        return 2 * self.k - 1

    @property
    def s_sign(self) -> int:
        return 1 if self.kappa < 0 else -1

    @property
    def binding_exact_au(self) -> float:
        """Exact energy minus rest energy, in Hartree."""
        return self.binding / ALPHA**2


def dirac_level(n: int, kappa: int, Z: int) -> DiracLevel:
    e = exact_energy(n, kappa, Z)
    l = l_of(kappa)
    s_sign = 1 if kappa < 0 else -1
    return DiracLevel(
        n, kappa, Z, e, fine_structure_energy(n, l, s_sign, Z), exact_binding_energy(n, kappa, Z)
    )


@dataclass(frozen=True)
class ExpansionBudget:
    delta4: float
    delta6: float
    ratio64: float
    derivative_correction: float


def expansion_budget(n: int, k: float, Z: float) -> ExpansionBudget:
    """Size of the x^6 term of the energy series relative to the x^4 term.

    ``delta4`` is the k-dependent x^4 term, ``delta6`` the full x^6 term (both
    in m0 c^2).  ``derivative_correction`` is the relative x^6 correction to
    ``d E / d k``, derived from the same series.
    """
    if not 1 <= k <= n:
        raise DomainError(f"k must satisfy 1 <= k <= n, got n={n}, k={k}")
    x = Z * ALPHA
    if x >= 1.0:
        raise DomainError(f"Z*alpha must be < 1, got {x}")
    x2 = x * x
    delta4 = -(x2 * x2) / (4 * n**3) * (2.0 / k)
    delta6 = -(x2**3) / (4 * n**3) * (
        1 / (2 * k**3) + 3 / (2 * n * k**2) - 3 / (n**2 * k) + 5 / (4 * n**3)
    )
    deriv = 1.5 * x2 * (1 / (2 * k**2) + 1 / (n * k) - 1 / n**2)
    return ExpansionBudget(delta4, delta6, delta6 / delta4, deriv)


def energy_series(n: int, k: float, Z: float) -> float:
    """Energy (m0 c^2) through order x^6."""
    x2 = (Z * ALPHA) ** 2
    b = expansion_budget(n, k, Z)
    return 1.0 - x2 / (2 * n * n) + b.delta4 + 3 * x2 * x2 / (8 * n**4) + b.delta6


@dataclass(frozen=True, eq=False)
class RadialPair:
    """Normalized large (``g``) and small (``f``) radial functions.

    Both are stored as ``C * rho^(gamma-1) * exp(-rho/2) * P(rho)`` with
    ``rho = 2 lam r`` and ``P`` a polynomial of degree ``n' = n - |kappa|``
    evaluated through the scaled Laguerre recurrence.
    """

    level: DiracLevel
    gamma: float
    apparent_n: float
    lam: float
    log_norm_g: float
    log_norm_f: float
    sign: float
    _q_coeffs: tuple[float, float, float] = field(repr=False)
    quadrature_nodes: tuple[np.ndarray, np.ndarray] = field(repr=False)

    @property
    def n_radial(self) -> int:
        return self.level.n - self.level.k

    def poly(self, rho) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Mantissas of ``P_g`` and ``P_f`` with their shared log-scale."""
        nr = self.n_radial
        c1, c2, nk = self._q_coeffs
        top, prev, log_scale = laguerre_scaled(nr, 2.0 * self.gamma, rho)
        q1 = -nr * c1 * prev
        q2 = nk * c2 * top
        return self.sign * (q1 + q2), self.sign * (q1 - q2), log_scale

    def log_envelope(self, rho) -> np.ndarray:
        rho = np.asarray(rho, dtype=float)
        return (self.gamma - 1.0) * np.log(rho) - 0.5 * rho

    def gf(self, r) -> tuple[np.ndarray, np.ndarray]:
        """``(g(r), f(r))`` for ``r > 0``."""
        r = np.asarray(r, dtype=float)
        rho = 2.0 * self.lam * r
        pg, pf, log_scale = self.poly(rho)
        base = self.log_envelope(rho) + log_scale
        return pg * np.exp(base + self.log_norm_g), pf * np.exp(base + self.log_norm_f)

    def g(self, r) -> np.ndarray:
        return self.gf(r)[0]

    def f(self, r) -> np.ndarray:
        return self.gf(r)[1]


def default_order(n: int) -> int:
    return max(4 * n, 16)


@lru_cache(maxsize=4096)
def radial_pair(n: int, kappa: int, Z: int, order: int | None = None) -> RadialPair:
    """Build the normalized radial functions of one level."""
    level = dirac_level(n, kappa, Z)
    k = level.k
    x = Z * ALPHA
    gamma = math.sqrt(k * k - x * x)
    nr = n - k
    apparent_n = math.sqrt(nr * nr + 2 * nr * gamma + k * k)
    lam = Z / apparent_n
    e = level.energy_exact
    one_minus_e = -level.binding
    two_g = 2.0 * gamma
    c1 = math.exp(gammaln(nr) + gammaln(two_g + 1) - gammaln(nr + two_g)) if nr > 0 else 0.0
    c2 = math.exp(gammaln(nr + 1) + gammaln(two_g + 1) - gammaln(nr + two_g + 1))
    nk = apparent_n - kappa
    # keep the large component's asymptotic sign equal to (-1)^(n-l-1)
    sign = 1.0 if kappa < 0 else -1.0

    order = order or default_order(n)
    nodes = gauss_laguerre(order, two_g)
    x_nodes, log_w = nodes
    probe = RadialPair(level, gamma, apparent_n, lam, 0.0, 0.0, sign, (c1, c2, nk), nodes)
    pg, pf, log_scale = probe.poly(x_nodes)
    # int (g^2 + f^2) r^2 dr with rho = x_nodes and dr = drho / (2 lam)
    log_common = log_w + 2.0 * log_scale - 3.0 * math.log(2.0 * lam)
    total = math.fsum(np.exp(log_common) * ((1.0 + e) * pg**2 + one_minus_e * pf**2))
    log_norm = -0.5 * math.log(total)
    log_norm_g = log_norm + 0.5 * math.log(1.0 + e)
    log_norm_f = log_norm + 0.5 * math.log(one_minus_e) if one_minus_e > 0.0 else -math.inf
    return RadialPair(level, gamma, apparent_n, lam, log_norm_g, log_norm_f, sign, (c1, c2, nk), nodes)


def nonrel_radial(n: int, l: int, Z: float):
    """Schrodinger-Coulomb radial function ``R_nl(r)`` (positive near r = 0)."""
    if not 0 <= l <= n - 1:
        raise DomainError(f"l must satisfy 0 <= l <= n-1, got n={n}, l={l}")
    log_c = 1.5 * math.log(2.0 * Z / n) + 0.5 * (
        gammaln(n - l) - math.log(2.0 * n) - gammaln(n + l + 1)
    )

    def radial(r):
        rho = 2.0 * Z * np.asarray(r, dtype=float) / n
        return np.exp(log_c - 0.5 * rho) * rho**l * eval_genlaguerre(n - l - 1, 2 * l + 1, rho)

    return radial
