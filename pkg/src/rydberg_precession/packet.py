"""Four-component relativistic elliptic packet and its observables.

The packet is the non-relativistic product state ``|n gamma> (a, b)``
recoupled to ``|n, l, j, m_j>`` and promoted to Dirac eigenstates.  Each
level ``(l, +)`` (``j = l + 1/2``) or ``(l, -)`` (``j = l - 1/2``) contributes
to the four spinor components ``c1..c4``; ``c1, c2`` carry the large radial
function on orbital ``l`` and ``c3, c4`` the small one on ``l + 1`` or
``l - 1``.  Those angular coefficients are computed once; every observable is
then a bilinear form in the per-level phases ``exp(-i E t)``.

Energies are binding energies (rest mass removed), in Hartree.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.special import gammaln

from .core_model import EllipticSpec, WeightTable, weight_table_for
from .dirac_coulomb import DiracLevel, RadialPair, dirac_level, kappa_of, radial_pair
from .numerics import compensated_sum
from .radial_integrals import RadialIntegralSet, compute_integral_set
from .timescales import precession_time


class EnergyMode(str, enum.Enum):
    EXACT = "exact"
    LOWEST_ORDER = "lowest_order"


class DegenerateMomentError(ValueError):
    """The density has no preferred axis (near-circular packet)."""


@dataclass(frozen=True)
class FrequencyTable:
    """Spin-orbit beat frequencies in Hartree, indexed by ``l``; NaN if undefined.

    ``omega[l] = E+_l - E-_l``, ``omega_prime[l] = E-_{l+2} - E+_l``,
    ``omega_dprime[l] = E-_l - E+_{l-2}``.
    """

    omega: np.ndarray
    omega_prime: np.ndarray
    omega_dprime: np.ndarray


@dataclass(frozen=True)
class AutocorrSeries:
    times: np.ndarray
    values: np.ndarray

    @property
    def modulus(self) -> np.ndarray:
        return np.abs(self.values)


@dataclass(frozen=True)
class SpinSeries:
    times: np.ndarray
    sigma: np.ndarray  # shape (len(times), 3)

    @property
    def norm(self) -> np.ndarray:
        return np.linalg.norm(self.sigma, axis=1)


@dataclass(frozen=True)
class DensityGrid:
    half_extent: float
    resolution: tuple[int, int]
    x: np.ndarray
    y: np.ndarray
    rho_large: np.ndarray  # indexed [iy, ix]
    rho_small: np.ndarray

    @property
    def rho_total(self) -> np.ndarray:
        return self.rho_large + self.rho_small


@dataclass(frozen=True, eq=False)
class PacketState:
    """Everything needed to evolve one packet.

    Levels are ordered ``(0,+), (1,+), ..., (n-1,+), (1,-), ..., (n-1,-)``.
    """

    spec: EllipticSpec
    weights: WeightTable
    energy_mode: EnergyMode
    level_list: tuple[DiracLevel, ...]
    energies: np.ndarray = field(repr=False)
    populations: np.ndarray = field(repr=False)
    # coefficients[i] has shape (n_levels, 2n+1): component c_{i+1} per m index
    coefficients: tuple[np.ndarray, ...] = field(repr=False)
    orbitals: np.ndarray = field(repr=False)  # (n_levels, 2): large and small orbital l
    Tp_au: float = 0.0

    @property
    def n_levels(self) -> int:
        return len(self.level_list)

    def index(self, l: int, s_sign: int) -> int:
        n = self.spec.n
        if s_sign == 1:
            return l
        if l < 1:
            raise KeyError((l, s_sign))
        return n + l - 1

    @property
    def levels(self) -> dict[tuple[int, int], DiracLevel]:
        return {(lv.l, lv.s_sign): lv for lv in self.level_list}

    @cached_property
    def integrals(self) -> dict[int, RadialIntegralSet]:
        n, Z = self.spec.n, self.spec.Z
        return {l: compute_integral_set(n, l, Z) for l in range(n)}

    @cached_property
    def radial(self) -> tuple[RadialPair, ...]:
        n, Z = self.spec.n, self.spec.Z
        return tuple(radial_pair(n, lv.kappa, Z) for lv in self.level_list)

    @cached_property
    def frequencies(self) -> FrequencyTable:
        n = self.spec.n
        e_plus = np.array([self.energies[self.index(l, 1)] for l in range(n)])
        e_minus = np.full(n, np.nan)
        for l in range(1, n):
            e_minus[l] = self.energies[self.index(l, -1)]
        omega = e_plus - e_minus
        omega_prime = np.full(n, np.nan)
        omega_dprime = np.full(n, np.nan)
        omega_prime[: n - 2] = e_minus[2:] - e_plus[: n - 2]
        omega_dprime[2:] = e_minus[2:] - e_plus[: n - 2]
        return FrequencyTable(omega, omega_prime, omega_dprime)

    @cached_property
    def _overlaps(self) -> tuple[np.ndarray, np.ndarray]:
        """Radial overlap matrices (large, small) between levels."""
        n = self.spec.n
        L = self.n_levels
        big = np.zeros((L, L))
        small = np.zeros((L, L))
        for l, s in self.integrals.items():
            p = self.index(l, 1)
            big[p, p] = s.Gp
            small[p, p] = s.Fp
            if l >= 1:
                q = self.index(l, -1)
                big[q, q] = s.Gm
                small[q, q] = s.Fm
                big[p, q] = big[q, p] = s.Gpm
            if l + 2 <= n - 1:
                q = self.index(l + 2, -1)
                small[p, q] = small[q, p] = s.Fmp_prime
        return big, small

    @cached_property
    def _spin_kernels(self) -> tuple[np.ndarray, np.ndarray]:
        """Level-pair amplitudes for sigma_z and for sigma_+ = sigma_x + i sigma_y."""
        big, small = self._overlaps
        c1, c2, c3, c4 = self.coefficients
        same_big = self.orbitals[:, 0][:, None] == self.orbitals[:, 0][None, :]
        same_small = self.orbitals[:, 1][:, None] == self.orbitals[:, 1][None, :]
        rl = np.where(same_big, big, 0.0)
        rs = np.where(same_small, small, 0.0)
        kz = (c1.conj() @ c1.T - c2.conj() @ c2.T) * rl + (c3.conj() @ c3.T - c4.conj() @ c4.T) * rs
        kp = (c1.conj() @ c2.T) * rl + (c3.conj() @ c4.T) * rs
        return kz, kp

    def phases(self, t_au: np.ndarray) -> np.ndarray:
        return np.exp(-1j * np.outer(t_au, self.energies))

    def to_au(self, times, unit: str = "tp") -> np.ndarray:
        times = np.asarray(times, dtype=float)
        if unit == "tp":
            return times * self.Tp_au
        if unit == "au":
            return times
        raise ValueError(f"unit must be 'tp' or 'au', got {unit!r}")


def _level_coefficients(l: int, s_sign: int, m: np.ndarray, w: np.ndarray, a, b, n: int):
    """Angular coefficients of c1..c4 for one level, as arrays over m+n."""
    out = [np.zeros(2 * n + 1, dtype=complex) for _ in range(4)]
    d = 2 * l + 1
    idx = m + n

    def put(i, shift, values):
        np.add.at(out[i], idx + shift, values)

    if s_sign == 1:
        dp = d * (2 * l + 3)
        put(0, 0, a * (l + 1 + m) / d * w)
        put(0, -1, b * np.sqrt((l + 1 - m) * (l + m)) / d * w)
        put(1, 0, b * (l + 1 - m) / d * w)
        put(1, 1, a * np.sqrt((l + 1 + m) * (l - m)) / d * w)
        put(2, 0, a * np.sqrt((l + 1 + m) * (l + 1 - m) / dp) * w)
        put(2, -1, b * np.sqrt((l + 1 - m) * (l + 2 - m) / dp) * w)
        put(3, 0, -b * np.sqrt((l + 1 + m) * (l + 1 - m) / dp) * w)
        put(3, 1, -a * np.sqrt((l + 1 + m) * (l + 2 + m) / dp) * w)
    else:
        dm = d * (2 * l - 1)
        put(0, 0, a * (l - m) / d * w)
        put(0, -1, -b * np.sqrt((l + 1 - m) * (l + m)) / d * w)
        put(1, 0, b * (l + m) / d * w)
        put(1, 1, -a * np.sqrt((l + 1 + m) * (l - m)) / d * w)
        put(2, 0, a * np.sqrt((l + m) * (l - m) / dm) * w)
        put(2, -1, -b * np.sqrt((l + m) * (l - 1 + m) / dm) * w)
        put(3, 0, -b * np.sqrt((l + m) * (l - m) / dm) * w)
        put(3, 1, a * np.sqrt((l - m) * (l - 1 - m) / dm) * w)
    return out


def build_packet(spec: EllipticSpec, energy_mode: EnergyMode | str = EnergyMode.EXACT) -> PacketState:
    """Assemble weights, levels and angular coefficients for ``spec``."""
    mode = EnergyMode(energy_mode)
    n, Z = spec.n, spec.Z
    table = weight_table_for(spec)
    a, b = complex(spec.a), complex(spec.b)
    pa, pb = abs(a) ** 2, abs(b) ** 2

    branches = [(l, 1) for l in range(n)] + [(l, -1) for l in range(1, n)]
    levels = tuple(dirac_level(n, kappa_of(l, s), Z) for l, s in branches)
    if mode is EnergyMode.EXACT:
        energies = np.array([lv.binding_exact_au for lv in levels])
    else:
        energies = np.array([lv.energy_fs for lv in levels])

    populations = np.zeros(len(levels))
    coeffs = [np.zeros((len(levels), 2 * n + 1), dtype=complex) for _ in range(4)]
    orbitals = np.zeros((len(levels), 2), dtype=int)
    for i, (l, s) in enumerate(branches):
        m, w = table.row(l)
        w2 = w * w
        if s == 1:
            pop = w2 * (pa * (l + 1 + m) + pb * (l + 1 - m)) / (2 * l + 1)
        else:
            pop = w2 * (pa * (l - m) + pb * (l + m)) / (2 * l + 1)
        populations[i] = math.fsum(pop)
        for k, arr in enumerate(_level_coefficients(l, s, m, w, a, b, n)):
            coeffs[k][i] = arr
        orbitals[i] = (l, l + 1 if s == 1 else l - 1)

    tp = precession_time(n, spec.eccentricity, Z).Tp_au
    for arr in coeffs:
        arr.setflags(write=False)
    return PacketState(
        spec=spec,
        weights=table,
        energy_mode=mode,
        level_list=levels,
        energies=energies,
        populations=populations,
        coefficients=tuple(coeffs),
        orbitals=orbitals,
        Tp_au=tp,
    )


def autocorrelation(packet: PacketState, times, unit: str = "tp") -> AutocorrSeries:
    """Overlap ``<Psi(0)|Psi(t)>`` from the level populations."""
    t_au = packet.to_au(times, unit)
    terms = packet.phases(t_au) * packet.populations[None, :]
    return AutocorrSeries(np.asarray(times, dtype=float), compensated_sum(terms, axis=1))


def autocorrelation_approx(packet: PacketState, times, unit: str = "tp") -> AutocorrSeries:
    """Circular-weight approximation: only ``m = l`` weights are kept."""
    n = packet.spec.n
    t_au = packet.to_au(times, unit)
    wll2 = packet.weights.circular() ** 2
    pa, pb = abs(complex(packet.spec.a)) ** 2, abs(complex(packet.spec.b)) ** 2
    amp = np.zeros(packet.n_levels)
    for l in range(n):
        amp[packet.index(l, 1)] = pa * wll2[l]
        if l >= 1:
            amp[packet.index(l, -1)] = pb * wll2[l]
    terms = packet.phases(t_au) * amp[None, :]
    return AutocorrSeries(np.asarray(times, dtype=float), compensated_sum(terms, axis=1))


def spin_expectation(packet: PacketState, times, unit: str = "tp") -> SpinSeries:
    """``(<sigma_x>, <sigma_y>, <sigma_z>)`` over the four-component packet.

    Pair amplitudes between levels are fixed at build time; the time
    dependence enters only through the beat frequencies ``E_A - E_B``
    (``omega_l`` between spin-orbit partners, ``omega'_l`` between ``(l,+)``
    and ``(l+2,-)`` whose small components share orbital ``l + 1``).
    """
    t_au = packet.to_au(times, unit)
    kz, kp = packet._spin_kernels
    ph = packet.phases(t_au)
    conj = ph.conj()
    sz = ((conj @ kz) * ph).sum(axis=1).real
    sp = ((conj @ kp) * ph).sum(axis=1)
    sigma = np.column_stack([2.0 * sp.real, 2.0 * sp.imag, sz])
    return SpinSeries(np.asarray(times, dtype=float), sigma)


# --- densities on the z = 0 plane -------------------------------------------


def equatorial_harmonic(l: int, m: int) -> float:
    """``Y_lm(theta = pi/2, phi = 0)`` with the Condon-Shortley phase."""
    if abs(m) > l or (l + m) % 2:
        return 0.0
    am = abs(m)
    log_mag = 0.5 * (
        math.log((2 * l + 1) / (4 * math.pi)) + gammaln(l - am + 1) + gammaln(l + am + 1)
    ) - (l * math.log(2.0) + gammaln((l - am) // 2 + 1) + gammaln((l + am) // 2 + 1))
    sign = -1.0 if ((l + am) // 2) % 2 else 1.0
    if m < 0 and am % 2:
        sign = -sign
    return sign * math.exp(log_mag)


def _harmonic_table(n: int, orbitals: np.ndarray) -> np.ndarray:
    """Equatorial harmonics for every level's large and small orbital."""
    L = orbitals.shape[0]
    mu = np.arange(-n, n + 1)
    out = np.zeros((2, L, 2 * n + 1))
    for block in range(2):
        for i in range(L):
            lam = orbitals[i, block]
            out[block, i] = [equatorial_harmonic(lam, int(m)) for m in mu]
    return out


def _components_polar(packet: PacketState, t_au: float, r: np.ndarray):
    """Per-radius Fourier amplitudes of c1..c4 in ``phi``: shape (4, len(r), 2n+1)."""
    ylm = packet.__dict__.get("_ylm")
    if ylm is None:
        ylm = _harmonic_table(packet.spec.n, packet.orbitals)
        packet.__dict__["_ylm"] = ylm
    phase = np.exp(-1j * packet.energies * t_au)
    g = np.empty((len(r), packet.n_levels))
    f = np.empty_like(g)
    for i, pair in enumerate(packet.radial):
        g[:, i], f[:, i] = pair.gf(r)
    out = []
    for k, coeff in enumerate(packet.coefficients):
        block = 0 if k < 2 else 1
        rad = g if block == 0 else f
        out.append(rad @ (phase[:, None] * coeff * ylm[block]))
    return np.stack(out)


def density_at(packet: PacketState, t, r, phi, unit: str = "tp") -> tuple[np.ndarray, np.ndarray]:
    """Large- and small-component densities at points of the z = 0 plane."""
    t_au = float(packet.to_au(t, unit))
    r = np.asarray(r, dtype=float)
    phi = np.asarray(phi, dtype=float)
    r_flat, phi_flat = np.broadcast_arrays(r, phi)
    shape = r_flat.shape
    r_flat, phi_flat = r_flat.ravel(), phi_flat.ravel()
    uniq, inverse = np.unique(r_flat, return_inverse=True)
    amps = _components_polar(packet, t_au, uniq)
    rho = _sum_fourier(packet.spec.n, amps, inverse, phi_flat)
    return rho[0].reshape(shape), rho[1].reshape(shape)


def _sum_fourier(n: int, amps: np.ndarray, inverse: np.ndarray, phi: np.ndarray, chunk: int = 8192):
    mu = np.arange(-n, n + 1)
    large = np.empty(len(phi))
    small = np.empty(len(phi))
    for s in range(0, len(phi), chunk):
        sl = slice(s, s + chunk)
        basis = np.exp(1j * np.outer(phi[sl], mu))
        vals = np.einsum("kpm,pm->kp", amps[:, inverse[sl], :], basis)
        mod2 = vals.real**2 + vals.imag**2
        large[sl] = mod2[0] + mod2[1]
        small[sl] = mod2[2] + mod2[3]
    return large, small


def density_grid(
    packet: PacketState, t, half_extent: float, resolution: tuple[int, int] | int, unit: str = "tp"
) -> DensityGrid:
    """Densities on a pixel-centred square grid of the z = 0 plane."""
    if isinstance(resolution, int):
        resolution = (resolution, resolution)
    nx, ny = resolution
    if not (1 <= nx <= 2048 and 1 <= ny <= 2048):
        raise ValueError(f"resolution must be within 1..2048 per axis, got {resolution}")
    if half_extent <= 0:
        raise ValueError("half_extent must be positive")
    # symmetric pixel centres keep r exactly mirror-symmetric and never 0
    x = (np.arange(nx) - (nx - 1) / 2) * (2.0 * half_extent / nx)
    y = (np.arange(ny) - (ny - 1) / 2) * (2.0 * half_extent / ny)
    xx, yy = np.meshgrid(x, y)
    r = np.hypot(xx, yy)
    phi = np.arctan2(yy, xx)
    large, small = density_at(packet, t, r, phi, unit)
    return DensityGrid(half_extent, (nx, ny), x, y, large, small)


def density_axis(grid: DensityGrid) -> float:
    """Direction (radians) from the focus toward the far end of the ellipse."""
    rho = grid.rho_total
    xx, yy = np.meshgrid(grid.x, grid.y)
    m = rho.sum()
    ixx = (rho * xx * xx).sum() / m
    iyy = (rho * yy * yy).sum() / m
    ixy = (rho * xx * yy).sum() / m
    spread = math.hypot(ixx - iyy, 2 * ixy) / (ixx + iyy)
    if spread < 1e-3:
        raise DegenerateMomentError(f"density is nearly isotropic (anisotropy {spread:.2e})")
    theta = 0.5 * math.atan2(2 * ixy, ixx - iyy)
    cx = (rho * xx).sum() / m
    cy = (rho * yy).sum() / m
    if cx * math.cos(theta) + cy * math.sin(theta) < 0:
        theta += math.pi
    return theta


def precession_angle(packet: PacketState, t, unit: str = "tp", resolution: int = 128,
                     half_extent: float | None = None) -> float:
    """Signed rotation of the density's major axis since t = 0."""
    if half_extent is None:
        half_extent = 2.0 * packet.spec.n**2 / packet.spec.Z
    ref = density_axis(density_grid(packet, 0.0, half_extent, resolution, unit))
    now = density_axis(density_grid(packet, t, half_extent, resolution, unit))
    d = now - ref
    return (d + math.pi) % (2 * math.pi) - math.pi


def ridge_eccentricity(packet: PacketState, t=0.0, unit: str = "tp", n_angles: int = 90,
                       n_radii: int = 800) -> tuple[float, float]:
    """Fit a focal ellipse to the density ridge.

    For each polar angle the radius of maximal density is located (with
    parabolic refinement) and ``1/r = A + B cos(phi) + C sin(phi)`` is fitted
    by least squares.  Returns ``(eccentricity, semi_major_axis)``.
    """
    n, Z = packet.spec.n, packet.spec.Z
    r = np.linspace(0.02, 2.5, n_radii) * n**2 / Z
    phi = np.linspace(0, 2 * np.pi, n_angles, endpoint=False)
    rr, pp = np.meshgrid(r, phi)
    large, small = density_at(packet, t, rr, pp, unit)
    rho = large + small
    ridge = np.empty(n_angles)
    dr = r[1] - r[0]
    for i in range(n_angles):
        j = int(np.argmax(rho[i]))
        j = min(max(j, 1), n_radii - 2)
        y0, y1, y2 = rho[i, j - 1 : j + 2]
        denom = y0 - 2 * y1 + y2
        shift = 0.5 * (y0 - y2) / denom if denom != 0 else 0.0
        ridge[i] = r[j] + shift * dr
    design = np.column_stack([np.ones(n_angles), np.cos(phi), np.sin(phi)])
    (A, B, C), *_ = np.linalg.lstsq(design, 1.0 / ridge, rcond=None)
    ecc = math.hypot(B, C) / A
    semi_major = 1.0 / (A * (1 - ecc**2))
    return ecc, semi_major


# --- series diagnostics ------------------------------------------------------


def local_maxima(times: np.ndarray, values: np.ndarray) -> list[tuple[float, float]]:
    """Interior strict-or-plateau local maxima as ``(time, value)`` pairs."""
    v = np.asarray(values)
    idx = np.where((v[1:-1] > v[:-2]) & (v[1:-1] >= v[2:]))[0] + 1
    return [(float(times[i]), float(v[i])) for i in idx]


def windowed_mean(times: np.ndarray, values: np.ndarray, width: float) -> np.ndarray:
    """Centered running mean over ``width`` (same units as ``times``)."""
    times = np.asarray(times)
    values = np.asarray(values)
    dt = times[1] - times[0]
    k = max(1, int(round(width / dt)))
    kernel = np.ones(k) / k
    return np.convolve(values, kernel, mode="same")
