"""Quantum-number bookkeeping and the elliptic coherent-state weights.

The non-relativistic elliptic state of principal quantum number ``n`` is a
real superposition ``sum_{l,m} w_lm |n, l, m>`` over ``l + m`` even.  The
weights depend on ``n`` and the angle ``gamma = arcsin(eccentricity)``.

All factorial ratios are carried as sums of log-gamma values so the table is
usable well beyond ``n = 50``.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Iterator

import numpy as np
from scipy.special import gammaln

MAX_N = 200


class DomainError(ValueError):
    """Raised when quantum numbers or physical parameters are out of range."""


@dataclass(frozen=True)
class PhysicalConstants:
    alpha: float = 7.2973525693e-3
    au_time_seconds: float = 2.4188843265857e-17

    @property
    def rest_energy_au(self) -> float:
        """Electron rest energy m0 c^2 in Hartree."""
        return 1.0 / self.alpha**2

    @property
    def c_au(self) -> float:
        return 1.0 / self.alpha


CONSTANTS = PhysicalConstants()
ALPHA = CONSTANTS.alpha


@dataclass(frozen=True)
class EllipticSpec:
    """Parameters of one elliptic packet.

    Parameters
    ----------
    n : int
        Principal quantum number shared by every admixed orbital.
    eccentricity : float
        Orbit eccentricity in ``[0, 1)``.
    Z : int
        Nuclear charge.
    a, b : complex
        Spin-up and spin-down amplitudes, ``|a|^2 + |b|^2 = 1``.
    """

    n: int
    eccentricity: float
    Z: int = 1
    a: complex = 1.0 / math.sqrt(2.0)
    b: complex = 1.0 / math.sqrt(2.0)

    def __post_init__(self) -> None:
        if not isinstance(self.n, (int, np.integer)) or self.n < 1:
            raise DomainError(f"n must be an integer >= 1, got {self.n!r}")
        if self.n > MAX_N:
            raise DomainError(f"n must be <= {MAX_N}, got {self.n}")
        if not 0.0 <= self.eccentricity < 1.0:
            raise DomainError(f"eccentricity must lie in [0, 1), got {self.eccentricity}")
        if not isinstance(self.Z, (int, np.integer)) or self.Z < 1:
            raise DomainError(f"Z must be an integer >= 1, got {self.Z!r}")
        if self.Z * ALPHA >= 1.0:
            raise DomainError(f"Z*alpha must be < 1 for bound Dirac states, got Z={self.Z}")
        norm = abs(self.a) ** 2 + abs(self.b) ** 2
        if abs(norm - 1.0) > 1e-12:
            raise DomainError(f"spinor must satisfy |a|^2 + |b|^2 = 1, got {norm!r}")

    @property
    def gamma(self) -> float:
        return math.asin(self.eccentricity)

    @property
    def is_real_spinor(self) -> bool:
        return complex(self.a).imag == 0.0 and complex(self.b).imag == 0.0


def normalized_spinor(a: complex, b: complex) -> tuple[complex, complex]:
    """Rescale ``(a, b)`` to unit norm."""
    norm = math.sqrt(abs(a) ** 2 + abs(b) ** 2)
    if norm == 0.0:
        raise DomainError("spinor (a, b) must not vanish")
    a, b = a / norm, b / norm
    if complex(a).imag == 0.0 and complex(b).imag == 0.0:
        return float(complex(a).real), float(complex(b).real)
    return complex(a), complex(b)


@dataclass(frozen=True)
class WeightTable:
    """Dense triangular store of the weights ``w_lm``.

    Row ``l`` holds the ``l + 1`` admissible values ``m = -l, -l + 2, ..., l``
    at column ``(m + l) // 2``; unused cells are zero.
    """

    n: int
    gamma: float
    dense: np.ndarray = field(repr=False)

    def __len__(self) -> int:
        return self.n * (self.n + 1) // 2

    def get(self, l: int, m: int) -> float:
        if l < 0 or l >= self.n or abs(m) > l or (l + m) % 2:
            return 0.0
        return float(self.dense[l, (m + l) // 2])

    def row(self, l: int) -> tuple[np.ndarray, np.ndarray]:
        """Return ``(m_values, weights)`` for one ``l``."""
        m = np.arange(-l, l + 1, 2)
        return m, self.dense[l, : l + 1]

    def items(self) -> Iterator[tuple[int, int, float]]:
        for l in range(self.n):
            for i in range(l + 1):
                yield l, 2 * i - l, float(self.dense[l, i])

    def circular(self) -> np.ndarray:
        """The ``m = l`` weights indexed by ``l``."""
        return np.array([self.dense[l, l] for l in range(self.n)])

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["l", "m", "w"])
        for l, m, w in self.items():
            writer.writerow([l, m, format_real(w)])
        return buf.getvalue()


def format_real(x: float) -> str:
    """Fixed 17-significant-digit rendering used by every CSV writer."""
    return f"{x:.17g}"


def build_weight_table(n: int, gamma: float) -> WeightTable:
    """Coefficients of the elliptic coherent state.

    The global sign is fixed so that ``w_{n-1,n-1} > 0``.
    """
    if not isinstance(n, (int, np.integer)) or n < 1:
        raise DomainError(f"n must be an integer >= 1, got {n!r}")
    if n > MAX_N:
        raise DomainError(f"n must be <= {MAX_N} (log-gamma accuracy budget), got {n}")
    if not (0.0 <= gamma <= math.pi / 2):
        raise DomainError(f"gamma must lie in [0, pi/2], got {gamma!r}")

    s, c = math.sin(gamma / 2), math.cos(gamma / 2)
    log_s = math.log(s) if s > 0.0 else -math.inf
    log_c = math.log(c)

    dense = np.zeros((n, n))
    for l in range(n):
        i = np.arange(l + 1)
        m = 2 * i - l
        p, q = (l - m) // 2, (l + m) // 2
        log_mag = (
            (n - l - 1) * math.log(2.0)
            + gammaln(n)
            - gammaln(p + 1)
            - gammaln(q + 1)
            + 0.5
            * (
                gammaln(l + m + 1)
                + gammaln(l - m + 1)
                + math.log(2 * l + 1)
                - gammaln(n - l)
                - gammaln(n + l + 1)
            )
            + (n + m - 1) * log_c
        )
        sin_power = n - m - 1
        with np.errstate(invalid="ignore"):
            sin_term = np.where(sin_power == 0, 0.0, sin_power * log_s)
        sign = np.where((q + n - 1) % 2 == 0, 1.0, -1.0)
        dense[l, : l + 1] = sign * np.exp(log_mag + sin_term)
    return WeightTable(n=n, gamma=float(gamma), dense=dense)


def weight_table_for(spec: EllipticSpec) -> WeightTable:
    return build_weight_table(spec.n, spec.gamma)


def average_angular_momentum(table: WeightTable) -> float:
    """Weighted mean of ``m``; equals ``(n - 1) cos(gamma)``."""
    terms = []
    for l in range(table.n):
        m, w = table.row(l)
        terms.extend((w * w * m).tolist())
    return math.fsum(terms)


def weight_decay_profile(table: WeightTable) -> list[tuple[int, float]]:
    """Largest ``w_lm^2 / w_ll^2`` over ``m < l``, per row ``l >= 2``.

    Rows whose circular weight vanishes, or whose off-circular weights are all
    exactly zero, are omitted.
    """
    profile = []
    for l in range(2, table.n):
        _, w = table.row(l)
        top = w[-1] ** 2
        rest = w[:-1] ** 2
        if top == 0.0 or not np.any(rest):
            continue
        profile.append((l, float(rest.max() / top)))
    return profile
