"""Characteristic times of the elliptic packet (atomic units unless noted)."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import TYPE_CHECKING

from .core_model import ALPHA, CONSTANTS, DomainError

if TYPE_CHECKING:
    from .packet import PacketState


@dataclass(frozen=True)
class TimescaleReport:
    n: int
    eccentricity: float
    Z: int
    l_av: float
    Tp_au: float
    Tp_seconds: float
    TK_au: float
    Trad_au: float
    ratio_Tp_Trad: float

    def to_dict(self) -> dict:
        return asdict(self)


def mean_angular_momentum(n: int, eccentricity: float) -> float:
    return (n - 1) * math.sqrt(1.0 - eccentricity**2)


def kepler_period(n: int, Z: float) -> float:
    return 2.0 * math.pi * n**3 / Z**2


def radiative_lifetime(n: int, l_half_sq: float, Z: float) -> float:
    """Radiative lifetime estimate given ``(l + 1/2)^2``."""
    return 1.5 / (ALPHA**3 * Z**4) * n**3 * l_half_sq


def precession_time(n: int, eccentricity: float, Z: int) -> TimescaleReport:
    """Precession period from the ``l_av^2`` shortcut, plus related scales."""
    if n < 1 or not 0.0 <= eccentricity < 1.0 or Z < 1:
        raise DomainError(f"invalid (n, eccentricity, Z) = ({n}, {eccentricity}, {Z})")
    if Z * ALPHA >= 1.0:
        raise DomainError(f"Z*alpha must be < 1, got Z={Z}")
    l_av = mean_angular_momentum(n, eccentricity)
    tp = 4.0 * math.pi * n**3 * l_av**2 / (Z**4 * ALPHA**2)
    tk = kepler_period(n, Z)
    trad = radiative_lifetime(n, l_av**2, Z)
    return TimescaleReport(
        n=n,
        eccentricity=eccentricity,
        Z=Z,
        l_av=l_av,
        Tp_au=tp,
        Tp_seconds=tp * CONSTANTS.au_time_seconds,
        TK_au=tk,
        Trad_au=trad,
        ratio_Tp_Trad=tp / trad,
    )


def exact_mean_precession_time(packet: PacketState) -> float:
    """Precession period with ``<(l + s + 1/2)^2>`` averaged over the packet."""
    n, Z = packet.spec.n, packet.spec.Z
    k2 = math.fsum(
        float(p) * lv.k**2 for p, lv in zip(packet.populations, packet.level_list)
    )
    return 4.0 * math.pi * n**3 * k2 / (Z**4 * ALPHA**2)
