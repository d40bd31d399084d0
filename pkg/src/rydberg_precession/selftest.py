"""Fast invariant checks runnable from an installed package (no test deps)."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .core_model import ALPHA, EllipticSpec, average_angular_momentum, build_weight_table
from .dirac_coulomb import exact_energy
from .packet import autocorrelation, build_packet, spin_expectation
from .radial_integrals import quadrature_selftest
from .timescales import kepler_period, precession_time


@dataclass(frozen=True)
class CheckResult:
    name: str
    value: float
    limit: float
    passed: bool

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status}  {self.name}: {self.value:.3e} (limit {self.limit:.1e})"


def _weights_norm() -> float:
    worst = 0.0
    for n in (3, 10, 50):
        for ecc in (0.0, 0.4, 0.8):
            t = build_weight_table(n, math.asin(ecc))
            worst = max(worst, abs(math.fsum(w * w for _, _, w in t.items()) - 1.0))
    return worst


def _weights_mean_m() -> float:
    worst = 0.0
    for n in (3, 10, 50):
        for ecc in (0.0, 0.4, 0.8):
            g = math.asin(ecc)
            worst = max(worst, abs(average_angular_momentum(build_weight_table(n, g)) - (n - 1) * math.cos(g)))
    return worst


def _ground_state() -> float:
    return max(
        abs(exact_energy(1, -1, Z) / math.sqrt(1 - (Z * ALPHA) ** 2) - 1.0) for Z in (1, 40, 92)
    )


def _degeneracy() -> float:
    return max(abs(exact_energy(50, l, 92) - exact_energy(50, -l, 92)) for l in range(1, 50))


def _normalization() -> float:
    return quadrature_selftest(12, 92).max_norm_deviation


def _doubling() -> float:
    return quadrature_selftest(12, 92).max_doubling_change


def _autocorr_origin() -> float:
    p = build_packet(EllipticSpec(12, 0.4, 92))
    return abs(autocorrelation(p, [0.0]).values[0] - 1.0)


def _spin_bound() -> float:
    p = build_packet(EllipticSpec(12, 0.4, 92, 0.6, 0.8))
    return float(spin_expectation(p, np.linspace(0, 5, 257)).norm.max() - 1.0)


def _timescale_identities() -> float:
    worst = 0.0
    for n in (10, 50):
        for Z in (1, 92):
            r = precession_time(n, 0.4, Z)
            worst = max(worst, abs(r.ratio_Tp_Trad / (8 * math.pi * ALPHA / 3) - 1.0))
            ident = 2 * r.l_av**2 * kepler_period(n, Z) / (Z * ALPHA) ** 2
            worst = max(worst, abs(r.Tp_au / ident - 1.0))
    return worst


CHECKS: list[tuple[str, Callable[[], float], float]] = [
    ("weight normalization", _weights_norm, 1e-12),
    ("mean m equals (n-1) cos(gamma)", _weights_mean_m, 1e-10),
    ("ground-state energy closed form", _ground_state, 1e-14),
    ("j-degeneracy of kappa = +-l", _degeneracy, 1e-15),
    ("radial normalization G + F = 1", _normalization, 5e-11),
    ("node-doubling change", _doubling, 1e-9),
    ("autocorrelation at t = 0", _autocorr_origin, 1e-12),
    ("spin norm excess over 1", _spin_bound, 1e-9),
    ("timescale identities", _timescale_identities, 1e-14),
]


def run_selftest() -> list[CheckResult]:
    out = []
    for name, fn, limit in CHECKS:
        value = fn()
        out.append(CheckResult(name, value, limit, bool(value <= limit)))
    return out
