import dataclasses
import math

import numpy as np
import pytest
from oracle import DenseOracle

from rydberg_precession import (
    DegenerateMomentError,
    EllipticSpec,
    EnergyMode,
    autocorrelation,
    autocorrelation_approx,
    build_packet,
    build_weight_table,
    density_grid,
    precession_angle,
    spin_expectation,
)
from rydberg_precession.packet import density_at, local_maxima, windowed_mean

CASES = [
    (3, 0.5, 92, 0.6, 0.8, False),
    (3, 0.3, 1, 1.0, 0.0, False),
    (4, 0.7, 60, 1 / math.sqrt(2), 1 / math.sqrt(2), False),
    (4, 0.3, 92, 0.6, 0.8j, False),
    (4, 0.6, 92, 0.8, -0.6, True),
]


@pytest.fixture(scope="module", params=CASES, ids=lambda c: f"n{c[0]}-e{c[1]}-Z{c[2]}-lo{c[5]}")
def pair(request):
    n, ecc, Z, a, b, lo = request.param
    mode = EnergyMode.LOWEST_ORDER if lo else EnergyMode.EXACT
    return build_packet(EllipticSpec(n, ecc, Z, a, b), mode), DenseOracle(n, ecc, Z, a, b, lowest_order=lo)


TIMES = [0.0, 0.13, 0.77, 2.9]


def phase_floor(packet, t_tp):
    """Double-precision floor on any phase exp(-i E t): a few ulps of |E t|."""
    return 4 * np.finfo(float).eps * np.abs(packet.energies).max() * t_tp * packet.Tp_au


def test_oracle_norm(pair):
    _, oracle = pair
    assert oracle.norm() == pytest.approx(1.0, abs=1e-10)


def test_oracle_autocorrelation(pair):
    packet, oracle = pair
    got = autocorrelation(packet, TIMES).values
    for t, v in zip(TIMES, got):
        assert abs(v - oracle.autocorrelation(t * packet.Tp_au)) < 1e-10 + phase_floor(packet, t)


def test_oracle_spin(pair):
    packet, oracle = pair
    got = spin_expectation(packet, TIMES).sigma
    for t, v in zip(TIMES, got):
        assert np.abs(v - oracle.sigma(t * packet.Tp_au)).max() < 1e-10 + phase_floor(packet, t)


def test_oracle_density(pair):
    packet, oracle = pair
    n, Z = packet.spec.n, packet.spec.Z
    rng = np.random.default_rng(7)
    r = rng.uniform(0.05, 2.5, 6) * n * n / Z
    phi = rng.uniform(-math.pi, math.pi, 6)
    for t in (0.0, 0.41):
        large, small = density_at(packet, t, r, phi)
        for i in range(len(r)):
            ref_l, ref_s = oracle.density(t * packet.Tp_au, r[i], math.pi / 2, phi[i])
            tol = (1e-10 + phase_floor(packet, t)) * ref_l
            assert abs(large[i] - ref_l) < tol
            assert abs(small[i] - ref_s) < tol


def test_showcase_sizes(showcase):
    assert len(showcase.weights) == 1275
    assert showcase.n_levels == 99
    assert len(showcase.levels) == 99
    assert all(showcase.energies < 0)


def test_circular_packet_support():
    p = build_packet(EllipticSpec(5, 0.0, 92))
    for i, lv in enumerate(p.level_list):
        if lv.l != 4:
            assert p.populations[i] == 0.0
    assert p.populations.sum() == pytest.approx(1.0, abs=1e-13)


def test_spin_up_has_no_b_terms():
    p = build_packet(EllipticSpec(8, 0.5, 92, 1.0, 0.0))
    s = spin_expectation(p, np.linspace(0, 4, 33)).sigma
    assert np.abs(s[:, :2]).max() == 0.0


def test_unitarity_and_spin_bounds(showcase):
    t = np.linspace(0, 25, 513)
    a = autocorrelation(showcase, t)
    assert abs(a.values[0] - 1) < 1e-12
    assert a.modulus.max() <= 1 + 1e-12
    assert spin_expectation(showcase, t).norm.max() <= 1 + 1e-9


def test_global_energy_shift_is_unobservable():
    p = build_packet(EllipticSpec(6, 0.5, 92, 0.6, 0.8))
    q = dataclasses.replace(p, energies=p.energies + 0.37)
    t = np.linspace(0, 3, 17)
    assert np.allclose(autocorrelation(p, t).modulus, autocorrelation(q, t).modulus, atol=1e-13)
    assert np.allclose(spin_expectation(p, t).sigma, spin_expectation(q, t).sigma, atol=1e-12)
    r = np.array([5.0, 20.0, 40.0]) * 36 / 92 / 10
    phi = np.array([0.1, 1.0, 2.0])
    assert np.allclose(density_at(p, 0.3, r, phi)[0], density_at(q, 0.3, r, phi)[0], rtol=1e-11)


@pytest.mark.parametrize("mode", list(EnergyMode))
def test_frequency_identity(mode):
    p = build_packet(EllipticSpec(20, 0.4, 92), mode)
    fr = p.frequencies
    for l in range(18):
        assert fr.omega_prime[l] == fr.omega_dprime[l + 2]
    assert np.all(fr.omega[1:] > 0)
    assert np.isnan(fr.omega[0]) and np.isnan(fr.omega_dprime[0]) and np.isnan(fr.omega_prime[19])


def test_approximation_exact_for_circular_spin_up_packet():
    # the circular-weight form splits populations as a^2 / b^2, which matches the
    # recoupled populations at m = l only when b = 0
    p = build_packet(EllipticSpec(10, 0.0, 92, 1.0, 0.0))
    t = np.linspace(0, 3, 101)
    assert np.allclose(autocorrelation(p, t).values, autocorrelation_approx(p, t).values, atol=1e-14)


def test_approximation_close_to_full(showcase):
    t = np.linspace(0, 3, 1024)
    gap = np.abs(autocorrelation(showcase, t).modulus - autocorrelation_approx(showcase, t).modulus)
    assert gap.max() < 0.1


@pytest.mark.parametrize("n,ecc", [(50, 0.4), (20, 0.6), (10, 0.2)])
def test_spin_branches_differ_by_weight_shift(n, ecc):
    # with E-_l = E+_{l-1}, the two approximate sums differ only through w_ll^2 - w_{l+1,l+1}^2
    t = np.linspace(0, 3, 1024)
    up = autocorrelation_approx(build_packet(EllipticSpec(n, ecc, 92, 1, 0), "lowest_order"), t)
    down = autocorrelation_approx(build_packet(EllipticSpec(n, ecc, 92, 0, 1), "lowest_order"), t)
    w2 = build_weight_table(n, math.asin(ecc)).circular() ** 2
    bound = np.abs(np.diff(w2)).sum() + w2[-1]
    assert np.abs(up.values - down.values).max() <= bound + 1e-12


def test_universality_lowest_order():
    t = np.linspace(0, 3, 512)
    a1 = autocorrelation(build_packet(EllipticSpec(30, 0.4, 1), "lowest_order"), t).modulus
    a92 = autocorrelation(build_packet(EllipticSpec(30, 0.4, 92), "lowest_order"), t).modulus
    assert np.abs(a1 - a92).max() < 1e-6


def test_time_units(showcase):
    t_au = np.array([0.0, 1.0e5, 3.3e6])
    a = autocorrelation(showcase, t_au, unit="au").values
    b = autocorrelation(showcase, t_au / showcase.Tp_au).values
    assert np.allclose(a, b, atol=1e-13)
    with pytest.raises(ValueError):
        showcase.to_au([1.0], unit="fs")


def test_deterministic(showcase):
    t = np.linspace(0, 3, 300)
    assert np.array_equal(spin_expectation(showcase, t).sigma, spin_expectation(showcase, t).sigma)


def test_density_grid_invariants():
    p = build_packet(EllipticSpec(12, 0.5, 92))
    g = density_grid(p, 0.2, 2 * 144 / 92, 64)
    assert g.rho_large.shape == (64, 64)
    assert np.all(g.rho_large >= 0) and np.all(g.rho_small >= 0)
    assert np.allclose(g.rho_total, g.rho_large + g.rho_small, rtol=1e-12, atol=0)
    with pytest.raises(ValueError):
        density_grid(p, 0.0, 1.0, 4096)


def test_precession_angle():
    p = build_packet(EllipticSpec(20, 0.5, 92))
    assert precession_angle(p, 0.0) == 0.0
    circular = build_packet(EllipticSpec(20, 0.0, 92))
    with pytest.raises(DegenerateMomentError):
        precession_angle(circular, 0.1)


def test_series_helpers():
    t = np.linspace(0, 1, 11)
    v = np.array([0, 1, 0, 2, 2, 0, 1, 3, 1, 0, 0], dtype=float)
    assert local_maxima(t, v) == [pytest.approx((0.1, 1.0)), pytest.approx((0.3, 2.0)), pytest.approx((0.7, 3.0))]
    assert np.allclose(windowed_mean(t, np.ones(11), 0.3)[3:-3], 1.0)


def test_precession_rate_at_early_times(showcase):
    angle = precession_angle(showcase, 1 / 8)
    assert angle == pytest.approx(2 * math.pi / 8, rel=0.15)


def test_spin_preparation_independence():
    t = np.linspace(0, 3, 1024)
    up = build_packet(EllipticSpec(50, 0.4, 92, 1.0, 0.0))
    mixed = build_packet(EllipticSpec(50, 0.4, 92, 1 / math.sqrt(2), 1 / math.sqrt(2)))
    gap = np.abs(autocorrelation_approx(up, t).modulus - autocorrelation_approx(mixed, t).modulus).max()
    assert gap < 0.05, f"sup-norm gap {gap:.3f}"
