import math

import mpmath
import numpy as np
import pytest
import sympy as sp
from scipy.integrate import quad
from scipy.special import gammaln

from rydberg_precession.core_model import ALPHA, DomainError
from rydberg_precession.dirac_coulomb import (
    dirac_level,
    energy_series,
    exact_binding_energy,
    exact_energy,
    expansion_budget,
    fine_structure_energy,
    kappa_of,
    nonrel_radial,
    radial_pair,
)

mpmath.mp.dps = 40


def mp_energy(n, k, Z):
    x = Z * mpmath.mpf(ALPHA)
    return 1 / mpmath.sqrt(1 + (x / (n - k + mpmath.sqrt(k * k - x * x))) ** 2)


@pytest.mark.parametrize("Z", [1, 40, 92])
def test_ground_state_closed_form(Z):
    assert exact_energy(1, -1, Z) == pytest.approx(math.sqrt(1 - (Z * ALPHA) ** 2), rel=1e-14)


def test_energies_against_high_precision():
    for k in range(1, 51):
        assert exact_energy(50, -k, 92) == pytest.approx(float(mp_energy(50, k, 92)), rel=1e-15)


@pytest.mark.parametrize("Z", [1, 92])
def test_binding_energy_without_cancellation(Z):
    for n, k in [(1, 1), (50, 1), (50, 45), (50, 50)]:
        ref = float(mp_energy(n, k, Z) - 1)
        assert exact_binding_energy(n, -k, Z) == pytest.approx(ref, rel=1e-13)


def test_partner_degeneracy_exact():
    for l in range(1, 50):
        assert exact_energy(50, l, 92) == exact_energy(50, -l, 92)
        assert fine_structure_energy(50, l, -1, 92) == fine_structure_energy(50, l - 1, 1, 92)


def test_energy_increases_with_k():
    e = [exact_energy(50, -k, 92) for k in range(1, 51)]
    assert all(b > a for a, b in zip(e, e[1:]))
    assert all(0 < v < 1 for v in e)


def test_small_charge_limit():
    assert exact_energy(3, -2, 0) == 1.0
    assert abs(exact_energy(3, -2, 1) - 1) < 1e-4


def test_fine_structure_values():
    # l + s + 1/2 = 45 for l = 44, s = +1/2
    ref = -0.5 * mpmath.mpf(92) ** 4 * mpmath.mpf(ALPHA) ** 2 / (50**3 * 45)
    assert fine_structure_energy(50, 44, 1, 92) == pytest.approx(float(ref), rel=1e-15)
    assert fine_structure_energy(50, 44, 1, 92) / fine_structure_energy(50, 44, 1, 1) == pytest.approx(
        92.0**4, rel=1e-15
    )


@pytest.mark.parametrize(
    "call",
    [
        lambda: exact_energy(3, 3, 1),
        lambda: exact_energy(3, 0, 1),
        lambda: exact_energy(3, -4, 1),
        lambda: exact_energy(0, -1, 1),
        lambda: exact_energy(1, -1, 138),
        lambda: fine_structure_energy(3, 0, -1, 1),
        lambda: fine_structure_energy(3, 3, 1, 1),
        lambda: kappa_of(0, -1),
        lambda: expansion_budget(5, 6, 1),
    ],
)
def test_domain_errors(call):
    with pytest.raises(DomainError):
        call()


def test_level_quantum_numbers():
    lv = dirac_level(5, 2, 10)
    assert (lv.l, lv.k, lv.j2, lv.s_sign) == (2, 2, 3, -1)
    lv = dirac_level(5, -3, 10)
    assert (lv.l, lv.k, lv.j2, lv.s_sign) == (2, 3, 5, 1)


def series_coefficients(n, k):
    """Taylor coefficients of the exact energy in x = Z alpha, via sympy."""
    x = sp.symbols("x", positive=True)
    e = 1 / sp.sqrt(1 + x**2 / (n - k + sp.sqrt(k**2 - x**2)) ** 2)
    ser = sp.series(e, x, 0, 8).removeO()
    return [sp.nsimplify(ser.coeff(x, p)) for p in (2, 4, 6)]


@pytest.mark.parametrize("n,k", [(3, 1), (5, 4), (50, 45)])
def test_expansion_terms_match_taylor_series(n, k):
    c2, c4, c6 = series_coefficients(n, k)
    Z = 30
    x = Z * ALPHA
    b = expansion_budget(n, k, Z)
    assert float(c2) == pytest.approx(-1 / (2 * n * n), rel=1e-14)
    # delta4 is the k-dependent part of the x^4 coefficient
    assert float(c4) * x**4 == pytest.approx(b.delta4 + 3 * x**4 / (8 * n**4), rel=1e-13)
    assert float(c6) * x**6 == pytest.approx(b.delta6, rel=1e-13)
    assert b.ratio64 == pytest.approx(b.delta6 / b.delta4, rel=1e-15)


def test_derivative_correction_matches_series():
    x, n, k = sp.symbols("x n k", positive=True)
    e4 = -x**4 / (4 * n**3) * 2 / k
    e6 = -x**6 / (4 * n**3) * (1 / (2 * k**3) + sp.Rational(3, 2) / (n * k**2) - 3 / (n**2 * k))
    corr = sp.simplify(sp.diff(e6, k) / sp.diff(e4, k))
    for nv, kv, Z in [(50, 45, 92), (10, 3, 40)]:
        ref = float(corr.subs({x: Z * ALPHA, n: nv, k: kv}))
        assert expansion_budget(nv, kv, Z).derivative_correction == pytest.approx(ref, rel=1e-13)


def test_ratio64_scales_with_charge_squared():
    r1 = expansion_budget(50, 45, 1).ratio64
    r92 = expansion_budget(50, 45, 92).ratio64
    assert r92 / r1 == pytest.approx(92.0**2, rel=1e-12)


@pytest.mark.parametrize("Z", [1, 10, 30, 60, 92])
def test_series_remainder_bounded_by_sixth_order(Z):
    x = Z * ALPHA
    for n in (1, 3, 10, 50):
        for k in range(1, n + 1):
            b = expansion_budget(n, k, Z)
            fourth = -x * x / (2 * n * n) + b.delta4 + 3 * x**4 / (8 * n**4)
            exact = exact_binding_energy(n, -k, Z)
            ulps = 4 * np.finfo(float).eps * abs(exact)
            # x^8 and higher terms grow the slack with x^2
            assert abs(exact - fourth) <= abs(b.delta6) * (1 + x * x) + ulps
            if x <= 0.1:
                assert abs(exact - fourth) <= abs(b.delta6) * (1 + 1e-2) + ulps
            # energy_series is stored as a value near 1: allow one ulp of rounding
            assert abs(energy_series(n, k, Z) - 1 - exact) < abs(b.delta6) + 2.3e-16


# --- radial functions -------------------------------------------------------


def test_radial_ode_residual():
    c = 1 / ALPHA
    for n, kappa, Z in [(5, -2, 92), (5, 2, 92), (12, -7, 40)]:
        p = radial_pair(n, kappa, Z)
        e_au = p.level.binding_exact_au
        r = np.linspace(0.05, 3.0, 40) * n * n / Z
        h = 1e-5 * r
        g, f = p.gf(r)
        dg = (p.g(r + h) - p.g(r - h)) / (2 * h)
        df = (p.f(r + h) - p.f(r - h)) / (2 * h)
        v = -Z / r
        res_g = dg - (-(1 + kappa) * g / r + (e_au + 2 * c * c - v) * f / c)
        res_f = df - (-(1 - kappa) * f / r - (e_au - v) * g / c)
        scale = np.abs(g).max() * Z
        assert np.abs(res_g).max() < 1e-6 * scale
        assert np.abs(res_f).max() < 1e-6 * scale


@pytest.mark.parametrize("kappa", [-1, 1, -2, 2, -3, 3, -4, -5])
def test_radial_normalization_independent_quadrature(kappa):
    n, Z = 5, 92
    p = radial_pair(n, kappa, Z)

    def dens(r):
        g, f = p.gf(r)
        return (g * g + f * f) * r * r

    edges = np.linspace(0, 60 * n * n / Z, 9)
    total = sum(quad(dens, a, b, epsabs=1e-14, epsrel=1e-13, limit=200)[0] for a, b in zip(edges, edges[1:]))
    assert total == pytest.approx(1.0, abs=1e-10)


def test_normalization_for_all_showcase_levels():
    from rydberg_precession.radial_integrals import overlap

    for kappa in [*range(-50, 0), *range(1, 50)]:
        p = radial_pair(50, kappa, 92)
        norm = overlap(p, p, "g", "g", 400) + overlap(p, p, "f", "f", 400)
        assert norm == pytest.approx(1.0, abs=1e-10)


@pytest.mark.parametrize("n,kappa", [(5, -1), (5, 1), (5, -3), (8, 2), (8, -8), (20, 5), (20, -5)])
def test_node_count(n, kappa):
    p = radial_pair(n, kappa, 92)
    r = np.linspace(1e-5, 4 * n * n / 92, 400001)
    g, f = p.gf(r)
    l = abs(kappa) - 1 if kappa < 0 else kappa
    # g keeps the Schrodinger count n - l - 1 on both branches; f has n - |kappa|
    assert np.count_nonzero(np.diff(np.sign(g))) == n - l - 1
    assert np.count_nonzero(np.diff(np.sign(f))) == n - abs(kappa)
    if kappa < 0:
        assert n - l - 1 == n - abs(kappa)


def test_small_component_vanishes_as_charge_drops():
    ratios = []
    for Z in (92, 40, 10, 1):
        p = radial_pair(6, -3, Z)
        from rydberg_precession.radial_integrals import overlap

        ratios.append(overlap(p, p, "f", "f", 64) / overlap(p, p, "g", "g", 64))
    assert all(b < a for a, b in zip(ratios, ratios[1:]))
    assert ratios[-1] < 1e-5


def test_ground_state_closed_form_dirac():
    Z = 92
    p = radial_pair(1, -1, Z)
    e = exact_energy(1, -1, Z)
    g0 = math.sqrt(1 - (Z * ALPHA) ** 2)
    log_n = 0.5 * (3 * math.log(2 * Z) - math.log(2) - gammaln(2 * g0 + 1))
    r = np.linspace(0.001, 0.2, 30)
    base = np.exp(log_n + (g0 - 1) * np.log(2 * Z * r) - Z * r)
    g, f = p.gf(r)
    assert np.allclose(g, math.sqrt(1 + e) * base, rtol=1e-11)
    assert np.allclose(np.abs(f), math.sqrt(1 - e) * base, rtol=1e-11)


@pytest.mark.parametrize("l,s", [(44, 1), (44, -1), (30, 1)])
def test_nonrelativistic_limit_at_high_n(l, s):
    n = 50
    p = radial_pair(n, kappa_of(l, s), 1)
    R = nonrel_radial(n, l, 1)
    ecc = math.sqrt(1 - l * (l + 1) / n**2)
    r = np.linspace(n * n * (1 - ecc), n * n * (1 + ecc), 3000)
    g, ref = p.g(r), R(r)
    mask = np.abs(ref) > 0.05 * np.abs(ref).max()
    assert np.max(np.abs(g - ref)[mask] / np.abs(ref)[mask]) < 1e-5


def test_nonrel_ground_state_and_moments():
    R = nonrel_radial(1, 0, 1)
    r = np.linspace(0.01, 5, 10)
    assert np.allclose(R(r), 2 * np.exp(-r), rtol=1e-14)
    for n, l, Z in [(3, 1, 1), (6, 2, 5), (10, 9, 2)]:
        R = nonrel_radial(n, l, Z)
        upper = 60 * n * n / Z
        norm = quad(lambda x: R(x) ** 2 * x * x, 0, upper, epsabs=1e-15, limit=400)[0]
        mean = quad(lambda x: R(x) ** 2 * x**3, 0, upper, epsabs=1e-15, limit=400)[0]
        assert norm == pytest.approx(1.0, abs=1e-12)
        assert mean == pytest.approx((3 * n * n - l * (l + 1)) / (2 * Z), rel=1e-10)
        grid = np.linspace(1e-3, upper, 100001)
        assert np.count_nonzero(np.diff(np.sign(R(grid)[np.abs(R(grid)) > 1e-300]))) == n - l - 1
