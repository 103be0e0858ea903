import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from jjha import (
    ChargeGrid,
    InvalidGridError,
    InvalidParameterError,
    JunctionParams,
    NoHarmonicWellError,
    SpinSector,
    build_hamiltonian,
    energy_functional,
    ha_parameters,
    ha_spectrum,
    optimize_parameters,
    potential,
    trial_wavefunction,
)
from jjha.orthopoly import hermite_function
from jjha.variational import abc_elements, shift_expectation

P0 = JunctionParams(100, 0)
P60 = JunctionParams(100, 60)


def continuum_energy(p, m, alpha, beta):
    """<phi|n^2 + V|phi> in the phase representation, by quadrature."""
    def density(th):
        return hermite_function(m, (th + beta) / alpha) ** 2 / alpha

    lo, hi = -beta - 40 * alpha, -beta + 40 * alpha
    pot, _ = quad(lambda th: potential(p, th) * density(th), lo, hi, limit=400)
    return (2 * m + 1) / (2 * alpha**2) + pot


def test_closed_form_parameters_against_mpmath():
    for p in (P0, P60, JunctionParams(3.0, 11.0)):
        hp = ha_parameters(p)
        t, tp = mpmath.mpf(p.t), mpmath.mpf(p.t_prime)
        assert hp.alpha == pytest.approx(float((32 * t / (16 * t**2 - tp**2)) ** mpmath.mpf(0.25)), rel=1e-14)
        assert hp.beta == pytest.approx(float(2 * mpmath.asin(tp / (4 * t))), rel=1e-14, abs=1e-16)
        assert hp.closed_form


def test_closed_form_reference_values():
    assert ha_parameters(P0).alpha == pytest.approx(0.376060, abs=1e-6)
    assert ha_parameters(P0).beta == 0.0
    assert ha_parameters(P60).alpha == pytest.approx(0.378206, abs=1e-6)
    assert ha_parameters(P60).beta == pytest.approx(0.301137, abs=1e-6)


def test_closed_form_requires_well():
    with pytest.raises(NoHarmonicWellError):
        ha_parameters(JunctionParams(1, 4))


@pytest.mark.parametrize("m,a", [(0, 1.0), (0, 0.5), (2, 1.0), (3, 0.5), (1, 2.5)])
def test_shift_expectation_by_quadrature(m, a):
    alpha, beta = 0.6, 0.37

    def phi(q):
        return math.sqrt(alpha) * hermite_function(m, alpha * q) * np.exp(1j * beta * q)

    def integrand(q):
        return np.conj(phi(q)) * phi(q - a)

    re, _ = quad(lambda q: integrand(q).real, -80, 80, limit=400)
    im, _ = quad(lambda q: integrand(q).imag, -80, 80, limit=400)
    assert shift_expectation(m, a, alpha, beta) == pytest.approx(complex(re, im), abs=1e-10)


@pytest.mark.parametrize("p", [P0, P60])
@pytest.mark.parametrize("m", [0, 1, 3])
def test_energy_functional_against_quadrature(p, m):
    hp = ha_parameters(p)
    assert energy_functional(p, m, hp.alpha, hp.beta) == pytest.approx(continuum_energy(p, m, hp.alpha, hp.beta), abs=1e-9)
    assert energy_functional(p, m, 0.7, -0.4) == pytest.approx(continuum_energy(p, m, 0.7, -0.4), abs=1e-9)


@pytest.mark.parametrize("p", [P0, P60])
@pytest.mark.parametrize("m", [0, 2])
def test_energy_functional_equals_discrete_expectation(p, m):
    g = ChargeGrid(40)
    psi = trial_wavefunction(p, m, "L", g).amplitudes
    h = build_hamiltonian(p, g).dense()
    hp = ha_parameters(p)
    assert np.vdot(psi, h @ psi).real == pytest.approx(energy_functional(p, m, hp.alpha, hp.beta), abs=1e-10)


def test_energy_functional_frozen():
    hp = ha_parameters(P0)
    assert energy_functional(P0, 0, hp.alpha, hp.beta) == pytest.approx(-92.990702083, abs=1e-8)
    hp = ha_parameters(P60)
    assert energy_functional(P60, 0, hp.alpha, hp.beta) == pytest.approx(-97.569632850, abs=1e-8)


def test_energy_functional_rejects_bad_input():
    with pytest.raises(InvalidParameterError):
        energy_functional(P0, 0, 0.0, 0.0)
    with pytest.raises(InvalidParameterError):
        energy_functional(P0, -1, 1.0, 0.0)


def test_ha_spectrum_closed_form():
    omega = math.sqrt((16e4 - 3600) / 800)
    for m in range(5):
        assert ha_spectrum(P60, m).energy == pytest.approx((m + 0.5) * omega - 100 - 3600 / 800, abs=1e-12)
    assert ha_spectrum(P0, 0).energy == pytest.approx(math.sqrt(200) / 2 - 100, abs=1e-12)


def test_optimizer_reaches_stationary_point():
    for p in (P0, P60):
        opt = optimize_parameters(p)
        h = 1e-5
        for da, db in ((h, 0), (0, h)):
            grad = (energy_functional(p, 0, opt.alpha + da, opt.beta + db) - energy_functional(p, 0, opt.alpha - da, opt.beta - db)) / (2 * h)
            assert abs(grad) < 1e-5
        assert opt.energy <= energy_functional(p, 0, *(lambda s: (s.alpha, s.beta))(ha_parameters(p))) + 1e-12
        # exact stationarity in beta at m = 0
        assert math.sin(opt.beta / 2) == pytest.approx(p.t_prime / (4 * p.t) * math.exp(3 * opt.alpha**2 / 16), abs=1e-8)


def test_optimizer_frozen_values():
    opt = optimize_parameters(P60)
    assert opt.alpha == pytest.approx(0.381791, abs=2e-6)
    assert opt.beta == pytest.approx(0.309547, abs=2e-6)
    assert opt.energy == pytest.approx(-97.574040, abs=2e-6)
    opt0 = optimize_parameters(P0)
    assert abs(opt0.beta) < 1e-8
    assert opt0.alpha == pytest.approx(0.379460, abs=2e-6)


def test_matrix_elements():
    for p in (P0, P60):
        hp = ha_parameters(p)
        el = abc_elements(p, 0, hp.alpha, hp.beta)
        h = 1e-6
        d_beta = (energy_functional(p, 0, hp.alpha, hp.beta + h) - energy_functional(p, 0, hp.alpha, hp.beta - h)) / (2 * h)
        assert el.C_stationary == pytest.approx(d_beta, abs=1e-6)
        # A carries the energy functional at m = 0 (not the variant without the factor T)
        assert el.A == pytest.approx(energy_functional(p, 0, hp.alpha, hp.beta), abs=1e-12)
        assert el.A != pytest.approx(el.A_without_t)
    el0 = abc_elements(P0, 0, *(lambda s: (s.alpha, s.beta))(ha_parameters(P0)))
    assert el0.C == 0.0 and el0.C_stationary == 0.0
    assert el0.B == pytest.approx(0.122816104, abs=1e-8)


@pytest.mark.parametrize("m", [0, 1, 5])
def test_trial_normalization_and_riemann_norm(m):
    g = ChargeGrid(40)
    psi = trial_wavefunction(P60, m, "L", g)
    assert np.linalg.norm(psi.amplitudes) == pytest.approx(1.0, abs=1e-14)
    assert psi.raw_norm == pytest.approx(1.0, abs=1e-9)
    assert psi.norm_constant == pytest.approx(math.sqrt(psi.alpha / (math.sqrt(math.pi) * 2**m * math.factorial(m))), rel=1e-14)


def test_trial_wells_and_mirror():
    g = ChargeGrid(20)
    left = trial_wavefunction(P60, 0, "L", g)
    right = trial_wavefunction(P60, 0, "r", g)
    assert left.well_phase == pytest.approx(0.301137, abs=1e-6)
    assert right.well_phase == pytest.approx(2 * math.pi - 0.301137, abs=1e-6)
    assert np.allclose(np.abs(left.amplitudes), np.abs(right.amplitudes))
    minus = trial_wavefunction(P60, 0, "L", g, SpinSector.MINUS)
    assert np.array_equal(minus.amplitudes, left.amplitudes[::-1])


def test_trial_state_rejections():
    with pytest.raises(InvalidGridError):
        trial_wavefunction(P0, 0, "L", ChargeGrid(10, 0.25))
    with pytest.raises(InvalidParameterError):
        trial_wavefunction(P0, 0, "X", ChargeGrid(10))


@settings(max_examples=30, deadline=None)
@given(st.floats(0.2, 3.0), st.floats(-3, 3), st.integers(0, 6), st.floats(-4, 4))
def test_shift_expectation_modulus_bounded(alpha, beta, m, a):
    assert abs(shift_expectation(m, a, alpha, beta)) <= 1 + 1e-12
    assert shift_expectation(m, 0.0, alpha, beta) == pytest.approx(1.0)


def test_energy_functional_free_and_periodic():
    free = JunctionParams(0, 0)
    for m in range(4):
        assert energy_functional(free, m, 0.8, 1.3) == pytest.approx((2 * m + 1) / (2 * 0.64), abs=1e-15)
    for m in (0, 2):
        assert energy_functional(P60, m, 0.4, 0.2 + 4 * math.pi) == pytest.approx(energy_functional(P60, m, 0.4, 0.2), abs=1e-12)


def test_shift_expectation_reference_point():
    # m = 2, a = 1, alpha = 0.3, beta = 0 against quadrature
    alpha = 0.3

    def integrand(q):
        return alpha * hermite_function(2, alpha * q) * hermite_function(2, alpha * (q - 1))

    val, _ = quad(integrand, -200, 200, limit=400)
    assert shift_expectation(2, 1.0, alpha, 0.0) == pytest.approx(val, abs=1e-10)
    assert shift_expectation(0, 0.5, 0.5, 0.3) == pytest.approx(np.exp(-0.15j) * math.exp(-0.25 / 16), abs=1e-15)


def test_matrix_element_magnitudes_at_closed_form_point():
    hp = ha_parameters(P60)
    el = abc_elements(P60, 0, hp.alpha, hp.beta)
    # residual curvature term left by dropping the exponential factors
    assert el.B == pytest.approx(0.120681112, abs=1e-8)
    assert abs(el.C_stationary) <= 0.02 * P60.t_prime
    assert el.C_stationary == pytest.approx(-0.777936375, abs=1e-8)


def test_optimized_beta_offset_from_closed_form():
    opt = optimize_parameters(P60)
    assert math.sin(opt.beta / 2) / 0.15 - 1 == pytest.approx(0.0277, abs=5e-4)
