"""Harmonic approximation from Gaussian-Hermite trial states in charge space.

A trial state of level m is

    phi_m(p) = N_m exp(-alpha^2 p^2 / 2 + i beta p) H_m(alpha p),
    N_m = sqrt(alpha / (sqrt(pi) 2^m m!)),

which in the phase representation is an oscillator eigenstate centred at
theta = -beta with width ~ alpha.  Because exp(i a theta) shifts the charge by
``a``, every potential term reduces to a displaced-oscillator overlap and the
energy is available in closed form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .errors import InvalidGridError, InvalidParameterError, NumericalFailure
from .model import ChargeGrid, JunctionParams, SpinSector, well_parameters
from .orthopoly import hermite_function, laguerre


@dataclass(frozen=True)
class VariationalParams:
    alpha: float
    beta: float
    m: int = 0
    closed_form: bool = False
    energy: float | None = None

    def __post_init__(self):
        if not self.alpha > 0:
            raise InvalidParameterError(f"alpha must be positive, got {self.alpha!r}")
        if self.m < 0:
            raise InvalidParameterError(f"level index must be >= 0, got {self.m!r}")


@dataclass(frozen=True)
class HaLevel:
    m: int
    energy: float


@dataclass(frozen=True)
class MatrixElements:
    """Diagonal and coupling coefficients of the trial-state Hamiltonian.

    ``A`` carries the factor T on the cos(beta) term; ``A_without_t`` is the
    variant without it, kept for comparison.  ``C`` adds the T' term to the
    T term; ``C_stationary`` subtracts it, which makes it equal dE/dbeta at
    m = 0 in this module's beta convention so it vanishes at the minimum.
    """

    A: float
    A_without_t: float
    B: float
    C: float
    C_stationary: float
    notes: tuple[str, ...] = ()


@dataclass(frozen=True)
class TrialWaveFunction:
    grid: ChargeGrid
    amplitudes: np.ndarray
    m: int
    well_phase: float
    norm_constant: float
    alpha: float
    raw_norm: float
    metadata: dict = field(default_factory=dict)


def _check_level(m: int) -> int:
    if int(m) != m or m < 0:
        raise InvalidParameterError(f"level index must be a non-negative integer, got {m!r}")
    return int(m)


def ha_parameters(p: JunctionParams) -> VariationalParams:
    """(alpha, beta) at which the off-diagonal couplings vanish to leading order."""
    p.require_harmonic_well()
    t, tp = p.t, p.t_prime
    return VariationalParams(
        alpha=(32 * t / (16 * t * t - tp * tp)) ** 0.25,
        beta=2 * math.asin(tp / (4 * t)),
        closed_form=True,
    )


def shift_expectation(m: int, a: float, alpha: float, beta: float) -> complex:
    """<phi_m| exp(i a theta) |phi_m> = exp(-i a beta - a^2 alpha^2/4) L_m(a^2 alpha^2 / 2)."""
    m = _check_level(m)
    if not alpha > 0:
        raise InvalidParameterError("alpha must be positive")
    x = a * a * alpha * alpha
    return complex(np.exp(-1j * a * beta) * math.exp(-x / 4) * laguerre(m, x / 2))


def energy_functional(p: JunctionParams, m: int, alpha: float, beta: float) -> float:
    """Expectation of H^(+) in the level-m trial state."""
    m = _check_level(m)
    if not alpha > 0:
        raise InvalidParameterError("alpha must be positive")
    a2 = alpha * alpha
    kinetic = (2 * m + 1) / (2 * a2)
    junction = p.t * math.cos(beta) * math.exp(-a2 / 4) * laguerre(m, a2 / 2)
    qubit = p.t_prime * math.sin(beta / 2) * math.exp(-a2 / 16) * laguerre(m, a2 / 8)
    return kinetic - junction - qubit


def abc_elements(p: JunctionParams, m: int, alpha: float, beta: float) -> MatrixElements:
    m = _check_level(m)
    if not alpha > 0:
        raise InvalidParameterError("alpha must be positive")
    t, tp = p.t, p.t_prime
    a2 = alpha * alpha
    e4, e16 = math.exp(-a2 / 4), math.exp(-a2 / 16)
    qubit = (m * a2 / 8 - 1) * tp * math.sin(beta / 2) * e16
    kinetic = (2 * m + 1) / (2 * a2)
    a_fixed = kinetic + (m * a2 * t / 2 - t * math.cos(beta)) * e4 + qubit
    a_without_t = kinetic + (m * a2 * t / 2 - math.cos(beta)) * e4 + qubit
    b = 1 / (2 * a2) - a2 / 16 * (4 * t * math.cos(beta) * e4 + tp * math.sin(beta / 2) * e16)
    c = t * math.sin(beta) * e4 + tp / 2 * math.cos(beta / 2) * e16
    c_stat = t * math.sin(beta) * e4 - tp / 2 * math.cos(beta / 2) * e16
    return MatrixElements(
        A=a_fixed,
        A_without_t=a_without_t,
        B=b,
        C=c,
        C_stationary=c_stat,
        notes=(
            "A: cos(beta) term multiplied by T; A_without_t drops that factor",
            "C: T' term enters with the sign opposite to the beta convention of A and B",
        ),
    )


def optimize_parameters(p: JunctionParams, m: int = 0, max_iter: int = 20000) -> VariationalParams:
    """Minimize the energy functional over (alpha, beta) for level m.

    Nelder-Mead from the closed-form point with a fixed initial simplex of
    size (0.1 alpha0, 0.1); stops when the simplex spans less than 1e-10 in
    the parameters and 1e-12 in energy.
    """
    m = _check_level(m)
    seed = ha_parameters(p)
    x0 = np.array([seed.alpha, seed.beta])
    simplex = np.array([x0, x0 + [0.1 * seed.alpha, 0.0], x0 + [0.0, 0.1]])

    def objective(x):
        if x[0] <= 0:
            return math.inf
        return energy_functional(p, m, x[0], x[1])

    res = minimize(
        objective,
        x0,
        method="Nelder-Mead",
        options={
            "initial_simplex": simplex,
            "xatol": 1e-10,
            "fatol": 1e-12,
            "maxiter": max_iter,
            "maxfev": 2 * max_iter,
        },
    )
    if not res.success:
        raise NumericalFailure(f"variational minimization failed for m={m}: {res.message}", index=m)
    return VariationalParams(alpha=float(res.x[0]), beta=float(res.x[1]), m=m, energy=float(res.fun))


def ha_spectrum(p: JunctionParams, m: int) -> HaLevel:
    """Oscillator level (m + 1/2) omega on top of the well depth."""
    m = _check_level(m)
    well = well_parameters(p)
    return HaLevel(m=m, energy=(m + 0.5) * well.omega + well.depth)


def trial_wavefunction(
    p: JunctionParams, m: int, well: str, g: ChargeGrid, sector=SpinSector.PLUS
) -> TrialWaveFunction:
    """Trial state of level m projected onto the k = 0 charges.

    ``well`` is "L" (phase factor exp(i n theta0)) or "R" (exp(i n (2 pi - theta0))),
    theta0 = 2 arcsin(T'/4T).  The Gaussian width is the closed-form alpha.
    Amplitudes are renormalized on the grid; ``raw_norm`` is the Riemann sum
    (1/2) sum |psi_n|^2 of the continuum-normalized amplitudes.  For the
    sigma_3 = -1 sector the amplitudes are mirrored, psi(n) -> psi(-n).
    """
    m = _check_level(m)
    if g.k != 0:
        raise InvalidGridError("trial wavefunctions are defined on the k = 0 grid only")
    side = well.upper()
    if side not in ("L", "R"):
        raise InvalidParameterError(f"well must be 'L' or 'R', got {well!r}")
    hp = ha_parameters(p)
    alpha, theta0 = hp.alpha, hp.beta
    phase = theta0 if side == "L" else 2 * math.pi - theta0
    n = g.charges
    raw = math.sqrt(alpha) * hermite_function(m, alpha * n) * np.exp(1j * n * phase)
    if SpinSector.parse(sector) is SpinSector.MINUS:
        raw = raw[::-1]
    weight = float(np.sum(np.abs(raw) ** 2))
    return TrialWaveFunction(
        grid=g,
        amplitudes=raw / math.sqrt(weight),
        m=m,
        well_phase=phase,
        norm_constant=math.sqrt(alpha / (math.sqrt(math.pi) * 2**m * math.factorial(m))),
        alpha=alpha,
        raw_norm=0.5 * weight,
        metadata={"alpha_interpretation": "alpha' taken as the closed-form alpha", "well": side},
    )
