"""Junction Hamiltonian in the half-integer charge basis.

The phase operator obeys [theta, n] = i, so exp(i a theta) raises the charge by
``a``.  With charges n = 0, +-1/2, +-1, ... the operator

    H = n^2 - T cos(theta) + s T' sin(theta/2),    s = +-1 (sigma_3 sector)

has nearest-neighbour (step 1/2) hopping from the qubit term and
next-nearest (step 1) hopping from the junction term.  Basis states are
ordered by ascending charge, and the step-1/2 band is stored as the lower
diagonal ``H[i+1, i] = <n_i + 1/2| H |n_i> = -i s T'/2``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidGridError, InvalidParameterError, NoHarmonicWellError


class SpinSector(enum.IntEnum):
    """Eigenvalue of sigma_3 selecting the diagonal block H^(+) or H^(-)."""

    PLUS = 1
    MINUS = -1

    @classmethod
    def parse(cls, value) -> "SpinSector":
        if isinstance(value, cls):
            return value
        if isinstance(value, str):
            key = value.strip().lower()
            if key in ("+", "+1", "1", "plus"):
                return cls.PLUS
            if key in ("-", "-1", "minus"):
                return cls.MINUS
        elif value in (1, -1):
            return cls(int(value))
        raise InvalidParameterError(f"sector must be +1 or -1, got {value!r}")


@dataclass(frozen=True)
class CircuitParams:
    """Charging and Josephson energies of the circuit (common energy unit)."""

    e_c: float
    e_j: float
    e_j_prime: float

    def __post_init__(self):
        for name in ("e_c", "e_j", "e_j_prime"):
            value = getattr(self, name)
            if not (value > 0 and math.isfinite(value)):
                raise InvalidParameterError(f"{name} must be positive, got {value!r}")


@dataclass(frozen=True)
class JunctionParams:
    """Dimensionless couplings T = E_J/E_c and T' = E_J'/E_c.

    ``t = 0`` is accepted so the free-charge limit can be built; routines
    that need a harmonic well check ``0 < t`` and ``t_prime < 4 t`` themselves.
    """

    t: float
    t_prime: float = 0.0

    def __post_init__(self):
        if not (self.t >= 0 and math.isfinite(self.t)):
            raise InvalidParameterError(f"t must be non-negative, got {self.t!r}")
        if not (self.t_prime >= 0 and math.isfinite(self.t_prime)):
            raise InvalidParameterError(f"t_prime must be non-negative, got {self.t_prime!r}")

    @property
    def has_harmonic_well(self) -> bool:
        return self.t > 0 and self.t_prime < 4 * self.t

    def require_harmonic_well(self) -> None:
        if not self.has_harmonic_well:
            raise NoHarmonicWellError(
                f"no harmonic well for t={self.t!r}, t_prime={self.t_prime!r} "
                "(requires 0 < t and t_prime < 4 t)"
            )


def reduce_circuit(c: CircuitParams) -> JunctionParams:
    """Express the junction and qubit couplings in units of the charging energy."""
    return JunctionParams(t=c.e_j / c.e_c, t_prime=c.e_j_prime / c.e_c)


def default_n_max(t: float) -> int:
    """Charge cutoff ceil(4 sqrt(T)), at least 1."""
    return max(1, math.ceil(4 * math.sqrt(t)))


@dataclass(frozen=True)
class ChargeGrid:
    """Charges n + k for n in {-n_max, -n_max + 1/2, ..., n_max}.

    ``n_max`` may be any positive multiple of 1/2; the dimension is
    ``4 n_max + 1``.
    """

    n_max: float
    k: float = 0.0

    def __post_init__(self):
        twice = 2 * self.n_max
        if not (self.n_max > 0 and abs(twice - round(twice)) < 1e-12):
            raise InvalidGridError(f"n_max must be a positive multiple of 1/2, got {self.n_max!r}")
        if not (0 <= self.k < 0.5):
            raise InvalidGridError(f"Bloch offset k must lie in [0, 1/2), got {self.k!r}")

    @property
    def dimension(self) -> int:
        return int(round(4 * self.n_max)) + 1

    @property
    def charges(self) -> np.ndarray:
        """Lattice charges n (without the Bloch offset)."""
        return -self.n_max + 0.5 * np.arange(self.dimension)

    @property
    def points(self) -> np.ndarray:
        return self.charges + self.k


def potential(p: JunctionParams, theta, sector=SpinSector.PLUS):
    """V(theta) = -T cos(theta) + s T' sin(theta/2); period 4 pi."""
    s = int(SpinSector.parse(sector))
    theta = np.asarray(theta, dtype=float)
    v = -p.t * np.cos(theta) + s * p.t_prime * np.sin(theta / 2)
    return v if v.ndim else float(v)


@dataclass(frozen=True)
class WellInfo:
    """Two inequivalent minima per 4 pi period and their harmonic expansion.

    ``theta_minima`` lie in [-pi, 3 pi); ``curvature_coeff`` is half the
    second derivative of the potential at either minimum.
    """

    theta_minima: tuple[float, float]
    curvature_coeff: float
    depth: float
    omega: float


def well_parameters(p: JunctionParams, sector=SpinSector.PLUS) -> WellInfo:
    p.require_harmonic_well()
    s = int(SpinSector.parse(sector))
    t, tp = p.t, p.t_prime
    # dV/dtheta = cos(theta/2) (2 T sin(theta/2) + s T'/2); minima sit on the second factor
    half = math.asin(-s * tp / (4 * t))
    minima = []
    for theta in (2 * half, 2 * math.pi - 2 * half):
        minima.append((theta + math.pi) % (4 * math.pi) - math.pi)
    minima.sort()
    curvature = (16 * t * t - tp * tp) / (32 * t)
    return WellInfo(
        theta_minima=(minima[0], minima[1]),
        curvature_coeff=curvature,
        depth=-(8 * t * t + tp * tp) / (8 * t),
        omega=math.sqrt((16 * t * t - tp * tp) / (8 * t)),
    )


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class HermitianBandMatrix:
    """Hermitian matrix with bands at offsets 0, 1, 2.

    ``band1[i] = H[i+1, i]`` (complex) and ``band2[i] = H[i+2, i]`` (real);
    the upper triangle follows by conjugation.
    """

    diagonal: np.ndarray
    band1: np.ndarray
    band2: np.ndarray

    def __post_init__(self):
        d = len(self.diagonal)
        if len(self.band1) != max(d - 1, 0) or len(self.band2) != max(d - 2, 0):
            raise InvalidParameterError("band lengths do not match the dimension")
        object.__setattr__(self, "diagonal", _frozen(np.asarray(self.diagonal, dtype=float)))
        object.__setattr__(self, "band1", _frozen(np.asarray(self.band1, dtype=complex)))
        object.__setattr__(self, "band2", _frozen(np.asarray(self.band2, dtype=float)))

    @property
    def dimension(self) -> int:
        return len(self.diagonal)

    def dense(self) -> np.ndarray:
        d = self.dimension
        h = np.diag(self.diagonal.astype(complex))
        i = np.arange(d - 1)
        h[i + 1, i] = self.band1
        h[i, i + 1] = np.conj(self.band1)
        j = np.arange(d - 2)
        h[j + 2, j] = self.band2
        h[j, j + 2] = self.band2
        return h


@dataclass(frozen=True)
class RealSymmetricBandMatrix:
    """Real symmetric counterpart of a :class:`HermitianBandMatrix`.

    ``gauge_phases[i] = u_i`` defines U = diag(u) with the real matrix equal
    to U H U^dagger; an eigenvector v of the real matrix maps back to
    conj(u) * v in the original basis.
    """

    diagonal: np.ndarray
    band1: np.ndarray
    band2: np.ndarray
    gauge_phases: np.ndarray = field(default=None)

    def __post_init__(self):
        d = len(self.diagonal)
        if len(self.band1) != max(d - 1, 0) or len(self.band2) != max(d - 2, 0):
            raise InvalidParameterError("band lengths do not match the dimension")
        phases = np.ones(d, dtype=complex) if self.gauge_phases is None else self.gauge_phases
        phases = np.asarray(phases, dtype=complex)
        if phases.shape != (d,) or not np.allclose(np.abs(phases), 1.0, rtol=0, atol=1e-14):
            raise InvalidParameterError("gauge phases must be d unit-modulus numbers")
        object.__setattr__(self, "diagonal", _frozen(np.asarray(self.diagonal, dtype=float)))
        object.__setattr__(self, "band1", _frozen(np.asarray(self.band1, dtype=float)))
        object.__setattr__(self, "band2", _frozen(np.asarray(self.band2, dtype=float)))
        object.__setattr__(self, "gauge_phases", _frozen(phases))

    @property
    def dimension(self) -> int:
        return len(self.diagonal)

    def dense(self) -> np.ndarray:
        d = self.dimension
        m = np.diag(self.diagonal)
        i = np.arange(d - 1)
        m[i + 1, i] = m[i, i + 1] = self.band1
        j = np.arange(d - 2)
        m[j + 2, j] = m[j, j + 2] = self.band2
        return m

    def to_charge_basis(self, vectors: np.ndarray) -> np.ndarray:
        """Map eigenvectors (columns) back to the original charge basis."""
        return np.conj(self.gauge_phases)[:, None] * np.asarray(vectors)


def hamiltonian_on_points(p: JunctionParams, points, sector=SpinSector.PLUS) -> HermitianBandMatrix:
    """Band matrix on an explicit ascending list of charges with step 1/2."""
    s = int(SpinSector.parse(sector))
    points = np.asarray(points, dtype=float)
    d = len(points)
    if d > 1 and not np.allclose(np.diff(points), 0.5, rtol=0, atol=1e-12):
        raise InvalidGridError("charges must be ascending with uniform step 1/2")
    return HermitianBandMatrix(
        diagonal=points**2,
        band1=np.full(max(d - 1, 0), -0.5j * s * p.t_prime),
        band2=np.full(max(d - 2, 0), -0.5 * p.t),
    )


def build_hamiltonian(p: JunctionParams, g: ChargeGrid, s=SpinSector.PLUS) -> HermitianBandMatrix:
    return hamiltonian_on_points(p, g.points, s)


def gauge_transform(h: HermitianBandMatrix, g: ChargeGrid | None = None) -> RealSymmetricBandMatrix:
    """Re-phase |n> by exp(i pi n) so both hopping bands become real.

    Only the charge differences matter, so the phases are taken relative to
    the first basis state when no grid is given.
    """
    d = h.dimension
    if g is not None:
        if g.dimension != d:
            raise InvalidGridError("grid dimension does not match the matrix")
        charges = g.charges
    else:
        charges = 0.5 * np.arange(d)
    u = np.exp(1j * np.pi * charges)
    b1 = u[1:] * h.band1 * np.conj(u[:-1])
    b2 = u[2:] * h.band2 * np.conj(u[:-2])
    scale = max(1.0, float(np.max(np.abs(h.band1), initial=0.0)), float(np.max(np.abs(h.band2), initial=0.0)))
    if np.max(np.abs(b1.imag), initial=0.0) > 1e-12 * scale or np.max(np.abs(b2.imag), initial=0.0) > 1e-12 * scale:
        raise InvalidParameterError("matrix bands are not of the junction form; gauge cannot make them real")
    return RealSymmetricBandMatrix(h.diagonal, b1.real, b2.real, u)
