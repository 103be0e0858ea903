"""How well the harmonic approximation describes the exact k = 0 spectrum."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import mpmath
import numpy as np

from .eigen import Spectrum, junction_spectrum
from .errors import InvalidParameterError, NumericalFailure
from .model import (
    ChargeGrid,
    JunctionParams,
    RealSymmetricBandMatrix,
    SpinSector,
    build_hamiltonian,
    gauge_transform,
    well_parameters,
)
from .variational import ha_spectrum, trial_wavefunction

PAIR_FRACTION = 0.1
DEFAULT_FRAC = 0.25


@dataclass(frozen=True)
class DeviationRow:
    m: int
    indices: tuple[int, ...]
    e_num: float
    e_ha: float
    abs_dev: float
    rel_dev: float
    splitting: float


@dataclass(frozen=True)
class DeviationTable:
    """Per-level comparison; ``rel_dev`` is ``abs_dev`` in units of omega."""

    rows: tuple[DeviationRow, ...]
    omega: float


@dataclass(frozen=True)
class Threshold:
    m: int
    energy: float
    frac: float


@dataclass(frozen=True)
class FidelityReport:
    """``fidelity[m]``: span fidelity of level m; ``state_overlaps[m]``: weight
    of each numerical state of level m inside span{psi_L, psi_R}."""

    fidelity: tuple[float, ...]
    state_overlaps: tuple[tuple[float, ...], ...]


@dataclass(frozen=True)
class ConvergenceTable:
    n_max: tuple[float, ...]
    energies: np.ndarray
    drift: np.ndarray = field(repr=False)


def pair_levels(energies, omega: float, m_count: int) -> list[tuple[int, ...]]:
    """Group ascending levels into doublets when split by less than 0.1 omega."""
    e = np.asarray(energies)
    groups = []
    i = 0
    while len(groups) < m_count:
        if i + 1 < len(e) and e[i + 1] - e[i] < PAIR_FRACTION * omega:
            groups.append((i, i + 1))
            i += 2
        elif i < len(e):
            groups.append((i,))
            i += 1
        else:
            raise InvalidParameterError(f"spectrum has too few levels for m_count={m_count}")
    return groups


def compare_levels(energies, p: JunctionParams, m_count: int) -> DeviationTable:
    omega = well_parameters(p).omega
    e = np.asarray(energies, dtype=float)
    if len(e) < min(2 * m_count, len(e) + 1) or len(e) < m_count:
        raise InvalidParameterError("insufficient levels")
    rows = []
    for m, idx in enumerate(pair_levels(e, omega, m_count)):
        e_num = float(np.mean(e[list(idx)]))
        e_ha = ha_spectrum(p, m).energy
        dev = abs(e_num - e_ha)
        rows.append(
            DeviationRow(
                m=m,
                indices=idx,
                e_num=e_num,
                e_ha=e_ha,
                abs_dev=dev,
                rel_dev=dev / omega,
                splitting=float(e[idx[-1]] - e[idx[0]]) if len(idx) == 2 else math.nan,
            )
        )
    return DeviationTable(rows=tuple(rows), omega=omega)


def compare_spectra(num: Spectrum, p: JunctionParams, m_count: int) -> DeviationTable:
    if len(num) < 2 * m_count:
        raise InvalidParameterError(f"need at least {2 * m_count} levels, spectrum has {len(num)}")
    return compare_levels(num.eigenvalues, p, m_count)


def deviation_threshold(t: DeviationTable, frac: float = DEFAULT_FRAC) -> Threshold | None:
    """First level whose deviation exceeds frac * omega, or None."""
    for row in t.rows:
        if row.abs_dev > frac * t.omega:
            return Threshold(m=row.m, energy=row.e_num, frac=frac)
    return None


def doublet_splittings(num: Spectrum) -> list[tuple[int, float]]:
    """E_{2m+1} - E_{2m} in double precision.

    Splittings below roughly 1e-15 ||H|| are rounding noise; see
    :func:`refined_splitting`.
    """
    e = num.eigenvalues
    return [(m, float(e[2 * m + 1] - e[2 * m])) for m in range(len(e) // 2)]


def _mp_rows(h: RealSymmetricBandMatrix) -> list[dict]:
    d = h.dimension
    rows = [dict() for _ in range(d)]
    for i in range(d):
        rows[i][i] = mpmath.mpf(float(h.diagonal[i]))
    for off, band in ((1, h.band1), (2, h.band2)):
        for i, v in enumerate(band):
            rows[i + off][i] = rows[i][i + off] = mpmath.mpf(float(v))
    return rows


def _banded_solve(rows: list[dict], sigma, rhs: list) -> list:
    """Solve (A - sigma) x = rhs by banded elimination with partial pivoting."""
    d = len(rows)
    a = [dict(r) for r in rows]
    for i in range(d):
        a[i][i] = a[i][i] - sigma
    b = list(rhs)
    for j in range(d):
        cand = [i for i in range(j, min(d, j + 3)) if a[i].get(j)]
        if not cand:
            raise NumericalFailure("singular shifted matrix in refinement", index=j)
        piv = max(cand, key=lambda i: abs(a[i][j]))
        if piv != j:
            a[j], a[piv] = a[piv], a[j]
            b[j], b[piv] = b[piv], b[j]
        for i in range(j + 1, min(d, j + 3)):
            aij = a[i].pop(j, 0)
            if aij:
                f = aij / a[j][j]
                for c, v in a[j].items():
                    if c > j:
                        a[i][c] = a[i].get(c, 0) - f * v
                b[i] -= f * b[j]
    x = [None] * d
    for i in range(d - 1, -1, -1):
        s = b[i] - mpmath.fsum(v * x[c] for c, v in a[i].items() if c > i)
        x[i] = s / a[i][i]
    return x


def refined_splitting(
    p: JunctionParams,
    n_max: float,
    m: int = 0,
    sector=SpinSector.PLUS,
    dps: int = 50,
    max_iter: int = 20,
) -> float:
    """Splitting of doublet m resolved beyond double precision.

    Block inverse iteration in ``dps``-digit arithmetic on the two
    double-precision eigenvectors, shifted next to the doublet, followed by a
    2x2 Rayleigh-Ritz step.  The eigenvalue difference is taken as
    sqrt((a - c)^2 + 4 b^2) of the Ritz matrix, free of cancellation.
    """
    g = ChargeGrid(n_max)
    h = gauge_transform(build_hamiltonian(p, g, sector), g)
    spec = junction_spectrum(p, g, sector)
    e = spec.eigenvalues
    lo, hi = 2 * m, 2 * m + 1
    if hi >= len(e):
        raise InvalidParameterError(f"doublet {m} is outside the spectrum")
    others = np.delete(e, [lo, hi])
    mean = 0.5 * (e[lo] + e[hi])
    gap = float(np.min(np.abs(others - mean))) if len(others) else 1.0
    with mpmath.workdps(dps):
        rows = _mp_rows(h)
        sigma = mpmath.mpf(float(mean)) + mpmath.mpf(1e-8) * gap
        q = [[mpmath.mpf(float(x)) for x in spec.eigenvectors[:, j]] for j in (lo, hi)]
        previous = None
        scale = max(float(np.max(np.abs(h.diagonal))), float(np.max(np.abs(h.band2), initial=0.0)), 1.0)
        tol = mpmath.mpf(10) ** (-(dps - 15)) * scale
        for _ in range(max_iter):
            q = [_banded_solve(rows, sigma, v) for v in q]
            n0 = mpmath.sqrt(mpmath.fsum(x * x for x in q[0]))
            q[0] = [x / n0 for x in q[0]]
            proj = mpmath.fsum(x * y for x, y in zip(q[0], q[1]))
            q[1] = [y - proj * x for x, y in zip(q[0], q[1])]
            n1 = mpmath.sqrt(mpmath.fsum(x * x for x in q[1]))
            q[1] = [x / n1 for x in q[1]]
            aq = [[mpmath.fsum(v * vec[c] for c, v in rows[i].items()) for i in range(len(rows))] for vec in q]
            a = mpmath.fsum(x * y for x, y in zip(q[0], aq[0]))
            c = mpmath.fsum(x * y for x, y in zip(q[1], aq[1]))
            b = mpmath.fsum(x * y for x, y in zip(q[0], aq[1]))
            split = mpmath.sqrt((a - c) ** 2 + 4 * b * b)
            if previous is not None and abs(split - previous) <= tol:
                return float(split)
            previous = split
    raise NumericalFailure(f"splitting refinement did not converge for doublet {m}", index=m)


def _orthonormal_columns(x: np.ndarray, rank_tol: float = 1e-10) -> np.ndarray:
    """Symmetric (Loewdin) orthonormalization; drops to the first column if rank deficient."""
    gram = x.conj().T @ x
    w, u = np.linalg.eigh(gram)
    if w.min() <= rank_tol * w.max():
        first = x[:, :1]
        return first / np.linalg.norm(first)
    return x @ (u @ np.diag(w**-0.5) @ u.conj().T)


def _as_columns(v) -> np.ndarray:
    v = np.asarray(v)
    return v[:, None] if v.ndim == 1 else v


def subspace_fidelity(num_vectors, trial_vectors) -> float:
    """Mean squared cosine of the principal angles between two spans.

    Numerical vectors are assumed orthonormal.  The trial vectors are
    symmetrically orthonormalized; a rank-deficient trial set reduces to its
    first vector, which gives the 1-D overlap.
    """
    num = _as_columns(num_vectors)
    trial = _orthonormal_columns(_as_columns(trial_vectors))
    s = np.linalg.svd(num.conj().T @ trial, compute_uv=False)
    return float(np.clip(np.mean(s**2), 0.0, 1.0))


def state_overlaps(num_vectors, trial_vectors) -> tuple[float, ...]:
    """Weight of each numerical vector inside the trial span."""
    num = _as_columns(num_vectors)
    trial = _orthonormal_columns(_as_columns(trial_vectors))
    w = np.linalg.norm(trial.conj().T @ num, axis=0) ** 2
    return tuple(float(x) for x in np.clip(w, 0.0, 1.0))


def trial_pair(p: JunctionParams, m: int, g: ChargeGrid, sector=SpinSector.PLUS) -> np.ndarray:
    return np.stack(
        [trial_wavefunction(p, m, side, g, sector).amplitudes for side in ("L", "R")],
        axis=1,
    )


def fidelity_report(
    p: JunctionParams, num: Spectrum, g: ChargeGrid, m_count: int, sector=SpinSector.PLUS
) -> FidelityReport:
    """Compare each paired numerical level with span{psi_L, psi_R} of level m."""
    table = compare_spectra(num, p, m_count)
    vectors = num.charge_vectors
    fid, ovl = [], []
    for row in table.rows:
        nv = vectors[:, list(row.indices)]
        tv = trial_pair(p, row.m, g, sector)
        fid.append(subspace_fidelity(nv, tv))
        ovl.append(state_overlaps(nv, tv))
    return FidelityReport(fidelity=tuple(fid), state_overlaps=tuple(ovl))


def convergence_study(p: JunctionParams, n_max_list, level_count: int, sector=SpinSector.PLUS) -> ConvergenceTable:
    """Lowest ``level_count`` eigenvalues per cutoff and their drift between cutoffs."""
    cutoffs = tuple(n_max_list)
    if list(cutoffs) != sorted(cutoffs):
        raise InvalidParameterError("n_max list must be ascending")
    energies = []
    for n_max in cutoffs:
        e = junction_spectrum(p, ChargeGrid(n_max), sector).eigenvalues
        if len(e) < level_count:
            raise InvalidParameterError(f"n_max={n_max} yields fewer than {level_count} levels")
        energies.append(e[:level_count])
    energies = np.array(energies)
    return ConvergenceTable(n_max=cutoffs, energies=energies, drift=np.abs(np.diff(energies, axis=0)))
