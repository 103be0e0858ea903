"""Bloch bands E(k) over the zone 0 <= k < 1/2.

Every oscillator level of the harmonic approximation corresponds to two
Bloch branches here, one per well in the 4 pi unit cell.  ``bandwidth`` and
``band_gap`` therefore act on level m, meaning sorted branches 2m and 2m+1.
Widths are max - min over the sampled k points (no interpolation).
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .eigen import Spectrum, eigh
from .errors import InvalidParameterError, NumericalFailure
from .model import (
    ChargeGrid,
    JunctionParams,
    SpinSector,
    default_n_max,
    gauge_transform,
    hamiltonian_on_points,
)
from .variational import trial_wavefunction

HA_BANDWIDTH = 0.25
DEGENERACY_TOL = 1e-8


@dataclass
class BandStructure:
    """Sorted branch energies ``bands[j, i]`` at ``k_grid[i]``.

    ``hf[j, i]`` is the Hellmann-Feynman slope <2(n + k)> of branch j.
    ``tracking[i, j]`` is the sorted index at k_grid[i] of the band that is
    branch j at k_grid[0], followed by maximal eigenvector overlap;
    ``min_overlap[j]`` is the smallest adjacent-k overlap along that band,
    counting degenerate partners together.
    ``hf_integral[j]`` integrates hf over [0, 1/2] (trapezoid, endpoint 1/2
    included).
    """

    params: JunctionParams
    n_max: float
    k_grid: np.ndarray
    bands: np.ndarray
    hf: np.ndarray
    hf_integral: np.ndarray
    tracking: np.ndarray
    min_overlap: np.ndarray
    states: list | None = None

    @property
    def branch_count(self) -> int:
        return self.bands.shape[0]


def k_points(k_count: int) -> np.ndarray:
    """Uniform zone sampling {j / (2 k_count)}, j = 0 .. k_count - 1."""
    return np.arange(k_count) / (2.0 * k_count)


def hf_integrand(vector: np.ndarray, points: np.ndarray) -> float:
    """<dH/dk> = sum |v_n|^2 2 (n + k) for a normalized state on charges ``points``."""
    w = np.abs(np.asarray(vector)) ** 2
    return float(np.sum(w * 2 * np.asarray(points)) / np.sum(w))


def _solve_points(p: JunctionParams, charges: np.ndarray, k: float, sector) -> Spectrum:
    return eigh(gauge_transform(hamiltonian_on_points(p, charges + k, sector)))


def _k_task(args):
    p, charges, k, sector, keep = args
    try:
        spec = _solve_points(p, charges, k, sector)
    except NumericalFailure as exc:
        raise NumericalFailure(f"eigensolver failed at k={k}: {exc}", index=k) from exc
    vecs = spec.charge_vectors[:, :keep]
    hf = np.array([hf_integrand(vecs[:, j], charges + k) for j in range(keep)])
    return spec.eigenvalues[:keep], vecs, hf


def _overlaps(prev: np.ndarray, cur: np.ndarray, cur_energies: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Pairwise |<prev_i|cur_j>|^2 and the same summed over degenerate clusters of j."""
    ov = np.abs(prev.conj().T @ cur) ** 2
    scale = np.maximum(1.0, np.abs(cur_energies))
    near = np.abs(cur_energies[:, None] - cur_energies[None, :]) <= DEGENERACY_TOL * scale[:, None]
    return ov, ov @ near.T.astype(float)


def band_sweep(
    p: JunctionParams,
    n_max: float,
    m_count: int,
    k_count: int = 17,
    sector=SpinSector.PLUS,
    keep_states: bool = False,
    workers: int = 1,
) -> BandStructure:
    """Diagonalize H^k on the uniform k grid and keep 2 m_count + 2 branches."""
    if k_count < 2:
        raise InvalidParameterError("k_count must be at least 2")
    if m_count < 1:
        raise InvalidParameterError("m_count must be at least 1")
    sector = SpinSector.parse(sector)
    charges = ChargeGrid(n_max).charges
    keep = min(2 * m_count + 2, len(charges))
    ks = k_points(k_count)
    tasks = [(p, charges, float(k), sector, keep) for k in list(ks) + [0.5]]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_k_task, tasks))
    else:
        results = [_k_task(t) for t in tasks]

    energies = np.array([r[0] for r in results[:-1]]).T
    hf_all = np.array([r[2] for r in results]).T
    vectors = [r[1] for r in results[:-1]]

    kk = np.append(ks, 0.5)
    hf_integral = np.trapezoid(hf_all, kk, axis=1)

    tracking = np.zeros((k_count, keep), dtype=int)
    tracking[0] = np.arange(keep)
    min_overlap = np.ones(keep)
    for i in range(1, k_count):
        ov, cluster = _overlaps(vectors[i - 1], vectors[i], energies[:, i])
        rows, cols = linear_sum_assignment(-ov)
        step = np.empty(keep, dtype=int)
        step[rows] = cols
        prev = tracking[i - 1]
        tracking[i] = step[prev]
        min_overlap = np.minimum(min_overlap, cluster[prev, tracking[i]])

    return BandStructure(
        params=p,
        n_max=n_max,
        k_grid=ks,
        bands=energies,
        hf=hf_all[:, :-1],
        hf_integral=hf_integral,
        tracking=tracking,
        min_overlap=min_overlap,
        states=vectors if keep_states else None,
    )


def _level_branches(b: BandStructure, m: int, extra: int = 0) -> tuple[int, int]:
    if m < 0 or 2 * m + 1 + extra >= b.branch_count:
        raise InvalidParameterError(f"level {m} is outside the computed bands")
    return 2 * m, 2 * m + 1


def branch_width(b: BandStructure, j: int) -> float:
    if not 0 <= j < b.branch_count:
        raise InvalidParameterError(f"branch {j} is outside the computed bands")
    return float(np.ptp(b.bands[j]))


def bandwidth(b: BandStructure, m: int) -> float:
    """Energy spread of level m (branches 2m, 2m+1) across the sampled zone."""
    lo, hi = _level_branches(b, m)
    return float(b.bands[hi].max() - b.bands[lo].min())


def band_gap(b: BandStructure, m: int) -> float:
    """min_k E_{m+1}(k) - max_k E_m(k) for levels m and m+1."""
    _, hi = _level_branches(b, m, extra=1)
    return float(b.bands[hi + 1].min() - b.bands[hi].max())


def ha_bandwidth_estimate(p: JunctionParams, m: int = 0, n_max: float | None = None) -> float:
    """Zone integral of <2(n + k)> with the level-m trial state substituted.

    The trial density is even in n, so <n> cancels pairwise and the integrand
    is exactly 2k; the trapezoid rule is exact for it.
    """
    g = ChargeGrid(default_n_max(p.t) if n_max is None else n_max)
    psi = trial_wavefunction(p, m, "L", g)
    w = np.abs(psi.amplitudes) ** 2
    n = g.charges
    half = len(n) // 2
    # pairwise +n / -n cancellation of the odd moment
    mean_n = float(np.sum(n[half + 1 :] * (w[half + 1 :] - w[half - 1 :: -1]))) / float(np.sum(w))
    ends = np.array([0.0, 0.5])
    integrand = 2 * (mean_n + ends)
    return float(np.trapezoid(integrand, ends))
