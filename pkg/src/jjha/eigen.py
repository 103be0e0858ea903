"""Real symmetric eigensolver: Householder reduction plus implicit-shift QL.

Self-contained so the exact-diagonalization results do not depend on a
particular LAPACK build.  Dense storage is used throughout; the matrices
here are at most a few hundred rows.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import NumericalFailure
from .model import (
    ChargeGrid,
    HermitianBandMatrix,
    JunctionParams,
    RealSymmetricBandMatrix,
    SpinSector,
    build_hamiltonian,
    gauge_transform,
)

EPS = np.finfo(float).eps
RESIDUAL_TOL = 1e-10


@dataclass(frozen=True)
class TridiagonalForm:
    """T = A M A^T with A = ``accumulator`` orthogonal."""

    diag: np.ndarray
    offdiag: np.ndarray
    accumulator: np.ndarray


@dataclass
class Spectrum:
    """Ascending eigenvalues with eigenvectors stored as columns.

    When produced from a gauge-transformed Hamiltonian the vectors are real
    and ``gauge_phases`` maps them back; ``charge_vectors`` gives the
    vectors in the original charge basis.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    metadata: dict = field(default_factory=dict)
    gauge_phases: np.ndarray | None = None

    def __len__(self):
        return len(self.eigenvalues)

    @property
    def charge_vectors(self) -> np.ndarray:
        if self.gauge_phases is None:
            return self.eigenvectors
        return np.conj(self.gauge_phases)[:, None] * self.eigenvectors


@dataclass(frozen=True)
class Diagnostics:
    max_residual: float
    max_orthonormality_defect: float
    matrix_norm: float

    def within(self, tol: float = RESIDUAL_TOL) -> bool:
        bound = tol * max(self.matrix_norm, 1.0)
        return self.max_residual <= bound and self.max_orthonormality_defect <= bound


def _dense(m) -> np.ndarray:
    if isinstance(m, (RealSymmetricBandMatrix, HermitianBandMatrix)):
        return m.dense()
    return np.asarray(m)


def tridiagonalize(m) -> TridiagonalForm:
    a = np.array(_dense(m), dtype=float)
    d = a.shape[0]
    if a.shape != (d, d):
        raise ValueError("matrix must be square")
    acc = np.eye(d)
    for j in range(d - 2):
        x = a[j + 1 :, j]
        tail = np.linalg.norm(x[1:])
        if tail == 0.0:
            continue
        alpha = -math.copysign(math.hypot(x[0], tail), x[0])
        v = x.copy()
        v[0] -= alpha
        beta = 2.0 / (v @ v)
        sub = a[j + 1 :, j + 1 :]
        p = beta * (sub @ v)
        w = p - (0.5 * beta * (p @ v)) * v
        sub -= np.outer(v, w) + np.outer(w, v)
        a[j + 1 :, j] = 0.0
        a[j, j + 1 :] = 0.0
        a[j + 1, j] = a[j, j + 1] = alpha
        acc[j + 1 :, :] -= beta * np.outer(v, v @ acc[j + 1 :, :])
    return TridiagonalForm(
        diag=np.diag(a).copy(),
        offdiag=np.diag(a, -1).copy(),
        accumulator=acc,
    )


def tridiag_eig(t: TridiagonalForm, max_sweeps: int | None = None) -> Spectrum:
    """All eigenpairs of a symmetric tridiagonal matrix.

    QL iteration with the Wilkinson shift taken from the leading 2x2 block of
    each unreduced segment.  Rotations are accumulated into the rows of the
    Householder accumulator so the result is expressed in the original basis.
    ``max_sweeps`` (default 50 d) bounds the total number of QL sweeps.
    """
    d = [float(x) for x in t.diag]
    n = len(d)
    e = [float(x) for x in t.offdiag] + [0.0]
    zt = np.array(t.accumulator, dtype=float, copy=True)
    budget = 50 * n if max_sweeps is None else max_sweeps
    sweeps = 0
    # off-diagonals are negligible relative to the matrix scale (tql2 style)
    scale = max((abs(a) + abs(b) for a, b in zip(d, e)), default=0.0)
    for l in range(n):
        while True:
            m = l
            while m < n - 1:
                if abs(e[m]) <= EPS * max(abs(d[m]) + abs(d[m + 1]), scale):
                    break
                m += 1
            if m == l:
                break
            sweeps += 1
            if sweeps > budget:
                raise NumericalFailure(f"QL iteration did not converge for eigenvalue {l}", index=l)
            g = (d[l + 1] - d[l]) / (2.0 * e[l])
            r = math.hypot(g, 1.0)
            g = d[m] - d[l] + e[l] / (g + math.copysign(r, g))
            s = c = 1.0
            p = 0.0
            underflow = False
            for i in range(m - 1, l - 1, -1):
                f = s * e[i]
                b = c * e[i]
                r = math.hypot(f, g)
                e[i + 1] = r
                if r == 0.0:
                    d[i + 1] -= p
                    e[m] = 0.0
                    underflow = True
                    break
                s = f / r
                c = g / r
                g = d[i + 1] - p
                r = (d[i] - g) * s + 2.0 * c * b
                p = s * r
                d[i + 1] = g + p
                g = c * r - b
                row_i, row_j = zt[i], zt[i + 1]
                tmp = row_j.copy()
                row_j *= c
                row_j += s * row_i
                row_i *= c
                row_i -= s * tmp
            if underflow:
                continue
            d[l] -= p
            e[l] = g
            e[m] = 0.0
    values = np.array(d)
    order = np.argsort(values, kind="stable")
    return Spectrum(values[order], zt[order].T.copy(), {"sweeps": sweeps})


def residuals(m, s: Spectrum) -> Diagnostics:
    """Largest eigen-residual ||M v - lambda v|| and orthonormality defect."""
    if isinstance(m, HermitianBandMatrix):
        a, v = m.dense(), s.charge_vectors
    else:
        a, v = _dense(m), s.eigenvectors
    lam = np.asarray(s.eigenvalues)
    res = np.linalg.norm(a @ v - v * lam[None, :], axis=0)
    gram = v.conj().T @ v
    defect = np.abs(gram - np.eye(gram.shape[0]))
    return Diagnostics(
        max_residual=float(res.max(initial=0.0)),
        max_orthonormality_defect=float(defect.max(initial=0.0)),
        matrix_norm=float(np.linalg.norm(a)),
    )


def eigh(m, max_sweeps: int | None = None, check: bool = True) -> Spectrum:
    """Full eigendecomposition of a real symmetric (band) matrix.

    Raises :class:`NumericalFailure` if the iteration budget runs out or,
    with ``check``, if the residual diagnostics exceed 1e-10 ||M||.
    """
    a = _dense(m)
    if a.shape[0] == 0:
        return Spectrum(np.zeros(0), np.zeros((0, 0)))
    if np.iscomplexobj(a):
        raise TypeError("eigh expects a real symmetric matrix; gauge-transform first")
    spec = tridiag_eig(tridiagonalize(a), max_sweeps=max_sweeps)
    if isinstance(m, RealSymmetricBandMatrix):
        spec.gauge_phases = np.array(m.gauge_phases)
    if check:
        diag = residuals(a, spec)
        spec.metadata["diagnostics"] = diag
        if not diag.within():
            raise NumericalFailure(
                f"eigen-residual check failed: residual {diag.max_residual:.3g}, "
                f"orthonormality {diag.max_orthonormality_defect:.3g}"
            )
    return spec


def junction_spectrum(p: JunctionParams, g: ChargeGrid, sector=SpinSector.PLUS) -> Spectrum:
    """Exact diagonalization of H^(sector) on grid ``g`` via the real gauge."""
    sector = SpinSector.parse(sector)
    spec = eigh(gauge_transform(build_hamiltonian(p, g, sector), g))
    spec.metadata.update(params=p, sector=int(sector), k=g.k, n_max=g.n_max)
    return spec
