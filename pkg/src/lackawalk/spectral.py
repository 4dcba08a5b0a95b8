"""Discriminant spectra and the spectral hitting-time quantities built on them.

Every sum over eigenvalues is taken per eigenspace, through the squared norm
of the projection of sqrt(pi-bar), so results do not depend on the basis the
eigensolver picks inside a degenerate eigenspace.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels

DEGENERACY_TOL = 1e-9
UNIT_TOL = 1e-10
SIGN_TIE_TOL = 1e-12


class SpectralError(ValueError):
    pass


def discriminant(m: np.ndarray) -> np.ndarray:
    """Entry-wise ``sqrt(M * M^T)``; symmetric bit for bit."""
    return np.sqrt(m * m.T)


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Eigensystem of a symmetric matrix.

    ``eigenvalues`` ascend, ``eigenvectors[:, k]`` is the k-th eigenvector,
    ``groups`` lists ``(start, stop)`` index ranges of numerically degenerate
    eigenvalues and ``unit_group`` is the position in ``groups`` of the
    eigenvalue-1 eigenspace, if any.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    groups: tuple
    unit_group: int | None

    @property
    def angles(self) -> np.ndarray:
        return np.arccos(np.clip(self.eigenvalues, -1.0, 1.0))

    @property
    def size(self) -> int:
        return self.eigenvalues.shape[0]

    def group_values(self) -> np.ndarray:
        return np.array([self.eigenvalues[a:b].mean() for a, b in self.groups])

    def basis(self, g: int) -> np.ndarray:
        a, b = self.groups[g]
        return self.eigenvectors[:, a:b]


def _group(values: np.ndarray, tol: float) -> tuple:
    groups, start = [], 0
    for k in range(1, len(values) + 1):
        if k == len(values) or values[k] - values[k - 1] >= tol:
            groups.append((start, k))
            start = k
    return tuple(groups)


def _fix_signs(vecs: np.ndarray) -> np.ndarray:
    """Make the largest-magnitude entry of each column positive (lowest index wins ties)."""
    mags = np.abs(vecs)
    top = mags.max(axis=0)
    lead = np.argmax(mags >= top - SIGN_TIE_TOL, axis=0)
    signs = np.where(vecs[lead, np.arange(vecs.shape[1])] < 0, -1.0, 1.0)
    return vecs * signs


def build_spectrum(eigenvalues: np.ndarray, eigenvectors: np.ndarray, tol: float = DEGENERACY_TOL) -> Spectrum:
    groups = _group(eigenvalues, tol)
    unit = None
    for gi, (a, b) in enumerate(groups):
        if abs(eigenvalues[a:b].mean() - 1.0) < UNIT_TOL:
            unit = gi
    return Spectrum(eigenvalues, eigenvectors, groups, unit)


def eigendecompose(d: np.ndarray, tol: float = DEGENERACY_TOL) -> Spectrum:
    """Householder tridiagonalization followed by implicit-shift QL."""
    d = np.asarray(d, dtype=np.float64)
    n = d.shape[0]
    if d.shape != (n, n):
        raise SpectralError(f"expected a square matrix, got {d.shape}")
    if np.max(np.abs(d - d.T), initial=0.0) > 1e-12 * max(1.0, np.max(np.abs(d), initial=0.0)):
        raise SpectralError("matrix is not symmetric")
    diag, sub, q = kernels.tridiagonalize(d)
    values, vecs, converged = kernels.ql_implicit(diag, sub, q, 50 * n)
    if not converged:
        raise SpectralError(f"QL iteration did not converge within {50 * n} sweeps")
    return build_spectrum(values, _fix_signs(vecs), tol)


@dataclass(frozen=True)
class OverlapDecomposition:
    alphas: np.ndarray
    group_values: np.ndarray
    group_overlaps: np.ndarray


def _sqrt_dist(pibar) -> np.ndarray:
    pibar = np.asarray(pibar, dtype=np.float64)
    if np.any(pibar < 0) or abs(pibar.sum() - 1.0) > 1e-12:
        raise SpectralError("pibar must be a probability distribution")
    return np.sqrt(pibar)


def overlap_decomposition(spec: Spectrum, pibar) -> OverlapDecomposition:
    v = _sqrt_dist(pibar)
    alphas = spec.eigenvectors.T @ v
    err = np.max(np.abs(spec.eigenvectors @ alphas - v))
    if err > 1e-10:
        raise SpectralError(f"eigenbasis reconstruction error {err:.3g}")
    overlaps = np.array([np.sum(alphas[a:b] ** 2) for a, b in spec.groups])
    return OverlapDecomposition(alphas, spec.group_values(), overlaps)


def _nonunit_terms(spec: Spectrum, pibar):
    dec = overlap_decomposition(spec, pibar)
    keep = np.ones(len(spec.groups), dtype=bool)
    if spec.unit_group is not None:
        a, b = spec.groups[spec.unit_group]
        if b - a > 1 and dec.group_overlaps[spec.unit_group] > 1e-8:
            raise SpectralError("sqrt(pibar) overlaps a degenerate eigenvalue-1 eigenspace; "
                                "the walk does not absorb into a single vertex")
        keep[spec.unit_group] = False
    return dec.group_values[keep], dec.group_overlaps[keep]


def interpolated_hitting_time(spec: Spectrum, pibar) -> float:
    lam, w = _nonunit_terms(spec, pibar)
    return float(np.sum(w / (1.0 - lam)))


def cotangent_qht_from_spectrum(spec: Spectrum, pibar) -> float:
    """Cotangent quantum hitting time of the Szegedy walk on ``T sqrt(pibar)``.

    Each non-unit eigenspace weight splits evenly over the pair e^{+-i theta},
    so it contributes ``w cot^2(theta/2) = w (1 + lam) / (1 - lam)``.
    """
    lam, w = _nonunit_terms(spec, pibar)
    return float(np.sqrt(np.sum(w * (1.0 + lam) / (1.0 - lam))))


def eigenvalue_map_residual(spec: Spectrum, spec_hat: Spectrum, n: int) -> float:
    """max |lam_hat - (n lam + 1)/(n + 1)| over the sorted spectra."""
    mapped = (n * spec.eigenvalues + 1.0) / (n + 1.0)
    return float(np.max(np.abs(spec_hat.eigenvalues - mapped)))


def shared_eigenvector_residual(spec: Spectrum, d_hat: np.ndarray) -> float:
    """How far the eigenspaces of ``spec`` are from being invariant under ``d_hat``.

    Per group, project ``d_hat`` onto the basis and measure what leaks out of it;
    zero iff every eigenspace of the first matrix is an invariant subspace of
    the second.
    """
    worst = 0.0
    for g in range(len(spec.groups)):
        v = spec.basis(g)
        dv = d_hat @ v
        worst = max(worst, float(np.max(np.abs(dv - v @ (v.T @ dv)))))
    return worst
