"""Linear symplectic geometry for constant-coefficient deformed forms.

A non-standard symplectic form on R^{2n} is described by an invertible
antisymmetric matrix Omega through ``omega(z, z') = z . Omega^{-1} z'``
(row-vector-first reading of the pairing).  The Darboux factor is any f with
``Omega = f J f^T``; it transports the deformed calculus onto the standard
one and is canonicalized here so that repeated runs give identical output.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import (
    DimensionMismatch,
    FactorizationFailed,
    NotAntisymmetric,
    NotPositiveDefinite,
    OddDimension,
    Singular,
)

ANTISYM_RTOL = 1e-12
INVERSE_TOL = 1e-10
FACTOR_RTOL = 1e-10


def standard_j(n: int) -> np.ndarray:
    """Matrix of the standard form: [[0, I], [-I, 0]]."""
    eye = np.eye(n)
    zero = np.zeros((n, n))
    return np.block([[zero, eye], [-eye, zero]])


@dataclass(frozen=True)
class SymplecticForm:
    n: int
    omega: np.ndarray
    omega_inv: np.ndarray
    det_abs: float

    def is_standard(self, rtol: float = 1e-12) -> bool:
        return bool(np.allclose(self.omega, standard_j(self.n), rtol=0, atol=rtol))


@dataclass(frozen=True)
class DarbouxFactor:
    f: np.ndarray
    f_inv: np.ndarray
    residual: float


@dataclass(frozen=True)
class WignerEllipsoid:
    """Ellipsoid M z . z <= 1 with M symmetric positive definite."""

    m: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.m, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] % 2:
            raise DimensionMismatch("ellipsoid matrix must be square of even dimension")
        if np.max(np.abs(m - m.T)) > 1e-12 * max(np.max(np.abs(m)), 1e-300):
            raise NotPositiveDefinite("ellipsoid matrix must be symmetric")
        if np.min(np.linalg.eigvalsh(m)) <= 0:
            raise NotPositiveDefinite("ellipsoid matrix must be positive definite")
        object.__setattr__(self, "m", m)


def build_form(omega_matrix: np.ndarray) -> SymplecticForm:
    """Validate Omega and package it with its inverse.

    Rejects non-square, odd-dimensional, symmetric-contaminated and
    singular input.
    """
    omega = np.asarray(omega_matrix, dtype=float)
    if omega.ndim != 2 or omega.shape[0] != omega.shape[1]:
        raise DimensionMismatch("Omega must be a square matrix")
    if omega.shape[0] % 2:
        raise OddDimension("Omega must be 2n x 2n")
    scale = np.max(np.abs(omega))
    if scale == 0.0 or np.max(np.abs(omega + omega.T)) > ANTISYM_RTOL * scale:
        raise NotAntisymmetric("Omega must be antisymmetric")
    n = omega.shape[0] // 2
    try:
        omega_inv = np.linalg.inv(omega)
    except np.linalg.LinAlgError as exc:
        raise Singular("Omega is singular") from exc
    if np.max(np.abs(omega @ omega_inv - np.eye(2 * n))) > INVERSE_TOL:
        raise Singular("Omega is numerically singular")
    det_abs = abs(np.linalg.det(omega))
    return SymplecticForm(n=n, omega=omega, omega_inv=omega_inv, det_abs=det_abs)


def build_form_from_blocks(theta: np.ndarray, nmat: np.ndarray) -> SymplecticForm:
    """Omega = [[Theta, I], [-I, N]] with antisymmetric Theta, N."""
    theta = np.asarray(theta, dtype=float)
    nmat = np.asarray(nmat, dtype=float)
    for name, blk in (("Theta", theta), ("N", nmat)):
        if blk.ndim != 2 or blk.shape[0] != blk.shape[1]:
            raise DimensionMismatch(f"{name} must be square")
        if np.max(np.abs(blk + blk.T)) > ANTISYM_RTOL * max(np.max(np.abs(blk)), 1.0):
            raise NotAntisymmetric(f"{name} must be antisymmetric")
    if theta.shape != nmat.shape:
        raise DimensionMismatch("Theta and N must have equal shape")
    n = theta.shape[0]
    eye = np.eye(n)
    omega = np.block([[theta, eye], [-eye, nmat]])
    return build_form(omega)


def omega_eval(form: SymplecticForm, z: np.ndarray, zp: np.ndarray) -> float:
    """omega(z, z') = z . Omega^{-1} z'."""
    z = np.asarray(z, dtype=float)
    zp = np.asarray(zp, dtype=float)
    if z.shape != (2 * form.n,) or zp.shape != (2 * form.n,):
        raise DimensionMismatch("vectors must have length 2n")
    return float(z @ form.omega_inv @ zp)


def _canonical_planes(omega: np.ndarray):
    """Real Schur form of antisymmetric Omega as rotation planes (Q, d_i)."""
    t, q = scipy.linalg.schur(omega, output="real")
    dim = omega.shape[0]
    pairs = []
    i = 0
    while i < dim:
        if i + 1 < dim and abs(t[i + 1, i]) > 1e-14 * max(np.max(np.abs(t)), 1e-300):
            d = t[i, i + 1]
            cols = q[:, i : i + 2].copy()
            if d < 0:
                cols = cols[:, ::-1]
                d = -d
            pairs.append((d, cols))
            i += 2
        else:
            raise Singular("Omega has a (numerically) zero eigenvalue")
    return pairs


def _fix_plane_sign(cols: np.ndarray) -> np.ndarray:
    """Rotate within the plane so the first significant row is (positive, 0)."""
    norms = np.hypot(cols[:, 0], cols[:, 1])
    row = int(np.argmax(norms > 0.5 * np.max(norms)))
    ang = np.arctan2(cols[row, 1], cols[row, 0])
    c, s = np.cos(ang), np.sin(ang)
    rot = np.array([[c, -s], [s, c]])
    return cols @ rot


def darboux_factor(form: SymplecticForm) -> DarbouxFactor:
    """Deterministic f with Omega = f J f^T.

    Omega is brought to the real canonical form Q D Q^T (D block-diagonal
    with blocks [[0, d], [-d, 0]], d > 0), each plane is rescaled by sqrt(d)
    and rotated to a fixed orientation, and the planes -- sorted by
    descending d -- are laid out in the [[0, I], [-I, 0]] pattern.
    """
    dim = 2 * form.n
    if form.is_standard():
        eye = np.eye(dim)
        return DarbouxFactor(f=eye, f_inv=eye, residual=0.0)
    pairs = _canonical_planes(form.omega)
    pairs.sort(key=lambda p: -p[0])
    f = np.empty((dim, dim))
    for k, (d, cols) in enumerate(pairs):
        cols = _fix_plane_sign(cols) * np.sqrt(d)
        f[:, k] = cols[:, 0]
        f[:, form.n + k] = cols[:, 1]
    residual = float(np.max(np.abs(f @ standard_j(form.n) @ f.T - form.omega)))
    scale = max(np.max(np.abs(form.omega)), 1e-300)
    if residual > FACTOR_RTOL * scale:
        raise FactorizationFailed(f"Darboux residual {residual:.2e} exceeds tolerance")
    return DarbouxFactor(f=f, f_inv=np.linalg.inv(f), residual=residual)


def symplectic_capacity(ell: WignerEllipsoid) -> float:
    """Gromov width pi / lambda_max, with +/- i lambda_j the eigenvalues of J M."""
    n = ell.m.shape[0] // 2
    eigs = np.linalg.eigvals(standard_j(n) @ ell.m)
    lams = np.abs(eigs.imag)
    lam_max = float(np.max(lams))
    if lam_max <= 0:
        raise NotPositiveDefinite("J M has no nonzero rotation eigenvalues")
    return float(np.pi / lam_max)
