"""Elementary unitary operators on sampled fields.

Heisenberg-Weyl translations act on functions over R^n, their deformed
analogues act on phase-space functions over R^2n, and a small family of
metaplectic generators (fractional Fourier, dilation, chirp) covers the
symplectic-covariance experiments without a general Mp factorization.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import DimensionMismatch, GridMismatch, OffLatticeReflection
from .grid import (
    GridSpec,
    SampledField,
    _LATTICE_EPS,
    substitute,
    translate,
)

__all__ = [
    "heisenberg_weyl",
    "grossmann_royer",
    "phase_translate_omega",
    "MetaplecticGenerator",
    "metaplectic_apply",
    "generator_matrix",
    "harmonic_oscillator_matrix",
]


def _split_phase_point(z0: np.ndarray, n: int) -> tuple[np.ndarray, np.ndarray]:
    z0 = np.asarray(z0, dtype=float)
    if z0.shape != (2 * n,):
        raise DimensionMismatch(f"phase-space point must have length {2 * n}")
    return z0[:n], z0[n:]


def heisenberg_weyl(z0: np.ndarray, u: SampledField) -> SampledField:
    """T(z0) u(x) = exp(i(xi0.x - xi0.x0/2)) u(x - x0).

    The shift uses an exact roll for lattice x0 and Fourier interpolation
    otherwise.
    """
    n = u.grid.dim
    x0, xi0 = _split_phase_point(z0, n)
    shifted = translate(u, x0)
    mesh = u.grid.mesh()
    phase = sum(xi0[a] * mesh[a] for a in range(n)) - 0.5 * float(xi0 @ x0)
    return shifted.with_values(np.exp(1j * phase) * shifted.values)


def grossmann_royer(z0: np.ndarray, u: SampledField) -> SampledField:
    """Reflection with phase: exp(2i xi0.(x - x0)) u(2 x0 - x).

    Requires 2*x0 on the grid lattice so the reflection is an exact index
    involution (periodic wrap).
    """
    n = u.grid.dim
    x0, xi0 = _split_phase_point(z0, n)
    idx = []
    for a in range(n):
        npts, h = u.grid.points[a], u.grid.steps[a]
        ratio = 2.0 * x0[a] / h
        p = np.round(ratio)
        if abs(ratio - p) > _LATTICE_EPS:
            raise OffLatticeReflection(f"2*x0 component {2 * x0[a]} is off the lattice")
        # 2 x0 - x_i = (p - i + N/2) h - L: reflected index (p - i) mod N
        i = np.arange(npts)
        idx.append(np.mod(int(p) - i, npts))
    reflected = u.values[np.ix_(*idx)]
    mesh = u.grid.mesh()
    phase = 2.0 * sum(xi0[a] * (mesh[a] - x0[a]) for a in range(n))
    return u.with_values(np.exp(1j * phase) * reflected)


def phase_translate_omega(z0: np.ndarray, big_u: SampledField, form) -> SampledField:
    """Deformed phase-space translation exp(-i omega(z, z0)) U(z - z0/2)."""
    if big_u.grid.dim != 2 * form.n:
        raise GridMismatch("field dimension does not match the form")
    z0 = np.asarray(z0, dtype=float)
    if z0.shape != (2 * form.n,):
        raise DimensionMismatch("z0 must have length 2n")
    shifted = translate(big_u, z0 / 2.0)
    # omega(z, z0) = z . Omega^{-1} z0 is linear in z
    wave = form.omega_inv @ z0
    mesh = big_u.grid.mesh()
    phase = sum(wave[a] * mesh[a] for a in range(2 * form.n))
    return shifted.with_values(np.exp(-1j * phase) * shifted.values)


# ---------------------------------------------------------------------------
# Metaplectic generators
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MetaplecticGenerator:
    """One of fractional_fourier(angle), dilation(scale), chirp(coeff)."""

    kind: str
    angle: float = 0.0
    scale: float = 1.0
    coeff: np.ndarray | float = 0.0

    def __post_init__(self):
        if self.kind not in ("fractional_fourier", "dilation", "chirp"):
            raise ValueError(f"unknown generator kind {self.kind!r}")
        if self.kind == "dilation" and not self.scale > 0:
            raise ValueError("dilation scale must be positive")
        if self.kind == "chirp":
            c = np.atleast_2d(np.asarray(self.coeff, dtype=float))
            if np.max(np.abs(c - c.T)) > 1e-12 * max(np.max(np.abs(c)), 1.0):
                raise ValueError("chirp matrix must be symmetric")


def _centered_dft_matrix(npts: int, step: float) -> np.ndarray:
    """Matrix of the unitary forward transform between a 1D grid and its dual."""
    j = np.arange(npts)
    signs = np.where((j + npts // 2) % 2, -1.0, 1.0)  # includes the (-1)^(N/2) constant
    core = np.exp(-2j * np.pi * np.outer(j, j) / npts)
    return (step / np.sqrt(2.0 * np.pi)) * (signs[:, None] * core * np.where(j % 2, -1.0, 1.0))


@lru_cache(maxsize=8)
def _oscillator_basis(points: int, step: float):
    """Eigenbasis of the discrete harmonic oscillator (x^2 + xi^2)/2 on a 1D grid."""
    grid = GridSpec((points,), (step,))
    eigvals, eigvecs = np.linalg.eigh(harmonic_oscillator_matrix(grid))
    return eigvals, eigvecs


def harmonic_oscillator_matrix(grid: GridSpec) -> np.ndarray:
    """Dense spectral discretization of (x^2 - d^2/dx^2)/2 on a 1D grid."""
    if grid.dim != 1:
        raise GridMismatch("oscillator matrix is built on 1D grids")
    x = grid.axis(0)
    dual = grid.dual()
    xi = dual.axis(0)
    fmat = _centered_dft_matrix(grid.points[0], grid.steps[0])
    # F maps h-weighted to g-weighted samples: F^{-1} = (g/h) F^dagger
    finv = (dual.steps[0] / grid.steps[0]) * fmat.conj().T
    ham = 0.5 * (np.diag(x**2) + finv @ (xi[:, None] ** 2 * fmat))
    return 0.5 * (ham + ham.conj().T)


def _apply_fractional_fourier(u: SampledField, angle: float) -> SampledField:
    eigvals, eigvecs = _oscillator_basis(u.grid.points[0], u.grid.steps[0])
    coeffs = eigvecs.conj().T @ u.values
    k = np.arange(len(eigvals))
    return u.with_values(eigvecs @ (np.exp(1j * k * angle) * coeffs))


def metaplectic_apply(gens, u: SampledField) -> SampledField:
    """Apply a sequence of metaplectic generators, first entry first.

    fractional_fourier uses the discrete oscillator eigenbasis (phase
    convention: angle pi/2 reproduces the inverse Fourier transform, i.e.
    h_k -> exp(i k theta) h_k); dilation resamples |L|^{-1/2} u(x/L); chirp
    multiplies by exp(i P x.x / 2).
    """
    out = u
    for gen in gens:
        if gen.kind == "fractional_fourier":
            if out.grid.dim != 1:
                raise GridMismatch("fractional Fourier generator is 1D")
            out = _apply_fractional_fourier(out, gen.angle)
        elif gen.kind == "dilation":
            mat = np.eye(out.grid.dim) / gen.scale
            res = substitute(out, mat, out_grid=out.grid)
            out = res.with_values(res.values / np.sqrt(abs(gen.scale)) ** out.grid.dim)
        else:  # chirp
            c = np.atleast_2d(np.asarray(gen.coeff, dtype=float))
            mesh = out.grid.mesh()
            quad = sum(
                c[a, b] * mesh[a] * mesh[b]
                for a in range(out.grid.dim)
                for b in range(out.grid.dim)
            )
            out = out.with_values(np.exp(0.5j * quad) * out.values)
    return out


def generator_matrix(gen: MetaplecticGenerator, n: int = 1) -> np.ndarray:
    """Symplectic matrix S with W(S_hat u, S_hat v)(z) = W(u, v)(S^{-1} z).

    The angle-theta fractional Fourier operator (h_k -> exp(i k theta) h_k)
    moves the coherent state at (x0, 0) to phase-space point (0, x0), i.e.
    projects onto the rotation [[cos, -sin], [sin, cos]].
    """
    if gen.kind == "fractional_fourier":
        c, s = np.cos(gen.angle), np.sin(gen.angle)
        return np.array([[c, -s], [s, c]])
    if gen.kind == "dilation":
        ell = gen.scale
        return np.block(
            [[ell * np.eye(n), np.zeros((n, n))], [np.zeros((n, n)), np.eye(n) / ell]]
        )
    c = np.atleast_2d(np.asarray(gen.coeff, dtype=float))
    return np.block([[np.eye(n), np.zeros((n, n))], [c, np.eye(n)]])
