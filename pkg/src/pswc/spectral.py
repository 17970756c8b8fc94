"""Hermitian eigensolution, spectrum transfer, and Shubin-class diagnostics.

Spectrum transfer verifies that eigenvalues of the standard-form operator
with pulled-back symbol are carried by the deformed phase-space operator on
wavepacket images: with (lambda_j, phi_j) the eigenpairs of the pulled-back
operator and phi_k window fields, Phi_{j,k} = W_{f,phi_k}(phi_j) satisfies
A_omega Phi_{j,k} ~ lambda_j Phi_{j,k} for every window index k.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateProjection, NotHermitian
from .grid import GridSpec, SampledField, inner
from .symbols import compose_linear
from .symplectic import darboux_factor
from .wavepacket import (
    Window,
    deformed_wigner_grid,
    wavepacket_adjoint,
    wavepacket_f,
    wigner_grid,
)
from .weyl import OperatorMatrix, phase_weyl_matrix, weyl_kernel


@dataclass(frozen=True)
class SpectralResult:
    eigenvalues: np.ndarray
    eigenfields: list
    residuals: np.ndarray


def eigensolve(op: OperatorMatrix) -> SpectralResult:
    """Dense Hermitian eigendecomposition; eigenfields are grid-normalized."""
    if not op.hermitian:
        raise NotHermitian("eigensolve requires a Hermitian operator matrix")
    mat = op.weighted()
    eigvals, eigvecs = np.linalg.eigh(mat)
    cell = op.grid.cell
    fields = []
    residuals = np.empty(len(eigvals))
    for k in range(len(eigvals)):
        vec = eigvecs[:, k]
        residuals[k] = np.linalg.norm(mat @ vec - eigvals[k] * vec)
        fields.append(SampledField(op.grid, (vec / np.sqrt(cell)).reshape(op.grid.points)))
    return SpectralResult(eigenvalues=eigvals, eigenfields=fields, residuals=residuals)


@dataclass(frozen=True)
class TransferRow:
    j: int
    k: int
    eigenvalue: float
    residual: float
    rayleigh: float


@dataclass(frozen=True)
class TransferReport:
    rows: list
    max_residual: float
    eigenvalues: np.ndarray
    factor_residual: float


def spectrum_transfer_check(symbol, form, count: int, grid: GridSpec, window_count: int | None = None) -> TransferReport:
    """Verify spectrum transfer between the pulled-back standard operator and
    the deformed phase-space operator.

    Builds A' = Op(a o f) on `grid`, its first `count` eigenpairs, the
    deformed operator on the stretch-adapted phase grid, and reports the
    relative eigen-residual of every wavepacket image Phi_{j,k}, using the
    leading eigenfields both as transformed functions (index j, carrying the
    eigenvalue) and as windows (index k).
    """
    window_count = count if window_count is None else window_count
    factor = darboux_factor(form)
    a_prime = compose_linear(symbol, factor.f)
    op_prime = weyl_kernel(a_prime, grid)
    spec = eigensolve(op_prime)
    phase_grid = deformed_wigner_grid(grid, factor)
    op_phase = phase_weyl_matrix(symbol, form, phase_grid)
    rows = []
    for j in range(count):
        uj = spec.eigenfields[j]
        lam = float(spec.eigenvalues[j])
        for k in range(window_count):
            window = Window(spec.eigenfields[k])
            packet = wavepacket_f(factor, window, uj, out_grid=phase_grid)
            image = op_phase.apply(packet)
            pnorm = packet.norm()
            residual = float(
                np.sqrt(np.sum(np.abs(image.values - lam * packet.values) ** 2) * phase_grid.cell)
                / pnorm
            )
            rayleigh = float(np.real(inner(image, packet)) / pnorm**2)
            rows.append(TransferRow(j=j, k=k, eigenvalue=lam, residual=residual, rayleigh=rayleigh))
    return TransferReport(
        rows=rows,
        max_residual=max(r.residual for r in rows),
        eigenvalues=spec.eigenvalues[:count],
        factor_residual=factor.residual,
    )


@dataclass(frozen=True)
class AdjointTransferReport:
    eigenvalue: float
    residual: float
    pullback_norm: float


def adjoint_transfer_check(
    big_u: SampledField, phi: Window, symbol, grid: GridSpec, zero_tol: float = 1e-6
) -> AdjointTransferReport:
    """Pull an eigen-candidate of the phase operator back through the adjoint
    and measure the standard operator's Rayleigh residual at it.

    Raises DegenerateProjection when the pullback vanishes (the candidate is
    orthogonal to the wavepacket range of this window).
    """
    u = wavepacket_adjoint(phi, big_u)
    norm = u.norm()
    if norm < zero_tol * big_u.norm():
        raise DegenerateProjection("adjoint pullback is numerically zero")
    op = weyl_kernel(symbol, grid)
    image = op.apply(u)
    rayleigh = float(np.real(inner(image, u)) / norm**2)
    residual = float(
        np.sqrt(np.sum(np.abs(image.values - rayleigh * u.values) ** 2) * grid.cell) / norm
    )
    return AdjointTransferReport(eigenvalue=rayleigh, residual=residual, pullback_norm=norm)


# ---------------------------------------------------------------------------
# Shubin-class diagnostics
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ShubinParams:
    m0: float
    m1: float
    rho: float
    radius: float = 1.0
    max_order: int = 2

    def __post_init__(self):
        if self.m0 > self.m1:
            raise ValueError("need m0 <= m1")
        if not 0.0 < self.rho <= 1.0:
            raise ValueError("rho must be in (0, 1]")


@dataclass(frozen=True)
class ShubinReport:
    passed: bool
    lower_ok: bool
    upper_ok: bool
    derivative_ok: bool
    c0: float
    c1: float
    c_alpha: dict
    radii: tuple


_LOWER_FLOOR = 1e-8


def _sphere_points(dim: int, radius: float, count: int, rng) -> np.ndarray:
    vecs = rng.standard_normal((count, dim))
    vecs /= np.linalg.norm(vecs, axis=1, keepdims=True)
    return radius * vecs


def _directional_derivatives(symbol, pts: np.ndarray, order: int, step: float = 1e-4):
    """Max |partial^alpha a| over axis directions by central differences."""
    dim = pts.shape[-1]
    out = np.zeros(pts.shape[0])
    for axis in range(dim):
        e = np.zeros(dim)
        e[axis] = 1.0
        if order == 1:
            if getattr(symbol, "gradient", None) is not None:
                vals = np.abs(symbol.gradient(pts)[..., axis])
            else:
                vals = np.abs(
                    symbol.evaluate(pts + step * e) - symbol.evaluate(pts - step * e)
                ) / (2 * step)
        else:
            vals = np.abs(
                symbol.evaluate(pts + step * e)
                - 2 * symbol.evaluate(pts)
                + symbol.evaluate(pts - step * e)
            ) / step**2
        out = np.maximum(out, vals)
    return out


def shubin_diagnostic(symbol, params: ShubinParams, sample_radii, rng=None, samples: int = 64) -> ShubinReport:
    """Empirical two-sided growth and derivative-decay check on spheres.

    Fits the constants of ``C0 |z|^m0 <= |a| <= C1 |z|^m1`` and
    ``|d^alpha a| <= C_alpha |a| |z|^(-rho |alpha|)`` on the sampled set and
    reports whether they are consistent (finitely many samples prove
    nothing; the report is a diagnostic, never a certificate).
    """
    rng = np.random.default_rng(0) if rng is None else rng
    radii = tuple(r for r in sample_radii if r >= params.radius)
    c0 = np.inf
    c1 = 0.0
    c_alpha: dict[int, float] = {}
    lower_ok = True
    for r in radii:
        pts = _sphere_points(2 if symbol.dim == 2 else symbol.dim, r, samples, rng)
        avals = np.abs(symbol.evaluate(pts))
        c0 = min(c0, float(np.min(avals) / r**params.m0))
        c1 = max(c1, float(np.max(avals) / r**params.m1))
        scale = float(np.max(avals))
        if np.min(avals) < _LOWER_FLOOR * max(scale, 1.0):
            lower_ok = False
        for order in range(1, params.max_order + 1):
            dvals = _directional_derivatives(symbol, pts, order)
            with np.errstate(divide="ignore", invalid="ignore"):
                ratio = dvals * r ** (params.rho * order) / np.maximum(avals, 1e-300)
            c_alpha[order] = max(c_alpha.get(order, 0.0), float(np.max(ratio)))
        if not lower_ok:
            break
    upper_ok = np.isfinite(c1)
    derivative_ok = all(np.isfinite(v) for v in c_alpha.values()) and lower_ok
    passed = lower_ok and upper_ok and derivative_ok and c0 > 0.0
    return ShubinReport(
        passed=passed,
        lower_ok=lower_ok,
        upper_ok=upper_ok,
        derivative_ok=derivative_ok,
        c0=float(c0),
        c1=float(c1),
        c_alpha=c_alpha,
        radii=radii,
    )


def symbol_class_invariance_check(symbol, params: ShubinParams, f: np.ndarray, sample_radii, rng=None):
    """Run the diagnostic on a and on a o f; linear pullbacks must agree."""
    first = shubin_diagnostic(symbol, params, sample_radii, rng)
    second = shubin_diagnostic(compose_linear(symbol, f), params, sample_radii, rng)
    return first, second, first.passed == second.passed
