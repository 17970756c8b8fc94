"""Cross-Wigner transform, wavepacket intertwiners, and orthonormal bases.

The cross-Wigner transform is evaluated with the even-step trick: the
integration variable runs over twice the grid step so that both function
arguments stay on the lattice.  Its frequency axes therefore carry the step
``pi / (N h)`` -- half the step of the plain dual grid -- and phase-space
fields produced here live on that mixed grid.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.fft

from .errors import GridMismatch, IndexCap, NotInRange
from .grid import GridSpec, SampledField, inner, pushforward_mf
from .symplectic import DarbouxFactor

MAX_HERMITE_INDEX = 5
RANGE_RESIDUAL_TOL = 1e-4


# ---------------------------------------------------------------------------
# Hermite windows
# ---------------------------------------------------------------------------


def hermite_values(k: int, x: np.ndarray, width: float = 1.0) -> np.ndarray:
    """Orthonormal Hermite function h_k(x/width)/sqrt(width), stable recurrence."""
    y = np.asarray(x, dtype=float) / width
    h_prev = np.pi ** -0.25 * np.exp(-(y**2) / 2.0)
    if k == 0:
        return h_prev / np.sqrt(width)
    h_cur = np.sqrt(2.0) * y * h_prev
    for m in range(1, k):
        h_cur, h_prev = (
            np.sqrt(2.0 / (m + 1)) * y * h_cur - np.sqrt(m / (m + 1)) * h_prev,
            h_cur,
        )
    return h_cur / np.sqrt(width)


@dataclass(frozen=True)
class Window:
    """Unit-norm window on an R^n grid."""

    field: SampledField
    norm_one: bool = True

    def __post_init__(self):
        if self.norm_one and abs(self.field.norm() - 1.0) > 1e-10:
            raise ValueError("window is not normalized on its grid")


def hermite_window(grid: GridSpec, k: int = 0, width: float = 1.0) -> Window:
    """Hermite window on a 1D grid, re-normalized by grid quadrature."""
    if grid.dim != 1:
        raise GridMismatch("hermite_window builds 1D windows")
    vals = hermite_values(k, grid.axis(0), width).astype(complex)
    field = SampledField(grid, vals)
    return Window(field.with_values(vals / field.norm()))


def hermite_field(grid: GridSpec, k: int = 0, width: float = 1.0) -> SampledField:
    """Grid-normalized Hermite function as a plain field."""
    return hermite_window(grid, k, width).field


def random_field(grid: GridSpec, rng, max_order: int = 6) -> SampledField:
    """Random smooth concentrated field: Hermite tensor combination.

    Coefficients decay with the total order, so the result is well resolved
    on any grid whose box and band cover a few oscillator widths.
    """
    vals = np.zeros(grid.points, dtype=complex)
    per_axis = []
    for a in range(grid.dim):
        per_axis.append(
            [hermite_values(k, grid.axis(a)) for k in range(max_order + 1)]
        )
    for combo in np.ndindex(*(max_order + 1,) * grid.dim):
        order = sum(combo)
        if order > max_order:
            continue
        c = (rng.standard_normal() + 1j * rng.standard_normal()) * np.exp(-0.5 * order)
        term = np.ones((), dtype=complex)
        for a, k in enumerate(combo):
            shape = [1] * grid.dim
            shape[a] = grid.points[a]
            term = term * per_axis[a][k].reshape(shape)
        vals += c * term
    field = SampledField(grid, vals)
    return field.with_values(vals / field.norm())


# ---------------------------------------------------------------------------
# Cross-Wigner transform
# ---------------------------------------------------------------------------


def wigner_grid(grid: GridSpec) -> GridSpec:
    """Phase-space grid of the cross-Wigner output for functions on `grid`.

    Position axes are copied; each frequency axis carries N points at step
    pi/(N h), covering [-pi/(2h), pi/(2h)).
    """
    steps = tuple(grid.steps) + tuple(
        np.pi / (n * h) for n, h in zip(grid.points, grid.steps)
    )
    return GridSpec(tuple(grid.points) * 2, steps)


def _pad_double(values: np.ndarray, grid: GridSpec) -> np.ndarray:
    """Embed samples in a box of twice the extent (same step), zero padding."""
    out = np.zeros(tuple(2 * n for n in grid.points), dtype=complex)
    sl = tuple(slice(n // 2, n // 2 + n) for n in grid.points)
    out[sl] = values
    return out


def _wigner_core(left: np.ndarray, right: np.ndarray, pts) -> np.ndarray:
    """sum_r exp(-2 pi i (m - N/2) r / N) left[j+r] right[j-r] over all j, m."""
    d = len(pts)
    idx_plus = []
    idx_minus = []
    for a in range(d):
        n = pts[a]
        j = np.arange(n)
        r = np.arange(n)
        shape_j = [1] * (2 * d)
        shape_j[a] = n
        shape_r = [1] * (2 * d)
        shape_r[d + a] = n
        idx_plus.append(np.mod(j.reshape(shape_j) + r.reshape(shape_r), n))
        idx_minus.append(np.mod(j.reshape(shape_j) - r.reshape(shape_r), n))
    plus = np.broadcast_arrays(*idx_plus)
    minus = np.broadcast_arrays(*idx_minus)
    core = left[tuple(plus)] * right[tuple(minus)]
    for a in range(d):
        n = pts[a]
        sign = np.where(np.arange(n) % 2, -1.0, 1.0)
        shape = [1] * (2 * d)
        shape[d + a] = n
        core = core * sign.reshape(shape)
    return scipy.fft.fftn(core, axes=tuple(range(d, 2 * d)))


def cross_wigner(u: SampledField, v: SampledField) -> SampledField:
    """W(u, v)(x, xi) = (2 pi)^-d sum_y exp(-i xi.y) u(x+y/2) conj(v(x-y/2)) dy.

    The even-step y sum keeps every evaluation on the lattice.  On a plain
    periodic grid that sum carries an exact ghost copy at half the box
    period, so the transform is evaluated on a zero-padded double box and
    restricted to the central window; ghosts then sit outside the output
    range.  The result lives on ``wigner_grid`` of the common input grid.
    """
    if not u.grid.close_to(v.grid):
        raise GridMismatch("cross_wigner needs both fields on the same grid")
    grid = u.grid
    d = grid.dim
    pts = tuple(2 * n for n in grid.points)
    out = _wigner_core(
        _pad_double(u.values, grid), _pad_double(np.conj(v.values), grid), pts
    )
    # central x window; xi decimated to step pi/(N h) (even padded slots)
    sl = tuple(slice(n // 2, n // 2 + n) for n in grid.points) + tuple(
        slice(0, None, 2) for _ in grid.points
    )
    scale = (2.0 * np.pi) ** -d * float(np.prod([2.0 * h for h in grid.steps]))
    return SampledField(wigner_grid(grid), scale * out[sl])


# ---------------------------------------------------------------------------
# Wavepacket transform and friends
# ---------------------------------------------------------------------------


def wavepacket(phi: Window, u: SampledField) -> SampledField:
    """W_phi u = (2 pi)^{n/2} W(u, phi): an isometry into phase space."""
    n = u.grid.dim
    w = cross_wigner(u, phi.field)
    return w.with_values((2.0 * np.pi) ** (n / 2.0) * w.values)


def wavepacket_adjoint(phi: Window, big_u: SampledField) -> SampledField:
    """(2/pi)^{n/2} quadrature of U(z0) T_GR(z0) phi over the phase grid."""
    ngrid = phi.field.grid
    n = ngrid.dim
    if big_u.grid.dim != 2 * n:
        raise GridMismatch("adjoint input must live on the R^2n wigner grid")
    if not GridSpec(big_u.grid.points[:n], big_u.grid.steps[:n]).close_to(ngrid):
        raise GridMismatch("position axes of U do not match the window grid")
    wg = wigner_grid(ngrid)
    if not big_u.grid.close_to(wg):
        raise GridMismatch("frequency axes of U do not match the wigner grid")
    pts = ngrid.points
    d = n
    # frequency sum first: V[p, r] = sum_m U[p, m] exp(2 pi i (m - N/2) r / N)
    v = scipy.fft.ifftn(big_u.values, axes=tuple(range(d, 2 * d)))
    for a in range(d):
        npts = pts[a]
        sign = np.where(np.arange(npts) % 2, -1.0, 1.0)
        shape = [1] * (2 * d)
        shape[d + a] = npts
        v = v * (npts * sign).reshape(shape)
    # u[t] = c sum_p V[p, (t-p) mod N] phi[(2p - t) mod N]; broadcast over (t..., p...)
    p_idx, r_idx, phi_idx = [], [], []
    for a in range(d):
        npts = pts[a]
        shape_t = [1] * (2 * d)
        shape_t[a] = npts
        shape_p = [1] * (2 * d)
        shape_p[d + a] = npts
        t = np.arange(npts).reshape(shape_t)
        p = np.arange(npts).reshape(shape_p)
        p_idx.append(p)
        r_idx.append(np.mod(t - p, npts))
        phi_idx.append(np.mod(2 * p - t, npts))
    gather_v = v[tuple(np.broadcast_arrays(*p_idx, *r_idx))]
    phi_vals = phi.field.values[tuple(np.broadcast_arrays(*phi_idx))]
    core = gather_v * phi_vals
    summed = core.reshape(pts + (-1,)).sum(axis=-1)
    scale = (2.0 / np.pi) ** (d / 2.0) * big_u.grid.cell
    return SampledField(ngrid, scale * summed)


def projector(phi: Window, big_u: SampledField) -> SampledField:
    """Orthogonal projection onto the range of the wavepacket transform."""
    return wavepacket(phi, wavepacket_adjoint(phi, big_u))


def range_residual(phi: Window, big_u: SampledField) -> float:
    proj = projector(phi, big_u)
    ref = big_u.norm()
    if ref == 0.0:
        return 0.0
    return float(
        np.sqrt(np.sum(np.abs(proj.values - big_u.values) ** 2) * big_u.grid.cell) / ref
    )


def wavepacket_inverse(
    phi: Window, big_u: SampledField, tol: float = RANGE_RESIDUAL_TOL
) -> SampledField:
    """Invert W_phi on its range; raises NotInRange past the residual gate."""
    residual = range_residual(phi, big_u)
    if residual > tol:
        raise NotInRange(f"projector residual {residual:.2e} exceeds {tol:.1e}")
    return wavepacket_adjoint(phi, big_u)


def deformed_wigner_grid(grid: GridSpec, factor: DarbouxFactor) -> GridSpec:
    """Phase grid adapted to W_{f,phi}: the pullback by f^{-1} stretches
    packets by up to the largest singular value of f, so the box is scaled
    accordingly (same point budget, spectra compress by the same factor)."""
    wg = wigner_grid(grid)
    scale = float(np.linalg.norm(factor.f, 2))
    if abs(scale - 1.0) < 1e-12:
        return wg
    return GridSpec(wg.points, tuple(s * scale for s in wg.steps))


def wavepacket_f(
    factor: DarbouxFactor,
    phi: Window,
    u: SampledField,
    out_grid: GridSpec | None = None,
) -> SampledField:
    """W_{f,phi} u = M_f^{-1} W_phi u: partial isometry into L^2(R^2n).

    With ``out_grid`` the pullback is evaluated on that grid (stretched
    packets of deformed structures need a wider box than the plain wigner
    grid; see ``deformed_wigner_grid``).
    """
    w = wavepacket(phi, u)
    if out_grid is None or out_grid.close_to(w.grid):
        return pushforward_mf(w, factor, direction="inverse")
    from .grid import substitute

    scale = abs(np.linalg.det(factor.f_inv)) ** 0.5
    out = substitute(w, factor.f_inv, out_grid=out_grid)
    return out.with_values(scale * out.values)


def wavepacket_f_adjoint(
    factor: DarbouxFactor, phi: Window, big_u: SampledField
) -> SampledField:
    """Adjoint of W_{f,phi}: W_phi^* M_f (M_f is unitary)."""
    return wavepacket_adjoint(phi, pushforward_mf(big_u, factor, direction="forward"))


def basis_generate(
    factor: DarbouxFactor,
    function_indices,
    window_indices,
    grid: GridSpec,
    function_width: float = 1.0,
    window_width: float = 1.0,
    max_index: int = MAX_HERMITE_INDEX,
    out_grid: GridSpec | None = None,
) -> dict[tuple[int, int], SampledField]:
    """Hermite-generated orthonormal family Phi[j, k] = W_{f, phi_k}(psi_j).

    The first index labels the transformed function (it carries eigenvalues
    under spectral transfer), the second the window.  Mixed widths give the
    two-basis variant.  ``out_grid`` follows ``wavepacket_f``.
    """
    for idx in list(function_indices) + list(window_indices):
        if idx > max_index:
            raise IndexCap(f"Hermite index {idx} exceeds cap {max_index}")
    out = {}
    windows = {k: hermite_window(grid, k, window_width) for k in window_indices}
    functions = {j: hermite_field(grid, j, function_width) for j in function_indices}
    for j in function_indices:
        for k in window_indices:
            out[(j, k)] = wavepacket_f(factor, windows[k], functions[j], out_grid=out_grid)
    return out
