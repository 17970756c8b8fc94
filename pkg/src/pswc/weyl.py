"""Weyl operator matrices, phase-space operators, and the twisted product.

Two independent routes realize the phase-space operator: a dense kernel
built from the deformed Fourier transform of the symbol on a doubled
lattice, and a direct quadrature over deformed phase-space translations.
Their agreement is one of the package's acceptance checks.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.fft
import scipy.linalg

from .errors import GridCapExceeded, GridMismatch, NotHermitian, NotSymplectic
from .grid import GridSpec, SampledField, quadrature_ft, sympl_fourier_sigma
from .symbols import SampledSymbol, Symbol, compose_linear, sample_symbol
from .symplectic import DarbouxFactor, build_form, darboux_factor, standard_j
from .wavepacket import wigner_grid

DENSE_MATRIX_CAP = 4096
TWISTED_CAP = 2**15


@dataclass(frozen=True)
class OperatorMatrix:
    """Dense kernel samples; (entries @ u) * grid.cell applies the operator."""

    grid: GridSpec
    entries: np.ndarray
    hermitian: bool = False

    def apply(self, u: SampledField) -> SampledField:
        if not u.grid.close_to(self.grid):
            raise GridMismatch("operand grid does not match the operator grid")
        out = (self.entries @ u.values.ravel()) * self.grid.cell
        return SampledField(self.grid, out.reshape(self.grid.points))

    def compose(self, other: "OperatorMatrix") -> "OperatorMatrix":
        if not other.grid.close_to(self.grid):
            raise GridMismatch("operator grids do not match")
        return OperatorMatrix(
            self.grid, (self.entries @ other.entries) * self.grid.cell
        )

    def hermiticity_residual(self) -> float:
        scale = max(float(np.max(np.abs(self.entries))), 1e-300)
        return float(np.max(np.abs(self.entries - self.entries.conj().T)) / scale)

    def weighted(self) -> np.ndarray:
        """Matrix acting on raw sample vectors (quadrature weight folded in)."""
        return self.entries * self.grid.cell

    def spectral_norm(self) -> float:
        if self.hermitian:
            w = np.linalg.eigvalsh(self.weighted())
            return float(np.max(np.abs(w)))
        return float(np.linalg.norm(self.weighted(), 2))


def _check_cap(grid: GridSpec, cap: int = DENSE_MATRIX_CAP):
    if grid.size > cap:
        raise GridCapExceeded(f"{grid.size} grid points exceed the dense cap {cap}")


def minimal_image_cut(op: OperatorMatrix) -> OperatorMatrix:
    """Zero kernel entries outside the minimal-image band |x_a - y_a| <= L_a.

    Matrices assembled against the full dual grid are 2L-periodic in the
    argument difference and duplicate their near-diagonal content in the far
    corners; the cut yields the continuum-faithful kernel (use it before
    norm-level comparisons of operator matrices, not before eigensolves).
    """
    grid = op.grid
    n = grid.dim
    kernel = op.entries.reshape(grid.points * 2).copy()
    for a in range(n):
        m = grid.points[a]
        shape_i = [1] * (2 * n)
        shape_i[a] = m
        shape_j = [1] * (2 * n)
        shape_j[n + a] = m
        i = np.arange(m).reshape(shape_i)
        j = np.arange(m).reshape(shape_j)
        kernel = kernel * (np.abs(i - j) <= m // 2)
    return OperatorMatrix(grid, kernel.reshape(op.entries.shape), hermitian=op.hermitian)


def st_symbol_grid(grid: GridSpec) -> GridSpec:
    """Refined sampling grid for standard-Weyl symbols over a function grid:
    half-step positions over [-L, L) and half-step dual frequencies."""
    dual = grid.dual()
    return GridSpec(
        tuple(2 * n for n in grid.points) * 2,
        tuple(h / 2 for h in grid.steps) + tuple(h / 2 for h in dual.steps),
    )


def weyl_kernel(symbol, grid: GridSpec) -> OperatorMatrix:
    """Kernel K(x, y) = (2 pi)^-n int exp(i(x-y).xi) a((x+y)/2, xi) d xi.

    The xi integral runs over the full dual grid, so multiplication symbols
    come out exactly diagonal and quadratic-in-xi symbols reproduce the
    spectral derivative matrices.
    """
    _check_cap(grid)
    n = grid.dim
    dual = grid.dual()
    # symbol values on (midpoints) x (dual frequencies)
    mid_axes = [
        (np.arange(2 * grid.points[a] - 1) - grid.points[a]) * grid.steps[a] / 2.0
        for a in range(n)
    ]
    xi_axes = [dual.axis(a) for a in range(n)]
    mesh = np.meshgrid(*mid_axes, *xi_axes, indexing="ij")
    pts = np.stack([m.ravel() for m in mesh], axis=-1)
    shape = tuple(len(ax) for ax in mid_axes) + tuple(grid.points)
    vals = symbol.evaluate(pts).reshape(shape)
    hermitian = bool(np.max(np.abs(vals.imag)) <= 1e-12 * max(np.max(np.abs(vals)), 1e-300))
    # (2 pi)^-n (prod dxi_a) sum_m = ifftn / cell once the N^n factors cancel
    table = scipy.fft.ifftn(vals, axes=tuple(range(n, 2 * n)))
    # K[i, j] = prod_a (1/h_a) (-1)^(i_a - j_a) table[(i+j)_a, (i_a - j_a) mod N_a]
    total = grid.size
    multi = np.indices(grid.points).reshape(n, total)
    sign = np.ones((total, total))
    idx = []
    for a in range(n):
        i = multi[a][:, None]
        j = multi[a][None, :]
        idx.append(i + j)
        sign = sign * np.where((i - j) % 2, -1.0, 1.0)
    for a in range(n):
        i = multi[a][:, None]
        j = multi[a][None, :]
        idx.append(np.mod(i - j, grid.points[a]))
    entries = table[tuple(idx)] * sign / grid.cell
    if hermitian:
        entries = 0.5 * (entries + entries.conj().T)
    return OperatorMatrix(grid, entries, hermitian=hermitian)


def symbol_from_kernel(op: OperatorMatrix, band_limited: bool = False) -> SampledSymbol:
    """Partial Fourier transform of the kernel back to a phase-space symbol.

    Even-step y keeps both kernel arguments on the lattice; the kernel is
    zero-padded to a double box (same ghost handling as the cross-Wigner
    transform) and the output lives on the wigner grid of the operator's
    function grid.

    ``band_limited=True`` restricts the kernel to its minimal-image band
    |x - y| <= L first.  Matrices built by ``weyl_kernel`` duplicate their
    near-diagonal content in the far corners (the xi sum over the full dual
    grid makes the difference profile 2L-periodic), and those duplicates
    must be dropped before inverting; rank-one kernels u (x) conj(v) carry
    genuine (small) corner content and are inverted with the default.

    The even-step sum only resolves frequencies in (-pi/(2h), pi/(2h)];
    symbol content beyond that band folds in (the exactly-constant symbol
    comes back as 2, concentrated symbols are unaffected).
    """
    grid = op.grid
    n = grid.dim
    if band_limited:
        op = minimal_image_cut(op)
    kernel = op.entries.reshape(grid.points * 2)
    pts = tuple(2 * m for m in grid.points)
    big = np.zeros(pts * 2, dtype=complex)
    sl = tuple(slice(m // 2, m // 2 + m) for m in grid.points)
    big[sl * 2] = kernel
    idx_plus, idx_minus = [], []
    for a in range(n):
        m = pts[a]
        j = np.arange(m)
        r = np.arange(m)
        shape_j = [1] * (2 * n)
        shape_j[a] = m
        shape_r = [1] * (2 * n)
        shape_r[n + a] = m
        idx_plus.append(np.mod(j.reshape(shape_j) + r.reshape(shape_r), m))
        idx_minus.append(np.mod(j.reshape(shape_j) - r.reshape(shape_r), m))
    core = big[tuple(np.broadcast_arrays(*idx_plus)) + tuple(np.broadcast_arrays(*idx_minus))]
    for a in range(n):
        m = pts[a]
        sign = np.where(np.arange(m) % 2, -1.0, 1.0)
        shape = [1] * (2 * n)
        shape[n + a] = m
        core = core * sign.reshape(shape)
    out = scipy.fft.fftn(core, axes=tuple(range(n, 2 * n)))
    sl_out = tuple(slice(m // 2, m // 2 + m) for m in grid.points) + tuple(
        slice(0, None, 2) for _ in grid.points
    )
    scale = float(np.prod([2.0 * h for h in grid.steps]))
    return SampledSymbol(SampledField(wigner_grid(grid), scale * out[sl_out]))


# ---------------------------------------------------------------------------
# Phase-space operators
# ---------------------------------------------------------------------------


def _deformed_ft_at(symbol, form, targets: np.ndarray, sample_grid: GridSpec) -> np.ndarray:
    """F_omega a at arbitrary points, by quadrature over refined samples.

    Plane-wave quadrature folds at the source Nyquist frequency, so targets
    beyond it would alias the central peak into the far field; those entries
    are zeroed instead (the transforms handled here decay there).
    """
    if isinstance(symbol, SampledSymbol):
        field = symbol.data
        if not field.grid.close_to(sample_grid):
            raise GridMismatch("sampled symbol must live on the 2x-refined grid")
    else:
        field = sample_symbol(symbol, sample_grid).data
    n = form.n
    kvecs = np.asarray(targets, dtype=float) @ (-form.omega_inv).T
    vals = quadrature_ft(field, kvecs)
    nyq = np.array([np.pi / h for h in sample_grid.steps])
    inband = np.all(np.abs(kvecs) <= (1.0 - 1e-12) * nyq, axis=-1)
    return (2.0 * np.pi) ** -n * form.det_abs**-0.5 * np.where(inband, vals, 0.0)


def phase_weyl_matrix(symbol, form, grid: GridSpec) -> OperatorMatrix:
    """Dense matrix of the deformed phase-space operator on a 2n-dim grid.

    Kernel K(z, u) = (2/pi)^n |det Omega|^(-1/2) (F_omega a)(2(z-u))
    exp(2 i omega(z, u)); the deformed transform is evaluated alias-free on
    the doubled difference lattice from 2x-refined symbol samples.  The
    exactly-constant symbol short-circuits to the identity (delta transform).
    """
    _check_cap(grid)
    if grid.dim != 2 * form.n:
        raise GridMismatch("operator grid dimension must be 2n")
    n = form.n
    total = grid.size
    if getattr(symbol, "constant", None) is not None:
        entries = complex(symbol.constant) * np.eye(total) / grid.cell
        return OperatorMatrix(grid, entries, hermitian=abs(complex(symbol.constant).imag) < 1e-14)
    # F_omega a on the doubled difference lattice
    diff_axes = [
        2.0 * grid.steps[a] * np.arange(-(grid.points[a] - 1), grid.points[a])
        for a in range(2 * n)
    ]
    mesh = np.meshgrid(*diff_axes, indexing="ij")
    targets = np.stack([m.ravel() for m in mesh], axis=-1)
    table = _deformed_ft_at(symbol, form, targets, grid.refine(2))
    table = table.reshape(tuple(len(ax) for ax in diff_axes))
    hermitian = symbol.is_real(grid.refine(2).point_array()) if isinstance(symbol, Symbol) else symbol.is_real()
    # gather the kernel
    multi = np.indices(grid.points).reshape(2 * n, total)
    idx = []
    for a in range(2 * n):
        i = multi[a][:, None].astype(np.int32)
        j = multi[a][None, :].astype(np.int32)
        idx.append(i - j + grid.points[a] - 1)
    kernel = table[tuple(idx)]
    del idx
    pts = grid.point_array()
    phase = (pts @ form.omega_inv) @ pts.T
    kernel = kernel * np.exp(2j * phase)
    kernel *= (2.0 / np.pi) ** n * form.det_abs**-0.5
    if hermitian:
        kernel = 0.5 * (kernel + kernel.conj().T)
    return OperatorMatrix(grid, kernel, hermitian=hermitian)


def phase_weyl_apply_quadrature(symbol, form, big_u: SampledField) -> SampledField:
    """Direct quadrature of (2 pi)^-n |det|^(-1/2) int F_omega a(z0) T_omega(z0) U dz0.

    Cross-validates the kernel route; half shifts are exact gathers on the
    2x upsampled field.
    """
    grid = big_u.grid
    _check_cap(grid)
    if grid.dim != 2 * form.n:
        raise GridMismatch("field grid dimension must be 2n")
    if getattr(symbol, "constant", None) is not None:
        return big_u.with_values(complex(symbol.constant) * big_u.values)
    n = form.n
    pts = grid.point_array()
    fom = _deformed_ft_at(symbol, form, pts, grid.refine(2))
    fine = upsample_double(big_u)
    coeff = (2.0 * np.pi) ** -n * form.det_abs**-0.5 * grid.cell
    phase_mat = (pts @ form.omega_inv) @ pts.T  # omega(z_t, z0_p)
    out = np.zeros(grid.size, dtype=complex)
    multi = np.indices(grid.points).reshape(2 * n, grid.size)
    fine_vals = fine.values
    for p in range(grid.size):
        gather = tuple(
            np.mod(2 * multi[a] - multi[a][p] + grid.points[a] // 2, 2 * grid.points[a])
            for a in range(2 * n)
        )
        shifted = fine_vals[gather]
        out += fom[p] * np.exp(-1j * phase_mat[:, p]) * shifted
    out *= coeff
    return SampledField(grid, out.reshape(grid.points))


def upsample_double(field: SampledField) -> SampledField:
    """Exact trigonometric 2x upsampling (same box, half step)."""
    from .grid import _mode_numbers

    grid = field.grid
    coef = scipy.fft.fftn(field.values)
    big = np.zeros(tuple(2 * m for m in grid.points), dtype=complex)
    sel = tuple(_mode_numbers(m) for m in grid.points)
    big[np.ix_(*sel)] = coef
    fine = scipy.fft.ifftn(big) * 2 ** grid.dim
    return SampledField(grid.refine(2), fine)


# ---------------------------------------------------------------------------
# Twisted product
# ---------------------------------------------------------------------------


def twisted_product(symbol_a, symbol_b, grid: GridSpec) -> SampledSymbol:
    """Moyal product a # b on a common R^2 symbol grid (n = 1).

    Works in the sigma-Fourier domain: a twisted convolution with the
    half-symplectic phase, evaluated row-by-row with circular FFT
    convolutions, then transformed back.
    """
    if grid.dim != 2:
        raise GridCapExceeded("twisted_product is implemented for n = 1 symbols")
    if grid.size > TWISTED_CAP:
        raise GridCapExceeded(f"{grid.size} points exceed the twisted product cap")
    fa = sympl_fourier_sigma(sample_symbol_if_needed(symbol_a, grid))
    fb = sympl_fourier_sigma(sample_symbol_if_needed(symbol_b, grid))
    gj = fa.grid
    xs = gj.axis(0)
    xis = gj.axis(1)
    nx = gj.points[0]
    out = np.zeros(gj.points, dtype=complex)
    fb_vals = fb.values
    fa_vals = fa.values
    fft = scipy.fft.fft
    ifft = scipy.fft.ifft
    nxi = gj.points[1]
    for jx in range(nx):
        g = np.exp(-0.5j * np.outer(xs, xis)) * fb_vals[jx]  # e^{-i xi'_j x_i / 2} FB[jx, :]
        # difference coordinate (i - j) h sits at grid index i - j + N/2
        fa_rows = np.roll(fa_vals, (jx - nx // 2, -(nxi // 2)), axis=(0, 1))
        conv = ifft(fft(g, axis=1) * fft(fa_rows, axis=1), axis=1)
        out += np.exp(0.5j * xis[None, :] * xs[jx]) * conv
    out *= (2.0 * np.pi) ** -1 * gj.cell
    c = sympl_fourier_sigma(SampledField(gj, out))
    return SampledSymbol(c)


def sample_symbol_if_needed(symbol, grid: GridSpec) -> SampledField:
    if isinstance(symbol, SampledSymbol):
        if not symbol.data.grid.close_to(grid):
            raise GridMismatch("sampled symbol lives on a different grid")
        return symbol.data
    return sample_symbol(symbol, grid).data


# ---------------------------------------------------------------------------
# Substitution matrices and conjugation checks
# ---------------------------------------------------------------------------


def substitution_matrix(grid: GridSpec, matrix: np.ndarray) -> np.ndarray:
    """Dense matrix of U -> U(S z) on the grid (trigonometric interpolation)."""
    _check_cap(grid)
    from .grid import _mode_numbers

    matrix = np.asarray(matrix, dtype=float)
    pts = grid.point_array() @ matrix.T
    factors = []
    for a in range(grid.dim):
        m = grid.points[a]
        kmode = _mode_numbers(m)
        freqs = 2.0 * np.pi * kmode / (m * grid.steps[a])
        signs = np.where(kmode % 2, -1.0, 1.0)
        modes = np.exp(1j * np.outer(pts[:, a], freqs)) * signs
        factors.append((modes @ scipy.linalg.dft(m)) / m)
    out = factors[0]
    for fac in factors[1:]:
        out = np.einsum("ts,tr->tsr", out, fac).reshape(out.shape[0], -1)
    return out


def concentrated_test_columns(
    grid: GridSpec, max_index: int = 3, width: float = 2.0**-0.5
) -> np.ndarray:
    """Orthonormal columns spanning hermite wavepackets on a 2d phase grid.

    Periodic-box substitution matrices only represent their continuum
    counterparts on fields concentrated away from the wrap region, so
    matrix-level covariance residuals are evaluated on this subspace.
    ``width`` sets the per-axis packet scale; deformed-structure checks pick
    it so that the pushforward image stays inside the grid band.
    """
    from .wavepacket import hermite_values

    cols = []
    axes = [grid.axis(a) for a in range(grid.dim)]
    for combo in np.ndindex(*(max_index + 1,) * grid.dim):
        vec = np.ones((), dtype=complex)
        for a, k in enumerate(combo):
            shape = [1] * grid.dim
            shape[a] = grid.points[a]
            vec = vec * hermite_values(k, axes[a] / width).reshape(shape)
        cols.append(vec.ravel())
    mat = np.stack(cols, axis=1)
    q, _ = np.linalg.qr(mat)
    return q


@dataclass(frozen=True)
class ConjugationReport:
    residual: float
    s_sigma: np.ndarray
    factor: DarbouxFactor
    raw_matrix_residual: float | None = None


def conjugation_check(
    symbol,
    form,
    s_sigma: np.ndarray,
    grid: GridSpec,
    max_index: int = 3,
    compute_raw: bool = False,
) -> ConjugationReport:
    """Residual of the Darboux-change covariance on operator matrices.

    With f a Darboux factor and f' = f S_sigma, the standard-form operators
    with symbols a o f and a o f' must be conjugate by the substitution
    U -> U(S_sigma z).  ``residual`` is the relative operator residual on
    the concentrated wavepacket subspace (where the periodic box represents
    the plane).  ``compute_raw`` additionally reports the unrestricted
    Frobenius figure, which carries O(1) wrap artifacts of the substitution
    matrices and exists for transparency only.
    """
    s_sigma = np.asarray(s_sigma, dtype=float)
    n = form.n
    jmat = standard_j(n)
    if np.max(np.abs(s_sigma.T @ jmat @ s_sigma - jmat)) > 1e-10:
        raise NotSymplectic("S_sigma is not in Sp(2n, sigma)")
    factor = darboux_factor(form)
    j_form = build_form(jmat)
    a_prime = compose_linear(symbol, factor.f)
    a_second = compose_linear(symbol, factor.f @ s_sigma)
    op_prime = phase_weyl_matrix(a_prime, j_form, grid)
    op_second = phase_weyl_matrix(a_second, j_form, grid)
    m_s = substitution_matrix(grid, s_sigma)
    m_s_inv = substitution_matrix(grid, np.linalg.inv(s_sigma))
    cols = concentrated_test_columns(grid, max_index)
    second_cols = op_second.entries @ cols
    conj_cols = m_s @ (op_prime.entries @ (m_s_inv @ cols))
    num = np.linalg.norm(second_cols - conj_cols)
    den = max(np.linalg.norm(second_cols), 1e-300)
    raw = None
    if compute_raw:
        diff = op_second.entries - m_s @ op_prime.entries @ m_s_inv
        raw = float(np.linalg.norm(diff) / max(np.linalg.norm(op_second.entries), 1e-300))
    return ConjugationReport(
        residual=float(num / den),
        s_sigma=s_sigma,
        factor=factor,
        raw_matrix_residual=raw,
    )


def pushforward_conjugation_residual(
    symbol, form, grid: GridSpec, max_index: int = 3
) -> float:
    """Relative residual of M_f A_omega = A' M_f on the concentrated subspace."""
    factor = darboux_factor(form)
    a_omega = phase_weyl_matrix(symbol, form, grid)
    a_prime = phase_weyl_matrix(
        compose_linear(symbol, factor.f), build_form(standard_j(form.n)), grid
    )
    m_f = abs(np.linalg.det(factor.f)) ** 0.5 * substitution_matrix(grid, factor.f)
    # packet scale tracks the deformation so M_f images stay inside the band
    width = max(float(np.linalg.norm(factor.f, 2)) ** 0.5 * 2.0**-0.5, 2.0**-0.5)
    cols = concentrated_test_columns(grid, max_index, width=width)
    lhs = m_f @ (a_omega.entries @ cols)
    rhs = a_prime.entries @ (m_f @ cols)
    return float(np.linalg.norm(lhs - rhs) / max(np.linalg.norm(rhs), 1e-300))
