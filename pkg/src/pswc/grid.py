"""Uniform periodic grids, quadrature, and Fourier machinery.

Conventions used throughout the package:

* every axis holds ``N`` (even) samples at ``x_j = (j - N/2) * h``, so the
  domain is ``[-L, L)`` with ``L = N*h/2`` and periodic wrap-around;
* the unitary Fourier transform carries the ``(2*pi)**(-d/2)`` normalization
  and maps a grid onto its dual grid (step ``2*pi/(N*h)``) exactly: the
  composition of a forward and a backward call is the identity to rounding;
* linear substitutions ``z -> M z`` are evaluated on the trigonometric
  interpolant of the samples; whenever the map sends lattice points onto
  lattice points the substitution degenerates to an exact index remap.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.fft
import scipy.linalg

from .errors import (
    BoundaryMassWarning,
    DimensionMismatch,
    GridCapExceeded,
    GridMismatch,
    ResampleInaccurate,
)

DEFAULT_POINT_CAP = 2**22
BOUNDARY_SHELL = 0.1
BOUNDARY_MASS_TOL = 1e-8
RESAMPLE_TOL = 1e-6
_LATTICE_EPS = 1e-9


@dataclass(frozen=True)
class GridSpec:
    """Product grid: per-axis point counts and spacings."""

    points: tuple[int, ...]
    steps: tuple[float, ...]

    def __post_init__(self):
        if len(self.points) != len(self.steps):
            raise DimensionMismatch("points/steps length mismatch")
        for n in self.points:
            if n < 8 or n % 2:
                raise GridCapExceeded(f"axis needs an even point count >= 8, got {n}")
        for h in self.steps:
            if not h > 0:
                raise GridCapExceeded(f"axis step must be positive, got {h}")
        if self.size > DEFAULT_POINT_CAP:
            raise GridCapExceeded(f"{self.size} points exceeds cap {DEFAULT_POINT_CAP}")

    @classmethod
    def regular(cls, dim: int, halfwidth: float, points: int) -> "GridSpec":
        """Isotropic grid on [-halfwidth, halfwidth) with `points` per axis."""
        return cls((points,) * dim, (2.0 * halfwidth / points,) * dim)

    @property
    def dim(self) -> int:
        return len(self.points)

    @property
    def size(self) -> int:
        return int(np.prod(self.points))

    @property
    def halfwidths(self) -> tuple[float, ...]:
        return tuple(n * h / 2.0 for n, h in zip(self.points, self.steps))

    @property
    def cell(self) -> float:
        return float(np.prod(self.steps))

    def axis(self, i: int) -> np.ndarray:
        n, h = self.points[i], self.steps[i]
        return (np.arange(n) - n // 2) * h

    def mesh(self) -> list[np.ndarray]:
        """Open (broadcastable) coordinate mesh, one array per axis."""
        out = []
        for i in range(self.dim):
            shape = [1] * self.dim
            shape[i] = self.points[i]
            out.append(self.axis(i).reshape(shape))
        return out

    def point_array(self) -> np.ndarray:
        """All grid points, shape (size, dim), row-major."""
        mesh = np.meshgrid(*[self.axis(i) for i in range(self.dim)], indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=-1)

    def dual(self) -> "GridSpec":
        steps = tuple(2.0 * np.pi / (n * h) for n, h in zip(self.points, self.steps))
        return GridSpec(self.points, steps)

    def refine(self, factor: int = 2) -> "GridSpec":
        """Same extent, `factor` times finer sampling."""
        return GridSpec(
            tuple(n * factor for n in self.points),
            tuple(h / factor for h in self.steps),
        )

    def is_uniform(self) -> bool:
        return len(set(self.points)) == 1 and len(set(self.steps)) == 1

    def close_to(self, other: "GridSpec", rtol: float = 1e-12) -> bool:
        return self.points == other.points and np.allclose(
            self.steps, other.steps, rtol=rtol, atol=0.0
        )


@dataclass(frozen=True)
class SampledField:
    """Complex samples of a function on a GridSpec."""

    grid: GridSpec
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=complex)
        if vals.shape != self.grid.points:
            raise GridMismatch(f"values shape {vals.shape} != grid {self.grid.points}")
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_function(cls, grid: GridSpec, fn, warn_boundary: bool = True) -> "SampledField":
        """Sample ``fn`` (vectorized over a point array of shape (..., dim))."""
        pts = grid.point_array()
        vals = np.asarray(fn(pts), dtype=complex).reshape(grid.points)
        field = cls(grid, vals)
        if warn_boundary:
            check_boundary_mass(field)
        return field

    def norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.values) ** 2) * self.grid.cell))

    def with_values(self, values: np.ndarray) -> "SampledField":
        return SampledField(self.grid, values)


def inner(u: SampledField, v: SampledField) -> complex:
    """Quadrature approximation of the L2 scalar product (u|v) = int u * conj(v).

    Linear in the first argument, conjugate-linear in the second.
    """
    if not u.grid.close_to(v.grid):
        raise GridMismatch("inner product needs both fields on the same grid")
    return complex(np.vdot(v.values, u.values) * u.grid.cell)


def boundary_mass_fraction(field: SampledField, shell: float = BOUNDARY_SHELL) -> float:
    """Fraction of squared mass with any coordinate in the outer `shell` band."""
    mask = np.zeros(field.grid.points, dtype=bool)
    for i, ax in enumerate(field.grid.mesh()):
        cut = (1.0 - shell) * field.grid.halfwidths[i]
        mask |= np.broadcast_to(np.abs(ax) >= cut, field.grid.points)
    total = np.sum(np.abs(field.values) ** 2)
    if total == 0.0:
        return 0.0
    return float(np.sum(np.abs(field.values[mask]) ** 2) / total)


def check_boundary_mass(field: SampledField, tol: float = BOUNDARY_MASS_TOL) -> float:
    frac = boundary_mass_fraction(field)
    if frac > tol:
        warnings.warn(
            f"{frac:.2e} of the squared mass lies in the outer {BOUNDARY_SHELL:.0%} shell; "
            "periodization error may dominate",
            BoundaryMassWarning,
            stacklevel=2,
        )
    return frac


# ---------------------------------------------------------------------------
# Fourier transform between a grid and its dual
# ---------------------------------------------------------------------------


def _checkerboard(grid: GridSpec) -> np.ndarray:
    out = np.ones((), dtype=float)
    for n in grid.points:
        sign = np.where(np.arange(n) % 2, -1.0, 1.0)
        out = np.multiply.outer(out, sign)
    return out


def fourier(field: SampledField, sign: int = +1) -> SampledField:
    """Unitary Fourier transform with (2*pi)**(-d/2) normalization.

    ``sign=+1`` uses the kernel ``exp(-i xi.x)``, ``sign=-1`` the conjugate
    kernel; both map samples on a grid to samples on its dual grid, and
    ``fourier(fourier(u, +1), -1)`` returns ``u`` exactly (up to rounding).
    """
    if sign not in (+1, -1):
        raise ValueError("sign must be +1 or -1")
    grid = field.grid
    board = _checkerboard(grid)
    work = board * field.values
    if sign > 0:
        work = scipy.fft.fftn(work)
    else:
        work = scipy.fft.ifftn(work) * grid.size
    work *= board
    # exact constant from the (j - N/2)(m - N/2) index offsets
    const = 1.0
    for n, h in zip(grid.points, grid.steps):
        const *= (-1.0 if (n // 2) % 2 else 1.0) * h / np.sqrt(2.0 * np.pi)
    if sign < 0:
        pass  # offsets are symmetric; the constant is identical for both signs
    return SampledField(grid.dual(), const * work)


# ---------------------------------------------------------------------------
# Substitutions z -> M z on the trigonometric interpolant
# ---------------------------------------------------------------------------


def _mode_numbers(n: int) -> np.ndarray:
    """Integer FFT mode numbers [0, 1, ..., n/2-1, -n/2, ..., -1]."""
    return ((np.arange(n) + n // 2) % n) - n // 2


def _mode_frequencies(grid: GridSpec, i: int) -> np.ndarray:
    n, h = grid.points[i], grid.steps[i]
    return 2.0 * np.pi * _mode_numbers(n) / (n * h)


def _interp_coeffs(field: SampledField) -> np.ndarray:
    """Coefficients b_k with field(x) = sum_k b_k exp(i kappa_k . x)."""
    grid = field.grid
    coef = scipy.fft.fftn(field.values) / grid.size
    for i, n in enumerate(grid.points):
        sign = np.where(_mode_numbers(n) % 2, -1.0, 1.0)
        shape = [1] * grid.dim
        shape[i] = n
        coef = coef * sign.reshape(shape)
    return coef


def eval_trig(field: SampledField, points: np.ndarray, chunk: int = 4096) -> np.ndarray:
    """Evaluate the periodic trigonometric interpolant at arbitrary points.

    ``points`` has shape (..., dim); evaluation wraps periodically.
    """
    grid = field.grid
    pts = np.asarray(points, dtype=float).reshape(-1, grid.dim)
    coef = _interp_coeffs(field)
    freqs = [_mode_frequencies(grid, i) for i in range(grid.dim)]
    out = np.empty(pts.shape[0], dtype=complex)
    for start in range(0, pts.shape[0], chunk):
        block = pts[start : start + chunk]
        phase0 = np.exp(1j * np.outer(block[:, 0], freqs[0]))
        acc = phase0 @ coef.reshape(grid.points[0], -1)
        for i in range(1, grid.dim):
            rest = int(np.prod(grid.points[i + 1 :], dtype=int))
            acc = acc.reshape(block.shape[0], grid.points[i], rest)
            phase = np.exp(1j * np.outer(block[:, i], freqs[i]))
            acc = np.einsum("tk,tkr->tr", phase, acc)
        out[start : start + chunk] = acc.reshape(-1)
    return out.reshape(np.asarray(points).shape[:-1])


def translate(field: SampledField, shift: np.ndarray) -> SampledField:
    """Samples of ``z -> field(z - shift)`` on the same grid.

    Integer-lattice shifts reduce to an exact roll; otherwise the shift acts
    as an exact phase on the interpolant (spectral accuracy).
    """
    grid = field.grid
    shift = np.asarray(shift, dtype=float)
    if shift.shape != (grid.dim,):
        raise DimensionMismatch("shift must have one entry per axis")
    ratios = shift / np.asarray(grid.steps)
    if np.all(np.abs(ratios - np.round(ratios)) < _LATTICE_EPS):
        rolled = np.roll(field.values, [int(r) for r in np.round(ratios)], axis=tuple(range(grid.dim)))
        return field.with_values(rolled)
    coef = scipy.fft.fftn(field.values)
    for i in range(grid.dim):
        shape = [1] * grid.dim
        shape[i] = grid.points[i]
        coef = coef * np.exp(-1j * _mode_frequencies(grid, i) * shift[i]).reshape(shape)
    return field.with_values(scipy.fft.ifftn(coef))


def axis_shift(field: SampledField, axis: int, offsets: np.ndarray) -> SampledField:
    """Samples of ``z -> field(..., z_axis + offset(z_other), ...)``.

    ``offsets`` must broadcast against the grid shape with axis `axis`
    reduced to length one.
    """
    grid = field.grid
    coef = scipy.fft.fft(field.values, axis=axis)
    shape = [1] * grid.dim
    shape[axis] = grid.points[axis]
    freq = _mode_frequencies(grid, axis).reshape(shape)
    coef = coef * np.exp(1j * freq * np.asarray(offsets))
    return field.with_values(scipy.fft.ifft(coef, axis=axis))


def _monomial_structure(matrix: np.ndarray) -> list[tuple[int, float]] | None:
    """Return [(source_axis, value), ...] per row if M has one nonzero per row/col."""
    d = matrix.shape[0]
    cols_used = set()
    structure = []
    for a in range(d):
        nz = np.nonzero(np.abs(matrix[a]) > 1e-14)[0]
        if len(nz) != 1 or nz[0] in cols_used:
            return None
        cols_used.add(int(nz[0]))
        structure.append((int(nz[0]), float(matrix[a, nz[0]])))
    return structure


def _substitute_monomial(field: SampledField, structure) -> SampledField:
    """Exact substitution by a monomial matrix; output grid is M^{-1} . grid."""
    grid = field.grid
    d = grid.dim
    # output axis b carries source axis a (where M_{a,b} != 0) rescaled by 1/|m|
    out_points = [0] * d
    out_steps = [0.0] * d
    perm = [0] * d  # perm[b] = source axis a feeding output axis b
    for a, (b, m) in enumerate(structure):
        out_points[b] = grid.points[a]
        out_steps[b] = grid.steps[a] / abs(m)
        perm[b] = a
    out_grid = GridSpec(tuple(out_points), tuple(out_steps))
    # gather: out[j_1..j_d] = field[i_1..i_d], i_a = sign*(j_b - N/2) + N/2 mod N
    idx = []
    for a, (b, m) in enumerate(structure):
        n = grid.points[a]
        j = np.arange(n)
        base = np.sign(m) * (j - n // 2) + n // 2
        idx.append(np.mod(base.astype(int), n))
    gathered = field.values[np.ix_(*idx)]  # axes ordered by source axis a, indexed by j_{b(a)}
    # move axis a (indexed by output axis b=structure[a][0]) into position b
    order = np.argsort([structure[a][0] for a in range(d)])
    out_vals = np.transpose(gathered, axes=tuple(order))
    return SampledField(out_grid, out_vals)


def _integer_remap(field: SampledField, matrix: np.ndarray) -> SampledField | None:
    """Exact substitution when M maps the (uniform) lattice onto itself."""
    grid = field.grid
    if not grid.is_uniform():
        return None
    if np.any(np.abs(matrix - np.round(matrix)) > _LATTICE_EPS):
        return None
    m = np.round(matrix).astype(int)
    if abs(round(np.linalg.det(m))) != 1:
        return None
    n = grid.points[0]
    half = n // 2
    jays = np.indices(grid.points).reshape(grid.dim, -1) - half
    src = m @ jays + half
    flat = np.ravel_multi_index(np.mod(src, n), grid.points)
    return field.with_values(field.values.ravel()[flat].reshape(grid.points))


def _substitute_shears(field: SampledField, matrix: np.ndarray) -> SampledField:
    """Substitution by a general matrix via PLU shear/dilation factorization."""
    grid = field.grid
    if not grid.is_uniform():
        raise GridMismatch("shear substitution path needs a uniform grid")
    perm, low, upp = scipy.linalg.lu(matrix)
    out = field
    # permutation part (acts exactly)
    structure = _monomial_structure(perm)
    out = _substitute_monomial(out, structure)
    # unit lower triangular: row a reads lower axes, apply rows in ascending order
    d = grid.dim
    mesh = grid.mesh()
    for a in range(1, d):
        coeffs = low[a, :a]
        if np.all(np.abs(coeffs) < 1e-15):
            continue
        off = sum(c * m for c, m in zip(coeffs, mesh[:a]))
        out = axis_shift(out, a, off)
    # upper triangular = diagonal dilation then unit upper (rows descending)
    diag = np.diag(upp)
    unit_upp = upp / diag[:, None]
    for a in range(d):
        if abs(diag[a] - 1.0) < 1e-15:
            continue
        pts = grid.axis(a) * diag[a]
        n = grid.points[a]
        freqs = _mode_frequencies(grid, a)
        sign = np.where(_mode_numbers(n) % 2, -1.0, 1.0)
        modes = np.exp(1j * np.outer(pts, freqs)) * sign
        coef = scipy.fft.fft(out.values, axis=a) / n
        out = out.with_values(np.moveaxis(
            np.tensordot(modes, np.moveaxis(coef, a, 0), axes=(1, 0)), 0, a))
    for a in range(d - 2, -1, -1):
        coeffs = unit_upp[a, a + 1 :]
        if np.all(np.abs(coeffs) < 1e-15):
            continue
        off = sum(c * m for c, m in zip(coeffs, mesh[a + 1 :]))
        out = axis_shift(out, a, off)
    return out


def substitute(
    field: SampledField,
    matrix: np.ndarray,
    out_grid: GridSpec | None = None,
    dense_limit: int = 4096,
) -> SampledField:
    """Samples of ``z -> field(M z)`` (periodic wrap).

    With ``out_grid=None`` the output grid is chosen automatically:
    ``M^{-1} . grid`` for monomial M (exact index remap), the input grid
    otherwise.  Explicit output grids are honored with interpolation.
    """
    grid = field.grid
    matrix = np.asarray(matrix, dtype=float)
    if matrix.shape != (grid.dim, grid.dim):
        raise DimensionMismatch("substitution matrix must be dim x dim")
    structure = _monomial_structure(matrix)
    if structure is not None and out_grid is None:
        return _substitute_monomial(field, structure)
    remapped = _integer_remap(field, matrix) if out_grid is None else None
    if remapped is not None:
        return remapped
    target = out_grid if out_grid is not None else grid
    if target.size <= dense_limit or grid.dim <= 2:
        pts = target.point_array() @ matrix.T
        vals = eval_trig(field, pts).reshape(target.points)
        return SampledField(target, vals)
    if out_grid is not None and not grid.close_to(out_grid):
        raise GridMismatch("large off-grid substitution targets must reuse the input grid")
    return _substitute_shears(field, matrix)


def resample_roundtrip_error(field: SampledField, matrix: np.ndarray) -> float:
    """Relative round-trip residual of substitution by M then M^{-1}."""
    fwd = substitute(field, matrix, out_grid=field.grid)
    back = substitute(fwd, np.linalg.inv(matrix), out_grid=field.grid)
    ref = field.norm()
    if ref == 0.0:
        return 0.0
    return float(np.sqrt(np.sum(np.abs(back.values - field.values) ** 2) * field.grid.cell) / ref)


def parity(field: SampledField) -> SampledField:
    """Samples of z -> field(-z); exact on the symmetric grid."""
    return _substitute_monomial(
        field, [(a, -1.0) for a in range(field.grid.dim)]
    )


# ---------------------------------------------------------------------------
# Symplectic Fourier transforms
# ---------------------------------------------------------------------------


def _standard_j(n: int) -> np.ndarray:
    eye = np.eye(n)
    zero = np.zeros((n, n))
    return np.block([[zero, eye], [-eye, zero]])


def sympl_fourier_sigma(a: SampledField) -> SampledField:
    """Standard symplectic Fourier transform on a 2n-dimensional grid.

    Computed as the plain Fourier transform followed by the exact lattice
    substitution z -> J z on the frequency grid; applying it twice returns
    the input to rounding accuracy.
    """
    if a.grid.dim % 2:
        raise GridMismatch("symplectic transform needs an even-dimensional grid")
    n = a.grid.dim // 2
    fa = fourier(a, +1)
    return substitute(fa, _standard_j(n))


def sympl_fourier_omega(a: SampledField, form, tol: float = RESAMPLE_TOL) -> SampledField:
    """Deformed symplectic Fourier transform for the form with matrix Omega.

    Factorized as scaled-substitution . parity . Fourier; the substitution
    uses an exact index remap whenever Omega is lattice-compatible and
    trigonometric resampling otherwise (raising ResampleInaccurate when the
    round-trip error estimate exceeds `tol`).
    """
    if a.grid.dim != 2 * form.n:
        raise GridMismatch("grid dimension does not match the symplectic form")
    fa = fourier(a, +1)
    flipped = parity(fa)
    scale = form.det_abs ** -0.5
    omega_inv = form.omega_inv
    structure = _monomial_structure(omega_inv)
    if structure is not None:
        out = _substitute_monomial(flipped, structure)
        return out.with_values(scale * out.values)
    remapped = _integer_remap(flipped, omega_inv)
    if remapped is not None:
        return remapped.with_values(scale * remapped.values)
    err = resample_roundtrip_error(flipped, omega_inv)
    if err > tol:
        raise ResampleInaccurate(
            f"Omega substitution falls off-lattice with error estimate {err:.2e} > {tol:.1e}"
        )
    out = substitute(flipped, omega_inv, out_grid=flipped.grid)
    return out.with_values(scale * out.values)


def pushforward_mf(
    u: SampledField,
    factor,
    direction: str = "forward",
    tol: float = RESAMPLE_TOL,
) -> SampledField:
    """Unitary pushforward M_f u(z) = |det f|^(1/2) u(f z) on the same grid.

    ``direction="inverse"`` applies M_f^{-1} = M_{f^{-1}}.  Off-lattice
    substitutions are resampled trigonometrically; ResampleInaccurate is
    raised when the round-trip estimate exceeds `tol`.
    """
    if direction not in ("forward", "inverse"):
        raise ValueError("direction must be 'forward' or 'inverse'")
    mat = np.asarray(factor.f if hasattr(factor, "f") else factor, dtype=float)
    if direction == "inverse":
        mat = np.linalg.inv(mat)
    if u.grid.dim != mat.shape[0]:
        raise DimensionMismatch("factor dimension does not match the grid")
    scale = abs(np.linalg.det(mat)) ** 0.5
    if np.allclose(mat, np.eye(u.grid.dim), atol=1e-15):
        return u.with_values(scale * u.values)
    out = substitute(u, mat, out_grid=u.grid)
    out = out.with_values(scale * out.values)
    # M_f is unitary; norm loss measures content pushed through the periodic
    # boundary (wrap) or beyond the band by the substitution
    ref = u.norm()
    if ref > 0.0:
        err = abs(out.norm() - ref) / ref
        if err > tol:
            raise ResampleInaccurate(
                f"pushforward unitarity defect {err:.2e} > {tol:.1e}"
            )
    return out


def quadrature_ft(field: SampledField, kpoints: np.ndarray, chunk: int = 4096) -> np.ndarray:
    """Plain quadrature of int exp(-i k.x) field(x) dx at arbitrary k.

    Trapezoid (= rectangle, periodic) rule over the grid box; accurate while
    |k| stays below the source Nyquist frequency and the field decays inside
    the box.
    """
    grid = field.grid
    kpts = np.asarray(kpoints, dtype=float).reshape(-1, grid.dim)
    out = np.empty(kpts.shape[0], dtype=complex)
    axes = [grid.axis(i) for i in range(grid.dim)]
    for start in range(0, kpts.shape[0], chunk):
        block = kpts[start : start + chunk]
        phase0 = np.exp(-1j * np.outer(block[:, 0], axes[0]))
        acc = phase0 @ field.values.reshape(grid.points[0], -1)
        if grid.dim == 2:
            phase = np.exp(-1j * np.outer(block[:, 1], axes[1]))
            out[start : start + chunk] = np.sum(acc * phase, axis=1)
            continue
        for i in range(1, grid.dim):
            rest = int(np.prod(grid.points[i + 1 :], dtype=int))
            acc = acc.reshape(block.shape[0], grid.points[i], rest)
            phase = np.exp(-1j * np.outer(block[:, i], axes[i]))
            acc = np.einsum("tk,tkr->tr", phase, acc)
        out[start : start + chunk] = acc.reshape(-1)
    out *= grid.cell
    return out.reshape(np.asarray(kpoints).shape[:-1])
