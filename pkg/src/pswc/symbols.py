"""Phase-space symbols: closed-form evaluators and refined-grid samples.

Operators need symbol values at half-lattice midpoints and on doubled
lattices, so sampled symbols are only accepted on grids that contain those
points exactly; closed-form symbols are evaluated wherever needed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, MidpointUnavailable
from .grid import GridSpec, SampledField, _LATTICE_EPS


@dataclass(frozen=True)
class Symbol:
    """Closed-form symbol a(z) on R^dim.

    ``constant`` marks the exactly-constant symbol (its deformed Fourier
    transform is handled as a delta analytically).  ``gradient`` optionally
    evaluates first partials for the Shubin diagnostics.
    """

    dim: int
    fn: object
    constant: complex | None = None
    gradient: object | None = None

    def evaluate(self, pts: np.ndarray) -> np.ndarray:
        pts = np.asarray(pts, dtype=float)
        if pts.shape[-1] != self.dim:
            raise DimensionMismatch(f"symbol expects points in R^{self.dim}")
        if self.constant is not None:
            return np.full(pts.shape[:-1], complex(self.constant))
        return np.asarray(self.fn(pts), dtype=complex)

    def is_real(self, probe: np.ndarray | None = None) -> bool:
        if self.constant is not None:
            return abs(complex(self.constant).imag) < 1e-14
        if probe is None:
            probe = np.linspace(-3.0, 3.0, 7)
            probe = np.stack(
                np.meshgrid(*([probe] * self.dim), indexing="ij"), axis=-1
            ).reshape(-1, self.dim)
        vals = self.evaluate(probe)
        scale = max(float(np.max(np.abs(vals))), 1e-300)
        return float(np.max(np.abs(vals.imag))) < 1e-12 * scale


@dataclass(frozen=True)
class SampledSymbol:
    """Symbol given by samples; evaluation is an exact lattice lookup."""

    data: SampledField

    @property
    def dim(self) -> int:
        return self.data.grid.dim

    constant = None

    def evaluate(self, pts: np.ndarray) -> np.ndarray:
        grid = self.data.grid
        pts = np.asarray(pts, dtype=float)
        if pts.shape[-1] != grid.dim:
            raise DimensionMismatch(f"symbol expects points in R^{grid.dim}")
        flat = pts.reshape(-1, grid.dim)
        idx = []
        for a in range(grid.dim):
            r = flat[:, a] / grid.steps[a] + grid.points[a] // 2
            ri = np.round(r)
            if np.max(np.abs(r - ri)) > _LATTICE_EPS:
                raise MidpointUnavailable(
                    "sampled symbol asked off its lattice (needs a refined grid)"
                )
            if np.any(ri < 0) or np.any(ri >= grid.points[a]):
                raise MidpointUnavailable("sampled symbol asked outside its grid")
            idx.append(ri.astype(int))
        vals = self.data.values[tuple(idx)]
        return vals.reshape(pts.shape[:-1])

    def is_real(self, probe=None) -> bool:
        scale = max(float(np.max(np.abs(self.data.values))), 1e-300)
        return float(np.max(np.abs(self.data.values.imag))) < 1e-12 * scale


def sample_symbol(symbol, grid: GridSpec) -> SampledSymbol:
    vals = symbol.evaluate(grid.point_array()).reshape(grid.points)
    return SampledSymbol(SampledField(grid, vals))


# ---------------------------------------------------------------------------
# Builtin symbols
# ---------------------------------------------------------------------------


def constant(value: complex, dim: int = 2) -> Symbol:
    return Symbol(dim=dim, fn=lambda p: np.full(p.shape[:-1], complex(value)), constant=value)


def harmonic(dim: int = 2) -> Symbol:
    """a(z) = |z|^2 / 2."""
    return Symbol(
        dim=dim,
        fn=lambda p: 0.5 * np.sum(p**2, axis=-1) + 0j,
        gradient=lambda p: p.astype(complex),
    )


def quadratic_form(m: np.ndarray) -> Symbol:
    """a(z) = M z . z / 2 for symmetric positive M."""
    m = np.asarray(m, dtype=float)
    return Symbol(
        dim=m.shape[0],
        fn=lambda p: 0.5 * np.einsum("...a,ab,...b->...", p, m, p) + 0j,
        gradient=lambda p: np.einsum("ab,...b->...a", m, p).astype(complex),
    )


def gaussian(width: float = 1.0, dim: int = 2) -> Symbol:
    """a(z) = exp(-|z|^2 / (2 width^2))."""
    w2 = 2.0 * width * width
    g = lambda p: np.exp(-np.sum(p**2, axis=-1) / w2) + 0j
    return Symbol(
        dim=dim,
        fn=g,
        gradient=lambda p: (-2.0 / w2) * p * g(p)[..., None],
    )


def coordinate(axis: int, dim: int = 2) -> Symbol:
    """a(z) = z_axis (linear-x is axis 0, linear-xi is axis n)."""

    def grad(p):
        out = np.zeros(p.shape, dtype=complex)
        out[..., axis] = 1.0
        return out

    return Symbol(dim=dim, fn=lambda p: p[..., axis] + 0j, gradient=grad)


def gaussian_taper(symbol: Symbol, width: float) -> Symbol:
    """Multiply by exp(-|z|^2 / (2 width^2))."""
    w2 = 2.0 * width * width
    return Symbol(
        dim=symbol.dim,
        fn=lambda p: symbol.evaluate(p) * np.exp(-np.sum(p**2, axis=-1) / w2),
    )


def _smoothstep(y: np.ndarray) -> np.ndarray:
    """C-infinity step: 0 for y <= 0, 1 for y >= 1."""
    def bump(t):
        out = np.zeros_like(t)
        pos = t > 0
        out[pos] = np.exp(-1.0 / t[pos])
        return out

    a = bump(np.asarray(y, dtype=float))
    b = bump(1.0 - np.asarray(y, dtype=float))
    return a / (a + b)


def flattop_taper(symbol: Symbol, r_flat: float, r_zero: float) -> Symbol:
    """Radial C-infinity window: exactly 1 for |z| <= r_flat, 0 for |z| >= r_zero."""
    if not r_zero > r_flat > 0:
        raise ValueError("need 0 < r_flat < r_zero")

    def windowed(p):
        r = np.sqrt(np.sum(p**2, axis=-1))
        return symbol.evaluate(p) * _smoothstep((r_zero - r) / (r_zero - r_flat))

    return Symbol(dim=symbol.dim, fn=windowed)


def box_flattop_taper(symbol: Symbol, flat, zero) -> Symbol:
    """Per-axis C-infinity window: 1 inside the `flat` box, 0 outside `zero`.

    Useful on anisotropic grids where some axes have room for a gentle
    transition (wider roll-off means weaker derivatives and less
    non-locality leaking into the core).
    """
    flat = np.asarray(flat, dtype=float)
    zero = np.asarray(zero, dtype=float)
    if np.any(zero <= flat) or np.any(flat <= 0):
        raise ValueError("need 0 < flat < zero per axis")

    def windowed(p):
        out = symbol.evaluate(p)
        for a in range(symbol.dim):
            out = out * _smoothstep((zero[a] - np.abs(p[..., a])) / (zero[a] - flat[a]))
        return out

    return Symbol(dim=symbol.dim, fn=windowed)


def compose_linear(symbol, matrix: np.ndarray) -> Symbol:
    """Pullback a(f z) of a closed-form or sampled symbol along f (off-lattice
    evaluation requires the closed form)."""
    matrix = np.asarray(matrix, dtype=float)
    return Symbol(
        dim=matrix.shape[1],
        fn=lambda p: symbol.evaluate(p @ matrix.T),
        constant=getattr(symbol, "constant", None),
    )


def lift_symbol(symbol, form) -> Symbol:
    """Double-phase-space symbol (z, zeta) -> a(z - Omega zeta / 2)."""
    two_n = 2 * form.n
    if symbol.dim != two_n:
        raise DimensionMismatch("lift needs a symbol on R^{2n}")
    omega = form.omega

    def lifted(p):
        z = p[..., :two_n]
        zeta = p[..., two_n:]
        return symbol.evaluate(z - 0.5 * zeta @ omega.T)

    return Symbol(dim=2 * two_n, fn=lifted, constant=getattr(symbol, "constant", None))


BUILTIN_SYMBOLS = {
    "harmonic": lambda dim=2: harmonic(dim),
    "gaussian": lambda dim=2: gaussian(1.0, dim),
    "constant": lambda dim=2: constant(1.0, dim),
    "linear-x": lambda dim=2: coordinate(0, dim),
    "linear-xi": lambda dim=2: coordinate(dim // 2, dim),
}
