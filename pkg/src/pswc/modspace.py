"""Modulation-space norms, symbol-class norms, and concentration checks.

All norms are grid quadratures of their defining integrals; "bounded
operator" style statements are reported as empirical ratios over recorded
test sets, never as proved facts.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BoundNotSatisfied, GridCapExceeded, GridMismatch
from .grid import GridSpec, SampledField, pushforward_mf
from .symbols import SampledSymbol, compose_linear, sample_symbol
from .symplectic import DarbouxFactor, WignerEllipsoid, symplectic_capacity
from .wavepacket import (
    Window,
    cross_wigner,
    wavepacket,
    wavepacket_adjoint,
    wavepacket_f,
    wavepacket_f_adjoint,
)

SJOSTRAND_AXIS_CAP = 24
MEMBERSHIP_RESIDUAL_TOL = 1e-4


@dataclass(frozen=True)
class ModNormParams:
    """Weight exponent s >= 0, integrability q >= 1 (or inf), and window."""

    s: float
    q: float
    window: Window

    def __post_init__(self):
        if self.s < 0:
            raise ValueError("weight exponent s must be >= 0")
        if not (self.q >= 1):
            raise ValueError("q must be >= 1 (use np.inf for the sup norm)")


def vs_weight(points: np.ndarray, s: float) -> np.ndarray:
    """v_s(z) = (1 + |z|^2)^(s/2)."""
    return (1.0 + np.sum(np.asarray(points) ** 2, axis=-1)) ** (s / 2.0)


def weight_inequality_constant(f: np.ndarray, s: float) -> float:
    """C_{s,f} = (1 + |f|^2)^(s/2) with |f| the spectral norm."""
    return float((1.0 + np.linalg.norm(f, 2) ** 2) ** (s / 2.0))


def mod_norm(u: SampledField, params: ModNormParams) -> float:
    """Weighted L^q norm of the wavepacket transform of u.

    For q = inf this is the grid sup of |W_phi u| v_s (the dual-space norm
    in the s = 0 case).
    """
    w = wavepacket(params.window, u)
    weight = vs_weight(w.grid.point_array().reshape(w.grid.points + (w.grid.dim,)), params.s)
    vals = np.abs(w.values) * weight
    if np.isinf(params.q):
        return float(np.max(vals))
    return float((np.sum(vals**params.q) * w.grid.cell) ** (1.0 / params.q))


def sjostrand_norm(symbol, window: Window, s: float = 0.0) -> float:
    """Symbol-class norm: integral over zeta of sup_z |W(a, Phi)(z, zeta) v_s(z)|.

    n = 1 only; the window lives on the R^2 symbol grid, and the double-grid
    Wigner transform is capped at 24 points per axis.
    """
    grid = window.field.grid
    if grid.dim != 2:
        raise GridMismatch("sjostrand_norm needs an R^2 window")
    if max(grid.points) > SJOSTRAND_AXIS_CAP:
        raise GridCapExceeded(
            f"double-grid transform capped at {SJOSTRAND_AXIS_CAP} points per axis"
        )
    if isinstance(symbol, SampledSymbol):
        if not symbol.data.grid.close_to(grid):
            raise GridMismatch("sampled symbol and window must share the grid")
        field = symbol.data
    else:
        field = sample_symbol(symbol, grid).data
    big = cross_wigner(field, window.field)
    zpts = np.stack(
        np.meshgrid(big.grid.axis(0), big.grid.axis(1), indexing="ij"), axis=-1
    )
    weight = vs_weight(zpts, s)[:, :, None, None]
    sup_z = np.max(np.abs(big.values) * weight, axis=(0, 1))
    zeta_cell = big.grid.steps[2] * big.grid.steps[3]
    return float(np.sum(sup_z) * zeta_cell)


@dataclass(frozen=True)
class InvarianceReport:
    norm_pullback: float
    norm_reference: float
    ratio: float
    both_finite: bool


def sjostrand_invariance_check(symbol, f: np.ndarray, window: Window, s: float = 0.0) -> InvarianceReport:
    """Compare |a o f| against |a| measured with the pushed-forward window.

    The pullback norm uses the original window; the reference norm measures
    a with the window transported by f^{-1} (the pairing under which linear
    changes of variables leave the class invariant).
    """
    f = np.asarray(f, dtype=float)
    grid = window.field.grid
    pulled = sjostrand_norm(compose_linear(symbol, f), window, s)
    # transported window (f^{-1})^* Phi = Phi o f^{-1}, renormalized on-grid
    from .grid import substitute

    transported = substitute(window.field, np.linalg.inv(f), out_grid=grid)
    norm = transported.norm()
    transported = transported.with_values(transported.values / norm)
    reference = sjostrand_norm(symbol, Window(transported), s)
    both = np.isfinite(pulled) and np.isfinite(reference)
    ratio = pulled / reference if reference > 0 else np.inf
    return InvarianceReport(
        norm_pullback=float(pulled),
        norm_reference=float(reference),
        ratio=float(ratio),
        both_finite=bool(both),
    )


@dataclass(frozen=True)
class MembershipReport:
    member: bool
    residual: float
    pullback_mod_norm: float


def range_membership(
    big_u: SampledField,
    factor: DarbouxFactor,
    phi: Window,
    params: ModNormParams,
    tol: float = MEMBERSHIP_RESIDUAL_TOL,
) -> MembershipReport:
    """Project onto the range of W_{f,phi} and report residual and pullback norm."""
    u = wavepacket_f_adjoint(factor, phi, big_u)
    proj = wavepacket_f(factor, phi, u, out_grid=big_u.grid)
    ref = big_u.norm()
    residual = (
        0.0
        if ref == 0.0
        else float(
            np.sqrt(np.sum(np.abs(proj.values - big_u.values) ** 2) * big_u.grid.cell) / ref
        )
    )
    norm = mod_norm(u, params)
    return MembershipReport(
        member=bool(residual <= tol and np.isfinite(norm)),
        residual=residual,
        pullback_mod_norm=norm,
    )


@dataclass(frozen=True)
class RegularityReport:
    max_ratio: float
    memberships: list
    ratios: list


def propreg_check(
    symbol, form, factor: DarbouxFactor, phi: Window, params: ModNormParams, testset
) -> RegularityReport:
    """Apply the deformed operator to range members and re-test membership.

    Reports the worst output/input modulation-norm ratio (an empirical
    operator bound on the wavepacket image space).
    """
    from .weyl import phase_weyl_matrix

    ratios = []
    memberships = []
    op = None
    for big_u in testset:
        if op is None:
            op = phase_weyl_matrix(symbol, form, big_u.grid)
        out = op.apply(big_u)
        rep_in = range_membership(big_u, factor, phi, params)
        rep_out = range_membership(out, factor, phi, params)
        memberships.append((rep_in, rep_out))
        if rep_in.pullback_mod_norm > 0:
            ratios.append(rep_out.pullback_mod_norm / rep_in.pullback_mod_norm)
    return RegularityReport(
        max_ratio=float(max(ratios)) if ratios else 0.0,
        memberships=memberships,
        ratios=[float(r) for r in ratios],
    )


@dataclass(frozen=True)
class ConcentrationVerdict:
    verdict: str  # "CONSISTENT" or "VIOLATES"
    capacity: float
    envelope_constant: float


def concentration_certificate(
    big_u: SampledField,
    ellipsoid: WignerEllipsoid,
    fit_fraction: float = 0.5,
    check_fraction: float = 0.9,
    slack: float = 1.05,
) -> ConcentrationVerdict:
    """Uncertainty certificate for sub-Gaussian phase-space concentration.

    The envelope constant C is fitted as the max of |U| exp(+M z.z) over the
    central half-domain; the bound |U| <= C exp(-M z.z) is then checked up
    to the periodization shell and BoundNotSatisfied raised if it fails.
    The verdict is VIOLATES when the ellipsoid's symplectic capacity falls
    below pi: no field obeying such an envelope fits any wavepacket image
    space.
    """
    grid = big_u.grid
    pts = grid.point_array().reshape(grid.points + (grid.dim,))
    quad = np.einsum("...a,ab,...b->...", pts, ellipsoid.m, pts)
    absvals = np.abs(big_u.values)
    central = np.ones(grid.points, dtype=bool)
    shell = np.ones(grid.points, dtype=bool)
    for a in range(grid.dim):
        ax = grid.axis(a)
        shape = [1] * grid.dim
        shape[a] = grid.points[a]
        central &= (np.abs(ax) <= fit_fraction * grid.halfwidths[a]).reshape(shape)
        shell &= (np.abs(ax) <= check_fraction * grid.halfwidths[a]).reshape(shape)
    envelope = np.exp(-quad)
    with np.errstate(over="ignore"):
        const = float(np.max(absvals[central] / envelope[central]))
    bad = absvals[shell] > slack * const * envelope[shell] + 1e-300
    if np.any(bad):
        raise BoundNotSatisfied(
            "field exceeds the fitted sub-Gaussian envelope outside the fit region"
        )
    capacity = symplectic_capacity(ellipsoid)
    verdict = "VIOLATES" if capacity < np.pi * (1.0 - 1e-12) else "CONSISTENT"
    return ConcentrationVerdict(verdict=verdict, capacity=capacity, envelope_constant=const)
