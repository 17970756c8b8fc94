"""Grid, Fourier, and resampling machinery."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pswc.errors import (
    BoundaryMassWarning,
    DimensionMismatch,
    GridCapExceeded,
    GridMismatch,
    ResampleInaccurate,
)
from pswc.grid import (
    GridSpec,
    SampledField,
    boundary_mass_fraction,
    check_boundary_mass,
    eval_trig,
    fourier,
    inner,
    parity,
    pushforward_mf,
    quadrature_ft,
    substitute,
    sympl_fourier_omega,
    sympl_fourier_sigma,
    translate,
)
from pswc.symplectic import build_form, build_form_from_blocks, standard_j
from pswc.wavepacket import hermite_field, random_field

from conftest import rel_field_err


# -- GridSpec ---------------------------------------------------------------


def test_gridspec_validation():
    with pytest.raises(GridCapExceeded):
        GridSpec.regular(1, 6.0, 6)  # < 8 points
    with pytest.raises(GridCapExceeded):
        GridSpec.regular(1, 6.0, 63)  # odd
    with pytest.raises(GridCapExceeded):
        GridSpec.regular(4, 6.0, 64)  # 64^4 over the memory cap
    g = GridSpec.regular(2, 6.0, 64)
    assert g.dim == 2 and g.size == 64 * 64
    assert g.halfwidths == (6.0, 6.0)
    assert np.isclose(g.cell, (12.0 / 64) ** 2)


def test_dual_grid_is_involutive(grid64):
    dual = grid64.dual()
    assert np.isclose(dual.steps[0], np.pi / 6.0)
    assert grid64.dual().dual().close_to(grid64)


def test_field_shape_mismatch(grid64):
    with pytest.raises(GridMismatch):
        SampledField(grid64, np.zeros(12))


# -- Fourier transform -------------------------------------------------------


def test_fourier_round_trip_exact(grid64, rng):
    u = SampledField(grid64, rng.normal(size=64) + 1j * rng.normal(size=64))
    back = fourier(fourier(u, +1), -1)
    assert np.max(np.abs(back.values - u.values)) < 1e-12


def test_fourier_unitarity(grid64, rng):
    u = SampledField(grid64, rng.normal(size=64) + 1j * rng.normal(size=64))
    assert abs(fourier(u, +1).norm() - u.norm()) < 1e-12 * u.norm()


def test_fourier_gaussian_fixed_point(grid64):
    u = SampledField.from_function(grid64, lambda p: np.exp(-p[..., 0] ** 2 / 2), warn_boundary=False)
    fu = fourier(u, +1)
    target = np.exp(-fu.grid.axis(0) ** 2 / 2)
    assert np.max(np.abs(fu.values - target)) < 1e-8


def test_fourier_shifted_gaussian_oracle(grid64):
    # closed form: F[exp(-al (x-a)^2)](xi) = (2pi)^(-1/2) e^{-i a xi} sqrt(pi/al) e^{-xi^2/(4 al)}
    a, al = 0.7, 1.3
    u = SampledField.from_function(
        grid64, lambda p: np.exp(-al * (p[..., 0] - a) ** 2), warn_boundary=False
    )
    fu = fourier(u, +1)
    xi = fu.grid.axis(0)
    oracle = (2 * np.pi) ** -0.5 * np.exp(-1j * a * xi) * np.sqrt(np.pi / al) * np.exp(-(xi**2) / (4 * al))
    assert np.max(np.abs(fu.values - oracle)) < 1e-10


def test_parseval(grid64, rng):
    u = random_field(grid64, rng)
    v = random_field(grid64, rng)
    lhs = inner(fourier(u, +1), fourier(v, +1))
    assert abs(lhs - inner(u, v)) < 1e-10


@given(st.integers(min_value=0, max_value=5), st.integers(min_value=0, max_value=5))
@settings(max_examples=10, deadline=None)
def test_inner_conjugate_symmetric(j, k):
    g = GridSpec.regular(1, 6.0, 64)
    u, v = hermite_field(g, j), hermite_field(g, k)
    assert abs(inner(u, v) - np.conj(inner(v, u))) < 1e-12


# -- interpolation / substitution --------------------------------------------


def test_translate_integer_shift_is_roll(grid64, rng):
    u = SampledField(grid64, rng.normal(size=64) + 0j)
    t = translate(u, np.array([3 * grid64.steps[0]]))
    assert np.max(np.abs(t.values - np.roll(u.values, 3))) == 0.0


def test_translate_off_lattice_oracle(grid64):
    u = SampledField.from_function(grid64, lambda p: np.exp(-p[..., 0] ** 2 / 2), warn_boundary=False)
    shift = 0.31  # not a lattice multiple
    t = translate(u, np.array([shift]))
    target = np.exp(-((grid64.axis(0) - shift) ** 2) / 2)
    central = np.abs(grid64.axis(0)) < 4.0  # boundary sees the periodization tail
    assert np.max(np.abs(t.values - target)[central]) < 1e-9


@pytest.mark.parametrize("npts,step", [(48, 0.25), (48, 0.2618), (64, 0.1875)])
def test_eval_trig_central_accuracy(npts, step):
    # regression for the integer mode-parity handling on non power-of-two sizes
    g = GridSpec((npts,), (step,))
    f = lambda p: np.exp(-((p[..., 0] - 0.4) ** 2) / 2)
    u = SampledField.from_function(g, f, warn_boundary=False)
    t = np.linspace(-2, 2, 41).reshape(-1, 1)
    assert np.max(np.abs(eval_trig(u, t) - f(t))) < 1e-7


def test_substitute_monomial_exact(rng):
    g = GridSpec.regular(2, 6.0, 32)
    u = SampledField(g, rng.normal(size=(32, 32)) + 0j)
    # J swap: out(z) = u(Jz) with J = [[0,1],[-1,0]]
    out = substitute(u, np.array([[0.0, 1.0], [-1.0, 0.0]]))
    pts = out.grid.point_array() @ np.array([[0.0, 1.0], [-1.0, 0.0]]).T
    direct = eval_trig(u, pts).reshape(out.grid.points)
    assert np.max(np.abs(out.values - direct)) < 1e-12


def test_substitute_rotation_matches_analytic():
    g = GridSpec.regular(2, 6.0, 48)
    fn = lambda p: np.exp(-np.sum((p - np.array([0.4, -0.3])) ** 2, axis=-1) / 2)
    u = SampledField.from_function(g, fn, warn_boundary=False)
    th = 0.3
    s_inv = np.array([[np.cos(th), -np.sin(th)], [np.sin(th), np.cos(th)]])
    out = substitute(u, s_inv, out_grid=g)
    oracle = fn(g.point_array() @ s_inv.T).reshape(g.points)
    pts = g.point_array().reshape(g.points + (2,))
    central = np.max(np.abs(pts), axis=-1) <= 4.0
    assert np.max(np.abs(out.values - oracle)[central]) < 1e-7


def test_parity_exact(grid64, rng):
    u = SampledField(grid64, rng.normal(size=64) + 0j)
    flipped = parity(u)
    idx = np.mod(-np.arange(64) + 64, 64)
    assert np.max(np.abs(flipped.values - u.values[idx])) == 0.0


# -- symplectic Fourier transforms -------------------------------------------


def test_sigma_involution_exact(rng):
    g = GridSpec.regular(2, 6.0, 64)
    u = SampledField(g, rng.normal(size=(64, 64)) + 1j * rng.normal(size=(64, 64)))
    twice = sympl_fourier_sigma(sympl_fourier_sigma(u))
    assert twice.grid.close_to(g)
    assert np.max(np.abs(twice.values - u.values)) < 1e-12 * np.max(np.abs(u.values))


def test_sigma_gaussian_fixed_point():
    g = GridSpec.regular(2, 6.0, 64)
    u = SampledField.from_function(g, lambda p: np.exp(-np.sum(p**2, -1) / 2), warn_boundary=False)
    fu = sympl_fourier_sigma(u)
    target = np.exp(-np.sum(fu.grid.point_array() ** 2, -1) / 2).reshape(fu.grid.points)
    assert np.max(np.abs(fu.values - target)) < 1e-8


def test_omega_reduces_to_sigma(j_form, rng):
    g = GridSpec.regular(2, 6.0, 64)
    u = random_field(g, rng)
    a = sympl_fourier_omega(u, j_form)
    b = sympl_fourier_sigma(u)
    assert a.grid.close_to(b.grid)
    assert np.max(np.abs(a.values - b.values)) < 1e-12


def test_omega_involution_and_unitarity_scaled(four_j_form, rng):
    g = GridSpec.regular(2, 6.0, 64)
    u = random_field(g, rng)
    once = sympl_fourier_omega(u, four_j_form)
    assert abs(once.norm() - u.norm()) < 1e-10
    twice = sympl_fourier_omega(once, four_j_form)
    assert twice.grid.close_to(g)
    assert rel_field_err(twice, u) < 1e-10


def test_omega_block_integer_lattice(rng):
    theta = np.array([[0.0, 1.0], [-1.0, 0.0]])
    eta = np.array([[0.0, 2.0], [-2.0, 0.0]])
    form = build_form_from_blocks(theta, eta)
    g = GridSpec.regular(4, 5.0, 16)
    u = random_field(g, rng, max_order=3)
    once = sympl_fourier_omega(u, form)
    assert abs(once.norm() - u.norm()) < 1e-10
    twice = sympl_fourier_omega(once, form)
    assert rel_field_err(twice, u) < 1e-10


def test_omega_generic_resample_path(rng):
    # a non-monomial, non-integer form exercises the trigonometric fallback
    base = standard_j(1)
    rot = np.array([[np.cos(0.2), np.sin(0.2)], [-np.sin(0.2), np.cos(0.2)]])
    omega = rot @ (1.7 * base) @ rot.T  # still antisymmetric
    form = build_form(omega)
    g = GridSpec.regular(2, 8.0, 64)
    u = SampledField.from_function(g, lambda p: np.exp(-np.sum(p**2, -1) / 2), warn_boundary=False)
    twice = sympl_fourier_omega(sympl_fourier_omega(u, form), form)
    assert rel_field_err(twice, u) < 1e-6


# -- pushforward --------------------------------------------------------------


def test_pushforward_identity(wgrid64, rng):
    u = random_field(wgrid64, rng, max_order=3)
    out = pushforward_mf(u, np.eye(2))
    assert np.max(np.abs(out.values - u.values)) == 0.0


def test_pushforward_unitary_and_oracle(wgrid64):
    # narrow enough that the half-box holds the stretched image to 1e-8
    u = SampledField.from_function(
        wgrid64, lambda p: np.exp(-1.5 * np.sum(p**2, -1)), warn_boundary=False
    )
    # inverse direction stays inside the box: unitary to rounding
    out_inv = pushforward_mf(u, 2.0 * np.eye(2), direction="inverse")
    assert abs(out_inv.norm() - u.norm()) < 1e-8 * u.norm()
    # forward z -> 2z folds the torus (4-to-1); values are still exact where
    # the image stays in the box, so compare centrally with the guard off
    out = pushforward_mf(u, 2.0 * np.eye(2), direction="forward", tol=np.inf)
    pts = wgrid64.point_array().reshape(wgrid64.points + (2,))
    oracle = 2.0 * np.exp(-1.5 * np.sum((2 * pts) ** 2, -1))
    central = np.max(np.abs(pts), axis=-1) <= 2.9
    assert np.max(np.abs(out.values - oracle)[central]) < 1e-8


def test_pushforward_rejects_lossy_map(wgrid64):
    # a wide field pushed through z -> 4z loses most of its mass to wrap
    u = SampledField.from_function(
        wgrid64, lambda p: np.exp(-np.sum(p**2, -1) / 18.0), warn_boundary=False
    )
    with pytest.raises(ResampleInaccurate):
        pushforward_mf(u, 4.0 * np.eye(2), direction="forward")


# -- diagnostics ---------------------------------------------------------------


def test_boundary_mass_warning(grid64):
    with pytest.warns(BoundaryMassWarning):
        SampledField.from_function(grid64, lambda p: np.ones(p.shape[:-1]))
    u = SampledField.from_function(grid64, lambda p: np.exp(-p[..., 0] ** 2 / 2), warn_boundary=False)
    assert boundary_mass_fraction(u) < 1e-10
    check_boundary_mass(u)  # silent


def test_quadrature_ft_matches_fourier(grid64, rng):
    u = random_field(grid64, rng)
    fu = fourier(u, +1)
    k = fu.grid.point_array()
    vals = (2 * np.pi) ** -0.5 * quadrature_ft(u, k)
    assert np.max(np.abs(vals - fu.values.ravel())) < 1e-10
