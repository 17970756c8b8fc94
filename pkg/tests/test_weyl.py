"""Weyl operator matrices, phase-space operators, twisted product, covariance."""

import numpy as np
import pytest

from pswc.errors import GridCapExceeded, MidpointUnavailable, NotSymplectic
from pswc.grid import GridSpec, SampledField, substitute
from pswc.ops import MetaplecticGenerator, generator_matrix, metaplectic_apply
from pswc.symbols import (
    Symbol,
    box_flattop_taper,
    compose_linear,
    constant,
    coordinate,
    gaussian,
    gaussian_taper,
    harmonic,
    lift_symbol,
    sample_symbol,
)
from pswc.symplectic import build_form, darboux_factor, standard_j
from pswc.wavepacket import (
    cross_wigner,
    deformed_wigner_grid,
    hermite_field,
    hermite_window,
    random_field,
    wavepacket,
    wavepacket_f,
    wigner_grid,
)
from pswc.weyl import (
    OperatorMatrix,
    conjugation_check,
    minimal_image_cut,
    phase_weyl_apply_quadrature,
    phase_weyl_matrix,
    pushforward_conjugation_residual,
    st_symbol_grid,
    substitution_matrix,
    symbol_from_kernel,
    twisted_product,
    upsample_double,
    weyl_kernel,
)

from conftest import rel_field_err


# -- standard Weyl kernel -------------------------------------------------------


def test_weyl_identity_symbol(grid64):
    op = weyl_kernel(constant(1.0, 2), grid64)
    assert np.max(np.abs(op.entries * grid64.cell - np.eye(64))) < 1e-12


def test_weyl_multiplication_symbol(grid64):
    op = weyl_kernel(coordinate(0, 2), grid64)
    mat = op.entries * grid64.cell
    assert np.max(np.abs(np.diag(mat) - grid64.axis(0))) < 1e-12
    assert np.max(np.abs(mat - np.diag(np.diag(mat)))) < 1e-12


def test_weyl_hermitian_for_real_symbol(grid64):
    op = weyl_kernel(harmonic(2), grid64)
    assert op.hermitian
    assert op.hermiticity_residual() < 1e-12


def test_weyl_oscillator_spectrum(grid64):
    op = weyl_kernel(harmonic(2), grid64)
    evals, evecs = np.linalg.eigh(op.weighted())
    assert np.max(np.abs(evals[:5] - (np.arange(5) + 0.5))) < 1e-6
    # eigenfunctions match hermites up to phase
    h2 = hermite_field(grid64, 2)
    vec = evecs[:, 2] / np.sqrt(grid64.cell)
    phase = np.vdot(vec, h2.values)
    phase /= abs(phase)
    assert np.max(np.abs(vec * phase - h2.values)) < 1e-5


def test_weyl_constant_shift(grid64):
    base = np.linalg.eigvalsh(weyl_kernel(harmonic(2), grid64).weighted())
    shifted_symbol = Symbol(2, lambda p: 0.5 * np.sum(p**2, -1) + 1.0 + 0j)
    shifted = np.linalg.eigvalsh(weyl_kernel(shifted_symbol, grid64).weighted())
    assert np.max(np.abs(shifted[:6] - base[:6] - 1.0)) < 1e-8


def test_weyl_matrix_covariance_rotation(grid64):
    # S^{-1} A S has symbol a o S, verified on concentrated test vectors
    gen = MetaplecticGenerator("fractional_fourier", angle=0.3)
    s = generator_matrix(gen)
    a = gaussian(1.2, 2)
    op = weyl_kernel(a, grid64)
    op_s = weyl_kernel(compose_linear(a, s), grid64)
    for k in range(3):
        u = hermite_field(grid64, k)
        lhs = metaplectic_apply([gen], op.apply(metaplectic_apply([gen], u)))
        # inverse rotation = angle -theta
        inv = MetaplecticGenerator("fractional_fourier", angle=-0.3)
        lhs = metaplectic_apply([inv], op.apply(metaplectic_apply([gen], u)))
        rhs = op_s.apply(u)
        assert rel_field_err(lhs, rhs) < 1e-5


def test_weyl_cap():
    with pytest.raises(GridCapExceeded):
        weyl_kernel(constant(1.0, 2), GridSpec.regular(1, 6.0, 8192))


# -- symbol <-> kernel ------------------------------------------------------------


def test_symbol_round_trip_gaussian(grid64):
    sy = gaussian(1.0, 2)
    rec = symbol_from_kernel(weyl_kernel(sy, grid64), band_limited=True)
    pts = rec.data.grid.point_array().reshape(rec.data.grid.points + (2,))
    assert np.max(np.abs(rec.data.values - sy.evaluate(pts))) < 1e-7


def test_symbol_rank_one_is_wigner(grid64, rng):
    u, v = random_field(grid64, rng, max_order=3), random_field(grid64, rng, max_order=3)
    op = OperatorMatrix(grid64, np.outer(u.values, np.conj(v.values)))
    rec = symbol_from_kernel(op)
    w = cross_wigner(u, v)
    assert np.max(np.abs(rec.data.values - 2 * np.pi * w.values)) < 1e-10


def test_symbol_identity_band_fold(grid64):
    # the even-step reconstruction folds the xi band: the constant symbol
    # comes back as the documented factor 2
    rec = symbol_from_kernel(weyl_kernel(constant(1.0, 2), grid64), band_limited=True)
    assert np.max(np.abs(rec.data.values - 2.0)) < 1e-10


def test_sampled_symbol_off_lattice_rejected(grid64):
    sy = sample_symbol(gaussian(1.0, 2), st_symbol_grid(grid64))
    with pytest.raises(MidpointUnavailable):
        sy.evaluate(np.array([[0.1234567, 0.0]]))


# -- lifted symbols ----------------------------------------------------------------


def test_lift_constant(j_form):
    lifted = lift_symbol(constant(1.0, 2), j_form)
    pts = np.random.default_rng(0).normal(size=(10, 4))
    assert np.max(np.abs(lifted.evaluate(pts) - 1.0)) == 0.0


def test_lift_affine_structure(j_form):
    lifted = lift_symbol(coordinate(0, 2), j_form)
    pts = np.random.default_rng(0).normal(size=(50, 4))
    # a(z - J zeta / 2) with a = x picks x - zeta_xi / 2
    oracle = pts[:, 0] - 0.5 * pts[:, 3]
    assert np.max(np.abs(lifted.evaluate(pts) - oracle)) < 1e-12


def test_lift_real_preserved(j_form):
    lifted = lift_symbol(harmonic(2), j_form)
    assert lifted.is_real(np.random.default_rng(0).normal(size=(20, 4)))


# -- phase-space operator -----------------------------------------------------------


def test_phase_identity(wgrid64, j_form, window0, grid64):
    op = phase_weyl_matrix(constant(1.0, 2), j_form, wgrid64)
    u = wavepacket(window0, hermite_field(grid64, 1))
    assert rel_field_err(op.apply(u), u) < 1e-12


def test_phase_hermitian(wgrid64, j_form):
    op = phase_weyl_matrix(gaussian(1.5, 2), j_form, wgrid64)
    assert op.hermitian and op.hermiticity_residual() < 1e-12


def test_phase_two_routes(wgrid64, j_form, window0, grid64):
    a = gaussian(1.5, 2)
    u = wavepacket(window0, hermite_field(grid64, 0))
    via_matrix = phase_weyl_matrix(a, j_form, wgrid64).apply(u)
    via_quad = phase_weyl_apply_quadrature(a, j_form, u)
    assert rel_field_err(via_matrix, via_quad) < 1e-6


def test_phase_linearity(wgrid64, j_form, window0, grid64):
    a, b = gaussian(1.5, 2), gaussian(1.0, 2)
    both = Symbol(2, lambda p: a.evaluate(p) + b.evaluate(p))
    u = wavepacket(window0, hermite_field(grid64, 1))
    lhs = phase_weyl_apply_quadrature(both, j_form, u)
    rhs_a = phase_weyl_apply_quadrature(a, j_form, u)
    rhs_b = phase_weyl_apply_quadrature(b, j_form, u)
    combo = rhs_a.with_values(rhs_a.values + rhs_b.values)
    assert rel_field_err(lhs, combo) < 1e-10


def test_phase_grid_cap(j_form):
    with pytest.raises(GridCapExceeded):
        phase_weyl_matrix(gaussian(1.0, 2), j_form, GridSpec.regular(2, 6.0, 128))


def test_upsample_double_exact(grid64, rng):
    u = random_field(grid64, rng)
    fine = upsample_double(u)
    assert np.max(np.abs(fine.values[::2] - u.values)) < 1e-13


# -- twisted product ----------------------------------------------------------------


def test_twisted_unit(grid64):
    gs = st_symbol_grid(grid64)
    b = gaussian(1.2, 2)
    c = twisted_product(constant(1.0, 2), b, gs)
    ref = sample_symbol(b, gs)
    assert np.max(np.abs(c.data.values - ref.data.values)) < 1e-8


def test_twisted_gaussian_closed_form(grid64):
    # for a = exp(-al |z|^2), b = exp(-be |z|^2): (a # b)(0) = 1/(1 + al be)
    gs = st_symbol_grid(grid64)
    a, b = gaussian(1.5, 2), gaussian(1.2, 2)
    al, be = 1 / (2 * 1.5**2), 1 / (2 * 1.2**2)
    c = twisted_product(a, b, gs)
    center = c.data.values[gs.points[0] // 2, gs.points[1] // 2]
    assert abs(center - 1 / (1 + al * be)) < 1e-10


def test_twisted_matches_operator_product(grid64):
    gs = st_symbol_grid(grid64)
    a, b = gaussian(1.5, 2), gaussian(1.2, 2)
    c = twisted_product(a, b, gs)
    op_a = minimal_image_cut(weyl_kernel(a, grid64))
    op_b = minimal_image_cut(weyl_kernel(b, grid64))
    op_c = minimal_image_cut(weyl_kernel(c, grid64))
    prod = op_a.compose(op_b)
    num = np.linalg.norm((op_c.entries - prod.entries) * grid64.cell, 2)
    den = np.linalg.norm(prod.entries * grid64.cell, 2)
    assert num / den < 1e-5


def test_twisted_moyal_coordinates(grid64):
    # x (star) xi = x xi + i/2 on the flat region of the box window
    gs = st_symbol_grid(grid64)
    flat, zero = (3.0, 8.0), (5.8, 16.0)
    a = box_flattop_taper(coordinate(0, 2), flat, zero)
    b = box_flattop_taper(coordinate(1, 2), flat, zero)
    c = twisted_product(a, b, gs)
    pts = gs.point_array().reshape(gs.points + (2,))
    oracle = pts[..., 0] * pts[..., 1] + 0.5j
    central = np.max(np.abs(pts), axis=-1) <= 1.0
    assert np.max(np.abs(c.data.values - oracle)[central]) < 1e-4


def test_twisted_cap(grid64):
    with pytest.raises(GridCapExceeded):
        twisted_product(constant(1.0, 2), constant(1.0, 2), GridSpec.regular(2, 6.0, 256))


# -- covariance checks ---------------------------------------------------------------


def test_substitution_matrix_matches_substitute(wgrid64, rng):
    th = 0.3
    s = np.array([[np.cos(th), np.sin(th)], [-np.sin(th), np.cos(th)]])
    u = random_field(wgrid64, rng, max_order=2)
    mat = substitution_matrix(wgrid64, s)
    direct = substitute(u, s, out_grid=wgrid64)
    assert np.max(np.abs((mat @ u.values.ravel()).reshape(wgrid64.points) - direct.values)) < 1e-12


def test_conjugation_identity_matrix(wgrid64, four_j_form):
    rep = conjugation_check(gaussian(1.0, 2), four_j_form, np.eye(2), wgrid64)
    assert rep.residual < 1e-12


def test_conjugation_rotation_and_shear(wgrid64, four_j_form):
    th = 0.3
    rot = np.array([[np.cos(th), np.sin(th)], [-np.sin(th), np.cos(th)]])
    shear = np.array([[1.0, 0.0], [0.4, 1.0]])
    assert conjugation_check(gaussian(1.0, 2), four_j_form, rot, wgrid64).residual < 1e-5
    assert conjugation_check(gaussian(1.0, 2), four_j_form, shear, wgrid64).residual < 1e-5


def test_conjugation_rejects_non_symplectic(wgrid64, four_j_form):
    with pytest.raises(NotSymplectic):
        conjugation_check(gaussian(1.0, 2), four_j_form, 2.0 * np.eye(2), wgrid64)


def test_equa_pushforward(wgrid64):
    form = build_form(1.5 * standard_j(1))
    adapted = GridSpec(wgrid64.points, tuple(np.sqrt(1.5) * s for s in wgrid64.steps))
    assert pushforward_conjugation_residual(gaussian(1.0, 2), form, adapted) < 1e-5


# -- composition corollary (lifted symbols) --------------------------------------------


def test_composition_corollary_central():
    # the lifted symbol of the composed phase operators is c(z - Omega zeta/2)
    # with c = a # b; checked by composing matrices on a small grid
    grid = GridSpec.regular(1, 6.0, 32)
    wg = wigner_grid(grid)
    jform = build_form(standard_j(1))
    a, b = gaussian(1.5, 2), gaussian(1.2, 2)
    op_a = phase_weyl_matrix(a, jform, wg)
    op_b = phase_weyl_matrix(b, jform, wg)
    prod = op_a.compose(op_b)
    rec = symbol_from_kernel(prod)
    gs = st_symbol_grid(grid)
    c = twisted_product(a, b, gs)
    lifted = lift_symbol(
        Symbol(2, lambda p, _c=c: _c.evaluate(np.round(p / np.asarray(gs.steps)) * np.asarray(gs.steps))),
        jform,
    )
    pts = rec.data.grid.point_array().reshape(rec.data.grid.points + (4,))
    central = np.max(np.abs(pts[..., :2]), axis=-1) <= 1.5
    central &= np.max(np.abs(pts[..., 2:]), axis=-1) <= 1.5
    oracle = lifted.evaluate(pts)
    err = np.abs(rec.data.values - oracle)[central]
    assert np.max(err) < 1e-4
