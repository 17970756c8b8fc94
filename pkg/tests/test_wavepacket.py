"""Cross-Wigner transform, wavepacket intertwiners, orthonormal bases."""

import numpy as np
import pytest

from pswc.errors import GridMismatch, IndexCap, NotInRange
from pswc.grid import GridSpec, SampledField, inner
from pswc.ops import heisenberg_weyl, phase_translate_omega
from pswc.symplectic import darboux_factor
from pswc.wavepacket import (
    Window,
    basis_generate,
    cross_wigner,
    deformed_wigner_grid,
    hermite_field,
    hermite_values,
    hermite_window,
    projector,
    random_field,
    wavepacket,
    wavepacket_adjoint,
    wavepacket_f,
    wavepacket_inverse,
    wigner_grid,
)

from conftest import rel_field_err


def sigma(z0, z1):
    return z0[1] * z1[0] - z1[1] * z0[0]


# -- hermite windows -----------------------------------------------------------


def test_hermite_orthonormal(grid64):
    fields = [hermite_field(grid64, k) for k in range(6)]
    gram = np.array([[inner(a, b) for b in fields] for a in fields])
    assert np.max(np.abs(gram - np.eye(6))) < 1e-10


def test_hermite_ground_state(grid64):
    x = grid64.axis(0)
    assert np.max(np.abs(hermite_values(0, x) - np.pi**-0.25 * np.exp(-(x**2) / 2))) < 1e-14


def test_window_normalization(grid64):
    w = hermite_window(grid64, 3)
    assert abs(w.field.norm() - 1.0) < 1e-12
    with pytest.raises(ValueError):
        Window(hermite_field(grid64, 0).with_values(2.0 * hermite_field(grid64, 0).values))


# -- cross-Wigner ----------------------------------------------------------------


def test_wigner_gaussian_oracle(grid64):
    phi = hermite_field(grid64, 0)
    w = cross_wigner(phi, phi)
    pts = w.grid.point_array().reshape(w.grid.points + (2,))
    oracle = np.exp(-np.sum(pts**2, -1)) / np.pi
    assert np.max(np.abs(w.values - oracle)) < 1e-6


def test_wigner_coherent_state_orientation(grid64):
    # displaced ground state peaks at its phase-space center: catches axis
    # and sign conventions
    phi = hermite_field(grid64, 0)
    z0 = np.array([0.75, 1.5])
    coh = heisenberg_weyl(z0, phi)
    w = cross_wigner(coh, coh)
    pts = w.grid.point_array().reshape(w.grid.points + (2,))
    oracle = np.exp(-np.sum((pts - z0) ** 2, -1)) / np.pi
    assert np.max(np.abs(w.values - oracle)) < 1e-6


def test_wigner_marginal(grid64, rng):
    u = random_field(grid64, rng)
    w = cross_wigner(u, u)
    marginal = w.values.sum(axis=1) * w.grid.steps[1]
    assert np.max(np.abs(marginal - np.abs(u.values) ** 2)) < 1e-6


def test_wigner_moyal_identity(grid64, rng):
    u, v, up, vp = (random_field(grid64, rng) for _ in range(4))
    lhs = inner(cross_wigner(u, v), cross_wigner(up, vp))
    rhs = (2 * np.pi) ** -1 * inner(u, up) * np.conj(inner(v, vp))
    assert abs(lhs - rhs) < 1e-6 * (2 * np.pi) ** -1


def test_wigner_grid_mismatch(grid64):
    other = GridSpec.regular(1, 5.0, 64)
    with pytest.raises(GridMismatch):
        cross_wigner(hermite_field(grid64, 0), hermite_field(other, 0))


# -- translation covariance -------------------------------------------------------


def test_wigner_translation_wt2(grid64, window0, j_form):
    # W(T(z0) u, v)(z) = e^{-i sigma(z, z0)} W(u, v)(z - z0/2)
    u = hermite_field(grid64, 1)
    v = window0.field
    wg = wigner_grid(grid64)
    z0 = np.array([4 * wg.steps[0], 2 * wg.steps[1] * 2])  # even lattice point
    lhs = cross_wigner(heisenberg_weyl(z0, u), v)
    base = cross_wigner(u, v)
    rhs = phase_translate_omega(z0, base, j_form)
    assert rel_field_err(lhs, rhs) < 1e-6


def test_wigner_translation_wt1(grid64, j_form):
    # two-sided version with the midpoint shift and mixed phase
    u = hermite_field(grid64, 1)
    v = hermite_field(grid64, 0)
    wg = wigner_grid(grid64)
    z0 = np.array([4 * wg.steps[0], 4 * wg.steps[1]])
    z1 = np.array([-2 * wg.steps[0], 2 * wg.steps[1]])
    lhs = cross_wigner(heisenberg_weyl(z0, u), heisenberg_weyl(z1, v))
    base = cross_wigner(u, v)
    mean = 0.5 * (z0 + z1)
    from pswc.grid import translate

    shifted = translate(base, mean)
    pts = base.grid.point_array().reshape(base.grid.points + (2,))
    phase = np.exp(
        1j * (-(sigma(pts.reshape(-1, 2).T, z0 - z1)).reshape(base.grid.points) - 0.5 * sigma(z0, z1))
    )
    # sigma(z, z0-z1) with z running over the grid
    sig_field = pts[..., 1] * (z0 - z1)[0] - (z0 - z1)[1] * pts[..., 0]
    rhs = shifted.with_values(np.exp(1j * (-sig_field - 0.5 * sigma(z0, z1))) * shifted.values)
    assert rel_field_err(lhs, rhs) < 1e-6


# -- wavepacket transform ----------------------------------------------------------


def test_wavepacket_isometry(grid64, window0, rng):
    u = random_field(grid64, rng)
    assert abs(wavepacket(window0, u).norm() - u.norm()) < 1e-6


def test_wavepacket_gaussian_value(grid64, window0):
    w = wavepacket(window0, window0.field)
    pts = w.grid.point_array().reshape(w.grid.points + (2,))
    oracle = (2 * np.pi) ** 0.5 / np.pi * np.exp(-np.sum(pts**2, -1))
    assert np.max(np.abs(w.values - oracle)) < 1e-6


def test_adjoint_pairing(grid64, window0, rng):
    u = random_field(grid64, rng)
    big = random_field(wigner_grid(grid64), rng, max_order=3)
    lhs = inner(wavepacket(window0, u), big)
    rhs = inner(u, wavepacket_adjoint(window0, big))
    assert abs(lhs - rhs) < 1e-6


def test_adjoint_left_inverse(grid64, window0, rng):
    u = random_field(grid64, rng)
    back = wavepacket_adjoint(window0, wavepacket(window0, u))
    assert rel_field_err(back, u) < 1e-10


def test_adjoint_kills_complement(grid64, window0, rng):
    big = random_field(wigner_grid(grid64), rng, max_order=3)
    complement = big.with_values(big.values - projector(window0, big).values)
    out = wavepacket_adjoint(window0, complement)
    assert out.norm() < 1e-6 * big.norm()


def test_inverse_round_trip(grid64, window0):
    for k in range(3):
        u = hermite_field(grid64, k)
        rec = wavepacket_inverse(window0, wavepacket(window0, u))
        assert rel_field_err(rec, u) < 1e-6


def test_inverse_rejects_off_range(grid64, window0):
    wg = wigner_grid(grid64)
    # an isotropic Gaussian of the wrong width cannot be any W_phi0 image
    bad = SampledField.from_function(
        wg, lambda p: np.exp(-np.sum(p**2, -1) / 4.0), warn_boundary=False
    )
    with pytest.raises(NotInRange):
        wavepacket_inverse(window0, bad)


def test_projector_properties(grid64, window0, rng):
    big = random_field(wigner_grid(grid64), rng, max_order=3)
    p1 = projector(window0, big)
    p2 = projector(window0, p1)
    assert rel_field_err(p2, p1) < 1e-6
    other = random_field(wigner_grid(grid64), rng, max_order=3)
    lhs = inner(p1, other)
    rhs = inner(big, projector(window0, other))
    assert abs(lhs - rhs) < 1e-6


def test_projector_fixes_range(grid64, window0, rng):
    u = random_field(grid64, rng)
    w = wavepacket(window0, u)
    assert rel_field_err(projector(window0, w), w) < 1e-6


# -- deformed wavepackets -----------------------------------------------------------


def test_wavepacket_f_identity_factor(grid64, window0, j_form, rng):
    u = random_field(grid64, rng)
    fac = darboux_factor(j_form)
    a = wavepacket_f(fac, window0, u)
    b = wavepacket(window0, u)
    assert np.max(np.abs(a.values - b.values)) == 0.0


def test_wavepacket_f_isometry(grid64, window0, four_j_form, rng):
    u = random_field(grid64, rng, max_order=3)
    fac = darboux_factor(four_j_form)
    big = deformed_wigner_grid(grid64, fac)
    w = wavepacket_f(fac, window0, u, out_grid=big)
    assert abs(w.norm() - u.norm()) < 1e-6


def test_basis_gram_identity(grid64, j_form):
    fac = darboux_factor(j_form)
    fields = basis_generate(fac, range(3), range(3), grid64)
    keys = sorted(fields)
    gram = np.array([[inner(fields[a], fields[b]) for b in keys] for a in keys])
    assert np.max(np.abs(gram - np.eye(9))) < 1e-6


def test_basis_mixed_widths(grid64, j_form):
    fac = darboux_factor(j_form)
    fields = basis_generate(fac, range(2), range(2), grid64, function_width=1.3)
    keys = sorted(fields)
    gram = np.array([[inner(fields[a], fields[b]) for b in keys] for a in keys])
    assert np.max(np.abs(gram - np.eye(4))) < 1e-6


def test_basis_ground_state_is_gaussian(grid64, j_form):
    fac = darboux_factor(j_form)
    fields = basis_generate(fac, [0], [0], grid64)
    w = fields[(0, 0)]
    pts = w.grid.point_array().reshape(w.grid.points + (2,))
    oracle = (2 * np.pi) ** 0.5 / np.pi * np.exp(-np.sum(pts**2, -1))
    assert np.max(np.abs(w.values - oracle)) < 1e-6


def test_basis_index_cap(grid64, j_form):
    fac = darboux_factor(j_form)
    with pytest.raises(IndexCap):
        basis_generate(fac, [0, 7], [0], grid64)


# -- intertwining with Heisenberg-Weyl ------------------------------------------------


def test_inter1(grid64, window0, j_form):
    # W_phi T(z0) u = T_sigma(z0) W_phi u at wrap-consistent z0
    wg = wigner_grid(grid64)
    z0 = np.array([4 * grid64.steps[0], 2 * 2 * wg.steps[1]])
    for k in range(3):
        u = hermite_field(grid64, k)
        lhs = wavepacket(window0, heisenberg_weyl(z0, u))
        rhs = phase_translate_omega(z0, wavepacket(window0, u), j_form)
        assert rel_field_err(lhs, rhs) < 1e-8
