"""Acceptance suite: every shipping criterion, with pinned tolerances.

Each criterion function returns rows (criterion, check, measured,
tolerance, passed).  Tolerances are fixed here;  the CLI exposes
per-check overrides for demonstration runs, keyed by the check name.

Grid notes: checks run at the desk-scale default (n=1, N=64, L=6) except
the intertwining item, which needs box margins for the stretched deformed
packets and runs at L=7.5 (measured floors at L=6 sit above the pinned
tolerance; see the README for the margin study).
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .errors import BoundNotSatisfied
from .grid import (
    GridSpec,
    SampledField,
    fourier,
    inner,
    sympl_fourier_omega,
    sympl_fourier_sigma,
)
from .modspace import (
    ModNormParams,
    concentration_certificate,
    mod_norm,
    sjostrand_invariance_check,
)
from .spectral import spectrum_transfer_check
from .symbols import (
    Symbol,
    box_flattop_taper,
    constant,
    coordinate,
    gaussian,
    gaussian_taper,
    harmonic,
    compose_linear,
)
from .symplectic import (
    WignerEllipsoid,
    build_form,
    build_form_from_blocks,
    darboux_factor,
    standard_j,
    symplectic_capacity,
)
from .wavepacket import (
    Window,
    basis_generate,
    cross_wigner,
    deformed_wigner_grid,
    hermite_field,
    hermite_window,
    projector,
    random_field,
    wavepacket,
    wavepacket_f,
    wavepacket_inverse,
    wigner_grid,
)
from .weyl import (
    concentrated_test_columns,
    minimal_image_cut,
    phase_weyl_apply_quadrature,
    phase_weyl_matrix,
    pushforward_conjugation_residual,
    st_symbol_grid,
    substitution_matrix,
    twisted_product,
    weyl_kernel,
)

DEFAULT_GRID = GridSpec.regular(1, 6.0, 64)
INTERTWINE_GRID = GridSpec.regular(1, 7.5, 64)


@dataclass(frozen=True)
class CheckRow:
    criterion: str
    check: str
    measured: float
    tolerance: float
    passed: bool


def _row(criterion, check, measured, tolerance, larger_fails=True):
    ok = measured <= tolerance if larger_fails else measured >= tolerance
    return CheckRow(criterion, check, float(measured), float(tolerance), bool(ok))


def _rel_diff(a: SampledField, b: SampledField) -> float:
    num = np.sqrt(np.sum(np.abs(a.values - b.values) ** 2))
    den = max(np.sqrt(np.sum(np.abs(b.values) ** 2)), 1e-300)
    return float(num / den)


def _acceptance_forms(rng):
    forms = [
        ("J", build_form(standard_j(1))),
        ("4J", build_form(4.0 * standard_j(1))),
    ]
    for k in range(2):
        c = float(rng.uniform(0.5, 3.0))
        forms.append((f"{c:.3f}J", build_form(c * standard_j(1))))
    return forms


def criterion_involutivity(rng, tol=1e-8):
    rows = []
    grid = GridSpec.regular(2, 6.0, 64)
    fields = [random_field(grid, rng) for _ in range(10)]
    for name, form in _acceptance_forms(rng):
        worst = 0.0
        for u in fields:
            twice = sympl_fourier_omega(sympl_fourier_omega(u, form), form)
            worst = max(worst, _rel_diff(twice, u))
        rows.append(_row("involutivity", f"F_omega^2 = id [{name}]", worst, tol))
    # n = 2 block form with integer lattice action
    theta = np.array([[0.0, 1.0], [-1.0, 0.0]])
    eta = np.array([[0.0, 2.0], [-2.0, 0.0]])
    form = build_form_from_blocks(theta, eta)
    grid4 = GridSpec.regular(4, 5.0, 16)
    worst = 0.0
    for _ in range(2):
        u = random_field(grid4, rng, max_order=3)
        twice = sympl_fourier_omega(sympl_fourier_omega(u, form), form)
        worst = max(worst, _rel_diff(twice, u))
    rows.append(_row("involutivity", "F_omega^2 = id [n=2 block]", worst, tol))
    return rows


def _foufou_residual(u: SampledField, form) -> float:
    """Pointwise |F u(z) - |det|^(1/2) F_omega u(-Omega z)| on shared lattice points."""
    fu = fourier(u, +1)
    fo = sympl_fourier_omega(u, form)
    zg, og = fu.grid, fo.grid
    pts = zg.point_array()
    targets = -(pts @ form.omega.T)
    idx = []
    keep = np.ones(len(targets), dtype=bool)
    for a in range(og.dim):
        r = targets[:, a] / og.steps[a] + og.points[a] // 2
        ri = np.round(r)
        keep &= np.abs(r - ri) < 1e-9
        keep &= (ri >= 0) & (ri < og.points[a])
        idx.append(ri.astype(int))
    if not np.any(keep):
        return np.nan
    lhs = fu.values.ravel()[keep]
    rhs = form.det_abs**0.5 * fo.values[tuple(ix[keep] for ix in idx)]
    return float(np.max(np.abs(lhs - rhs)) / max(np.max(np.abs(lhs)), 1e-300))


def criterion_unitarity(rng, tol_norm=1e-10, tol_foufou=1e-8):
    rows = []
    grid = GridSpec.regular(2, 6.0, 64)
    fields = [random_field(grid, rng) for _ in range(5)]
    for name, form in _acceptance_forms(rng):
        worst = max(abs(sympl_fourier_omega(u, form).norm() - u.norm()) / u.norm() for u in fields)
        rows.append(_row("unitarity", f"norm preservation [{name}]", worst, tol_norm))
        worst_ff = max(_foufou_residual(u, form) for u in fields)
        rows.append(_row("unitarity", f"foufou pointwise [{name}]", worst_ff, tol_foufou))
    return rows


def criterion_moyal(rng, tol=1e-6):
    grid = DEFAULT_GRID
    herms = [hermite_field(grid, k) for k in range(4)]
    wigs = {(j, k): cross_wigner(herms[j], herms[k]) for j in range(4) for k in range(4)}
    scale = 1.0 / (2.0 * np.pi)
    worst = 0.0
    for (j, k), wa in wigs.items():
        for (jp, kp), wb in wigs.items():
            lhs = inner(wa, wb)
            rhs = scale * inner(herms[j], herms[jp]) * np.conj(inner(herms[k], herms[kp]))
            worst = max(worst, abs(lhs - rhs) / scale)
    return [_row("moyal", "cross-Wigner Moyal identity (hermite pairs)", worst, tol)]


def criterion_wavepacket(rng, tol=1e-6):
    grid = DEFAULT_GRID
    phi = hermite_window(grid, 0)
    worst_rt = 0.0
    for k in range(4):
        u = hermite_field(grid, k)
        rec = wavepacket_inverse(phi, wavepacket(phi, u))
        worst_rt = max(worst_rt, _rel_diff(rec, u))
    v = random_field(wigner_grid(grid), rng, max_order=3)
    pv = projector(phi, v)
    ppv = projector(phi, pv)
    idem = _rel_diff(ppv, pv)
    return [
        _row("wavepacket", "inverse round trip (hermites)", worst_rt, tol),
        _row("wavepacket", "projector idempotence", idem, tol),
    ]


def criterion_intertwining(rng, tol=1e-5):
    rows = []
    grid = INTERTWINE_GRID
    phi = hermite_window(grid, 0)
    cases = [
        ("J", build_form(standard_j(1)), 2.5),
        ("4J", build_form(4.0 * standard_j(1)), 3.5),
    ]
    for name, form, taper in cases:
        fac = darboux_factor(form)
        big = deformed_wigner_grid(grid, fac)
        symbol = gaussian_taper(harmonic(2), taper)
        op_hat = weyl_kernel(compose_linear(symbol, fac.f), grid)
        op_til = phase_weyl_matrix(symbol, form, big)
        worst = 0.0
        for k in range(3):
            u = hermite_field(grid, k)
            lhs = op_til.apply(wavepacket_f(fac, phi, u, out_grid=big))
            rhs = wavepacket_f(fac, phi, op_hat.apply(u), out_grid=big)
            resid = np.sqrt(np.sum(np.abs(lhs.values - rhs.values) ** 2) * big.cell) / u.norm()
            worst = max(worst, float(resid))
        rows.append(_row("intertwining", f"sfund residual [{name}]", worst, tol))
    return rows


def criterion_transfer(rng, tol_eig=1e-6, tol_resid=1e-4):
    rows = []
    grid = DEFAULT_GRID
    rep = spectrum_transfer_check(harmonic(2), build_form(standard_j(1)), 3, grid)
    eig_err = float(np.max(np.abs(rep.eigenvalues - (np.arange(3) + 0.5))))
    rows.append(_row("transfer", "oscillator eigenvalues {0.5,1.5,2.5}", eig_err, tol_eig))
    rows.append(_row("transfer", "packet residuals [J]", rep.max_residual, tol_resid))
    rep4 = spectrum_transfer_check(harmonic(2), build_form(4.0 * standard_j(1)), 3, grid)
    eig_err4 = float(np.max(np.abs(rep4.eigenvalues - 4.0 * (np.arange(3) + 0.5))))
    rows.append(_row("transfer", "pulled-back eigenvalues {2,6,10} [4J]", eig_err4, tol_resid))
    rows.append(_row("transfer", "packet residuals [4J]", rep4.max_residual, tol_resid))
    return rows


def criterion_basis(rng, tol=1e-6):
    rows = []
    grid = DEFAULT_GRID
    for name, form in (("J", build_form(standard_j(1))), ("4J", build_form(4.0 * standard_j(1)))):
        fac = darboux_factor(form)
        big = deformed_wigner_grid(grid, fac)
        fields = basis_generate(fac, range(3), range(3), grid, out_grid=big)
        keys = sorted(fields)
        gram = np.array(
            [[inner(fields[a], fields[b]) for b in keys] for a in keys]
        )
        err = float(np.max(np.abs(gram - np.eye(9))))
        rows.append(_row("basis", f"gram of wavepacket basis = I9 [{name}]", err, tol))
    return rows


def criterion_twisted(rng, tol_matrix=1e-5, tol_moyal=1e-4):
    grid = DEFAULT_GRID
    sym_grid = st_symbol_grid(grid)
    a = gaussian(1.5, 2)
    b = gaussian(1.2, 2)
    c = twisted_product(a, b, sym_grid)
    op_a = minimal_image_cut(weyl_kernel(a, grid))
    op_b = minimal_image_cut(weyl_kernel(b, grid))
    op_c = minimal_image_cut(weyl_kernel(c, grid))
    prod = op_a.compose(op_b)
    num = np.linalg.norm((op_c.entries - prod.entries) * grid.cell, 2)
    den = np.linalg.norm(prod.entries * grid.cell, 2)
    rows = [_row("twisted", "Weyl(a#b) vs Weyl(a)Weyl(b) spectral", num / den, tol_matrix)]
    flat, zero = (3.0, 8.0), (5.8, 16.0)
    xa = box_flattop_taper(coordinate(0, 2), flat, zero)
    xb = box_flattop_taper(coordinate(1, 2), flat, zero)
    cx = twisted_product(xa, xb, sym_grid)
    pts = sym_grid.point_array().reshape(sym_grid.points + (2,))
    oracle = pts[..., 0] * pts[..., 1] + 0.5j
    central = np.max(np.abs(pts), axis=-1) <= 1.0
    err = float(np.max(np.abs(cx.data.values - oracle)[central]))
    rows.append(_row("twisted", "x (star) xi = x xi + i/2 centrally", err, tol_moyal))
    return rows


def criterion_kernel(rng, tol=1e-6):
    grid = DEFAULT_GRID
    wgrid = wigner_grid(grid)
    form = build_form(standard_j(1))
    a = gaussian(1.5, 2)
    packet = wavepacket(hermite_window(grid, 0), hermite_field(grid, 0))
    op = phase_weyl_matrix(a, form, wgrid)
    via_matrix = op.apply(packet)
    via_quad = phase_weyl_apply_quadrature(a, form, packet)
    two_route = _rel_diff(via_matrix, via_quad)
    one = phase_weyl_matrix(constant(1.0, 2), form, wgrid)
    ident = _rel_diff(one.apply(packet), packet)
    return [
        _row("kernel", "matrix route vs quadrature route", two_route, tol),
        _row("kernel", "a = 1 acts as identity", ident, tol),
    ]


def criterion_conjugation(rng, tol=1e-5):
    rows = []
    grid = DEFAULT_GRID
    wgrid = wigner_grid(grid)
    a = gaussian(1.0, 2)
    form4 = build_form(4.0 * standard_j(1))
    theta = 0.3
    rot = np.array([[np.cos(theta), np.sin(theta)], [-np.sin(theta), np.cos(theta)]])
    shear = np.array([[1.0, 0.0], [0.4, 1.0]])
    from .weyl import conjugation_check

    rows.append(
        _row("conjugation", "conjug covariance [rotation]",
             conjugation_check(a, form4, rot, wgrid).residual, tol)
    )
    rows.append(
        _row("conjugation", "conjug covariance [shear]",
             conjugation_check(a, form4, shear, wgrid).residual, tol)
    )
    form_c = build_form(1.5 * standard_j(1))
    adapted = GridSpec(wgrid.points, tuple(np.sqrt(1.5) * s for s in wgrid.steps))
    rows.append(
        _row("conjugation", "equa pushforward [1.5J]",
             pushforward_conjugation_residual(a, form_c, adapted), tol)
    )
    return rows


def criterion_modnorm(rng, tol_l2=1e-6, equiv_cap=10.0):
    rows = []
    grid = DEFAULT_GRID
    phi = hermite_window(grid, 0)
    params = ModNormParams(s=0.0, q=2.0, window=phi)
    testset = [hermite_field(grid, k) for k in range(4)] + [
        random_field(grid, rng) for _ in range(6)
    ]
    worst = max(abs(mod_norm(u, params) - u.norm()) / u.norm() for u in testset)
    rows.append(_row("modnorm", "s=0,q=2 norm equals L2 norm", worst, tol_l2))
    wide = hermite_window(grid, 0, width=2.0)
    params_w = ModNormParams(s=0.5, q=1.0, window=wide)
    params_n = ModNormParams(s=0.5, q=1.0, window=phi)
    ratios = [mod_norm(u, params_w) / mod_norm(u, params_n) for u in testset]
    c_emp = max(max(ratios), 1.0 / min(ratios))
    rows.append(_row("modnorm", "window equivalence constant", c_emp, equiv_cap))
    grid2 = GridSpec.regular(2, 6.0, 24)
    wfield = SampledField.from_function(
        grid2, lambda p: np.exp(-np.sum(p**2, axis=-1) / 2.0), warn_boundary=False
    )
    window2 = Window(wfield.with_values(wfield.values / wfield.norm()))
    theta = 0.4
    maps = [
        np.eye(2),
        2.0 * np.eye(2),
        np.array([[np.cos(theta), np.sin(theta)], [-np.sin(theta), np.cos(theta)]]),
        np.array([[1.0, 0.0], [0.5, 1.0]]),
        np.diag([2.0, 0.5]),
    ]
    ok = 0
    for f in maps:
        rep = sjostrand_invariance_check(gaussian(1.0, 2), f, window2, s=0.0)
        ok += int(rep.both_finite)
    rows.append(_row("modnorm", "sjostrand f-invariance finite-together (5 pairs)",
                     5 - ok, 0.0))
    return rows


def criterion_capacity(rng, tol_pi=1e-12):
    rows = []
    cap = symplectic_capacity(WignerEllipsoid(np.eye(2)))
    rows.append(_row("capacity", "capacity(I) = pi", abs(cap - np.pi), tol_pi))
    grid = wigner_grid(DEFAULT_GRID)
    tight = SampledField.from_function(
        grid, lambda p: np.exp(-2.0 * np.sum(p**2, axis=-1)), warn_boundary=False
    )
    verdict = concentration_certificate(tight, WignerEllipsoid(2.0 * np.eye(2)))
    rows.append(_row("capacity", "M=2I flagged VIOLATES",
                     0.0 if verdict.verdict == "VIOLATES" else 1.0, 0.5))
    boundary = SampledField.from_function(
        grid, lambda p: np.exp(-np.sum(p**2, axis=-1)) / np.pi, warn_boundary=False
    )
    verdict2 = concentration_certificate(boundary, WignerEllipsoid(np.eye(2)))
    rows.append(_row("capacity", "Gaussian Wigner boundary case CONSISTENT",
                     0.0 if verdict2.verdict == "CONSISTENT" else 1.0, 0.5))
    return rows


CRITERIA = {
    "involutivity": criterion_involutivity,
    "unitarity": criterion_unitarity,
    "moyal": criterion_moyal,
    "wavepacket": criterion_wavepacket,
    "intertwining": criterion_intertwining,
    "transfer": criterion_transfer,
    "basis": criterion_basis,
    "twisted": criterion_twisted,
    "kernel": criterion_kernel,
    "conjugation": criterion_conjugation,
    "modnorm": criterion_modnorm,
    "capacity": criterion_capacity,
}


def run_acceptance(seed: int = 0, only: str | None = None, tol_overrides: dict | None = None):
    """Run the acceptance criteria; returns (rows, all_passed, timings)."""
    tol_overrides = tol_overrides or {}
    rows: list[CheckRow] = []
    timings = {}
    for name, fn in CRITERIA.items():
        if only and only not in name:
            continue
        rng = np.random.default_rng(seed)
        start = time.time()
        produced = fn(rng)
        timings[name] = time.time() - start
        for row in produced:
            key = row.check
            if key in tol_overrides:
                tol = float(tol_overrides[key])
                row = CheckRow(row.criterion, row.check, row.measured, tol, row.measured <= tol)
            rows.append(row)
    return rows, all(r.passed for r in rows), timings
