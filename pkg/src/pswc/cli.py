"""Command-line front end: configured experiment runs with CSV/binary artifacts.

A run is described by a flat key-value config file plus flag overrides
(flags win).  Every run writes ``summary.csv`` and ``report.txt`` into the
output directory, alongside command-specific ``.pswc`` arrays; the random
seed in force is recorded in the summary.  Exit codes: 0 success, 2 invalid
configuration, 3 numerical failure (tolerance exceeded / verdict VIOLATES).
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, field
from pathlib import Path

import click
import numpy as np

from . import acceptance, io
from .errors import BoundNotSatisfied, PswcError
from .grid import (
    GridSpec,
    SampledField,
    fourier,
    sympl_fourier_omega,
    sympl_fourier_sigma,
)
from .modspace import ModNormParams, concentration_certificate, mod_norm, sjostrand_norm
from .spectral import eigensolve, spectrum_transfer_check
from .symbols import BUILTIN_SYMBOLS, gaussian_taper
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
    cross_wigner,
    deformed_wigner_grid,
    hermite_field,
    hermite_window,
    wavepacket_f,
    wigner_grid,
)
from .weyl import phase_weyl_matrix, weyl_kernel
from .symbols import compose_linear

COMMANDS = (
    "transform",
    "wigner",
    "weyl-matrix",
    "phase-matrix",
    "spectrum",
    "transfer-check",
    "intertwine-check",
    "modnorm",
    "sjostrand-norm",
    "capacity",
    "certify-concentration",
    "acceptance",
)

DEFAULTS = {
    "grid.halfwidth": "6.0",
    "grid.points": "64",
    "omega": "J",
    "symbol": "harmonic",
    "symbol.taper": "",
    "window.index": "0",
    "window.width": "1.0",
    "wigner.j": "0",
    "wigner.k": "0",
    "mod.s": "0.0",
    "mod.q": "2.0",
    "capacity.matrix": "eye",
    "transfer.count": "3",
    "transfer.tol": "1e-4",
    "intertwine.tol": "1e-5",
    "intertwine.halfwidth": "7.5",
    "concentration.scale": "1.0",
}


@dataclass
class RunConfig:
    command: str
    seed: int = 0
    out_dir: Path = Path("pswc-out")
    only: str | None = None
    tol_overrides: dict = field(default_factory=dict)
    values: dict = field(default_factory=dict)

    def get(self, key: str) -> str:
        return self.values.get(key, DEFAULTS.get(key, ""))

    def get_float(self, key: str) -> float:
        return float(self.get(key))

    def get_int(self, key: str) -> int:
        return int(self.get(key))


class ConfigError(Exception):
    pass


def parse_config_file(path: Path) -> dict:
    values = {}
    for lineno, raw in enumerate(path.read_text().splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
        key, _, val = line.partition("=")
        values[key.strip()] = val.strip()
    return values


def _build_grid(cfg: RunConfig, dim: int) -> GridSpec:
    return GridSpec.regular(dim, cfg.get_float("grid.halfwidth"), cfg.get_int("grid.points"))


def _build_form(cfg: RunConfig):
    spec = cfg.get("omega")
    if spec == "J":
        return build_form(standard_j(1))
    if spec.endswith("J"):
        try:
            c = float(spec[:-1])
        except ValueError as exc:
            raise ConfigError(f"bad omega spec {spec!r}") from exc
        return build_form(c * standard_j(1))
    if spec == "block":
        theta = cfg.get_float("omega.theta12")
        eta = cfg.get_float("omega.eta12")
        tmat = np.array([[0.0, theta], [-theta, 0.0]])
        emat = np.array([[0.0, eta], [-eta, 0.0]])
        return build_form_from_blocks(tmat, emat)
    path = Path(spec)
    if not path.exists():
        raise ConfigError(f"omega matrix file not found: {spec}")
    return build_form(io.load_matrix_csv(path))


def _build_symbol(cfg: RunConfig):
    name = cfg.get("symbol")
    if name not in BUILTIN_SYMBOLS:
        raise ConfigError(f"unknown symbol {name!r} (choose from {sorted(BUILTIN_SYMBOLS)})")
    symbol = BUILTIN_SYMBOLS[name](2)
    taper = cfg.get("symbol.taper")
    if taper:
        symbol = gaussian_taper(symbol, float(taper))
    return symbol


class Summary:
    def __init__(self, cfg: RunConfig):
        self.cfg = cfg
        self.rows = []
        self.lines = [f"command: {cfg.command}", f"seed: {cfg.seed}"]

    def add(self, name: str, value, tolerance=None, passed=None):
        self.rows.append((name, value, "" if tolerance is None else tolerance,
                          "" if passed is None else int(bool(passed))))
        msg = f"{name} = {value}"
        if tolerance is not None:
            msg += f"  (tol {tolerance}, {'pass' if passed else 'FAIL'})"
        self.lines.append(msg)

    def write(self):
        out = self.cfg.out_dir
        out.mkdir(parents=True, exist_ok=True)
        io.write_rows_csv(out / "summary.csv",
                          ["name", "value", "tolerance", "passed"], self.rows)
        (out / "report.txt").write_text("\n".join(self.lines) + "\n")


def _cmd_transform(cfg: RunConfig, summary: Summary) -> int:
    form = _build_form(cfg)
    grid = _build_grid(cfg, 2)
    rng = np.random.default_rng(cfg.seed)
    from .wavepacket import random_field

    u = random_field(grid, rng)
    fu = fourier(u, +1)
    fs = sympl_fourier_sigma(u)
    fo = sympl_fourier_omega(u, form)
    out = cfg.out_dir
    out.mkdir(parents=True, exist_ok=True)
    io.save_pswc(out / "field.pswc", u.values)
    io.save_pswc(out / "fourier.pswc", fu.values)
    io.save_pswc(out / "fsigma.pswc", fs.values)
    io.save_pswc(out / "fomega.pswc", fo.values)
    io.save_field_slice_csv(out / "fomega_slice.csv", fo.values)
    twice = sympl_fourier_omega(fo, form)
    resid = float(np.max(np.abs(twice.values - u.values)) / np.max(np.abs(u.values)))
    summary.add("involution_residual", resid, 1e-8, resid <= 1e-8)
    summary.add("norm_in", u.norm())
    summary.add("norm_out", fo.norm())
    return 0 if resid <= 1e-8 else 3


def _cmd_wigner(cfg: RunConfig, summary: Summary) -> int:
    grid = _build_grid(cfg, 1)
    u = hermite_field(grid, cfg.get_int("wigner.j"))
    v = hermite_field(grid, cfg.get_int("wigner.k"))
    w = cross_wigner(u, v)
    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    io.save_pswc(cfg.out_dir / "wigner.pswc", w.values)
    io.save_field_slice_csv(cfg.out_dir / "wigner.csv", w.values)
    summary.add("wigner_norm", w.norm())
    return 0


def _cmd_weyl_matrix(cfg: RunConfig, summary: Summary) -> int:
    grid = _build_grid(cfg, 1)
    op = weyl_kernel(_build_symbol(cfg), grid)
    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    io.save_pswc(cfg.out_dir / "weyl_matrix.pswc", op.entries)
    summary.add("hermitian", int(op.hermitian))
    summary.add("hermiticity_residual", op.hermiticity_residual())
    return 0


def _cmd_phase_matrix(cfg: RunConfig, summary: Summary) -> int:
    form = _build_form(cfg)
    grid = _build_grid(cfg, 1)
    wgrid = wigner_grid(grid)
    op = phase_weyl_matrix(_build_symbol(cfg), form, wgrid)
    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    io.save_pswc(cfg.out_dir / "phase_matrix.pswc", op.entries)
    summary.add("hermitian", int(op.hermitian))
    summary.add("hermiticity_residual", op.hermiticity_residual())
    return 0


def _cmd_spectrum(cfg: RunConfig, summary: Summary) -> int:
    grid = _build_grid(cfg, 1)
    op = weyl_kernel(_build_symbol(cfg), grid)
    spec = eigensolve(op)
    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    count = min(cfg.get_int("transfer.count") * 4, len(spec.eigenvalues))
    io.write_rows_csv(
        cfg.out_dir / "spectrum.csv",
        ["index", "eigenvalue", "residual"],
        [(k, spec.eigenvalues[k], spec.residuals[k]) for k in range(count)],
    )
    summary.add("lowest_eigenvalue", float(spec.eigenvalues[0]))
    summary.add("max_residual", float(np.max(spec.residuals)))
    return 0


def _cmd_transfer(cfg: RunConfig, summary: Summary) -> int:
    form = _build_form(cfg)
    grid = _build_grid(cfg, 1)
    count = cfg.get_int("transfer.count")
    tol = cfg.get_float("transfer.tol")
    rep = spectrum_transfer_check(_build_symbol(cfg), form, count, grid)
    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    io.write_rows_csv(
        cfg.out_dir / "transfer.csv",
        ["eigenvalue", "residual", "j", "k"],
        [(r.eigenvalue, r.residual, r.j, r.k) for r in rep.rows],
    )
    for lam in rep.eigenvalues:
        summary.add("eigenvalue", float(lam))
    summary.add("max_residual", rep.max_residual, tol, rep.max_residual <= tol)
    return 0 if rep.max_residual <= tol else 3


def _cmd_intertwine(cfg: RunConfig, summary: Summary) -> int:
    form = _build_form(cfg)
    tol = cfg.get_float("intertwine.tol")
    grid = GridSpec.regular(1, cfg.get_float("intertwine.halfwidth"), cfg.get_int("grid.points"))
    fac = darboux_factor(form)
    big = deformed_wigner_grid(grid, fac)
    taper = 2.5 if form.is_standard() else 3.5
    symbol = gaussian_taper(BUILTIN_SYMBOLS[cfg.get("symbol")](2), float(cfg.get("symbol.taper") or taper))
    op_hat = weyl_kernel(compose_linear(symbol, fac.f), grid)
    op_til = phase_weyl_matrix(symbol, form, big)
    phi = hermite_window(grid, cfg.get_int("window.index"), cfg.get_float("window.width"))
    worst = 0.0
    for k in range(3):
        u = hermite_field(grid, k)
        lhs = op_til.apply(wavepacket_f(fac, phi, u, out_grid=big))
        rhs = wavepacket_f(fac, phi, op_hat.apply(u), out_grid=big)
        resid = float(np.sqrt(np.sum(np.abs(lhs.values - rhs.values) ** 2) * big.cell) / u.norm())
        summary.add(f"residual_h{k}", resid, tol, resid <= tol)
        worst = max(worst, resid)
    return 0 if worst <= tol else 3


def _cmd_modnorm(cfg: RunConfig, summary: Summary) -> int:
    grid = _build_grid(cfg, 1)
    window = hermite_window(grid, cfg.get_int("window.index"), cfg.get_float("window.width"))
    q = cfg.get("mod.q")
    params = ModNormParams(
        s=cfg.get_float("mod.s"),
        q=np.inf if q in ("inf", "Inf") else float(q),
        window=window,
    )
    u = hermite_field(grid, cfg.get_int("wigner.j"))
    value = mod_norm(u, params)
    summary.add("mod_norm", value)
    summary.add("l2_norm", u.norm())
    return 0


def _cmd_sjostrand(cfg: RunConfig, summary: Summary) -> int:
    grid = GridSpec.regular(2, cfg.get_float("grid.halfwidth"), min(cfg.get_int("grid.points"), 24))
    wfield = SampledField.from_function(
        grid, lambda p: np.exp(-np.sum(p**2, axis=-1) / 2.0), warn_boundary=False
    )
    window = Window(wfield.with_values(wfield.values / wfield.norm()))
    value = sjostrand_norm(_build_symbol(cfg), window, cfg.get_float("mod.s"))
    summary.add("sjostrand_norm", value)
    return 0


def _capacity_matrix(cfg: RunConfig) -> np.ndarray:
    spec = cfg.get("capacity.matrix")
    if spec == "eye":
        return np.eye(2)
    try:
        return float(spec) * np.eye(2)
    except ValueError:
        pass
    path = Path(spec)
    if not path.exists():
        raise ConfigError(f"capacity matrix file not found: {spec}")
    return io.load_matrix_csv(path)


def _cmd_capacity(cfg: RunConfig, summary: Summary) -> int:
    cap = symplectic_capacity(WignerEllipsoid(_capacity_matrix(cfg)))
    summary.add("capacity", cap)
    click.echo(f"capacity = {cap!r}")
    return 0


def _cmd_certify(cfg: RunConfig, summary: Summary) -> int:
    grid = wigner_grid(_build_grid(cfg, 1))
    scale = cfg.get_float("concentration.scale")
    field_ = SampledField.from_function(
        grid, lambda p: np.exp(-scale * np.sum(p**2, axis=-1)), warn_boundary=False
    )
    verdict = concentration_certificate(field_, WignerEllipsoid(_capacity_matrix(cfg)))
    summary.add("verdict", verdict.verdict)
    summary.add("capacity", verdict.capacity)
    summary.add("envelope_constant", verdict.envelope_constant)
    click.echo(f"{verdict.verdict} (capacity {verdict.capacity:.6f})")
    return 0 if verdict.verdict == "CONSISTENT" else 3


def _cmd_acceptance(cfg: RunConfig, summary: Summary) -> int:
    rows, passed, timings = acceptance.run_acceptance(
        seed=cfg.seed, only=cfg.only, tol_overrides=cfg.tol_overrides
    )
    for r in rows:
        summary.add(f"{r.criterion}: {r.check}", r.measured, r.tolerance, r.passed)
        mark = "PASS" if r.passed else "FAIL"
        click.echo(f"[{mark}] {r.criterion:14s} {r.check:50s} "
                   f"measured={r.measured:.3e} tol={r.tolerance:.1e}")
    summary.lines.append("timings: " + ", ".join(f"{k}={v:.1f}s" for k, v in timings.items()))
    click.echo("acceptance: " + ("ALL PASSED" if passed else "FAILURES PRESENT"))
    return 0 if passed else 3


_DISPATCH = {
    "transform": _cmd_transform,
    "wigner": _cmd_wigner,
    "weyl-matrix": _cmd_weyl_matrix,
    "phase-matrix": _cmd_phase_matrix,
    "spectrum": _cmd_spectrum,
    "transfer-check": _cmd_transfer,
    "intertwine-check": _cmd_intertwine,
    "modnorm": _cmd_modnorm,
    "sjostrand-norm": _cmd_sjostrand,
    "capacity": _cmd_capacity,
    "certify-concentration": _cmd_certify,
    "acceptance": _cmd_acceptance,
}


def run(cfg: RunConfig) -> int:
    """Execute one configured command; returns the process exit code."""
    summary = Summary(cfg)
    try:
        code = _DISPATCH[cfg.command](cfg, summary)
    except (ConfigError, FileNotFoundError) as exc:
        click.echo(f"configuration error: {exc}", err=True)
        return 2
    except BoundNotSatisfied as exc:
        click.echo(f"precondition failed: {exc}", err=True)
        return 2
    except PswcError as exc:
        click.echo(f"numerical failure: {exc}", err=True)
        return 3
    summary.write()
    return code


@click.command()
@click.option("--config", "config_path", type=click.Path(path_type=Path), default=None,
              help="Flat key-value config file; flags override its entries.")
@click.option("--command", "command", type=click.Choice(COMMANDS), default=None,
              help="What to run (may also come from the config file).")
@click.option("--seed", type=int, default=None, help="Seed for all randomness.")
@click.option("--out", "out_dir", type=click.Path(path_type=Path), default=None,
              help="Output directory for artifacts.")
@click.option("--only", default=None, help="Acceptance: run only matching criteria.")
@click.option("--tol", "tols", multiple=True,
              help="Tolerance override CHECK=VALUE (repeatable).")
@click.option("--set", "sets", multiple=True,
              help="Config override KEY=VALUE (repeatable).")
def main(config_path, command, seed, out_dir, only, tols, sets):
    """Deformed phase-space calculus experiments."""
    values = {}
    if config_path is not None:
        if not config_path.exists():
            click.echo(f"configuration error: no such config file {config_path}", err=True)
            sys.exit(2)
        try:
            values = parse_config_file(config_path)
        except ConfigError as exc:
            click.echo(f"configuration error: {exc}", err=True)
            sys.exit(2)
    for item in sets:
        if "=" not in item:
            click.echo(f"configuration error: bad --set {item!r}", err=True)
            sys.exit(2)
        key, _, val = item.partition("=")
        values[key.strip()] = val.strip()
    tol_overrides = {}
    for item in tols:
        if "=" not in item:
            click.echo(f"configuration error: bad --tol {item!r}", err=True)
            sys.exit(2)
        key, _, val = item.partition("=")
        try:
            tol_overrides[key.strip()] = float(val)
        except ValueError:
            click.echo(f"configuration error: bad --tol value {val!r}", err=True)
            sys.exit(2)
    cmd = command or values.get("command")
    if cmd not in _DISPATCH:
        click.echo(f"configuration error: unknown or missing command {cmd!r}", err=True)
        sys.exit(2)
    cfg = RunConfig(
        command=cmd,
        seed=seed if seed is not None else int(values.get("seed", 0)),
        out_dir=out_dir or Path(values.get("output_dir", "pswc-out")),
        only=only,
        tol_overrides=tol_overrides,
        values=values,
    )
    sys.exit(run(cfg))


if __name__ == "__main__":
    main()
