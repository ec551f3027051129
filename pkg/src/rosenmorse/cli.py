"""Command-line front end.

    python -m rosenmorse transmission --config run.cfg --format json

Every command writes named sections of rows.  CSV puts each section under
a ``# name`` line followed by a header; complex values are split into
``<name>_re,<name>_im`` columns and floats are written with ``%.12e``.
JSON output is one object mapping section names to lists of row objects
with the same keys and the same formatted numbers.

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import configparser
import json
import logging
import sys
import time
from dataclasses import dataclass
from importlib import resources

import numpy as np

from . import model, numerics, rootfind, spectral
from .errors import RosenMorseError
from .model import PotentialParams, SpectralClass, SpectralPoint
from .numerics import GridSpec, ScalingAngle
from .rootfind import SearchBox

log = logging.getLogger("rosenmorse")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3

KNOWN_KEYS = {
    "potential.U0", "potential.beta", "potential.mass", "potential.hbar",
    "energies.min", "energies.max", "energies.count", "energies.list",
    "theta_list",
    "grid.x_min", "grid.x_max", "grid.n_points",
    "transfer.n_slabs",
    "box.re_min", "box.re_max", "box.im_min", "box.im_max",
    "completeness.k_cutoffs", "completeness.test_centers", "completeness.test_width",
    "output.format", "output.path",
}


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    potential: PotentialParams
    energies: np.ndarray
    theta_list: tuple
    grid: GridSpec
    transfer_grid: GridSpec
    box: SearchBox
    k_cutoffs: tuple
    tests: tuple
    output_format: str = "csv"
    output_path: str | None = None


def _floats(text):
    return [float(v) for v in text.split(",") if v.strip()]


def parse_config(text: str) -> dict:
    parser = configparser.ConfigParser(
        interpolation=None, comment_prefixes=("#", ";"), inline_comment_prefixes=("#",)
    )
    parser.optionxform = str
    try:
        parser.read_string("[run]\n" + text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from None
    values = dict(parser["run"])
    unknown = sorted(set(values) - KNOWN_KEYS)
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
    return values


def default_config_text() -> str:
    return resources.files("rosenmorse").joinpath("data/default.cfg").read_text()


def build_config(values: dict) -> RunConfig:
    """Typed config with every module precondition re-checked."""
    merged = parse_config(default_config_text())
    if "energies.list" in values:
        for key in ("energies.min", "energies.max", "energies.count"):
            merged.pop(key, None)
    merged.update(values)
    try:
        params = PotentialParams(
            U0=float(merged["potential.U0"]),
            beta=float(merged["potential.beta"]),
            mass=float(merged["potential.mass"]),
            hbar=float(merged["potential.hbar"]),
        )
        if "energies.list" in merged:
            energies = np.array(_floats(merged["energies.list"]))
        else:
            count = int(merged["energies.count"])
            if count < 1:
                raise ConfigError("energies.count must be positive")
            energies = np.linspace(float(merged["energies.min"]), float(merged["energies.max"]), count)
        if energies.size == 0 or np.any(energies <= 0):
            raise ConfigError("energies must be positive")
        if params.U0 != 0 and np.any(np.abs(energies - params.U0) <= 1e-14 * abs(params.U0)):
            raise ConfigError("energy grid contains E = U0, where the WKB formula is degenerate")
        grid = GridSpec(float(merged["grid.x_min"]), float(merged["grid.x_max"]), int(merged["grid.n_points"]))
        grid.check_flat(params)
        transfer_grid = GridSpec(grid.x_min, grid.x_max, int(merged["transfer.n_slabs"]))
        thetas = tuple(sorted(set(_floats(merged["theta_list"]))))
        if len(thetas) < 2:
            raise ConfigError("theta_list needs at least two distinct angles")
        for th in thetas:
            numerics.check_scaled_ray(params, ScalingAngle(th), grid)
        box = SearchBox(
            float(merged["box.re_min"]), float(merged["box.re_max"]),
            float(merged["box.im_min"]), float(merged["box.im_max"]),
        )
        cutoffs = tuple(_floats(merged["completeness.k_cutoffs"]))
        if not cutoffs or min(cutoffs) <= 0:
            raise ConfigError("completeness.k_cutoffs must be positive")
        width = float(merged["completeness.test_width"])
        tests = tuple(spectral.GaussianTest(c, width) for c in _floats(merged["completeness.test_centers"]))
        for t in tests:
            a, b = t.interval
            if a <= grid.x_min or b >= grid.x_max:
                raise ConfigError("completeness test support must lie inside the grid")
        fmt = merged.get("output.format", "csv").strip()
        if fmt not in ("csv", "json"):
            raise ConfigError("output.format must be csv or json")
    except ConfigError:
        raise
    except (ValueError, KeyError, RosenMorseError) as exc:
        raise ConfigError(f"invalid config: {exc}") from None
    return RunConfig(params, energies, thetas, grid, transfer_grid, box, cutoffs, tests, fmt,
                     merged.get("output.path"))


def load_config(path: str | None) -> RunConfig:
    if path is None:
        return build_config({})
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from None
    return build_config(parse_config(text))


# -- output ------------------------------------------------------------------


class Table:
    def __init__(self, name: str, columns: list[str]):
        self.name = name
        self.columns = columns
        self.rows: list[list] = []

    def add(self, *values):
        row = []
        for v in values:
            if isinstance(v, (complex, np.complexfloating)):
                row.extend([v.real, v.imag])
            else:
                row.append(v)
        if len(row) != len(self.columns):
            raise AssertionError(f"{self.name}: {len(row)} values for {len(self.columns)} columns")
        self.rows.append(row)


def cplx(name):
    return [f"{name}_re", f"{name}_im"]


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return "%.12e" % float(v)
    return str(v)


def render(tables: list[Table], fmt: str) -> str:
    if fmt == "csv":
        blocks = []
        for t in tables:
            lines = [f"# {t.name}", ",".join(t.columns)]
            lines += [",".join(_fmt(v) for v in row) for row in t.rows]
            blocks.append("\n".join(lines))
        return "\n\n".join(blocks) + "\n"
    out = {}
    for t in tables:
        rows = []
        for row in t.rows:
            rec = {}
            for c, v in zip(t.columns, row):
                if isinstance(v, (bool, np.bool_, int, np.integer)):
                    rec[c] = int(v)
                elif isinstance(v, (float, np.floating)):
                    f = float("%.12e" % float(v))
                    rec[c] = f if np.isfinite(f) else _fmt(v)
                else:
                    rec[c] = v
            rows.append(rec)
        out[t.name] = rows
    return json.dumps(out, indent=1) + "\n"


# -- commands ----------------------------------------------------------------


def _rel(a, b):
    return abs(a - b) / abs(b) if abs(b) > 0 else abs(a - b)


def cmd_transmission(cfg: RunConfig, args) -> list[Table]:
    p, Es = cfg.potential, cfg.energies
    wkb, flips = model.transmission_wkb_sweep(p, Es)
    conn = [model.transmission_connection(p, E) for E in Es]
    tm = numerics.transfer_matrix_transmission(p.potential, p, Es, cfg.transfer_grid)
    if isinstance(tm, model.ScatteringAmplitudes):
        tm = [tm]
    delta = model.phase_shift_sweep(p, Es)
    rows = Table(
        "transmission",
        ["E", "branch"] + cplx("xi_tilde") + cplx("sqrt_A") + ["sqrt_A_flip"] + cplx("T_wkb")
        + cplx("T_conn") + cplx("R_conn") + cplx("T_transfer") + cplx("R_transfer")
        + ["unitarity", "phase_shift"],
    )
    for i, E in enumerate(Es):
        branch = "below" if E < p.U0 else "above"
        rows.add(float(E), branch, wkb[i].xi_tilde, wkb[i].sqrt_A, flips[i], wkb[i].T,
                 conn[i].T, conn[i].R, tm[i].T, tm[i].R, conn[i].unitarity, float(delta[i]))
    summary = Table("summary", ["branch", "n_points", "max_rel_dev_wkb_conn",
                                "max_rel_dev_wkb_transfer", "max_rel_dev_wkb_conn_T2",
                                "max_dev_conn_transfer", "sqrt_A_flips"])
    for branch in ("below", "above", "all"):
        idx = [i for i, E in enumerate(Es) if branch == "all" or (E < p.U0) == (branch == "below")]
        if not idx:
            summary.add(branch, 0, float("nan"), float("nan"), float("nan"), float("nan"), 0)
            continue
        summary.add(
            branch,
            len(idx),
            max(_rel(wkb[i].T, conn[i].T) for i in idx),
            max(_rel(wkb[i].T, tm[i].T) for i in idx),
            max(_rel(abs(wkb[i].T) ** 2, abs(conn[i].T) ** 2) for i in idx),
            max(max(abs(conn[i].T - tm[i].T), abs(conn[i].R - tm[i].R)) for i in idx),
            sum(int(flips[i]) for i in idx),
        )
    return [rows, summary]


def _find_poles(cfg: RunConfig):
    p, box = cfg.potential, cfg.box
    f = lambda k: model.siegert_condition(p, k)  # noqa: E731
    count = rootfind.winding_number(f, box)
    zeros = rootfind.find_zeros(f, box)
    return count, zeros


def cmd_poles(cfg: RunConfig, args) -> list[Table]:
    p, box = cfg.potential, cfg.box
    count, zeros = _find_poles(cfg)
    wind = Table("winding", ["re_min", "re_max", "im_min", "im_max", "winding", "n_zeros"])
    wind.add(box.re_min, box.re_max, box.im_min, box.im_max, count, len(zeros))
    poles = Table("poles", cplx("k") + cplx("E") + ["multiplicity", "residual", "class"])
    for z in zeros:
        kind = model.classify_wavenumber(z.location)
        poles.add(z.location, complex(p.energy(z.location)), z.multiplicity, z.residual, kind.value)
    bw = Table("breit_wigner", cplx("pole_E") + ["pole_Gamma", "fit_E_R", "fit_Gamma", "fit_background",
                                                  "rel_err_E_R", "rel_err_Gamma", "within_tolerance"])
    res = [z for z in zeros if model.classify_wavenumber(z.location) is SpectralClass.RESONANCE]
    if res:
        lowest = min(res, key=lambda z: complex(p.energy(z.location)).real)
        Ep = complex(p.energy(lowest.location))
        Es = rootfind.resonance_window(Ep)
        y = [abs(model.transmission_connection(p, E).T) ** 2 for E in Es]
        E_R, gamma, background = rootfind.breit_wigner_fit(list(zip(Es, y)), seed=args.seed)
        g_pole = -2.0 * Ep.imag
        eE, eG = _rel(E_R, Ep.real), _rel(gamma, g_pole)
        bw.add(Ep, g_pole, E_R, gamma, background, eE, eG, bool(eE <= 0.05 and eG <= 0.15))
    return [wind, poles, bw]


def _classified_spectra(cfg: RunConfig):
    p, grid = cfg.potential, cfg.grid
    raw = {}
    for th in cfg.theta_list:
        t0 = time.perf_counter()
        raw[th] = numerics.csm_spectrum(p, ScalingAngle(th), grid)
        log.info("eigensolve theta=%.3f in %.2fs (residual %.2e)", th, time.perf_counter() - t0,
                 raw[th].residual_norm)
    thetas = list(cfg.theta_list)
    out = {}
    for i, th in enumerate(thetas):
        partner = thetas[i + 1] if i + 1 < len(thetas) else thetas[i - 1]
        out[th] = numerics.classify_spectrum(raw[th], raw[partner])
    return out


def cmd_csm(cfg: RunConfig, args) -> list[Table]:
    spectra = _classified_spectra(cfg)
    eig = Table("eigenvalues", ["theta", "index"] + cplx("E") + ["class"])
    ray = Table("continuum", ["theta", "n_rotated_continuum", "n_unclassified",
                              "median_angular_deviation", "max_angular_deviation"])
    inv = Table("invariance", ["class", "theta_a", "theta_b"] + cplx("E_a") + cplx("E_b") + ["delta"])
    thetas = list(cfg.theta_list)
    for th in thetas:
        s = spectra[th]
        for i, (E, c) in enumerate(zip(s.eigenvalues, s.classes)):
            eig.add(th, i, complex(E), c.value)
        dev = numerics.continuum_angular_deviation(s)
        ray.add(th, len(s.indices(SpectralClass.ROTATED_CONTINUUM)),
                len(s.indices(SpectralClass.UNCLASSIFIED)),
                float(np.median(dev)) if dev.size else float("nan"),
                float(dev.max()) if dev.size else float("nan"))
    for a, b in zip(thetas[:-1], thetas[1:]):
        sa, sb = spectra[a], spectra[b]
        for kind in (SpectralClass.BOUND, SpectralClass.RESONANCE):
            for i in sa.indices(kind):
                Ea = complex(sa.eigenvalues[i])
                j = int(np.argmin(np.abs(sb.eigenvalues - Ea)))
                if sb.classes[j] is kind:
                    Eb = complex(sb.eigenvalues[j])
                    inv.add(kind.value, a, b, Ea, Eb, abs(Ea - Eb))
    return [eig, inv, ray]


def cmd_completeness(cfg: RunConfig, args) -> list[Table]:
    p, grid = cfg.potential, cfg.grid
    comp = Table("completeness", ["k_cutoff", "test_center", "test_width", "error"])
    for K in cfg.k_cutoffs:
        rep = spectral.completeness_check(p, grid, K, list(cfg.tests))
        for t, err in zip(cfg.tests, rep.test_function_errors):
            comp.add(float(K), t.center, t.width, err)
    csm = Table("csm_completeness", ["theta", "matrix_residual", "n_included", "included_indices"])
    incl = Table("inclusion", ["theta"] + cplx("E") + ["theta_R", "included"])
    try:
        _, zeros = _find_poles(cfg)
    except RosenMorseError as exc:
        log.warning("pole search failed (%s); inclusion table uses CSM resonances only", exc)
        zeros = []
    poles = [complex(p.energy(z.location)) for z in zeros
             if model.classify_wavenumber(z.location) is SpectralClass.RESONANCE]
    spectra = _classified_spectra(cfg)
    for th in cfg.theta_list:
        angle = ScalingAngle(th)
        s = spectra[th]
        residual = spectral.discrete_completeness_residual(s.eigenvectors)
        included = [int(i) for i in s.indices(SpectralClass.RESONANCE)]
        csm.add(th, residual, len(included), ";".join(str(i) for i in included))
        measure = spectral.csm_spectral_assembly(s, angle, poles=poles)
        for E, _, theta_R in measure.resonance_terms:
            incl.add(th, E, float(theta_R), True)
        for E in measure.excluded:
            incl.add(th, E, 0.5 * abs(float(np.angle(E))), False)
    return [comp, csm, incl]


COMMANDS = {
    "transmission": cmd_transmission,
    "poles": cmd_poles,
    "csm": cmd_csm,
    "completeness": cmd_completeness,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="rosenmorse", description="Rosen-Morse barrier scattering runs")
    ap.add_argument("command", choices=sorted(COMMANDS))
    ap.add_argument("--config", help="flat key = value config file (defaults are packaged)")
    ap.add_argument("--output", help="output file (default: output.path or stdout)")
    ap.add_argument("--format", choices=("csv", "json"))
    ap.add_argument("--seed", type=int, default=0, help="seed for fit initialisers")
    ap.add_argument("--verbose", action="store_true")
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s", stream=sys.stderr)
    if args.seed < 0 or args.seed >= 2**64:
        print("error: --seed must be an unsigned 64-bit integer", file=sys.stderr)
        return EXIT_CONFIG
    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    fmt = args.format or cfg.output_format
    path = args.output or cfg.output_path
    t0 = time.perf_counter()
    try:
        tables = COMMANDS[args.command](cfg, args)
    except RosenMorseError as exc:
        print(f"numerical failure in {exc.operation}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ValueError, ArithmeticError) as exc:
        print(f"numerical failure in {args.command}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    log.info("%s finished in %.2fs", args.command, time.perf_counter() - t0)
    text = render(tables, fmt)
    if path:
        try:
            with open(path, "w") as fh:
                fh.write(text)
        except OSError as exc:
            print(f"config error: cannot write output: {exc}", file=sys.stderr)
            return EXIT_CONFIG
    else:
        sys.stdout.write(text)
    return EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())
