"""Command-line front end.

Examples::

    blockade-ladder simulate decomposition --preset fig3 --out fig3_pj.csv
    blockade-ladder simulate ladder --preset fig4 --spectrum --out fig4.csv
    blockade-ladder simulate decomposition --relaxation --n 10,100
    blockade-ladder compare a.csv b.csv --tolerance 0.02 --from 1.2

Exit codes: 0 success, 1 configuration or schema error, 2 numerical
failure, 3 compare tolerance exceeded.

Sizing hint: a blockade sphere holds roughly ``sqrt(C6 / hbar Omega) * density``
atoms; for strontium Rydberg ensembles this is N ~ 30.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
import warnings
from importlib import metadata
from pathlib import Path

import numpy as np

from . import decomposition, ladder, linsys, single_atom, tables
from .config import ConfigError, ScenarioConfig, load_config_file, resolve

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_TOLERANCE = 0, 1, 2, 3


def tool_version() -> str:
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:
        return "0+unknown"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _int_list(text):
    try:
        return tuple(int(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="blockade-ladder", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sim = sub.add_parser("simulate", help="run a scenario and write a data table")
    sim.add_argument("model", choices=["single", "ladder", "decomposition"])
    sim.add_argument("--config", help="JSON scenario file (flags override it)")
    sim.add_argument("--preset", choices=["fig3", "fig4", "fig5", "mollow", "wfl"])
    sim.add_argument("--n", dest="n_atoms", type=_int_list, help="atom number(s), comma separated")
    sim.add_argument("--omega", type=float, help="Rabi frequency")
    sim.add_argument("--photon-rate", type=float, help="probe photon rate f; sets omega = 2 sqrt(f gamma)")
    sim.add_argument("--gamma", type=float)
    sim.add_argument("--gamma-rg", type=float)
    sim.add_argument("--gamma-rd", type=float)
    sim.add_argument("--flipping", help="none | prop:<c_rg>,<c_rd> | table:<file>")
    sim.add_argument("--t-max", type=float)
    sim.add_argument("--t-steps", type=int)
    sim.add_argument("--delta-range", type=float, help="half-width of the detuning grid")
    sim.add_argument("--delta-steps", type=int)
    sim.add_argument("--seed-time", type=float, help="time at which spectra / g2 are seeded")
    sim.add_argument("--method", choices=["quadrature", "resolvent", "both"])
    sim.add_argument("--tau-max", type=float)
    sim.add_argument("--tau-steps", type=int)
    mode = sim.add_mutually_exclusive_group()
    for name in ("spectrum", "fractions", "relaxation", "g2", "revival"):
        mode.add_argument(f"--{name}", dest="mode", action="store_const", const=name)
    sim.add_argument("--out", help="output path (stdout if omitted)")
    sim.add_argument("--format", choices=["csv", "json"])

    cmp_ = sub.add_parser("compare", help="column-wise deviation between two tables")
    cmp_.add_argument("file_a")
    cmp_.add_argument("file_b")
    cmp_.add_argument("--tolerance", type=float, default=0.0)
    cmp_.add_argument("--columns", help="comma list of col or colA:colB pairs (default: all shared)")
    cmp_.add_argument("--relative-to-peak", action="store_true",
                      help="divide deviations by max |column A|")
    cmp_.add_argument("--from", dest="key_min", type=float,
                      help="only rows whose first column is >= this value")
    return parser


# -- scenario runners -------------------------------------------------------


def _t_grid(cfg: ScenarioConfig, default_max: float) -> np.ndarray:
    return np.linspace(0.0, cfg.t_max if cfg.t_max is not None else default_max, cfg.t_steps)


def _delta_grid(cfg: ScenarioConfig, default_half: float) -> np.ndarray:
    half = cfg.delta_range if cfg.delta_range is not None else default_half
    return linsys.symmetric_grid(half, cfg.delta_steps)


def _single_spectrum(cfg, p):
    t = cfg.seed_time if cfg.seed_time is not None else single_atom.QUASI_STEADY_LIFETIMES / p.Gamma
    delta = _delta_grid(cfg, single_atom.default_delta_grid(p, 2)[-1])
    cols = {"delta": delta}
    methods = ["quadrature", "resolvent"] if cfg.method == "both" else [cfg.method]
    for m in methods:
        key = "S_numeric" if m == methods[0] else "S_resolvent"
        cols[key] = single_atom.numeric_spectrum(p, t, delta, m).values
    regime = p.regime()
    if regime is single_atom.RegimeTag.SFL:
        cols["S_analytic"] = single_atom.sfl_spectrum_analytic(p, t, delta).values
    elif regime is single_atom.RegimeTag.WFL and p.gamma_rd > 0:
        cols["S_analytic"] = single_atom.wfl_spectrum_analytic(p, t, delta).values
    return cols, {"kind": "spectrum", "seed_time": t, "regime": regime.name}


def run_single(cfg: ScenarioConfig):
    p = cfg.rate_params()
    if cfg.mode == "spectrum":
        return _single_spectrum(cfg, p)
    if cfg.mode != "trajectory":
        raise ConfigError(f"mode {cfg.mode!r} is not available for the single-atom model")
    t = _t_grid(cfg, 12.0 / max(p.gamma_rd, 1e-300) if p.gamma_rd > 0 else 12.0 / p.Gamma)
    traj = linsys.integrate(single_atom.single_atom_generator(p), single_atom.ground_state(), t)
    cols = {
        "t": t,
        "s_gg": traj[single_atom.GG].real,
        "s_rr": traj[single_atom.RR].real,
        "s_dd": traj[single_atom.DD].real,
        "trace": traj.population_total().real,
    }
    return cols, {"kind": "trajectory"}


def _ladder_spectrum(cfg, p):
    t = cfg.seed_time if cfg.seed_time is not None else p.quasi_steady_time()
    delta = _delta_grid(cfg, ladder.default_delta_grid(p, 2)[-1])
    methods = ["quadrature", "resolvent"] if cfg.method == "both" else [cfg.method]
    cols = {"delta": delta}
    numeric = None
    for m in methods:
        s = ladder.ensemble_spectrum_numeric(p, t, delta, m).values
        if numeric is None:
            numeric = s
            cols["S_numeric"] = s
        else:
            cols["S_resolvent"] = s
    analytic = decomposition.spectrum_analytic(p, t, delta).values
    cols["S_analytic"] = analytic
    # normalised by the numeric value at the grid point closest to delta = 0
    norm = numeric[np.argmin(np.abs(delta))]
    cols["S_normalized"] = numeric / norm
    cols["S_analytic_normalized"] = analytic / norm
    return cols, {"kind": "spectrum", "seed_time": t, "normalization": float(norm)}


def run_ladder(cfg: ScenarioConfig):
    p = cfg.ladder_params(cfg.n_atoms[0])
    if cfg.mode == "spectrum":
        return _ladder_spectrum(cfg, p)
    if cfg.mode == "g2":
        t1 = cfg.seed_time if cfg.seed_time is not None else p.quasi_steady_time()
        tau_max = cfg.tau_max if cfg.tau_max is not None else 12.0 / float(p.collective().Gamma_j.min())
        tau = np.linspace(0.0, tau_max, cfg.tau_steps)
        res = ladder.g2_numeric(p, t1, tau)
        return {"tau": tau, "G2": res.unnormalized, "g2": res.normalized}, {"kind": "g2", "seed_time": t1}
    if cfg.mode == "fractions":
        n = p.n_atoms
        t = _t_grid(cfg, 2.5 * n / cfg.gamma_rd)
        traj = ladder.evolve_ladder(p, t)
        rep = decomposition.fractions(decomposition.PjTrajectory(t, traj.pj()), p)
        cols = _fraction_columns(n, rep, cfg.gamma_rd)
        cols["P_r_numeric"] = traj.rydberg_fraction()
        return cols, {"kind": "fractions"}
    if cfg.mode != "trajectory":
        raise ConfigError(f"mode {cfg.mode!r} is not available for the ladder model")
    t = _t_grid(cfg, 12.0 / cfg.gamma_rd if cfg.gamma_rd > 0 else 12.0)
    traj = ladder.evolve_ladder(p, t)
    cols = {"t": t}
    pj = traj.pj()
    for j in range(p.n_atoms + 1):
        cols[f"p_{j}"] = pj[:, j]
    cols["trace"] = traj.trace()
    cols["P_r"] = traj.rydberg_fraction()
    return cols, {"kind": "trajectory"}


def _fraction_columns(n, rep, gamma_rd):
    return {
        "N": np.full(rep.t_grid.size, float(n)),
        "t": rep.t_grid,
        "P_d": rep.P_d,
        "P_G0": rep.P_G0,
        "P_r": rep.P_r,
        "dPd_dt": rep.dPd_dt,
        "dPd_dt_identity": rep.dPd_dt_identity,
        "P_linear": gamma_rd * rep.t_grid / (2 * n),
    }


def _concat(blocks):
    keys = list(blocks[0])
    return {k: np.concatenate([b[k] for b in blocks]) for k in keys}


def run_decomposition(cfg: ScenarioConfig):
    if cfg.mode == "relaxation":
        rows = []
        for n in cfg.n_atoms:
            diag = decomposition.relaxation_time_numeric(n, cfg.gamma_rd) if n >= 2 else None
            try:
                closed = decomposition.relaxation_time_closed_form(n, cfg.gamma_rd)
            except ValueError:
                closed = float("nan")
            num = diag.t_r if diag else float("nan")
            rows.append((n, closed, num, (closed - num) / num if diag else float("nan")))
        arr = np.array(rows, dtype=float)
        cols = dict(zip(["N", "t_r_closed", "t_r_numeric", "rel_diff"], arr.T))
        return cols, {"kind": "relaxation"}
    if cfg.mode == "fractions":
        blocks = []
        for n in cfg.n_atoms:
            p = cfg.ladder_params(n)
            t = _t_grid(cfg, 2.5 * n / cfg.gamma_rd)
            rep = decomposition.fractions(decomposition.evolve_pj(p, t), p)
            blocks.append(_fraction_columns(n, rep, cfg.gamma_rd))
        return _concat(blocks), {"kind": "fractions"}
    p = cfg.ladder_params(cfg.n_atoms[0])
    if cfg.mode == "spectrum":
        t = cfg.seed_time if cfg.seed_time is not None else p.quasi_steady_time()
        delta = _delta_grid(cfg, ladder.default_delta_grid(p, 2)[-1])
        s = decomposition.spectrum_analytic(p, t, delta).values
        return {"delta": delta, "S_analytic": s}, {"kind": "spectrum", "seed_time": t}
    if cfg.mode == "revival":
        t1 = cfg.seed_time if cfg.seed_time is not None else 2.0 / cfg.gamma_rd
        pj = decomposition.pj_at(p, t1)
        window = decomposition.REVIVAL_WINDOW / float(p.collective().Gamma_j.max())
        dt = np.linspace(0.0, cfg.tau_max if cfg.tau_max is not None else window, cfg.tau_steps)
        res = decomposition.rabi_revival(pj, p, dt)
        return {"dt": dt, "P_r": res.P_r}, {"kind": "revival", "seed_time": t1, "window": res.window,
                                            "within_window": res.within_window}
    if cfg.mode != "trajectory":
        raise ConfigError(f"mode {cfg.mode!r} is not available for the decomposition model")
    t = _t_grid(cfg, 12.0 / cfg.gamma_rd)
    traj = decomposition.evolve_pj(p, t)
    cols = {"t": t}
    for j in range(p.n_atoms + 1):
        cols[f"p_{j}"] = traj.p[:, j]
    return cols, {"kind": "trajectory"}


RUNNERS = {"single": run_single, "ladder": run_ladder, "decomposition": run_decomposition}


def run_scenario(cfg: ScenarioConfig) -> tables.Table:
    if cfg.model in ("ladder", "decomposition") and cfg.gamma_rd == 0 and cfg.mode in ("fractions", "relaxation"):
        raise ConfigError("pooling analytics need gamma_rd > 0")
    cols, meta = RUNNERS[cfg.model](cfg)
    meta = {"model": cfg.model, **meta}
    if cfg.preset:
        meta["preset"] = cfg.preset
    return tables.Table(list(cols), cols, meta)


def manifest_path(out: Path) -> Path:
    return out.with_name(out.stem + ".manifest.json")


def cmd_simulate(args) -> int:
    overrides = {k: getattr(args, k) for k in (
        "n_atoms", "omega", "photon_rate", "gamma", "gamma_rg", "gamma_rd", "flipping", "t_max", "t_steps",
        "delta_range", "delta_steps", "seed_time", "method", "tau_max", "tau_steps", "mode", "out", "format")}
    if args.photon_rate is not None:
        overrides["omega"] = None
    file_values = load_config_file(args.config) if args.config else None
    if file_values and args.preset is None:
        preset = file_values.pop("preset", None)
    else:
        preset = args.preset
    cfg = resolve(args.model, preset, file_values, overrides)
    start = time.perf_counter()
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        table = run_scenario(cfg)
    wall = time.perf_counter() - start
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    text = tables.dumps(table, cfg.format)
    if cfg.out is None:
        sys.stdout.write(text)
        return EXIT_OK
    out = Path(cfg.out)
    out.write_text(text)
    manifest = {
        "tool": "blockade-ladder",
        "version": tool_version(),
        "config": cfg.to_dict(),
        "data_file": out.name,
        "format": cfg.format,
        "schema": tables.SCHEMA,
        "rows": len(table),
        "warnings": [str(w.message) for w in caught],
        "wall_time_s": wall,
    }
    manifest_path(out).write_text(json.dumps(manifest, indent=1) + "\n")
    return EXIT_OK


def compare_tables(a: tables.Table, b: tables.Table, pairs=None, relative_to_peak=False, key_min=None):
    """Per-column max and RMS deviations; raises ``ConfigError`` on schema mismatch."""
    key_a, key_b = a.columns[0], b.columns[0]
    if key_a != key_b or len(a) != len(b) or not np.allclose(a[key_a], b[key_b], rtol=1e-12, atol=0):
        raise ConfigError("tables differ in their key column")
    if pairs is None:
        if a.columns != b.columns:
            raise ConfigError(f"column sets differ: {a.columns} vs {b.columns}")
        pairs = [(c, c) for c in a.columns[1:]]
    rows = np.ones(len(a), dtype=bool)
    if key_min is not None:
        rows = a[key_a] >= key_min
    report = []
    for ca, cb in pairs:
        if ca not in a.data or cb not in b.data:
            raise ConfigError(f"missing column {ca!r} or {cb!r}")
        diff = np.abs(a[ca][rows] - b[cb][rows])
        scale = 1.0
        if relative_to_peak:
            scale = float(np.max(np.abs(a[ca]))) or 1.0
        report.append({
            "column": ca if ca == cb else f"{ca}:{cb}",
            "max": float(diff.max(initial=0.0)) / scale,
            "rms": float(np.sqrt(np.mean(diff**2))) / scale if diff.size else 0.0,
        })
    return report


def cmd_compare(args) -> int:
    try:
        a, b = tables.load(args.file_a), tables.load(args.file_b)
    except (OSError, ValueError) as exc:
        raise ConfigError(f"cannot load tables: {exc}") from exc
    pairs = None
    if args.columns:
        pairs = []
        for item in args.columns.split(","):
            ca, _, cb = item.partition(":")
            pairs.append((ca, cb or ca))
    report = compare_tables(a, b, pairs, args.relative_to_peak, args.key_min)
    worst = 0.0
    print(f"{'column':<32}{'max':>14}{'rms':>14}")
    for r in report:
        print(f"{r['column']:<32}{r['max']:>14.6g}{r['rms']:>14.6g}")
        worst = max(worst, r["max"])
    ok = worst <= args.tolerance
    print(f"{'PASS' if ok else 'FAIL'}: worst deviation {worst:.6g} vs tolerance {args.tolerance:g}")
    return EXIT_OK if ok else EXIT_TOLERANCE


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "simulate":
            return cmd_simulate(args)
        return cmd_compare(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except linsys.NumericalError as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        for attr in ("t_fail", "residual", "condition"):
            if getattr(exc, attr, None) is not None:
                print(f"  {attr} = {getattr(exc, attr)}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
