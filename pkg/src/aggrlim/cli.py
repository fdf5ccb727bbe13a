"""Command-line driver.

Subcommands
-----------
simulate-panel  replicates of S~ on a time grid with both normalizations
verify          acceptance suites (exact | mc | slope | tail | cf)
sweep           iterated-limit convergence sweeps (N_first | n_first | slope | all)
report          tables and figures from existing outputs (never recomputes)

Settings come from a JSON config (``--config``); command-line flags override
config fields, and ``AGGRLIM_THREADS`` is used when ``--threads`` is absent.

Exit codes: 0 success, 1 acceptance failure, 2 configuration error,
3 runtime abort.
"""

import argparse
import copy
import csv
import glob
import hashlib
import io
import json
import math
import os
import sys
from fractions import Fraction

from . import __version__

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_CONFIG = 2
EXIT_ABORT = 3

DEFAULTS = {
    "model": "INAR",
    "lambda": 1.0,
    "sigma2": 1.0,
    "mixing": {"profile": "constant", "beta": 1.0},
    "N": 100,
    "n": 1000,
    "grid": ["1/2", "1"],
    "replicates": 100,
    "seed": 0,
    "out": "aggrlim-out",
    "threads": None,
    "budget": "default",
    "suite": "exact",
    "sweep": {
        "regime": "all",
        "N": 1000,
        "n": 10000,
        "n_sizes": [100, 1000, 10000],
        "N_sizes": [100, 1000, 10000],
        "slope_sizes": [1000, 10000, 100000, 1000000, 10000000],
        "slope_trials": 100,
        "replicates": 400,
        "blocks": 100,
    },
}

SWEEP_REGIMES = ("N_first", "n_first", "slope", "all")

PANEL_COLUMNS = ("replicate", "t", "S_raw", "S_normalized_N_first", "S_normalized_n_first")
VERIFY_COLUMNS = ("criterion", "hard", "passed", "estimate", "reference", "lower", "upper",
                  "seconds", "description")
SWEEP_COLUMNS = ("regime", "N", "n", "i", "j", "t_i", "t_j", "estimate", "lower", "upper",
                 "plain", "reference", "limit", "max_rel_dev", "max_rel_dev_limit",
                 "replicates", "seed")
SLOPE_COLUMNS = ("N", "trials", "median", "q25", "q75", "target", "median_dev", "seed")
PLOT_COLUMNS = ("series", "t", "empirical", "reference")

REPORT_HELP = """\
report reads the files written by the other subcommands in INPUT and writes
  plot_data.csv   columns: series, t, empirical, reference
                  series = <regime>:N=<N>:n=<n> for sweep rows (diagonal of the
                  covariance matrix; reference = exact finite-size value) or
                  criterion <id> for verify summaries with a covariance matrix
  *.png           sweep deviations, covariance along t, slope medians, panels
and prints a table of criteria and sweep rows.  Inputs recognized:
  verify_<suite>.json, sweep_<regime>.csv, sweep_slope.csv, panel.csv
"""


class ConfigError(ValueError):
    pass


# -- config handling ------------------------------------------------------------------

def _merge(base, override, path=""):
    out = copy.deepcopy(base)
    for key, val in override.items():
        if key not in base:
            raise ConfigError(f"unknown config field {path + key!r}")
        if isinstance(base[key], dict) and key != "mixing":
            if not isinstance(val, dict):
                raise ConfigError(f"config field {path + key!r} must be an object")
            out[key] = _merge(base[key], val, path + key + ".")
        else:
            out[key] = val
    return out


def load_config(args):
    """Defaults <- config file <- flags (threads: flag, then AGGRLIM_THREADS, then config)."""
    cfg = copy.deepcopy(DEFAULTS)
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                user = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from exc
        if not isinstance(user, dict):
            raise ConfigError("config must be a JSON object")
        user.pop("command", None)
        cfg = _merge(cfg, user)
    flag_map = {"seed": "seed", "out": "out", "budget": "budget"}
    for attr, key in flag_map.items():
        val = getattr(args, attr, None)
        if val is not None:
            cfg[key] = val
    for attr, key in (("model", "model"), ("lam", "lambda"), ("sigma2", "sigma2"),
                      ("N", "N"), ("n", "n"), ("replicates", "replicates"), ("suite", "suite")):
        val = getattr(args, attr, None)
        if val is not None:
            cfg[key] = val
    if getattr(args, "grid", None) is not None:
        cfg["grid"] = [g for g in args.grid.split(",") if g.strip()]
    if getattr(args, "beta", None) is not None:
        cfg["mixing"] = dict(cfg["mixing"], beta=args.beta)
    if getattr(args, "regime", None) is not None:
        cfg["sweep"]["regime"] = args.regime
    if getattr(args, "threads", None) is not None:
        cfg["threads"] = args.threads
    elif os.environ.get("AGGRLIM_THREADS"):
        cfg["threads"] = os.environ["AGGRLIM_THREADS"]
    return cfg


def config_hash(cfg):
    blob = json.dumps(_hashable(cfg), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def _hashable(cfg):
    # output location and thread count do not change results
    return {k: v for k, v in cfg.items() if k not in ("out", "threads")}


def _int(cfg, key, lo=None):
    val = cfg[key]
    if isinstance(val, bool) or not isinstance(val, (int, float)) or int(val) != val:
        raise ConfigError(f"{key} must be an integer, got {val!r}")
    val = int(val)
    if lo is not None and val < lo:
        raise ConfigError(f"{key} must be >= {lo}, got {val}")
    return val


def _grid(values):
    try:
        grid = [Fraction(str(v)) for v in values]
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigError(f"bad grid value: {exc}") from exc
    return grid


def _seed(cfg):
    seed = cfg["seed"]
    try:
        seed = int(seed)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"seed must be an unsigned 64-bit integer, got {seed!r}") from exc
    if not 0 <= seed < 2**64:
        raise ConfigError(f"seed must be an unsigned 64-bit integer, got {seed}")
    return seed


def _model_params(cfg):
    from .processes import normalize_model, params_for
    model = normalize_model(cfg["model"])
    scale = cfg["lambda"] if model == "INAR" else cfg["sigma2"]
    return model, params_for(model, scale)


def _threads(cfg):
    t = cfg.get("threads")
    if t is None:
        return None
    try:
        t = int(t)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"threads must be a positive integer, got {t!r}") from exc
    if t < 1:
        raise ConfigError(f"threads must be a positive integer, got {t}")
    return t


def _apply_threads(t):
    if t is None:
        return
    import numba
    numba.set_num_threads(min(t, numba.config.NUMBA_NUM_THREADS))


# -- output helpers ---------------------------------------------------------------------

def _fmt(x):
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        return format(x, ".17g")
    if hasattr(x, "dtype") and x.dtype.kind == "f":
        return format(float(x), ".17g")
    if isinstance(x, Fraction):
        return format(float(x), ".17g")
    return str(x)


def _header_lines(cfg, command):
    meta = {"artifact": "aggrlim", "version": __version__, "command": command,
            "seed": cfg["seed"], "config_hash": config_hash(cfg)}
    return [f"# {json.dumps(meta, sort_keys=True)}",
            f"# config={json.dumps(_hashable(cfg), sort_keys=True)}"]


def write_csv(path, cfg, command, columns, rows):
    buf = io.StringIO()
    for line in _header_lines(cfg, command):
        buf.write(line + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(buf.getvalue())
    return path


def write_json(path, cfg, command, payload):
    doc = {"artifact": "aggrlim", "version": __version__, "command": command,
           "seed": cfg["seed"], "config_hash": config_hash(cfg), "config": _hashable(cfg)}
    doc.update(payload)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def read_csv(path):
    with open(path, encoding="utf-8") as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    return list(csv.DictReader(lines))


def _outdir(cfg):
    out = cfg["out"]
    os.makedirs(out, exist_ok=True)
    return out


# -- subcommands ------------------------------------------------------------------------

def cmd_simulate_panel(cfg):
    import numpy as np
    from .aggregation import PanelSpec, simulate_panel
    from .mixing import law_from_config
    model, params = _model_params(cfg)
    law = law_from_config(cfg["mixing"])
    N = _int(cfg, "N", 1)
    n = _int(cfg, "n", 1)
    R = _int(cfg, "replicates", 1)
    spec = PanelSpec(N=N, n=n, grid=_grid(cfg["grid"]), model=model, params=params,
                     mixing=law, seed=_seed(cfg))
    _apply_threads(_threads(cfg))
    out = _outdir(cfg)
    raw = simulate_panel(spec, np.arange(R))
    nf = math.sqrt(n * math.log(n) * N) if n >= 2 else float("nan")
    Nf = math.sqrt(n * N * math.log(N)) if N >= 2 else float("nan")
    rows = []
    for r in range(R):
        for g, t in enumerate(spec.grid):
            s = float(raw[r, g])
            rows.append((r, t, s, s / nf, s / Nf))
    path = write_csv(os.path.join(out, "panel.csv"), cfg, "simulate-panel", PANEL_COLUMNS, rows)
    print(f"wrote {len(rows)} rows to {path}")
    return EXIT_OK


def cmd_verify(cfg):
    from .verify import BUDGETS, SUITES, run_suite
    suite = cfg["suite"]
    budget = cfg["budget"]
    if suite not in SUITES:
        raise ConfigError(f"unknown suite {suite!r}; choose from {', '.join(SUITES)}")
    if budget not in BUDGETS:
        raise ConfigError(f"unknown budget {budget!r}; choose from {', '.join(BUDGETS)}")
    seed = _seed(cfg)
    _apply_threads(_threads(cfg))
    out = _outdir(cfg)
    results = run_suite(suite, budget=budget, seed=seed,
                        progress=lambda r: print(r.line(), flush=True))
    rows = [(r.cid, r.hard, r.passed, float(r.estimate), float(r.reference), float(r.lower),
             float(r.upper), round(r.seconds, 3), r.description) for r in results]
    write_csv(os.path.join(out, f"verify_{suite}.csv"), cfg, "verify", VERIFY_COLUMNS, rows)
    hard_ok = all(r.passed for r in results if r.hard)
    summary = {"suite": suite, "budget": budget, "all_hard_passed": hard_ok,
               "criteria": [_criterion_json(r) for r in results]}
    write_json(os.path.join(out, f"verify_{suite}.json"), cfg, "verify", summary)
    n_fail = sum(1 for r in results if r.hard and not r.passed)
    print(f"suite {suite} ({budget}): {len(results) - n_fail}/{len(results)} passed")
    return EXIT_OK if hard_ok else EXIT_FAIL


def _criterion_json(r):
    d = r.to_json()
    d["id"] = d.pop("cid")
    d["pass"] = d.pop("passed")
    # seconds depend on the machine; keep summaries reproducible
    d.pop("seconds", None)
    return d


def _sweep_rows_csv(rows):
    out = []
    for row in rows:
        G = len(row.grid)
        for i in range(G):
            for j in range(G):
                out.append((row.regime, row.N, row.n, i, j, row.grid[i], row.grid[j],
                            float(row.estimate[i, j]), float(row.lower[i, j]),
                            float(row.upper[i, j]), float(row.plain[i, j]),
                            float(row.reference[i, j]), float(row.limit[i, j]),
                            row.max_rel_dev, row.max_rel_dev_limit, row.replicates, row.seed))
    return out


def cmd_sweep(cfg):
    from .mixing import law_from_config
    from .stats import SweepConfig, sweep_N_first, sweep_n_first, sweep_slope
    sw = cfg["sweep"]
    regime = sw["regime"]
    if regime not in SWEEP_REGIMES:
        raise ConfigError(f"unknown sweep regime {regime!r}; choose from {SWEEP_REGIMES}")
    model, params = _model_params(cfg)
    law = law_from_config(cfg["mixing"])
    seed = _seed(cfg)
    sizes_n = tuple(int(x) for x in sw["n_sizes"])
    sizes_N = tuple(int(x) for x in sw["N_sizes"])
    if regime in ("N_first", "all") and min(sizes_n) < 2:
        raise ConfigError("N_first sweep needs every n >= 2")
    if regime in ("n_first", "all") and min(sizes_N) < 2:
        raise ConfigError("n_first sweep needs every N >= 2")
    if regime in ("slope", "all") and min(int(x) for x in sw["slope_sizes"]) < 2:
        raise ConfigError("slope sweep needs every N >= 2")
    base = dict(model=model, params=params, mixing=law, N=_int(sw, "N", 1),
                n=_int(sw, "n", 1), grid=tuple(_grid(cfg["grid"])),
                replicates=_int(sw, "replicates", 2), seed=seed,
                blocks=_int(sw, "blocks", 1),
                slope_sizes=tuple(int(x) for x in sw["slope_sizes"]),
                slope_trials=_int(sw, "slope_trials", 1))
    _apply_threads(_threads(cfg))
    out = _outdir(cfg)
    summary = {"regime": regime, "rows": []}
    if regime in ("N_first", "all"):
        rows = sweep_N_first(SweepConfig(sizes=sizes_n, **base))
        write_csv(os.path.join(out, "sweep_N_first.csv"), cfg, "sweep", SWEEP_COLUMNS,
                  _sweep_rows_csv(rows))
        summary["rows"] += [_row_summary(r) for r in rows]
        for r in rows:
            print(f"N_first N={r.N} n={r.n}: dev vs exact {r.max_rel_dev:.4f}, "
                  f"vs limit {r.max_rel_dev_limit:.4f}")
    if regime in ("n_first", "all"):
        rows = sweep_n_first(SweepConfig(sizes=sizes_N, **base))
        write_csv(os.path.join(out, "sweep_n_first.csv"), cfg, "sweep", SWEEP_COLUMNS,
                  _sweep_rows_csv(rows))
        summary["rows"] += [_row_summary(r) for r in rows]
        for r in rows:
            print(f"n_first N={r.N} n={r.n}: dev vs exact {r.max_rel_dev:.4f}, "
                  f"vs limit {r.max_rel_dev_limit:.4f}")
    if regime in ("slope", "all"):
        srows = sweep_slope(SweepConfig(**base))
        write_csv(os.path.join(out, "sweep_slope.csv"), cfg, "sweep", SLOPE_COLUMNS,
                  [(r.N, r.trials, r.median, r.q25, r.q75, r.target, r.median_dev, r.seed)
                   for r in srows])
        summary["slope"] = [{"N": r.N, "median": r.median, "median_dev": r.median_dev}
                            for r in srows]
        for r in srows:
            print(f"slope N={r.N}: median {r.median:.4f} (target {r.target:.4g})")
    write_json(os.path.join(out, f"sweep_{regime}.json"), cfg, "sweep", summary)
    return EXIT_OK


def _row_summary(r):
    return {"regime": r.regime, "N": r.N, "n": r.n, "max_rel_dev": r.max_rel_dev,
            "max_rel_dev_limit": r.max_rel_dev_limit, "replicates": r.replicates,
            "seed": r.seed}


def _float(s):
    return float(s) if s not in ("", None) else float("nan")


def cmd_report(cfg, input_dir):
    from . import plotting
    if not input_dir or not os.path.isdir(input_dir):
        raise ConfigError(f"input directory {input_dir!r} does not exist")
    verify_json = sorted(glob.glob(os.path.join(input_dir, "verify_*.json")))
    sweep_csv = sorted(p for p in glob.glob(os.path.join(input_dir, "sweep_*.csv"))
                       if not p.endswith("sweep_slope.csv"))
    slope_csv = os.path.join(input_dir, "sweep_slope.csv")
    panel_csv = os.path.join(input_dir, "panel.csv")
    has_slope = os.path.exists(slope_csv)
    has_panel = os.path.exists(panel_csv)
    if not (verify_json or sweep_csv or has_slope or has_panel):
        raise ConfigError(f"no aggrlim outputs found in {input_dir!r}")
    out = cfg["out"] if cfg.get("_out_given") else input_dir
    os.makedirs(out, exist_ok=True)
    lines = []
    plot_points = []
    for path in verify_json:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
        lines.append(f"== {os.path.basename(path)} (suite {doc.get('suite')}, "
                     f"budget {doc.get('budget')}, seed {doc.get('seed')}, "
                     f"config {doc.get('config_hash')})")
        lines.append(f"{'id':>6} {'result':>6} {'estimate':>14} {'reference':>14} "
                     f"{'lower':>14} {'upper':>14}")
        for c in doc.get("criteria", []):
            res = ("PASS" if c["pass"] else "FAIL") + ("" if c.get("hard", True) else "*")
            lines.append(f"{c['id']:>6} {res:>6} {_num(c['estimate']):>14} "
                         f"{_num(c['reference']):>14} {_num(c['band'][0]):>14} "
                         f"{_num(c['band'][1]):>14}")
            det = c.get("details", {})
            if "estimate" in det and "reference" in det and "grid" in det:
                for g, t in enumerate(det["grid"]):
                    plot_points.append((f"criterion {c['id']}", float(t),
                                        float(det["estimate"][g][g]),
                                        float(det["reference"][g][g])))
        lines.append("(* soft diagnostic, not gating)")
    sweep_summary = []
    for path in sweep_csv:
        rows = read_csv(path)
        lines.append(f"== {os.path.basename(path)}")
        lines.append(f"{'regime':>8} {'N':>9} {'n':>9} {'dev_exact':>12} {'dev_limit':>12}")
        seen = set()
        for r in rows:
            key = (r["regime"], int(r["N"]), int(r["n"]))
            if r["i"] == r["j"]:
                plot_points.append((f"{key[0]}:N={key[1]}:n={key[2]}", _float(r["t_i"]),
                                    _float(r["estimate"]), _float(r["reference"])))
            if key in seen:
                continue
            seen.add(key)
            size = key[2] if key[0] == "N_first" else key[1]
            sweep_summary.append({"regime": key[0], "size": size,
                                  "dev_exact": _float(r["max_rel_dev"]),
                                  "dev_limit": _float(r["max_rel_dev_limit"])})
            lines.append(f"{key[0]:>8} {key[1]:>9} {key[2]:>9} "
                         f"{_num(_float(r['max_rel_dev'])):>12} "
                         f"{_num(_float(r['max_rel_dev_limit'])):>12}")
    slope_rows = []
    if has_slope:
        lines.append("== sweep_slope.csv")
        lines.append(f"{'N':>10} {'median':>12} {'q25':>12} {'q75':>12} {'target':>8}")
        for r in read_csv(slope_csv):
            d = {k: _float(r[k]) for k in ("median", "q25", "q75", "target")}
            d["N"] = int(r["N"])
            slope_rows.append(d)
            lines.append(f"{d['N']:>10} {_num(d['median']):>12} {_num(d['q25']):>12} "
                         f"{_num(d['q75']):>12} {_num(d['target']):>8}")
    panel_points = []
    if has_panel:
        rows = read_csv(panel_csv)
        lines.append(f"== panel.csv: {len(rows)} rows")
        for r in rows:
            t = _float(r["t"])
            for col in ("S_normalized_N_first", "S_normalized_n_first"):
                v = _float(r[col])
                if math.isfinite(v):
                    panel_points.append((col.replace("S_normalized_", ""), t, v))
    text = "\n".join(lines) + "\n"
    sys.stdout.write(text)
    plot_points.sort(key=lambda p: (p[0], p[1]))
    pcfg = {"seed": None, "report_input": os.path.basename(os.path.normpath(input_dir))}
    _write_plot_data(os.path.join(out, "plot_data.csv"), pcfg, plot_points)
    if plot_points:
        plotting.plot_covariance(plot_points, os.path.join(out, "covariance.png"))
    if sweep_summary:
        plotting.plot_sweep(sweep_summary, os.path.join(out, "sweep_deviation.png"))
    if slope_rows:
        plotting.plot_slope(slope_rows, os.path.join(out, "slope.png"))
    if panel_points:
        plotting.plot_panel(panel_points, os.path.join(out, "panel.png"))
    return EXIT_OK


def _write_plot_data(path, meta, points):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(f"# {json.dumps({'artifact': 'aggrlim', 'version': __version__, **meta}, sort_keys=True)}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(PLOT_COLUMNS)
        for p in points:
            w.writerow([p[0]] + [_fmt(float(v)) for v in p[1:]])


def _num(x):
    if isinstance(x, str):
        return x
    return f"{x:.6g}"


# -- argument parsing -------------------------------------------------------------------

def _u64(text):
    try:
        v = int(text, 0)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from exc
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in 64 unsigned bits")
    return v


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="JSON config; flags override its fields")
    common.add_argument("--seed", type=_u64, metavar="U64", help="master seed")
    common.add_argument("--threads", type=int, metavar="K",
                        help="worker threads (fallback: AGGRLIM_THREADS); never changes results")
    common.add_argument("--out", metavar="DIR", help="output directory")
    common.add_argument("--budget", choices=("small", "default", "large"),
                        help="Monte Carlo budget for verify")

    model = argparse.ArgumentParser(add_help=False)
    model.add_argument("--model", choices=("AR", "INAR"))
    model.add_argument("--lambda", dest="lam", type=float, help="INAR innovation intensity")
    model.add_argument("--sigma2", type=float, help="AR innovation variance")
    model.add_argument("--beta", type=float, help="mixing exponent (constant profile unless configured)")
    model.add_argument("--grid", help="comma-separated times, rationals allowed (e.g. 1/2,1)")

    p = _Parser(prog="aggrlim", description=__doc__.split("\n\n")[0],
                formatter_class=argparse.RawDescriptionHelpFormatter,
                epilog="exit codes: 0 pass, 1 acceptance failure, 2 config error, "
                       "3 runtime abort")
    p.add_argument("--version", action="version", version=f"aggrlim {__version__}")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    sp = sub.add_parser("simulate-panel", parents=[common, model],
                        help="simulate replicates of the aggregate on a grid",
                        description="Writes panel.csv with columns " + ", ".join(PANEL_COLUMNS))
    sp.add_argument("--N", type=int, help="copies")
    sp.add_argument("--n", type=int, help="time scale")
    sp.add_argument("--replicates", type=int)

    vp = sub.add_parser("verify", parents=[common],
                        help="run an acceptance suite",
                        description="Writes verify_<suite>.csv (columns: "
                                    + ", ".join(VERIFY_COLUMNS) + ") and verify_<suite>.json")
    vp.add_argument("--suite", help="exact | mc | slope | tail | cf")

    wp = sub.add_parser("sweep", parents=[common, model],
                        help="iterated-limit convergence sweeps",
                        description="Writes sweep_<regime>.csv (columns: "
                                    + ", ".join(SWEEP_COLUMNS) + "), sweep_slope.csv "
                                    "(columns: " + ", ".join(SLOPE_COLUMNS) + ") and a "
                                    "summary JSON")
    wp.add_argument("--regime", help="N_first | n_first | slope | all")

    rp = sub.add_parser("report", parents=[common], help="tables and figures from outputs",
                        description=REPORT_HELP,
                        formatter_class=argparse.RawDescriptionHelpFormatter)
    rp.add_argument("input", nargs="?", help="directory with outputs (default: --out)")
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if not args.command:
        parser.print_help(sys.stderr)
        return EXIT_CONFIG
    try:
        cfg = load_config(args)
        if args.command == "simulate-panel":
            return cmd_simulate_panel(cfg)
        if args.command == "verify":
            return cmd_verify(cfg)
        if args.command == "sweep":
            return cmd_sweep(cfg)
        cfg["_out_given"] = args.out is not None and args.input is not None
        return cmd_report(cfg, args.input or cfg["out"])
    except ConfigError as exc:
        print(f"aggrlim: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as exc:
        print(f"aggrlim: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001
        from .processes import PathAbort
        from .theory import QuadratureError
        if isinstance(exc, (PathAbort, QuadratureError)):
            print(f"aggrlim: runtime abort: {exc}", file=sys.stderr)
            return EXIT_ABORT
        raise


if __name__ == "__main__":
    sys.exit(main())
