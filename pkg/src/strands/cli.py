"""Command-line front end.

Subcommands: `simulate` runs a scenario benchmark and writes the
metrics report; `fit` runs one or more methods on a user CSV;
`cluster-report` writes the clustering of a dataset's predictors;
`diagnostic` writes the per-variable step-comparison table.

All options have defaults except the input (scenario or data file).
Options can also come from a flat key=value config file (--config);
command-line flags win. The effective configuration and master seed
are echoed into every artifact, so any output is reproducible from its
own header. Exit codes: 0 success, 2 usage or config error, 3 runtime
failure. Artifacts never depend on --threads.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys

import numpy as np

from .cluster import (MODE_CORRELATION, MODE_NONE, MODE_RANDOM, Clustering,
                      correlation_cluster, no_cluster, random_cluster)
from .data import standardize
from .ensemble import (StrandsConfig, StrandsResult, step_diagnostic,
                       strands_fit)
from .errors import (ConstantColumn, DegenerateBootstrap, DegenerateGrid,
                     DegenerateWeights, DimensionMismatch, EmptyEnsemble,
                     NonConvergence, UnknownScenario)
from .rlasso import RandomLassoResult
from .seeding import SeedStream
from .solvers import BaseLearner, FitResult, PenaltySpec
from .simbench import (METHOD_IDS, _fmt, build_scenario, fit_method,
                       run_experiment, sample_dataset, split_prediction_error)

OUT_DIR_ENV = "STRANDS_OUT_DIR"

_UNSET = object()  # distinguishes "flag not given" from any real value


class UsageError(Exception):
    """Bad flags, config, or input data; maps to exit code 2."""


# --------------------------------------------------------- option tables

# (flags, dest, type, default, choices, help); every option is declared
# here once so parsing, config-file merging, and artifact echo agree
_COMMON = [
    (("--seed",), "master_seed", int, 0, None, "master seed"),
    (("--out-dir",), "out_dir", str, None, None,
     f"output directory (default ${OUT_DIR_ENV} or .)"),
    (("--threads",), "threads", int, 0, None,
     "worker processes; 0 means available parallelism"),
    (("--config",), "config", str, None, None, "key=value config file"),
]

_STRANDS_OPTS = [
    (("--B",), "B", int, 300, None, "ensemble iterations"),
    (("--rho0",), "rho0", float, 0.5, None, "clustering threshold"),
    (("--pi-thr",), "pi_thr", float, 0.5, None, "selection-probability threshold"),
    (("--clustering-mode",), "clustering_mode", str, MODE_CORRELATION,
     (MODE_CORRELATION, MODE_RANDOM, MODE_NONE), "step-0 mode"),
]

_DATA_OPTS = [
    (("--data",), "data", str, None, None, "input CSV with a header row"),
    (("--response",), "response", str, "y", None, "response column name"),
]

_OPTIONS = {
    "simulate": _COMMON + _STRANDS_OPTS + [
        (("--scenario",), "scenario", str, None, None, "design name"),
        (("--n",), "n", int, None, None, "sample-size override"),
        (("--methods",), "methods", str, "lasso,strd-lasso", None,
         "comma-separated method list"),
        (("--replicates",), "replicates", int, 10, None, "replicate count"),
    ],
    "fit": _COMMON + _STRANDS_OPTS + _DATA_OPTS + [
        (("--methods",), "methods", str, "strd-lasso", None,
         "comma-separated method list"),
        (("--split-eval",), "split_eval", int, 0, None,
         "repeats of the 90/10 prediction-error protocol (0: off)"),
    ],
    "cluster-report": _COMMON + _DATA_OPTS + [
        (("--mode",), "mode", str, MODE_CORRELATION,
         (MODE_CORRELATION, MODE_RANDOM, MODE_NONE), "clustering mode"),
        (("--rho0",), "rho0", float, 0.5, None, "clustering threshold"),
        (("--template",), "template", str, None, None,
         "clustering JSON from a prior correlation run (required for mode=random)"),
    ],
    "diagnostic": _COMMON + _STRANDS_OPTS + _DATA_OPTS + [
        (("--scenario",), "scenario", str, None, None, "design name"),
        (("--n",), "n", int, None, None, "sample-size override"),
        (("--method",), "method", str, "strd-lasso",
         ("strd-lasso", "strd-adalasso"), "ensemble variant"),
    ],
}

# options that never enter artifact headers: they cannot change results
_NO_ECHO = ("out_dir", "threads", "config")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="strands",
        description="ensemble variable selection: benchmarks, fits, reports")
    sub = parser.add_subparsers(dest="command", required=True)
    for command, opts in _OPTIONS.items():
        sp = sub.add_parser(command)
        for flags, dest, typ, _default, choices, help_ in opts:
            sp.add_argument(*flags, dest=dest, type=typ, default=_UNSET,
                            choices=choices, help=help_)
    return parser


def _read_config_file(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as err:
        raise UsageError(f"cannot read config file: {err}")
    cfg = {}
    for i, line in enumerate(lines, start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise UsageError(f"config line {i} is not key=value: {line!r}")
        key, _, value = line.partition("=")
        cfg[key.strip()] = value.strip()
    return cfg


def _resolve_options(args: argparse.Namespace) -> dict:
    """Merge flags over config-file values over built-in defaults."""
    opts = _OPTIONS[args.command]
    file_cfg = {}
    if getattr(args, "config", _UNSET) is not _UNSET and args.config is not None:
        file_cfg = _read_config_file(args.config)
    eff = {"command": args.command}
    for flags, dest, typ, default, choices, _help in opts:
        value = getattr(args, dest)
        raw = file_cfg.pop(dest, _UNSET)  # a flag overrides the file copy
        if value is _UNSET:
            if raw is not _UNSET:
                try:
                    value = typ(raw)
                except ValueError:
                    raise UsageError(f"config key {dest}: bad value {raw!r}")
                if choices is not None and value not in choices:
                    raise UsageError(f"config key {dest}: {value!r} not in {choices}")
            else:
                value = default
        eff[dest] = value
    if file_cfg:
        raise UsageError(f"unknown config key {next(iter(file_cfg))!r}")
    if eff["out_dir"] is None:
        eff["out_dir"] = os.environ.get(OUT_DIR_ENV, ".")
    if eff["threads"] == 0:
        eff["threads"] = os.cpu_count() or 1
    elif eff["threads"] < 0:
        raise UsageError("--threads must be >= 0")
    return eff


def _echo_config(eff: dict) -> dict:
    return {k: v for k, v in eff.items() if k not in _NO_ECHO and v is not None}


def _parse_methods(spec: str) -> list:
    methods = [m.strip() for m in spec.split(",") if m.strip()]
    if not methods:
        raise UsageError("empty method list")
    for m in methods:
        if m not in METHOD_IDS:
            raise UsageError(f"unknown method {m!r} "
                             f"(choose from {', '.join(METHOD_IDS)})")
    return methods


# ------------------------------------------------------------------- io


def _out_path(eff: dict, filename: str) -> str:
    os.makedirs(eff["out_dir"], exist_ok=True)
    return os.path.join(eff["out_dir"], filename)


def _write_text(path: str, text: str):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    print(f"wrote {path}")


def _write_json(path: str, obj: dict):
    _write_text(path, json.dumps(obj, indent=2) + "\n")


def load_csv(path: str, response: str):
    """Read a numeric CSV with a header. Returns (names, x_raw, y_raw)."""
    try:
        fh = open(path, encoding="utf-8", newline="")
    except OSError as err:
        raise UsageError(f"cannot read data file: {err}")
    with fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise UsageError(f"{path}: empty file")
        header = [h.strip() for h in header]
        if response not in header:
            raise UsageError(f"{path}: no column named {response!r} in header")
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise UsageError(f"{path}: line {lineno} has {len(row)} cells, "
                                 f"header has {len(header)}")
            try:
                rows.append([float(cell) for cell in row])
            except ValueError:
                raise UsageError(f"{path}: non-numeric value on line {lineno}")
    if len(rows) < 2:
        raise UsageError(f"{path}: need at least 2 data rows")
    arr = np.array(rows)
    ri = header.index(response)
    names = [h for j, h in enumerate(header) if j != ri]
    return names, np.delete(arr, ri, axis=1), arr[:, ri]


def _standardize_named(names, x_raw, y_raw):
    try:
        return standardize(x_raw, y_raw)
    except ConstantColumn as err:
        raise UsageError(f"constant column {names[err.column]!r}")


# ------------------------------------------------------------- commands


def cmd_simulate(eff: dict) -> int:
    if eff["scenario"] is None:
        raise UsageError("--scenario is required")
    methods = _parse_methods(eff["methods"])
    report = run_experiment(
        eff["scenario"], methods, eff["replicates"], eff["master_seed"],
        n=eff["n"], B=eff["B"], clustering_mode=eff["clustering_mode"],
        pi_threshold=eff["pi_thr"], rho0=eff["rho0"], threads=eff["threads"])
    _write_text(_out_path(eff, "metrics.csv"), report.to_csv_text())
    _write_json(_out_path(eff, "metrics.json"), report.to_json_dict())
    _write_text(_out_path(eff, "replicates.csv"), report.replicates_csv_text())
    for row in report.rows:
        print(f"{row.method}: TP {row.mean_tp:.3g} FP {row.mean_fp:.3g} "
              f"MSE {row.mean_mse:.3g}")
    return 0


def _method_entry(method, names, selected, beta, result):
    entry = {
        "variables": list(names),
        "coefficients": [float(v) for v in beta],
        "selected": [names[j] for j in selected],
    }
    if isinstance(result, FitResult):
        entry["lambda"] = result.lambda_selected
        entry["cv_error"] = result.cv_error
    elif isinstance(result, StrandsResult):
        entry["pi_hat"] = [float(v) for v in result.pi_hat]
        entry["theta"] = [float(v) for v in result.theta]
        entry["s0_hat"] = result.s0_hat
        entry["s_tilde"] = result.s_tilde
        entry["k_count"] = result.clustering.k_count
    elif isinstance(result, RandomLassoResult):
        entry["importance"] = [float(v) for v in result.importance]
        entry["q1"] = result.q1_selected
        entry["q2"] = result.q2_selected
        entry["threshold"] = result.threshold
    return entry


def cmd_fit(eff: dict) -> int:
    if eff["data"] is None:
        raise UsageError("--data is required")
    methods = _parse_methods(eff["methods"])
    names, x_raw, y_raw = load_csv(eff["data"], eff["response"])
    dataset = _standardize_named(names, x_raw, y_raw)
    master = SeedStream(eff["master_seed"])
    out = {"config": _echo_config(eff), "methods": {}}
    for method in methods:
        mid = METHOD_IDS[method]
        selected, beta, result = fit_method(
            method, dataset, master.child(0, mid), eff["B"],
            eff["clustering_mode"], eff["pi_thr"], eff["rho0"])
        entry = _method_entry(method, names, selected, beta, result)
        if eff["split_eval"] > 0:
            def _fit(ds, s, _m=method):
                return fit_method(_m, ds, s, eff["B"], eff["clustering_mode"],
                                  eff["pi_thr"], eff["rho0"])[1]
            mean_pe, se_pe, _ = split_prediction_error(
                x_raw, y_raw, _fit, repeats=eff["split_eval"],
                seed=master.child(1, mid))
            entry["split_eval"] = {"repeats": eff["split_eval"],
                                   "mean_pe": mean_pe, "se_pe": se_pe}
        out["methods"][method] = entry
        print(f"{method}: selected {len(selected)} of {len(names)} variables")
    _write_json(_out_path(eff, "fit.json"), out)
    return 0


def _load_template(path: str, p: int) -> Clustering:
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as err:
        raise UsageError(f"cannot read template: {err}")
    if not isinstance(doc, dict) or "groups" not in doc:
        raise UsageError("template JSON has no 'groups' field")
    if doc.get("mode") != MODE_CORRELATION:
        raise UsageError("template must come from a correlation-mode run")
    groups = tuple(np.asarray(g, dtype=np.int64) for g in doc["groups"])
    try:
        template = Clustering(groups=groups, rho0=float(doc.get("rho0", 0.5)),
                              mode=MODE_CORRELATION)
    except ValueError as err:
        raise UsageError(f"bad template: {err}")
    if template.p != p:
        raise UsageError(f"template has {template.p} variables, data has {p}")
    return template


def cmd_cluster_report(eff: dict) -> int:
    if eff["data"] is None:
        raise UsageError("--data is required")
    names, x_raw, y_raw = load_csv(eff["data"], eff["response"])
    dataset = _standardize_named(names, x_raw, y_raw)
    master = SeedStream(eff["master_seed"])
    mode = eff["mode"]
    if mode == MODE_CORRELATION:
        clustering = correlation_cluster(dataset, BaseLearner(),
                                         rho0=eff["rho0"], seed=master.child(0))
    elif mode == MODE_NONE:
        clustering = no_cluster(dataset.p)
    else:
        if eff["template"] is None:
            raise UsageError("mode=random needs --template from a prior "
                             "correlation run")
        template = _load_template(eff["template"], dataset.p)
        clustering = random_cluster(template, master.child(1))
    doc = {"config": _echo_config(eff)}
    doc.update(clustering.to_dict())
    doc["group_sizes"] = [len(g) for g in clustering.groups]
    doc["variables"] = list(names)
    _write_json(_out_path(eff, "clustering.json"), doc)
    print(f"K={clustering.k_count} committed groups, "
          f"|G0|={len(clustering.groups[0])}")
    return 0


def cmd_diagnostic(eff: dict) -> int:
    if (eff["scenario"] is None) == (eff["data"] is None):
        raise UsageError("give exactly one of --scenario and --data")
    master = SeedStream(eff["master_seed"])
    relevant = None
    if eff["scenario"] is not None:
        scenario = build_scenario(eff["scenario"], eff["n"])
        draw = sample_dataset(scenario, master.child(0, 0))
        dataset = draw.dataset
        relevant = draw.positions
    else:
        names, x_raw, y_raw = load_csv(eff["data"], eff["response"])
        dataset = _standardize_named(names, x_raw, y_raw)
    method = eff["method"]
    pen = PenaltySpec("lasso" if method == "strd-lasso" else "adalasso")
    config = StrandsConfig(B=eff["B"], rho0=eff["rho0"],
                           pi_threshold=eff["pi_thr"],
                           clustering_mode=eff["clustering_mode"])
    result = strands_fit(dataset, config, BaseLearner(penalty=pen),
                         master.child(1, 0, METHOD_IDS[method]))
    table = step_diagnostic(result, relevant)
    columns = ["j", "theta", "pi_hat", "alpha", "abs_beta"]
    if relevant is not None:
        columns.append("relevant")
    lines = [f"# {k}={v}" for k, v in _echo_config(eff).items()]
    lines.append(",".join(columns))
    for i in range(dataset.p):
        cells = []
        for col in columns:
            v = table[col][i]
            cells.append(str(int(v)) if col in ("j", "relevant") else _fmt(v))
        lines.append(",".join(cells))
    _write_text(_out_path(eff, "diagnostic.csv"), "\n".join(lines) + "\n")
    return 0


_COMMANDS = {
    "simulate": cmd_simulate,
    "fit": cmd_fit,
    "cluster-report": cmd_cluster_report,
    "diagnostic": cmd_diagnostic,
}


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        eff = _resolve_options(args)
        return _COMMANDS[args.command](eff)
    except (NonConvergence, EmptyEnsemble, DegenerateBootstrap,
            DegenerateGrid, DegenerateWeights) as err:
        print(f"error: {err}", file=sys.stderr)
        return 3
    except (UsageError, UnknownScenario, DimensionMismatch, ValueError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except OSError as err:
        print(f"error: {err}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    raise SystemExit(main())
