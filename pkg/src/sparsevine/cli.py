"""Batch front-end for the vine pipeline.

Subcommands: prepare, order, select, sweep, fit, simulate, compare,
report. Configuration is one JSON document; every flag can be overridden
on the command line, and each run writes its resolved configuration next
to its outputs. All randomness derives from one master seed: stage k of
(select, fit, simulate, compare) uses
``numpy.random.SeedSequence(seed).generate_state(4)[k]``.

Exit codes: 0 ok, 1 usage or configuration error, 2 data error,
3 numeric failure (diagnostics on stderr include cell coordinates when
the failing edge is known).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, replace
from pathlib import Path

import numpy as np

from .copulas import DEFAULT_FAMILIES, FAMILIES
from .data import (Dataset, Scale, load_csv, to_pseudo_observations,
                   to_u_scale, to_z_scale)
from .dissmann import DissmannConfig, fit_dissmann
from .errors import (ContractError, DataError, NumericError, SparseVineError,
                     StructureError)
from .estimation import (FittedVine, compute_loglik, information_criteria,
                         fit, simulate)
from .selection import StructureResult, lasso_ordering, select_structure
from .thresholds import ThresholdSpec, apply_threshold, default_threshold_grid

_STAGES = ("select", "fit", "simulate", "compare")


def stage_seed(master: int, stage: str) -> int:
    """Per-stage seed: position of ``stage`` in the documented stage list
    indexes ``SeedSequence(master).generate_state(4)``."""
    state = np.random.SeedSequence(master).generate_state(len(_STAGES))
    return int(state[_STAGES.index(stage)])


# ---------------------------------------------------------------------------
# Configuration
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RunConfig:
    """Resolved run configuration (defaults < config file < command line)."""

    input: str = None
    scale: str = "x"
    seed: int = 0
    k_folds: int = 10
    cv_rule: str = "min"
    lambda_grid: tuple = None   # None -> default grid when no mu grid given
    mu_grid: tuple = ()
    families: tuple = DEFAULT_FAMILIES
    alpha: float = 0.05
    criterion: str = "aic"
    truncations: tuple = (1, 2, 5)
    out_dir: str = "sparsevine_out"
    workers: int = 1
    n_samples: int = 1000

    def __post_init__(self):
        if self.scale not in ("x", "u", "z"):
            raise ContractError(f"scale must be x, u or z, got {self.scale!r}")
        if not self.families:
            raise ContractError("candidate family set must not be empty")
        unknown = set(self.families) - set(FAMILIES)
        if unknown:
            raise ContractError(f"unknown families: {sorted(unknown)}")
        if not 0.0 <= self.alpha < 1.0:
            raise ContractError(f"alpha must lie in [0, 1), got {self.alpha}")
        if self.criterion not in ("aic", "bic"):
            raise ContractError(f"criterion must be aic or bic, got {self.criterion!r}")
        if self.k_folds < 2:
            raise ContractError(f"k_folds must be at least 2, got {self.k_folds}")
        if self.workers < 1:
            raise ContractError(f"workers must be at least 1, got {self.workers}")
        if self.n_samples < 1:
            raise ContractError(f"n_samples must be positive, got {self.n_samples}")
        for k in self.truncations:
            if int(k) != k or k < 1:
                raise ContractError(f"truncation levels must be positive integers, got {k}")

    @property
    def grid(self) -> tuple:
        """The requested threshold specs, single points before adaptive."""
        lam = self.lambda_grid
        if lam is None:
            lam = () if self.mu_grid else default_threshold_grid()
        return tuple([ThresholdSpec("single", float(v)) for v in lam]
                     + [ThresholdSpec("adaptive", float(v)) for v in self.mu_grid])


_CONFIG_KEYS = set(RunConfig.__dataclass_fields__)


def load_config(path=None, overrides=None) -> RunConfig:
    """Merge defaults, an optional JSON config file, and CLI overrides."""
    doc = {}
    if path is not None:
        try:
            doc = json.loads(Path(path).read_text(encoding="utf-8"))
        except OSError as exc:
            raise DataError(f"cannot read config {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise DataError(f"config {path} is not valid JSON: {exc}") from exc
        unknown = set(doc) - _CONFIG_KEYS
        if unknown:
            raise ContractError(f"unknown config keys: {sorted(unknown)}")
    merged = dict(doc)
    for key, value in (overrides or {}).items():
        if value is not None:
            merged[key] = value
    for key in ("lambda_grid", "mu_grid", "families", "truncations"):
        if merged.get(key) is not None:
            merged[key] = tuple(merged[key])
    return RunConfig(**merged)


# ---------------------------------------------------------------------------
# I/O helpers
# ---------------------------------------------------------------------------

def _write_atomic(path: Path, text: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text, encoding="utf-8")
    os.replace(tmp, path)


def _write_csv(path: Path, header, rows):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    _write_atomic(path, buf.getvalue())


def _dataset_csv(ds: Dataset) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(ds.column_names)
    writer.writerows(ds.values.tolist())
    return buf.getvalue()


def _resolve_data(cfg: RunConfig):
    """Load the input and return it on both working scales as (u, z)."""
    if cfg.input is None:
        raise ContractError("no input file configured (use --input or the config file)")
    raw = load_csv(cfg.input)
    if cfg.scale == "x":
        u = to_pseudo_observations(raw)
    elif cfg.scale == "u":
        u = Dataset(raw.values, Scale.U, raw.column_names)
    else:
        u = to_u_scale(Dataset(raw.values, Scale.Z, raw.column_names))
    return u, to_z_scale(u)


def _out(cfg: RunConfig) -> Path:
    return Path(cfg.out_dir)


def _save_resolved(cfg: RunConfig, command: str):
    doc = asdict(cfg)
    doc["command"] = command
    doc["grid"] = [[s.mode, s.value] for s in cfg.grid]
    _write_atomic(_out(cfg) / f"config_{command}.json",
                  json.dumps(doc, indent=2, default=list) + "\n")


def _pool_map(fn, items, workers):
    if workers > 1 and len(items) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, items))
    return [fn(item) for item in items]


def _spec_tag(spec: ThresholdSpec) -> str:
    return f"{spec.mode}_{spec.value!r}"


def _load_structure(cfg: RunConfig) -> StructureResult:
    path = _out(cfg) / "structure.json"
    if not path.exists():
        raise DataError(f"no structure artifact at {path}; run 'select' first")
    return StructureResult.from_json(path.read_text(encoding="utf-8"))


def _fit_point(u: Dataset, structure: StructureResult, spec: ThresholdSpec,
               cfg: RunConfig, families=None):
    """Threshold + fit one grid point; returns (vine, criteria, seconds)."""
    start = time.perf_counter()
    pattern, _ = apply_threshold(structure.lambda_matrix, spec)
    vine = fit(u, structure.matrix, pattern, families or cfg.families,
               cfg.alpha, cfg.criterion)
    crit = information_criteria(vine)
    return vine, crit, time.perf_counter() - start


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def cmd_prepare(cfg: RunConfig, args) -> int:
    """Load the input and write it on the u and z scales."""
    u, z = _resolve_data(cfg)
    _write_atomic(_out(cfg) / "u.csv", _dataset_csv(u))
    _write_atomic(_out(cfg) / "z.csv", _dataset_csv(z))
    _save_resolved(cfg, "prepare")
    print(f"prepared {u.n} x {u.d} -> {_out(cfg)/'u.csv'}, {_out(cfg)/'z.csv'}")
    return 0


def cmd_order(cfg: RunConfig, args) -> int:
    """Run the penalized-regression variable ordering and save it."""
    _, z = _resolve_data(cfg)
    result = lasso_ordering(z, cfg.k_folds, stage_seed(cfg.seed, "select"),
                            cfg.cv_rule, cfg.workers)
    doc = {"eta": list(result.eta),
           "occurrence_counts": list(result.occurrence_counts),
           "cv_lambdas": list(result.lambdas),
           "seed": result.rng_seed}
    _write_atomic(_out(cfg) / "ordering.json", json.dumps(doc, indent=2) + "\n")
    _save_resolved(cfg, "order")
    print(f"ordering eta = {list(result.eta)}")
    return 0


def cmd_select(cfg: RunConfig, args) -> int:
    """Select the structure matrix and its penalty matrix; save the artifact."""
    _, z = _resolve_data(cfg)
    result = select_structure(z, cfg.k_folds, stage_seed(cfg.seed, "select"),
                              cfg.cv_rule, cfg.workers)
    _write_atomic(_out(cfg) / "structure.json", result.to_json() + "\n")
    _save_resolved(cfg, "select")
    print(f"structure for d={result.matrix.d} written to "
          f"{_out(cfg)/'structure.json'} ({len(result.pcf_events)} re-solves)")
    return 0


def _column_path_rows(structure: StructureResult):
    """Step-function data: per column, active cells as the threshold falls."""
    lam = structure.lambda_matrix
    d = structure.matrix.d
    rows = []
    for c in range(d - 1):
        col = lam[c + 1:, c]
        always = int(np.isinf(col).sum())
        rows.append((c + 1, "inf", always))
        finite = sorted((v for v in col if np.isfinite(v)), reverse=True)
        active = always
        for v in finite:
            active += 1
            rows.append((c + 1, repr(float(v)), active))
    return rows


def cmd_sweep(cfg: RunConfig, args) -> int:
    """Fit one model per threshold grid point; tabulate criteria."""
    if not cfg.grid:
        raise ContractError("sweep requested but both threshold grids are empty")
    u, _ = _resolve_data(cfg)
    structure = _load_structure(cfg)
    out = _out(cfg)

    def run_point(spec):
        try:
            vine, crit, seconds = _fit_point(u, structure, spec, cfg)
            return spec, vine, crit, seconds, None
        except SparseVineError as exc:
            return spec, None, None, 0.0, str(exc)

    results = _pool_map(run_point, cfg.grid, cfg.workers)
    rows, errors = [], []
    for spec, vine, crit, seconds, err in results:
        tag = _spec_tag(spec)
        if err is not None:
            rows.append((spec.mode, repr(spec.value), "", "", "", "", "", "", "error"))
            errors.append({"point": tag, "error": err})
            continue
        model_path = out / "models" / f"model_{tag}.json"
        _write_atomic(model_path, vine.to_json() + "\n")
        rows.append((spec.mode, repr(spec.value), vine.n_params,
                     repr(vine.loglik), repr(crit.aic), repr(crit.bic),
                     repr(crit.mbic), f"{seconds:.3f}", "ok"))
    _write_csv(out / "sweep.csv",
               ("mode", "value", "p", "loglik", "aic", "bic", "mbic",
                "seconds", "status"),
               rows)
    _write_csv(out / "column_paths.csv", ("column", "threshold", "active"),
               _column_path_rows(structure))
    if errors:
        _write_atomic(out / "sweep_errors.json", json.dumps(errors, indent=2) + "\n")
    _save_resolved(cfg, "sweep")
    ok = sum(1 for r in rows if r[-1] == "ok")
    print(f"swept {len(rows)} grid points ({ok} ok) -> {out/'sweep.csv'}")
    return 0 if ok else 3


def cmd_fit(cfg: RunConfig, args) -> int:
    """Fit a single thresholded model and save it with its criteria."""
    if args.lambda_t is not None:
        spec = ThresholdSpec("single", args.lambda_t)
    elif args.mu is not None:
        spec = ThresholdSpec("adaptive", args.mu)
    else:
        raise ContractError("fit needs --lambda-t or --mu")
    u, _ = _resolve_data(cfg)
    structure = _load_structure(cfg)
    vine, crit, seconds = _fit_point(u, structure, spec, cfg)
    out = _out(cfg)
    _write_atomic(out / "model.json", vine.to_json() + "\n")
    meta = {"mode": spec.mode, "value": spec.value, "p": vine.n_params,
            "loglik": vine.loglik, "aic": crit.aic, "bic": crit.bic,
            "mbic": crit.mbic}
    _write_atomic(out / "model_meta.json", json.dumps(meta, indent=2) + "\n")
    _save_resolved(cfg, "fit")
    print(f"p={vine.n_params} loglik={vine.loglik:.3f} aic={crit.aic:.3f} "
          f"bic={crit.bic:.3f} mbic={crit.mbic:.3f} -> {out/'model.json'}")
    return 0


def cmd_simulate(cfg: RunConfig, args) -> int:
    """Draw samples from a saved model."""
    model_path = Path(args.model) if args.model else _out(cfg) / "model.json"
    if not model_path.exists():
        raise DataError(f"no model file at {model_path}")
    vine = FittedVine.from_json(model_path.read_text(encoding="utf-8"))
    sample = simulate(vine, cfg.n_samples, stage_seed(cfg.seed, "simulate"),
                      cfg.workers)
    _write_atomic(_out(cfg) / "simulated.csv", _dataset_csv(sample))
    _save_resolved(cfg, "simulate")
    print(f"simulated {sample.n} x {sample.d} -> {_out(cfg)/'simulated.csv'}")
    return 0


def cmd_compare(cfg: RunConfig, args) -> int:
    """Threshold sweep vs. greedy-baseline truncation ladder vs. Gaussian fit.

    The Gaussian comparator reuses the sweep's structure and thresholds
    with the family set forced to the Gaussian copula only. Rows that fail
    are recorded and the remaining methods still report.
    """
    if not cfg.grid:
        raise ContractError("compare needs a nonempty threshold grid")
    u, z = _resolve_data(cfg)
    out = _out(cfg)
    path = out / "structure.json"
    if path.exists():
        structure = StructureResult.from_json(path.read_text(encoding="utf-8"))
    else:
        structure = select_structure(z, cfg.k_folds,
                                     stage_seed(cfg.seed, "select"),
                                     cfg.cv_rule, cfg.workers)
        _write_atomic(path, structure.to_json() + "\n")

    tasks = ([("lasso", _spec_tag(spec), spec, cfg.families) for spec in cfg.grid]
             + [("gaussian_sem", _spec_tag(spec), spec, ("gaussian",))
                for spec in cfg.grid]
             + [("dissmann", f"truncation_{k}", int(k), None)
                for k in cfg.truncations]
             + [("dissmann", "full", None, None)])

    def run(task):
        method, knob, point, families = task
        start = time.perf_counter()
        try:
            if method == "dissmann":
                dcfg = DissmannConfig(cfg.families, cfg.alpha, cfg.criterion,
                                      truncation=point)
                vine = fit_dissmann(u, dcfg)
                crit = information_criteria(vine)
            else:
                vine, crit, _ = _fit_point(u, structure, point, cfg, families)
            return (method, knob, vine.n_params, vine.loglik, crit.aic,
                    crit.bic, crit.mbic, time.perf_counter() - start, None)
        except SparseVineError as exc:
            return (method, knob, None, None, None, None, None,
                    time.perf_counter() - start, str(exc))

    results = _pool_map(run, tasks, cfg.workers)
    csv_rows, records, errors = [], [], []
    for method, knob, p, ll, aic, bic, mbic, seconds, err in results:
        if err is not None:
            errors.append({"method": method, "knob": knob, "error": err})
            csv_rows.append((method, knob, "", "", "", "", "", f"{seconds:.3f}"))
            continue
        csv_rows.append((method, knob, p, repr(ll), repr(aic), repr(bic),
                         repr(mbic), f"{seconds:.3f}"))
        records.append({"method": method, "knob": knob, "p": p, "loglik": ll,
                        "aic": aic, "bic": bic, "mbic": mbic})
    _write_csv(out / "compare.csv",
               ("method", "knob", "p", "loglik", "aic", "bic", "mbic", "seconds"),
               csv_rows)
    # The JSON report carries no timings, so identical inputs and seeds
    # produce identical bytes.
    best = {}
    for rec in records:
        cur = best.get(rec["method"])
        if cur is None or rec["mbic"] < cur["mbic"]:
            best[rec["method"]] = rec
    report = {"rows": records, "best_mbic": best, "errors": errors}
    _write_atomic(out / "compare.json", json.dumps(report, indent=2) + "\n")
    _save_resolved(cfg, "compare")
    print(f"compared {len(records)} fits ({len(errors)} failures) -> "
          f"{out/'compare.csv'}")
    return 0 if records else 3


def cmd_report(cfg: RunConfig, args) -> int:
    """Summarize the artifacts in the output directory."""
    out = _out(cfg)
    report, lines = {}, []
    spath = out / "structure.json"
    if spath.exists():
        structure = StructureResult.from_json(spath.read_text(encoding="utf-8"))
        _write_csv(out / "column_paths.csv", ("column", "threshold", "active"),
                   _column_path_rows(structure))
        report["structure"] = {"d": structure.matrix.d,
                               "eta": list(structure.ordering.eta),
                               "pcf_events": len(structure.pcf_events)}
        lines.append(f"structure: d={structure.matrix.d}, "
                     f"eta={list(structure.ordering.eta)}, "
                     f"{len(structure.pcf_events)} proximity re-solves")
    sweep_path = out / "sweep.csv"
    if sweep_path.exists():
        with open(sweep_path, newline="", encoding="utf-8") as fh:
            sweep_rows = [r for r in csv.DictReader(fh) if r["status"] == "ok"]
        for r in sweep_rows:
            for key in ("p",):
                r[key] = int(r[key])
            for key in ("loglik", "aic", "bic", "mbic"):
                r[key] = float(r[key])
        if sweep_rows:
            report["sweep_best"] = {
                crit: min(({k: r[k] for k in ("mode", "value", "p", "loglik",
                                              "aic", "bic", "mbic")}
                           for r in sweep_rows), key=lambda r: r[crit])
                for crit in ("aic", "bic", "mbic")}
            b = report["sweep_best"]["mbic"]
            lines.append(f"sweep: best mBIC {b['mbic']:.3f} at "
                         f"{b['mode']}={b['value']} (p={b['p']})")
    cpath = out / "compare.json"
    if cpath.exists():
        comparison = json.loads(cpath.read_text(encoding="utf-8"))
        report["comparison_best"] = comparison.get("best_mbic", {})
        for method, rec in sorted(report["comparison_best"].items()):
            lines.append(f"compare: {method} best mBIC {rec['mbic']:.3f} "
                         f"(knob {rec['knob']}, p={rec['p']})")
    if not report:
        raise DataError(f"no artifacts found under {out}")
    _write_atomic(out / "report.json", json.dumps(report, indent=2) + "\n")
    _write_atomic(out / "report.txt", "\n".join(lines) + "\n")
    for line in lines:
        print(line)
    return 0


# ---------------------------------------------------------------------------
# Argument parsing and dispatch
# ---------------------------------------------------------------------------

class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _float_list(text: str):
    return tuple(float(v) for v in text.split(",") if v)


def _int_list(text: str):
    return tuple(int(v) for v in text.split(",") if v)


def _build_parser() -> _Parser:
    parser = _Parser(prog="sparsevine",
                     description="Sparse vine copula model pipeline.")
    sub = parser.add_subparsers(dest="command", required=True)
    common = _Parser(add_help=False)
    common.add_argument("--config", help="JSON config file")
    common.add_argument("--input", help="input CSV file")
    common.add_argument("--scale", choices=("x", "u", "z"),
                        help="scale of the input data (default x = raw)")
    common.add_argument("--seed", type=int, help="master seed")
    common.add_argument("--k-folds", type=int, dest="k_folds")
    common.add_argument("--cv-rule", choices=("min", "1se"), dest="cv_rule")
    common.add_argument("--lambda-grid", type=_float_list, dest="lambda_grid",
                        help="comma-separated single thresholds")
    common.add_argument("--mu-grid", type=_float_list, dest="mu_grid",
                        help="comma-separated adaptive proportions")
    common.add_argument("--families", type=lambda s: tuple(s.split(",")),
                        help="comma-separated candidate families")
    common.add_argument("--alpha", type=float,
                        help="independence test level (0 disables)")
    common.add_argument("--criterion", choices=("aic", "bic"))
    common.add_argument("--truncations", type=_int_list,
                        help="comma-separated baseline truncation levels")
    common.add_argument("--out-dir", dest="out_dir")
    common.add_argument("--workers", type=int)
    common.add_argument("--n-samples", type=int, dest="n_samples")

    for name, fn, desc in (
            ("prepare", cmd_prepare, "write the input on the u and z scales"),
            ("order", cmd_order, "compute the variable ordering"),
            ("select", cmd_select, "select structure + penalty matrices"),
            ("sweep", cmd_sweep, "fit a model per threshold grid point"),
            ("simulate", cmd_simulate, "sample from a saved model"),
            ("compare", cmd_compare, "sweep vs. greedy baseline vs. Gaussian"),
            ("report", cmd_report, "summarize artifacts in the output dir")):
        p = sub.add_parser(name, parents=[common], help=desc)
        p.set_defaults(handler=fn)
    pfit = sub.add_parser("fit", parents=[common],
                          help="fit one thresholded model")
    pfit.add_argument("--lambda-t", type=float, dest="lambda_t",
                      help="single threshold value")
    pfit.add_argument("--mu", type=float, help="adaptive proportion")
    pfit.set_defaults(handler=cmd_fit, lambda_t=None, mu=None)
    psim = sub.choices["simulate"]
    psim.add_argument("--model", help="fitted model JSON (default <out>/model.json)")
    psim.set_defaults(model=None)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        overrides = {key: getattr(args, key) for key in _CONFIG_KEYS
                     if hasattr(args, key)}
        cfg = load_config(args.config, overrides)
        return args.handler(cfg, args)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except NumericError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 3
    except (DataError, StructureError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2
    except SparseVineError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
