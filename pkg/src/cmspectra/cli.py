"""Reproducible experiment runner.

Subcommands: spectrum | moments | prune | oracle | sweep | check-condition.
Configuration comes from a JSON file (--config) with flag overrides; flags
win.  All randomness flows from one master seed through named sub-streams.
Exit codes: 0 success, 2 validation error, 3 threshold failure with --assert.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .degseq import (DegreeSequence, condition_report, degree_moment_diagnostic,
                     load_degrees, make_regular, make_two_valued)
from .confmodel import adjacency_counts, sample_matching
from .laplacian import build_dense, build_operator
from .oracle import exact_stats, monte_carlo_moment
from .pruning import bound_check, prune
from .rng import derive_rng, derive_seed
from .spectra import (eigenvalues_dense, empirical_moment, esd_histogram,
                      ks_distance, semicircle, semicircle_moment,
                      stochastic_moment, wasserstein1_distance)


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    degree_spec: str = "regular"      # regular | two_valued | explicit
    n: int = 1000
    d: int = 10
    d1: int = 10
    d2: int = 100
    degrees_file: str = ""
    C: float = 4.0
    epsilon: float = 0.01
    k_list: list = field(default_factory=lambda: [1, 2, 3, 4])
    bins: int = 60
    range: list = field(default_factory=lambda: [-3.0, 3.0])
    samples: int = 1000
    probes: int = 200
    seed: int = 0
    subtract_rank1: bool = True
    mode: str = "dense"               # dense | operator
    dense_cap: int = 8192
    wasserstein: bool = False
    sweep_d: list = field(default_factory=list)
    sweep_n: list = field(default_factory=list)

    def validate(self):
        if self.degree_spec not in ("regular", "two_valued", "explicit"):
            raise ConfigError(f"degree_spec: unknown value {self.degree_spec!r}")
        if self.mode not in ("dense", "operator"):
            raise ConfigError(f"mode: must be dense or operator, got {self.mode!r}")
        if self.degree_spec == "explicit" and not self.degrees_file:
            raise ConfigError("degrees_file: required for degree_spec=explicit")
        if len(self.range) != 2 or not self.range[0] < self.range[1]:
            raise ConfigError("range: need [lo, hi] with lo < hi")
        if self.bins < 1:
            raise ConfigError("bins: must be >= 1")
        return self

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        known = {f for f in cls.__dataclass_fields__}
        bad = set(data) - known
        if bad:
            raise ConfigError(f"unknown config fields: {sorted(bad)}")
        return cls(**data).validate()

    def hash(self) -> str:
        return hashlib.sha256(self.to_json().encode()).hexdigest()[:12]


def load_config(path: str | None, overrides: dict) -> ExperimentConfig:
    data = {}
    if path:
        try:
            data = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"config file {path}: {exc}") from exc
    data.update({k: v for k, v in overrides.items() if v is not None})
    return ExperimentConfig.from_dict(data)


def build_degree_sequence(cfg: ExperimentConfig) -> DegreeSequence:
    if cfg.degree_spec == "regular":
        return make_regular(cfg.n, cfg.d)
    if cfg.degree_spec == "two_valued":
        return make_two_valued(cfg.n, cfg.d1, cfg.d2,
                               int(derive_seed(cfg.seed, "degrees").generate_state(1)[0]))
    return load_degrees(cfg.degrees_file)


def _sample_graph(cfg: ExperimentConfig, ds: DegreeSequence, index: int = 0):
    m = sample_matching(ds, derive_rng(cfg.seed, "matching", index))
    return adjacency_counts(m)


def _report_skeleton(cfg: ExperimentConfig) -> dict:
    return {
        "library_version": __version__,
        "config": asdict(cfg),
        "config_hash": cfg.hash(),
        "seed": cfg.seed,
        "timings": {},
    }


def _write_report(report: dict, out: Path, name: str = "report.json") -> Path:
    out.mkdir(parents=True, exist_ok=True)
    path = out / name
    path.write_text(json.dumps(report, indent=2, default=float) + "\n")
    return path


def cmd_spectrum(cfg: ExperimentConfig, out: Path, assert_thresholds: dict) -> int:
    t0 = time.time()
    ds = build_degree_sequence(cfg)
    adj = _sample_graph(cfg, ds)
    report = _report_skeleton(cfg)
    report["condition_report"] = asdict(condition_report(ds, cfg.C, cfg.epsilon))
    ref = semicircle()
    if cfg.mode == "dense":
        view = build_dense(ds, adj, cfg.subtract_rank1, cap=cfg.dense_cap)
        eigs = eigenvalues_dense(view)
        tag = cfg.hash()
        out.mkdir(parents=True, exist_ok=True)
        np.savetxt(out / f"eigenvalues_{tag}.txt", eigs)
        hist = esd_histogram(eigs, cfg.bins, tuple(cfg.range))
        hist.to_csv(out / f"histogram_{tag}.csv")
        moments = {int(k): empirical_moment(eigs, int(k)) for k in cfg.k_list}
        _moment_csv(out / f"moments_{tag}.csv", moments)
        report["ks_distance"] = ks_distance(eigs, ref)
        if cfg.wasserstein:
            report["wasserstein1"] = wasserstein1_distance(eigs, ref)
        report["moments"] = moments
        report["files"] = [f"eigenvalues_{tag}.txt", f"histogram_{tag}.csv",
                           f"moments_{tag}.csv"]
    else:
        view = build_operator(ds, adj, cfg.subtract_rank1)
        moments = {}
        for k in cfg.k_list:
            est, se = stochastic_moment(view, int(k), cfg.probes,
                                        derive_rng(cfg.seed, "probes", int(k)))
            moments[int(k)] = {"estimate": est, "std_error": se}
        report["moments"] = moments
        report["ks_distance"] = None
    report["timings"]["total_s"] = time.time() - t0
    _write_report(report, out)
    max_ks = assert_thresholds.get("max_ks")
    if max_ks is not None and report.get("ks_distance") is not None \
            and report["ks_distance"] > max_ks:
        print(f"ASSERT FAILED: ks {report['ks_distance']:.4f} > {max_ks}")
        return 3
    return 0


def _moment_csv(path: Path, moments: dict) -> None:
    rows = ["k,empirical,reference,abs_error"]
    for k, v in sorted(moments.items()):
        ref = semicircle_moment(k)
        rows.append(f"{k},{v},{ref},{abs(v - ref)}")
    path.write_text("\n".join(rows) + "\n")


def cmd_moments(cfg: ExperimentConfig, out: Path, assert_thresholds: dict) -> int:
    t0 = time.time()
    ds = build_degree_sequence(cfg)
    adj = _sample_graph(cfg, ds)
    report = _report_skeleton(cfg)
    table = []
    if cfg.mode == "dense":
        view = build_dense(ds, adj, cfg.subtract_rank1, cap=cfg.dense_cap)
        eigs = eigenvalues_dense(view)
        for k in cfg.k_list:
            emp = empirical_moment(eigs, int(k))
            table.append({"k": int(k), "empirical": emp,
                          "reference": semicircle_moment(int(k)),
                          "std_error": 0.0})
    else:
        view = build_operator(ds, adj, cfg.subtract_rank1)
        for k in cfg.k_list:
            est, se = stochastic_moment(view, int(k), cfg.probes,
                                        derive_rng(cfg.seed, "probes", int(k)))
            table.append({"k": int(k), "empirical": est,
                          "reference": semicircle_moment(int(k)),
                          "std_error": se})
    report["moment_table"] = table
    report["timings"]["total_s"] = time.time() - t0
    out.mkdir(parents=True, exist_ok=True)
    rows = ["k,empirical,reference,abs_error"]
    for row in table:
        rows.append(f"{row['k']},{row['empirical']},{row['reference']},"
                    f"{abs(row['empirical'] - row['reference'])}")
    (out / f"moments_{cfg.hash()}.csv").write_text("\n".join(rows) + "\n")
    _write_report(report, out)
    tol = assert_thresholds.get("max_abs_error")
    if tol is not None:
        for row in table:
            if abs(row["empirical"] - row["reference"]) > tol + 3 * row["std_error"]:
                print(f"ASSERT FAILED: k={row['k']} error "
                      f"{abs(row['empirical'] - row['reference']):.4f} > {tol}")
                return 3
    return 0


def cmd_prune(cfg: ExperimentConfig, out: Path, assert_thresholds: dict) -> int:
    t0 = time.time()
    ds = build_degree_sequence(cfg)
    outcome = prune(ds, cfg.C, derive_rng(cfg.seed, "prune"), epsilon=cfg.epsilon)
    vertices_ok, edges_ok = bound_check(outcome, ds, cfg.epsilon, cfg.C)
    report = _report_skeleton(cfg)
    report["prune_summary"] = outcome.summary()
    report["bounds"] = {"vertices_ok": vertices_ok, "edges_ok": edges_ok}
    report["timings"]["total_s"] = time.time() - t0
    out.mkdir(parents=True, exist_ok=True)
    outcome.trajectory_csv(out / f"trajectory_{cfg.hash()}.csv")
    _write_report(report, out)
    residual = outcome.residual_degrees
    dichotomy = bool(np.all((residual == 0) | (residual >= outcome.threshold)))
    if assert_thresholds.get("assert_flag") and not (dichotomy and vertices_ok
                                                     and edges_ok):
        print("ASSERT FAILED: prune postcondition or removal bounds")
        return 3
    return 0


def cmd_oracle(cfg: ExperimentConfig, out: Path, assert_thresholds: dict) -> int:
    t0 = time.time()
    ds = build_degree_sequence(cfg)
    stats = exact_stats(ds, max_k=max(int(k) for k in cfg.k_list))
    report = _report_skeleton(cfg)
    comparison = []
    ok = True
    for k in cfg.k_list:
        k = int(k)
        exact = stats.exact_moments[(cfg.subtract_rank1, k)]
        est, se = monte_carlo_moment(ds, k, cfg.samples,
                                     derive_rng(cfg.seed, "mc", k),
                                     subtract_rank1=cfg.subtract_rank1)
        within = abs(est - exact) <= 3 * se + 1e-12
        ok = ok and within
        comparison.append({"k": k, "exact": exact, "estimate": est,
                           "std_error": se, "within_3se": within})
    report["matching_count"] = stats.matching_count
    report["comparison"] = comparison
    report["timings"]["total_s"] = time.time() - t0
    out.mkdir(parents=True, exist_ok=True)
    stats.to_json(out / f"exact_stats_{cfg.hash()}.json")
    _write_report(report, out)
    if assert_thresholds.get("assert_flag") and not ok:
        print("ASSERT FAILED: Monte-Carlo outside 3 standard errors")
        return 3
    return 0


def cmd_sweep(cfg: ExperimentConfig, out: Path, assert_thresholds: dict) -> int:
    cells = []
    if cfg.sweep_d:
        cells = [("d", int(v)) for v in cfg.sweep_d]
    elif cfg.sweep_n:
        cells = [("n", int(v)) for v in cfg.sweep_n]
    if not cells:
        raise ConfigError("sweep: empty grid (set sweep_d or sweep_n)")
    rows = ["param,value,ks_distance,m2,m4"]
    report = _report_skeleton(cfg)
    cell_reports = []
    for idx, (param, value) in enumerate(cells):
        cell = ExperimentConfig(**{**asdict(cfg), param: value,
                                   "sweep_d": [], "sweep_n": []}).validate()
        ds = build_degree_sequence(cell)
        adj = adjacency_counts(sample_matching(
            ds, derive_rng(cfg.seed, "sweep", idx)))
        view = build_dense(ds, adj, cell.subtract_rank1, cap=cell.dense_cap)
        eigs = eigenvalues_dense(view)
        ks = ks_distance(eigs, semicircle())
        m2 = empirical_moment(eigs, 2)
        m4 = empirical_moment(eigs, 4)
        rows.append(f"{param},{value},{ks},{m2},{m4}")
        cell_reports.append({"param": param, "value": value, "ks_distance": ks,
                             "m2": m2, "m4": m4})
    out.mkdir(parents=True, exist_ok=True)
    (out / f"sweep_{cfg.hash()}.csv").write_text("\n".join(rows) + "\n")
    report["cells"] = cell_reports
    _write_report(report, out)
    return 0


def cmd_check_condition(cfg: ExperimentConfig, out: Path,
                        assert_thresholds: dict) -> int:
    ds = build_degree_sequence(cfg)
    rep = condition_report(ds, cfg.C, cfg.epsilon)
    report = _report_skeleton(cfg)
    report["condition_report"] = asdict(rep)
    report["degree_moment_diagnostics"] = {
        m: degree_moment_diagnostic(ds, m) for m in (1, 2, 3, 4)}
    _write_report(report, out)
    print(json.dumps(report["condition_report"], indent=2))
    if assert_thresholds.get("assert_flag") and not rep.epsilon_bound_holds:
        return 3
    return 0


COMMANDS = {
    "spectrum": cmd_spectrum,
    "moments": cmd_moments,
    "prune": cmd_prune,
    "oracle": cmd_oracle,
    "sweep": cmd_sweep,
    "check-condition": cmd_check_condition,
}


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON config file")
    p.add_argument("--out", default="cmspectra_out", help="output directory")
    p.add_argument("--assert", dest="assert_flag", action="store_true",
                   help="exit 3 when thresholds fail")
    p.add_argument("--max-ks", type=float, default=None)
    p.add_argument("--max-abs-error", type=float, default=None)
    for name, typ in [("degree-spec", str), ("n", int), ("d", int),
                      ("d1", int), ("d2", int), ("degrees-file", str),
                      ("C", float), ("epsilon", float), ("bins", int),
                      ("samples", int), ("probes", int), ("seed", int),
                      ("mode", str), ("dense-cap", int)]:
        p.add_argument(f"--{name}", type=typ, default=None)
    p.add_argument("--k-list", type=str, default=None,
                   help="comma-separated moment orders")
    p.add_argument("--range", type=str, default=None, help="lo,hi")
    p.add_argument("--sweep-d", type=str, default=None)
    p.add_argument("--sweep-n", type=str, default=None)
    p.add_argument("--no-subtract-rank1", action="store_true")
    p.add_argument("--wasserstein", action="store_true")


def _overrides(args: argparse.Namespace) -> dict:
    ov = {
        "degree_spec": args.degree_spec, "n": args.n, "d": args.d,
        "d1": args.d1, "d2": args.d2, "degrees_file": args.degrees_file,
        "C": args.C, "epsilon": args.epsilon, "bins": args.bins,
        "samples": args.samples, "probes": args.probes, "seed": args.seed,
        "mode": args.mode, "dense_cap": args.dense_cap,
    }
    if args.k_list is not None:
        ov["k_list"] = [int(v) for v in args.k_list.split(",")]
    if args.range is not None:
        ov["range"] = [float(v) for v in args.range.split(",")]
    if args.sweep_d is not None:
        ov["sweep_d"] = [int(v) for v in args.sweep_d.split(",")]
    if args.sweep_n is not None:
        ov["sweep_n"] = [int(v) for v in args.sweep_n.split(",")]
    if args.no_subtract_rank1:
        ov["subtract_rank1"] = False
    if args.wasserstein:
        ov["wasserstein"] = True
    return ov


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="cmspectra", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        _add_common(sub.add_parser(name))
    args = parser.parse_args(argv)
    thresholds = {"assert_flag": args.assert_flag, "max_ks": args.max_ks,
                  "max_abs_error": args.max_abs_error}
    if not args.assert_flag:
        thresholds = {k: None for k in thresholds} | {"assert_flag": False}
    try:
        cfg = load_config(args.config, _overrides(args))
        return COMMANDS[args.command](cfg, Path(args.out), thresholds)
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
