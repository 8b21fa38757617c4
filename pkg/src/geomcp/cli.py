"""Command-line interface: ``geomcp {detect,simulate,evaluate,crops,validate,bench}``.

Every CSV written is accompanied by a JSON file of the same stem. Exit codes:
0 success, 2 input error, 3 configuration error, 4 internal invariant violation.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys
from pathlib import Path

import numpy as np

from .costs import CostKind, CostModel
from .crops import crops, elbow_table, write_elbow_csv
from .errors import ConfigurationError, GeomCPError, InputError, InvariantError
from .evaluation import DEFAULT_TOLERANCE, summarize
from .experiments import benchmark, run_replications, scaling_slope, validation_grid
from .geometry import angle_map, distance_map, translate
from .io import load_csv, read_key_value_file, save_csv, scale_mad, write_json, write_rows
from .pelt import Penalty
from .pipeline import DetectionConfig, format_report, geomcp_detect, write_changepoint_csv
from .simulation import ScenarioSpec, generate

__all__ = ["build_parser", "main", "parse_penalty"]


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigurationError(f"{self.prog}: {message}")


def parse_penalty(text: str) -> Penalty:
    """``mbic`` or ``manual:<beta>``."""
    text = text.strip().lower()
    if text == "mbic":
        return Penalty.mbic()
    if text.startswith("manual:"):
        try:
            beta = float(text.split(":", 1)[1])
        except ValueError:
            raise ConfigurationError(f"bad manual penalty {text!r}") from None
        return Penalty.manual(beta)
    raise ConfigurationError(f"penalty must be 'mbic' or 'manual:<beta>', got {text!r}")


def _int_list(text: str) -> list[int]:
    try:
        values = [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise ConfigurationError(f"expected comma-separated integers, got {text!r}") from None
    if not values:
        raise ConfigurationError("empty list")
    return values


# Scenario keys accepted from --config files and their converters.
_SCENARIO_KEYS = {
    "n": int, "p": int, "theta": float, "phi": float, "kappa": float,
    "change_kind": str, "covariance": str, "m": int, "min_gap": int, "seed": int,
}
_DETECT_KEYS = {"xi": int, "minseglen": int, "cost": str, "penalty": str, "scale_mad": None}


def _detection_args(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("detection")
    g.add_argument("--cost", choices=[k.value for k in CostKind], default=None)
    g.add_argument("--penalty", default=None, help="mbic or manual:<beta>")
    g.add_argument("--xi", type=int, default=None, help="reconciliation threshold")
    g.add_argument("--minseglen", type=int, default=None)
    g.add_argument("--scale-mad", action="store_true", default=None, help="MAD-scale each series first")


def _scenario_args(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("scenario")
    g.add_argument("--config", type=Path, help="key = value scenario file; flags override it")
    g.add_argument("--n", type=int)
    g.add_argument("--p", type=int)
    g.add_argument("--theta", type=float)
    g.add_argument("--phi", type=float)
    g.add_argument("--kappa", type=float)
    g.add_argument("--change", dest="change_kind", choices=["mean", "variance", "meanvar"])
    g.add_argument("--covariance", choices=["independent", "block", "random"])
    g.add_argument("--m", type=int, help="number of changepoints")
    g.add_argument("--min-gap", type=int)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="geomcp", description="Changepoint detection for high-dimensional time series.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    d = sub.add_parser("detect", help="detect changepoints in a CSV file")
    d.add_argument("input", type=Path)
    d.add_argument("-o", "--output", type=Path, required=True, help="changepoint CSV")
    d.add_argument("--config", type=Path)
    _detection_args(d)

    s = sub.add_parser("simulate", help="write a simulated data set and its truth")
    s.add_argument("-o", "--output", type=Path, required=True, help="data CSV")
    s.add_argument("--seed", type=int)
    _scenario_args(s)

    e = sub.add_parser("evaluate", help="score detection over simulated replications")
    e.add_argument("-o", "--output", type=Path, required=True, help="per-replication CSV")
    e.add_argument("--seed", type=int)
    e.add_argument("--reps", type=int, default=100)
    e.add_argument("--threads", type=int, default=1)
    e.add_argument("--tolerance", type=int, default=DEFAULT_TOLERANCE)
    _scenario_args(e)
    _detection_args(e)

    c = sub.add_parser("crops", help="segmentations over a penalty range for both mapped series")
    c.add_argument("input", type=Path)
    c.add_argument("-o", "--output", type=Path, required=True, help="output stem")
    c.add_argument("--beta-min", type=float)
    c.add_argument("--beta-max", type=float)
    c.add_argument("--config", type=Path)
    _detection_args(c)

    v = sub.add_parser("validate", help="Monte-Carlo normality checks of the mapped statistics")
    v.add_argument("-o", "--output", type=Path, required=True)
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--reps", type=int, default=20000)
    v.add_argument("--p-grid", type=_int_list, default=[2, 10, 100, 2000])
    v.add_argument("--threads", type=int, default=1)

    b = sub.add_parser("bench", help="time detection over an (n, p) grid")
    b.add_argument("-o", "--output", type=Path, required=True)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--reps", type=int, default=3)
    b.add_argument("--n-grid", type=_int_list, default=[500])
    b.add_argument("--p-grid", type=_int_list, default=[100, 200, 400])
    b.add_argument("--threads", type=int, default=1)
    _detection_args(b)
    return parser


def _config_file(args) -> dict[str, str]:
    path = getattr(args, "config", None)
    return read_key_value_file(path) if path is not None else {}


def _convert(key: str, raw: str, kind):
    if kind is None:
        return raw.strip().lower() in ("1", "true", "yes", "on")
    try:
        return kind(raw)
    except ValueError:
        raise ConfigurationError(f"bad value for {key}: {raw!r}") from None


def _merged(args, file_cfg: dict[str, str], keys: dict) -> dict:
    out = {}
    aliases = {"change": "change_kind", "min-gap": "min_gap", "scale-mad": "scale_mad"}
    for raw_key, raw in file_cfg.items():
        key = aliases.get(raw_key, raw_key.replace("-", "_"))
        if key in keys:
            out[key] = _convert(key, raw, keys[key])
    for key in keys:
        value = getattr(args, key, None)
        if value is not None:
            out[key] = value
    return out


def _detection_config(args, file_cfg: dict[str, str], *, need_penalty: bool = True) -> DetectionConfig:
    opts = _merged(args, file_cfg, _DETECT_KEYS)
    model = CostModel(CostKind(opts.get("cost", "normal")))
    kwargs = {"model": model, "scale_first": bool(opts.get("scale_mad", False))}
    if "xi" in opts:
        kwargs["xi"] = opts["xi"]
    kwargs["minseglen"] = opts.get("minseglen", max(2, model.min_segment_length))
    if need_penalty and "penalty" in opts:
        kwargs["penalty"] = parse_penalty(opts["penalty"])
    return DetectionConfig(**kwargs)


def _scenario(args, file_cfg: dict[str, str]) -> ScenarioSpec:
    opts = _merged(args, file_cfg, _SCENARIO_KEYS)
    return ScenarioSpec(**opts)


def _json_path(path: Path) -> Path:
    return path.with_suffix(".json")


def _ensure_parent(path: Path) -> None:
    parent = path.parent
    if not parent.is_dir():
        raise ConfigurationError(f"output directory {parent} does not exist")


def cmd_detect(args) -> int:
    file_cfg = _config_file(args)
    cfg = _detection_config(args, file_cfg)
    _ensure_parent(args.output)
    y = load_csv(args.input)
    result = geomcp_detect(y, cfg)
    write_changepoint_csv(result, args.output)
    write_json(_json_path(args.output), {
        "input": str(args.input),
        "n": int(y.shape[0]),
        "p": int(y.shape[1]),
        "xi": cfg.xi,
        "cost": cfg.model.kind.value,
        "penalty": {"scheme": cfg.penalty.scheme.value,
                    "beta": result.distance_segmentation.beta},
        "distance_changepoints": list(result.distance_cpts),
        "angle_changepoints": list(result.angle_cpts),
        "changepoints": [{"index": t, "source": s} for t, s in result.sources()],
    })
    sys.stdout.write(format_report(result))
    return 0


def cmd_simulate(args) -> int:
    spec = _scenario(args, _config_file(args))
    _ensure_parent(args.output)
    y, plan = generate(spec)
    save_csv(y, args.output, header=[f"y{j + 1}" for j in range(spec.p)])
    truth = args.output.with_name(args.output.stem + ".truth.csv")
    write_rows(truth, ["changepoint", "changed_series"],
               [(t, int(mask.sum())) for t, mask in zip(plan.changepoints, plan.masks)])
    write_json(_json_path(truth), {
        "scenario": {k: (v.value if hasattr(v, "value") else v)
                     for k, v in dataclasses.asdict(spec).items()},
        "changepoints": list(plan.changepoints),
        "masks": [np.flatnonzero(mask).tolist() for mask in plan.masks],
        "mean_shift": spec.mean_shift,
        "sd_ratio": spec.sd_ratio,
    })
    print(f"wrote {args.output} ({spec.n} x {spec.p}) and {truth}")
    return 0


def cmd_evaluate(args) -> int:
    file_cfg = _config_file(args)
    spec = _scenario(args, file_cfg)
    cfg = _detection_config(args, file_cfg)
    _ensure_parent(args.output)
    results = run_replications(spec, args.reps, cfg, args.tolerance, args.threads)
    rows = [(r.rep, len(r.truth), len(r.estimate), r.report.correct_count, r.report.false_count,
             r.report.tdr, r.report.fdr, " ".join(map(str, r.estimate))) for r in results]
    write_rows(args.output, ["rep", "true", "estimated", "correct", "false", "tdr", "fdr", "changepoints"], rows)
    summary = summarize([r.report for r in results])
    write_rows(
        args.output.with_name(args.output.stem + ".summary.csv"),
        ["scenario", "n", "p", "theta", "phi", "kappa", "reps", "tdr", "fdr",
         "tdr_halfwidth", "fdr_halfwidth", "fpr"],
        [(f"{spec.change_kind.value}/{spec.covariance.value}", spec.n, spec.p, spec.theta, spec.phi,
          spec.kappa, summary.reps, summary.tdr, summary.fdr, summary.tdr_halfwidth,
          summary.fdr_halfwidth, summary.fpr)],
    )
    write_json(_json_path(args.output), {
        "scenario": {k: (v.value if hasattr(v, "value") else v)
                     for k, v in dataclasses.asdict(spec).items()},
        "tolerance": args.tolerance,
        "summary": dataclasses.asdict(summary),
    })
    print(f"reps={summary.reps} TDR={summary.tdr:.3f} (+/-{summary.tdr_halfwidth:.3f}) "
          f"FDR={summary.fdr:.3f} (+/-{summary.fdr_halfwidth:.3f}) FPR={summary.fpr:.3f}")
    return 0


def cmd_crops(args) -> int:
    file_cfg = _config_file(args)
    cfg = _detection_config(args, file_cfg, need_penalty=False)
    penalty_text = args.penalty or file_cfg.get("penalty")
    if penalty_text is not None and parse_penalty(penalty_text).scheme.value == "mbic":
        raise ConfigurationError("crops takes a penalty range (--beta-min/--beta-max), not MBIC")
    _ensure_parent(args.output)
    y = load_csv(args.input)
    if cfg.scale_first:
        y = scale_mad(y)
    shifted = translate(y)
    payload = {"input": str(args.input), "cost": cfg.model.kind.value}
    for mapped in (distance_map(shifted), angle_map(shifted)):
        result = crops(mapped.values, cfg.model, args.beta_min, args.beta_max, cfg.minseglen)
        rows = elbow_table(result)
        out = args.output.with_name(f"{args.output.name}.{mapped.kind.value}.csv")
        write_elbow_csv(rows, out)
        payload[mapped.kind.value] = {
            "beta_min": result.beta_min,
            "beta_max": result.beta_max,
            "segmentations": [
                {"m": e.m, "cost": e.cost, "beta_lo": e.beta_lo, "beta_hi": e.beta_hi,
                 "elbow": r.elbow, "changepoints": list(e.segmentation.changepoints)}
                for e, r in zip(result.entries, rows)
            ],
        }
        elbow = next((r.m for r in rows if r.elbow), None)
        print(f"{mapped.kind.value}: {len(rows)} segmentations, elbow at m={elbow}")
    write_json(args.output.with_name(args.output.name + ".json"), payload)
    return 0


def cmd_validate(args) -> int:
    _ensure_parent(args.output)
    rows = validation_grid(args.p_grid, args.reps, args.seed, threads=args.threads)
    fields = [f.name for f in dataclasses.fields(rows[0])]
    write_rows(args.output, fields, [dataclasses.astuple(r) for r in rows])
    write_json(_json_path(args.output), {"seed": args.seed, "rows": [dataclasses.asdict(r) for r in rows]})
    for r in rows:
        print(f"{r.statistic:>22s} p={r.p:<6d} skew={r.skewness:+.3f} KS p={r.ks_p_value:.3g}")
    return 0


def cmd_bench(args) -> int:
    cfg = _detection_config(args, {})
    _ensure_parent(args.output)
    rows = benchmark(args.n_grid, args.p_grid, args.reps, args.seed, cfg, args.threads)
    fields = [f.name for f in dataclasses.fields(rows[0])]
    write_rows(args.output, fields, [dataclasses.astuple(r) for r in rows])
    payload = {"rows": [dataclasses.asdict(r) for r in rows], "slopes": {}}
    for n in args.n_grid:
        cell = [r for r in rows if r.n == n]
        if len(cell) >= 2:
            payload["slopes"][str(n)] = scaling_slope(cell)
    write_json(_json_path(args.output), payload)
    for r in rows:
        print(f"n={r.n:<6d} p={r.p:<6d} median {r.median_seconds * 1e3:9.2f} ms")
    for n, slope in payload["slopes"].items():
        print(f"n={n}: log-time vs log-p slope {slope:.2f}")
    return 0


_COMMANDS = {
    "detect": cmd_detect,
    "simulate": cmd_simulate,
    "evaluate": cmd_evaluate,
    "crops": cmd_crops,
    "validate": cmd_validate,
    "bench": cmd_bench,
}

_LABELS = {2: "input", 3: "configuration", 4: "invariant"}


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return _COMMANDS[args.command](args)
    except GeomCPError as exc:
        err = exc
    except OSError as exc:
        err = InputError(str(exc))
    except (ValueError, TypeError) as exc:
        # stray validation errors from numpy or dataclasses count as bad configuration
        err = ConfigurationError(str(exc))
    except (ArithmeticError, AssertionError, RuntimeError) as exc:
        err = InvariantError(str(exc))
    code = err.exit_code
    print(f"geomcp: error[{_LABELS.get(code, 'error')}]: {err}", file=sys.stderr)
    return code

if __name__ == "__main__":
    raise SystemExit(main())
