"""Command-line front end.

Exit codes: 0 success, 1 a checked property was violated, 2 usage or
configuration error. Randomised subcommands require ``--seed``.
"""
from __future__ import annotations

import argparse
import csv
import json
import sys
from collections import OrderedDict
from pathlib import Path

import numpy as np

from . import bounds, readout, separation, tasks
from .reservoir import Nonlinearity, ReservoirConfig, pad_inputs, read_series_csv, run, write_trajectory_csv

DEFAULTS = {
    "N": 10,
    "alpha": 0.5,
    "beta": 0.5,
    "nonlinearity": "tanh",
    "gain": 1.0,
    "feedback": "delayed",
    "method": "ridge",
    "lambda": 1e-6,
    "delta": 1e-3,
    "washout": 0,
    "seed": None,
}

# C_d values at or below this are reported as coincident class centers
ZERO_DISTANCE = 1e-12


class UsageError(Exception):
    pass


def _settings(args) -> dict:
    settings = dict(DEFAULTS)
    if args.config:
        try:
            loaded = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from None
        if not isinstance(loaded, dict):
            raise UsageError("config file must hold a JSON object")
        unknown = set(loaded) - set(DEFAULTS)
        if unknown:
            raise UsageError(f"unknown config keys: {', '.join(sorted(unknown))}")
        settings.update(loaded)
    for key in DEFAULTS:
        value = getattr(args, key.replace("lambda", "lam"), None)
        if value is not None:
            settings[key] = value
    return settings


def _reservoir(settings: dict) -> ReservoirConfig:
    try:
        kind = settings["nonlinearity"]
        f = Nonlinearity(kind, settings["gain"] if kind == "scaled_tanh" else 1.0)
        return ReservoirConfig(settings["N"], settings["alpha"], settings["beta"], f, settings["feedback"])
    except (ValueError, TypeError) as exc:
        raise UsageError(f"invalid reservoir configuration: {exc}") from None


def _train_spec(settings: dict) -> tasks.TrainSpec:
    return tasks.TrainSpec(
        method=settings["method"],
        lam=settings["lambda"],
        delta=settings["delta"],
        washout=settings["washout"],
        seed=settings["seed"] if settings["seed"] is not None else 0,
    )


def _require_seed(settings: dict) -> int:
    if settings["seed"] is None:
        raise UsageError("this subcommand is randomised; pass --seed")
    return int(settings["seed"])


def _emit(report: dict, path: str | None) -> None:
    text = json.dumps(report, indent=2)
    if path:
        Path(path).write_text(text + "\n")
    else:
        print(text)


def _config_dict(config: ReservoirConfig) -> dict:
    f = config.nonlinearity
    return {
        "N": config.N,
        "alpha": config.alpha,
        "beta": config.beta,
        "nonlinearity": f.kind,
        "gain": f.gain,
        "feedback": config.feedback.value,
    }


def read_labeled_csv(path: str | Path) -> tuple[list[str], list[str], np.ndarray]:
    """Read a long-format labeled CSV with columns ``id,label,u``.

    Rows of one id are taken in file order as u(1), u(2), ...; series are
    zero-padded to a common length. Returns (ids, labels, padded inputs).
    """
    series: OrderedDict[str, list[float]] = OrderedDict()
    labels: dict[str, str] = {}
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or not {"id", "label", "u"} <= set(reader.fieldnames):
            raise ValueError(f"{path}: expected columns id,label,u")
        for lineno, row in enumerate(reader, start=2):
            sid, label = row["id"], (row["label"] or "").strip()
            if not label:
                raise ValueError(f"{path}:{lineno}: empty class label")
            if labels.setdefault(sid, label) != label:
                raise ValueError(f"{path}:{lineno}: series {sid!r} changes label")
            try:
                series.setdefault(sid, []).append(float(row["u"]))
            except (TypeError, ValueError):
                raise ValueError(f"{path}:{lineno}: bad value {row['u']!r}") from None
    if not series:
        raise ValueError(f"{path}: no series")
    ids = list(series)
    return ids, [labels[i] for i in ids], pad_inputs([series[i] for i in ids])


def write_labeled_csv(path: str | Path, inputs, labels) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["id", "label", "u"])
        for i, (u, label) in enumerate(zip(inputs, labels)):
            for value in u:
                writer.writerow([i, label, repr(float(value))])


def _read_dataset(path: str) -> tuple[np.ndarray, np.ndarray]:
    return read_series_csv(path, "u"), read_series_csv(path, "y")


def cmd_simulate(args, settings) -> int:
    config = _reservoir(settings)
    u = read_series_csv(args.input)
    traj = run(config, u)
    if args.output:
        write_trajectory_csv(args.output, traj)
    else:
        write_trajectory_csv(sys.stdout, traj)
    return 0


def cmd_train(args, settings) -> int:
    config = _reservoir(settings)
    u, y = _read_dataset(args.data)
    report = tasks.run_benchmark(config, tasks.RegressionTask(u, y), _train_spec(settings))
    weights = report.pop("weights")
    if args.weights_out:
        readout.write_weights_csv(args.weights_out, weights)
    keys = ("method", "lambda_or_delta", "nrmse_train", "nrmse_test", "weight_norm")
    _emit({k: report[k] for k in keys}, args.report)
    return 0


def cmd_eval(args, settings) -> int:
    config = _reservoir(settings)
    u, y = _read_dataset(args.data)
    w = readout.read_weights_csv(args.weights)
    pred = readout.output(run(config, u), w)
    start = settings["washout"]
    if args.output:
        with open(args.output, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["t", "y"])
            for t, value in enumerate(pred, start=1):
                writer.writerow([t, repr(float(value))])
    _emit({"nrmse": readout.nrmse(pred[start:], y[start:]), "num_samples": int(len(y) - start)}, args.report)
    return 0


def _bound_inputs(args, settings):
    config = _reservoir(settings)
    rng = np.random.default_rng(_require_seed(settings))
    if args.weights:
        w = readout.read_weights_csv(args.weights)
        if len(w) != config.num_nodes:
            raise UsageError(f"weights file has {len(w)} entries, reservoir has {config.num_nodes} nodes")
    else:
        w = bounds.random_unit_weights(rng, config.num_nodes)
    U, V = bounds.random_pairs(rng, args.pairs, args.M)
    return config, w, (U, V)


def cmd_bound(args, settings) -> int:
    config = _reservoir(settings)
    if not bounds.contraction_valid(config.alpha, config.lipschitz):
        print("error: bound inapplicable: αL ≥ 1/√2", file=sys.stderr)
        return 2
    config, w, pairs = _bound_inputs(args, settings)
    report = bounds.bound_check(config, w, pairs)
    _emit({"config": _config_dict(config), "M": args.M, **report.to_dict()}, args.report)
    print(
        f"theoretical C = {report.theoretical_C:.6g}, max empirical ratio = {report.max_empirical_ratio:.6g}, "
        f"violations = {report.violations}",
        file=sys.stderr,
    )
    return 1 if report.violations else 0


def cmd_pointwise(args, settings) -> int:
    config, w, pairs = _bound_inputs(args, settings)
    stats = bounds.pointwise_ratio_probe(config, w, pairs, args.epsilon)
    _emit({"config": _config_dict(config), "M": args.M, "epsilon": args.epsilon, **stats.to_dict()}, args.report)
    return 0


def cmd_separation(args, settings) -> int:
    config = _reservoir(settings)
    _, labels, U = read_labeled_csv(args.data)
    rep = separation.separation_curve(config, U, labels)
    out = {"config": _config_dict(config), "num_series": len(labels), "num_classes": len(set(labels))}
    out.update(rep.to_dict())
    warnings = []
    if len(set(labels)) > 1 and np.all(rep.C_d[1:] <= ZERO_DISTANCE):
        warnings.append("C_d = 0 at every time step: class centers coincide")
    try:
        out["inverse_probe"] = separation.inverse_separation_probe(
            config, U, labels, epsilon=args.epsilon
        ).to_dict()
    except ValueError:
        out["inverse_probe"] = None
    out["warnings"] = warnings
    for msg in warnings:
        print(f"warning: {msg}", file=sys.stderr)
    if args.curve_csv:
        with open(args.curve_csv, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["t", "C_d", "C_v", "Sep"])
            for row in zip(out["t"], out["C_d"], out["C_v"], out["Sep"]):
                writer.writerow([row[0]] + [repr(v) for v in row[1:]])
    _emit(out, args.report)
    return 0


def cmd_narma(args, settings) -> int:
    config = _reservoir(settings)
    seed = _require_seed(settings)
    u, y = tasks.narma_generate(tasks.NarmaSpec(args.length, seed, args.order))
    if args.dataset_out:
        with open(args.dataset_out, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["u", "y"])
            for a, b in zip(u, y):
                writer.writerow([repr(float(a)), repr(float(b))])
    report = tasks.run_benchmark(config, tasks.RegressionTask(u, y), _train_spec(settings))
    report.pop("weights")
    _emit({"config": _config_dict(config), "seed": seed, "length": args.length, **report}, args.report)
    return 0


def cmd_classify(args, settings) -> int:
    config = _reservoir(settings)
    if args.data:
        _, labels, U = read_labeled_csv(args.data)
        task = tasks.ClassificationTask(U, np.asarray(labels))
    else:
        seed = _require_seed(settings)
        rng = np.random.default_rng(seed)
        templates = rng.uniform(-1.0, 1.0, size=(args.classes, args.length))
        task = tasks.synth_classes(tasks.SyntheticClassSpec(templates, args.samples, args.noise, seed))
    report = tasks.run_benchmark(config, task, _train_spec(settings))
    _emit({"config": _config_dict(config), **report}, args.report)
    return 0


def _read_matrix(path: str) -> np.ndarray:
    try:
        A = np.loadtxt(path, delimiter=",", ndmin=2)
    except ValueError as exc:
        raise ValueError(f"{path}: {exc}") from None
    return A


def cmd_dantzig(args, settings) -> int:
    A = _read_matrix(args.matrix)
    y = read_series_csv(args.y, "y")
    beta = readout.dantzig_selector(A, y, args.delta)
    _emit(
        {
            "delta": args.delta,
            "beta": beta.tolist(),
            "l1_norm": float(np.abs(beta).sum()),
            "constraint_max": readout.dantzig_constraint(A, y, beta),
        },
        args.report,
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("reservoir and training")
    g.add_argument("--config", help="JSON file with default settings; flags override it")
    g.add_argument("--N", type=int, help="delay length (nodes are 0..N)")
    g.add_argument("--alpha", type=float, help="feedback gain in (0, 1)")
    g.add_argument("--beta", type=float, help="input gain in (0, 1)")
    g.add_argument("--nonlinearity", choices=["tanh", "sine", "scaled_tanh"])
    g.add_argument("--gain", type=float, help="gain of scaled_tanh")
    g.add_argument("--feedback", choices=["delayed", "instantaneous"])
    g.add_argument("--method", choices=["ls", "ridge", "dantzig"])
    g.add_argument("--lambda", dest="lam", type=float, help="ridge penalty")
    g.add_argument("--delta", type=float, help="Dantzig selector tolerance")
    g.add_argument("--washout", type=int)
    g.add_argument("--seed", type=int)
    g.add_argument("--report", help="write the JSON report here instead of stdout")

    parser = argparse.ArgumentParser(prog="delayrc", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", parents=[common], help="write the state trajectory of one input")
    p.add_argument("--input", required=True, help="CSV with column u")
    p.add_argument("--output", help="trajectory CSV (default stdout)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("train", parents=[common], help="train a readout on a u,y dataset")
    p.add_argument("--data", required=True, help="CSV with columns u,y")
    p.add_argument("--weights-out")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", parents=[common], help="evaluate readout weights on a u,y dataset")
    p.add_argument("--data", required=True)
    p.add_argument("--weights", required=True, help="CSV with column w")
    p.add_argument("--output", help="write predictions y(t) here")
    p.set_defaults(func=cmd_eval)

    for name, func, helptext in (
        ("bound", cmd_bound, "check the input-to-output Lipschitz bound on random pairs"),
        ("pointwise-probe", cmd_pointwise, "measure per-time output/input difference ratios"),
    ):
        p = sub.add_parser(name, parents=[common], help=helptext)
        p.add_argument("--pairs", type=int, default=1000)
        p.add_argument("--M", type=int, default=64, help="input length")
        p.add_argument("--weights", help="CSV with column w (default: random unit vector)")
        if name == "pointwise-probe":
            p.add_argument("--epsilon", type=float, default=1e-6)
        p.set_defaults(func=func)

    p = sub.add_parser("separation", parents=[common], help="separation curve of a labeled input set")
    p.add_argument("--data", required=True, help="CSV with columns id,label,u")
    p.add_argument("--curve-csv", help="also write t,C_d,C_v,Sep here")
    p.add_argument("--epsilon", type=float, default=1.0, help="input gap for the inverse probe")
    p.set_defaults(func=cmd_separation)

    p = sub.add_parser("narma", parents=[common], help="NARMA benchmark")
    p.add_argument("--length", type=int, default=2000)
    p.add_argument("--order", type=int, default=10)
    p.add_argument("--dataset-out", help="write the generated u,y dataset here")
    p.set_defaults(func=cmd_narma)

    p = sub.add_parser("classify", parents=[common], help="classification benchmark")
    p.add_argument("--data", help="labeled CSV (default: synthetic templates)")
    p.add_argument("--classes", type=int, default=2)
    p.add_argument("--length", type=int, default=20)
    p.add_argument("--samples", type=int, default=10, help="samples per class")
    p.add_argument("--noise", type=float, default=0.1)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("dantzig", parents=[common], help="Dantzig selector on a CSV matrix")
    p.add_argument("--matrix", required=True, help="headerless numeric CSV, n rows by p columns")
    p.add_argument("--y", required=True, help="CSV with column y")
    p.set_defaults(func=cmd_dantzig)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        settings = _settings(args)
        if args.command == "dantzig":
            args.delta = settings["delta"]
        return args.func(args, settings)
    except (UsageError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
