"""Command-line entry point: ``conxsense <command> ...``."""
from __future__ import annotations

import argparse
import json
import sys
import warnings
from pathlib import Path

from . import __version__
from .classifier import model_from_dict, train
from .config import load_config
from .errors import ConXsenseError
from .evaluation import cross_validate, roc_csv
from .features import TASKS, build_dataset, dataset_from_csv, dataset_to_csv
from .pipeline import build_profile, run_pipeline
from .policy import (ClassificationEvent, LockState, always_deny_classifier, default_policy, decide_access,
                     load_policy, model_classifier, oracle_classifier, replay_enforcement)
from .synth import SCENARIOS, events_from_jsonl, events_to_jsonl, generate_scenario
from .trace import read_trace, write_trace

MODEL_CHOICES = ("rf", "knn", "nb", "random_forest", "naive_bayes")


def _emit(obj, out: str | None) -> None:
    text = json.dumps(obj, indent=2, sort_keys=True) + "\n"
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8")


def _emit_text(text: str, out: str | None) -> None:
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8")


def _config(args):
    cfg = load_config(getattr(args, "config", None))
    model = getattr(args, "model", None)
    if model and model in MODEL_CHOICES:
        cfg = cfg.with_model(kind=model)
    seed = getattr(args, "model_seed", None)
    if seed is not None:
        cfg = cfg.with_model(seed=seed)
    return cfg


def _tasks(args) -> tuple[str, ...]:
    return TASKS if args.task == "all" else (args.task,)


def _load_json_arg(value: str):
    """Inline JSON, or ``@path`` to read it from a file."""
    if value.startswith("@"):
        return json.loads(Path(value[1:]).read_text(encoding="utf-8"))
    return json.loads(value)


def _policy(path):
    return load_policy(default_policy() if path is None else json.loads(Path(path).read_text(encoding="utf-8")))


# ---- commands -----------------------------------------------------------------

def cmd_generate(args) -> int:
    cfg = SCENARIOS[args.scenario](days=args.days, seed=args.seed)
    sc = generate_scenario(cfg, with_events=args.events_out is not None)
    write_trace(sc.trace, args.output)
    if args.events_out:
        Path(args.events_out).write_text(events_to_jsonl(sc.events, sc.truth), encoding="utf-8")
    print(f"wrote {len(sc.trace)} records to {args.output}", file=sys.stderr)
    return 0


def cmd_profile(args) -> int:
    trace = read_trace(args.trace)
    prof = build_profile(trace, _config(args))
    if args.dump_staypoints:
        _emit({"gps": [s.to_dict() for s in prof.gps_staypoints],
               "wifi": [s.to_dict() for s in prof.wifi_staypoints]}, args.dump_staypoints)
    if args.dump_cois:
        _emit([c.to_dict() for c in prof.cois], args.dump_cois)
    _emit(prof.profiles_dict(), args.output)
    return 0


def cmd_features(args) -> int:
    trace = read_trace(args.trace)
    prof = build_profile(trace, _config(args))
    rows = []
    for task in _tasks(args):
        rows.extend(build_dataset(trace, prof.extractor, task))
    _emit_text(dataset_to_csv(rows), args.output)
    return 0


def _dataset(args, cfg, task):
    if args.features:
        rows = dataset_from_csv(Path(args.features).read_text(encoding="utf-8"))
        return [r for r in rows if r.task == task]
    trace = read_trace(args.trace)
    return build_dataset(trace, build_profile(trace, cfg).extractor, task)


def cmd_train(args) -> int:
    cfg = _config(args)
    models = {task: train(cfg.model, _dataset(args, cfg, task)).to_dict() for task in _tasks(args)}
    _emit(models if args.task == "all" else models[args.task], args.output)
    return 0


def cmd_eval(args) -> int:
    cfg = _config(args)
    out = Path(args.output)
    out.mkdir(parents=True, exist_ok=True)
    summary = {}
    tasks = _tasks(args)
    for task in tasks:
        ev = cross_validate(cfg.model, _dataset(args, cfg, task), args.folds or cfg.folds)
        name = "roc.csv" if len(tasks) == 1 else f"roc_{task}.csv"
        (out / name).write_text(roc_csv(ev), encoding="utf-8")
        summary[task] = ev.summary()
    _emit(summary, str(out / "summary.json"))
    for task, s in summary.items():
        ops = ", ".join(f"TPR {op['tpr']:.3f} @ FPR<={op['target_fpr']}" for op in s["operating_points"])
        print(f"{task}: AUC {s['auc']:.4f}; {ops}", file=sys.stderr)
    return 0


def cmd_run(args) -> int:
    cfg = _config(args)
    result = run_pipeline(read_trace(args.trace), cfg, args.output)
    for task, s in result.summary().items():
        print(f"{task}: AUC {s['auc']:.4f} ({s['model']}, n={s['n']})", file=sys.stderr)
    return 0


def cmd_simulate(args) -> int:
    rules, thresholds = _policy(args.policy)
    if args.events:
        events, truth = events_from_jsonl(Path(args.events).read_text(encoding="utf-8").splitlines())
        trace = read_trace(args.trace) if args.trace else None
    else:
        sc = generate_scenario(SCENARIOS[args.scenario](days=args.days, seed=args.seed))
        events, truth, trace = sc.events, sc.truth, sc.trace
    if args.model == "oracle":
        classifier = oracle_classifier(truth)
    elif args.model == "always_deny":
        classifier = always_deny_classifier()
    else:
        if trace is None:
            raise ConXsenseError("--trace is required with a trained model")
        cfg = _config(args)
        prof = build_profile(trace, cfg)
        models = {task: train(cfg.model, build_dataset(trace, prof.extractor, task)) for task in TASKS}
        classifier = model_classifier(models, prof.extractor)
    report = replay_enforcement(events, classifier, rules, thresholds, truth, cadence=args.cadence)
    _emit(report.to_dict(include_latency=not args.no_latency), args.output)
    return 0


def cmd_decide(args) -> int:
    rules, thresholds = _policy(args.policy)
    raw = _load_json_arg(args.event) if args.event else []
    if isinstance(raw, dict):
        raw = [raw]
    events = {}
    for obj in raw:
        ev = ClassificationEvent(float(obj.get("t", 0.0)), obj["task"], obj["label"], float(obj["confidence"]))
        events[ev.task] = ev
    lock = LockState(displayed=args.locked, watermark=args.locked)
    d = decide_access(args.app, args.sensor, args.op, events, rules, thresholds, lock)
    _emit({"app": args.app, "sensor": args.sensor, "op": args.op, **d.to_dict()}, args.output)
    return 0


def cmd_predict(args) -> int:
    model = model_from_dict(json.loads(Path(args.model_file).read_text(encoding="utf-8")))
    label, conf = model.predict([float(x) for x in args.vector.split(",")])
    _emit({"task": model.task, "label": label, "confidence": conf}, args.output)
    return 0


def cmd_policy(args) -> int:
    _emit(default_policy(), args.output)
    return 0


# ---- parser -------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="conxsense", description="Context profiling, classification and "
                                 "context-aware access control over sensor traces.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    def add(name, fn, help_):
        p = sub.add_parser(name, help=help_, description=help_)
        p.set_defaults(func=fn)
        return p

    def scenario_opts(p):
        p.add_argument("--scenario", choices=sorted(SCENARIOS), default="commuter")
        p.add_argument("--days", type=int, default=14)
        p.add_argument("--seed", type=int, default=42)

    def model_opts(p, default="rf"):
        p.add_argument("--config", help="JSON parameter file (defaults apply to missing keys)")
        p.add_argument("--model", choices=MODEL_CHOICES, default=default)
        p.add_argument("--model-seed", type=int, default=None, help="override model.seed from the config")

    p = add("generate", cmd_generate, "Write a synthetic JSON-lines trace.")
    scenario_opts(p)
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--events-out", help="also write replay events and ground truth (JSON lines)")

    p = add("profile", cmd_profile, "Detect stay points and CoIs, print CoI and device profiles.")
    p.add_argument("--trace", required=True)
    p.add_argument("--config")
    p.add_argument("--dump-staypoints", metavar="PATH")
    p.add_argument("--dump-cois", metavar="PATH")
    p.add_argument("-o", "--output")

    p = add("features", cmd_features, "Write labeled feature vectors as CSV.")
    p.add_argument("--trace", required=True)
    p.add_argument("--config")
    p.add_argument("--task", choices=(*TASKS, "all"), default="all")
    p.add_argument("-o", "--output")

    for name, fn, help_ in (("train", cmd_train, "Train a model and write it as JSON."),
                            ("eval", cmd_eval, "Stratified cross-validation; writes roc.csv (roc_<task>.csv for --task all) and summary.json.")):
        p = add(name, fn, help_)
        src = p.add_mutually_exclusive_group(required=True)
        src.add_argument("--trace")
        src.add_argument("--features", help="CSV written by `conxsense features`")
        model_opts(p)
        p.add_argument("--task", choices=(*TASKS, "all"), default="all" if name == "eval" else "misuse")
        if name == "eval":
            p.add_argument("--folds", type=int, default=None)
        p.add_argument("-o", "--output", required=name == "eval")

    p = add("run", cmd_run, "Full pipeline with every intermediate artifact written to a directory.")
    p.add_argument("--trace", required=True)
    model_opts(p)
    p.add_argument("-o", "--output", required=True)

    p = add("simulate", cmd_simulate, "Replay wake/reboot/access events through the enforcement layer.")
    p.add_argument("--policy", help="policy JSON (default: built-in policy)")
    p.add_argument("--events", help="events JSON lines from `generate --events-out`")
    p.add_argument("--trace", help="trace for training when --model is a classifier")
    scenario_opts(p)
    p.add_argument("--config")
    p.add_argument("--model", choices=(*MODEL_CHOICES, "oracle", "always_deny"), default="oracle")
    p.add_argument("--model-seed", type=int, default=None)
    p.add_argument("--cadence", type=float, default=60.0, help="seconds between background classifications")
    p.add_argument("--no-latency", action="store_true", help="omit wall-clock latency fields")
    p.add_argument("-o", "--output")

    p = add("decide", cmd_decide, "Decide one sensor access and print the decision as JSON.")
    p.add_argument("--policy")
    p.add_argument("--event", help="classification JSON object or list, or @file")
    p.add_argument("--app", required=True)
    p.add_argument("--sensor", required=True)
    p.add_argument("--op", default="read")
    lk = p.add_mutually_exclusive_group()
    lk.add_argument("--locked", dest="locked", action="store_true", default=False)
    lk.add_argument("--unlocked", dest="locked", action="store_false")
    p.add_argument("-o", "--output")

    p = add("predict", cmd_predict, "Classify one comma-separated feature vector with a saved model.")
    p.add_argument("--model-file", required=True)
    p.add_argument("--vector", required=True)
    p.add_argument("-o", "--output")

    p = add("policy", cmd_policy, "Print the built-in default policy.")
    p.add_argument("-o", "--output")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("always")
            return args.func(args)
    except (ConXsenseError, ValueError, OSError) as exc:
        print(f"conxsense: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
