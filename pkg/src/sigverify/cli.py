"""Command-line interface: ``synth``, ``train``, ``verify``, ``evaluate``.

Exit codes: 0 success / genuine, 1 forgery, 2 I/O error, 3 config error,
4 dataset error, 5 SVM non-convergence.
"""

import argparse
import json
import logging
import sys
from pathlib import Path

from . import __version__
from .datasets import SynthParams, generate_synthetic, load_dataset, read_signature, write_corpus
from .errors import (
    ConfigError,
    DatasetError,
    NoConvergence,
    ParseError,
    SigVerifyError,
    ValidationError,
)
from .evaluation import report_csv, roc_csv
from .pipeline import evaluate_dataset, load_config, load_model, save_model, score_signatures, train_all

EXIT_OK = 0
EXIT_FORGERY = 1
EXIT_IO = 2
EXIT_CONFIG = 3
EXIT_DATA = 4
EXIT_CONVERGENCE = 5

log = logging.getLogger("sigverify")


def _fail(code: int, msg: str) -> int:
    print(f"error: {msg}", file=sys.stderr)
    return code


def cmd_synth(args) -> int:
    try:
        params = SynthParams(args.seed, args.signers, args.genuine, args.forgery, args.points, args.distortion)
    except ValueError as exc:
        return _fail(EXIT_CONFIG, str(exc))
    ds = generate_synthetic(params)
    try:
        n = write_corpus(ds, args.out, params)
    except OSError as exc:
        return _fail(EXIT_IO, f"cannot write corpus to {args.out}: {exc}")
    print(f"wrote {n} signatures for {params.n_signers} signers to {args.out}")
    return EXIT_OK


def _load(args):
    cfg = load_config(args.config)
    ds = load_dataset(args.data, args.format, args.genuine_per_user)
    return cfg, ds


def _run(fn, args) -> int:
    """Map package exceptions onto the exit-code contract."""
    try:
        return fn(args)
    except ConfigError as exc:
        return _fail(EXIT_CONFIG, str(exc))
    except NoConvergence as exc:
        return _fail(EXIT_CONVERGENCE, str(exc))
    except (DatasetError, ParseError, ValidationError) as exc:
        return _fail(EXIT_DATA, str(exc))
    except OSError as exc:
        return _fail(EXIT_IO, str(exc))
    except SigVerifyError as exc:
        return _fail(EXIT_DATA, str(exc))


def _train(args) -> int:
    cfg, ds = _load(args)
    models = train_all(ds, cfg)
    for sid in sorted(models):
        m = models[sid]
        d = m.svm.diagnostics
        print(
            f"signer={sid} n_support={d.get('n_support')} sweeps={d.get('sweeps')} "
            f"train_acc={d.get('train_accuracy', float('nan')):.3f} threshold={m.threshold:.6g}"
        )
    save_model(args.model, cfg, models)
    print(f"saved {len(models)} signer models to {args.model}")
    return EXIT_OK


def _verify(args) -> int:
    try:
        cfg, models = load_model(args.model)
    except (OSError, ValueError, KeyError) as exc:
        return _fail(EXIT_IO, f"cannot load model {args.model}: {exc}")
    if args.signer not in models:
        return _fail(EXIT_DATA, f"unknown signer {args.signer!r}")
    try:
        sig = read_signature(args.signature, signer_id=args.signer)
    except OSError as exc:
        return _fail(EXIT_IO, f"cannot read {args.signature}: {exc}")
    except (ParseError, ValidationError) as exc:
        return _fail(EXIT_IO, str(exc))
    model = models[args.signer]
    threshold = model.threshold if args.threshold is None else args.threshold
    score = float(score_signatures(model, [sig], cfg)[0])
    genuine = score >= threshold
    print(json.dumps({"signer": args.signer, "score": score, "decision": "genuine" if genuine else "forgery", "threshold": threshold}))
    return EXIT_OK if genuine else EXIT_FORGERY


def _write(path, text: str) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    Path(path).write_text(text, encoding="utf-8")


def _evaluate(args) -> int:
    cfg, ds = _load(args)
    report, _ = evaluate_dataset(ds, cfg)
    if args.report:
        _write(args.report, report_csv(report))
    if args.roc:
        _write(args.roc, roc_csv(report))
    print("Signer\tEER (%)\tFAR (%)\tFRR (%)")
    for row in report.table_rows():
        print("\t".join(row))
    print(report.summary_line())
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="sigverify", description="Online signature verification (DWT/DCT + PCA + SVM).")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("synth", help="write a deterministic synthetic corpus")
    s.add_argument("--seed", type=int, default=42)
    s.add_argument("--signers", type=int, default=10)
    s.add_argument("--genuine", type=int, default=20)
    s.add_argument("--forgery", type=int, default=20)
    s.add_argument("--points", type=int, default=200)
    s.add_argument("--distortion", type=float, default=0.3)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_synth)

    def data_args(sp):
        sp.add_argument("--data", required=True, help="dataset directory")
        sp.add_argument("--format", choices=("csv", "svc2004", "synthetic"), default="csv")
        sp.add_argument("--config", default=None, help="JSON pipeline config")
        sp.add_argument("--genuine-per-user", type=int, default=20, help="SVC2004 genuine/forgery index cut")

    t = sub.add_parser("train", help="fit per-signer models and save them")
    data_args(t)
    t.add_argument("--model", required=True, help="output model file (JSON)")
    t.set_defaults(func=lambda a: _run(_train, a))

    v = sub.add_parser("verify", help="score one signature against a trained signer")
    v.add_argument("--model", required=True)
    v.add_argument("--signature", required=True, help=".csv or SVC2004 text file")
    v.add_argument("--signer", required=True)
    v.add_argument("--threshold", type=float, default=None, help="override the calibrated threshold")
    v.set_defaults(func=lambda a: _run(_verify, a))

    e = sub.add_parser("evaluate", help="train/test every signer and report FAR/FRR/EER")
    data_args(e)
    e.add_argument("--report", default=None, help="report CSV path")
    e.add_argument("--roc", default=None, help="ROC CSV path")
    e.set_defaults(func=lambda a: _run(_evaluate, a))
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
