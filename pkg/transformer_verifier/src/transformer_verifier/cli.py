"""Command-line entry points: `train` a pair classifier, `serve` it over
the verify/1 protocol on standard streams."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from transformer_verifier.data import DataError, load_pairs
from transformer_verifier.model import Artifact, ModelError, TrainConfig
from transformer_verifier.serve import serve
from transformer_verifier.train import fine_tune


def cmd_train(args) -> int:
    config_dict = json.loads(Path(args.config).read_text(encoding="utf-8")) if args.config else {}
    config = TrainConfig.from_dict(config_dict)
    train_pairs = load_pairs(args.train)
    dev_pairs = load_pairs(args.dev) if args.dev else []
    artifact = fine_tune(train_pairs, dev_pairs, config)
    out = artifact.save(args.out)
    dev_acc = artifact.metrics.get("dev_accuracy")
    summary = f"dev accuracy {dev_acc:.4f}" if dev_acc is not None else "no dev set"
    print(f"trained on {len(train_pairs)} pairs ({summary}); artifact in {out}")
    return 0


def cmd_serve(args) -> int:
    serve(Artifact.load(args.model), sys.stdin, sys.stdout)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="transformer-verifier", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="fine-tune the pair classifier")
    p.add_argument("--train", required=True, help="training dataset (pairgen JSON lines)")
    p.add_argument("--dev", default=None, help="dev dataset for the recorded accuracy")
    p.add_argument("--config", default=None, help="TrainConfig overrides as JSON")
    p.add_argument("--out", required=True, help="artifact output directory")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("serve", help="answer verify/1 requests on stdin/stdout")
    p.add_argument("--model", required=True, help="artifact directory from `train`")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (DataError, ModelError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
