"""Command-line entry point wiring the pipeline:
ingest -> pairgen -> features -> impostors/external -> eval,
plus a one-command synthetic-corpus demo."""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time
from pathlib import Path

from authverify import __version__
from authverify.corpus import (
    TokenizerConfig,
    corpus_summary,
    load_corpus,
    load_manifest,
    save_corpus,
)
from authverify.evaluate import report
from authverify.features import FeatureModel
from authverify.impostors import ImpostorParams, PoolCandidate, run_testset
from authverify.pairgen import (
    QuotaSpec,
    SampleCategory,
    generate_pairs,
    group_authors,
    read_dataset,
    split_authors,
    write_dataset,
)
from authverify.protocol import read_results, run_external, write_results
from authverify.synthetic import generate_synthetic_corpus, write_manifest


class ConfigError(Exception):
    pass


def _sha256(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _threads() -> int:
    return max(1, int(os.environ.get("AUTHVERIFY_THREADS", "1")))


def _parse_quota_counts(raw: dict) -> dict:
    out = {}
    for split, counts in raw.items():
        out[split] = {SampleCategory[name]: int(v) for name, v in counts.items()}
    return out


def _load_quota_spec(path: Path) -> QuotaSpec:
    raw = json.loads(path.read_text(encoding="utf-8"))
    return QuotaSpec(
        counts=_parse_quota_counts(raw["counts"]),
        horizon=int(raw.get("horizon", 10)),
        include_same_doc=bool(raw.get("include_same_doc", True)),
    )


def _pool_from_dataset(samples) -> list[PoolCandidate]:
    """Paragraph-level impostor candidates from a training dataset (deduplicated)."""
    seen = set()
    pool = []
    for s in samples:
        for author, doc, text in ((s.author1, s.doc1, s.para1), (s.author2, s.doc2, s.para2)):
            key = (doc, text)
            if key not in seen:
                seen.add(key)
                pool.append(PoolCandidate(text=text, author_id=author, doc_id=doc))
    return pool


# --- subcommands -------------------------------------------------------------


def cmd_ingest(args) -> int:
    docs = load_manifest(args.manifest)
    tok = TokenizerConfig(args.tokenizer)
    summary = corpus_summary(docs, tok, args.min_tokens)
    save_corpus(docs, args.out)
    print(
        f"ingested {summary['documents']} documents by {summary['authors']} authors; "
        f"{summary['admissible_paragraphs']} admissible paragraphs "
        f"(min_tokens={args.min_tokens}, tokenizer={tok.mode.value})"
    )
    return 0


def cmd_pairgen(args) -> int:
    docs = load_corpus(args.corpus)
    spec = _load_quota_spec(Path(args.quotas))
    tok = TokenizerConfig(args.tokenizer)
    groups = group_authors(docs, spec.horizon)
    split = split_authors(groups, ratios=tuple(args.ratios), seed=args.seed)
    samples = generate_pairs(
        docs,
        split.authors(args.split),
        spec.for_split(args.split),
        seed=args.seed,
        tok=tok,
        min_tokens=args.min_tokens,
        max_combined=args.max_combined,
        reserve=args.reserve,
        horizon=spec.horizon,
        focus_author=args.focus_author,
    )
    header = {
        "seed": args.seed,
        "split": args.split,
        "quotas": {c.name: n for c, n in spec.for_split(args.split).items()},
        "horizon": spec.horizon,
        "tokenizer": tok.mode.value,
        "truncation": {"max_combined": args.max_combined, "reserve": args.reserve},
        "min_tokens": args.min_tokens,
        "focus_author": args.focus_author,
    }
    write_dataset(samples, args.out, header)
    print(f"wrote {len(samples)} samples to {args.out}")
    return 0


def cmd_features(args) -> int:
    if args.action != "build":
        raise ConfigError(f"unknown features action {args.action!r}")
    _, samples = read_dataset(args.train)
    texts = [t for s in samples for t in (s.para1, s.para2)]
    model = FeatureModel.fit(texts, n=args.n, max_size=args.size)
    model.save(args.out)
    print(f"built feature model: {len(model.vocab)} n-grams over {model.idf.n_docs} texts")
    return 0


def cmd_impostors(args) -> int:
    if args.action != "run":
        raise ConfigError(f"unknown impostors action {args.action!r}")
    _, test = read_dataset(args.test)
    _, train = read_dataset(args.pool)
    model = FeatureModel.load(args.model)
    params = ImpostorParams(
        iterations=args.iterations,
        feature_fraction=args.feature_fraction,
        pool_size=args.pool_size,
        impostors_per_iter=args.per_iter,
        threshold=args.threshold,
    )
    results = run_testset(
        test, model, _pool_from_dataset(train), params, seed=args.seed, threads=_threads()
    )
    write_results(results, args.out)
    acc = sum(r.label == r.truth for r in results) / len(results) if results else 0.0
    print(f"verified {len(results)} samples, accuracy {acc:.4f} -> {args.out}")
    return 0


def cmd_external(args) -> int:
    _, test = read_dataset(args.test)
    results = run_external(test, args.endpoint, timeout=args.timeout)
    write_results(results, args.out)
    print(f"collected {len(results)} responses -> {args.out}")
    return 0


def cmd_eval(args) -> int:
    results = read_results(args.results)
    results_b = read_results(args.results_b) if args.results_b else None
    _, dataset = read_dataset(args.dataset)
    summary = report(results, dataset, args.out, results_b=results_b, bucket_width=args.bucket_width)
    print(f"report written to {args.out} (accuracy {summary['accuracy']:.4f})")
    return 0


# --- pipeline ----------------------------------------------------------------

_STAGES = ("ingest", "pairgen", "features", "impostors", "external", "eval")


def _load_pipeline_config(path: Path) -> dict:
    try:
        cfg = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}: invalid JSON: {exc.msg}") from exc
    for key in ("manifest", "quotas", "seed"):
        if key not in cfg:
            raise ConfigError(f"{path}: missing required key {key!r}")
    manifest = (path.parent / cfg["manifest"]).resolve()
    if not manifest.exists():
        raise ConfigError(f"{path}: manifest not found: {manifest}")
    cfg["manifest"] = str(manifest)
    return cfg


def _stage_fresh(manifest_path: Path, inputs: dict[str, str], config: dict, outputs: list[Path]) -> bool:
    if not all(p.exists() for p in outputs):
        return False
    if not manifest_path.exists():
        return False
    try:
        prev = json.loads(manifest_path.read_text(encoding="utf-8"))
    except json.JSONDecodeError:
        return False
    return prev.get("inputs") == inputs and prev.get("config") == config


def _write_stage_manifest(manifest_path: Path, stage: str, inputs: dict, config: dict) -> None:
    manifest_path.write_text(
        json.dumps(
            {
                "stage": stage,
                "tool_version": __version__,
                "inputs": inputs,
                "config": config,
                "timestamp": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
            },
            sort_keys=True,
            indent=2,
        ),
        encoding="utf-8",
    )


def run_pipeline(config_path: Path, force: bool = False) -> Path:
    cfg = _load_pipeline_config(config_path)
    out_dir = (config_path.parent / cfg.get("out_dir", ".")).resolve()
    out_dir.mkdir(parents=True, exist_ok=True)
    seed = int(cfg["seed"])
    tok = TokenizerConfig(cfg.get("tokenizer", "unicode_char"))
    min_tokens = int(cfg.get("min_tokens", 200))
    max_combined = int(cfg.get("max_combined", 512))
    reserve = int(cfg.get("reserve", 3))
    horizon = int(cfg.get("horizon", 10))
    ratios = tuple(cfg.get("ratios", (0.8, 0.1, 0.1)))
    quota_spec = QuotaSpec(
        counts=_parse_quota_counts(cfg["quotas"]),
        horizon=horizon,
        include_same_doc=bool(cfg.get("include_same_doc", True)),
    )
    feat_cfg = cfg.get("features", {})
    imp_cfg = cfg.get("impostors", {})

    def stage(name: str, inputs: list[Path], stage_config: dict, outputs: list[Path], run) -> None:
        manifest_path = out_dir / f"{name}.manifest.json"
        input_hashes = {str(p): _sha256(p) for p in inputs}
        stage_config = json.loads(json.dumps(stage_config, sort_keys=True))
        if not force and _stage_fresh(manifest_path, input_hashes, stage_config, outputs):
            print(f"[{name}] up to date, skipped")
            return
        try:
            run()
        except Exception as exc:
            raise RuntimeError(f"stage {name!r} failed: {exc}") from exc
        _write_stage_manifest(manifest_path, name, input_hashes, stage_config)
        print(f"[{name}] done")

    manifest_file = Path(cfg["manifest"])
    corpus_file = out_dir / "corpus.json"
    stage(
        "ingest",
        [manifest_file],
        {"min_tokens": min_tokens, "tokenizer": tok.mode.value},
        [corpus_file],
        lambda: save_corpus(load_manifest(manifest_file), corpus_file),
    )

    split_files = {s: out_dir / f"{s}.jsonl" for s in ("train", "dev", "test")}

    def run_pairgen():
        docs = load_corpus(corpus_file)
        groups = group_authors(docs, horizon)
        split = split_authors(groups, ratios=ratios, seed=seed)
        for split_name, path in split_files.items():
            samples = generate_pairs(
                docs,
                split.authors(split_name),
                quota_spec.for_split(split_name),
                seed=seed,
                tok=tok,
                min_tokens=min_tokens,
                max_combined=max_combined,
                reserve=reserve,
                horizon=horizon,
                focus_author=cfg.get("focus_author"),
            )
            header = {
                "seed": seed,
                "split": split_name,
                "quotas": {c.name: n for c, n in quota_spec.for_split(split_name).items()},
                "horizon": horizon,
                "tokenizer": tok.mode.value,
                "truncation": {"max_combined": max_combined, "reserve": reserve},
                "min_tokens": min_tokens,
                "focus_author": cfg.get("focus_author"),
            }
            write_dataset(samples, path, header)

    pairgen_config = {
        "seed": seed,
        "ratios": list(ratios),
        "horizon": horizon,
        "min_tokens": min_tokens,
        "max_combined": max_combined,
        "reserve": reserve,
        "quotas": {s: {c.name: n for c, n in m.items()} for s, m in quota_spec.counts.items()},
        "include_same_doc": quota_spec.include_same_doc,
        "focus_author": cfg.get("focus_author"),
    }
    stage("pairgen", [corpus_file], pairgen_config, list(split_files.values()), run_pairgen)

    model_file = out_dir / "feats.model"

    def run_features():
        _, samples = read_dataset(split_files["train"])
        texts = [t for s in samples for t in (s.para1, s.para2)]
        FeatureModel.fit(
            texts, n=int(feat_cfg.get("n", 2)), max_size=int(feat_cfg.get("max_size", 50_000))
        ).save(model_file)

    stage("features", [split_files["train"]], dict(feat_cfg), [model_file], run_features)

    results_file = out_dir / "results.jsonl"

    def run_impostors():
        _, test = read_dataset(split_files["test"])
        _, train = read_dataset(split_files["train"])
        params = ImpostorParams(
            iterations=int(imp_cfg.get("iterations", 100)),
            feature_fraction=float(imp_cfg.get("feature_fraction", 0.9)),
            pool_size=int(imp_cfg.get("pool_size", 100)),
            impostors_per_iter=int(imp_cfg.get("impostors_per_iter", 5)),
            threshold=float(imp_cfg.get("threshold", 0.5)),
        )
        results = run_testset(
            test,
            FeatureModel.load(model_file),
            _pool_from_dataset(train),
            params,
            seed=seed,
            threads=_threads(),
        )
        write_results(results, results_file)

    stage(
        "impostors",
        [split_files["test"], split_files["train"], model_file],
        {"seed": seed, **imp_cfg},
        [results_file],
        run_impostors,
    )

    external_file = None
    endpoint = cfg.get("external_endpoint")
    if endpoint:
        external_file = out_dir / "results_external.jsonl"

        def run_ext():
            _, test = read_dataset(split_files["test"])
            write_results(
                run_external(test, endpoint, timeout=float(cfg.get("external_timeout", 300.0))),
                external_file,
            )

        stage(
            "external",
            [split_files["test"]],
            {"endpoint": endpoint},
            [external_file],
            run_ext,
        )

    report_dir = out_dir / "report"

    def run_eval():
        results = read_results(results_file)
        results_b = read_results(external_file) if external_file else None
        _, dataset = read_dataset(split_files["test"])
        report(results, dataset, report_dir, results_b=results_b)

    eval_inputs = [results_file, split_files["test"]] + ([external_file] if external_file else [])
    stage("eval", eval_inputs, {}, [report_dir / "prf.csv"], run_eval)
    return out_dir


def cmd_pipeline(args) -> int:
    run_pipeline(Path(args.config), force=args.force)
    return 0


def cmd_demo(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    corpus = generate_synthetic_corpus(seed=args.seed)
    write_manifest(corpus, out / "manifest.jsonl")
    quota = {"SAME_DOC": 20, "SAME_AUTH_NEAR": 20, "SAME_AUTH_FAR": 20,
             "DIFF_AUTH_NEAR": 30, "DIFF_AUTH_FAR": 30}
    config = {
        "out_dir": ".",
        "seed": args.seed,
        "manifest": "manifest.jsonl",
        "tokenizer": "unicode_char",
        "min_tokens": 200,
        "max_combined": 512,
        "reserve": 3,
        "horizon": 10,
        "ratios": [0.8, 0.1, 0.1],
        "quotas": {
            "train": {k: 3 * v for k, v in quota.items()},
            "dev": quota,
            "test": quota,
        },
        "features": {"n": 2, "max_size": 50000},
        "impostors": {"iterations": 100, "feature_fraction": 0.9, "pool_size": 100,
                      "impostors_per_iter": 5, "threshold": 0.5},
    }
    config_path = out / "config.json"
    config_path.write_text(json.dumps(config, indent=2, sort_keys=True), encoding="utf-8")
    run_pipeline(config_path, force=args.force)
    print(f"demo complete; see {out / 'report'}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="authverify", description=__doc__)
    parser.add_argument("--version", action="version", version=f"authverify {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="load a manifest and write a corpus file")
    p.add_argument("--manifest", required=True)
    p.add_argument("--min-tokens", type=int, default=200, dest="min_tokens")
    p.add_argument("--tokenizer", default="unicode_char", choices=["unicode_char", "whitespace"])
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("pairgen", help="generate a pair dataset for one split")
    p.add_argument("--corpus", required=True)
    p.add_argument("--quotas", required=True, help="quota spec JSON")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--split", default="train", choices=["train", "dev", "test"])
    p.add_argument("--ratios", type=float, nargs=3, default=[0.8, 0.1, 0.1])
    p.add_argument("--tokenizer", default="unicode_char", choices=["unicode_char", "whitespace"])
    p.add_argument("--min-tokens", type=int, default=200, dest="min_tokens")
    p.add_argument("--max-combined", type=int, default=512, dest="max_combined")
    p.add_argument("--reserve", type=int, default=3)
    p.add_argument("--focus-author", default=None, dest="focus_author")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_pairgen)

    p = sub.add_parser("features", help="build the n-gram tf-idf model")
    p.add_argument("action", choices=["build"])
    p.add_argument("--train", required=True)
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--size", type=int, default=50_000)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_features)

    p = sub.add_parser("impostors", help="run the Impostors Method over a test set")
    p.add_argument("action", choices=["run"])
    p.add_argument("--test", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--pool", required=True, help="training dataset supplying impostor candidates")
    p.add_argument("--iterations", type=int, default=100)
    p.add_argument("--feature-fraction", type=float, default=0.9, dest="feature_fraction")
    p.add_argument("--pool-size", type=int, default=100, dest="pool_size")
    p.add_argument("--per-iter", type=int, default=5, dest="per_iter")
    p.add_argument("--threshold", type=float, default=0.5)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_impostors)

    p = sub.add_parser("external", help="run an external classifier over a test set")
    p.add_argument("--test", required=True)
    p.add_argument("--endpoint", required=True, help="command line or HTTP URL")
    p.add_argument("--timeout", type=float, default=300.0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_external)

    p = sub.add_parser("eval", help="compute the evaluation report")
    p.add_argument("--results", required=True)
    p.add_argument("--results-b", default=None, dest="results_b")
    p.add_argument("--dataset", required=True)
    p.add_argument("--bucket-width", type=int, default=1, dest="bucket_width")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("pipeline", help="run all stages from a config file (resumable)")
    p.add_argument("--config", required=True)
    p.add_argument("--force", action="store_true", help="ignore cached stage outputs")
    p.set_defaults(func=cmd_pipeline)

    p = sub.add_parser("demo", help="end-to-end run on a bundled synthetic corpus")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=17)
    p.add_argument("--force", action="store_true")
    p.set_defaults(func=cmd_demo)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
