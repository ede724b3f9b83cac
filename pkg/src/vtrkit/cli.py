"""Command line interface: ``vtrkit <subcommand> ...``.

Exit codes: 0 success, 1 environment or I/O failure, 2 user or config error.
Outputs go under ``--out``; without it, under ``$VTRKIT_OUTPUT_ROOT/<subcommand>``
(default root ``runs``). Every artifact-producing command appends a JSON line to
``<out>/run_manifests.jsonl``.
"""
import argparse
import hashlib
import json
import logging
import os
import sys
import time
import wave
from dataclasses import replace
from pathlib import Path

import numpy as np
import yaml

log = logging.getLogger("vtrkit")

OUTPUT_ROOT_ENV = "VTRKIT_OUTPUT_ROOT"
EXIT_OK, EXIT_IO, EXIT_CONFIG = 0, 1, 2


class ConfigError(Exception):
    """A user or configuration error (exit status 2)."""


# -- helpers -------------------------------------------------------------------

def _digest(obj):
    return hashlib.sha256(json.dumps(obj, sort_keys=True, default=str).encode()).hexdigest()[:16]


def file_digest(path):
    path = Path(path)
    if path.is_dir():
        path = path / "manifest.jsonl"
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()[:16]


def read_yaml(path):
    if path is None:
        return {}
    try:
        data = yaml.safe_load(Path(path).read_text())
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: not valid YAML ({exc})") from exc
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: expected a mapping at the top level")
    return data


def output_dir(args, command):
    if args.out:
        return Path(args.out)
    return Path(os.environ.get(OUTPUT_ROOT_ENV, "runs")) / command


def _model_config(preset, overrides, **forced):
    from .model import model_preset
    try:
        return model_preset(preset, **{**dict(overrides or {}), **forced})
    except TypeError as exc:
        raise ConfigError(f"bad model config: {exc}") from exc


def _train_config(preset, stage, overrides, seed=None):
    from .train import train_preset
    overrides = dict(overrides or {})
    if seed is not None:
        overrides["seed"] = seed
    try:
        return train_preset(preset, stage, **overrides)
    except TypeError as exc:
        raise ConfigError(f"bad train config: {exc}") from exc


def _load_manifest(corpus_dir):
    from .synthgen import CorpusManifest
    path = Path(corpus_dir) / "manifest.jsonl"
    if not path.exists():
        raise FileNotFoundError(f"no corpus manifest at {path}")
    return CorpusManifest.load(path)


class RunRecorder:
    """Collects what a command read and wrote, and appends one RunManifest line at exit."""

    def __init__(self, command, argv):
        self.command = command
        self.argv = list(argv)
        self.started = time.time()
        self.config = {}
        self.inputs = {}
        self.outputs = []
        self.out_dir = None
        self.extra = {}

    def input(self, path):
        if path is not None and Path(path).exists():
            self.inputs[str(path)] = file_digest(path)

    def output(self, path):
        self.outputs.append(str(path))

    def write(self, status):
        if self.out_dir is None:
            return
        record = {
            "command": self.command,
            "argv": self.argv,
            "config_digest": _digest(self.config),
            "inputs": self.inputs,
            "outputs": self.outputs,
            "wall_clock_s": round(time.time() - self.started, 3),
            "exit_status": status,
            **self.extra,
        }
        try:
            self.out_dir.mkdir(parents=True, exist_ok=True)
            with open(self.out_dir / "run_manifests.jsonl", "a") as fh:
                fh.write(json.dumps(record, sort_keys=True) + "\n")
        except OSError as exc:
            log.error("could not append run manifest: %s", exc)


# -- subcommands ---------------------------------------------------------------

def cmd_build_corpus(args, run: RunRecorder):
    from .synthgen import CorpusConfig, build_corpus, corpus_stats, filter_corpus, format_stats, split_corpus

    raw = read_yaml(args.config)
    test_fraction = float(raw.pop("test_fraction", args.test_fraction))
    split_seed = raw.pop("split_seed", None)
    section = raw.get("corpus", raw)
    if args.preset == "paper":
        section = {"n_categories": 30, "height": 224, "width": 224, **section}
    if args.seed is not None:
        section = {**section, "seed": args.seed}
    try:
        cfg = CorpusConfig.from_dict(section)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    out = run.out_dir
    split_seed = cfg.seed if split_seed is None else int(split_seed)
    run.config = {"corpus": cfg.to_dict(), "test_fraction": test_fraction, "split_seed": split_seed}
    run.input(args.config)
    manifest = build_corpus(cfg, out)
    manifest = filter_corpus(manifest, cfg.distinct_types_threshold, cfg.max_same_type, cfg.max_duration_s)
    manifest = split_corpus(manifest, test_fraction, split_seed)
    manifest.save(out / "manifest.jsonl")
    stats = corpus_stats(manifest)
    (out / "stats.json").write_text(json.dumps(stats, indent=1, sort_keys=True))
    (out / "stats.txt").write_text(format_stats(stats, manifest.categories))
    for name in ("manifest.jsonl", "stats.json", "stats.txt", "config.yaml"):
        run.output(out / name)
    print(format_stats(stats, manifest.categories), end="")
    return EXIT_OK


def cmd_pretrain(args, run: RunRecorder):
    import torch
    from .eval import embedding_projection_report
    from .model import save_checkpoint
    from .train import build_embedding_table, classifier_accuracy, pretrain_transition_classifier
    from .train import transition_clip_dataset

    raw = read_yaml(args.config)
    manifest = _load_manifest(args.corpus)
    model_over = dict(raw.get("model", {}))
    if model_over.get("n_categories", manifest.category_count) != manifest.category_count:
        raise ConfigError(f"config asks for {model_over['n_categories']} categories, corpus has "
                          f"{manifest.category_count}")
    mc = _model_config(args.preset, model_over, n_categories=manifest.category_count)
    tc = _train_config(args.preset, "pretrain", raw.get("train"), args.seed)
    out = run.out_dir
    run.config = {"model": mc.to_dict(), "train": tc.to_dict(), "corpus_digest": manifest.config_digest}
    run.input(args.corpus)
    run.input(args.config)
    records = manifest.split("train") or manifest.records
    clips, labels, _ = transition_clip_dataset(args.corpus, records, mc.clip_frames)
    missing = sorted(set(range(manifest.category_count)) - set(labels.tolist()))
    if missing:
        raise ConfigError(f"training split has no clips for categories {missing}")
    torch.set_num_threads(args.threads)
    model, report = pretrain_transition_classifier(clips, labels, mc, tc, log=log.info)
    acc = classifier_accuracy(model, clips, labels)
    table = build_embedding_table(model, clips, labels, manifest.categories)
    out.mkdir(parents=True, exist_ok=True)
    ckpt = save_checkpoint(out / "classifier.pt", "classifier", mc, model.state_dict(),
                           {"train_config": tc.to_dict(), "run_config_digest": _digest(run.config),
                            "train_accuracy": acc})
    table.save(out / "table.csv")
    report.write_jsonl(out / "pretrain_log.jsonl")
    for p in (ckpt, out / "table.csv", out / "pretrain_log.jsonl"):
        run.output(p)
    if args.projection:
        rep = embedding_projection_report(table.embeddings, names=manifest.categories, out_dir=out,
                                          stem="table_projection")
        run.output(rep.paths["png"])
    print(f"train accuracy {acc:.4f}; table with {table.n_categories} rows written to {out / 'table.csv'}")
    return EXIT_OK


def _backbone_state(path):
    if path is None:
        return None
    from .model import load_checkpoint
    payload = load_checkpoint(path)
    if payload["kind"] != "classifier":
        raise ConfigError(f"{path} is a {payload['kind']} checkpoint, not a classifier")
    prefix = "backbone."
    return {k[len(prefix):]: v for k, v in payload["state_dict"].items() if k.startswith(prefix)}


def cmd_train(args, run: RunRecorder):
    import torch
    from .eval import save_model_checkpoint
    from .model import TransitionEmbeddingTable
    from .train import load_video_samples, train_classification_baseline, train_recommender

    raw = read_yaml(args.config)
    manifest = _load_manifest(args.corpus)
    classification = args.objective == "classification"
    if not classification and args.table is None and not args.random_embedding:
        raise ConfigError("train needs --table unless --random-embedding or --objective classification is given")
    table = None
    if args.table is not None:
        table = TransitionEmbeddingTable.load(args.table)
        if table.n_categories != manifest.category_count:
            raise ConfigError(f"table has {table.n_categories} rows, corpus has {manifest.category_count} categories")
    model_over = dict(raw.get("model", {}))
    if table is not None:
        model_over.setdefault("d_transition", table.dim)
    mc = _model_config(args.preset, model_over, n_categories=manifest.category_count)
    tc = _train_config(args.preset, "recommender", raw.get("train"), args.seed)
    out = run.out_dir
    embedding_init = "random" if args.random_embedding else ("none" if classification else "pretrained")
    run.config = {"model": mc.to_dict(), "train": tc.to_dict(), "context": not args.no_context,
                  "objective": args.objective, "embedding_init": embedding_init}
    run.extra["embedding_init"] = embedding_init
    for p in (args.corpus, args.config, args.table, args.backbone):
        run.input(p)
    backbone = _backbone_state(args.backbone)
    torch.set_num_threads(args.threads)
    train = load_video_samples(args.corpus, manifest.split("train"), mc)
    test = load_video_samples(args.corpus, manifest.split("test"), mc) if manifest.split("test") else None
    if classification:
        model, report = train_classification_baseline(train, mc, tc, test, not args.no_context, backbone, log.info)
        used_table = None
    else:
        model, report = train_recommender(train, table, mc, tc, test, not args.no_context, args.random_embedding,
                                          backbone, log.info)
        used_table = _table_of(model, table)
    out.mkdir(parents=True, exist_ok=True)
    ckpt = save_model_checkpoint(out / "recommender.pt", model, used_table, not args.no_context,
                                 {"train_config": tc.to_dict(), "embedding_init": embedding_init,
                                  "run_config_digest": _digest(run.config)})
    report.write_jsonl(out / "train_log.jsonl")
    run.output(ckpt)
    run.output(out / "train_log.jsonl")
    last = report.epoch_metrics[-1] if report.epoch_metrics else {}
    print(f"final loss {report.epoch_losses[-1]:.4f} " + " ".join(f"{k} {v:.4f}" for k, v in last.items()))
    return EXIT_OK


def _table_of(model, table):
    from .model import TransitionEmbeddingTable
    emb = model.table.double().numpy()
    names = table.names if table is not None else None
    kind = "pretrained" if table is not None and np.allclose(emb, table.embeddings, atol=1e-6) else "random"
    return TransitionEmbeddingTable(emb, list(range(len(emb))), names, kind)


def cmd_eval(args, run: RunRecorder):
    from .eval import evaluate_model, write_metrics_report
    from .model import load_checkpoint

    try:
        payload = load_checkpoint(args.checkpoint)
    except (ValueError, KeyError) as exc:
        raise ConfigError(f"{args.checkpoint}: {exc}") from exc
    if payload["kind"] == "classifier":
        raise ConfigError("a classifier checkpoint cannot be evaluated as a recommender")
    manifest = _load_manifest(args.corpus)
    if payload["model_config"].n_categories != manifest.category_count:
        raise ConfigError(f"checkpoint has {payload['model_config'].n_categories} categories, corpus has "
                          f"{manifest.category_count}")
    out = run.out_dir
    run.config = {"checkpoint_digest": file_digest(args.checkpoint), "split": args.split}
    run.input(args.checkpoint)
    run.input(args.corpus)
    report = evaluate_model(payload, args.corpus, args.split)
    path = write_metrics_report(report, out, Path(args.checkpoint).stem)
    run.output(path)
    run.output(out / "metrics.txt")
    print((out / "metrics.txt").read_text(), end="")
    return EXIT_OK


def cmd_ablate(args, run: RunRecorder):
    import torch
    from .eval import AblationData, AblationSpec, LAYOUTS, layout_specs, run_ablation_grid, write_comparison
    from .model import TransitionEmbeddingTable

    grid = read_yaml(args.grid)
    if not grid:
        raise ConfigError("the grid config is empty")
    tables = {}
    layouts = list(grid.get("layouts", []))
    for name in layouts:
        if name not in LAYOUTS:
            raise ConfigError(f"unknown layout {name!r}; choose from {sorted(LAYOUTS)}")
        tables[name] = layout_specs(name)
    extra_specs = grid.get("specs", [])
    try:
        custom = [AblationSpec.from_dict(d) for d in extra_specs]
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    if custom:
        tables[grid.get("custom_layout", "context_modality")] = tables.get(
            grid.get("custom_layout", "context_modality"), []) + custom
    if not tables:
        raise ConfigError("the grid lists no layouts and no specs")
    seeds = [int(s) for s in grid.get("seeds", [0])]
    manifest = _load_manifest(args.corpus)
    table = TransitionEmbeddingTable.load(args.table) if args.table else None
    model_over = dict(grid.get("model", {}))
    if table is not None:
        model_over.setdefault("d_transition", table.dim)
    base = _model_config(args.preset, model_over, n_categories=manifest.category_count)
    tc = _train_config(args.preset, "recommender", grid.get("train"))
    data = {False: AblationData(args.corpus, table, _backbone_state(args.backbone))}
    needs_cut = any(s.direct_cut for specs in tables.values() for s in specs)
    if needs_cut:
        if not (args.cut_corpus and args.cut_table):
            raise ConfigError("direct-cut specs need --cut-corpus and --cut-table")
        data[True] = AblationData(args.cut_corpus, TransitionEmbeddingTable.load(args.cut_table),
                                  _backbone_state(args.cut_backbone or args.backbone))
    out = run.out_dir
    run.config = {"grid": grid, "model": base.to_dict(), "train": tc.to_dict()}
    for p in (args.grid, args.corpus, args.table, args.backbone, args.cut_corpus, args.cut_table):
        run.input(p)
    torch.set_num_threads(args.threads)
    any_ok = False
    for name, specs in tables.items():
        rows = run_ablation_grid(specs, data, base, tc, seeds, log=log.info)
        any_ok |= any(r.ok for r in rows)
        path = write_comparison(rows, name, out, base)
        run.output(path)
        print((out / f"{name}.txt").read_text())
    if grid.get("projection") and table is not None:
        from .eval import embedding_projection_report
        rep = embedding_projection_report(table.embeddings, names=table.names, out_dir=out, stem="table_projection")
        run.output(rep.paths["png"])
    return EXIT_OK if any_ok else EXIT_IO


def _read_audio(path, sample_rate):
    path = Path(path)
    if path.suffix.lower() == ".wav":
        with wave.open(str(path)) as w:
            if w.getsampwidth() != 2:
                raise ConfigError(f"{path}: only 16-bit PCM WAV is supported")
            data = np.frombuffer(w.readframes(w.getnframes()), dtype=np.int16).astype(np.float32) / 32767.0
            if w.getnchannels() > 1:
                data = data.reshape(-1, w.getnchannels()).mean(axis=1)
            return data, w.getframerate()
    if sample_rate is None:
        raise ConfigError("--sample-rate is required for .npy audio")
    return np.load(path).astype(np.float32).ravel(), sample_rate


def cmd_recommend(args, run: RunRecorder):
    import torch
    from .eval import model_from_checkpoint
    from .model import TransitionEmbeddingTable, load_checkpoint
    from .model.recommender import rank_scores
    from .train.data import raw_shots_sample
    from .train.loops import PreparedSamples, predict_scores

    if len(args.shots) < 2:
        raise ConfigError("recommend needs at least two shots")
    payload = load_checkpoint(args.checkpoint)
    if payload["kind"] not in ("recommender", "baseline"):
        raise ConfigError(f"{args.checkpoint} is a {payload['kind']} checkpoint, not a recommender")
    model = model_from_checkpoint(payload)
    if args.table is not None and model.objective == "retrieval":
        table = TransitionEmbeddingTable.load(args.table)
        if table.embeddings.shape != tuple(model.table.shape) or not np.allclose(
                table.embeddings, model.table.double().numpy(), atol=1e-6):
            raise ConfigError(f"{args.table} is not the table this checkpoint was trained with")
    shots = [np.load(p) for p in args.shots]
    samples, sr = _read_audio(args.audio, args.sample_rate)
    config = payload["model_config"]
    if sr != config.sample_rate:
        raise ConfigError(f"audio is sampled at {sr} Hz, the model expects {config.sample_rate} Hz")
    try:
        sample = raw_shots_sample(shots, samples, sr, args.fps, config)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    torch.set_num_threads(args.threads)
    scores, _, _ = predict_scores(model, PreparedSamples(model, [sample], True))
    names = (payload["extra"].get("table") or {}).get("names")
    k = min(args.top_k, scores.shape[1])
    result = []
    for b, row in enumerate(scores):
        order = rank_scores(row)[:k]
        result.append({"boundary": b, "ranking": [
            {"category_id": int(c), "name": names[c] if names else None, "score": round(float(row[c]), 6)}
            for c in order]})
    print(json.dumps({"boundaries": result}, indent=1))
    run.config = {"checkpoint_digest": file_digest(args.checkpoint), "top_k": k}
    return EXIT_OK


# -- entry point ---------------------------------------------------------------

def build_parser():
    p = argparse.ArgumentParser(prog="vtrkit", description="Video transition recommendation toolkit.")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, preset=True):
        sp.add_argument("--out", help="output directory")
        if preset:
            sp.add_argument("--preset", choices=("desk", "paper"), default="desk", help="scale preset")
        sp.add_argument("--seed", type=int, default=None)
        sp.add_argument("--threads", type=int, default=1, help="torch intra-op threads")

    b = sub.add_parser("build-corpus", help="generate, filter, split and summarise a synthetic corpus")
    b.add_argument("--config", help="YAML corpus config (keys of CorpusConfig, optionally under 'corpus')")
    b.add_argument("--test-fraction", type=float, default=0.2)
    common(b)

    pt = sub.add_parser("pretrain", help="train the transition classifier and build the embedding table")
    pt.add_argument("--corpus", required=True)
    pt.add_argument("--config", help="YAML with 'model' and 'train' sections")
    pt.add_argument("--projection", action="store_true", help="also render a 2-D projection of the table")
    common(pt)

    t = sub.add_parser("train", help="train the recommender (or the classification baseline)")
    t.add_argument("--corpus", required=True)
    t.add_argument("--table", help="transition embedding table CSV")
    t.add_argument("--backbone", help="classifier checkpoint whose backbone initialises the visual encoder")
    t.add_argument("--random-embedding", action="store_true", help="replace the table by random unit rows")
    t.add_argument("--no-context", action="store_true", help="train on isolated 2-shot sequences")
    t.add_argument("--objective", choices=("retrieval", "classification"), default="retrieval")
    t.add_argument("--config", help="YAML with 'model' and 'train' sections")
    common(t)

    e = sub.add_parser("eval", help="Recall@1, Recall@5 and Mean Rank of a checkpoint")
    e.add_argument("--checkpoint", required=True)
    e.add_argument("--corpus", required=True)
    e.add_argument("--split", default="test")
    common(e, preset=False)

    a = sub.add_parser("ablate", help="run an ablation grid and write comparison tables")
    a.add_argument("--grid", required=True, help="YAML grid config")
    a.add_argument("--corpus", required=True)
    a.add_argument("--table")
    a.add_argument("--backbone")
    a.add_argument("--cut-corpus", help="corpus with the direct cut category, for direct_cut specs")
    a.add_argument("--cut-table")
    a.add_argument("--cut-backbone")
    common(a)

    r = sub.add_parser("recommend", help="rank transition categories for each boundary of raw shots")
    r.add_argument("--checkpoint", required=True)
    r.add_argument("--table", help="optional; checked against the checkpoint's table")
    r.add_argument("--shots", nargs="+", required=True, help=".npy arrays of shape (T, H, W, 3)")
    r.add_argument("--audio", required=True, help="16-bit WAV, or .npy samples with --sample-rate")
    r.add_argument("--sample-rate", type=int)
    r.add_argument("--fps", type=float, default=16.0)
    r.add_argument("--top-k", type=int, default=5)
    common(r, preset=False)
    return p


# default sub-directory of the output root for each command
OUTPUT_DIRS = {"build-corpus": "corpus", "pretrain": "pretrain", "train": "train", "eval": "eval",
               "ablate": "ablate", "recommend": "recommend"}

COMMANDS = {
    "build-corpus": cmd_build_corpus,
    "pretrain": cmd_pretrain,
    "train": cmd_train,
    "eval": cmd_eval,
    "ablate": cmd_ablate,
    "recommend": cmd_recommend,
}


def main(argv=None):
    argv = sys.argv[1:] if argv is None else list(argv)
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(asctime)s %(levelname)s %(message)s", stream=sys.stderr)
    if getattr(args, "seed", None) is not None:
        from .train import seed_everything
        seed_everything(args.seed)
    run = RunRecorder(args.command, argv)
    if args.command != "recommend" or args.out:
        run.out_dir = output_dir(args, OUTPUT_DIRS[args.command])
    try:
        status = COMMANDS[args.command](args, run)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        status = EXIT_CONFIG
    except (OSError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        status = EXIT_IO
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        status = EXIT_CONFIG
    run.write(status)
    return status


if __name__ == "__main__":
    sys.exit(main())
