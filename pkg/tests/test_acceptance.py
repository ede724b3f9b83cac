"""Acceptance suite: one test per criterion, each recording a PASS/FAIL line.

The lines are printed in the terminal summary (see ``conftest.py``). Training
criteria share corpora and pre-trained artifacts through session fixtures;
set ``VTRKIT_ACCEPTANCE_CACHE=<dir>`` to keep corpora and pre-training
outputs between sessions (they are rebuilt whenever their config changes).
Every tolerance below is fixed; none is adapted to the measured values.
"""
import json
import os
import time
from collections import Counter
from pathlib import Path

import numpy as np
import pytest
import torch
import yaml

from conftest import ACCEPTANCE_RESULTS
from vtrkit.eval import (AblationData, AblationSpec, embedding_projection_report, family_cosine_gap,
                         metrics_from_scores, run_ablation_grid)
from vtrkit.eval.metrics import mean_rank, recall_at_k
from vtrkit.fx import (EditedVideo, MAX_CATEGORIES, Shot, blend_frame, category_by_name, compose_edited_video,
                       extract_uncontaminated_segments, list_categories)
from vtrkit.model import (Recommender, ShotBatch, TransitionClassifier, load_checkpoint, model_preset,
                          random_table, save_checkpoint)
from vtrkit.model.recommender import rank_scores
from vtrkit.synthgen import CorpusConfig, CorpusManifest, build_corpus, filter_corpus, split_corpus
from vtrkit.train import (PreparedSamples, batch_loss, build_embedding_table, classifier_accuracy,
                          classifier_embeddings, load_video_samples, predict_scores,
                          pretrain_transition_classifier, sample_loss, train_preset, train_recommender,
                          transition_clip_dataset)

CONFIGS = Path(__file__).resolve().parent.parent / "configs"
WIPES = [0, 1, 2, 3]  # left, right, up, down
OTHERS = [4, 5, 6, 7]


def record(n, ok, detail):
    ACCEPTANCE_RESULTS[n] = (bool(ok), detail)


# -- shared artifacts ------------------------------------------------------------

@pytest.fixture(scope="session")
def cache_root(tmp_path_factory):
    env = os.environ.get("VTRKIT_ACCEPTANCE_CACHE")
    if env:
        Path(env).mkdir(parents=True, exist_ok=True)
        return Path(env)
    return tmp_path_factory.mktemp("acceptance")


def corpus_from_config(cache_root, name):
    """Build (or reuse) the corpus described by ``configs/<name>.yaml``."""
    raw = yaml.safe_load((CONFIGS / f"{name}.yaml").read_text())
    cfg = CorpusConfig.from_dict(raw["corpus"])
    fraction, split_seed = raw.get("test_fraction", 0.2), raw.get("split_seed", cfg.seed)
    out = cache_root / name
    stamp = out / "acceptance_stamp.json"
    key = {"digest": cfg.digest(), "fraction": fraction, "split_seed": split_seed}
    if stamp.exists() and json.loads(stamp.read_text()) == key:
        return out, CorpusManifest.load(out / "manifest.jsonl")
    if out.exists():
        import shutil
        shutil.rmtree(out)
    built = filter_corpus(build_corpus(cfg, out), cfg.distinct_types_threshold, cfg.max_same_type,
                          cfg.max_duration_s)
    manifest = split_corpus(built, fraction, split_seed)
    manifest.save(out / "manifest.jsonl")
    stamp.write_text(json.dumps(key))
    return out, manifest


def pretrained(cache_root, corpus_dir, manifest, tag):
    """Classifier pre-training on the train split with the desk preset, cached per corpus."""
    mc = model_preset("desk", n_categories=manifest.category_count)
    tc = train_preset("desk", "pretrain")
    path = cache_root / f"{tag}_classifier.pt"
    clips, labels, _ = transition_clip_dataset(corpus_dir, manifest.split("train"), mc.clip_frames)
    key = {"corpus": manifest.config_digest, "model": mc.to_dict(), "train": tc.to_dict()}
    if path.exists():
        payload = load_checkpoint(path)
        if payload["extra"].get("key") == key:
            model = TransitionClassifier(mc)
            model.load_state_dict(payload["state_dict"])
            model.eval()
            return model, clips, labels, payload["extra"]["seconds"]
    t0 = time.time()
    model, _ = pretrain_transition_classifier(clips, labels, mc, tc)
    seconds = time.time() - t0
    save_checkpoint(path, "classifier", mc, model.state_dict(), {"key": key, "seconds": seconds})
    return model, clips, labels, seconds


def backbone_of(model):
    return {k: v.clone() for k, v in model.backbone.state_dict().items()}


@pytest.fixture(scope="session")
def desk(cache_root):
    out, manifest = corpus_from_config(cache_root, "corpus_desk")
    model, clips, labels, secs = pretrained(cache_root, out, manifest, "desk")
    table = build_embedding_table(model, clips, labels, manifest.categories)
    return {"dir": out, "manifest": manifest, "classifier": model, "clips": clips, "labels": labels,
            "table": table, "pretrain_s": secs}


@pytest.fixture(scope="session")
def desk_result(desk):
    """Criterion-6 recommender: desk presets, backbone from the classifier, held-out Recall@1."""
    mc = model_preset("desk", d_transition=desk["table"].dim)
    tc = train_preset("desk", "recommender")
    t0 = time.time()
    train = load_video_samples(desk["dir"], desk["manifest"].split("train"), mc)
    test = load_video_samples(desk["dir"], desk["manifest"].split("test"), mc)
    model, report = train_recommender(train, desk["table"], mc, tc, backbone_state=backbone_of(desk["classifier"]))
    scores, labels, _ = predict_scores(model, PreparedSamples(model, test))
    return {"metrics": metrics_from_scores(scores, labels), "seconds": time.time() - t0,
            "n_train": len(train), "n_test": len(test), "report": report}


# -- 1. metric oracle ------------------------------------------------------------

def _brute_rank(row, truth):
    better = sum(1 for k, s in enumerate(row) if s > row[truth] or (s == row[truth] and k < truth))
    return better + 1


def test_criterion_01_metric_oracle():
    t0 = time.time()
    rng = np.random.default_rng(2024)
    mismatches = 0
    for i in range(1000):
        V = int(rng.integers(1, 16))
        scores = rng.normal(size=(V, 30))
        if i % 3 == 0:
            scores = np.round(scores, 1)  # many ties
        if i % 50 == 0:
            scores[:] = 0.0  # every score tied
        labels = rng.integers(0, 30, size=V)
        ranks = np.array([_brute_rank(r, t) for r, t in zip(scores, labels)])
        rankings = rank_scores(scores)
        got = (recall_at_k(rankings, labels, 1), recall_at_k(rankings, labels, 5), mean_rank(rankings, labels))
        want = (np.mean(ranks <= 1), np.mean(ranks <= 5), np.mean(ranks))
        mismatches += got != want
    perms = np.argsort(rng.random((10_000, 30)), axis=1)
    mc = mean_rank(perms, rng.integers(0, 30, size=10_000))
    secs = time.time() - t0
    ok = mismatches == 0 and abs(mc - 15.5) <= 0.3 and secs < 60
    record(1, ok, f"mismatches {mismatches}/1000, random mean rank {mc:.3f} (15.5 +- 0.3), {secs:.1f}s")
    assert mismatches == 0
    assert abs(mc - 15.5) <= 0.3
    assert secs < 60


# -- 2. loss arithmetic ----------------------------------------------------------

def test_criterion_02_loss_arithmetic():
    t0 = time.time()
    table = [[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0]]
    l0 = sample_loss([1.0, 0.0], table, 0, 0.3).item()
    l1 = sample_loss([0.0, 1.0], table, 0, 0.3).item()
    lb = batch_loss([[1.0, 0.0], [0.0, 1.0]], table, [0, 0], 0.3).item()
    hand_ok = abs(l0) <= 1e-6 and abs(l1 - 0.8) <= 1e-6 and abs(lb - 0.4) <= 1e-6
    rng = np.random.default_rng(7)
    negative = wrong_zero = 0
    for _ in range(10_000):
        N, d = int(rng.integers(2, 12)), int(rng.integers(1, 9))
        a, t = rng.normal(size=d), rng.normal(size=(N, d))
        c, margin = int(rng.integers(N)), float(rng.uniform(0.05, 1.0))
        loss = sample_loss(a, t, c, margin).item()
        s = t @ a
        satisfied = all(s[c] >= s[k] + margin for k in range(N) if k != c)
        negative += loss < 0
        wrong_zero += (loss == 0.0) != satisfied
    secs = time.time() - t0
    ok = hand_ok and negative == 0 and wrong_zero == 0 and secs < 60
    record(2, ok, f"losses {l0:.6f}/{l1:.6f}/{lb:.6f} (0/0.8/0.4), negative {negative}, "
                  f"zero-loss mismatches {wrong_zero} of 10000, {secs:.1f}s")
    assert hand_ok and negative == 0 and wrong_zero == 0 and secs < 60


# -- 3. gradient check -----------------------------------------------------------

def _projected_loss(raw_q, w_q, w_t, table, labels, margin):
    return batch_loss(raw_q @ w_q.T, table @ w_t.T, labels, margin)


def test_criterion_03_gradient_check():
    t0 = time.time()
    rng = np.random.default_rng(11)
    d, N, V, margin, eps = 8, 5, 4, 0.3, 1e-6
    worst, checked, skipped = 0.0, 0, 0
    while checked < 100:
        q, wq, wt = rng.normal(size=(V, d)), rng.normal(size=(d, d)) / 3, rng.normal(size=(d, d)) / 3
        table, labels = rng.normal(size=(N, d)), rng.integers(0, N, size=V)
        # the hinge is not differentiable where a term's argument is 0; central
        # differences are only meaningful away from it
        s = (q @ wq.T) @ (table @ wt.T).T
        args = s - s[np.arange(V), labels][:, None] + margin
        args[np.arange(V), labels] = np.inf
        if np.min(np.abs(args)) < 1e-3:
            skipped += 1
            continue
        tq, twq, twt = (torch.tensor(x, dtype=torch.float64, requires_grad=True) for x in (q, wq, wt))
        tt = torch.tensor(table, dtype=torch.float64)
        _projected_loss(tq, twq, twt, tt, labels, margin).backward()
        for name, arr, grad in (("q", q, tq.grad), ("wq", wq, twq.grad), ("wt", wt, twt.grad)):
            num = np.zeros_like(arr)
            for idx in np.ndindex(arr.shape):
                plus, minus = arr.copy(), arr.copy()
                plus[idx] += eps
                minus[idx] -= eps
                inputs = {"q": q, "wq": wq, "wt": wt}
                f = []
                for variant in (plus, minus):
                    inputs[name] = variant
                    f.append(_projected_loss(*(torch.tensor(inputs[k]) for k in ("q", "wq", "wt")),
                                             torch.tensor(table), labels, margin).item())
                num[idx] = (f[0] - f[1]) / (2 * eps)
            ana = grad.numpy()
            scale = max(np.linalg.norm(ana), np.linalg.norm(num))
            if scale > 0:
                worst = max(worst, np.linalg.norm(ana - num) / scale)
        checked += 1
    secs = time.time() - t0
    ok = worst <= 1e-4 and secs < 120
    record(3, ok, f"max relative error {worst:.2e} (<= 1e-4) over {checked} instances "
                  f"({skipped} near-hinge draws redrawn), {secs:.1f}s")
    assert worst <= 1e-4 and secs < 120


# -- 4. renderer invariants ------------------------------------------------------

MIRRORS = [("left", "right", 1), ("up", "down", 0), ("up left", "up right", 1), ("down left", "down right", 1),
           ("up left", "down left", 0), ("up right", "down right", 0), ("push left", "push right", 1),
           ("push up", "push down", 0), ("horizontal split", "horizontal split", 1),
           ("vertical split", "vertical split", 0)]


def test_criterion_04_renderer_invariants():
    t0 = time.time()
    rng = np.random.default_rng(3)
    cats = list_categories(MAX_CATEGORIES, direct_cut=True)
    failures = []
    ts = np.linspace(0.0, 1.0, 17)
    for trial in range(4):
        a = rng.random((16, 16, 3), dtype=np.float32)
        b = rng.random((16, 16, 3), dtype=np.float32)
        for cat in cats:
            if np.abs(blend_frame(a, b, cat, 0.0) - a).max() > 1e-6:
                failures.append(f"{cat.name}: t=0")
            if np.abs(blend_frame(a, b, cat, 1.0) - b).max() > 1e-6:
                failures.append(f"{cat.name}: t=1")
            for t in ts:
                f = blend_frame(a, b, cat, t)
                if f.min() < 0 or f.max() > 1 or f.shape != a.shape:
                    failures.append(f"{cat.name}: range at t={t:.2f}")
        for x, y, axis in MIRRORS:
            cx, cy = category_by_name(x), category_by_name(y)
            for t in ts:
                mirrored = np.flip(blend_frame(np.flip(a, axis), np.flip(b, axis), cx, t), axis)
                if np.abs(mirrored - blend_frame(a, b, cy, t)).max() > 1e-6:
                    failures.append(f"mirror {x}/{y} at t={t:.2f}")
        # compose / extract round trip with random labels, direct cut included
        shots = [Shot(rng.random((int(rng.integers(18, 30)), 16, 16, 3), dtype=np.float32), 16.0)
                 for _ in range(5)]
        labels = [cats[int(rng.integers(len(cats)))] for _ in range(4)]
        video = compose_edited_video(shots, labels, None, 0.5)
        segs = extract_uncontaminated_segments(video)
        for k, (seg, (left, right)) in enumerate(segs):
            head = 0 if k == 0 or labels[k - 1].is_cut else 8
            tail = 0 if k == 4 or labels[k].is_cut else 8
            if not np.array_equal(seg.frames, shots[k].frames[head:len(shots[k].frames) - tail]):
                failures.append(f"segment {k} differs from its shot interior")
            if left != (labels[k - 1].id if k else None) or right != (labels[k].id if k < 4 else None):
                failures.append(f"segment {k} neighbour labels")
        rebuilt = EditedVideo.from_timeline(video.frames, video.fps, video.annotations)
        for c0, c1 in zip(video.clips, rebuilt.clips):
            if not np.array_equal(c0.frames, c1.frames):
                failures.append("clip round trip")
    secs = time.time() - t0
    ok = not failures and secs < 120
    record(4, ok, f"{len(cats)} categories x 4 frame pairs, {len(MIRRORS)} mirror pairs, round trips; "
                  f"{len(failures)} violations, {secs:.1f}s")
    assert not failures, failures[:10]
    assert secs < 120


# -- 5. filter correctness -------------------------------------------------------

def test_criterion_05_filter(tmp_path):
    t0 = time.time()
    raw = yaml.safe_load((CONFIGS / "corpus_longtail.yaml").read_text())
    cfg = CorpusConfig.from_dict(raw["corpus"])
    manifest = build_corpus(cfg, tmp_path / "longtail")
    kept = filter_corpus(manifest, 2, 6, 60.0)
    bad = []
    for r in kept.records:
        labels = r.labels
        if not labels:
            bad.append((r.video_id, "no transitions"))
        elif max(Counter(labels).values()) > 6:
            bad.append((r.video_id, "more than six"))
        elif len(set(labels)) < 2:
            bad.append((r.video_id, "distinct types"))
        elif r.duration_s > 60.0:
            bad.append((r.video_id, "duration"))
    kept_ids = {r.video_id for r in kept.records}
    dropped = [r for r in manifest.records if r.video_id not in kept_ids]
    wrongly_dropped = [r.video_id for r in dropped
                       if r.labels and len(set(r.labels)) >= 2 and max(Counter(r.labels).values()) <= 6
                       and r.duration_s <= 60.0]
    idempotent = filter_corpus(kept, 2, 6, 60.0).dumps() == kept.dumps()
    secs = time.time() - t0
    ok = len(manifest.records) == 500 and not bad and not wrongly_dropped and idempotent and secs < 120
    record(5, ok, f"500 videos, kept {len(kept.records)}, dropped {len(dropped)}; violations {len(bad)}, "
                  f"wrongly dropped {len(wrongly_dropped)}, idempotent {idempotent}, {secs:.1f}s")
    assert len(manifest.records) == 500 and not bad and not wrongly_dropped and idempotent and secs < 120
    assert dropped, "the long-tail corpus should exercise the filter"


# -- 6. end-to-end learnability --------------------------------------------------

def test_criterion_06_learnability(desk, desk_result):
    acc = classifier_accuracy(desk["classifier"], desk["clips"], desk["labels"])
    r1 = desk_result["metrics"].recall_at[1]
    secs = desk["pretrain_s"] + desk_result["seconds"]
    ok = (acc >= 0.95 and r1 >= 0.80 and desk_result["n_train"] == 400 and desk_result["n_test"] == 100
          and secs <= 1800)
    record(6, ok, f"pretrain train accuracy {acc:.4f} (>= 0.95), held-out Recall@1 {r1:.4f} (>= 0.80, chance "
                  f"0.125), {desk_result['n_train']}/{desk_result['n_test']} videos, train time {secs:.0f}s")
    assert desk_result["n_train"] == 400 and desk_result["n_test"] == 100
    assert acc >= 0.95
    assert r1 >= 0.80
    assert secs <= 1800


# -- 7. ablation ordering --------------------------------------------------------

def test_criterion_07_ablation_ordering(cache_root):
    t0 = time.time()
    out, manifest = corpus_from_config(cache_root, "corpus_context")
    model, clips, labels, _ = pretrained(cache_root, out, manifest, "context")
    table = build_embedding_table(model, clips, labels, manifest.categories)
    data = AblationData(out, table, backbone_of(model))
    specs = {"full": AblationSpec("ctx-visual+audio"),
             "visual": AblationSpec("ctx-visual", modalities=["visual"]),
             "audio": AblationSpec("ctx-audio", modalities=["audio"]),
             "no_context": AblationSpec("noctx-visual+audio", context=False),
             "random": AblationSpec("random-noproj", embedding_init="random", projection=False)}
    base = model_preset("desk", d_transition=table.dim)
    rows = run_ablation_grid(list(specs.values()), data, base, train_preset("desk", "recommender"), seeds=[0, 1, 2])
    failed = [r.error for r in rows if not r.ok]
    mean = {key: float(np.mean([r.report.recall_at[1] for r in rows if r.ok and r.spec.label == s.label]))
            for key, s in specs.items()}
    gaps = {"full-visual": mean["full"] - mean["visual"], "full-audio": mean["full"] - mean["audio"],
            "context": mean["full"] - mean["no_context"], "pretrained-random": mean["full"] - mean["random"]}
    secs = time.time() - t0
    ok = not failed and all(g > 0.02 for g in gaps.values()) and secs <= 7200
    record(7, ok, "Recall@1 means " + ", ".join(f"{k} {v:.3f}" for k, v in mean.items()) + "; gaps "
           + ", ".join(f"{k} {v * 100:+.1f}pp" for k, v in gaps.items()) + f" (> 2pp), {secs:.0f}s")
    assert not failed, failed
    for name, gap in gaps.items():
        assert gap > 0.02, f"{name} gap {gap:.4f}"
    assert secs <= 7200


# -- 8. embedding structure ------------------------------------------------------

def test_criterion_08_embedding_structure(desk, tmp_path):
    t0 = time.time()
    gap = family_cosine_gap(desk["table"].embeddings, WIPES, OTHERS)
    emb, _ = classifier_embeddings(desk["classifier"], desk["clips"])
    rep = embedding_projection_report(emb, desk["labels"], desk["manifest"].categories, tmp_path, "clips")
    rendered = rep.paths["png"].exists() and rep.paths["png"].stat().st_size > 0
    secs = time.time() - t0 + desk["pretrain_s"]
    ok = gap["gap"] >= 0.1 and rendered and secs <= 900
    record(8, ok, f"wipe intra cosine {gap['intra']:.3f}, cross {gap['cross']:.3f}, gap {gap['gap']:.3f} "
                  f"(>= 0.1); projection rendered {rendered} ({rep.method}, {int(rep.kept.sum())} points), "
                  f"{secs:.0f}s")
    assert rendered
    assert secs <= 900
    assert gap["gap"] >= 0.1, gap


# -- 9. padding / positional invariants --------------------------------------------

def test_criterion_09_padding_positional_frozen():
    t0 = time.time()
    cfg = model_preset("desk")
    torch.manual_seed(0)
    model = Recommender(cfg, random_table(cfg.n_categories, cfg.d_transition)).eval()
    g = torch.Generator().manual_seed(1)
    lengths = [3, 5, 2]
    L = int(cfg.audio_window_s * cfg.sample_rate)

    def batch(pad_to):
        S = pad_to
        vis = torch.zeros(3, S, cfg.n_frames, cfg.frame_size, cfg.frame_size, 3, dtype=torch.uint8)
        aud = torch.zeros(3, S, L)
        mask = torch.zeros(3, S, dtype=torch.bool)
        pairs, labels = [], []
        for i, n in enumerate(lengths):
            gi = torch.Generator().manual_seed(10 + i)
            vis[i, :n] = torch.randint(0, 256, (n, cfg.n_frames, cfg.frame_size, cfg.frame_size, 3), generator=gi,
                                       dtype=torch.uint8)
            aud[i, :n] = 0.1 * torch.randn(n, L, generator=gi)
            mask[i, :n] = True
            pairs += [(i, k) for k in range(n - 1)]
            labels += [k % cfg.n_categories for k in range(n - 1)]
        return ShotBatch(mask, torch.tensor(pairs), torch.tensor(labels), vis, aud, mask.clone())

    with torch.no_grad():
        outs = [model(batch(p)) for p in (5, 7, cfg.max_shots)]
        tok = []
        for p in (5, cfg.max_shots):
            b = batch(p)
            v, a = model.encode_shots(b)
            tokens, pad = model.assemble_tokens(v, a, b.shot_mask)
            ctx = model.fuse_tokens(tokens, pad)
            tok.append((ctx, ~pad))
    pad_err = max(float((o["e_video"] - outs[0]["e_video"]).abs().max()) for o in outs[1:])
    pad_err = max(pad_err, max(float((o["scores"] - outs[0]["scores"]).abs().max()) for o in outs[1:]))
    ctx_short, real_short = tok[0]
    ctx_long, _ = tok[1]
    n_slots = ctx_short.shape[1]
    token_err = float((ctx_long[:, :n_slots][real_short] - ctx_short[real_short]).abs().max())

    # positional identity: the two tokens of shot s depend on pos_embedding only
    # through row s, each with an identity Jacobian
    v = torch.randn(1, 4, cfg.d_visual)
    a = torch.randn(1, 4, cfg.d_audio)
    tokens, _ = model.assemble_tokens(v, a, torch.ones(1, 4, dtype=torch.bool))
    pos_err = 0.0
    for s in range(4):
        for slot in (2 * s, 2 * s + 1):
            for j in range(0, cfg.d_model, 17):
                (grad,) = torch.autograd.grad(tokens[0, slot, j], model.pos_embedding, retain_graph=True)
                want = torch.zeros_like(grad)
                want[s, j] = 1.0
                pos_err = max(pos_err, float((grad - want).abs().max()))
    shared = [n for n, _ in model.named_parameters() if "pos" in n] == ["pos_embedding"]

    # frozen stages: exactly zero gradient; later stages non-zero
    train_model = Recommender(cfg, random_table(cfg.n_categories, cfg.d_transition)).train()
    train_model(batch(5))["scores"].square().sum().backward()
    enc = train_model.visual_encoder
    frozen_nonzero = sum(int(p.grad is not None and torch.count_nonzero(p.grad) > 0)
                         for st in enc.stages[:enc.frozen_stages] for p in st.parameters())
    later_zero = sum(int(p.grad is None or torch.count_nonzero(p.grad) == 0)
                     for st in enc.stages[enc.frozen_stages:] for p in st.parameters())
    secs = time.time() - t0
    ok = (pad_err <= 1e-5 and token_err <= 1e-5 and pos_err == 0.0 and shared and frozen_nonzero == 0
          and later_zero == 0 and enc.frozen_stages > 0 and secs < 120)
    record(9, ok, f"padding max diff {max(pad_err, token_err):.2e} (<= 1e-5), positional identity error "
                  f"{pos_err:.1e}, frozen stages {enc.frozen_stages} with {frozen_nonzero} non-zero grads, "
                  f"{later_zero} dead trainable params, {secs:.1f}s")
    assert pad_err <= 1e-5 and token_err <= 1e-5
    assert pos_err == 0.0 and shared
    assert enc.frozen_stages > 0 and frozen_nonzero == 0 and later_zero == 0
    assert secs < 120


# -- 10. direct cut extension ----------------------------------------------------

def test_criterion_10_direct_cut(cache_root, desk_result):
    t0 = time.time()
    out, manifest = corpus_from_config(cache_root, "corpus_direct_cut")
    model, clips, labels, pre_s = pretrained(cache_root, out, manifest, "direct_cut")
    table = build_embedding_table(model, clips, labels, manifest.categories)
    mc = model_preset("desk", n_categories=manifest.category_count, d_transition=table.dim)
    train = load_video_samples(out, manifest.split("train"), mc)
    test = load_video_samples(out, manifest.split("test"), mc)
    rec, _ = train_recommender(train, table, mc, train_preset("desk", "recommender"),
                               backbone_state=backbone_of(model))
    scores, y, _ = predict_scores(rec, PreparedSamples(rec, test))
    r1 = metrics_from_scores(scores, y).recall_at[1]
    level = desk_result["metrics"].recall_at[1]
    n_cut = int(np.sum(y == manifest.category_count - 1))
    secs = time.time() - t0 + pre_s
    ok = manifest.category_count == 9 and r1 >= 0.7 * level and secs <= 1800
    record(10, ok, f"9 categories ({n_cut} held-out direct cuts), Recall@1 {r1:.4f} (>= 0.7 x {level:.4f} = "
                   f"{0.7 * level:.4f}), {secs:.0f}s")
    assert manifest.category_count == 9 and manifest.categories[-1] == "direct cut"
    assert r1 >= 0.7 * level
    assert secs <= 1800
