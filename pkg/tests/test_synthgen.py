from collections import Counter

import numpy as np
import pytest

from vtrkit.fx import list_categories
from vtrkit.fx.io import load_edited_video
from vtrkit.synthgen import (BRIGHTNESS, MOTIONS, CorpusConfig, CorpusManifest, SceneSpec, build_corpus,
                             category_prior, corpus_stats, deterministic_labels, estimate_tempo,
                             filter_corpus, format_stats, generate_audio, generate_shot, record_violations,
                             rule_label, sample_transition_labels, split_corpus)
from vtrkit.synthgen.scenes import texture


def test_texture_tiles_and_spans_range():
    tex = texture(3, 32, 32)
    assert tex.shape == (32, 32, 3) and tex.min() >= 0 and tex.max() <= 1
    lum = tex.mean(axis=-1)
    assert lum.std() > 0.1


@pytest.mark.parametrize("motion", MOTIONS)
def test_generate_shot_is_deterministic(motion):
    spec = SceneSpec(motion, "bright", 11)
    a = generate_shot(spec, 1.0, 16, (24, 24))
    b = generate_shot(spec, 1.0, 16, (24, 24))
    assert a.frames.shape == (16, 24, 24, 3)
    np.testing.assert_array_equal(a.frames, b.frames)


def test_pan_shifts_texture_by_velocity():
    shot = generate_shot(SceneSpec("pan-left", "bright", 2), 0.5, 16, (16, 16), pan_velocity=2)
    np.testing.assert_allclose(shot.frames[3], np.roll(shot.frames[0], -6, axis=1), atol=1e-6)


def test_brightness_profiles_order():
    means = {b: generate_shot(SceneSpec("static", b, 4), 0.5, 16, (16, 16)).frames.mean() for b in BRIGHTNESS}
    assert means["dark"] < means["bright"]


def test_scene_spec_validation():
    with pytest.raises(ValueError):
        SceneSpec("spin", "bright", 0)
    with pytest.raises(ValueError):
        SceneSpec("static", "neon", 0)
    spec = SceneSpec("zoom-in", "dark", 9)
    assert SceneSpec.from_dict(spec.to_dict()) == spec


@pytest.mark.parametrize("bpm", [70.0, 96.0, 128.0, 150.0])
def test_energetic_tempo_recovered(bpm):
    track = generate_audio("energetic", bpm, 8.0, seed=int(bpm))
    assert abs(estimate_tempo(track) - bpm) / bpm < 0.03


def test_soft_audio_is_quiet():
    soft = generate_audio("soft", 70.0, 3.0, seed=1)
    loud = generate_audio("energetic", 120.0, 3.0, seed=1)
    assert np.abs(soft.samples).max() <= 0.3 + 1e-6
    assert np.abs(loud.samples).max() > 0.3
    with pytest.raises(ValueError):
        generate_audio("angry", 100.0, 1.0)


def test_rule_label_examples():
    cats = {c.name: c for c in list_categories(8, direct_cut=True)}
    pl = SceneSpec("pan-left", "bright", 0)
    st = SceneSpec("static", "bright", 1)
    dk = SceneSpec("static", "dark", 2)
    fl = SceneSpec("static", "flash", 3)
    assert rule_label(pl, pl, "soft", cats) == "left"
    assert rule_label(st, fl, "soft", cats) == "floodlight"
    assert rule_label(st, pl, "energetic", cats) == "left"
    assert rule_label(st, pl, "soft", cats) == "mix"
    assert rule_label(st, st, "energetic", cats) == "direct cut"
    assert rule_label(st, dk, "soft", cats) == "black fade"


def test_sequential_rule_closes_with_fade():
    cats = list_categories(8)
    specs = [SceneSpec("pan-left", "bright", i) for i in range(4)]
    plain = deterministic_labels(specs, "soft", cats)
    seq = deterministic_labels(specs, "soft", cats, sequential=True)
    assert [c.name for c in plain] == ["left"] * 3
    assert [c.name for c in seq] == ["left", "left", "black fade"]


def test_stochastic_policy_is_seeded_and_avoids_repeats():
    specs = [SceneSpec(m, "bright", i) for i, m in enumerate(MOTIONS)]
    a = sample_transition_labels(specs, "energetic", "stochastic", seed=3, sequential=True)
    b = sample_transition_labels(specs, "energetic", "stochastic", seed=3, sequential=True)
    assert [c.id for c in a] == [c.id for c in b]
    assert all(x.id != y.id for x, y in zip(a, a[1:]))
    with pytest.raises(ValueError):
        sample_transition_labels(specs, "soft", "greedy")
    with pytest.raises(ValueError):
        sample_transition_labels(specs[:1], "soft")


def test_category_prior_shapes():
    np.testing.assert_allclose(category_prior(4), 0.25)
    z = category_prior(30, "zipf", 1.2)
    assert z.sum() == pytest.approx(1.0) and np.all(np.diff(z) < 0)
    with pytest.raises(ValueError):
        category_prior(3, "gauss")


def test_config_validation():
    with pytest.raises(ValueError):
        CorpusConfig(shots_min=1).validate()
    with pytest.raises(ValueError):
        CorpusConfig(shot_duration_min_s=0.5).validate()
    with pytest.raises(ValueError):
        CorpusConfig.from_dict({"n_video": 3})


def test_planted_oracle_is_exact(tiny_corpus):
    _, manifest = tiny_corpus
    cats = list_categories(manifest.category_count)
    for r in manifest.records:
        pred = [c.id for c in deterministic_labels(r.scene_specs, r.audio["mood"], cats)]
        assert pred == r.labels


def test_manifest_matches_media(tiny_corpus):
    out, manifest = tiny_corpus
    for r in manifest.records[:5]:
        video = load_edited_video(out / "media", r.video_id)
        assert [a.label for a in video.annotations] == r.labels
        assert len(video.frames) == pytest.approx(r.duration_s * r.fps)
        for seg, (s, e) in zip(video.shot_segments, r.shots):
            assert seg.start_s == pytest.approx(s) and seg.end_s == pytest.approx(e)


def test_build_is_deterministic_and_loads(tmp_path):
    cfg = CorpusConfig(n_videos=6, write_media=False, seed=9)
    m1 = build_corpus(cfg, tmp_path / "a")
    m2 = build_corpus(cfg, tmp_path / "b")
    assert m1.dumps() == m2.dumps()
    loaded = CorpusManifest.load(tmp_path / "a" / "manifest.jsonl")
    assert loaded.dumps() == m1.dumps()
    assert loaded.config_digest == cfg.digest()


def test_failed_build_leaves_no_partial_output(tmp_path, monkeypatch):
    import vtrkit.synthgen.corpus as corpus

    calls = {"n": 0}
    real = corpus.render_record

    def flaky(*args, **kwargs):
        calls["n"] += 1
        if calls["n"] == 3:
            raise RuntimeError("disk full")
        return real(*args, **kwargs)

    monkeypatch.setattr(corpus, "render_record", flaky)
    out = tmp_path / "broken"
    with pytest.raises(RuntimeError):
        build_corpus(CorpusConfig(n_videos=5, height=16, width=16), out)
    assert not out.exists()


def test_filter_rules_and_idempotence(tmp_path):
    cfg = CorpusConfig(n_videos=60, write_media=False, policy="prior", category_prior="zipf", zipf_exponent=2.5,
                       n_categories=30, shots_min=2, shots_max=9, seed=1)
    manifest = build_corpus(cfg, tmp_path)
    kept = filter_corpus(manifest)
    assert 0 < len(kept.records) < len(manifest.records)
    for r in kept.records:
        assert record_violations(r, manifest.category_count) == []
        assert 1 <= len(r.labels) and len(set(r.labels)) >= 2
        assert max(Counter(r.labels).values()) <= 6 and r.duration_s <= 60
    assert filter_corpus(kept).dumps() == kept.dumps()


def test_violations_are_named(tiny_corpus):
    _, manifest = tiny_corpus
    r = manifest.records[0]
    from dataclasses import replace
    from vtrkit.fx import Annotation
    same = replace(r, annotations=[Annotation(4, 0, 0)] * 7, duration_s=61.0)
    problems = record_violations(same, 8)
    assert {"too few distinct types", "type used too often", "too long"} <= set(problems)
    assert "no transitions" in record_violations(replace(r, annotations=[]), 8)
    assert "label outside registered categories" in record_violations(
        replace(r, annotations=[Annotation(0, 0, 0), Annotation(9, 0, 0)]), 8)


def test_split_and_stats(tiny_corpus):
    _, manifest = tiny_corpus
    n = len(manifest.records)
    assert len(manifest.split("test")) == round(0.25 * n)
    again = split_corpus(manifest, 0.25, 0)
    assert [r.split for r in again.records] == [r.split for r in manifest.records]
    stats = corpus_stats(manifest)
    assert stats["all"]["videos"] == n
    assert stats["train"]["transitions"] + stats["test"]["transitions"] == stats["all"]["transitions"]
    assert sum(stats["all"]["histogram"].values()) == stats["all"]["transitions"]
    text = format_stats(stats, manifest.categories)
    assert "Transitions per video" in text and "black fade" in text
    with pytest.raises(ValueError):
        split_corpus(manifest, 1.0)
    with pytest.raises(ValueError):
        corpus_stats(manifest.with_records([]))
