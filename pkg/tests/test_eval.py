import csv

import numpy as np
import pytest
import torch

from vtrkit.eval import (AblationData, AblationSpec, LAYOUTS, classical_mds, cosine_distances,
                         embedding_projection_report, evaluate_model, family_cosine_gap, format_comparison,
                         layout_specs, model_from_checkpoint, run_ablation_grid, save_model_checkpoint,
                         save_oracle_checkpoint, write_comparison)
from vtrkit.eval.ablation import AblationRow, aggregate
from vtrkit.eval.metrics import metrics_from_rankings
from vtrkit.model import load_checkpoint, random_table
from vtrkit.train import TrainConfig, load_video_samples, train_recommender

from test_train import tiny_model_config


def test_family_cosine_gap_by_hand():
    e = np.array([[1.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
    g = family_cosine_gap(e, [0, 1], [2])
    assert g == {"intra": 1.0, "cross": 0.0, "gap": 1.0}
    with pytest.raises(ValueError):
        family_cosine_gap(e, [0], [2])


def test_classical_mds_recovers_planar_distances():
    pts = np.array([[0.0, 0.0], [3.0, 0.0], [0.0, 4.0], [1.0, 1.0]])
    d = np.linalg.norm(pts[:, None] - pts[None], axis=-1)
    got = classical_mds(d)
    np.testing.assert_allclose(np.linalg.norm(got[:, None] - got[None], axis=-1), d, atol=1e-9)
    same = classical_mds(np.zeros((3, 3)))
    assert np.all(np.isfinite(same))


def test_cosine_distance_range():
    d = cosine_distances(np.array([[1.0, 0.0], [-1.0, 0.0], [0.0, 2.0]]))
    np.testing.assert_allclose(d, [[0, 2, 1], [2, 0, 1], [1, 1, 0]], atol=1e-12)


@pytest.mark.parametrize("n,method", [(5, "mds"), (40, "tsne")])
def test_projection_report_files(tmp_path, n, method):
    rng = np.random.default_rng(0)
    labels = np.repeat(np.arange(4), n // 4 + 1)[:n] if n > 8 else None
    emb = rng.normal(size=(n, 6))
    rep = embedding_projection_report(emb, labels, names=list("abcde"), out_dir=tmp_path, stem="p")
    assert rep.method == method and rep.coords.shape == (rep.kept.sum(), 2)
    rows = list(csv.reader(open(rep.paths["csv"])))
    assert rows[0] == ["point", "label", "name", "x", "y"] and len(rows) == rep.kept.sum() + 1
    assert rep.paths["png"].stat().st_size > 1000
    with pytest.raises(ValueError):
        embedding_projection_report(emb[:1])


def test_projection_drops_outliers():
    rng = np.random.default_rng(1)
    emb = rng.normal(size=(30, 4)) * 0.01
    emb[3] = 10.0
    rep = embedding_projection_report(emb, np.zeros(30, dtype=int))
    assert not rep.kept[3] and rep.kept.sum() == 29


def test_spec_configs():
    from vtrkit.model import model_preset
    base = model_preset("desk")
    cfg = AblationSpec(projection=False).model_config(base, 8)
    assert not cfg.use_projection and cfg.d_matching == cfg.d_transition
    assert AblationSpec(d_model=64).model_config(base, 8).dim_feedforward == 128
    with pytest.raises(ValueError):
        AblationSpec(freeze="some").validate()
    with pytest.raises(ValueError):
        AblationSpec.from_dict({"context": True, "layers": 3})
    spec = AblationSpec("x", modalities=["audio"])
    assert AblationSpec.from_dict(spec.to_dict()) == spec
    with pytest.raises(ValueError):
        layout_specs("table9")
    for name, lay in LAYOUTS.items():
        assert len(lay["specs"]) == len(lay["reference"]), name


def test_aggregate_and_format_with_failures(tmp_path):
    s1, s2 = AblationSpec("matching"), AblationSpec("classification", objective="classification")
    rep = metrics_from_rankings([[0, 1], [1, 0]], [0, 0])
    rows = [AblationRow(s1, 0, rep), AblationRow(s1, 1, rep), AblationRow(s2, 0, error="RuntimeError: boom")]
    agg = aggregate(rows)
    assert agg["matching"]["runs"] == 2 and agg["matching"]["mean"]["Mean Rank"] == pytest.approx(1.5)
    assert agg["classification"]["mean"] is None
    text = format_comparison(rows, "objective")
    assert "failed 1/1" in text and "0.2806" in text
    path = write_comparison(rows, "objective", tmp_path)
    header = next(csv.reader(open(path)))
    assert header[:4] == ["Method", "Recall@1", "Recall@5", "Mean Rank"]


@pytest.fixture(scope="module")
def trained(tiny_corpus, tmp_path_factory):
    out, manifest = tiny_corpus
    cfg = tiny_model_config()
    train = load_video_samples(out, manifest.split("train"), cfg)
    table = random_table(8, 16, seed=2, names=manifest.categories)
    model, _ = train_recommender(train, table, cfg, TrainConfig(epochs=2, initial_lr=1e-3, batch_size=8))
    path = save_model_checkpoint(tmp_path_factory.mktemp("ckpt") / "m.pt", model, table)
    return path, model


def test_checkpoint_reload_gives_same_scores(trained, tiny_corpus):
    path, model = trained
    out, _ = tiny_corpus
    payload = load_checkpoint(path)
    again = model_from_checkpoint(payload)
    for (n, a), (_, b) in zip(model.state_dict().items(), again.state_dict().items()):
        torch.testing.assert_close(a, b, msg=n)
    r1 = evaluate_model(path, out)
    r2 = evaluate_model(payload, out)
    assert r1.to_dict() == r2.to_dict() and r1.n_samples > 0
    assert payload["extra"]["table"]["names"][0] == "left"


def test_oracle_checkpoint_scores_perfectly(tmp_path, tiny_corpus):
    out, manifest = tiny_corpus
    path = save_oracle_checkpoint(tmp_path / "oracle.pt", tiny_model_config())
    rep = evaluate_model(path, out, split=None)
    assert rep.recall_at[1] == 1.0 and rep.mean_rank == 1.0


def test_evaluate_rejects_mismatched_corpus(trained, tmp_path, tiny_corpus):
    path, _ = trained
    out, _ = tiny_corpus
    payload = load_checkpoint(path)
    payload["model_config"].n_categories = 9
    with pytest.raises(ValueError):
        evaluate_model(payload, out)
    with pytest.raises(ValueError):
        evaluate_model(path, out, split="validation")


def test_grid_runs_and_records_failures(tiny_corpus):
    out, _ = tiny_corpus
    data = AblationData(out, random_table(8, 16, seed=0))
    # zero layers passes the spec check but is rejected when the model config is resolved
    specs = [AblationSpec("ok", modalities=["audio"]), AblationSpec("bad", n_layers=0)]
    rows = run_ablation_grid(specs, data, tiny_model_config(), TrainConfig(epochs=1, batch_size=8), seeds=[0, 1])
    assert [r.ok for r in rows] == [True, True, False, False]
    assert "n_layers" in rows[2].error
    assert rows[0].report.extra == {"spec": "ok", "seed": 0}
