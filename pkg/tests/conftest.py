import numpy as np
import pytest
import torch

from vtrkit.fx import Shot
from vtrkit.synthgen import CorpusConfig, build_corpus, split_corpus

# criterion number -> (passed, detail); filled by tests/test_acceptance.py
ACCEPTANCE_RESULTS = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE_RESULTS):
        ok, detail = ACCEPTANCE_RESULTS[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")


@pytest.fixture(autouse=True)
def _single_thread():
    torch.set_num_threads(1)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def random_shot(rng, n=12, h=16, w=16, fps=16.0):
    return Shot(rng.random((n, h, w, 3), dtype=np.float32), fps)


@pytest.fixture(scope="session")
def tiny_corpus(tmp_path_factory):
    """A rendered 40-video corpus at 32 x 32, split 75/25."""
    out = tmp_path_factory.mktemp("tiny_corpus")
    cfg = CorpusConfig(n_videos=40, height=32, width=32, enforce_filter_rules=True, seed=5)
    manifest = split_corpus(build_corpus(cfg, out), 0.25, 0)
    manifest.save(out / "manifest.jsonl")
    return out, manifest
