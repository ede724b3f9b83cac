import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from vtrkit import kernels
from vtrkit import _kernels_py

needs_ext = pytest.mark.skipif("cython" not in kernels.available_backends(), reason="extension not built")


def _frames(seed, h, w):
    r = np.random.default_rng(seed)
    return r.random((h, w, 3), dtype=np.float32), r.random((h, w, 3), dtype=np.float32), r.random((h, w), dtype=np.float32)


@needs_ext
@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 10_000), h=st.integers(2, 20), w=st.integers(2, 20),
       scale=st.floats(0.3, 3.0), angle=st.floats(-3.2, 3.2))
def test_warp_backends_agree(seed, h, w, scale, angle):
    a, _, _ = _frames(seed, h, w)
    fast = kernels.get_backend("cython").warp_affine(a, scale, angle)
    slow = _kernels_py.warp_affine(a, scale, angle)
    np.testing.assert_allclose(fast, slow, atol=1e-6)


@needs_ext
@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 10_000), h=st.integers(1, 20), w=st.integers(1, 20),
       rx=st.integers(0, 6), ry=st.integers(0, 6))
def test_blur_backends_agree(seed, h, w, rx, ry):
    a, _, _ = _frames(seed, h, w)
    np.testing.assert_allclose(kernels.get_backend("cython").box_blur(a, rx, ry),
                               _kernels_py.box_blur(a, rx, ry), atol=1e-6)


@needs_ext
@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 10_000), ga=st.floats(0, 2), gb=st.floats(0, 2), off=st.floats(-1, 1),
       light=st.floats(0, 2))
def test_composite_backends_agree(seed, ga, gb, off, light):
    a, b, m = _frames(seed, 9, 7)
    fast = kernels.get_backend("cython").composite(a, b, m, ga, gb, off, light, m)
    slow = _kernels_py.composite(a, b, m, ga, gb, off, light, m)
    np.testing.assert_allclose(fast, slow, atol=1e-6)


def test_identity_warp_and_zero_blur():
    a, _, _ = _frames(0, 8, 11)
    np.testing.assert_allclose(kernels.warp_affine(a, 1.0, 0.0), a, atol=1e-6)
    np.testing.assert_allclose(kernels.box_blur(a, 0, 0), a, atol=1e-7)


def test_blur_preserves_constant_image():
    a = np.full((6, 5, 3), 0.3, dtype=np.float32)
    np.testing.assert_allclose(kernels.box_blur(a, 3, 2), a, atol=1e-6)


def test_composite_clips_to_unit_range():
    a, b, m = _frames(1, 5, 5)
    out = kernels.composite(a, b, m, 2.0, 2.0, 0.5, 1.0, m)
    assert out.min() >= 0.0 and out.max() <= 1.0 and out.dtype == np.float32


def test_unknown_backend_rejected():
    with pytest.raises(ValueError):
        kernels.get_backend("fortran")


def test_pure_python_switch_selects_fallback():
    env = dict(os.environ, VTRKIT_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "import vtrkit.kernels as k; print(k.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"
