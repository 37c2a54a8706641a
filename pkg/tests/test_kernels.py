import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from viewmix import kernels
from viewmix.errors import ParameterError
from viewmix.transforms import gaussian_kernel

import oracles

PY = kernels.get_backend("python")
HAVE_C = "cython" in kernels.available_backends()
needs_c = pytest.mark.skipif(not HAVE_C, reason="compiled extension not built")


def _img(shape, dtype):
    if dtype == np.uint8:
        return hnp.arrays(np.uint8, shape)
    return hnp.arrays(np.float32, shape, elements=st.floats(0, 1, width=32))


def image_arrays(dtype=np.float32, channels=(1, 3)):
    shapes = st.tuples(st.integers(1, 12), st.integers(1, 12), st.sampled_from(channels))
    return shapes.flatmap(lambda s: _img(s, dtype))


def test_backend_selection():
    assert kernels.BACKEND in ("cython", "python")
    assert "python" in kernels.available_backends()
    with pytest.raises(ParameterError):
        kernels.get_backend("fortran")


def test_use_backend_restores():
    before = kernels.impl
    with kernels.use_backend("python") as k:
        assert kernels.impl is k is PY
        assert kernels.BACKEND == "python"
    assert kernels.impl is before


# -- numpy fallback against oracles ------------------------------------------

def test_resize_matches_scalar_oracle():
    rng = np.random.default_rng(0)
    src = rng.random((7, 9, 3)).astype(np.float32)
    for oh, ow in [(7, 9), (4, 4), (13, 5), (1, 1)]:
        got = PY.resize_bilinear(src, 0, 0, 7, 9, oh, ow)
        np.testing.assert_allclose(got, oracles.bilinear_sample(src, oh, ow), atol=1e-6)


def test_resize_identity_at_same_size():
    src = np.random.default_rng(1).integers(0, 256, (5, 6, 3), dtype=np.uint8)
    np.testing.assert_array_equal(PY.resize_bilinear(src, 0, 0, 5, 6, 5, 6), src)


def test_blur_dense_oracle():
    rng = np.random.default_rng(2)
    src = rng.random((8, 8, 3)).astype(np.float32)
    for sigma in (0.1, 0.7, 2.0):
        k = gaussian_kernel(sigma)
        np.testing.assert_allclose(PY.blur_separable(src, k), oracles.blur_dense(src, k), atol=1e-5)


def test_hue_matches_colorsys():
    rng = np.random.default_rng(3)
    src = rng.random((6, 7, 3)).astype(np.float32)
    src[0, 0] = 0.25  # achromatic
    for shift in (-0.5, -0.2, 0.0, 0.13, 0.5):
        got = PY.adjust_hue(src, shift)
        np.testing.assert_allclose(got, oracles.hue_shift_colorsys(src, shift), atol=1e-6)


def test_grayscale_luma():
    src = np.random.default_rng(4).random((3, 3, 3)).astype(np.float32)
    g = PY.grayscale(src)
    np.testing.assert_allclose(g[..., 0], oracles.luma(src.astype(np.float64)), atol=1e-6)
    assert np.array_equal(g[..., 0], g[..., 1]) and np.array_equal(g[..., 1], g[..., 2])


# -- cross-backend bit identity ----------------------------------------------

def _both(name, *args):
    c = getattr(kernels.get_backend("cython"), name)(*args)
    p = getattr(PY, name)(*args)
    return c, p


def _same(c, p):
    if isinstance(c, float):
        assert c == p
        return
    assert c.dtype == p.dtype and c.shape == p.shape
    assert c.tobytes() == p.tobytes()


@needs_c
@given(image_arrays(np.uint8) | image_arrays(np.float32), st.data())
def test_resize_identical(src, data):
    h, w = src.shape[:2]
    top = data.draw(st.integers(0, h - 1))
    left = data.draw(st.integers(0, w - 1))
    ch = data.draw(st.integers(1, h - top))
    cw = data.draw(st.integers(1, w - left))
    oh = data.draw(st.integers(1, 16))
    ow = data.draw(st.integers(1, 16))
    _same(*_both("resize_bilinear", src, top, left, ch, cw, oh, ow))


@needs_c
@given(image_arrays(), st.floats(0.1, 2.0))
def test_blur_identical(src, sigma):
    _same(*_both("blur_separable", src, gaussian_kernel(sigma)))


@needs_c
@given(image_arrays(), st.floats(0, 2), st.floats(0, 1))
def test_blend_scalar_identical(src, f, other):
    _same(*_both("blend_scalar", src, f, other))


@needs_c
@given(image_arrays(channels=(3,)), st.floats(0, 2))
def test_rgb_kernels_identical(src, f):
    _same(*_both("blend_gray", src, f))
    _same(*_both("gray_mean", src))
    _same(*_both("grayscale", src))


@needs_c
@given(image_arrays(channels=(3,)), st.floats(-0.5, 0.5))
def test_hue_identical(src, shift):
    _same(*_both("adjust_hue", src, shift))


@needs_c
@given(image_arrays(np.uint8))
def test_grayscale_bytes_identical(src):
    if src.shape[2] == 3:
        _same(*_both("grayscale", src))
    _same(*_both("to_float", src))
    _same(*_both("flip_horizontal", src))


@needs_c
@given(image_arrays(), st.floats(0, 1, width=32))
def test_float_kernels_identical(src, thr):
    _same(*_both("to_byte", src))
    _same(*_both("solarize", src, thr))
    _same(*_both("flip_horizontal", src))


@needs_c
def test_rgb_kernels_reject_single_channel():
    c = kernels.get_backend("cython")
    one = np.zeros((2, 2, 1), np.float32)
    for name, args in [("blend_gray", (0.5,)), ("gray_mean", ()), ("grayscale", ()), ("adjust_hue", (0.1,))]:
        with pytest.raises(ValueError):
            getattr(c, name)(one, *args)
