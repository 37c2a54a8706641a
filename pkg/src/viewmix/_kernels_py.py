"""Pure numpy implementations of the compiled kernels in ``_ckernels``.

Signatures and arithmetic order match the Cython versions; this module is
used when the extension is not built or ``VIEWMIX_PURE_PYTHON`` is set.
"""

import numpy as np

_LUMA = (0.299, 0.587, 0.114)


def _axis_coords(src_len, out_len):
    s = (np.arange(out_len, dtype=np.float64) + 0.5) * (src_len / out_len) - 0.5
    s = np.maximum(s, 0.0)
    lo = np.minimum(np.floor(s).astype(np.intp), src_len - 1)
    hi = np.minimum(lo + 1, src_len - 1)
    return lo, hi, s - lo


def resize_bilinear(src, top, left, h, w, out_h, out_w):
    ylo, yhi, fy = _axis_coords(h, out_h)
    xlo, xhi, fx = _axis_coords(w, out_w)
    window = src[top:top + h].astype(np.float64)
    fx = fx[None, :, None]
    rows = (1.0 - fx) * window[:, left + xlo] + fx * window[:, left + xhi]
    fy = fy[:, None, None]
    v = (1.0 - fy) * rows[ylo] + fy * rows[yhi]
    if src.dtype == np.float32:
        return v.astype(np.float32)
    return np.clip(np.floor(v + 0.5), 0.0, 255.0).astype(np.uint8)


def blur_separable(src, kernel):
    kernel = np.asarray(kernel, dtype=np.float64)
    K = len(kernel)
    r = K // 2
    H, W, _ = src.shape
    padded = np.pad(src.astype(np.float64), ((0, 0), (r, r), (0, 0)), mode="edge")
    tmp = np.zeros(src.shape, dtype=np.float64)
    for k in range(K):
        tmp = tmp + kernel[k] * padded[:, k:k + W]
    padded = np.pad(tmp, ((r, r), (0, 0), (0, 0)), mode="edge")
    out = np.zeros(src.shape, dtype=np.float64)
    for k in range(K):
        out = out + kernel[k] * padded[k:k + H]
    return out.astype(np.float32)


def blend_scalar(src, factor, other):
    v = factor * src.astype(np.float64) + (1.0 - factor) * other
    return np.clip(v, 0.0, 1.0).astype(np.float32)


def _luma(src):
    s = src.astype(np.float64)
    return _LUMA[0] * s[..., 0] + _LUMA[1] * s[..., 1] + _LUMA[2] * s[..., 2]


def blend_gray(src, factor):
    g = ((1.0 - factor) * _luma(src))[..., None]
    v = factor * src.astype(np.float64) + g
    return np.clip(v, 0.0, 1.0).astype(np.float32)


def gray_mean(src):
    # sequential sum (cumsum) to match the compiled loop bit for bit
    H, W = src.shape[:2]
    return float(np.cumsum(_luma(src).ravel())[-1] / (H * W))


def grayscale(src):
    g = _luma(src)
    if src.dtype == np.float32:
        g = g.astype(np.float32)
    else:
        g = np.minimum(np.floor(g + 0.5), 255.0).astype(np.uint8)
    return np.repeat(g[..., None], 3, axis=2)


def adjust_hue(src, shift):
    s64 = src.astype(np.float64)
    r, g, b = s64[..., 0], s64[..., 1], s64[..., 2]
    maxc = np.maximum(np.maximum(r, g), b)
    minc = np.minimum(np.minimum(r, g), b)
    delta = maxc - minc
    chroma = delta != 0.0
    s = delta / np.where(chroma, maxc, 1.0)
    inv = 1.0 / np.where(chroma, delta, 1.0)
    rc = (maxc - r) * inv
    gc = (maxc - g) * inv
    bc = (maxc - b) * inv
    h = np.where(r == maxc, bc - gc, np.where(g == maxc, 2.0 + rc - bc, 4.0 + gc - rc))
    h = h / 6.0
    h = np.where(h < 0.0, h + 1.0, h)
    h = h + shift
    h = np.where(h < 0.0, h + 1.0, h)
    h = np.where(h >= 1.0, h - 1.0, h)
    hi = np.floor(h * 6.0)
    f = h * 6.0 - hi
    i = hi.astype(np.intp) % 6
    v = maxc
    p = v * (1.0 - s)
    q = v * (1.0 - s * f)
    t = v * (1.0 - s * (1.0 - f))
    conds = [i == 0, i == 1, i == 2, i == 3, i == 4]
    nr = np.select(conds, [v, q, p, p, t], v)
    ng = np.select(conds, [t, v, v, q, p], p)
    nb = np.select(conds, [p, p, t, v, v], q)
    out = np.stack([nr, ng, nb], axis=-1)
    out = np.where(chroma[..., None], out, s64)
    return out.astype(np.float32)


def to_float(src):
    return (src.astype(np.float64) / 255.0).astype(np.float32)


def to_byte(src):
    v = np.floor(src.astype(np.float64) * 255.0 + 0.5)
    return np.clip(v, 0.0, 255.0).astype(np.uint8)


def solarize(src, threshold):
    threshold = np.float32(threshold)
    return np.where(src >= threshold, np.float32(1.0) - src, src).astype(np.float32)


def flip_horizontal(src):
    return np.ascontiguousarray(src[:, ::-1])
