# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled inner loops for the transform stack.

Every function mirrors one in ``_kernels_py`` and evaluates the same
expressions in the same order in double precision, so both backends produce
bit-identical outputs. Buffers are walked through flat pointers over
C-contiguous ``(H, W, C)`` arrays; every loop releases the GIL.
"""

import numpy as np

from libc.math cimport floor
from libc.string cimport memcpy

ctypedef fused pixel_t:
    unsigned char
    float


# Written as ternaries so gcc emits branch-free minsd/maxsd; libm floor() is a
# call on baseline x86-64, so non-negative values are floored by truncation.
cdef inline double _clamp01(double v) noexcept nogil:
    v = 0.0 if v < 0.0 else v
    return 1.0 if v > 1.0 else v


cdef inline unsigned char _round_byte(double v) noexcept nogil:
    # round-half-up of v in unit-byte scale, clamped to [0, 255]
    v = v + 0.5
    v = 0.0 if v < 0.0 else v
    v = 255.0 if v > 255.0 else v
    return <unsigned char><int>v


cdef inline void _need_rgb(Py_ssize_t channels) except *:
    if channels != 3:
        raise ValueError(f"expected a 3-channel image, got {channels} channel(s)")


def _axis_coords(Py_ssize_t src_len, Py_ssize_t out_len):
    """Half-pixel-centre source coordinates for bilinear sampling."""
    cdef Py_ssize_t i, i0
    cdef double s
    lo = np.empty(out_len, dtype=np.intp)
    hi = np.empty(out_len, dtype=np.intp)
    frac = np.empty(out_len, dtype=np.float64)
    cdef Py_ssize_t[::1] lo_v = lo
    cdef Py_ssize_t[::1] hi_v = hi
    cdef double[::1] fr_v = frac
    cdef double scale = <double>src_len / <double>out_len
    for i in range(out_len):
        s = (i + 0.5) * scale - 0.5
        if s < 0.0:
            s = 0.0
        i0 = <Py_ssize_t>floor(s)
        if i0 > src_len - 1:
            i0 = src_len - 1
        lo_v[i] = i0
        hi_v[i] = i0 + 1 if i0 + 1 < src_len else src_len - 1
        fr_v[i] = s - i0
    return lo, hi, frac


def resize_bilinear(const pixel_t[:, :, ::1] src, Py_ssize_t top, Py_ssize_t left,
                    Py_ssize_t h, Py_ssize_t w, Py_ssize_t out_h, Py_ssize_t out_w):
    """Bilinear rescale of the window ``src[top:top+h, left:left+w]``.

    Each source row of the window is interpolated horizontally once, then
    output rows blend two of those.
    """
    cdef Py_ssize_t W = src.shape[1], C = src.shape[2]
    cdef Py_ssize_t y, x, c, i, n_out = out_w * C
    cdef double fx, fy, v
    ylo, yhi, yfr = _axis_coords(h, out_h)
    xlo, xhi, xfr = _axis_coords(w, out_w)
    cdef Py_ssize_t[::1] ylo_v = ylo
    cdef Py_ssize_t[::1] yhi_v = yhi
    cdef double[::1] yfr_v = yfr
    cdef Py_ssize_t[::1] xlo_v = xlo
    cdef Py_ssize_t[::1] xhi_v = xhi
    cdef double[::1] xfr_v = xfr
    rows_arr = np.empty((h, n_out), dtype=np.float64)
    cdef double[:, ::1] rows = rows_arr
    if pixel_t is float:
        out = np.empty((out_h, out_w, C), dtype=np.float32)
    else:
        out = np.empty((out_h, out_w, C), dtype=np.uint8)
    cdef pixel_t[:, :, ::1] dst_v = out
    cdef pixel_t* dst = &dst_v[0, 0, 0]
    cdef const pixel_t* sp = &src[0, 0, 0]
    cdef const pixel_t* srow
    cdef double* r0
    cdef double* r1
    cdef double* rr
    cdef pixel_t* drow
    with nogil:
        for y in range(h):
            srow = sp + ((top + y) * W + left) * C
            rr = &rows[y, 0]
            for x in range(out_w):
                fx = xfr_v[x]
                for c in range(C):
                    rr[x * C + c] = (1.0 - fx) * srow[xlo_v[x] * C + c] + fx * srow[xhi_v[x] * C + c]
        for y in range(out_h):
            r0 = &rows[ylo_v[y], 0]
            r1 = &rows[yhi_v[y], 0]
            fy = yfr_v[y]
            drow = dst + y * n_out
            for i in range(n_out):
                v = (1.0 - fy) * r0[i] + fy * r1[i]
                if pixel_t is float:
                    drow[i] = <float>v
                else:
                    drow[i] = _round_byte(v)
    return out


def blur_separable(const float[:, :, ::1] src, const double[::1] kernel):
    """Horizontal then vertical 1-D convolution with replicate padding."""
    cdef Py_ssize_t H = src.shape[0], W = src.shape[1], C = src.shape[2]
    cdef Py_ssize_t K = kernel.shape[0], r = K // 2
    cdef Py_ssize_t y, x, c, k, i, yy, n_row = W * C
    cdef double wk
    pad_arr = np.empty((W + 2 * r) * C, dtype=np.float64)
    tmp_arr = np.empty((H, n_row), dtype=np.float64)
    acc_arr = np.empty(n_row, dtype=np.float64)
    out = np.empty((H, W, C), dtype=np.float32)
    cdef double[::1] pad_v = pad_arr
    cdef double[:, ::1] tmp_v = tmp_arr
    cdef double[::1] acc_v = acc_arr
    cdef float[:, :, ::1] out_v = out
    cdef double* pad = &pad_v[0]
    cdef double* tmp = &tmp_v[0, 0]
    cdef double* acc = &acc_v[0]
    cdef float* dst = &out_v[0, 0, 0]
    cdef const float* sp = &src[0, 0, 0]
    cdef const float* srow
    cdef double* trow
    cdef double* pk
    with nogil:
        for y in range(H):
            srow = sp + y * n_row
            for x in range(r):
                for c in range(C):
                    pad[x * C + c] = srow[c]
                    pad[(r + W + x) * C + c] = srow[(W - 1) * C + c]
            for i in range(n_row):
                pad[r * C + i] = srow[i]
            trow = tmp + y * n_row
            wk = kernel[0]
            for i in range(n_row):
                trow[i] = wk * pad[i]
            for k in range(1, K):
                wk = kernel[k]
                pk = pad + k * C
                for i in range(n_row):
                    trow[i] = trow[i] + wk * pk[i]
        for y in range(H):
            for k in range(K):
                yy = y + k - r
                if yy < 0:
                    yy = 0
                elif yy >= H:
                    yy = H - 1
                wk = kernel[k]
                trow = tmp + yy * n_row
                if k == 0:
                    for i in range(n_row):
                        acc[i] = wk * trow[i]
                else:
                    for i in range(n_row):
                        acc[i] = acc[i] + wk * trow[i]
            for i in range(n_row):
                dst[y * n_row + i] = <float>acc[i]
    return out


def blend_scalar(const float[:, :, ::1] src, double factor, double other):
    """``clip(factor * src + (1 - factor) * other, 0, 1)``."""
    cdef Py_ssize_t i, n = src.shape[0] * src.shape[1] * src.shape[2]
    cdef double rest = (1.0 - factor) * other
    out = np.empty((src.shape[0], src.shape[1], src.shape[2]), dtype=np.float32)
    cdef float[:, :, ::1] out_v = out
    cdef float* dst = &out_v[0, 0, 0]
    cdef const float* sp = &src[0, 0, 0]
    with nogil:
        for i in range(n):
            dst[i] = <float>_clamp01(factor * sp[i] + rest)
    return out


def blend_gray(const float[:, :, ::1] src, double factor):
    """Blend each pixel toward its own luminance (saturation adjustment)."""
    _need_rgb(src.shape[2])
    cdef Py_ssize_t i, c, n = src.shape[0] * src.shape[1]
    cdef double g
    out = np.empty((src.shape[0], src.shape[1], 3), dtype=np.float32)
    cdef float[:, :, ::1] out_v = out
    cdef float* dst = &out_v[0, 0, 0]
    cdef const float* sp = &src[0, 0, 0]
    with nogil:
        for i in range(n):
            g = 0.299 * sp[3 * i] + 0.587 * sp[3 * i + 1] + 0.114 * sp[3 * i + 2]
            g = (1.0 - factor) * g
            for c in range(3):
                dst[3 * i + c] = <float>_clamp01(factor * sp[3 * i + c] + g)
    return out


def gray_mean(const float[:, :, ::1] src):
    """Mean luminance of a 3-channel unit-float image (sequential sum)."""
    _need_rgb(src.shape[2])
    cdef Py_ssize_t i, n = src.shape[0] * src.shape[1]
    cdef double acc = 0.0
    cdef const float* sp = &src[0, 0, 0]
    with nogil:
        for i in range(n):
            acc = acc + (0.299 * sp[3 * i] + 0.587 * sp[3 * i + 1] + 0.114 * sp[3 * i + 2])
    return acc / n


def grayscale(const pixel_t[:, :, ::1] src):
    """Replace all three channels with ITU-R 601 luminance."""
    _need_rgb(src.shape[2])
    cdef Py_ssize_t i, n = src.shape[0] * src.shape[1]
    cdef double g
    if pixel_t is float:
        out = np.empty((src.shape[0], src.shape[1], 3), dtype=np.float32)
    else:
        out = np.empty((src.shape[0], src.shape[1], 3), dtype=np.uint8)
    cdef pixel_t[:, :, ::1] out_v = out
    cdef pixel_t* dst = &out_v[0, 0, 0]
    cdef const pixel_t* sp = &src[0, 0, 0]
    with nogil:
        for i in range(n):
            g = 0.299 * sp[3 * i] + 0.587 * sp[3 * i + 1] + 0.114 * sp[3 * i + 2]
            if pixel_t is float:
                dst[3 * i] = <float>g
                dst[3 * i + 1] = <float>g
                dst[3 * i + 2] = <float>g
            else:
                dst[3 * i] = _round_byte(g)
                dst[3 * i + 1] = dst[3 * i]
                dst[3 * i + 2] = dst[3 * i]
    return out


# per HSV sector, which of (v, q, p, t) lands in r, g, b; row 6 passes the
# original pixel through (achromatic input)
cdef int[7][3] _HUE_PICK = [[0, 3, 2], [1, 0, 2], [2, 0, 3], [2, 1, 0],
                            [3, 2, 0], [0, 2, 1], [4, 5, 6]]


def adjust_hue(const float[:, :, ::1] src, double shift):
    """Rotate hue by ``shift`` (fraction of the full circle, |shift| <= 0.5) via HSV."""
    _need_rgb(src.shape[2])
    cdef Py_ssize_t n = src.shape[0] * src.shape[1]
    out = np.empty((src.shape[0], src.shape[1], 3), dtype=np.float32)
    cdef float[:, :, ::1] out_v = out
    if n == 0:
        return out
    with nogil:
        _hue_loop(&src[0, 0, 0], &out_v[0, 0, 0], n, shift)
    return out


cdef void _hue_loop(const float* sp, float* dst, Py_ssize_t n, double shift) noexcept nogil:
    cdef Py_ssize_t i
    cdef int sector, row, chroma
    cdef double r, g, b, maxc, minc, delta, h, s, rc, gc, bc, f
    cdef double[7] val
    for i in range(n):
        r = sp[3 * i]
        g = sp[3 * i + 1]
        b = sp[3 * i + 2]
        maxc = r if r > g else g
        maxc = maxc if maxc > b else b
        minc = r if r < g else g
        minc = minc if minc < b else b
        delta = maxc - minc
        chroma = delta != 0.0
        s = delta / (maxc if chroma else 1.0)
        f = 1.0 / (delta if chroma else 1.0)
        rc = (maxc - r) * f
        gc = (maxc - g) * f
        bc = (maxc - b) * f
        h = (4.0 + gc - rc) if g != maxc else (2.0 + rc - bc)
        h = (bc - gc) if r == maxc else h
        h = h / 6.0
        h = h + <double>(h < 0.0)
        h = h + shift
        h = h + <double>(h < 0.0)
        h = h - <double>(h >= 1.0)
        sector = <int>(h * 6.0)
        f = h * 6.0 - sector
        sector = sector - 6 * (sector >= 6)
        row = sector if chroma else 6
        val[0] = maxc
        val[1] = maxc * (1.0 - s * f)
        val[2] = maxc * (1.0 - s)
        val[3] = maxc * (1.0 - s * (1.0 - f))
        val[4] = r
        val[5] = g
        val[6] = b
        dst[3 * i] = <float>val[_HUE_PICK[row][0]]
        dst[3 * i + 1] = <float>val[_HUE_PICK[row][1]]
        dst[3 * i + 2] = <float>val[_HUE_PICK[row][2]]


def to_float(const unsigned char[:, :, ::1] src):
    """Bytes to unit float: ``s / 255``."""
    cdef Py_ssize_t i, n = src.shape[0] * src.shape[1] * src.shape[2]
    out = np.empty((src.shape[0], src.shape[1], src.shape[2]), dtype=np.float32)
    cdef float[:, :, ::1] out_v = out
    cdef float* dst = &out_v[0, 0, 0]
    cdef const unsigned char* sp = &src[0, 0, 0]
    with nogil:
        for i in range(n):
            dst[i] = <float>(sp[i] / 255.0)
    return out


def to_byte(const float[:, :, ::1] src):
    """Unit float to bytes with round-half-up and clamping."""
    cdef Py_ssize_t i, n = src.shape[0] * src.shape[1] * src.shape[2]
    out = np.empty((src.shape[0], src.shape[1], src.shape[2]), dtype=np.uint8)
    cdef unsigned char[:, :, ::1] out_v = out
    cdef unsigned char* dst = &out_v[0, 0, 0]
    cdef const float* sp = &src[0, 0, 0]
    with nogil:
        for i in range(n):
            dst[i] = _round_byte(sp[i] * 255.0)
    return out


def solarize(const float[:, :, ::1] src, float threshold):
    """Unit-float solarization: ``1 - s`` where ``s >= threshold``."""
    cdef Py_ssize_t i, n = src.shape[0] * src.shape[1] * src.shape[2]
    out = np.empty((src.shape[0], src.shape[1], src.shape[2]), dtype=np.float32)
    cdef float[:, :, ::1] out_v = out
    if n == 0:
        return out
    with nogil:
        _solarize_loop(&src[0, 0, 0], &out_v[0, 0, 0], n, threshold)
    return out


cdef void _solarize_loop(const float* sp, float* dst, Py_ssize_t n, float threshold) noexcept nogil:
    # bitmask select: a compare-and-branch here mispredicts on natural images
    cdef Py_ssize_t i
    cdef float s, inv
    cdef unsigned int mask, a, b
    for i in range(n):
        s = sp[i]
        inv = <float>1.0 - s
        mask = 0u - <unsigned int>(s >= threshold)
        memcpy(&a, &s, 4)
        memcpy(&b, &inv, 4)
        a = (a & ~mask) | (b & mask)
        memcpy(&dst[i], &a, 4)


def flip_horizontal(const pixel_t[:, :, ::1] src):
    """Mirror columns: ``out[:, x] = src[:, W - 1 - x]``."""
    cdef Py_ssize_t H = src.shape[0], W = src.shape[1], C = src.shape[2]
    cdef Py_ssize_t y, x, c
    if pixel_t is float:
        out = np.empty((H, W, C), dtype=np.float32)
    else:
        out = np.empty((H, W, C), dtype=np.uint8)
    cdef pixel_t[:, :, ::1] out_v = out
    cdef pixel_t* dst = &out_v[0, 0, 0]
    cdef const pixel_t* sp = &src[0, 0, 0]
    with nogil:
        for y in range(H):
            for x in range(W):
                for c in range(C):
                    dst[(y * W + x) * C + c] = sp[(y * W + W - 1 - x) * C + c]
    return out
