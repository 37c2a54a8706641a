"""Independent reference implementations used by the tests.

Written from the definitions, deliberately slow and without sharing code with
the package.
"""

import colorsys
import math

import numpy as np


def mask_value(x, y, rect):
    left, top, right, bottom = rect
    return 0 if (left <= x < right and top <= y < bottom) else 1


def viewmix_naive(a, b, rect):
    """out[y][x] = M a + (1 - M) b, one pixel at a time."""
    h, w, c = a.shape
    out = np.empty_like(a)
    al, bl = a.tolist(), b.tolist()
    for y in range(h):
        for x in range(w):
            m = mask_value(x, y, rect)
            out[y, x] = [m * al[y][x][k] + (1 - m) * bl[y][x][k] for k in range(c)]
    return out


def box_naive(width, height, cx, cy, lam):
    """Clipped half-open rectangle (left, top, right, bottom) by direct pixel tests.

    Nominal size round(lam * side); the box starts at round(c - size / 2) with
    halves rounded up. A pixel column x belongs when start <= x < start + size.
    An empty clip keeps the nearest edge pixel.
    """
    def axis(c, extent):
        size = max(1, math.floor(lam * extent + 0.5))
        start = math.floor(c - size / 2 + 0.5)
        members = [x for x in range(extent) if start <= x < start + size]
        if not members:
            members = [extent - 1] if start >= extent else [0]
        return members[0], members[-1] + 1

    left, right = axis(cx, width)
    top, bottom = axis(cy, height)
    return left, top, right, bottom


def area_fraction_monte_carlo(width, height, r_min, r_max, samples, seed):
    """Mean clipped-box fraction from explicit per-pixel membership masks."""
    rng = np.random.Generator(np.random.MT19937(seed))
    xs = np.arange(width)
    ys = np.arange(height)
    total = 0
    chunk = 10_000
    done = 0
    while done < samples:
        m = min(chunk, samples - done)
        cx = rng.random(m) * width
        cy = rng.random(m) * height
        lam = r_min + (r_max - r_min) * rng.random(m)
        w = np.maximum(1, np.floor(lam * width + 0.5))
        h = np.maximum(1, np.floor(lam * height + 0.5))
        sx = np.floor(cx - w / 2 + 0.5)
        sy = np.floor(cy - h / 2 + 0.5)
        inx = ((xs >= sx[:, None]) & (xs < (sx + w)[:, None])).sum(1)
        iny = ((ys >= sy[:, None]) & (ys < (sy + h)[:, None])).sum(1)
        total += int((np.maximum(inx, 1) * np.maximum(iny, 1)).sum())
        done += m
    return total / (samples * width * height)


def _mean_extent(size, extent, grid=20_000):
    # mean clipped length over a centre uniform on [0, extent], midpoint rule
    c = (np.arange(grid) + 0.5) * (extent / grid)
    start = np.floor(c - size / 2 + 0.5)
    length = np.minimum(start + size, extent) - np.maximum(start, 0)
    return float(np.maximum(length, 1).mean())


def area_fraction_exact(width, height, r_min, r_max):
    """Expected clipped fraction by integrating over lambda piecewise.

    Given lambda, horizontal and vertical extents are independent, so the
    expectation factorizes; the nominal sizes are constant between rounding
    breakpoints of lambda.
    """
    cuts = {r_min, r_max}
    for extent in (width, height):
        for k in range(extent + 1):
            t = (k + 0.5) / extent
            if r_min < t < r_max:
                cuts.add(t)
    cuts = sorted(cuts)
    total = 0.0
    for lo, hi in zip(cuts, cuts[1:]):
        mid = 0.5 * (lo + hi)
        w = max(1, math.floor(mid * width + 0.5))
        h = max(1, math.floor(mid * height + 0.5))
        total += (hi - lo) * _mean_extent(w, width) * _mean_extent(h, height)
    return total / (r_max - r_min) / (width * height)


def blur_dense(img, kernel):
    """2-D convolution with the outer-product kernel and replicate padding."""
    k = np.asarray(kernel, dtype=np.float64)
    k2 = np.outer(k, k)
    r = len(k) // 2
    h, w, c = img.shape
    src = img.astype(np.float64)
    out = np.zeros((h, w, c))
    for y in range(h):
        for x in range(w):
            acc = np.zeros(c)
            for dy in range(-r, r + 1):
                yy = min(max(y + dy, 0), h - 1)
                for dx in range(-r, r + 1):
                    xx = min(max(x + dx, 0), w - 1)
                    acc += k2[dy + r, dx + r] * src[yy, xx]
            out[y, x] = acc
    return out


def hue_shift_colorsys(img, shift):
    out = np.empty(img.shape, dtype=np.float64)
    for y in range(img.shape[0]):
        for x in range(img.shape[1]):
            h, s, v = colorsys.rgb_to_hsv(*[float(t) for t in img[y, x]])
            out[y, x] = colorsys.hsv_to_rgb((h + shift) % 1.0, s, v)
    return out


def bilinear_sample(src, out_h, out_w):
    """Half-pixel-centre bilinear resize with edge clamping, scalar loops."""
    h, w, c = src.shape
    s = src.astype(np.float64)
    out = np.zeros((out_h, out_w, c))
    for oy in range(out_h):
        fy = max((oy + 0.5) * h / out_h - 0.5, 0.0)
        y0 = min(int(math.floor(fy)), h - 1)
        y1 = min(y0 + 1, h - 1)
        wy = fy - y0
        for ox in range(out_w):
            fx = max((ox + 0.5) * w / out_w - 0.5, 0.0)
            x0 = min(int(math.floor(fx)), w - 1)
            x1 = min(x0 + 1, w - 1)
            wx = fx - x0
            top = (1 - wx) * s[y0, x0] + wx * s[y0, x1]
            bot = (1 - wx) * s[y1, x0] + wx * s[y1, x1]
            out[oy, ox] = (1 - wy) * top + wy * bot
    return out


def luma(rgb):
    return 0.299 * rgb[..., 0] + 0.587 * rgb[..., 1] + 0.114 * rgb[..., 2]
