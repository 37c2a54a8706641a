"""Compare the compiled and numpy kernel backends.

Times every kernel on one image, then the full two-view pipeline on a batch,
under each available backend, and checks that both backends produce
identical bytes. Usage::

    python benchmarks/compare_backends.py [--size 224] [--batch 32] [--repeats 5]
"""

import argparse
import hashlib
import statistics
import time

import numpy as np

from viewmix import kernels
from viewmix.io import synthetic_dataset
from viewmix.multiview import MultiViewConfig, generate_batch
from viewmix.transforms import default_pipeline, gaussian_kernel


def kernel_cases(size: int):
    rng = np.random.default_rng(0)
    b = rng.integers(0, 256, (size, size, 3), dtype=np.uint8)
    f = rng.random((size, size, 3), dtype=np.float32)
    k = gaussian_kernel(1.0)
    crop = max(1, size * 7 // 8)
    return {
        "resize_bilinear": lambda m: m.resize_bilinear(b, 2, 3, crop, crop, size, size),
        "blur_separable": lambda m: m.blur_separable(f, k),
        "blend_scalar": lambda m: m.blend_scalar(f, 1.3, 0.4),
        "blend_gray": lambda m: m.blend_gray(f, 0.6),
        "gray_mean": lambda m: m.gray_mean(f),
        "grayscale": lambda m: m.grayscale(f),
        "adjust_hue": lambda m: m.adjust_hue(f, 0.15),
        "to_float": lambda m: m.to_float(b),
        "to_byte": lambda m: m.to_byte(f),
        "solarize": lambda m: m.solarize(f, 0.5),
        "flip_horizontal": lambda m: m.flip_horizontal(b),
    }


def best_of(fn, repeats: int, number: int) -> float:
    times = []
    for _ in range(repeats):
        start = time.perf_counter()
        for _ in range(number):
            fn()
        times.append((time.perf_counter() - start) / number)
    return min(times)


def digest(result) -> str:
    if isinstance(result, np.ndarray):
        return hashlib.sha256(result.tobytes()).hexdigest()
    return repr(result)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--size", type=int, default=224)
    ap.add_argument("--batch", type=int, default=32)
    ap.add_argument("--repeats", type=int, default=5)
    args = ap.parse_args()

    backends = kernels.available_backends()
    print(f"backends: {', '.join(backends)}; image {args.size}x{args.size}")
    if "cython" not in backends:
        print("compiled extension not built; only the numpy backend can be timed")

    print(f"\n{'kernel':<18}" + "".join(f"{b + ' ms':>12}" for b in backends) + f"{'speedup':>10}  same")
    mismatches = 0
    for name, fn in kernel_cases(args.size).items():
        row, outs = [], []
        for b in backends:
            mod = kernels.get_backend(b)
            outs.append(digest(fn(mod)))
            row.append(best_of(lambda: fn(mod), args.repeats, 5) * 1e3)
        same = len(set(outs)) == 1
        mismatches += not same
        speed = f"{row[-1] / row[0]:.1f}x" if len(row) > 1 else "-"
        print(f"{name:<18}" + "".join(f"{t:>12.3f}" for t in row) + f"{speed:>10}  {'yes' if same else 'NO'}")

    ds = synthetic_dataset(args.batch, args.size)
    cfg = MultiViewConfig(base_pipeline=default_pipeline(args.size))
    print(f"\n{'pipeline (batch ' + str(args.batch) + ', 2 views)':<32}" + "".join(f"{b + ' s':>12}" for b in backends))
    times, digests = [], []
    for b in backends:
        with kernels.use_backend(b):
            run = lambda: generate_batch(ds, range(args.batch), cfg, seed=0, step=0)
            batches = run()
            h = hashlib.sha256()
            for vb in batches:
                for v in vb.views:
                    h.update(v.data.tobytes())
            digests.append(h.hexdigest())
            times.append(statistics.median(best_of(run, 1, 1) for _ in range(args.repeats)))
    print(f"{'seconds per batch':<32}" + "".join(f"{t:>12.4f}" for t in times))
    if len(times) > 1:
        print(f"speedup {times[-1] / times[0]:.1f}x, outputs identical: {'yes' if len(set(digests)) == 1 else 'NO'}")
        mismatches += len(set(digests)) != 1
    raise SystemExit(1 if mismatches else 0)


if __name__ == "__main__":
    main()
