"""Time the numpy and numba kernel paths side by side.

    python benchmarks/bench_kernels.py [--repeat 5] [--epoch]

Shapes follow the widest DCNN layer (batch 32, length 6, 64 -> 64 channels)
and a trilinear sweep over the full 15 x 21 x 23 table axes. ``--epoch``
also times one training epoch of DCNN_3F on the sample grid per path.
"""
import argparse
import contextlib
import timeit

import numpy as np

from chfnet import _jit, kernels
from chfnet.lut import LUT2006_MASS_FLUXES, LUT2006_PRESSURES, LUT2006_QUALITIES


@contextlib.contextmanager
def kernel_path(name):
    """Temporarily route the public kernels to one implementation."""
    saved = {k: getattr(kernels, k) for k in ("conv1d_forward", "conv1d_backward", "trilinear")}
    for k in saved:
        setattr(kernels, k, getattr(kernels, f"{k}_{name}"))
    try:
        yield
    finally:
        for k, fn in saved.items():
            setattr(kernels, k, fn)


def best_of(fn, repeat, number):
    return min(timeit.repeat(fn, repeat=repeat, number=number)) / number


def conv_cases(rng):
    x = rng.normal(size=(32, 6, 64))
    w = rng.normal(size=(3, 64, 64))
    b = rng.normal(size=64)
    g = rng.normal(size=(32, 6, 64))
    return {
        "conv1d_forward  (32x6x64 -> 64)": lambda f: f(x, w, b, 1),
        "conv1d_backward (32x6x64 -> 64)": lambda f: f(x, w, g, 1),
    }


def trilinear_case(rng):
    axes = [np.asarray(a, dtype=np.float64) for a in (LUT2006_PRESSURES, LUT2006_MASS_FLUXES, LUT2006_QUALITIES)]
    values = rng.uniform(0, 1e4, size=tuple(len(a) for a in axes))
    q = [rng.uniform(a[0], a[-1], 100_000) for a in axes]
    return lambda f: f(*axes, values, *q)


def epoch_seconds(path):
    from chfnet.experiment import derive_seed
    from chfnet.lut import flatten, load_lut
    from chfnet.dataset import fit_standardizer, transform
    from chfnet.nn import TrainConfig, build_dcnn, train
    from chfnet.sample import sample_lut_path

    ds = flatten(load_lut(sample_lut_path()))
    z = transform(fit_standardizer(ds), ds)
    data = (z.features[:, :, None], z.targets[:, None])
    with kernel_path(path):
        train(build_dcnn(3), data, None, TrainConfig(epochs=1))  # warm-up / compile
        t = timeit.default_timer()
        train(build_dcnn(3, seed=derive_seed(0, "dcnn_init")), data, None, TrainConfig(epochs=3))
        return (timeit.default_timer() - t) / 3


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--epoch", action="store_true", help="also time a DCNN training epoch")
    args = ap.parse_args(argv)

    paths = ["numpy"] + (["jit"] if _jit.HAVE_NUMBA else [])
    if not _jit.HAVE_NUMBA:
        print("numba not installed: only the numpy path is timed")
    rng = np.random.default_rng(0)
    cases = conv_cases(rng)
    cases["trilinear (100k queries, 2006 axes)"] = trilinear_case(rng)

    print(f"{'kernel':<38}" + "".join(f"{p:>12}" for p in paths) + ("     speedup" if len(paths) == 2 else ""))
    for label, call in cases.items():
        base = label.split()[0]
        times = []
        for p in paths:
            fn = getattr(kernels, f"{base}_{p}")
            call(fn)  # compile outside the timing
            times.append(best_of(lambda: call(fn), args.repeat, 20))
        row = f"{label:<38}" + "".join(f"{t * 1e6:>10.1f}us" for t in times)
        if len(times) == 2:
            row += f"{times[0] / times[1]:>11.2f}x"
        print(row)

    if args.epoch:
        times = [epoch_seconds(p) for p in paths]
        row = f"{'DCNN_3F epoch (sample grid, batch 32)':<38}" + "".join(f"{t:>11.3f}s" for t in times)
        if len(times) == 2:
            row += f"{times[0] / times[1]:>11.2f}x"
        print(row)


if __name__ == "__main__":
    main()
