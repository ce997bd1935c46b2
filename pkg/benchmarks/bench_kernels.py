#!/usr/bin/env python3
"""Benchmark the JIT kernels against the pure-numpy fallback.

Runs the per-die simulation for each architecture on both backends and
reports wall time and speedup.  The same comparison can be reproduced at
package level by setting IMCLIM_DISABLE_NUMBA=1.

Usage: python benchmarks/bench_kernels.py [--dies 50] [--vectors 100]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from imclim._kernels import HAVE_NUMBA, get_impl
from imclim.arch import ArchitectureConfig, ArchKind
from imclim.tech import builtin_profile


def _qs_args(cfg: ArchitectureConfig, vectors: int, rng: np.random.Generator):
    n, bx, bw = cfg.n, cfg.bx, cfg.bw
    X = rng.integers(0, 2**bx, size=(vectors, n), dtype=np.int64)
    U = rng.integers(0, 2**bw, size=(vectors, n), dtype=np.int64)
    mism = rng.standard_normal((bw, bx, n)) * cfg.sigma_d
    jit = rng.standard_normal((vectors, bx, n)) * 0.023
    th = rng.standard_normal((vectors, bw, bx)) * 0.05
    return (X, U, mism, jit, th, bx, bw, cfg.k_h, 0.0, 0.6, 64.0, True)


def _qr_args(cfg: ArchitectureConfig, vectors: int, rng: np.random.Generator):
    n, bw = cfg.n, cfg.bw
    xq = rng.random((vectors, n))
    U = rng.integers(0, 2**bw, size=(vectors, n), dtype=np.int64)
    cm = rng.standard_normal((bw, n)) * 0.046
    cth = rng.standard_normal((vectors, bw, n)) * 1.2e-3
    return (xq, U, cm, cth, 0.05, 1.0, 0.4, bw, 0.1, 2e-3, 256.0, True)


def _cm_args(cfg: ArchitectureConfig, vectors: int, rng: np.random.Generator):
    n, bw = cfg.n, cfg.bw
    xq = rng.random((vectors, n))
    mag = rng.integers(0, 2 ** (bw - 1), size=(vectors, n), dtype=np.int64)
    sgn = np.where(rng.random((vectors, n)) < 0.5, -1.0, 1.0)
    mismB = rng.standard_normal((bw, n)) * cfg.sigma_d
    jitB = rng.standard_normal((vectors, bw, n)) * 0.023
    blth = rng.standard_normal((vectors, n)) * 0.03
    cm = rng.standard_normal(n) * 0.046
    cth = rng.standard_normal((vectors, n)) * 1.2e-3
    return (
        xq, mag, sgn, mismB, jitB, blth, cm, cth, 0.05, 1.0, 0.4,
        cfg.dvbl_unit, cfg.k_h, bw, -0.02, 3e-4, 64.0, True,
    )


def bench(name: str, args: tuple, dies: int) -> None:
    rows = []
    for backend in ("numpy", "numba") if HAVE_NUMBA else ("numpy",):
        fn = get_impl(name, backend)
        fn(*args)  # warm up (JIT compile)
        t0 = time.perf_counter()
        for _ in range(dies):
            ya, yt = fn(*args)
        dt = time.perf_counter() - t0
        rows.append((backend, dt, float(ya.sum())))
    line = f"{name:4s}"
    for backend, dt, chk in rows:
        line += f"  {backend}: {dt:7.3f} s"
    if len(rows) == 2:
        line += f"  speedup: {rows[0][1] / rows[1][1]:5.1f}x"
        if not np.isclose(rows[0][2], rows[1][2], rtol=1e-9):
            line += "  [MISMATCH]"
    print(line)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--dies", type=int, default=50)
    ap.add_argument("--vectors", type=int, default=100)
    args = ap.parse_args()

    tech = builtin_profile("cmos65nm")
    rng = np.random.default_rng(0)
    qs = ArchitectureConfig(kind=ArchKind.QS_ARCH, n=512, bx=6, bw=6, v_wl=0.7, tech=tech)
    qr = ArchitectureConfig(kind=ArchKind.QR_ARCH, n=64, bx=6, bw=7, c_o=3e-15, tech=tech)
    cm = ArchitectureConfig(kind=ArchKind.CM, n=128, bx=6, bw=6, v_wl=0.7, tech=tech)

    print(f"numba available: {HAVE_NUMBA}; dies={args.dies}, vectors={args.vectors}")
    bench("qs", _qs_args(qs, args.vectors, rng), args.dies)
    bench("qr", _qr_args(qr, args.vectors, rng), args.dies)
    bench("cm", _cm_args(cm, args.vectors, rng), args.dies)


if __name__ == "__main__":
    main()
