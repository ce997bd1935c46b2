"""Per-die simulation kernels, in two interchangeable backends.

The Monte Carlo inner loops (bit-plane dot products over dies, vectors and
rows) dominate runtime.  Each kernel exists as a JIT-compiled loop version
and a vectorized pure-numpy version; the active backend is chosen at import
time.  Set ``IMCLIM_DISABLE_NUMBA=1`` to force the numpy path (the same
flag the benchmark uses to compare them).

Kernels are pure functions of pre-drawn noise arrays; all randomness is
generated by the caller, so both backends implement identical math.

Every kernel returns a pair ``(ya, yt)`` per input vector: the recombined
analog value before the converter, and after it.  Digital recombination
offsets are applied by the caller.
"""

from __future__ import annotations

import os

import numpy as np

__all__ = ["BACKEND", "HAVE_NUMBA", "qs_arch_die", "qr_arch_die", "cm_die", "get_impl"]

_DISABLED = os.environ.get("IMCLIM_DISABLE_NUMBA", "").strip().lower() in (
    "1",
    "true",
    "yes",
)

# The portable threading layer avoids TBB version probing warnings.
os.environ.setdefault("NUMBA_THREADING_LAYER", "workqueue")

try:
    from numba import njit, prange

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a hard dep, but stay usable
    HAVE_NUMBA = False
    prange = range


# --- numpy backend ------------------------------------------------------


def _qs_die_numpy(X, U, mism, jit, th, bx, bw, k_h, lo, step, levels, adc_on):
    """Charge-summing architecture, one die, vectorized over input vectors.

    X: (V, N) int64 input codes; U: (V, N) int64 offset-binary weight codes;
    mism: (bw, bx, N) relative cell-current mismatch per bit-plane access;
    jit: (V, bx, N) relative pulse jitter per input cycle; th: (V, bw, bx)
    plane thermal noise in unit-discharge counts.  ADC window (lo, step,
    levels) in counts.
    """
    V = X.shape[0]
    ya = np.zeros(V)
    yt = np.zeros(V)
    for ii in range(bw):
        wb = ((U >> (bw - 1 - ii)) & 1).astype(np.float64)
        for kk in range(bx):
            row_gain = wb * (1.0 + mism[ii, kk])
            xb = ((X >> (bx - 1 - kk)) & 1).astype(np.float64)
            d = row_gain * xb * (1.0 + jit[:, kk, :])
            s = d.sum(axis=1) + th[:, ii, kk]
            s = np.minimum(s, k_h)
            wgt = 2.0 ** ((bw - 1 - ii) + (bx - 1 - kk))
            ya += wgt * s
            if adc_on:
                code = np.clip(np.floor((s - lo) / step), 0.0, levels - 1.0)
                yt += wgt * (lo + (code + 0.5) * step)
            else:
                yt += wgt * s
    return ya, yt


def _qr_die_numpy(xq, U, cm, cth, inj_gain, vdd, vt, bw, lo, step, levels, adc_on):
    """Charge-redistribution architecture, one die.

    xq: (V, N) quantized inputs in [0, 1); U: (V, N) weight codes;
    cm: (bw, N) relative capacitor mismatch; cth: (V, bw, N) thermal noise
    per capacitor in volts.  ADC window in volts.
    """
    V = xq.shape[0]
    ya = np.zeros(V)
    yt = np.zeros(V)
    n = xq.shape[1]
    for ii in range(bw):
        wb = ((U >> (bw - 1 - ii)) & 1).astype(np.float64)
        vj = xq * wb * vdd
        ce = 1.0 + cm[ii]
        num = (ce * (vj + cth[:, ii, :])).sum(axis=1)
        num += inj_gain * ((vdd - vt) * n - vj.sum(axis=1))
        v_plane = num / ce.sum()
        wgt = 2.0 ** (bw - 1 - ii)
        ya += wgt * v_plane
        if adc_on:
            code = np.clip(np.floor((v_plane - lo) / step), 0.0, levels - 1.0)
            yt += wgt * (lo + (code + 0.5) * step)
        else:
            yt += wgt * v_plane
    return ya, yt


def _cm_die_numpy(
    xq, mag, sgn, mismB, jitB, blth, cm, cth, inj_gain, vdd, vt,
    u, k_h, bw, lo, step, levels, adc_on,
):
    """Compute-memory architecture (pulse-weighted columns + charge sharing).

    mag: (V, N) int64 weight magnitude codes; sgn: (V, N) weight signs;
    mismB: (bw, N) relative current mismatch per pulse cell (last row is the
    always-on half-LSB cell); jitB: (V, bw, N) relative pulse jitter; blth:
    (V, N) column thermal noise in unit counts; cm: (N,) relative capacitor
    mismatch; cth: (V, N) sharing thermal noise in volts.
    """
    d = 0.5 * (1.0 + mismB[bw - 1]) * (1.0 + jitB[:, bw - 1, :])
    for ii in range(bw - 1):
        mb = ((mag >> (bw - 2 - ii)) & 1).astype(np.float64)
        d += (2.0 ** (bw - 2 - ii)) * mb * (1.0 + mismB[ii]) * (1.0 + jitB[:, ii, :])
    d += blth
    d = np.minimum(d, k_h)
    vcol = sgn * xq * d * u
    ce = 1.0 + cm
    num = (ce * (vcol + cth)).sum(axis=1)
    num += inj_gain * ((vdd - vt) * xq.shape[1] - vcol.sum(axis=1))
    vout = num / ce.sum()
    ya = vout.copy()
    if adc_on:
        code = np.clip(np.floor((vout - lo) / step), 0.0, levels - 1.0)
        yt = lo + (code + 0.5) * step
    else:
        yt = vout.copy()
    return ya, yt


# --- loop backend (JIT-compiled when numba is active) --------------------


def _qs_die_loop(X, U, mism, jit, th, bx, bw, k_h, lo, step, levels, adc_on):
    V, N = X.shape
    ya = np.zeros(V)
    yt = np.zeros(V)
    for v in prange(V):
        acc_a = 0.0
        acc_t = 0.0
        for ii in range(bw):
            for kk in range(bx):
                s = 0.0
                for j in range(N):
                    if ((U[v, j] >> (bw - 1 - ii)) & 1) and (
                        (X[v, j] >> (bx - 1 - kk)) & 1
                    ):
                        s += (1.0 + mism[ii, kk, j]) * (1.0 + jit[v, kk, j])
                s += th[v, ii, kk]
                if s > k_h:
                    s = k_h
                wgt = 2.0 ** ((bw - 1 - ii) + (bx - 1 - kk))
                acc_a += wgt * s
                if adc_on:
                    code = np.floor((s - lo) / step)
                    if code < 0.0:
                        code = 0.0
                    elif code > levels - 1.0:
                        code = levels - 1.0
                    acc_t += wgt * (lo + (code + 0.5) * step)
                else:
                    acc_t += wgt * s
        ya[v] = acc_a
        yt[v] = acc_t
    return ya, yt


def _qr_die_loop(xq, U, cm, cth, inj_gain, vdd, vt, bw, lo, step, levels, adc_on):
    V, N = xq.shape
    ya = np.zeros(V)
    yt = np.zeros(V)
    den = np.empty(bw)
    for ii in range(bw):
        t = 0.0
        for j in range(N):
            t += 1.0 + cm[ii, j]
        den[ii] = t
    for v in prange(V):
        acc_a = 0.0
        acc_t = 0.0
        for ii in range(bw):
            num = 0.0
            for j in range(N):
                vj = 0.0
                if (U[v, j] >> (bw - 1 - ii)) & 1:
                    vj = xq[v, j] * vdd
                num += (1.0 + cm[ii, j]) * (vj + cth[v, ii, j])
                num += inj_gain * (vdd - vt - vj)
            v_plane = num / den[ii]
            wgt = 2.0 ** (bw - 1 - ii)
            acc_a += wgt * v_plane
            if adc_on:
                code = np.floor((v_plane - lo) / step)
                if code < 0.0:
                    code = 0.0
                elif code > levels - 1.0:
                    code = levels - 1.0
                acc_t += wgt * (lo + (code + 0.5) * step)
            else:
                acc_t += wgt * v_plane
        ya[v] = acc_a
        yt[v] = acc_t
    return ya, yt


def _cm_die_loop(
    xq, mag, sgn, mismB, jitB, blth, cm, cth, inj_gain, vdd, vt,
    u, k_h, bw, lo, step, levels, adc_on,
):
    V, N = xq.shape
    ya = np.zeros(V)
    yt = np.zeros(V)
    den = 0.0
    for j in range(N):
        den += 1.0 + cm[j]
    for v in prange(V):
        num = 0.0
        for j in range(N):
            d = 0.5 * (1.0 + mismB[bw - 1, j]) * (1.0 + jitB[v, bw - 1, j])
            for ii in range(bw - 1):
                if (mag[v, j] >> (bw - 2 - ii)) & 1:
                    d += (
                        2.0 ** (bw - 2 - ii)
                        * (1.0 + mismB[ii, j])
                        * (1.0 + jitB[v, ii, j])
                    )
            d += blth[v, j]
            if d > k_h:
                d = k_h
            vcol = sgn[v, j] * xq[v, j] * d * u
            num += (1.0 + cm[j]) * (vcol + cth[v, j])
            num += inj_gain * (vdd - vt - vcol)
        vout = num / den
        ya[v] = vout
        if adc_on:
            code = np.floor((vout - lo) / step)
            if code < 0.0:
                code = 0.0
            elif code > levels - 1.0:
                code = levels - 1.0
            yt[v] = lo + (code + 0.5) * step
        else:
            yt[v] = vout
    return ya, yt


# --- backend selection ---------------------------------------------------

_NUMPY_IMPLS = {"qs": _qs_die_numpy, "qr": _qr_die_numpy, "cm": _cm_die_numpy}

if HAVE_NUMBA:
    _qs_die_jit = njit(cache=True, parallel=True)(_qs_die_loop)
    _qr_die_jit = njit(cache=True, parallel=True)(_qr_die_loop)
    _cm_die_jit = njit(cache=True, parallel=True)(_cm_die_loop)
    _NUMBA_IMPLS = {"qs": _qs_die_jit, "qr": _qr_die_jit, "cm": _cm_die_jit}
else:  # pragma: no cover
    _NUMBA_IMPLS = {}

if HAVE_NUMBA and not _DISABLED:
    BACKEND = "numba"
    qs_arch_die = _NUMBA_IMPLS["qs"]
    qr_arch_die = _NUMBA_IMPLS["qr"]
    cm_die = _NUMBA_IMPLS["cm"]
else:
    BACKEND = "numpy"
    qs_arch_die = _NUMPY_IMPLS["qs"]
    qr_arch_die = _NUMPY_IMPLS["qr"]
    cm_die = _NUMPY_IMPLS["cm"]


def get_impl(name: str, backend: str):
    """Fetch a kernel by name ('qs', 'qr', 'cm') and backend ('numpy', 'numba')."""
    if backend == "numpy":
        return _NUMPY_IMPLS[name]
    if backend == "numba":
        if not HAVE_NUMBA:
            raise RuntimeError("numba backend requested but numba is unavailable")
        return _NUMBA_IMPLS[name]
    raise ValueError(f"unknown backend {backend!r}")
