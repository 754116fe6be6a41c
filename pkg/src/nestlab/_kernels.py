"""Hot loops, JIT-compiled when numba is available.

Everything here is plain scalar/array numerics with no package imports, so the
same source runs compiled or interpreted. Set NESTLAB_NO_NUMBA=1 to force the
interpreted path (used in CI to exercise the fallback).
"""

from __future__ import annotations

import os

import numpy as np

HAVE_NUMBA = False
if not os.environ.get("NESTLAB_NO_NUMBA"):
    try:
        from numba import njit

        HAVE_NUMBA = True
    except ImportError:  # pragma: no cover
        pass

if not HAVE_NUMBA:
    def njit(*args, **kwargs):  # type: ignore
        if args and callable(args[0]):
            return args[0]

        def wrap(fn):
            return fn

        return wrap


@njit(cache=True)
def horner(coeffs: np.ndarray, x: float) -> float:
    acc = 0.0
    for k in range(len(coeffs) - 1, -1, -1):
        acc = acc * x + coeffs[k]
    return acc


@njit(cache=True)
def fill_orbit(coeffs: np.ndarray, x0: float, n: int) -> np.ndarray:
    """Forward orbit [x0, f(x0), ..., f^n(x0)], length n + 1."""
    out = np.empty(n + 1)
    x = x0
    out[0] = x
    for i in range(1, n + 1):
        acc = 0.0
        for k in range(len(coeffs) - 1, -1, -1):
            acc = acc * x + coeffs[k]
        x = acc
        out[i] = x
    return out


@njit(cache=True)
def first_entry(coeffs: np.ndarray, x0: float, a: float, b: float,
                start: int, horizon: int, dom_a: float, dom_b: float) -> int:
    """Smallest t in [start, horizon] with f^t(x0) in (a, b).

    Returns -1 when no entry happens, -(t + 10) when the orbit leaves
    [dom_a, dom_b] at time t before entering.
    """
    x = x0
    for t in range(1, horizon + 1):
        acc = 0.0
        for k in range(len(coeffs) - 1, -1, -1):
            acc = acc * x + coeffs[k]
        x = acc
        if x < dom_a or x > dom_b:
            return -(t + 10)
        if t >= start and a < x < b:
            return t
    return -1


@njit(cache=True)
def iterate_n(coeffs: np.ndarray, x0: float, n: int) -> float:
    """f^n(x0) without storing the orbit."""
    x = x0
    for _ in range(n):
        acc = 0.0
        for k in range(len(coeffs) - 1, -1, -1):
            acc = acc * x + coeffs[k]
        x = acc
    return x


@njit(cache=True)
def entries_into(coeffs: np.ndarray, x0: float, a: float, b: float,
                 start: int, horizon: int, max_count: int,
                 dom_a: float, dom_b: float) -> np.ndarray:
    """Times t in [start, horizon] with f^t(x0) in (a, b), at most
    max_count of them, -1 padded.  Streams the orbit without storing it;
    a domain escape ends the scan early.
    """
    out = np.full(max_count, np.int64(-1))
    n = 0
    x = x0
    for t in range(1, horizon + 1):
        acc = 0.0
        for k in range(len(coeffs) - 1, -1, -1):
            acc = acc * x + coeffs[k]
        x = acc
        if x < dom_a or x > dom_b:
            break
        if t >= start and a < x < b:
            out[n] = t
            n += 1
            if n >= max_count:
                break
    return out


@njit(cache=True)
def pullback_interval_quadratic(c: float, xs: np.ndarray,
                                a_s: float, b_s: float):
    """Pull (a_s, b_s) back along the orbit slice xs = [x_0 .. x_{s-1}]
    of f(x) = x^2 + c, taking at each step the preimage component that
    contains x_j. Returns endpoint arrays of length s + 1 (index j holds
    G_j), central-step flags of length s, and the step count that hit a
    degenerate component (-1 if none).
    """
    s = len(xs)
    lo = np.empty(s + 1)
    hi = np.empty(s + 1)
    central = np.zeros(s, dtype=np.uint8)
    lo[s] = a_s
    hi[s] = b_s
    bad = -1
    for j in range(s - 1, -1, -1):
        aj1 = lo[j + 1]
        bj1 = hi[j + 1]
        ub = bj1 - c
        if ub <= 0.0:
            bad = j
            ub = 0.0
        rb = np.sqrt(ub)
        if aj1 < c:
            # component straddles the turning point at 0
            lo[j] = -rb
            hi[j] = rb
            central[j] = 1
        else:
            ra = np.sqrt(aj1 - c)
            if xs[j] >= 0.0:
                lo[j] = ra
                hi[j] = rb
            else:
                lo[j] = -rb
                hi[j] = -ra
        if hi[j] - lo[j] <= 0.0:
            bad = j
    return lo, hi, central, bad


@njit(cache=True)
def pullback_first_quadratic(c: float, x0: float, s: int,
                             a_s: float, b_s: float, block: int):
    """First interval of the chain over f(x) = x^2 + c from x0 with time
    s, computed in O(block) memory: one forward pass records checkpoints,
    then blocks are regenerated and consumed in reverse.

    Returns (lo0, hi0, order, central0, bad, fs) where order counts the
    steps whose component straddles the turning point, central0 flags the
    step j = 0, bad is the earliest degenerate step (-1 if none) and fs
    is f^s(x0) for the caller's containment check.
    """
    nblocks = (s + block - 1) // block
    checkpoints = np.empty(nblocks)
    x = x0
    for i in range(nblocks):
        checkpoints[i] = x
        steps = block if (i + 1) * block <= s else s - i * block
        for _ in range(steps):
            x = x * x + c
    fs = x
    lo = a_s
    hi = b_s
    order = 0
    central0 = 0
    bad = -1
    buf = np.empty(block)
    for i in range(nblocks - 1, -1, -1):
        xb = checkpoints[i]
        j0 = i * block
        steps = block if j0 + block <= s else s - j0
        xx = xb
        for k in range(steps):
            buf[k] = xx
            xx = xx * xx + c
        for k in range(steps - 1, -1, -1):
            aj1 = lo
            ub = hi - c
            if ub <= 0.0:
                bad = j0 + k
                ub = 0.0
            rb = np.sqrt(ub)
            if aj1 < c:
                lo = -rb
                hi = rb
                order += 1
                if j0 + k == 0:
                    central0 = 1
            else:
                ra = np.sqrt(aj1 - c)
                if buf[k] >= 0.0:
                    lo = ra
                    hi = rb
                else:
                    lo = -rb
                    hi = -ra
            if hi - lo <= 0.0:
                bad = j0 + k
    return lo, hi, order, central0, bad, fs


@njit(cache=True)
def closest_return_records(coeffs: np.ndarray, x0: float, horizon: int,
                           dom_a: float, dom_b: float) -> np.ndarray:
    """Times t where |f^t(x0) - x0| sets a new record minimum.

    The returned array is padded with -1 past the last record.
    """
    out = np.full(64, -1, dtype=np.int64)
    best = 1e300
    x = x0
    m = 0
    for t in range(1, horizon + 1):
        acc = 0.0
        for k in range(len(coeffs) - 1, -1, -1):
            acc = acc * x + coeffs[k]
        x = acc
        if x < dom_a or x > dom_b:
            break
        d = abs(x - x0)
        if d < best:
            best = d
            if m < 64:
                out[m] = t
            m += 1
    return out
