"""Brute-force validators, kept deliberately naive.

Everything here recomputes its answer from scratch with plain iteration,
pixel grids, or bisection on the quadratic family, sharing nothing with
the main modules beyond map evaluation.  Fixture parameters and every
derived expectation in the test suite come from these functions first;
the main algorithms are then required to agree.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import ndimage

from .errors import NumericalError
from .intervals import RealInterval
from .maps import MapSpec, evaluate


@dataclass(frozen=True)
class OracleResult:
    claim_id: str
    method: str  # grid | bisection | exhaustive-orbit | closed-form
    resolution: float
    verdict: bool
    witness: object = None
    detail: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        w = self.witness
        if isinstance(w, complex):
            w = [w.real, w.imag]
        return {"claim_id": self.claim_id, "method": self.method,
                "resolution": self.resolution, "verdict": self.verdict,
                "witness": w, "detail": dict(self.detail)}


# ---------------------------------------------------------------------------
# orbit oracle


def orbit_return_oracle(m: MapSpec, interval: RealInterval, x: float,
                        horizon: int) -> int:
    """First t in 1..horizon with f^t(x) inside the open interval, else -1."""
    a, b = interval.a, interval.b
    z = x
    for t in range(1, horizon + 1):
        z = evaluate(m, z)
        if a < z < b:
            return t
    return -1


# ---------------------------------------------------------------------------
# pixel-grid set comparison


def _as_predicate(obj) -> Callable[[np.ndarray], np.ndarray]:
    if callable(obj):
        return obj
    if hasattr(obj, "contains_points"):
        return obj.contains_points
    raise TypeError(f"cannot interpret {type(obj).__name__} as a point set")


def grid_membership(claim_id: str, computed, exact,
                    box: tuple[float, float, float, float],
                    resolution: int = 2048, dilation_px: int = 2,
                    mode: str = "equal") -> OracleResult:
    """Rasterized set comparison on a bounding box.

    ``computed`` and ``exact`` are membership tests (callables on complex
    arrays, or objects with contains_points).  mode "subset" checks
    computed ⊆ dilate(exact); "equal" checks both directions.  The
    witness is the first violating pixel center.
    """
    comp_p, exact_p = _as_predicate(computed), _as_predicate(exact)
    re0, re1, im0, im1 = box
    xs = np.linspace(re0, re1, resolution)
    ys = np.linspace(im0, im1, resolution)
    zz = xs[None, :] + 1j * ys[:, None]
    comp_mask = comp_p(zz)
    exact_mask = exact_p(zz)
    structure = ndimage.generate_binary_structure(2, 2)  # 8-connected
    exact_fat = ndimage.binary_dilation(exact_mask, structure,
                                        iterations=dilation_px)
    bad = comp_mask & ~exact_fat
    detail: dict = {"pixels_computed": int(comp_mask.sum()),
                    "pixels_exact": int(exact_mask.sum())}
    witness = None
    if bad.any():
        i, j = np.argwhere(bad)[0]
        witness = complex(zz[i, j])
        detail["direction"] = "computed not in exact"
    elif mode == "equal":
        comp_fat = ndimage.binary_dilation(comp_mask, structure,
                                           iterations=dilation_px)
        bad = exact_mask & ~comp_fat
        if bad.any():
            i, j = np.argwhere(bad)[0]
            witness = complex(zz[i, j])
            detail["direction"] = "exact not in computed"
    return OracleResult(claim_id, "grid", float(resolution),
                        witness is None, witness, detail)


# ---------------------------------------------------------------------------
# quadratic-family parameter hunting
#
# The family is x -> x^2 + c throughout; orbits are iterated inline so the
# oracle does not depend on MapSpec construction.


def _crit_after(c: float, n: int) -> float:
    x = 0.0
    for _ in range(n):
        x = x * x + c
    return x


def _crit_orbit(c: float, n: int) -> np.ndarray:
    out = np.empty(n + 1)
    x = 0.0
    out[0] = x
    for t in range(1, n + 1):
        x = x * x + c
        out[t] = x
    return out


def closest_return_record_times(c: float, horizon: int,
                                max_records: int = 64) -> list[int]:
    """Times where |f^t(0)| reaches a new record minimum, t >= 1."""
    best = np.inf
    records: list[int] = []
    x = 0.0
    for t in range(1, horizon + 1):
        x = x * x + c
        if abs(x) > 4.0:
            break
        if abs(x) < best:
            best = abs(x)
            records.append(t)
            if len(records) >= max_records:
                break
    return records


_superstable_cache: dict[int, float] = {1: -1.0}


def superstable_parameter(k: int, tol: float = 1e-14) -> float:
    """Parameter of the superstable orbit of period 2^k in the main cascade.

    k=0 is the fixed point c=0, k=1 the period-2 orbit at c=-1; deeper
    levels are found by bisecting f^(2^k)(0) between the previous
    superstable parameter and a geometric extrapolation of the cascade.
    """
    if k == 0:
        return 0.0
    got = _superstable_cache.get(k)
    if got is not None:
        return got
    s_prev = superstable_parameter(k - 1, tol)
    s_pprev = superstable_parameter(k - 2, tol) if k >= 2 else 0.0
    d_prev = s_prev - s_pprev
    n = 2 ** k
    g = lambda c: _crit_after(c, n)
    # the next superstable sits at roughly s_prev + d_prev/4.67; bracket it
    # between a point just past s_prev and a geometric overshoot that still
    # stays short of the accumulation point
    hi = s_prev + 0.02 * d_prev
    guess_ratio = 0.35 if k <= 2 else 0.24
    lo = s_prev + guess_ratio * d_prev
    g_hi = g(hi)
    while np.sign(g(lo)) == np.sign(g_hi):
        guess_ratio += 0.02
        if guess_ratio > 0.48:
            raise NumericalError(
                f"no sign change bracketing period-2^{k} superstable")
        lo = s_prev + guess_ratio * d_prev
    a, b = lo, hi
    fa = g(a)
    while b - a > tol:
        mid = 0.5 * (a + b)
        fm = g(mid)
        if fm == 0.0:
            a = b = mid
            break
        if np.sign(fm) == np.sign(fa):
            a, fa = mid, fm
        else:
            b = mid
    c = 0.5 * (a + b)
    _superstable_cache[k] = c
    return c


def feigenbaum_accumulation(depth: int = 12) -> tuple[float, dict]:
    """Limit of the superstable cascade with its convergence certificate."""
    s = [superstable_parameter(k) for k in range(1, depth + 1)]
    diffs = np.diff(s)
    ratios = diffs[1:] / diffs[:-1]
    r = ratios[-1]
    acc = s[-1] + diffs[-1] * r / (1.0 - r)
    cert = {"superstable": s, "differences": diffs.tolist(),
            "ratios": ratios.tolist(),
            "delta_estimate": 1.0 / r,
            "cauchy_gap": abs(float(diffs[-1]))}
    return acc, cert


def feigenbaum_spatial_ratios(depth: int = 10) -> dict:
    """Closest-return distances |f^(2^(k-1))(0)| at the superstable
    parameters, whose successive ratios give the spatial scaling of the
    cascade (about 0.3995 in absolute value)."""
    dists, params = [], []
    for k in range(1, depth + 1):
        c = superstable_parameter(k)
        params.append(c)
        dists.append(abs(_crit_after(c, 2 ** (k - 1))))
    ratios = [dists[i + 1] / dists[i] for i in range(len(dists) - 1)]
    return {"parameters": params, "closest_return_distances": dists,
            "ratios": ratios}


# Fibonacci combinatorics: closest-return record times 1, 2, 3, 5, 8, ...


def _fibs(n: int) -> list[int]:
    out = [1, 2]
    while len(out) < n:
        out.append(out[-1] + out[-2])
    return out[:n]


def _fibonacci_matches(c: float, depth: int) -> bool:
    """Record times agree with the first ``depth`` Fibonacci numbers."""
    fibs = _fibs(depth)
    recs = closest_return_record_times(c, fibs[-1] + 1, max_records=depth + 4)
    return recs[:depth] == fibs


def _verified_root_near(func, center: float, halfwidth: float,
                        accept, tol: float, scan: int = 4001,
                        widenings: int = 4) -> float | None:
    """Closest root of func to center (within the window) passing accept."""
    for _ in range(widenings):
        grid = np.linspace(center - halfwidth, center + halfwidth, scan)
        vals = np.array([func(g) for g in grid])
        sign_flip = np.nonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0)[0]
        roots = []
        for i in sign_flip:
            a, b = grid[i], grid[i + 1]
            fa = vals[i]
            while b - a > tol:
                mid = 0.5 * (a + b)
                fm = func(mid)
                if np.sign(fm) == np.sign(fa):
                    a, fa = mid, fm
                else:
                    b = mid
            roots.append(0.5 * (a + b))
        for r in sorted(roots, key=lambda r: abs(r - center)):
            if accept(r):
                return r
        halfwidth *= 1.6
    return None


def fibonacci_parameter(depth: int = 20, tol: float = 5e-15) -> float:
    """Quadratic parameter whose closest-return record times are the first
    ``depth`` Fibonacci numbers.

    Built through the superstable approximants: the k-th solves
    f^(S_k)(0) = 0 with the record prefix verified, each found near the
    geometric extrapolation of its predecessors.  Stops early when the
    approximants collapse within working precision.
    """
    fibs = _fibs(max(depth, 3))
    cs = [-1.0]  # the S_2 = 2 superstable; S_1 = 1 is degenerate (c = 0)
    for k in range(3, depth + 1):
        n = fibs[k - 1]
        h = lambda c, n=n: _crit_after(c, n)
        accept = lambda c, k=k: _fibonacci_matches(c, k)
        if k == 3:
            center, halfwidth = -1.76, 0.12
        else:
            gap = cs[-1] - cs[-2]
            ratio = 0.15 if k == 4 else max(min(_last_ratio(cs), 0.5), 0.02)
            center = cs[-1] + gap * ratio
            halfwidth = 0.6 * abs(gap)
        root = _verified_root_near(h, center, halfwidth, accept, tol)
        if root is None:
            if k > 4 and abs(cs[-1] - cs[-2]) < 1e-12:
                break  # approximants collapsed to the precision floor
            raise NumericalError(
                f"no verified Fibonacci approximant at level {k}")
        cs.append(root)
        if k >= 4 and abs(cs[-1] - cs[-2]) < 4.0 * tol:
            break
    return cs[-1]


def _last_ratio(cs: list[float]) -> float:
    return (cs[-1] - cs[-2]) / (cs[-2] - cs[-3])


def parameter_bisection(kind: str, k: int, full: bool = False):
    """Fixture parameters by naive bisection on the quadratic family.

    kind: "superstable" (period 2^k), "feigenbaum_accumulation" (cascade
    limit through depth k), or "fibonacci" (record times through the
    k-th Fibonacci number).  Returns c, or an OracleResult when full.
    """
    if kind == "superstable":
        c = superstable_parameter(k)
        res = abs(_crit_after(c, 2 ** k))
        out = OracleResult(f"superstable-2^{k}", "bisection", 1e-14,
                           res < 1e-12, c, {"residual": res})
    elif kind == "feigenbaum_accumulation":
        c, cert = feigenbaum_accumulation(k)
        out = OracleResult("feigenbaum-accumulation", "bisection",
                           cert["cauchy_gap"], cert["cauchy_gap"] < 1e-8,
                           c, cert)
    elif kind == "fibonacci":
        c = fibonacci_parameter(k)
        fibs = _fibs(k)
        recs = closest_return_record_times(c, fibs[-1] + 1, k + 4)
        matched = sum(1 for a, b in zip(recs, fibs) if a == b)
        # at double precision the approximants collapse around level 11;
        # beyond that the verdict certifies the achievable prefix
        out = OracleResult(f"fibonacci-depth-{k}", "bisection", 1e-14,
                           matched >= min(k, 11), c,
                           {"matched_records": matched, "records": recs})
    else:
        raise ValueError(f"unknown parameter target {kind!r}")
    if not out.verdict:
        raise NumericalError(f"parameter search failed: {out.as_dict()}")
    return out if full else out.witness
