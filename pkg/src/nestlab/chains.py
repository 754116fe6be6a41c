"""Pullback chains G_0, ..., G_s and horizon-bounded niceness checks.

A chain records the successive preimage components of a target interval
along a real orbit: G_s is the target and G_j is the component of
f^{-1}(G_{j+1}) containing the j-th orbit point. The order of the chain
counts how many of G_0..G_{s-1} contain a critical point; the intersection
multiplicity is the maximal number of chain intervals covering one point.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from . import config
from ._kernels import pullback_first_quadratic, pullback_interval_quadratic
from .errors import (CapExceeded, ConfigError, OrbitEscapes,
                     PreimageDegenerates)
from .intervals import RealInterval
from .maps import MapSpec, evaluate, orbit

# entry margin for niceness checks: inside by less than this does not count,
# and approaches closer than this are flagged as grazing
_MARGIN_REL = 1e-2
_MARGIN_ABS = 1e3 * config.TOL_BASE


@dataclass(frozen=True)
class Chain:
    """Endpoint arrays los/his of length s+1; index j holds G_j."""

    los: np.ndarray
    his: np.ndarray
    order: int
    intersection_multiplicity: int
    critical_times: tuple = ()          # (j, critical location) pairs, j < s
    _cache: dict = field(default_factory=dict, compare=False, repr=False)

    @property
    def s(self) -> int:
        return len(self.los) - 1

    def interval(self, j: int) -> RealInterval:
        return RealInterval.from_endpoints(float(self.los[j]), float(self.his[j]))

    @property
    def intervals(self) -> list[RealInterval]:
        return [self.interval(j) for j in range(self.s + 1)]

    @property
    def first(self) -> RealInterval:
        return self.interval(0)

    @property
    def target(self) -> RealInterval:
        return self.interval(self.s)

    def visits_to(self, piece: RealInterval, j_from: int = 0,
                  j_to: int | None = None) -> np.ndarray:
        """Times j in [j_from, j_to] with G_j inside the given interval."""
        j_to = self.s if j_to is None else j_to
        lo = self.los[j_from:j_to + 1]
        hi = self.his[j_from:j_to + 1]
        mask = (lo >= piece.a) & (hi <= piece.b)
        return np.nonzero(mask)[0] + j_from


def _laps(m: MapSpec) -> list[float]:
    return [c.location for c in m.criticals]


def _expand_side(m: MapSpec, target: RealInterval, x: float,
                 direction: int, tol: float) -> float:
    """Endpoint of Comp_x f^{-1}(target) on the given side of x."""
    crit_locs = _laps(m)
    anchor = x
    guard = 0
    while True:
        guard += 1
        if guard > len(crit_locs) + 2:
            raise PreimageDegenerates(
                f"lap walk failed around x={x} for target {target}")
        if direction > 0:
            nxt = [c for c in crit_locs if c > anchor + tol]
            edge = min(nxt) if nxt else m.domain.b
            at_boundary = not nxt
        else:
            nxt = [c for c in crit_locs if c < anchor - tol]
            edge = max(nxt) if nxt else m.domain.a
            at_boundary = not nxt
        fe = evaluate(m, edge)
        if target.contains(fe) and abs(fe - target.a) > tol and abs(fe - target.b) > tol:
            if at_boundary:
                return edge
            anchor = edge          # crossed a critical point, keep walking
            continue
        if abs(fe - target.a) <= tol or abs(fe - target.b) <= tol:
            return edge
        hit = target.b if fe >= target.b else target.a
        lo, hi = (anchor, edge) if direction > 0 else (edge, anchor)
        ga = evaluate(m, lo) - hit
        gb = evaluate(m, hi) - hit
        if ga == 0.0:
            return lo
        if gb == 0.0:
            return hi
        if np.sign(ga) == np.sign(gb):
            raise PreimageDegenerates(
                f"no boundary crossing in lap [{lo}, {hi}] for {target}")
        return float(brentq(lambda t: evaluate(m, t) - hit, lo, hi,
                            xtol=tol / 4.0, rtol=1e-15))


def preimage_component(m: MapSpec, target: RealInterval, x: float,
                       tol: float | None = None) -> RealInterval:
    """The connected component of f^{-1}(target) containing x."""
    if tol is None:
        tol = config.TOL_BASE
    fx = evaluate(m, x)
    if not target.contains(fx, closed=True):
        raise OrbitEscapes(f"f({x}) = {fx} outside target {target}")
    left = _expand_side(m, target, x, -1, tol)
    right = _expand_side(m, target, x, +1, tol)
    if right - left <= 0.0:
        raise PreimageDegenerates(f"component at {x} collapsed")
    return RealInterval.from_endpoints(left, right)


def pullback_endpoints(m: MapSpec, target: RealInterval,
                       xs: np.ndarray) -> tuple[np.ndarray, np.ndarray, list]:
    """Endpoint arrays of the chain over the orbit slice xs = [x_0..x_{s-1}].

    Returns (los, his, critical_times) with arrays of length s+1.
    """
    s = len(xs)
    c = m.quadratic_c
    if c is not None:
        los, his, central, bad = pullback_interval_quadratic(
            c, np.asarray(xs, dtype=float), target.a, target.b)
        if bad >= 0:
            raise PreimageDegenerates(f"chain step {bad} collapsed")
        crit_times = [(int(j), 0.0) for j in np.nonzero(central)[0]]
        return los, his, crit_times
    los = np.empty(s + 1)
    his = np.empty(s + 1)
    los[s], his[s] = target.a, target.b
    crit_times: list = []
    cur = target
    for j in range(s - 1, -1, -1):
        cur = preimage_component(m, cur, float(xs[j]))
        los[j], his[j] = cur.a, cur.b
        for cp in m.criticals:
            if cur.contains(cp.location):
                crit_times.append((j, cp.location))
    crit_times.sort()
    return los, his, crit_times


def _multiplicity(los: np.ndarray, his: np.ndarray) -> int:
    events = np.empty(2 * len(los))
    events[: len(los)] = los
    events[len(los):] = his
    kinds = np.empty(2 * len(los), dtype=np.int8)
    kinds[: len(los)] = 1
    kinds[len(los):] = -1
    # close before open at ties so touching intervals do not stack
    idx = np.lexsort((-kinds, events))
    return int(np.max(np.cumsum(kinds[idx])))


# chains shorter than this are materialized in full; longer ones stream
_STREAM_THRESHOLD = 2 ** 22


def first_component(m: MapSpec, target: RealInterval, x: float,
                    s: int) -> tuple[RealInterval, int, bool]:
    """(G_0, order, critical at step 0) of the chain, without keeping it.

    Short chains reuse the full construction; long ones stream the
    pullback in fixed-size blocks, which only the closed quadratic form
    supports.
    """
    if s <= _STREAM_THRESHOLD:
        ch = build_chain(m, target, x, s)
        central = any(j == 0 for j, _ in ch.critical_times)
        return ch.first, ch.order, central
    c = m.quadratic_c
    if c is None:
        raise CapExceeded(
            f"chain of length {s} cannot be materialized for this map")
    lo, hi, order, central0, bad, fs = pullback_first_quadratic(
        c, float(x), int(s), target.a, target.b, 1 << 16)
    if not target.contains(float(fs), closed=True):
        raise OrbitEscapes(
            f"f^{s}({x}) = {fs:.17g} outside target {target}")
    if bad >= 0:
        raise PreimageDegenerates(f"chain step {bad} collapsed")
    return RealInterval.from_endpoints(float(lo), float(hi)), int(order), \
        bool(central0)


def build_chain(m: MapSpec, target: RealInterval, x: float, s: int) -> Chain:
    """Chain with G_s = target and G_0 containing x, pulled back along the
    orbit of x. Needs f^s(x) inside the target."""
    if s < 0:
        raise ConfigError("chain length must be >= 0")
    xs = orbit(m, x, s)
    if s == 0:
        if not target.contains(x, closed=True):
            raise OrbitEscapes(f"x = {x} not in target {target}")
        los = np.array([target.a])
        his = np.array([target.b])
        return Chain(los, his, 0, 1, ())
    if not target.contains(float(xs[s]), closed=True):
        raise OrbitEscapes(
            f"f^{s}({x}) = {xs[s]:.17g} outside target {target}")
    los, his, crit_times = pullback_endpoints(m, target, xs[:s])
    return Chain(los, his, order=len(crit_times),
                 intersection_multiplicity=_multiplicity(los, his),
                 critical_times=tuple(crit_times))


# ---------------------------------------------------------------------------
# niceness


@dataclass(frozen=True)
class NiceResult:
    nice: bool
    conclusive: bool
    witness: tuple | None = None     # (endpoint, entry time)
    grazing: int = 0

    def __bool__(self) -> bool:
        return self.nice


def _entry_margin(interval: RealInterval) -> float:
    return min(_MARGIN_REL * interval.length, _MARGIN_ABS)


def _orbit_avoids(m: MapSpec, start: float, target: RealInterval,
                  horizon: int) -> tuple[bool, bool, int | None, int]:
    """Scan the orbit of ``start`` for entries into the open target.

    Returns (avoids, conclusive, entry_time, grazing_count).
    """
    margin = _entry_margin(target)
    a_in, b_in = target.a + margin, target.b - margin
    a_out, b_out = target.a - margin, target.b + margin
    block = 4096
    x = start
    t = 0
    grazing = 0
    anchors: list[tuple[int, float]] = []
    next_anchor = 1
    ctol = max(1e-12, 1e-10 * m.domain.length)
    while t < horizon:
        n = min(block, horizon - t)
        xs = orbit(m, x, n)
        seg = xs[1:]
        inside = (seg > a_in) & (seg < b_in)
        if np.any(inside):
            k = int(np.argmax(inside))
            return False, True, t + k + 1, grazing
        near = (seg > a_out) & (seg < b_out)
        grazing += int(np.count_nonzero(near))
        for at, av in anchors:
            close = np.abs(seg - av) < ctol
            if np.any(close):
                k = int(np.argmax(close))
                period = (t + k + 1) - at
                if period > 0 and _verify_cycle(m, float(seg[k]), period,
                                                target, margin, ctol):
                    return True, True, None, grazing
        x = float(xs[-1])
        t += n
        while next_anchor <= t:
            if next_anchor > t - n:
                anchors.append((next_anchor, float(xs[next_anchor - (t - n)])))
            next_anchor *= 2
    return True, False, None, grazing


def _verify_cycle(m: MapSpec, x: float, period: int, target: RealInterval,
                  margin: float, ctol: float) -> bool:
    xs = orbit(m, x, period)
    if abs(float(xs[-1]) - x) > 10.0 * ctol:
        return False
    inside = (xs > target.a + margin) & (xs < target.b - margin)
    return not bool(np.any(inside))


def is_nice(m: MapSpec, interval: RealInterval,
            horizon: int | None = None) -> NiceResult:
    """No forward iterate of either endpoint may re-enter the open interval.

    Conclusive when every endpoint orbit either provably cycles outside the
    interval or an entry is found; otherwise the horizon ran out.
    """
    if horizon is None:
        horizon = config.NICE_HORIZON
    conclusive_all = True
    grazing_total = 0
    for e in interval.endpoints:
        avoids, conclusive, t_entry, grz = _orbit_avoids(m, e, interval, horizon)
        grazing_total += grz
        if not avoids:
            return NiceResult(False, True, (e, t_entry), grazing_total)
        conclusive_all = conclusive_all and conclusive
    return NiceResult(True, conclusive_all, None, grazing_total)


def nice_pair(m: MapSpec, inner: RealInterval, outer: RealInterval,
              horizon: int | None = None) -> NiceResult:
    """Orbits of the inner interval's endpoints must avoid the open outer
    interval (inner contained in outer)."""
    if horizon is None:
        horizon = config.NICE_HORIZON
    if not outer.contains_interval(inner, margin=config.TOL_BASE):
        raise ConfigError(f"{inner} is not inside {outer}")
    conclusive_all = True
    grazing_total = 0
    for e in inner.endpoints:
        avoids, conclusive, t_entry, grz = _orbit_avoids(m, e, outer, horizon)
        grazing_total += grz
        if not avoids:
            return NiceResult(False, True, (e, t_entry), grazing_total)
        conclusive_all = conclusive_all and conclusive
    return NiceResult(True, conclusive_all, None, grazing_total)
