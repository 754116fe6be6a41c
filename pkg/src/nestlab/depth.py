"""Combinatorial depth of chains and of nested pieces.

The central object is the first-noncentral-return operator: a piece
around a critical point is sent to the first level of its principal
nest that the tracked return value leaves, and a terminating piece is
sent to its periodic limit.  Once a tower of such steps reaches a
terminating stage it stabilizes on the periodic limit, so containment
in that stage persists forever and the associated depth is infinite.

Depth answers two questions.  For a pullback chain: how many operator
steps does it take before the chain stops re-entering the shrinking
tower around each critical point it sweeps?  For a nested pair of
pieces: how many steps does the outer piece need before it fits inside
the inner one?
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import config
from ._kernels import iterate_n
from .chains import Chain, build_chain
from .errors import (CapExceeded, ConfigError, NestedOrDisjointViolated,
                     NoEntryWithinHorizon, NumericalError, OrbitEscapesDomain)
from .intervals import RealInterval
from .maps import (CriticalPoint, MapSpec, distinguished_critical, entry_time)
from .nest import detect_central_and_terminating, hat_landing
from .returns import OmegaSample, first_entry_domain


def _slack(interval: RealInterval) -> float:
    """Containment tolerance: absolute floor plus a relative hair."""
    return 10.0 * config.TOL_BASE + 1e-9 * interval.length


# ---------------------------------------------------------------------------
# the first-noncentral-return operator


def _first_return_value(m: MapSpec, interval: RealInterval, x: float,
                        horizon: int | None) -> tuple[float, int]:
    """Value and time of the first return of x into the interval."""
    hz = int(horizon or config.NICE_HORIZON)
    while True:
        t = entry_time(m, x, interval, hz)
        if t >= 1:
            return float(iterate_n(m.coeff_array, x, t)), t
        if t <= -10:
            raise OrbitEscapesDomain(
                f"orbit of x = {x} left the domain at time {-t - 10} "
                f"before returning to {interval}")
        if hz >= config.HORIZON_CAP:
            raise NoEntryWithinHorizon(
                f"x = {x} does not return to {interval} within "
                f"{hz} steps", horizon=hz)
        hz = int(min(16 * hz, config.HORIZON_CAP))


def _noncentral_step(m: MapSpec, interval: RealInterval, x: float | None,
                     omega: OmegaSample | None, horizon: int | None,
                     critical: CriticalPoint | None) -> tuple[RealInterval, str, int | None]:
    """One operator application; returns (image, kind, nest index).

    kind is "non-terminating" when the image is a principal-nest level
    and "terminating" when it is the periodic limit (after which the
    operator is constant).  The nest index is the minimal level the
    tracked return value escapes, or None for the terminating case.
    """
    cp = distinguished_critical(m) if critical is None else critical
    det = detect_central_and_terminating(m, interval, omega, horizon=horizon,
                                         critical=cp)
    if det.kind == "inconclusive":
        raise NumericalError(
            f"central cascade of {interval} is inconclusive "
            f"(detail: {det.detail}); cannot apply the noncentral-return "
            "operator")
    if det.kind == "terminating":
        return det.I_inf, "terminating", None
    track = cp.location if x is None else x
    value, _ = _first_return_value(m, interval, track, horizon)
    levels = list(det.levels)
    idx = 1
    while True:
        if idx >= len(levels):
            if len(levels) > config.CASCADE_CAP:
                raise NumericalError(
                    f"return value of x = {track} stayed inside "
                    f"{config.CASCADE_CAP} principal-nest levels of "
                    f"{interval}")
            br = first_entry_domain(m, levels[-1], cp.location, horizon,
                                    extend_to=config.HORIZON_CAP)
            levels.append(br.domain)
        lvl = levels[idx]
        eps = _slack(lvl)
        if not (lvl.a + eps <= value <= lvl.b - eps):
            return lvl, "non-terminating", idx
        idx += 1


def first_noncentral(m: MapSpec, interval: RealInterval,
                     x: float | None = None,
                     omega: OmegaSample | None = None,
                     horizon: int | None = None,
                     critical: CriticalPoint | None = None) -> RealInterval:
    """Image of the interval under the first-noncentral-return operator.

    Non-terminating intervals map to the lowest principal-nest level
    that the first return value of x (the critical point when x is not
    given) fails to reach; terminating intervals map to their periodic
    limit.  Inconclusive cascade classifications propagate as errors.
    Boundary-grazing return values count as escaped, so the result is
    stable under endpoint rounding.
    """
    return _noncentral_step(m, interval, x, omega, horizon, critical)[0]


# ---------------------------------------------------------------------------
# criticality sets


def _return_chain(m: MapSpec, interval: RealInterval, x: float,
                  horizon: int | None) -> Chain:
    """Chain of the first entry of x into the interval."""
    _, t = _first_return_value(m, interval, x, horizon)
    return build_chain(m, interval, x, t)


def crit_of_branch(m: MapSpec, interval: RealInterval, domain: RealInterval,
                   horizon: int | None = None) -> tuple[CriticalPoint, ...]:
    """Critical points swept by the return chain of a return domain.

    The chain runs from the domain up to its first return into the
    interval; every critical point lying in one of the pre-return chain
    intervals is collected.  The number of sweeps (counted with
    multiplicity) equals the chain order.
    """
    ch = _return_chain(m, interval, domain.mid, horizon)
    locs = sorted({loc for _, loc in ch.critical_times})
    by_loc = {c.location: c for c in m.criticals}
    return tuple(by_loc[loc] for loc in locs)


def _chain_visits(chain: Chain, interval: RealInterval) -> np.ndarray:
    """Times j with G_j inside the interval, up to boundary rounding."""
    eps = _slack(interval)
    grown = RealInterval(interval.mid, interval.half + eps)
    return chain.visits_to(grown)


def crit_of_chain(m: MapSpec, interval: RealInterval, chain: Chain,
                  horizon: int | None = None) -> tuple[CriticalPoint, ...]:
    """Critical points swept by a chain between its visits to the interval.

    For each consecutive pair of chain times whose intervals sit inside
    the given one, the criticals of the corresponding return chain are
    collected; the union over all pairs is returned.
    """
    visits = _chain_visits(chain, interval)
    locs: set[float] = set()
    for j in visits[:-1]:
        x = chain.interval(int(j)).mid
        ch = _return_chain(m, interval, x, horizon)
        locs.update(loc for _, loc in ch.critical_times)
    by_loc = {c.location: c for c in m.criticals}
    return tuple(by_loc[loc] for loc in sorted(locs))


# ---------------------------------------------------------------------------
# depth of a chain


@dataclass(frozen=True)
class DepthReport:
    """Per-critical and total combinatorial depth of a chain.

    Depths are non-negative integers, or math.inf when the chain enters
    the periodic limit of a terminating tower stage (containment then
    persists forever).  When a tower had to be cut at the cap the
    per-critical value holds the cap and ``capped`` is set; that is a
    resource limit, not an infinity.
    """

    per_critical: dict
    total: float
    crit_set: tuple
    capped: bool
    cap: int

    @property
    def infinite(self) -> bool:
        return math.isinf(self.total)


def _interior_containment(chain: Chain, stage: RealInterval) -> bool:
    """Any interior chain interval inside the closed stage.

    The chain endpoints are pulled inward by the rounding slack before
    the closed comparison, so an interval abutting (or exactly equal
    to) the stage counts while a sibling across the boundary does not.
    Every interior interval must be nested with or disjoint from the
    stage; a genuine straddle is a structural error.
    """
    s = chain.s
    if s < 2:
        return False
    lo = chain.los[1:s]
    hi = chain.his[1:s]
    eps = _slack(stage)
    inside = (lo >= stage.a - eps) & (hi <= stage.b + eps)
    contains_loose = (lo <= stage.a + eps) & (hi >= stage.b - eps)
    disjoint = (hi <= stage.a + eps) | (lo >= stage.b - eps)
    bad = ~(inside | contains_loose | disjoint)
    if bad.any():
        j = int(np.nonzero(bad)[0][0]) + 1
        raise NestedOrDisjointViolated(
            f"chain interval G_{j} = {chain.interval(j)} straddles "
            f"{stage}; pullbacks must be nested or disjoint")
    return bool(inside.any())


def _tower_depth(m: MapSpec, base: RealInterval, chain: Chain,
                 omega: OmegaSample | None, horizon: int | None,
                 critical: CriticalPoint, cap: int) -> tuple[float, bool]:
    """Smallest k with no interior chain interval inside stage k.

    Stage 0 is the base; each next stage applies the noncentral-return
    operator at the given critical.  Returns (depth, capped): depth is
    math.inf when containment persists in a terminating stage's
    periodic limit, and equals cap with capped=True when cut off.
    """
    stage = base
    fixed = False
    k = 0
    while True:
        if not _interior_containment(chain, stage):
            return k, False
        if fixed:
            return math.inf, False
        if k >= cap:
            return cap, True
        stage, kind, _ = _noncentral_step(m, stage, None, omega, horizon,
                                          critical)
        fixed = kind == "terminating"
        k += 1


def depth_of_chain(m: MapSpec, interval: RealInterval, chain: Chain,
                   omega: OmegaSample | None = None,
                   cap: int | None = None,
                   horizon: int | None = None) -> DepthReport:
    """Combinatorial depth of a chain with respect to an interval.

    For every critical point the chain sweeps between its visits to the
    interval, count how many noncentral-return steps the landing piece
    of that critical needs before no interior chain interval fits
    inside; the total is the sum.  A chain interval inside the periodic
    limit of a terminating stage makes that critical's depth infinite.
    """
    cap = config.DEPTH_CAP if cap is None else cap
    crit_set = crit_of_chain(m, interval, chain, horizon)
    per: dict[float, float] = {}
    capped = False
    for cp in crit_set:
        base, _ = hat_landing(m, interval, cp.location, horizon)
        kc, cut = _tower_depth(m, base, chain, omega, horizon, cp, cap)
        per[cp.location] = kc
        capped = capped or cut
    total = sum(per.values()) if per else 0
    return DepthReport(per, total, crit_set, capped, cap)


# ---------------------------------------------------------------------------
# depth between nested pieces


def _critical_inside(m: MapSpec, interval: RealInterval) -> CriticalPoint:
    inside = [c for c in m.criticals
              if interval.contains(c.location, closed=True)]
    if not inside:
        raise ConfigError(
            f"depth between pieces needs a critical point inside the "
            f"inner piece {interval}")
    c0 = distinguished_critical(m)
    return c0 if c0 in inside else inside[0]


def depth_between(m: MapSpec, outer: RealInterval, inner: RealInterval,
                  omega: OmegaSample | None = None,
                  cap: int | None = None,
                  horizon: int | None = None,
                  critical: CriticalPoint | None = None) -> float:
    """Steps of the noncentral-return operator from outer down into inner.

    The tower runs at a critical point of the inner piece (the
    distinguished one when it qualifies).  Containment is tested closed
    with outward rounding slack, so the exact image of one operator step
    has depth one.  Returns math.inf when the tower stabilizes on a
    periodic limit that never fits; raises CapExceeded when the cap is
    hit first, which is a resource limit rather than an infinity.
    """
    cap = config.DEPTH_CAP if cap is None else cap
    cp = _critical_inside(m, inner) if critical is None else critical
    eps = _slack(inner)
    stage = outer
    fixed = False
    k = 0
    while not inner.contains_interval(stage, margin=eps):
        if fixed:
            return math.inf
        if k >= cap:
            raise CapExceeded(
                f"piece {outer} did not reach {inner} within {cap} "
                "noncentral-return steps")
        stage, kind, _ = _noncentral_step(m, stage, None, omega, horizon, cp)
        fixed = kind == "terminating"
        k += 1
    return k


def hat_depth_between(m: MapSpec, outer: RealInterval, inner: RealInterval,
                      omega: OmegaSample | None = None,
                      cap: int | None = None,
                      horizon: int | None = None) -> float:
    """Sum of depths between the per-critical landing pieces.

    For each critical point whose orbit reaches both pieces, the depth
    between its landing piece in the outer and its landing piece in the
    inner is computed at that critical; criticals that never reach the
    inner piece contribute nothing.
    """
    total: float = 0
    for cp in m.criticals:
        try:
            t_out, _ = hat_landing(m, outer, cp.location, horizon)
            t_in, _ = hat_landing(m, inner, cp.location, horizon)
        except (NoEntryWithinHorizon, OrbitEscapesDomain):
            continue
        total += depth_between(m, t_out, t_in, omega, cap, horizon,
                               critical=cp)
    return total
