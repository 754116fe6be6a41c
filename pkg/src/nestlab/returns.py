"""First-return and first-entry machinery over a finite orbit sample.

The recurrent set of the distinguished critical point is approximated by a
long, deduplicated stretch of its forward orbit.  Every branch of a return
map that we ever look at is a landing domain of one of those sample points,
so branch discovery walks the sample instead of enumerating preimage
components (which blows up exponentially with the return time).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from . import config
from ._kernels import entries_into, iterate_n
from .chains import first_component
from .errors import (EmptyIntersection, NestedOrDisjointViolated,
                     NoEntryWithinHorizon, OrbitEscapesDomain)
from .intervals import RealInterval
from .maps import (CriticalPoint, MapSpec, distinguished_critical, entry_time,
                   seed_orbit)


@dataclass(frozen=True, eq=False)
class OmegaSample:
    """Finite stand-in for the recurrent set of a critical point.

    ``points`` is sorted; ``orbit_indices[i]`` is an iterate count k with
    f^k(c) = points[i], so entry times can be read off the cached orbit
    of the map by index arithmetic instead of fresh iteration.
    """

    points: np.ndarray
    orbit_indices: np.ndarray
    burn_in: int
    length: int
    source_critical: int = 0
    seed: float = 0.0
    # set when the points are the successive entries of the seed orbit
    # into this interval; entry times then follow from index gaps alone
    local_to: RealInterval | None = None

    @property
    def count(self) -> int:
        return len(self.points)

    def points_in(self, interval: RealInterval) -> tuple[np.ndarray, np.ndarray]:
        """Sample points in the open interval, with their orbit indices."""
        lo = np.searchsorted(self.points, interval.a, side="right")
        hi = np.searchsorted(self.points, interval.b, side="left")
        return self.points[lo:hi], self.orbit_indices[lo:hi]

    def thinned(self, factor: int = 2) -> "OmegaSample":
        """Sub-sample built from the first 1/factor of the raw orbit stretch,
        for under-sampling diagnostics."""
        n = max(self.length // factor, 1)
        keep = self.orbit_indices < self.burn_in + n
        return OmegaSample(self.points[keep], self.orbit_indices[keep],
                           self.burn_in, n, self.source_critical, self.seed)

    def __repr__(self) -> str:
        return (f"OmegaSample({self.count} points, burn_in={self.burn_in}, "
                f"length={self.length})")


@dataclass(frozen=True)
class ReturnBranch:
    """One branch of a first-return or landing map."""

    domain: RealInterval
    return_time: int
    image: RealInterval
    monotone: bool
    critical_inside: CriticalPoint | None = None
    degenerate: bool = False
    omega_count: int = 0

    @property
    def central(self) -> bool:
        return self.critical_inside is not None

    def __repr__(self) -> str:
        kind = "unicritical" if self.central else "monotone"
        return (f"ReturnBranch(time={self.return_time}, {kind}, "
                f"domain={self.domain})")


def omega_sample(m: MapSpec, critical_index: int = 0, burn_in: int = 0,
                 length: int = 4096, seed: float | None = None) -> OmegaSample:
    """Deduplicated orbit stretch f^k(x0), burn_in <= k < burn_in + length.

    By default x0 is the chosen critical point; pass ``seed`` to sample
    the orbit of another point (useful when the critical orbit is finite
    but a dense reference orbit is wanted).
    """
    if seed is None:
        seed = m.criticals[critical_index].location
    orb = seed_orbit(m, seed, burn_in + length)
    seg = orb[burn_in:burn_in + length]
    pad = 0.5 * m.domain.length
    bad = np.nonzero((seg < m.domain.a - pad) | (seg > m.domain.b + pad)
                     | ~np.isfinite(seg))[0]
    if len(bad):
        raise OrbitEscapesDomain(
            f"critical orbit leaves the domain at time {burn_in + bad[0]}")
    order = np.argsort(seg, kind="stable")
    pts, idx = seg[order], np.arange(burn_in, burn_in + length)[order]
    # collapse runs of points closer than the resolution, keeping the
    # earliest orbit index of each run as its representative
    keep_pts, keep_idx = [], []
    j = 0
    while j < len(pts):
        k = j + 1
        while k < len(pts) and pts[k] - pts[k - 1] <= config.TOL_BASE:
            k += 1
        cluster = idx[j:k]
        keep_pts.append(pts[j + int(np.argmin(cluster))])
        keep_idx.append(cluster.min())
        j = k
    return OmegaSample(np.asarray(keep_pts), np.asarray(keep_idx, dtype=np.int64),
                       burn_in, length, critical_index, float(seed))


def successive_entries(m: MapSpec, x0: float, interval: RealInterval,
                       max_count: int = 32, horizon: int | None = None,
                       start: int = 1, extend_to: int | None = None,
                       min_count: int = 1) -> np.ndarray:
    """First ``max_count`` times t >= start with f^t(x0) in the open
    interval, streamed without storing the orbit.

    Deep targets are visited rarely; with ``extend_to`` the scan horizon
    grows geometrically until ``min_count`` entries are found or the cap
    is reached, so callers never have to guess return-time scales.
    """
    horizon = config.NICE_HORIZON if horizon is None else horizon
    pad = 0.5 * m.domain.length
    while True:
        ts = entries_into(m.coeff_array, float(x0), interval.a, interval.b,
                          start, int(horizon), max_count,
                          m.domain.a - pad, m.domain.b + pad)
        ts = ts[ts > 0]
        if len(ts) >= min(min_count, max_count) or extend_to is None \
                or horizon >= extend_to:
            return ts
        horizon = min(16 * horizon, extend_to)


def local_sample(m: MapSpec, interval: RealInterval, count: int = 32,
                 horizon: int | None = None,
                 extend_to: int | None = None) -> OmegaSample:
    """Orbit sample restricted to an interval: the first ``count`` visits
    of the anchor critical orbit.

    Deep nest levels are visited so rarely that a global sample holds no
    points there; this targeted form scales to any level because only
    entry times are kept, never the orbit itself.  Fewer visits than
    asked within the (possibly extended) horizon is reported through a
    warning, none at all through an error.
    """
    horizon = config.NICE_HORIZON if horizon is None else horizon
    c0 = distinguished_critical(m).location
    ts = successive_entries(m, c0, interval, count, horizon,
                            extend_to=extend_to, min_count=count)
    if len(ts) == 0:
        raise NoEntryWithinHorizon(
            f"critical orbit never visits {interval} within "
            f"{extend_to or horizon}", horizon=int(extend_to or horizon))
    if len(ts) < count:
        warnings.warn(
            f"only {len(ts)} of {count} requested visits to {interval} "
            f"within {extend_to or horizon} iterates", stacklevel=2)
    orb = _points_at_times(m, c0, ts)
    order = np.argsort(orb, kind="stable")
    return OmegaSample(orb[order], ts[order], 0, int(extend_to or horizon),
                       0, c0, local_to=interval)


def _points_at_times(m: MapSpec, x0: float, times: np.ndarray) -> np.ndarray:
    """f^t(x0) for each t, reusing the cached orbit when it is short."""
    tmax = int(times.max())
    if tmax <= 2 ** 22:
        orb = seed_orbit(m, x0, tmax)
        return orb[times].astype(float)
    out = np.empty(len(times))
    x, prev = float(x0), 0
    for i in np.argsort(times):
        t = int(times[i])
        x = iterate_n(m.coeff_array, x, t - prev)
        out[i] = x
        prev = t
    return out


def _branch_from_entry(m: MapSpec, target: RealInterval, x: float,
                       time: int) -> ReturnBranch:
    dom, order, central = first_component(m, target, x, time)
    crit = None
    if central:
        crit = next((c for c in m.criticals if dom.contains(c.location)),
                    None)
    return ReturnBranch(
        domain=dom, return_time=time, image=target,
        monotone=order == 0, critical_inside=crit,
        degenerate=dom.length < config.DEGENERATE_BRANCH * config.TOL_BASE)


def first_entry_domain(m: MapSpec, interval: RealInterval, x: float,
                       horizon: int | None = None,
                       self_if_inside: bool = False,
                       extend_to: int | None = None) -> ReturnBranch:
    """Landing domain of x into the interval with its minimal entry time.

    With ``self_if_inside`` a point already inside lands on the interval
    itself at time 0; otherwise the first genuine entry (time >= 1) is
    used, which is the first return when x lies inside.
    """
    horizon = config.NICE_HORIZON if horizon is None else horizon
    if self_if_inside and interval.contains(x, closed=True):
        return ReturnBranch(domain=interval, return_time=0, image=interval,
                            monotone=True)
    t = entry_time(m, x, interval, int(horizon))
    while t == -1 and extend_to is not None and horizon < extend_to:
        horizon = min(16 * horizon, extend_to)
        t = entry_time(m, x, interval, int(horizon))
    if t < 0:
        raise NoEntryWithinHorizon(
            f"orbit of {x:.17g} misses {interval} through time {horizon}",
            horizon=int(horizon))
    return _branch_from_entry(m, interval, x, t)


def _entry_times_bulk(m: MapSpec, omega: OmegaSample, interval: RealInterval,
                      orbit_indices: np.ndarray, horizon: int) -> np.ndarray:
    """First entry times after each orbit index, -1 where none is found.

    Reads one long cached orbit of the sampled critical point; the entry
    time of f^k(c) is the gap to the next orbit index inside the interval.
    """
    if len(orbit_indices) == 0:
        return np.empty(0, dtype=np.int64)
    need = int(orbit_indices.max()) + horizon + 1
    orb = seed_orbit(m, omega.seed, need)[:need + 1]
    inside = np.nonzero((orb > interval.a) & (orb < interval.b))[0]
    pos = np.searchsorted(inside, orbit_indices + 1)
    times = np.full(len(orbit_indices), -1, dtype=np.int64)
    ok = pos < len(inside)
    times[ok] = inside[pos[ok]] - orbit_indices[ok]
    times[times > horizon] = -1
    return times


def return_partition(m: MapSpec, interval: RealInterval, omega: OmegaSample,
                     horizon: int | None = None) -> list[ReturnBranch]:
    """Branches of the first return map that meet the orbit sample.

    Domains are pairwise disjoint (coinciding ones are merged); each is
    labeled monotone or unicritical and carries the number of sample
    points it captured.  Sample points that never come back within the
    horizon are dropped with a warning.
    """
    horizon = config.NICE_HORIZON if horizon is None else horizon
    tail = 0
    if omega.local_to is not None and omega.local_to.same(
            interval, 1e-6 * interval.length):
        # points are the successive visits to this very interval: the next
        # visit time after index k is simply the next recorded index; the
        # final visit has no recorded follow-up and is expected to drop
        pts, idx = omega.points, omega.orbit_indices
        srt = np.sort(idx)
        nxt = np.searchsorted(srt, idx, side="right")
        times = np.where(nxt < len(srt), srt[np.minimum(nxt, len(srt) - 1)] - idx,
                         np.int64(-1))
        tail = 1
    else:
        pts, idx = omega.points_in(interval)
        times = _entry_times_bulk(m, omega, interval, idx, horizon)
    lost = int(np.count_nonzero(times < 0))
    if lost > tail:
        warnings.warn(f"{lost} sample point(s) in {interval} did not return "
                      f"within {horizon} steps; branches dropped",
                      stacklevel=2)
    branches: list[ReturnBranch] = []
    counts: list[int] = []
    for t in np.unique(times[times > 0]):
        for x in pts[times == t]:
            for i, br in enumerate(branches):
                if br.return_time == t and br.domain.contains(x, closed=True):
                    counts[i] += 1
                    break
            else:
                branches.append(_branch_from_entry(m, interval, float(x), int(t)))
                counts.append(1)
    order = sorted(range(len(branches)), key=lambda i: branches[i].domain.a)
    out = []
    for i in order:
        br = branches[i]
        out.append(ReturnBranch(br.domain, br.return_time, br.image,
                                br.monotone, br.critical_inside,
                                br.degenerate, counts[i]))
    for left, right in zip(out, out[1:]):
        if left.domain.b > right.domain.a + config.TOL_BASE:
            if left.domain.same(right.domain, 10.0 * config.TOL_BASE):
                continue
            raise NestedOrDisjointViolated(
                f"return domains overlap: {left.domain} vs {right.domain} "
                f"(times {left.return_time}, {right.return_time})")
    return out


def return_times(m: MapSpec, interval: RealInterval, omega: OmegaSample,
                 horizon: int | None = None,
                 partition: list[ReturnBranch] | None = None) -> tuple[int, int]:
    """(minimal, maximal) return time over branches meeting the sample."""
    if partition is None:
        partition = return_partition(m, interval, omega, horizon)
    if not partition:
        pts, _ = omega.points_in(interval)
        if len(pts) == 0:
            raise EmptyIntersection(
                f"orbit sample does not meet {interval}")
        raise NoEntryWithinHorizon(
            f"no sample point in {interval} returned in time", horizon=horizon)
    ts = [br.return_time for br in partition]
    return min(ts), max(ts)


def branch_count_stability(m: MapSpec, interval: RealInterval,
                           omega: OmegaSample,
                           horizon: int | None = None) -> dict:
    """Compare branch counts at full and half sample length.

    A mismatch means the sample is too short to have found every
    return domain the recurrent set meets; callers report it rather
    than trusting the partition blindly.
    """
    full = return_partition(m, interval, omega, horizon)
    half = return_partition(m, interval, omega.thinned(2), horizon)
    return {"branches_full": len(full), "branches_half": len(half),
            "sample_full": omega.count, "stable": len(full) == len(half)}
