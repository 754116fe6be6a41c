"""Critical nests: central cascades, renormalization intervals, children,
and the enhanced pullback tower.

Everything is anchored on one distinguished critical point c0.  A level
is *terminating* when its central cascade stabilizes onto a periodic
interval; the next level then dives into the renormalization interval.
Otherwise the level is refined by a pair of free-space pullbacks followed
by repeated smallest-successor steps, which multiplies return times
quickly and is what the deeper geometry estimates feed on.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import config
from ._kernels import iterate_n
from .chains import first_component
from .errors import (ConfigError, DegenerateRenormalization, NoAdmissibleNu,
                     NoChildFound, NoEntryWithinHorizon,
                     NoOrientationReversingFixedPoint, PreimageDegenerates,
                     PropertyViolation)
from .intervals import RealInterval
from .maps import (CriticalPoint, MapSpec, derivative, distinguished_critical,
                   evaluate, local_involution, seed_orbit)
from .returns import OmegaSample, first_entry_domain, local_sample, \
    return_partition, successive_entries


# ---------------------------------------------------------------------------
# seed


def seed_interval(m: MapSpec) -> RealInterval:
    """Starting interval for all nests: the span between the
    orientation-reversing fixed point nearest the critical point and its
    involution partner.  Its boundary orbit stays on the fixed point, so
    the interval is nice by construction."""
    c0 = distinguished_critical(m)
    poly = m.coeff_array.copy()
    poly[1] -= 1.0  # roots of f(x) - x
    roots = np.polynomial.polynomial.polyroots(poly)
    real = roots[np.abs(roots.imag) < 1e-9].real
    rev = [float(x) for x in real
           if m.domain.contains(float(x), closed=True)
           and derivative(m, float(x)) < 0.0]
    if not rev:
        raise ConfigError(
            "map has no orientation-reversing fixed point; the critical "
            "point cannot be recurrent in the sense this analysis needs")
    alpha = min(rev, key=lambda x: abs(x - c0.location))
    tau = local_involution(m, c0, alpha)
    out = RealInterval.from_endpoints(min(alpha, tau), max(alpha, tau))
    if not out.contains(c0.location):
        raise ConfigError(
            f"fixed-point interval {out} misses the critical point")
    return out


def hat_landing(m: MapSpec, interval: RealInterval, x: float,
                horizon: int | None = None) -> tuple[RealInterval, int]:
    """Landing domain of x with its time; the interval itself (time 0)
    when x already sits inside."""
    br = first_entry_domain(m, interval, x, horizon, self_if_inside=True)
    return br.domain, br.return_time


# ---------------------------------------------------------------------------
# principal nest and cascade classification


def principal_nest(m: MapSpec, interval: RealInterval, depth: int,
                   horizon: int | None = None,
                   critical: float | None = None) -> list[RealInterval]:
    """interval, then repeated landings of the critical point into the
    previous level (the distinguished critical when none is given)."""
    c0 = distinguished_critical(m).location if critical is None else critical
    out = [interval]
    for _ in range(depth):
        br = first_entry_domain(m, out[-1], c0, horizon)
        out.append(br.domain)
    return out


@dataclass(frozen=True)
class CascadeDetection:
    kind: str                      # terminating | non-terminating | inconclusive
    m_hat: int | None              # first level the central value escapes
    return_time: int               # r: central return time of the cascade
    levels: tuple[RealInterval, ...]
    I_inf: RealInterval | None = None
    detail: dict = field(default_factory=dict)


def _central_values(m: MapSpec, r: int, central: RealInterval) -> list[float]:
    """Values f^r(c') over critical points c' inside the central domain."""
    return [float(iterate_n(m.coeff_array, c.location, r))
            for c in m.criticals if central.contains(c.location, closed=True)]


def detect_central_and_terminating(
        m: MapSpec, interval: RealInterval, omega: OmegaSample | None = None,
        cascade_cap: int | None = None,
        horizon: int | None = None,
        critical: "CriticalPoint | None" = None) -> CascadeDetection:
    """Classify an interval by running its central cascade.

    Pull the interval back along the central return while the return of
    every central critical value stays inside.  An escape at level m
    gives the non-terminating kind with that m.  Convergence of the
    cascade endpoints (or geometric contraction at the cap) gives the
    terminating kind with the limiting periodic interval.  The cascade
    runs at the distinguished critical unless another one is named.
    """
    cap = config.CASCADE_CAP if cascade_cap is None else cascade_cap
    cp = distinguished_critical(m) if critical is None else critical
    c_loc = cp.location
    br = first_entry_domain(m, interval, c_loc, horizon,
                            extend_to=config.HORIZON_CAP)
    r = br.return_time
    levels = [interval, br.domain]
    tol = 10.0 * config.TOL_BASE
    detail: dict = {"converged": False, "stalled": False}
    vals = _central_values(m, r, levels[1])
    while len(levels) <= cap:
        esc = [v for v in vals if not levels[-1].contains(v)]
        if esc:
            m_hat = len(levels) - 1
            return CascadeDetection("non-terminating", m_hat, r,
                                    tuple(levels), None, detail)
        prev = levels[-1]
        nxt = first_component(m, prev, c_loc, r)[0]
        moved = max(abs(nxt.a - prev.a), abs(nxt.b - prev.b))
        levels.append(nxt)
        if moved < tol:
            detail["converged"] = True
            break
    if not detail["converged"]:
        # judge the tail contraction: shrinking movement means the limit
        # exists and can be taken; anything slower stays inconclusive
        steps = [max(abs(b.a - a.a), abs(b.b - a.b))
                 for a, b in zip(levels[-6:], levels[-5:])]
        ratio = max(steps[i + 1] / steps[i] for i in range(len(steps) - 1)) \
            if len(steps) > 1 and min(steps) > 0 else 1.0
        detail["tail_contraction"] = ratio
        if ratio >= config.CASCADE_CONTRACTION:
            detail["stalled"] = True
            return CascadeDetection("inconclusive", None, r, tuple(levels),
                                    None, detail)
    I_inf = _periodic_limit(m, levels[-1], r, detail, critical=cp)
    if I_inf is None:
        return CascadeDetection("inconclusive", None, r, tuple(levels),
                                None, detail)
    return CascadeDetection("terminating", None, r, tuple(levels), I_inf,
                            detail)


def _periodic_limit(m: MapSpec, approx: RealInterval, r: int,
                    detail: dict,
                    critical: "CriticalPoint | None" = None) -> RealInterval | None:
    """Refine a cascade limit into a genuinely periodic interval.

    One endpoint is a fixed point of the r-th iterate and the other is
    its involution partner; both are polished and the forward invariance
    of the result is then verified on a grid.
    """
    c0 = distinguished_critical(m) if critical is None else critical
    g = lambda x: iterate_n(m.coeff_array, float(x), r) - float(x)
    cands = []
    for end in (approx.a, approx.b):
        w = max(1e-3 * approx.length, 1e-9)
        x = _polish_root(g, end, w)
        if x is not None:
            cands.append(x)
    beta = None
    for x in cands:
        if abs(x - approx.a) <= abs(x - approx.b):
            side = approx.a
        else:
            side = approx.b
        if abs(x - side) < 0.05 * approx.length:
            beta = x
            break
    if beta is None:
        return None
    tau = local_involution(m, c0, beta)
    out = RealInterval.from_endpoints(min(beta, tau), max(beta, tau))
    grid = np.linspace(out.a, out.b, 257)
    img = grid.copy()
    for _ in range(r):
        img = evaluate(m, img)
    pad = 10.0 * config.TOL_BASE + 1e-12 * out.length
    inv = (img.min() >= out.a - pad) and (img.max() <= out.b + pad)
    detail["beta"] = beta
    detail["forward_invariant"] = bool(inv)
    return out if inv else None


def _polish_root(g, center: float, width: float,
                 grow: int = 6) -> float | None:
    from scipy.optimize import brentq
    for _ in range(grow):
        a, b = center - width, center + width
        ga, gb = g(a), g(b)
        if np.isfinite(ga) and np.isfinite(gb) and np.sign(ga) != np.sign(gb):
            return float(brentq(g, a, b, xtol=config.TOL_BASE / 10,
                                rtol=1e-15))
        width *= 3.0
    return None


# ---------------------------------------------------------------------------
# renormalization interval and its partition


@dataclass(frozen=True)
class PeriodicPartition:
    I_inf: RealInterval
    period: int
    alpha: float
    beta: float
    pieces: tuple[RealInterval, ...]   # tiles of I_inf between preimages of alpha
    zero_index: int                    # position of (alpha, tau(alpha)) in pieces
    branch_labels: dict = field(default_factory=dict)

    def piece(self, i: int) -> RealInterval:
        """Signed index: 0 is the renormalization interval, negative runs
        toward beta, positive toward its partner."""
        return self.pieces[self.zero_index + i]

    @property
    def arm(self) -> int:
        return max(self.zero_index, len(self.pieces) - 1 - self.zero_index)


def _iterate_grid(m: MapSpec, xs: np.ndarray, r: int) -> np.ndarray:
    out = xs.astype(float).copy()
    for _ in range(r):
        out = evaluate(m, out)
    return out


def _derivative_grid(m: MapSpec, xs: np.ndarray, r: int) -> np.ndarray:
    out = np.ones_like(xs, dtype=float)
    cur = xs.astype(float).copy()
    for _ in range(r):
        out *= derivative(m, cur)
        cur = evaluate(m, cur)
    return out


def _divisors(n: int) -> list[int]:
    out = [d for d in range(1, int(np.sqrt(n)) + 1) if n % d == 0]
    out += [n // d for d in reversed(out) if d * d != n]
    return out


def renormalization_interval(
        m: MapSpec, source, grid: int = 2001,
) -> tuple[RealInterval, PeriodicPartition]:
    """The involution-symmetric interval around c0 spanned by the nearest
    orientation-reversing periodic point of the cascade limit.

    ``source`` is a terminating CascadeDetection (or an interval, which
    is classified first).  Also returns the partition of the periodic
    interval by the preimages of that point, with the monotone branches
    through the three marked boundary points labeled.
    """
    det = source
    if isinstance(source, RealInterval):
        det = detect_central_and_terminating(m, source)
    if det.kind != "terminating":
        raise ConfigError(f"renormalization asked on a {det.kind} interval")
    I_inf, r = det.I_inf, det.return_time
    c0 = distinguished_critical(m)
    xs = np.linspace(I_inf.a, I_inf.b, grid)
    cands: list[tuple[float, int, float]] = []
    for k in _divisors(r):
        vals = _iterate_grid(m, xs, k) - xs
        flips = np.nonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0)[0]
        gk = lambda x, k=k: iterate_n(m.coeff_array, float(x), k) - float(x)
        roots = [float(_bisect(gk, xs[i], xs[i + 1], vals[i]))
                 for i in flips]
        for end in (I_inf.a, I_inf.b):  # boundary roots are legitimate
            if abs(gk(end)) < 10.0 * config.TOL_BASE:
                roots.append(end)
        for x in roots:
            d = float(_derivative_grid(m, np.array([x]), k)[0])
            if d < 0.0:
                cands.append((x, k, d))
    if not cands:
        raise NoOrientationReversingFixedPoint(
            f"no orientation-reversing periodic point in {I_inf} "
            f"(period {r} and divisors)")
    alpha, k_alpha, d_alpha = min(
        cands, key=lambda t: (abs(t[0] - c0.location), t[1]))
    for _ in range(3):  # sharpen the bisected root to full precision
        g = iterate_n(m.coeff_array, alpha, k_alpha) - alpha
        dg = float(_derivative_grid(m, np.array([alpha]), k_alpha)[0]) - 1.0
        if dg != 0.0 and np.isfinite(g):
            alpha = float(alpha - g / dg)
    tau = local_involution(m, c0, alpha)
    R = RealInterval.from_endpoints(min(alpha, tau), max(alpha, tau))
    if R.length <= config.RENORM_FLOOR * config.TOL_BASE:
        raise DegenerateRenormalization(
            f"renormalization interval has length {R.length:.3g}")
    partition = _build_partition(m, det, alpha, R, grid)
    return R, partition


def _bisect(g, a: float, b: float, ga: float, tol: float | None = None) -> float:
    tol = config.TOL_BASE / 10.0 if tol is None else tol
    while b - a > tol:
        mid = 0.5 * (a + b)
        gm = g(mid)
        if np.sign(gm) == np.sign(ga):
            a, ga = mid, gm
        else:
            b = mid
    return 0.5 * (a + b)


def _build_partition(m: MapSpec, det: CascadeDetection, alpha: float,
                     R: RealInterval, grid: int) -> PeriodicPartition:
    I_inf, r = det.I_inf, det.return_time
    xs = np.linspace(I_inf.a, I_inf.b, grid)
    vals = _iterate_grid(m, xs, r) - alpha
    flips = np.nonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0)[0]
    g = lambda x: iterate_n(m.coeff_array, float(x), r) - alpha
    cuts = sorted(float(_bisect(g, xs[i], xs[i + 1], vals[i])) for i in flips)
    eps = max(1e-9 * I_inf.length, 20.0 * config.TOL_BASE)
    cuts = [c for c in cuts
            if c - I_inf.a > eps and I_inf.b - c > eps]
    edges = [I_inf.a] + cuts + [I_inf.b]
    pieces = tuple(RealInterval.from_endpoints(a, b)
                   for a, b in zip(edges, edges[1:]) if b - a > eps)
    zero = int(np.argmin([abs(p.mid - R.mid) for p in pieces]))
    if not pieces[zero].same(R, max(1e-7 * R.length, 50 * config.TOL_BASE)):
        raise PropertyViolation(
            f"central partition piece {pieces[zero]} does not match the "
            f"renormalization interval {R}")
    beta = det.detail.get("beta", I_inf.a)
    if abs(beta - I_inf.b) < abs(beta - I_inf.a):
        # index sign runs negative toward beta's end
        pieces = tuple(reversed(pieces))
        zero = len(pieces) - 1 - zero
    labels = _monotone_branches(m, det, alpha, beta)
    return PeriodicPartition(I_inf, r, alpha, float(beta), pieces, zero,
                             labels)


def _monotone_branches(m: MapSpec, det: CascadeDetection, alpha: float,
                       beta: float) -> dict:
    """Maximal monotonicity intervals of the r-th iterate around the
    marked points: the reversing point, the fixed endpoint, its partner."""
    I_inf, r = det.I_inf, det.return_time
    c0 = distinguished_critical(m)
    xs = np.linspace(I_inf.a, I_inf.b, 1025)
    dv = _derivative_grid(m, xs, r)
    flips = np.nonzero(np.sign(dv[:-1]) * np.sign(dv[1:]) <= 0)[0]
    turn = []
    dg = lambda x: float(_derivative_grid(m, np.array([x]), r)[0])
    for i in flips:
        turn.append(float(_bisect(dg, xs[i], xs[i + 1], dv[i])))
    tau_beta = local_involution(m, c0, beta)
    out = {}
    for name, gamma in (("reversing", alpha), ("fixed_end", beta),
                        ("fixed_end_partner", tau_beta)):
        lo = max([t for t in turn if t < gamma - 1e-12], default=I_inf.a)
        hi = min([t for t in turn if t > gamma + 1e-12], default=I_inf.b)
        out[name] = RealInterval.from_endpoints(max(lo, I_inf.a),
                                                min(hi, I_inf.b))
    return out


# ---------------------------------------------------------------------------
# children, successors, free-space pullbacks


@dataclass(frozen=True)
class ChildPullback:
    interval: RealInterval
    time: int
    order: int   # critical intervals along its chain (1 for a child)
    resolution_limited: bool = False


def children_and_successors(
        m: MapSpec, piece: RealInterval, omega: OmegaSample | None = None,
        horizon: int | None = None, max_children: int = 12,
        max_entries: int = 64,
) -> tuple[list[ChildPullback], ChildPullback]:
    """Pullbacks of a critical puzzle piece that carry the critical point
    once, and the smallest of them.

    Entries of the critical orbit into the piece are walked in order;
    each pullback whose chain passes a critical point exactly once is a
    child.  For a map with one even critical point the successors
    coincide with the children, and the smallest successor is the last
    child found (they are nested), ties broken toward the earlier time.
    A candidate whose chain collapses in floating point ends the walk;
    the pick is then only smallest among the resolvable children, and it
    carries a flag saying so.
    """
    horizon = config.NICE_HORIZON if horizon is None else horizon
    c0 = distinguished_critical(m).location
    ts = successive_entries(m, c0, piece, max_entries, horizon,
                            extend_to=config.HORIZON_CAP)
    children: list[ChildPullback] = []
    limited = False
    for t in ts:
        try:
            iv, order, _ = first_component(m, piece, c0, int(t))
        except PreimageDegenerates:
            limited = True
            break
        if order == 1:
            children.append(ChildPullback(iv, int(t), order))
            if len(children) >= max_children:
                break
    if not children:
        raise NoChildFound(
            f"no unicritical pullback of {piece} within "
            f"{config.HORIZON_CAP if limited is False else horizon} steps"
            + (" (deeper chains below float resolution)" if limited else ""))
    # smallest by length; lengths tied within tolerance go to the earlier time
    shortest = min(ch.interval.length for ch in children)
    tied = [ch for ch in children
            if ch.interval.length <= shortest + 10.0 * config.TOL_BASE]
    smallest = min(tied, key=lambda ch: ch.time)
    if limited:
        smallest = ChildPullback(smallest.interval, smallest.time,
                                 smallest.order, resolution_limited=True)
    return children, smallest


@dataclass(frozen=True)
class NuResult:
    nu: int                      # pullback time from c0's orbit into the piece
    landing_time: int            # return time of the landed orbit point
    free_inner: RealInterval     # pullback of the landing domain
    free_outer: RealInterval     # pullback of the piece itself
    total_time_inner: int        # nu + landing_time
    outer_order: int
    checked: tuple[int, ...]     # candidate times examined


def nu_and_AB(m: MapSpec, piece: RealInterval,
              omega: OmegaSample | None = None,
              horizon: int | None = None,
              max_candidates: int = 64) -> NuResult:
    """Free-space pullback pair at the smallest admissible visit time.

    For the first visit time nu of the critical orbit such that the
    pullback of the piece carries at most (number of critical points
    squared) critical intervals and the orbit sample inside the outer
    pullback stays inside the inner one, return both pullbacks.  The
    inner one is the pullback of the landing domain of the visited
    point; the gap between them is certified free of sample points.
    """
    horizon = config.NICE_HORIZON if horizon is None else horizon
    c0 = distinguished_critical(m).location
    b = sum(1 for c in m.criticals)
    ts = successive_entries(m, c0, piece, max_candidates, horizon,
                            extend_to=config.HORIZON_CAP)
    checked = []
    for t in ts:
        t = int(t)
        checked.append(t)
        try:
            outer, outer_order, _ = first_component(m, piece, c0, t)
            if outer_order > b * b:
                continue
            x_t = float(iterate_n(m.coeff_array, c0, t))
            landing = first_entry_domain(m, piece, x_t, horizon,
                                         extend_to=config.HORIZON_CAP)
            inner = first_component(m, landing.domain, c0, t)[0]
        except PreimageDegenerates:
            break
        if omega is not None:
            sel = (omega.points > outer.a) & (omega.points < outer.b)
            pts = omega.points[sel]
            gap = (pts <= inner.a) | (pts >= inner.b)
            if gap.any():
                continue
        return NuResult(t, landing.return_time, inner, outer,
                        t + landing.return_time, outer_order,
                        tuple(checked))
    raise NoAdmissibleNu(
        f"no admissible visit time for {piece} among {checked}")


# ---------------------------------------------------------------------------
# enhanced nest


@dataclass(frozen=True)
class NestLevel:
    index: int
    interval: RealInterval
    kind: str                 # terminating | non-terminating | inconclusive
    r: int                    # minimal return time over sampled branches
    r_hat: int                # maximal return time over sampled branches
    p_n: int | None = None    # pullback time from the previous level
    trace: dict = field(default_factory=dict)

    @property
    def terminating(self) -> bool:
        return self.kind == "terminating"


def _level_return_times(m: MapSpec, interval: RealInterval,
                        horizon: int, visits: int = 24) -> tuple[int, int, int]:
    """(r, r_hat, branches) over the branches met by the local sample."""
    loc = local_sample(m, interval, visits, horizon,
                       extend_to=config.HORIZON_CAP)
    part = return_partition(m, interval, loc, horizon)
    if not part:
        raise NoEntryWithinHorizon(
            f"no sampled branch returned to {interval}", horizon=horizon)
    ts = [br.return_time for br in part]
    return min(ts), max(ts), len(part)


def classify_level(m: MapSpec, interval: RealInterval, index: int,
                   omega: OmegaSample | None, horizon: int,
                   p_n: int | None = None,
                   extra_trace: dict | None = None) -> NestLevel:
    det = detect_central_and_terminating(m, interval, omega, horizon=horizon)
    r, r_hat, nbranch = _level_return_times(m, interval, horizon)
    trace = {"cascade_levels": len(det.levels) - 1,
             "m_hat": det.m_hat,
             "branches_sampled": nbranch,
             "I_inf": det.I_inf,
             "cascade_detail": det.detail}
    if extra_trace:
        trace.update(extra_trace)
    return NestLevel(index, interval, det.kind, r, r_hat, p_n, trace)


def enhanced_step(m: MapSpec, level: NestLevel,
                  omega: OmegaSample | None = None,
                  horizon: int | None = None) -> NestLevel:
    """One step of the tower: dive into the renormalization interval on a
    terminating level, otherwise pull back free space and take smallest
    successors (five per critical point) with full time bookkeeping."""
    horizon = config.NICE_HORIZON if horizon is None else horizon
    c0 = distinguished_critical(m).location
    if level.kind == "inconclusive":
        raise ConfigError(f"cannot step an inconclusive level {level.index}")
    if level.terminating:
        R, partition = renormalization_interval(m, level.interval)
        landing = first_entry_domain(m, R, c0, horizon, self_if_inside=False,
                                     extend_to=config.HORIZON_CAP)
        trace = {"operator": "renormalization-landing",
                 "renorm_interval": R,
                 "renorm_periodic": landing.domain.same(
                     R, max(1e-9 * R.length, 10 * config.TOL_BASE)),
                 "partition_pieces": len(partition.pieces),
                 "alpha": partition.alpha,
                 "landing_time": landing.return_time}
        nxt = landing.domain
        p_n = None
    else:
        b = len(m.criticals)
        if omega is None:
            # certify the free gaps against the orbit trace inside this
            # very level: its entries are exactly the sample that matters
            omega = local_sample(m, level.interval, 48, horizon,
                                 extend_to=config.HORIZON_CAP)
        first = nu_and_AB(m, level.interval, omega, horizon)
        second = nu_and_AB(m, first.free_inner, omega, horizon)
        stage = second.free_outer
        total = second.nu + first.total_time_inner
        gammas = []
        for j in range(5 * b):
            try:
                children, smallest = children_and_successors(
                    m, stage, omega, horizon)
            except NoChildFound as e:
                raise NoChildFound(
                    f"successor step {j} of {5 * b} at level "
                    f"{level.index}: {e}") from e
            stage = smallest.interval
            total += smallest.time
            gammas.append(smallest)
        trace = {"operator": "free-space-and-successors",
                 "nu": first.nu,
                 "landing_time": first.landing_time,
                 "free_inner": first.free_inner,
                 "free_outer": first.free_outer,
                 "second_nu": second.nu,
                 "stage_intervals": [second.free_outer]
                 + [g.interval for g in gammas],
                 "successor_times": [g.time for g in gammas],
                 "successor_lengths": [g.interval.length for g in gammas],
                 "resolution_limited": any(g.resolution_limited
                                           for g in gammas)}
        nxt = stage
        p_n = total
    if not level.interval.contains_interval(nxt):
        raise PropertyViolation(
            f"level {level.index + 1} {nxt} escapes level "
            f"{level.index} {level.interval}")
    return classify_level(m, nxt, level.index + 1, omega, horizon,
                          p_n=p_n, extra_trace=trace)


def enhanced_nest(m: MapSpec, interval: RealInterval | None = None,
                  depth: int = 6, omega: OmegaSample | None = None,
                  horizon: int | None = None,
                  horizon_growth: float = 64.0) -> list[NestLevel]:
    """The full tower from the seed, stopping early (with the reason in
    the last level's trace) on an inconclusive cascade or a level too
    short to resolve."""
    base_horizon = config.NICE_HORIZON if horizon is None else horizon
    if interval is None:
        interval = seed_interval(m)
    hz = base_horizon
    levels = [classify_level(m, interval, 0, omega, hz)]
    for _ in range(depth):
        cur = levels[-1]
        if cur.kind == "inconclusive":
            cur.trace["stop_reason"] = "inconclusive cascade"
            break
        if cur.interval.length < config.NEST_LENGTH_FLOOR * config.TOL_BASE:
            cur.trace["stop_reason"] = "interval below resolution floor"
            break
        hz = int(max(base_horizon, horizon_growth * cur.r_hat))
        try:
            levels.append(enhanced_step(m, cur, omega, hz))
        except PreimageDegenerates as e:
            cur.trace["stop_reason"] = f"pullback below float resolution ({e})"
            break
        except (NoAdmissibleNu, NoChildFound, NoEntryWithinHorizon) as e:
            cur.trace["stop_reason"] = f"{type(e).__name__}: {e}"
            break
    return levels
