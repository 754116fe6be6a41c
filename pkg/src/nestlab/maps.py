"""Map model: real polynomial interval maps with critical-point metadata,
real and complex inverse branches, and a local involution at even critical
points.

A map is given by its polynomial coefficients (low degree first) together
with the invariant domain interval. All downstream constructions only ever
need evaluation, differentiation, monotone inverse branches, and analytic
continuation of inverse branches off the real line, which is what this
module provides.
"""

from __future__ import annotations

import ast
import warnings
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import polynomial as npoly
from scipy.optimize import brentq

from . import config
from ._kernels import fill_orbit, first_entry, horner
from .errors import (
    ConfigError,
    CriticalValueCollision,
    NewtonDivergence,
    NonMonotoneBracket,
    NoSignChange,
    OddCriticalPoint,
    OutOfAnalyticityDomain,
    OutsideInvolutionNeighborhood,
    RootIsolationFailure,
)
from .intervals import RealInterval

# slack factor, relative to domain size, for the f(M) inside M validation
_DOMAIN_SLACK = 1e-9
# finite-difference scale ladder for the order cross-check
_ORDER_SCALES = (1e-3, 1e-4, 1e-5)


@dataclass(frozen=True)
class CriticalPoint:
    location: float
    order: int               # local degree ell >= 2: f looks like (x-c)^ell
    parity: str              # "even" or "odd"
    involution_radius: float  # 0.0 for odd points

    def __post_init__(self):
        if self.order < 2:
            raise ConfigError(f"critical order must be >= 2, got {self.order}")
        if self.parity not in ("even", "odd"):
            raise ConfigError(f"parity must be even or odd, got {self.parity!r}")


@dataclass(frozen=True)
class MapSpec:
    """A polynomial interval map f: M -> M.

    Parameters
    ----------
    domain : RealInterval
        The invariant interval M.
    coeffs : tuple of float
        Polynomial coefficients, constant term first.
    criticals : tuple of CriticalPoint
        Real critical points inside M, sorted by location.
    degree_bound : int
        Degree of the polynomial.
    precision : str
        "double" or "quad"; quad adds an mpmath polish pass to root solves.
    family : str
        Free-form tag from the map file ("quadratic", "cubic", ...).
    analyticity_strip : float
        Half-height of the strip where complex evaluation is trusted;
        inf for genuine polynomials.
    """

    domain: RealInterval
    coeffs: tuple
    criticals: tuple
    degree_bound: int
    precision: str = "double"
    family: str = "polynomial"
    analyticity_strip: float = float("inf")
    _cache: dict = field(default_factory=dict, compare=False, repr=False)

    @property
    def coeff_array(self) -> np.ndarray:
        arr = self._cache.get("coeffs")
        if arr is None:
            arr = np.asarray(self.coeffs, dtype=float)
            self._cache["coeffs"] = arr
        return arr

    @property
    def dcoeff_array(self) -> np.ndarray:
        arr = self._cache.get("dcoeffs")
        if arr is None:
            arr = npoly.polyder(self.coeff_array)
            self._cache["dcoeffs"] = arr
        return arr

    @property
    def quadratic_c(self) -> float | None:
        """The c of f(x) = x^2 + c when the map has exactly that shape."""
        if (len(self.coeffs) == 3 and self.coeffs[2] == 1.0
                and self.coeffs[1] == 0.0):
            return self.coeffs[0]
        return None

    @property
    def critical_values(self) -> np.ndarray:
        """Complex critical values of f (all roots of f', real and not)."""
        vals = self._cache.get("crit_values")
        if vals is None:
            roots = npoly.polyroots(self.dcoeff_array)
            vals = npoly.polyval(roots, self.coeff_array)
            self._cache["crit_values"] = vals
        return vals

    def critical_orbit(self, index: int = 0, length: int = 1024) -> np.ndarray:
        """Forward orbit of the index-th critical point, cached and grown
        geometrically on demand. Entry t is f^t(c)."""
        return seed_orbit(self, self.criticals[index].location, length)


def evaluate(m: MapSpec, x):
    """f(x) for real or complex scalars/arrays; real in, real out."""
    if isinstance(x, (float, int)):
        return horner(m.coeff_array, float(x))
    x = np.asarray(x)
    if np.iscomplexobj(x) and np.isfinite(m.analyticity_strip):
        if np.any(np.abs(x.imag) > m.analyticity_strip):
            raise OutOfAnalyticityDomain(
                f"evaluation {np.max(np.abs(x.imag)):.3g} off the real line, "
                f"strip half-height is {m.analyticity_strip:.3g}")
    return npoly.polyval(x, m.coeff_array)


def derivative(m: MapSpec, x):
    if isinstance(x, (float, int)):
        return horner(m.dcoeff_array, float(x))
    return npoly.polyval(np.asarray(x), m.dcoeff_array)


def iterate(m: MapSpec, x: float, n: int) -> float:
    """f^n(x)."""
    coeffs = m.coeff_array
    for _ in range(n):
        x = horner(coeffs, x)
    return x


def orbit(m: MapSpec, x: float, n: int) -> np.ndarray:
    """[x, f(x), ..., f^n(x)]."""
    return fill_orbit(m.coeff_array, x, n)


def seed_orbit(m: MapSpec, x0: float, length: int) -> np.ndarray:
    """Like orbit() but cached on the map and grown geometrically, so
    repeated entry-time queries share one long iterate array."""
    key = ("orbit", float(x0))
    orb = m._cache.get(key)
    if orb is None or len(orb) <= length:
        n = max(length + 1, 4096)
        if orb is not None:
            n = max(n, 2 * len(orb))
        orb = fill_orbit(m.coeff_array, float(x0), n - 1)
        m._cache[key] = orb
    return orb


def entry_time(m: MapSpec, x: float, target: RealInterval,
               horizon: int, start: int = 1) -> int:
    """Smallest t >= start with f^t(x) in the open target, or -1.

    Returns -(t + 10) when the orbit leaves the domain at time t first.
    """
    pad = 0.5 * m.domain.length
    return first_entry(m.coeff_array, x, target.a, target.b, start, horizon,
                       m.domain.a - pad, m.domain.b + pad)


# ---------------------------------------------------------------------------
# construction


def _poly_order_at(coeffs: np.ndarray, c: float, scale: float) -> int:
    """Multiplicity of c as a root of the derivative, plus one."""
    d = npoly.polyder(coeffs)
    norm = max(np.max(np.abs(d)), 1.0)
    k = 1
    while True:
        d = npoly.polyder(d)
        k += 1
        if d.size == 0:
            raise RootIsolationFailure(f"no finite order at {c}")
        val = horner(d, c)
        # scale-aware threshold: k-th derivative at a degenerate point is 0
        if abs(val) > 1e-6 * norm * max(scale, 1.0) ** max(0, len(d) - 1):
            return k


def _cluster_roots(roots: np.ndarray, tol: float) -> list[float]:
    roots = np.sort(roots)
    out: list[float] = []
    for r in roots:
        if out and abs(r - out[-1]) <= tol:
            continue
        out.append(float(r))
    return out


def _involution_radius(coeffs: np.ndarray, c: float, left_bound: float,
                       right_bound: float) -> float:
    """Largest r with a two-sided solution of f(tau(x)) = f(x) on (c-r, c+r)."""
    side = min(c - left_bound, right_bound - c)
    if side <= 0.0:
        return 0.0
    fc = horner(coeffs, c)

    def dev(t):
        return abs(horner(coeffs, t) - fc)

    dplus = dev(c + side)
    dminus = dev(c - side)
    cap = min(dplus, dminus)
    if cap <= 0.0:
        return 0.0
    if dplus <= dminus:
        # right side is the limiting one at full reach; shrink the left
        f_target = dplus
        g = lambda t: dev(c - t) - f_target
    else:
        f_target = dminus
        g = lambda t: dev(c + t) - f_target
    # dev is monotone on (0, side] on each side, so bisection is safe
    if g(side) <= 0.0:
        return side
    lo_t, hi_t = 0.0, side
    for _ in range(80):
        mid = 0.5 * (lo_t + hi_t)
        if g(mid) <= 0.0:
            lo_t = mid
        else:
            hi_t = mid
    return lo_t


def _find_criticals(coeffs: np.ndarray, domain: RealInterval) -> tuple:
    dcoeffs = npoly.polyder(coeffs)
    if len(dcoeffs) == 0 or not np.any(dcoeffs):
        raise ConfigError("map is constant")
    roots = npoly.polyroots(dcoeffs)
    real = roots[np.abs(roots.imag) < 1e-8].real
    real = real[(real > domain.a) & (real < domain.b)]
    tol = 1e-7 * max(1.0, domain.length)
    locations = _cluster_roots(real, tol)
    pts = []
    bounds = [domain.a] + locations + [domain.b]
    for i, c in enumerate(locations):
        resid = horner(dcoeffs, c)
        dnorm = max(np.max(np.abs(dcoeffs)), 1.0)
        if abs(resid) > 1e-5 * dnorm * max(1.0, abs(c)) ** max(0, len(dcoeffs) - 1):
            raise RootIsolationFailure(
                f"critical point candidate {c} has residual {resid:.3g}")
        order = _poly_order_at(coeffs, c, domain.length)
        parity = "even" if order % 2 == 0 else "odd"
        rad = 0.0
        if parity == "even":
            rad = _involution_radius(coeffs, c, bounds[i], bounds[i + 2])
        pts.append(CriticalPoint(float(c) + 0.0, order, parity, float(rad)))
    return tuple(pts)


def make_map(coeffs, domain: RealInterval, precision: str = "double",
             family: str = "polynomial", analyticity_strip: float = float("inf"),
             validate: bool = True) -> MapSpec:
    """Build a MapSpec from polynomial coefficients (constant term first)."""
    arr = np.asarray(coeffs, dtype=float)
    while len(arr) > 1 and arr[-1] == 0.0:
        arr = arr[:-1]
    if precision not in ("double", "quad"):
        raise ConfigError(f"precision must be double or quad: {precision!r}")
    crit = _find_criticals(arr, domain)
    m = MapSpec(domain=domain, coeffs=tuple(float(v) for v in arr),
                criticals=crit, degree_bound=len(arr) - 1,
                precision=precision, family=family,
                analyticity_strip=analyticity_strip)
    if validate:
        _validate_map(m)
    return m


def quadratic(c: float, domain: RealInterval | None = None,
              precision: str = "double") -> MapSpec:
    """f(x) = x^2 + c on [-beta, beta], beta the orientation-preserving
    fixed point, unless a domain is supplied."""
    if domain is None:
        disc = 1.0 - 4.0 * c
        if disc <= 0.0:
            raise ConfigError(f"x^2 + {c} has no real fixed point")
        beta = 0.5 * (1.0 + np.sqrt(disc))
        domain = RealInterval.from_endpoints(-beta, beta)
    return make_map([c, 0.0, 1.0], domain, precision=precision,
                    family="quadratic")


def _validate_map(m: MapSpec) -> None:
    dom = m.domain
    # range over M from the critical values and endpoint values
    xs = [dom.a, dom.b] + [c.location for c in m.criticals]
    vals = [evaluate(m, float(x)) for x in xs]
    slack = _DOMAIN_SLACK * max(1.0, dom.length)
    lo, hi = min(vals), max(vals)
    if lo < dom.a - slack or hi > dom.b + slack:
        raise ConfigError(
            f"f(M) reaches [{lo:.6g}, {hi:.6g}], outside M = {dom}")
    parities = {c.parity for c in m.criticals}
    if len(parities) > 1:
        warnings.warn("critical points of mixed parity; geometry certificates "
                      "for even-order constructions may not apply",
                      stacklevel=3)
    for c in m.criticals:
        _check_order_by_differences(m, c)


def _check_order_by_differences(m: MapSpec, c: CriticalPoint) -> None:
    """Finite-difference sanity check of the declared order at several scales."""
    loc = c.location
    fc = evaluate(m, loc)
    for h in _ORDER_SCALES:
        scale = h * max(1.0, m.domain.length)
        d1 = abs(evaluate(m, loc + scale) - fc)
        d2 = abs(evaluate(m, loc + scale / 2.0) - fc)
        if d1 == 0.0 or d2 == 0.0:
            continue
        est = np.log2(d1 / d2)
        if abs(est - c.order) < 0.35:
            return
    raise RootIsolationFailure(
        f"declared order {c.order} at {loc} not confirmed by differences")


# ---------------------------------------------------------------------------
# operations


def distinguished_critical(m: MapSpec) -> CriticalPoint:
    """The critical point all nest constructions are anchored on: the
    even-order one nearest the domain midpoint."""
    even = [c for c in m.criticals if c.parity == "even"]
    if not even:
        raise ConfigError("map has no even-order critical point to anchor on")
    return min(even, key=lambda c: abs(c.location - m.domain.mid))


def critical_points(m: MapSpec) -> list[CriticalPoint]:
    """Real critical points in M, sorted by location."""
    return sorted(m.criticals, key=lambda c: c.location)


def inverse_branch_real(m: MapSpec, y: float, bracket: RealInterval,
                        tol: float | None = None) -> float:
    """The unique x in the bracket with f(x) = y.

    The bracket must not contain a critical point strictly inside, and y
    must lie in f(bracket).
    """
    if tol is None:
        tol = config.TOL_BASE
    for c in m.criticals:
        if bracket.a + tol < c.location < bracket.b - tol:
            raise NonMonotoneBracket(
                f"critical point {c.location} inside bracket {bracket}")
    fa = evaluate(m, bracket.a) - y
    fb = evaluate(m, bracket.b) - y
    if fa == 0.0:
        return bracket.a
    if fb == 0.0:
        return bracket.b
    if np.sign(fa) == np.sign(fb):
        raise NoSignChange(f"y={y} outside f({bracket})")
    root = brentq(lambda x: evaluate(m, x) - y, bracket.a, bracket.b,
                  xtol=tol / 4.0, rtol=1e-15)
    if m.precision == "quad":
        root = _polish_quad(m, root, y)
    return float(root)


def _polish_quad(m: MapSpec, x0: float, y: float) -> float:
    import mpmath

    with mpmath.workdps(50):
        cs = [mpmath.mpf(v) for v in m.coeffs]

        def f(t):
            acc = mpmath.mpf(0)
            for k in range(len(cs) - 1, -1, -1):
                acc = acc * t + cs[k]
            return acc - y

        try:
            r = mpmath.findroot(f, x0)
        except Exception:
            return x0
        return float(r)


def _newton_complex(m: MapSpec, target: complex, z: complex,
                    tol: float, max_iter: int = 40) -> complex | None:
    coeffs = m.coeff_array
    dcoeffs = m.dcoeff_array
    for _ in range(max_iter):
        fz = npoly.polyval(z, coeffs) - target
        if abs(fz) <= tol:
            return z
        dz = npoly.polyval(z, dcoeffs)
        if dz == 0:
            return None
        step = fz / dz
        z = z - step
        if not np.isfinite(z):
            return None
    fz = npoly.polyval(z, coeffs) - target
    return z if abs(fz) <= tol else None


def _segment_point_distance(p: complex, u: complex, v: complex) -> float:
    d = v - u
    L2 = (d * d.conjugate()).real
    if L2 == 0.0:
        return abs(p - u)
    t = ((p - u) * d.conjugate()).real / L2
    t = min(1.0, max(0.0, t))
    return abs(p - (u + t * d))


def inverse_branch_complex(m: MapSpec, w: complex, seed: complex,
                           homotopy_path=None, tol: float | None = None) -> complex:
    """Analytic continuation of the f^{-1} branch fixing ``seed``.

    Follows the branch of f^{-1} with f^{-1}(f(seed)) = seed along the
    polyline from f(seed) to w (straight segment by default) and returns
    its value at w. Paths that come within the critical-value clearance
    are rejected rather than risking a silent branch jump.
    """
    if tol is None:
        tol = config.TOL_BASE
    seed = complex(seed)
    y0 = complex(npoly.polyval(seed, m.coeff_array))
    pts = [y0]
    if homotopy_path is not None:
        pts.extend(complex(p) for p in homotopy_path)
    if pts[-1] != complex(w):
        pts.append(complex(w))
    eps_cv = config.EPS_CV_FACTOR * m.domain.length
    cvals = m.critical_values
    for u, v in zip(pts[:-1], pts[1:]):
        for cv in cvals:
            if _segment_point_distance(complex(cv), u, v) < eps_cv:
                raise CriticalValueCollision(
                    f"path segment {u} -> {v} within {eps_cv:.3g} of "
                    f"critical value {cv}")
    z = seed
    ftol = tol * max(1.0, float(np.max(np.abs(m.coeff_array))))
    for u, v in zip(pts[:-1], pts[1:]):
        t = 0.0
        dt = 1.0
        cur_target = u
        while t < 1.0:
            step_target = u + min(t + dt, 1.0) * (v - u)
            znew = _newton_complex(m, step_target, z, ftol)
            ok = znew is not None
            if ok:
                dz_mag = abs(derivative(m, z)) if z != 0 else abs(derivative(m, z))
                expected = abs(step_target - cur_target) / max(abs(dz_mag), 1e-14)
                ok = abs(znew - z) <= max(8.0 * expected, 1e-9)
            if ok:
                z = znew
                t = min(t + dt, 1.0)
                cur_target = step_target
                dt = min(2.0 * dt, 1.0 - t if t < 1.0 else 1.0)
                if dt == 0.0:
                    dt = 1.0
            else:
                dt *= 0.5
                if dt < 1e-7:
                    raise NewtonDivergence(
                        f"continuation stalled near target {step_target}",
                        segment=(u, v))
    return z


def local_involution(m: MapSpec, c: CriticalPoint, x: float) -> float:
    """tau(x) on the opposite side of c with f(tau(x)) = f(x)."""
    if c.parity != "even":
        raise OddCriticalPoint(f"no involution at odd critical point {c.location}")
    r = c.involution_radius
    if abs(x - c.location) > r * (1.0 + 1e-12):
        raise OutsideInvolutionNeighborhood(
            f"|x - c| = {abs(x - c.location):.3g} exceeds radius {r:.3g}")
    if x == c.location:
        return x
    # exact-symmetry fast path: f(c + h) == f(c - h) as polynomials in h
    key = ("symmetric", c.location)
    sym = m._cache.get(key)
    if sym is None:
        comp_plus = _poly_compose(m.coeff_array, np.array([c.location, 1.0]))
        comp_minus = _poly_compose(m.coeff_array, np.array([c.location, -1.0]))
        sym = (len(comp_plus) == len(comp_minus) and np.max(np.abs(
            comp_plus - comp_minus)) <= 1e-12 * max(1.0, np.max(np.abs(comp_plus))))
        m._cache[key] = sym
    if sym:
        return 2.0 * c.location - x
    fx = evaluate(m, x)
    if x > c.location:
        bracket = RealInterval.from_endpoints(c.location - r, c.location)
    else:
        bracket = RealInterval.from_endpoints(c.location, c.location + r)
    g = lambda t: evaluate(m, t) - fx
    ga, gb = g(bracket.a), g(bracket.b)
    if np.sign(ga) == np.sign(gb):
        # numerical edge at the rim of the involution neighborhood
        raise OutsideInvolutionNeighborhood(
            f"f(x)={fx:.6g} not attained on the opposite side of {c.location}")
    return float(brentq(g, bracket.a, bracket.b, xtol=config.TOL_BASE / 4.0,
                        rtol=1e-15))


def _poly_compose(outer: np.ndarray, inner: np.ndarray) -> np.ndarray:
    # Horner in polynomial arithmetic
    res = np.array([outer[-1]])
    for k in range(len(outer) - 2, -1, -1):
        res = npoly.polyadd(npoly.polymul(res, inner), [outer[k]])
    return res


# ---------------------------------------------------------------------------
# map files


def _parse_value(text: str):
    text = text.strip()
    try:
        return ast.literal_eval(text)
    except (ValueError, SyntaxError):
        return text


def load_map_file(path: str) -> MapSpec:
    """Read a key=value map definition. See docs/mapfile.md for the grammar."""
    data: dict = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected key=value")
            key, val = line.split("=", 1)
            data[key.strip()] = _parse_value(val)
    return map_from_dict(data, source=path)


def map_from_dict(data: dict, source: str = "<dict>") -> MapSpec:
    family = str(data.get("family", "polynomial"))
    precision = str(data.get("precision", "double"))
    domain = None
    if "domain" in data:
        dom = data["domain"]
        if (not isinstance(dom, (list, tuple))) or len(dom) != 2:
            raise ConfigError(f"{source}: domain must be [a, b]")
        domain = RealInterval.from_endpoints(float(dom[0]), float(dom[1]))
    if family == "quadratic":
        coeffs = data.get("coeffs")
        if isinstance(coeffs, (int, float)):
            c = float(coeffs)
        elif isinstance(coeffs, (list, tuple)) and len(coeffs) == 1:
            c = float(coeffs[0])
        elif isinstance(coeffs, (list, tuple)) and len(coeffs) == 3:
            if list(coeffs[1:]) != [0.0, 1.0] and list(coeffs[1:]) != [0, 1]:
                raise ConfigError(f"{source}: quadratic means x^2 + c")
            c = float(coeffs[0])
        else:
            raise ConfigError(f"{source}: quadratic needs coeffs=[c]")
        return quadratic(c, domain, precision=precision)
    if family in ("cubic", "polynomial"):
        coeffs = data.get("coeffs")
        if not isinstance(coeffs, (list, tuple)) or len(coeffs) < 2:
            raise ConfigError(f"{source}: coeffs=[a0, a1, ...] required")
        if domain is None:
            raise ConfigError(f"{source}: domain=[a, b] required for {family}")
        if family == "cubic" and len(coeffs) != 4:
            raise ConfigError(f"{source}: cubic needs 4 coefficients")
        return make_map([float(v) for v in coeffs], domain,
                        precision=precision, family=family)
    if family == "composed":
        base = data.get("base_coeffs")
        power = int(data.get("power", 2))
        center = float(data.get("center", 0.0))
        offset = float(data.get("offset", 0.0))
        sgn = float(data.get("sign", 1.0))
        strip = float(data.get("strip", 1.0))
        if not isinstance(base, (list, tuple)):
            raise ConfigError(f"{source}: composed needs base_coeffs=[...]")
        if domain is None:
            raise ConfigError(f"{source}: domain=[a, b] required for composed")
        inner = npoly.polypow(np.array([-center, 1.0]), power)
        comp = np.zeros(1)
        for k in range(len(base) - 1, -1, -1):
            comp = npoly.polyadd(npoly.polymul(comp, inner), [float(base[k])])
        comp = sgn * comp
        comp[0] += offset
        return make_map(comp, domain, precision=precision, family="composed",
                        analyticity_strip=strip)
    raise ConfigError(f"{source}: unknown family {family!r}")
