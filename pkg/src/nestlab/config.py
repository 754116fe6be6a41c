"""Run configuration and the tolerance ladder.

Every numerical tolerance in the package is a fixed multiple of one master
knob ``tol_base`` so a single dial moves the whole pipeline.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field, replace

TOL_BASE = 1e-11

# horizon for niceness / entry searches (forward iterates)
NICE_HORIZON = 100_000

# hard ceiling when an entry search auto-extends its horizon; a streamed
# scan of this length costs a couple of seconds, which is the most one
# quantifier should ever spend
HORIZON_CAP = 2 ** 31

# principal-nest cascade handling
CASCADE_CAP = 64
CASCADE_CONTRACTION = 0.999   # treat slower shrinking as numerically stalled

# combinatorial depth cap; hitting it is reported as CapExceeded, not infinity
DEPTH_CAP = 128

# complex-geometry knobs
THETA_DEFAULT = math.pi / 3
THETA_MIN = math.pi / 64      # below this a pullback reports AngleCollapse
BOUNDARY_SPACING_DIV = 200    # h_max = |trace| / this
REFINEMENT_BUDGET = 60_000    # max boundary points per transported domain

# bounds-verifier knobs
NU_DEFAULT = 40.0             # big-scaling threshold (single flag, see docs)
M_DEFAULT = 8                 # audit window height for quasi-box assembly
DICHOTOMY_CAP = 64.0          # cap for the capture-constant in angle audits

# nest-builder guards, in units of TOL_BASE
NEST_LENGTH_FLOOR = 50.0      # stop the nest below 50 * tol_base
RENORM_FLOOR = 100.0          # renormalization interval must beat 100 * tol_base
DEGENERATE_BRANCH = 10.0      # branch domains thinner than 10 * tol_base

# oracle / misc
PUZZLE_SEED_PERIOD_MAX = 6
GRID_RESOLUTION = 2048
JSON_SIGNIFICANT_DIGITS = 17
EPS_CV_FACTOR = 1e-8          # critical-value clearance = factor * diam(M)


def thread_count() -> int:
    """Worker count from NESTLAB_THREADS; 0 or unset means serial."""
    raw = os.environ.get("NESTLAB_THREADS", "0")
    try:
        n = int(raw)
    except ValueError:
        return 0
    return max(n, 0)


@dataclass(frozen=True)
class RunConfig:
    """Knobs shared across a run. Immutable; tweak with ``with_(...)``."""

    tol_base: float = TOL_BASE
    horizon: int = NICE_HORIZON
    cascade_cap: int = CASCADE_CAP
    depth_cap: int = DEPTH_CAP
    theta: float = THETA_DEFAULT
    theta_min: float = THETA_MIN
    nu: float = NU_DEFAULT
    m_window: int = M_DEFAULT
    precision: str = "double"  # or "quad"
    refinement_budget: int = REFINEMENT_BUDGET
    extra: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.precision not in ("double", "quad"):
            from .errors import ConfigError
            raise ConfigError(f"precision must be double or quad, got {self.precision!r}")
        if not (0.0 < self.theta < math.pi):
            from .errors import ConfigError
            raise ConfigError("theta must lie in (0, pi)")

    # derived tolerances
    @property
    def tol_root(self) -> float:
        return self.tol_base

    @property
    def tol_match(self) -> float:
        """Coincidence tolerance for merging endpoints and sample points."""
        return 10.0 * self.tol_base

    @property
    def nest_floor(self) -> float:
        return NEST_LENGTH_FLOOR * self.tol_base

    @property
    def renorm_floor(self) -> float:
        return RENORM_FLOOR * self.tol_base

    def with_(self, **kw) -> "RunConfig":
        return replace(self, **kw)


DEFAULT_CONFIG = RunConfig()
