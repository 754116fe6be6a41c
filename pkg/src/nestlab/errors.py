"""Exception hierarchy.

Numerical failures (exit code 1) are distinct from configuration problems
(exit code 2) and from verified-property violations (exit code 3) so that the
CLI can map them onto its exit-code contract.
"""

from __future__ import annotations


class NestLabError(Exception):
    """Base class for everything raised by this package."""


class NumericalError(NestLabError):
    """A computation could not be completed at working precision."""

    exit_code = 1


class ConfigError(NestLabError):
    """Bad run configuration, map file, or CLI arguments."""

    exit_code = 2


class PropertyViolation(NestLabError):
    """A certified property check failed on the computed objects."""

    exit_code = 3


# map-model

class OutOfAnalyticityDomain(NumericalError):
    pass


class RootIsolationFailure(NumericalError):
    pass


class NoSignChange(NumericalError):
    pass


class NonMonotoneBracket(NumericalError):
    pass


class CriticalValueCollision(NumericalError):
    """A continuation path passed too close to a critical value."""


class NewtonDivergence(NumericalError):
    def __init__(self, message, segment=None):
        super().__init__(message)
        self.segment = segment


class OddCriticalPoint(NumericalError):
    pass


class OutsideInvolutionNeighborhood(NumericalError):
    pass


# interval-core / return-engine

class OrbitEscapes(NumericalError):
    pass


class OrbitEscapesDomain(NumericalError):
    pass


class NoEntryWithinHorizon(NumericalError):
    def __init__(self, message, horizon=None):
        super().__init__(message)
        self.horizon = horizon


class EmptyIntersection(NumericalError):
    pass


# nest-builder

class NoOrientationReversingFixedPoint(NumericalError):
    pass


class NoChildFound(NumericalError):
    pass


class NoAdmissibleNu(NumericalError):
    pass


class DegenerateRenormalization(NumericalError):
    """Renormalization interval collapsed below the resolution floor."""


class NestedOrDisjointViolated(PropertyViolation):
    pass


# combinatorics

class CapExceeded(NestLabError):
    """A combinatorial cap was hit; distinct from a genuine infinity."""

    exit_code = 1


# complex-geometry

class OnForbiddenRay(NumericalError):
    """Angle of a real point outside the base interval is undefined."""


class RefinementBudgetExceeded(NumericalError):
    pass


class UnivalenceViolated(PropertyViolation):
    pass


class PreimageDegenerates(NumericalError):
    """A pulled-back boundary pinched onto a critical value."""


class AngleCollapse(NumericalError):
    """Enclosing angle fell below the configured floor during a pullback."""

    def __init__(self, message, angle=None, level=None):
        super().__init__(message)
        self.angle = angle
        self.level = level


# bounds-verifier

class BigScalingShortcut(NestLabError):
    """Signal, not a failure: scaling geometry permits a direct assembly.

    Raised internally when chain-based assembly is pointless because a
    large scaling factor guarantees a round-disk range at a shallower
    level. ``quasi_box_assemble`` catches it and switches strategy.
    """

    def __init__(self, message, level=None, case=None):
        super().__init__(message)
        self.level = level
        self.case = case


class InsufficientVisits(NumericalError):
    pass


class NotCompactlyContained(PropertyViolation):
    pass
