"""Exception types shared by the symbolic and numeric layers."""


class HyperredError(Exception):
    """Base class for all package errors."""

    code = "error"


class ContextMismatch(HyperredError, ValueError):
    code = "context_mismatch"


class ParseError(HyperredError, ValueError):
    code = "parse_error"


class DenominatorVanishes(HyperredError, ZeroDivisionError):
    """A rational function was evaluated where its denominator is zero."""

    code = "denominator_vanishes"


class NonTermination(HyperredError, RuntimeError):
    code = "non_termination"


class InconsistentRules(HyperredError, RuntimeError):
    """The generator relations do not close into the declared basis."""

    code = "inconsistent_rules"


class ExceptionalStep(HyperredError):
    """A step operator's prefactor vanishes for the given parameters."""

    code = "exceptional_step"


class DegenerateInput(HyperredError, ValueError):
    code = "degenerate_input"


# numeric guards

class NumericGuard(HyperredError):
    code = "numeric_guard"


class RadiusExceeded(NumericGuard):
    code = "radius_exceeded"


class PoleInPochhammer(NumericGuard):
    code = "pole_in_pochhammer"


class ConvergenceGuard(NumericGuard):
    code = "convergence_guard"


class ConvergenceRegionViolated(NumericGuard):
    code = "convergence_region_violated"


class CoincidentArguments(NumericGuard):
    code = "coincident_arguments"


class GammaPole(NumericGuard):
    code = "gamma_pole"


class SingularPoint(NumericGuard):
    """A numeric point lies on the singular locus of the system."""

    code = "singular_point"


class UnsupportedOrderSlot(HyperredError, ValueError):
    code = "unsupported_order_slot"
