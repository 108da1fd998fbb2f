"""Exception hierarchy shared by all modules.

The CLI maps these onto process exit codes: bad arguments (2), file parse
failures (3), structural integrity violations (4), numeric/training
failures (5). Everything derives from BreplearnError so callers can catch
the whole family at once.
"""


class BreplearnError(Exception):
    """Base class for all library errors."""


class ArgumentError(BreplearnError, ValueError):
    """A caller-supplied value is out of range or malformed (exit code 2)."""


class DomainError(ArgumentError):
    """A parameter lies outside the evaluation domain of an entity."""


class MultiplicityError(ArgumentError):
    """A knot insertion would raise a multiplicity beyond the degree."""


class ConfigError(ArgumentError):
    """A model/stream configuration is inconsistent."""


class ParseError(BreplearnError):
    """A file could not be decoded against its schema (exit code 3)."""


class IntegrityError(BreplearnError):
    """Cross-referenced data violates a structural invariant (exit code 4)."""


class TopologyError(IntegrityError):
    """Topological structure is invalid, e.g. an open trim loop."""


class NumericError(BreplearnError):
    """A numeric computation degenerated (exit code 5)."""


class DegeneracyError(NumericError):
    """A rational evaluation accumulated a non-positive weight."""


class TrainingError(NumericError):
    """The optimization loop produced a non-finite loss."""


EXIT_CODES = {
    ArgumentError: 2,
    ParseError: 3,
    IntegrityError: 4,
    NumericError: 5,
}


def exit_code_for(exc):
    """Exit code for an exception instance; unknown errors map to 1."""
    for klass, code in EXIT_CODES.items():
        if isinstance(exc, klass):
            return code
    return 1
