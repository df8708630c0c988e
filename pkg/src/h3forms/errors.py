"""Exception hierarchy shared across the package.

Every error that can escape a public function is one of these, so the CLI
can map failures to stable exit codes and machine-readable reason strings.
"""


class H3FormsError(Exception):
    """Base class; carries a short machine-readable code."""

    code = "error"


class UnsupportedFieldError(H3FormsError):
    """D is not one of the nine class-number-one imaginary quadratic fields."""

    code = "unsupported-field"


class InvalidArgumentError(H3FormsError):
    code = "invalid-argument"


class WindowError(H3FormsError):
    """Argument outside the supported numeric window."""

    code = "window"


class PoleProximityError(H3FormsError):
    """Evaluation requested too close to a pole."""

    code = "pole"


class SingularPointError(H3FormsError):
    """Evaluation requested exactly at a singular point (e.g. phi at s=0)."""

    code = "singular-point"


class NonconvergenceError(H3FormsError):
    """Iterative refinement exhausted its budget before reaching target."""

    code = "nonconvergence"


class TruncationFailureError(H3FormsError):
    """Certified series cutoff would exceed the configured maximum."""

    code = "truncation-failure"


class ParseError(H3FormsError):
    """Malformed input file; message carries the line number."""

    code = "parse"

    def __init__(self, message, line=None):
        super().__init__(message if line is None else f"line {line}: {message}")
        self.line = line


class DuplicateIndexError(ParseError):
    code = "duplicate-index"


class CoverageGapError(ParseError):
    code = "coverage-gap"


class FieldMismatchError(H3FormsError):
    code = "field-mismatch"


class PolicyError(H3FormsError):
    code = "policy"


class UsageError(H3FormsError):
    code = "usage"
