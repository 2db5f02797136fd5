"""
Exception hierarchy for the Killing-Poisson toolkit
"""

from typing import Optional, Sequence


class KillingPoissonError(Exception):
    """Base class for every error raised by this package"""


class SpecError(KillingPoissonError, ValueError):
    """Invalid input document, expression or declaration"""


class ExprSyntaxError(SpecError):
    """Expression text that does not follow the grammar"""

    def __init__(self, source: str, offset: int, expected: str):
        """Initialize syntax error

        Args:
            source: Expression text being parsed
            offset: Byte offset (UTF-8) where parsing failed
            expected: Description of what the parser expected
        """
        self.source = source
        self.offset = offset
        self.expected = expected
        super().__init__(f"syntax error at offset {offset} in {source!r}: expected {expected}")


class UnknownIdentifierError(SpecError):
    """Identifier that is neither a coordinate, a function nor a constant"""

    def __init__(self, name: str, offset: int):
        self.name = name
        self.offset = offset
        super().__init__(f"unknown identifier {name!r} at offset {offset}")


class UndeclaredFieldError(SpecError):
    """Named scalar, vector or 1-form missing from a chart"""


class LieAlgebraError(SpecError):
    """Inconsistent Lie algebra data"""


class DimensionError(KillingPoissonError, ValueError):
    """Operation used on a chart or tensor of the wrong dimension"""


class EvaluationError(KillingPoissonError, ArithmeticError):
    """Numerical evaluation failed"""


class DomainError(EvaluationError):
    """Expression evaluated outside the domain of one of its nodes"""

    def __init__(self, node: str, point: Optional[Sequence[float]] = None, reason: str = ""):
        """Initialize domain error

        Args:
            node: Source text of the offending node
            point: Point at which evaluation was attempted
            reason: Short description of the violated condition
        """
        self.node = node
        self.point = None if point is None else tuple(float(x) for x in point)
        self.reason = reason
        where = "" if self.point is None else f" at {self.point}"
        detail = f": {reason}" if reason else ""
        super().__init__(f"domain error in {node!r}{where}{detail}")


class MetricError(EvaluationError):
    """Metric not positive definite, or degenerate, at a point"""


class RankAmbiguityError(EvaluationError):
    """Numerical rank of the bivector cannot be decided at a point"""

    def __init__(self, singular_values: Sequence[float], threshold: float):
        self.singular_values = tuple(float(s) for s in singular_values)
        self.threshold = threshold
        super().__init__(
            f"singular values {self.singular_values} fall in the ambiguity band "
            f"({threshold:.3e}, {10 * threshold:.3e})"
        )
