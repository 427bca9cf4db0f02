"""Exception hierarchy; every error carries the CLI exit code it maps to."""

from __future__ import annotations


class JetlieError(Exception):
    """Base class for all jetlie errors"""

    exit_code = 2


class DomainError(JetlieError, ValueError):
    """An argument lies outside the domain of an operation"""


class SpecificationError(JetlieError):
    """A system or manifold specification is malformed"""


class UnsupportedShapeError(JetlieError):
    """The input is well formed but outside what an operation supports"""


class ResourceError(JetlieError):
    """A configured guard was exceeded"""

    def __init__(self, message: str, advice: str = ""):
        self.advice = advice
        super().__init__(f"{message} ({advice})" if advice else message)


class ExpressionSizeError(ResourceError):
    """An expression grew beyond Config.MAX_TERMS"""

    def __init__(self, size: int, limit: int):
        self.size = size
        self.limit = limit
        super().__init__(
            f"expression has {size} terms, limit is {limit}",
            "raise JETLIE_MAX_TERMS or lower the order/degree",
        )


class NotASymmetryError(JetlieError):
    """The lift of a vector field to the parameters is inconsistent"""


class ParseError(JetlieError):
    """Syntax or semantic error in DSL input, with its location"""

    def __init__(self, line: int, column: int, message: str):
        self.line = line
        self.column = column
        self.message = message
        super().__init__(f"line {line}, column {column}: {message}")
