"""Errors raised on bad input, grouped by pipeline stage."""


class MiniError(Exception):
    """Base class for all diagnostics; carries an optional source position."""

    def __init__(self, message, line=None, col=None):
        super().__init__(message)
        self.message = message
        self.line = line
        self.col = col

    def __str__(self):
        if self.line is not None:
            return f"{self.message} (line {self.line}, col {self.col})"
        return self.message


class LexError(MiniError):
    """Character outside the language's alphabet, or a malformed literal."""


class ParseError(MiniError):
    """Token stream does not match the grammar."""


class ValidationError(MiniError):
    """Structurally well-formed program violating a static rule."""


class TransformError(MiniError):
    """rewrite_generator applied to a non-generator."""


class DefuncError(MiniError):
    """defunctionalize applied to a program it cannot handle."""


class InterpError(MiniError):
    """Runtime failure while evaluating a program."""


class BudgetExceeded(InterpError):
    """Evaluation step budget exhausted."""
