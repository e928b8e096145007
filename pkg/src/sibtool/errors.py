"""Exception hierarchy shared by every sibtool module."""


class SibtoolError(Exception):
    """Base class for all toolkit errors."""


class StructureError(SibtoolError, ValueError):
    """A structure, signature or tuple violates its invariants."""


class ParseError(StructureError):
    """Malformed structure text; carries 1-based line and column."""

    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f"line {line}"
            if column is not None:
                where += f", column {column}"
            where += ": "
        super().__init__(where + message)


class CliqueError(SibtoolError, ValueError):
    """A clique operation's hypotheses failed or its result did not verify."""


class FormulaError(SibtoolError, ValueError):
    """Malformed quantifier-free conjunction."""


class PresentationError(SibtoolError, ValueError):
    """Invalid presentation document or pattern."""


class SearchTimeout(SibtoolError):
    """A search exceeded its time guard. Never reported as a negative answer."""


class InternalCheckError(SibtoolError, AssertionError):
    """Two independent computations disagreed; always a bug."""
