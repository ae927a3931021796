"""Exception hierarchy.

Errors are grouped by the stage that raises them so the command line front
end can map them onto exit codes: netlist problems, model construction and
composition problems, and analysis problems.
"""


class ConvBlocksError(Exception):
    """Base class for all errors raised by this package."""


class BuildError(ConvBlocksError, ValueError):
    """A block could not be constructed or connected."""


class DimensionMismatch(BuildError):
    pass


class NonFinite(BuildError):
    pass


class DuplicateLabel(BuildError):
    pass


class InvalidParams(BuildError):
    pass


class NonPositiveR(InvalidParams):
    pass


class NonPositiveFrequency(InvalidParams):
    pass


class InvalidOperatingPoint(BuildError):
    pass


class InfeasiblePoint(InvalidOperatingPoint):
    pass


class NoControlInput(BuildError):
    pass


class BadIndex(BuildError, IndexError):
    pass


class FeedthroughNotNegligible(BuildError):
    pass


class IllPosedConnection(BuildError):
    pass


class AnalysisError(ConvBlocksError, ArithmeticError):
    """A response, sweep or simulation could not be evaluated."""


class SingularAtS(AnalysisError):
    pass


class ZeroAdmittance(AnalysisError):
    pass


class UnstableBlock(AnalysisError):
    pass


class BadGrid(AnalysisError, ValueError):
    pass


class NetlistError(ConvBlocksError):
    """The netlist document is malformed or inconsistent."""


class ParseError(NetlistError):
    def __init__(self, msg, line=None, column=None):
        self.line = line
        self.column = column
        if line is not None:
            msg = f"{msg} (line {line}, column {column})"
        super().__init__(msg)


class UnresolvedRef(NetlistError):
    pass


class SchemaViolation(NetlistError):
    pass
