"""
Error kinds raised by the fcpd library.

All errors derive from ValueError so callers that already guard numerical
code with ``except ValueError`` keep working.
"""


class FcpdError(ValueError):
    """Base class for all library errors"""


class DimensionError(FcpdError):
    """Vector/matrix sizes do not match, or a requested dimension is out of range"""


class LagError(FcpdError):
    """Requested covariance lag is not smaller than the sample size"""


class ShapeError(FcpdError):
    """Matrix is not square/symmetric where a symmetric operator is required"""


class SampleSizeError(FcpdError):
    """Too few observations for the requested estimator"""


class DegenerateSpectrumError(FcpdError):
    """One of the leading d eigenvalues is numerically zero"""

    def __init__(self, index: int, value: float, eps: float):
        self.index = index
        self.value = value
        self.eps = eps
        super().__init__(f"eigenvalue {index} is degenerate: |{value:.3e}| <= {eps:.3e}")


class DegenerateAlignmentError(FcpdError):
    """v1/n^gamma + s*u vanished, so the aligned component is undefined"""


class TrendError(FcpdError):
    """Trend function parameters are out of range"""


class StabilityError(FcpdError):
    """Autoregressive operator is not a contraction"""


class UnsupportedTrendError(FcpdError):
    """Quantity is only defined for a single change direction"""


class DataFormatError(FcpdError):
    """Input file could not be parsed"""

    def __init__(self, message: str, line: int = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class NumericalError(FcpdError):
    """Two computations of the same quantity disagree beyond rounding"""
