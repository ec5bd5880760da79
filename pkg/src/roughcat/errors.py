"""Exception types shared across the package.

Every error carries enough structure (indices, names) that callers and the
CLI can report what failed without parsing messages.
"""


class RoughCatError(ValueError):
    """Base class for all input and certification errors."""


# metric_core

class MetricError(RoughCatError):
    pass


class NotSquare(MetricError):
    pass


class NonFiniteEntry(MetricError):
    def __init__(self, i, j):
        super().__init__(f"non-finite entry at ({i}, {j})")
        self.i, self.j = i, j


class NegativeEntry(MetricError):
    def __init__(self, i, j, value):
        super().__init__(f"negative entry {value!r} at ({i}, {j})")
        self.i, self.j, self.value = i, j, value


class NonzeroDiagonal(MetricError):
    def __init__(self, i, value):
        super().__init__(f"nonzero diagonal {value!r} at ({i}, {i})")
        self.i, self.value = i, value


class Asymmetry(MetricError):
    def __init__(self, i, j):
        super().__init__(f"asymmetric entries at ({i}, {j}) and ({j}, {i})")
        self.i, self.j = i, j


class TriangleViolation(MetricError):
    """d(i, k) > d(i, j) + d(j, k); reported as TriangleViolation(i, k, j)."""

    def __init__(self, i, k, j, excess):
        super().__init__(
            f"TriangleViolation({i},{k},{j}): d({i},{k}) exceeds "
            f"d({i},{j})+d({j},{k}) by {excess:.3g}")
        self.i, self.k, self.j, self.excess = i, k, j, excess

    @property
    def indices(self):
        return (self.i, self.k, self.j)


class DisconnectedGraph(MetricError):
    pass


class IndexOutOfRange(RoughCatError, IndexError):
    pass


# plane_geometry

class TriangleInequalityViolation(RoughCatError):
    pass


class LengthsShorterThanSide(RoughCatError):
    pass


class RatioOutOfRange(RoughCatError):
    pass


class NotHShort(RoughCatError):
    pass


class ZeroBaseSegment(RoughCatError):
    pass


class HypothesisViolated(RoughCatError):
    def __init__(self, which, detail=""):
        super().__init__(f"hypothesis violated: {which}" + (f" ({detail})" if detail else ""))
        self.which = which


# subembedding

class FanTriangleInfeasible(RoughCatError):
    def __init__(self, i, detail=""):
        super().__init__(f"fan triangle {i} infeasible" + (f": {detail}" if detail else ""))
        self.i = i


class ChainMismatch(RoughCatError):
    pass


class TooManyOrderings(RoughCatError):
    pass


class TooLarge(RoughCatError):
    pass


# rcat_certify

class HTooLarge(RoughCatError):
    pass


class DegenerateTriangle(RoughCatError):
    pass


class BudgetZero(RoughCatError):
    pass


# polygon_gluing

class PointOutsidePolygon(RoughCatError):
    pass


class NotConvex(RoughCatError):
    pass


class NotFlatGluing(RoughCatError):
    pass


class SplitPathUnavailable(RoughCatError):
    pass


class InconsistentDescriptor(RoughCatError):
    pass


# experiments

class GeneratorMismatch(RoughCatError):
    pass


# command line input

class ParseError(RoughCatError):
    """Malformed input document; the message names the file and line."""


class IoError(RoughCatError):
    """Unreadable input or unwritable output file."""
