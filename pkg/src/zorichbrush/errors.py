"""Exception hierarchy shared by all modules."""


class ZorichBrushError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(ZorichBrushError):
    """An input lies outside the documented domain of an operation."""


class RangeOverflowError(ZorichBrushError):
    """A height is too large for the exponential to be representable."""


class NonsmoothPointError(ZorichBrushError):
    """Finite-difference derivative requested on the nonsmooth locus."""


class RationalCollisionError(ZorichBrushError):
    """An encoding target coincides exactly with a Farey interval endpoint."""


class BoundaryAmbiguityError(ZorichBrushError):
    """An orbit point is too close to a cell wall to assign a symbol."""


class LeftJuliaShadowError(ZorichBrushError):
    """An orbit point entered an odd-parity cell (attracted region)."""


class BoxChainBrokenError(ZorichBrushError):
    """A backward box recursion violated its containment certificate."""


class MembershipError(ZorichBrushError):
    """A brush operation was called at a non-member (t, address) pair."""


class NoHairError(ZorichBrushError):
    """An address has no finite hair base within the search window."""
