"""Exceptions shared across the package."""


class LatticeQVAError(Exception):
    """Base class for all package errors."""


class DivisionByZero(LatticeQVAError):
    pass


class EmptyWindow(LatticeQVAError):
    """A series operation produced an empty validity window."""


class NotFormallyNilpotent(LatticeQVAError):
    """exp() of a series whose support is not strictly positive."""


class UnsupportedExpansionDirection(LatticeQVAError):
    """A substitution would diverge for the recorded expansion direction."""


class ScalarNotRepresentable(LatticeQVAError):
    """A required scalar does not lie in the configured cyclotomic field."""


class NotXIndependent(LatticeQVAError):
    """A projection that must be x-independent has an x-dependent coefficient."""


class ZeroP(LatticeQVAError):
    """An associate requires p != 0."""


class ConfigInvalid(LatticeQVAError):
    """A suite configuration failed validation."""
