"""Exception hierarchy.

Every error carries an ``exit_code`` so the command line front end can map
failures onto its documented status codes without a lookup table.
"""

from __future__ import annotations


class KillingTransportError(Exception):
    """Base class for all library errors."""

    exit_code = 2

    def diagnostic(self) -> dict:
        d = {"error": type(self).__name__, "message": str(self)}
        d.update(getattr(self, "context", {}))
        return d

    def with_context(self, **context) -> "KillingTransportError":
        """Attach extra diagnostic fields (for example the config key at fault)."""
        self.context = {**getattr(self, "context", {}), **context}
        return self


# --- expression layer (schema-level, exit code 1) -------------------------


class ExprError(KillingTransportError, ValueError):
    exit_code = 1


class ExprSyntaxError(ExprError):
    """Malformed expression text; ``offset`` is the byte offset of the failure."""

    def __init__(self, offset: int, expected: str, source: str = ""):
        self.offset = offset
        self.expected = expected
        self.source = source
        super().__init__(f"syntax error at offset {offset}: expected {expected}")

    def diagnostic(self) -> dict:
        d = super().diagnostic()
        d.update(offset=self.offset, expected=self.expected)
        return d


class UnknownIdentifier(ExprError):
    def __init__(self, name: str, offset: int = -1):
        self.name = name
        self.offset = offset
        super().__init__(f"unknown identifier {name!r} at offset {offset}")

    def diagnostic(self) -> dict:
        d = super().diagnostic()
        d.update(name=self.name, offset=self.offset)
        return d


class ConfigError(KillingTransportError):
    exit_code = 1


# --- geometry / domain errors (exit code 2) ---------------------------------


class OutputError(KillingTransportError):
    """An artifact could not be written."""


class DomainExceeded(KillingTransportError):
    """A stencil or trajectory left a non-periodic chart domain."""

    def __init__(self, message: str, point=None, parameter: float | None = None):
        self.point = None if point is None else [float(x) for x in point]
        self.parameter = parameter
        super().__init__(message)

    def diagnostic(self) -> dict:
        d = super().diagnostic()
        d.update(point=self.point, parameter=self.parameter)
        return d


class DegenerateMetric(KillingTransportError):
    pass


class ZeroSpeed(KillingTransportError):
    pass


class NotClosed(KillingTransportError):
    pass


class NotGeodesic(KillingTransportError):
    pass


class IntersectionIllConditioned(KillingTransportError):
    pass


class ZeroAtInteriorUnresolved(KillingTransportError):
    pass


class DegenerateVertexAngle(KillingTransportError):
    pass


class InconsistentOrientation(KillingTransportError):
    pass


# --- numerical health (exit code 3) -----------------------------------------


class ToleranceExceeded(KillingTransportError):
    exit_code = 3

    def __init__(self, message: str, residual: float | None = None, tolerance: float | None = None):
        self.residual = residual
        self.tolerance = tolerance
        super().__init__(message)

    def diagnostic(self) -> dict:
        d = super().diagnostic()
        d.update(residual=self.residual, tolerance=self.tolerance)
        return d
