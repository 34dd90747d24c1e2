"""Exception types shared across the pipeline."""


class DashcoachError(Exception):
    """Base class for all errors raised by this package."""


class ManifestError(DashcoachError):
    """Manifest file missing, malformed, or violating an invariant."""


class DecodeError(DashcoachError):
    """A clip could not be decoded. Carries which camera failed."""

    def __init__(self, message: str, camera: str = "", path: str = ""):
        super().__init__(message)
        self.camera = camera
        self.path = path


class CatalogError(DashcoachError):
    """Instruction catalog malformed or referentially broken."""


class MetricError(DashcoachError):
    """Metric computed on invalid input (empty corpus, dimension mismatch, ...)."""


class GatewayError(DashcoachError):
    """Base class for inference endpoint failures."""


class TransportError(GatewayError):
    """Connection-level failure talking to an endpoint."""


class EndpointTimeout(GatewayError):
    """Endpoint did not answer within the configured budget."""


class ProtocolError(GatewayError):
    """Endpoint answered with a body that violates the wire protocol."""


class HttpStatusError(GatewayError):
    """Endpoint answered with a non-2xx status."""

    def __init__(self, message: str, status: int):
        super().__init__(message)
        self.status = status


class CoachingError(DashcoachError):
    """Coaching database or transcript/catalog mismatch."""


class ConfigError(DashcoachError):
    """CLI / config file problem."""


class GoldError(DashcoachError):
    """Gold record file missing entries or malformed."""
