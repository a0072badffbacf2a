"""Exception types raised across the package."""


class EprNetError(Exception):
    """Base class for every error raised by eprnet."""


class ConfigError(EprNetError, ValueError):
    """Invalid parameters or experiment configuration."""


class QuadratureError(EprNetError, ArithmeticError):
    """Numerical integration failed to reach the requested tolerance."""


class TopologyError(EprNetError, ValueError):
    """A topology violates one of its structural invariants.

    ``reason`` is one of ``"bad length"``, ``"disconnected"``, ``"min-cut<2"``,
    ``"self-loop"``, ``"duplicate edge"`` or ``"parse"``.
    """

    def __init__(self, reason: str, detail: str = ""):
        self.reason = reason
        super().__init__(f"{reason}: {detail}" if detail else reason)


class GenerationError(EprNetError, RuntimeError):
    """Random topology generation exhausted its attempts."""


class RoutingError(EprNetError, RuntimeError):
    """No pair of edge-disjoint routes exists for a node pair."""

    def __init__(self, pair, detail: str = ""):
        self.pair = pair
        msg = f"no edge-disjoint route pair for {pair}"
        super().__init__(f"{msg}: {detail}" if detail else msg)


class MetricError(EprNetError, ValueError):
    """A metric is undefined for the given input (e.g. all-zero rates)."""
