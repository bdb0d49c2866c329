"""Exception types raised across the package.

Every error derives from :class:`MarketFieldError`, which is itself a
``ValueError`` so callers that only care about bad input can catch that.
"""


class MarketFieldError(ValueError):
    pass


class ZeroRadius(MarketFieldError):
    """Profit component evaluated on the capital axis (x1 = x2 = 0)."""


class OutOfDomain(MarketFieldError):
    """Argument outside the domain of an inverse hyperbolic function."""


class InvalidStep(MarketFieldError):
    pass


class OnFilament(MarketFieldError):
    """Evaluation point lies on the filament, where the kernel is singular."""


class NonpositiveRadius(MarketFieldError):
    pass


class InvalidCutoff(MarketFieldError):
    pass


class GridMismatch(MarketFieldError):
    pass


class TooFewSamples(MarketFieldError):
    pass


class TooFewSlices(MarketFieldError):
    pass


class IncompleteGrid(MarketFieldError):
    pass


class OpenContour(MarketFieldError):
    pass


class MeshBoundaryMismatch(MarketFieldError):
    pass


class ZeroUnemployment(MarketFieldError):
    pass


class ConfigError(MarketFieldError):
    pass


class ParseError(ConfigError):
    def __init__(self, lineno, message):
        self.lineno = lineno
        super().__init__(f"line {lineno}: {message}")


class UnknownKey(ConfigError):
    def __init__(self, key, lineno=None):
        self.key = key
        self.lineno = lineno
        where = f" (line {lineno})" if lineno is not None else ""
        super().__init__(f"unknown key '{key}'{where}")
