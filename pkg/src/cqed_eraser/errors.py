"""Exception hierarchy shared by all modules."""


class CQEDError(Exception):
    """Base class for simulator errors."""


class TruncationError(CQEDError):
    """Fock truncation discards more probability than the configured tolerance."""


class DimensionMismatch(CQEDError, ValueError):
    pass


class DegenerateCat(CQEDError, ValueError):
    """Requested cat state vanishes identically (odd parity at alpha = 0)."""


class BasisMismatch(CQEDError, ValueError):
    pass


class NormError(CQEDError, ValueError):
    pass


class NonUnitaryError(CQEDError, ValueError):
    pass


class ZeroProbability(CQEDError):
    """Post-selection on an outcome that has (numerically) zero weight."""


class GridTooCoarse(CQEDError, ValueError):
    pass


class ConfigError(CQEDError, ValueError):
    """Invalid protocol configuration."""
