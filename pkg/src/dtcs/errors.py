"""Exception types raised by dtcs."""


class DegenerateMatrixError(ValueError):
    """A matrix construction produced a zero column."""


class RankDeficientError(ValueError):
    """A restricted column set is numerically rank deficient."""


class InadmissibleError(ValueError):
    """No index pair / test set satisfies a separation constraint."""


class EnumerationBudgetError(RuntimeError):
    """A brute-force enumeration would exceed its candidate budget."""


class ConfigError(ValueError):
    """An experiment configuration file or CLI argument is invalid."""
