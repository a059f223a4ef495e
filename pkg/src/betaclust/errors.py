"""Exception hierarchy shared by all betaclust modules."""


class BetaClustError(Exception):
    """Base class for every error raised by betaclust."""


class DataError(BetaClustError, ValueError):
    """Bad input data: missing files, header mismatch, unparseable cells."""


class SchemaError(BetaClustError, ValueError):
    """The feature schema is malformed or inconsistent with the data."""


class InfeasibleError(BetaClustError):
    """The requested clustering cannot exist for this dataset and k.

    ``beta_max`` is filled in when the caller knows the best attainable
    interpretability score.
    """

    def __init__(self, message, beta_max=None):
        super().__init__(message)
        self.beta_max = beta_max
