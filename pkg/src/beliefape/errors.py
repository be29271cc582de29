"""Exception types shared across modules."""


class ConfigError(ValueError):
    """Invalid run configuration."""


class DataError(ValueError):
    """Malformed or inconsistent input data."""


class DegenerateFitError(ValueError):
    """Too little information to fit a belief distribution."""


class RankDeficientError(ValueError):
    """Design matrix without full column rank.

    Attributes
    ----------
    columns : list of str
        Columns that are linear combinations of the others.
    """

    def __init__(self, columns):
        self.columns = list(columns)
        super().__init__("design is rank deficient; collinear columns: " + ", ".join(self.columns))
