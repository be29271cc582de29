"""Household panel container and its CSV contract."""
import numpy as np
import pandas as pd

from ..errors import DataError

CORE_COLUMNS = ["household_id", "wave", "log_consumption", "log_family_income",
                "belief_mean", "belief_var", "log_assets", "age", "weight"]

ALIASES = {
    "y": "log_consumption",
    "x": "log_family_income",
    "mu": "belief_mean",
    "sigma2": "belief_var",
    "z": "log_assets",
}


def resolve(name):
    return ALIASES.get(name, name)


class Panel:
    """Household-by-wave observations.

    Wraps a DataFrame holding the core columns, any number of numeric
    control columns and an optional ``cluster_id`` column (households by
    default). Rows are kept sorted by household and wave.

    Parameters
    ----------
    frame : pandas.DataFrame
    controls : list of str, optional
        Control columns; by default every non-core column except
        ``cluster_id``.
    """

    def __init__(self, frame, controls=None):
        missing = [c for c in CORE_COLUMNS if c not in frame.columns]
        if missing:
            raise DataError(f"panel is missing core columns: {missing}")
        if controls is None:
            controls = [c for c in frame.columns if c not in CORE_COLUMNS and c != "cluster_id"]
        extra = [c for c in controls if c not in frame.columns]
        if extra:
            raise DataError(f"unknown control columns: {extra}")
        cols = CORE_COLUMNS + list(controls) + (["cluster_id"] if "cluster_id" in frame.columns else [])
        df = frame[cols].copy()
        for c in CORE_COLUMNS[2:] + list(controls):
            df[c] = pd.to_numeric(df[c], errors="coerce").astype(float)
        core = df[CORE_COLUMNS].to_numpy(dtype=float, na_value=np.nan) if len(df) else np.zeros((0, 9))
        if len(df) and not np.all(np.isfinite(core[:, 2:])):
            bad = np.flatnonzero(~np.all(np.isfinite(core[:, 2:]), axis=1))
            raise DataError(f"missing or non-finite core values in rows {bad[:10].tolist()}")
        if len(df) and np.any(df["belief_var"].to_numpy() < 0):
            raise DataError("belief_var must be nonnegative")
        if len(df) and np.any(df["weight"].to_numpy() <= 0):
            raise DataError("weights must be positive")
        if df.duplicated(["household_id", "wave"]).any():
            raise DataError("(household_id, wave) pairs must be unique")
        df = df.sort_values(["household_id", "wave"], kind="mergesort").reset_index(drop=True)
        self.frame = df
        self.controls = list(controls)

    @classmethod
    def from_valid_frame(cls, frame, controls):
        """Wrap a frame already known to satisfy the panel contract, skipping checks."""
        self = cls.__new__(cls)
        self.frame = frame
        self.controls = list(controls)
        return self

    def __len__(self):
        return len(self.frame)

    def column(self, name):
        return self.frame[resolve(name)].to_numpy(dtype=float)

    @property
    def weight(self):
        return self.frame["weight"].to_numpy(dtype=float)

    @property
    def household_id(self):
        return self.frame["household_id"].to_numpy()

    @property
    def cluster(self):
        if "cluster_id" in self.frame.columns:
            return self.frame["cluster_id"].to_numpy()
        return self.household_id

    def replace_columns(self, **columns):
        """Copy with some columns replaced (aliases allowed)."""
        df = self.frame.copy()
        for k, v in columns.items():
            df[resolve(k)] = v
        return Panel(df, self.controls)

    def subset(self, mask):
        return Panel(self.frame.loc[np.asarray(mask)].reset_index(drop=True), self.controls)

    @classmethod
    def read_csv(cls, path, controls=None):
        try:
            frame = pd.read_csv(path, encoding="utf-8")
        except pd.errors.EmptyDataError as exc:
            raise DataError(f"{path}: empty file") from exc
        except (pd.errors.ParserError, UnicodeDecodeError) as exc:
            raise DataError(f"{path}: {exc}") from exc
        if list(frame.columns[:len(CORE_COLUMNS)]) != CORE_COLUMNS:
            raise DataError(f"{path}: header must start with {','.join(CORE_COLUMNS)}")
        return cls(frame, controls)

    def to_csv(self, path):
        write_csv(self.frame, path)


def write_csv(frame, path):
    """Write a frame with a fixed float format, so output is reproducible."""
    frame.to_csv(path, index=False, float_format="%.12g", lineterminator="\n", encoding="utf-8")
