"""Polynomial bases over the core covariates."""
import warnings
from dataclasses import dataclass, field
from itertools import combinations_with_replacement

import numpy as np

from .design import weighted_mean
from .ols import first_difference, wls

CORE = ("age", "log_family_income", "log_assets", "belief_mean", "belief_var")
SHORT = {"age": "age", "log_family_income": "x", "log_assets": "z",
         "belief_mean": "mu", "belief_var": "sigma2"}


@dataclass(frozen=True)
class BasisSpec:
    """All monomials of the core covariates up to total degree ``degree``.

    Parameters
    ----------
    degree : int
        Maximum total degree, at least 1.
    always_include : tuple of str or None
        Basis terms or control names left unpenalized in selection steps.
        ``None`` means the first-order terms and every control.
    controls : tuple of str or None
        Panel control columns entering linearly; ``None`` uses all of them.
    core : tuple of str
        Core covariates.
    """

    degree: int = 3
    always_include: tuple = None
    controls: tuple = None
    core: tuple = CORE

    def __post_init__(self):
        if self.degree < 1:
            raise ValueError("degree must be at least 1")

    def bind(self, panel):
        return PolynomialBasis.from_spec(self, panel)


@dataclass(frozen=True, eq=False)
class PolynomialBasis:
    """A :class:`BasisSpec` bound to a reference panel.

    Core covariates are centered at weighted means and divided by weighted
    standard deviations before products are formed. Covariates with no
    variation in the reference panel are dropped with a warning.
    """

    spec: BasisSpec
    variables: tuple
    means: np.ndarray
    sds: np.ndarray
    powers: tuple
    names: tuple
    controls: tuple
    always: tuple = field(default=())

    @classmethod
    def from_spec(cls, spec, panel):
        w = panel.weight
        keep, means, sds = [], [], []
        for v in spec.core:
            a = panel.frame[v].to_numpy(float)
            m = weighted_mean(a, w)
            sd = float(np.sqrt(np.average((a - m) ** 2, weights=w))) if len(a) else 0.0
            if sd <= 1e-12 * max(1.0, abs(m)):
                warnings.warn(f"dropping covariate {v!r}: no variation in the sample", stacklevel=3)
                continue
            keep.append(v)
            means.append(m)
            sds.append(sd)
        powers, names = [], []
        for d in range(1, spec.degree + 1):
            for combo in combinations_with_replacement(range(len(keep)), d):
                powers.append(combo)
                names.append(":".join(SHORT.get(keep[i], keep[i]) for i in combo))
        controls = tuple(panel.controls if spec.controls is None else spec.controls)
        if spec.always_include is None:
            always = tuple(n for n, p in zip(names, powers) if len(p) == 1) + controls
        else:
            always = tuple(spec.always_include)
            unknown = [a for a in always if a not in names and a not in controls]
            if unknown:
                raise ValueError(f"always_include terms not in basis or controls: {unknown}")
        return cls(spec, tuple(keep), np.array(means), np.array(sds), tuple(powers),
                   tuple(names), controls, always)

    def matrix(self, frame):
        """Basis evaluated on ``frame`` (DataFrame or Panel), shape (n, L)."""
        frame = getattr(frame, "frame", frame)
        n = len(frame)
        Zs = np.column_stack([(frame[v].to_numpy(float) - m) / s
                              for v, m, s in zip(self.variables, self.means, self.sds)]) \
            if self.variables else np.zeros((n, 0))
        cols = [np.prod(Zs[:, list(p)], axis=1) for p in self.powers]
        return np.column_stack(cols) if cols else np.zeros((n, 0))

    def control_matrix(self, frame):
        frame = getattr(frame, "frame", frame)
        if not self.controls:
            return np.zeros((len(frame), 0))
        return frame[list(self.controls)].to_numpy(float)

    @property
    def design_names(self):
        return self.names + self.controls

    def design_matrix(self, frame):
        """Basis followed by the control columns."""
        return np.column_stack([self.matrix(frame), self.control_matrix(frame)])

    def support_share(self, base_frame, shifted_frame):
        """Share of shifted rows outside the observed range, per covariate."""
        base_frame = getattr(base_frame, "frame", base_frame)
        shifted_frame = getattr(shifted_frame, "frame", shifted_frame)
        out = {}
        for v in self.variables:
            a = base_frame[v].to_numpy(float)
            b = shifted_frame[v].to_numpy(float)
            out[v] = float(np.mean((b < a.min()) | (b > a.max()))) if len(a) else 0.0
        return out


def fit_basis(spec, panel):
    """First-difference WLS of the outcome on a basis and the controls.

    Returns a :class:`FitResult` whose ``builder`` is the bound basis, so
    the fit can be evaluated at counterfactual covariates.
    """
    basis = spec.bind(panel)
    Z = np.column_stack([panel.column("y"), basis.design_matrix(panel)])
    d, w, c, _ = first_difference(Z, panel.household_id, panel.frame["wave"].to_numpy(),
                                  panel.weight, panel.cluster)
    return wls(d[:, 1:], d[:, 0], w, c, basis.design_names, basis)
