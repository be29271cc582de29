"""Design matrices from term lists.

Terms are strings naming panel columns, with ``:`` for products, e.g.
``"x:mu"`` or ``"age:age"``. The special term ``"spline(log_assets)"``
expands into hinge functions at quantile knots. Short aliases ``x``, ``mu``,
``sigma2``, ``z`` and ``y`` resolve to the panel's core columns.

A specification is bound to a reference panel once, which fixes the
centering constants and knots, and can then be evaluated at shifted
covariates for counterfactual predictions.
"""
from dataclasses import dataclass, field

import numpy as np

from .panel import resolve

SPLINE_PREFIX = "spline("


def weighted_mean(a, w):
    return float(np.average(a, weights=w)) if len(a) else 0.0


def weighted_quantile(a, q, w):
    """Quantiles of ``a`` under weights ``w`` (inverse of the weighted CDF)."""
    order = np.argsort(a, kind="mergesort")
    a, w = np.asarray(a)[order], np.asarray(w)[order]
    cdf = (np.cumsum(w) - 0.5 * w) / w.sum()
    return np.interp(q, cdf, a)


@dataclass(frozen=True)
class LinearSpec:
    """Regression specification.

    Parameters
    ----------
    terms : tuple of str
        Regressors; products use ``:``.
    intercept : bool
        Add a constant (ignored for first-difference fits).
    first_difference : bool
        Estimate in within-household first differences.
    center : tuple of str
        Variables centered at their weighted mean before forming products.
    knots : int
        Number of quantile knots for ``spline(...)`` terms.
    name : str
        Label carried into results.
    """

    terms: tuple
    intercept: bool = True
    first_difference: bool = False
    center: tuple = ()
    knots: int = 20
    name: str = ""

    def bind(self, panel):
        return DesignBuilder.from_spec(self, panel)


@dataclass(frozen=True, eq=False)
class DesignBuilder:
    """A :class:`LinearSpec` with fixed centering constants and knots."""

    spec: LinearSpec
    means: dict = field(default_factory=dict)
    knot_values: dict = field(default_factory=dict)
    names: tuple = ()

    @classmethod
    def from_spec(cls, spec, panel):
        w = panel.weight
        means = {}
        for v in spec.center:
            means[resolve(v)] = weighted_mean(panel.column(v), w)
        knots = {}
        names = []
        if spec.intercept and not spec.first_difference:
            names.append("const")
        for term in spec.terms:
            if term.startswith(SPLINE_PREFIX):
                var = resolve(term[len(SPLINE_PREFIX):-1])
                a = panel.frame[var].to_numpy(float)
                qs = np.arange(1, spec.knots + 1) / (spec.knots + 1)
                k = np.unique(weighted_quantile(a, qs, w)) if len(a) else np.zeros(0)
                knots[var] = k
                names.extend(f"{term}[{i}]" for i in range(len(k)))
            else:
                names.append(term)
        return cls(spec, means, knots, tuple(names))

    def _var(self, frame, name):
        v = resolve(name)
        a = frame[v].to_numpy(dtype=float)
        return a - self.means[v] if v in self.means else a

    def matrix(self, frame):
        """Level design matrix evaluated on ``frame`` (a DataFrame or Panel)."""
        frame = getattr(frame, "frame", frame)
        n = len(frame)
        cols = []
        if self.spec.intercept and not self.spec.first_difference:
            cols.append(np.ones(n))
        for term in self.spec.terms:
            if term.startswith(SPLINE_PREFIX):
                var = resolve(term[len(SPLINE_PREFIX):-1])
                a = frame[var].to_numpy(dtype=float)
                for k in self.knot_values[var]:
                    cols.append(np.maximum(a - k, 0.0))
            else:
                col = np.ones(n)
                for part in term.split(":"):
                    col = col * self._var(frame, part)
                cols.append(col)
        return np.column_stack(cols) if cols else np.zeros((n, 0))

    design_matrix = matrix

    def variables(self):
        """Panel columns the design depends on."""
        out = set()
        for term in self.spec.terms:
            if term.startswith(SPLINE_PREFIX):
                out.add(resolve(term[len(SPLINE_PREFIX):-1]))
            else:
                out.update(resolve(p) for p in term.split(":"))
        return out
