"""Ordinary least squares with classical inference, and Pearson correlation.

Locations are aligned by id before fitting; a location missing any variable
is dropped (listwise deletion) and reported.
"""

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy.linalg import solve_triangular
from scipy.special import betainc

from .errors import (
    DegenerateError, EmptySampleError, InsufficientDataError, SingularDesignError,
)

STAR_LEVELS = (0.05, 0.001)
MIN_MODEL_LOCATIONS = 8


def t_two_sided_p(t, df):
    """Two-sided p value of Student's t via the regularized incomplete beta."""
    t = np.asarray(t, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        x = df / (df + t * t)
    return betainc(df / 2.0, 0.5, x)


def stars(p, levels=STAR_LEVELS):
    """One star per significance level that ``p`` falls below."""
    if p is None or np.isnan(p):
        return ""
    return "*" * sum(p < lv for lv in levels)


@dataclass(frozen=True)
class Design:
    """Response and regressors; the intercept column is added by :func:`ols_fit`."""

    response_name: str
    y: np.ndarray
    names: tuple
    X: np.ndarray
    dropped: int = 0
    locations: tuple = ()
    dropped_locations: tuple = ()

    def __post_init__(self):
        y = np.asarray(self.y, dtype=float)
        X = np.asarray(self.X, dtype=float)
        if X.ndim == 1:
            X = X[:, None]
        if X.shape[0] != y.shape[0] or X.shape[1] != len(self.names):
            raise ValueError(f"design shape {X.shape} does not match y ({y.shape[0]}) "
                             f"and names ({len(self.names)})")
        if not (np.isfinite(y).all() and np.isfinite(X).all()):
            raise ValueError("design contains missing or non-finite values")
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "names", tuple(self.names))


@dataclass
class RegressionResult:
    response: str
    names: tuple
    coef: np.ndarray
    se: np.ndarray
    t: np.ndarray
    p: np.ndarray
    r2: float
    n: int
    df: int
    dropped: int = 0
    dropped_locations: tuple = ()
    locations: tuple = field(default=(), repr=False)

    @property
    def alpha(self):
        return float(self.coef[0])

    @property
    def betas(self):
        return dict(zip(self.names[1:], map(float, self.coef[1:])))

    def rows(self):
        """``(term, coef, se, t, p)`` per coefficient, intercept first."""
        return [(name, float(c), float(s), float(t), float(p))
                for name, c, s, t, p in zip(self.names, self.coef, self.se, self.t, self.p)]

    def to_text(self, levels=STAR_LEVELS):
        """Single-row table: coefficients with stars, then R squared."""
        head = [""] + list(self.names) + ["R2"]
        cells = [self.response]
        for name, c, _, _, p in self.rows():
            cells.append(f"{c:.3g}{stars(p, levels) if name != 'intercept' else ''}")
        cells.append(f"{self.r2:.2f}")
        widths = [max(len(a), len(b)) for a, b in zip(head, cells)]
        line = lambda vals: " | ".join(v.rjust(w) for v, w in zip(vals, widths))
        legend = "; ".join(f"{'*' * (i + 1)} p<{lv:g}" for i, lv in enumerate(levels))
        return "\n".join([line(head), "-+-".join("-" * w for w in widths), line(cells),
                          f"n={self.n} dropped={self.dropped} ({legend})"]) + "\n"


def _collinear_columns(X1, names):
    _, s, vt = np.linalg.svd(X1, full_matrices=False)
    tol = max(X1.shape) * np.finfo(float).eps * s[0]
    null = vt[s <= tol]
    if null.size == 0:
        return []
    weight = np.abs(null).max(axis=0)
    return [names[j] for j in np.flatnonzero(weight > 1e-8 * weight.max())]


def ols_fit(design):
    """Least-squares fit with an intercept, via a QR decomposition.

    Standard errors use ``SS_res / (n - k - 1)`` and p values are two-sided
    from Student's t with ``n - k - 1`` degrees of freedom. A coefficient with
    zero standard error (an exact fit) gets ``t = +-inf, p = 0``, or
    ``t = 0, p = 1`` when the coefficient itself is zero.

    Raises
    ------
    InsufficientDataError
        ``n <= k + 1``.
    SingularDesignError
        The design with intercept is rank deficient; ``columns`` names the
        columns involved in the dependency.
    DegenerateError
        The response has zero variance.
    """
    y, X = design.y, design.X
    n, k = X.shape
    if n <= k + 1:
        raise InsufficientDataError(f"{n} observations for {k} regressors plus intercept")
    names = ("intercept",) + design.names
    X1 = np.column_stack([np.ones(n), X])
    bad = _collinear_columns(X1, names)
    if bad:
        raise SingularDesignError(f"singular design: collinear columns {', '.join(bad)}", bad)
    ybar = math.fsum(y) / n
    ss_tot = math.fsum((y - ybar) ** 2)
    if ss_tot == 0:
        raise DegenerateError(f"response {design.response_name!r} has zero variance")

    q, r = np.linalg.qr(X1)
    coef = solve_triangular(r, q.T @ y)
    resid = y - X1 @ coef
    ss_res = math.fsum(resid ** 2)
    df = n - k - 1
    rinv = solve_triangular(r, np.eye(k + 1))
    cov = (ss_res / df) * (rinv @ rinv.T)
    se = np.sqrt(np.diag(cov))
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.where(se > 0, coef / se, np.where(coef == 0, 0.0, np.sign(coef) * np.inf))
    p = t_two_sided_p(t, df)
    r2 = min(max(1.0 - ss_res / ss_tot, 0.0), 1.0)
    return RegressionResult(design.response_name, names, coef, se, t, p, r2, n, df,
                            design.dropped, tuple(design.dropped_locations),
                            tuple(design.locations))


def _as_map(v):
    return v.values if hasattr(v, "values") and not callable(v.values) else v


def align(response, regressors, response_name="y"):
    """Build a :class:`Design` over locations present in every input.

    ``response`` and each regressor are ``{location: value}`` mappings (or
    objects exposing one as ``.values``). Locations missing from any input,
    or carrying ``None``/NaN, are dropped and reported.
    """
    maps = [_as_map(response)] + [_as_map(v) for v in regressors.values()]
    every = sorted(set().union(*maps))

    def ok(m, loc):
        v = m.get(loc)
        return v is not None and not (isinstance(v, float) and math.isnan(v))

    keep = [loc for loc in every if all(ok(m, loc) for m in maps)]
    dropped = [loc for loc in every if loc not in set(keep)]
    y = np.array([maps[0][loc] for loc in keep], dtype=float)
    X = np.array([[m[loc] for m in maps[1:]] for loc in keep], dtype=float).reshape(len(keep), -1)
    return Design(response_name, y, tuple(regressors), X, len(dropped), tuple(keep), tuple(dropped))


def fit_aligned(response, regressors, response_name="y", min_locations=MIN_MODEL_LOCATIONS):
    design = align(response, regressors, response_name)
    if len(design.y) < min_locations:
        raise InsufficientDataError(
            f"only {len(design.y)} locations with complete data, need {min_locations}")
    return ols_fit(design)


def model_development(capital_cult, capital_econ, dev, extras=None, response_name="dev"):
    """``dev ~ capital_cult + capital_econ [+ extras]``.

    ``extras`` maps further regressor names (e.g. ``penetration``,
    ``diversity``) to location mappings.
    """
    regs = {"capital_cult": capital_cult, "capital_econ": capital_econ}
    regs.update(extras or {})
    return fit_aligned(dev, regs, response_name)


def _zscore_map(values, name):
    from .metrics import zscore
    return zscore(_as_map(values), name).values


def model_house_price(capital_cult, capital_econ, house_price, cultural=True, economic=True):
    """z-scored house price on cultural and/or economic capital.

    Prices are z-scored over the locations that have every regressor, after
    listwise deletion.
    """
    regs = {}
    if cultural:
        regs["capital_cult"] = capital_cult
    if economic:
        regs["capital_econ"] = capital_econ
    if not regs:
        raise ValueError("need at least one regressor")
    design = align(house_price, regs, "house_price")
    if len(design.y) < MIN_MODEL_LOCATIONS:
        raise InsufficientDataError(
            f"only {len(design.y)} locations with complete data, need {MIN_MODEL_LOCATIONS}")
    try:
        z = _zscore_map(dict(zip(design.locations, design.y)), "house_price")
    except DegenerateError:
        raise DegenerateError("house prices have zero variance") from None
    design = Design("house_price", np.array([z[loc] for loc in design.locations]),
                    design.names, design.X, design.dropped, design.locations,
                    design.dropped_locations)
    return ols_fit(design)


class CategoryFit(NamedTuple):
    code: int
    r2: float | None
    best: bool
    note: str


def model_category_house(category_capitals, capital_econ, house_price):
    """House-price model per category, each with that category's capital and economic capital.

    Returns one row per category in code order; the highest R squared is
    flagged. Categories whose fit fails get ``r2=None`` and a note.
    """
    rows = []
    for code in sorted(category_capitals):
        try:
            res = model_house_price(category_capitals[code], capital_econ, house_price)
            rows.append([code, res.r2, ""])
        except (SingularDesignError, DegenerateError, InsufficientDataError) as exc:
            rows.append([code, None, str(exc)])
    fitted = [r[1] for r in rows if r[1] is not None]
    top = max(fitted) if fitted else None
    return [CategoryFit(code, r2, r2 is not None and r2 == top, note) for code, r2, note in rows]


class DeltaResult(NamedTuple):
    values: dict
    dropped: list


def delta(later, earlier):
    """``later - earlier`` for locations present in both."""
    later, earlier = _as_map(later), _as_map(earlier)
    common = sorted(set(later) & set(earlier))
    if not common:
        raise EmptySampleError("no location present in both tables")
    dropped = sorted(set(later) ^ set(earlier))
    return DeltaResult({loc: later[loc] - earlier[loc] for loc in common}, dropped)


class Correlation(NamedTuple):
    r: float
    p: float
    n: int


def pearson_test(x, y):
    """Sample Pearson correlation over common locations, with a two-sided t-test p value."""
    x, y = _as_map(x), _as_map(y)
    common = sorted(set(x) & set(y))
    n = len(common)
    if n < 3:
        raise InsufficientDataError(f"need >= 3 common locations, got {n}")
    a = np.array([x[k] for k in common], dtype=float)
    b = np.array([y[k] for k in common], dtype=float)
    da, db = a - math.fsum(a) / n, b - math.fsum(b) / n
    saa, sbb = math.fsum(da * da), math.fsum(db * db)
    if saa == 0 or sbb == 0:
        raise DegenerateError("zero variance input to correlation")
    r = math.fsum(da * db) / math.sqrt(saa * sbb)
    r = min(max(r, -1.0), 1.0)
    if abs(r) == 1.0:
        p = 0.0
    else:
        p = float(t_two_sided_p(r * math.sqrt((n - 2) / (1 - r * r)), n - 2))
    return Correlation(r, p, n)


def pearson(x, y):
    """Sample Pearson correlation coefficient over common locations."""
    return pearson_test(x, y).r
