import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from culturank import stats as s
from culturank.errors import (
    DegenerateError, EmptySampleError, InsufficientDataError, SingularDesignError,
)

from oracles import ols_oracle


def locs(n):
    return [f"L{i:02d}" for i in range(n)]


def as_map(v):
    return dict(zip(locs(len(v)), map(float, v)))


def zs(v):
    v = np.asarray(v, dtype=float)
    return (v - v.mean()) / v.std()


# -- ols ------------------------------------------------------------------------------------

def test_exact_line():
    x = np.arange(10.0)
    res = s.ols_fit(s.Design("y", 1 + 2 * x, ("x",), x))
    assert res.alpha == pytest.approx(1, abs=1e-9)
    assert res.betas["x"] == pytest.approx(2, abs=1e-9)
    assert res.r2 >= 1 - 1e-9
    assert res.df == 8


def test_uncorrelated():
    x = np.array([1.0, 2, 3, 4, 5, 6])
    y = np.array([1.0, -1, -1, 1, 1, -1])  # orthogonal to centred x up to rounding
    res = s.ols_fit(s.Design("y", y, ("x",), x))
    assert abs(res.betas["x"]) < 0.15
    assert res.r2 < 0.05


def test_matches_oracle_50x2():
    rng = np.random.default_rng(0)
    X = rng.normal(size=(50, 2))
    y = 0.3 + X @ [1.5, -0.7] + rng.normal(size=50)
    res = s.ols_fit(s.Design("y", y, ("a", "b"), X))
    coef, se, p, r2 = ols_oracle(X, y)
    np.testing.assert_allclose(res.coef, coef, atol=1e-8, rtol=0)
    np.testing.assert_allclose(res.se, se, atol=1e-10, rtol=0)
    np.testing.assert_allclose(res.p, p, atol=1e-10, rtol=0)
    assert res.r2 == pytest.approx(r2, abs=1e-10)


def test_collinear_columns_named():
    rng = np.random.default_rng(1)
    a, c = rng.normal(size=20), rng.normal(size=20)
    X = np.column_stack([a, c, 2 * a - 1])
    with pytest.raises(SingularDesignError) as exc:
        s.ols_fit(s.Design("y", rng.normal(size=20), ("a", "c", "b"), X))
    assert set(exc.value.columns) == {"intercept", "a", "b"}
    assert "c" not in exc.value.columns
    assert "a" in str(exc.value) and "b" in str(exc.value)


def test_constant_column_collinear_with_intercept():
    X = np.column_stack([np.arange(8.0), np.full(8, 3.0)])
    with pytest.raises(SingularDesignError) as exc:
        s.ols_fit(s.Design("y", np.arange(8.0) ** 2, ("x", "k"), X))
    assert set(exc.value.columns) == {"intercept", "k"}


def test_too_few_rows():
    with pytest.raises(InsufficientDataError):
        s.ols_fit(s.Design("y", [1.0, 2, 3], ("a", "b"), np.eye(3)[:, :2]))


def test_constant_response():
    with pytest.raises(DegenerateError):
        s.ols_fit(s.Design("y", np.full(6, 2.0), ("x",), np.arange(6.0)))


def test_design_validation():
    with pytest.raises(ValueError):
        s.Design("y", [1.0, 2.0], ("a",), np.ones((3, 1)))
    with pytest.raises(ValueError):
        s.Design("y", [1.0, float("nan"), 3], ("a",), np.ones((3, 1)))


def test_exact_fit_inference():
    x = np.arange(6.0)
    res = s.ols_fit(s.Design("y", 3 * x, ("x",), x))
    assert res.p[1] < 1e-30
    assert all(0 <= p <= 1 for p in res.p)


def test_stars():
    assert [s.stars(p) for p in (0.2, 0.05, 0.049, 0.001, 0.0009, float("nan"))] == \
        ["", "", "*", "*", "**", ""]


def test_text_table():
    x = np.arange(12.0)
    y = 1 + 2 * x + np.sin(x)
    text = s.ols_fit(s.Design("dev", y, ("capital_cult",), x)).to_text()
    head, rule, row, foot = text.splitlines()
    assert "capital_cult" in head and "R2" in head
    assert row.lstrip().startswith("dev")
    assert "**" in row
    assert foot.startswith("n=12 dropped=0")


@st.composite
def designs(draw):
    k = draw(st.integers(1, 4))
    n = draw(st.integers(k + 3, 40))
    seed = draw(st.integers(0, 2 ** 31))
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(n, k))
    y = rng.normal(size=n) + X @ rng.normal(size=k)
    return X, y


@given(designs())
@settings(max_examples=60, deadline=None)
def test_residuals_orthogonal(d):
    X, y = d
    res = s.ols_fit(s.Design("y", y, tuple(f"x{i}" for i in range(X.shape[1])), X))
    X1 = np.column_stack([np.ones(len(y)), X])
    resid = y - X1 @ res.coef
    assert np.abs(X1.T @ resid).max() < 1e-8


@given(designs())
@settings(max_examples=60, deadline=None)
def test_negated_response(d):
    X, y = d
    names = tuple(f"x{i}" for i in range(X.shape[1]))
    a, b = s.ols_fit(s.Design("y", y, names, X)), s.ols_fit(s.Design("y", -y, names, X))
    np.testing.assert_allclose(a.coef, -b.coef, atol=1e-12)
    np.testing.assert_allclose(np.abs(a.t), np.abs(b.t), rtol=1e-9)
    np.testing.assert_allclose(a.p, b.p, atol=1e-12)
    assert a.r2 == pytest.approx(b.r2, abs=1e-12)


@given(designs())
@settings(max_examples=60, deadline=None)
def test_nested_r2(d):
    X, y = d
    if X.shape[1] < 2:
        return
    names = tuple(f"x{i}" for i in range(X.shape[1]))
    full = s.ols_fit(s.Design("y", y, names, X))
    sub = s.ols_fit(s.Design("y", y, names[:-1], X[:, :-1]))
    assert full.r2 >= sub.r2 - 1e-12
    assert 0 <= sub.r2 <= full.r2 <= 1


# -- alignment and models -----------------------------------------------------------------------

def test_align_listwise():
    d = s.align({"A": 1.0, "B": 2.0, "C": None, "D": 4.0},
                {"x": {"A": 1.0, "B": 5.0, "C": 3.0, "E": 2.0}, "w": {"A": 0.0, "B": 1.0}})
    assert d.locations == ("A", "B")
    assert d.dropped_locations == ("C", "D", "E")
    assert d.dropped == 3
    assert d.X.tolist() == [[1.0, 0.0], [5.0, 1.0]]


def _planted(n=33, seed=0, noise=0.0):
    rng = np.random.default_rng(seed)
    c, e = zs(rng.normal(size=n)), zs(rng.normal(size=n))
    dev = -0.51 + 3.4 * c - 4.5 * e + noise * rng.normal(size=n)
    return as_map(c), as_map(e), as_map(dev)


def test_model_development_recovers():
    c, e, dev = _planted()
    res = s.model_development(c, e, dev)
    assert res.names == ("intercept", "capital_cult", "capital_econ")
    np.testing.assert_allclose(res.coef, [-0.51, 3.4, -4.5], atol=1e-6)
    assert res.r2 >= 1 - 1e-9


def test_model_development_reports_dropped():
    c, e, dev = _planted()
    del dev["L03"]
    e["L05"] = None
    res = s.model_development(c, e, dev)
    assert res.dropped_locations == ("L03", "L05")
    assert res.n == 31


def test_model_development_extras_raise_r2():
    rng = np.random.default_rng(4)
    c, e = zs(rng.normal(size=33)), zs(rng.normal(size=33))
    h = rng.uniform(0.5, 2.2, 33)
    dev = 0.2 + c - e + 1.5 * h + 0.3 * rng.normal(size=33)
    base = s.model_development(as_map(c), as_map(e), as_map(dev))
    more = s.model_development(as_map(c), as_map(e), as_map(dev), {"diversity": as_map(h)})
    assert more.r2 > base.r2
    assert more.names[-1] == "diversity"


def test_model_development_collinear():
    c, _, dev = _planted()
    with pytest.raises(SingularDesignError):
        s.model_development(c, dict(c), dev)


def test_model_development_min_locations():
    c, e, dev = _planted(n=7)
    with pytest.raises(InsufficientDataError):
        s.model_development(c, e, dev)


def _house(n=33, seed=2):
    # exact z-vectors whose correlation makes 0.53 c + 0.73 e a z-score itself
    rng = np.random.default_rng(seed)
    rho = (1 - 0.53 ** 2 - 0.73 ** 2) / (2 * 0.53 * 0.73)
    c = zs(rng.normal(size=n))
    w = rng.normal(size=n)
    w = zs(w - (w @ c) / (c @ c) * c)
    e = rho * c + math.sqrt(1 - rho ** 2) * w
    return c, e


def test_model_house_price_recovers():
    c, e = _house()
    price = 350_000 + 40_000 * (0.53 * c + 0.73 * e)
    res = s.model_house_price(as_map(c), as_map(e), as_map(price))
    np.testing.assert_allclose(res.coef, [0, 0.53, 0.73], atol=1e-6)


def test_model_house_price_nested():
    c, e = _house()
    price = as_map(0.53 * c + 0.73 * e)
    full = s.model_house_price(as_map(c), as_map(e), price)
    econ = s.model_house_price(as_map(c), as_map(e), price, cultural=False)
    assert econ.names == ("intercept", "capital_econ")
    assert econ.r2 < full.r2
    with pytest.raises(ValueError):
        s.model_house_price(as_map(c), as_map(e), price, cultural=False, economic=False)


def test_model_house_price_zero_variance():
    c, e = _house()
    with pytest.raises(DegenerateError, match="zero variance"):
        s.model_house_price(as_map(c), as_map(e), as_map(np.full(33, 5e5)))


def test_model_category_house_planted():
    rng = np.random.default_rng(9)
    e = as_map(zs(rng.normal(size=33)))
    caps = {code: as_map(zs(rng.normal(size=33))) for code in range(100, 1000, 100)}
    price = {k: 2.0 * caps[600][k] + 0.5 * e[k] + 0.1 * rng.normal() for k in e}
    rows = s.model_category_house(caps, e, price)
    assert [r.code for r in rows] == list(range(100, 1000, 100))
    assert [r.code for r in rows if r.best] == [600]
    assert max(r.r2 for r in rows) == rows[5].r2


def test_model_category_house_symmetric_and_skips():
    rng = np.random.default_rng(10)
    e = as_map(zs(rng.normal(size=20)))
    same = as_map(zs(rng.normal(size=20)))
    price = as_map(rng.normal(size=20))
    caps = {c: dict(same) for c in (100, 200, 300)}
    caps[400] = dict(e)  # collinear with economic capital
    rows = s.model_category_house(caps, e, price)
    r2 = [r.r2 for r in rows[:3]]
    assert r2[0] == pytest.approx(r2[1], abs=1e-12) == pytest.approx(r2[2], abs=1e-12)
    assert rows[3].r2 is None and "singular" in rows[3].note
    assert [r.best for r in rows[:3]] == [True, True, True]


# -- delta and correlation ------------------------------------------------------------------------

def test_delta():
    assert s.delta({"A": 5.0}, {"A": 3.0}).values == {"A": 2.0}
    res = s.delta({"A": 5.0, "C": 1.0}, {"A": 3.0, "B": 1.0})
    assert res.values == {"A": 2.0} and res.dropped == ["B", "C"]
    same = {"A": 1.5, "B": -2.0}
    assert s.delta(same, same).values == {"A": 0.0, "B": 0.0}
    with pytest.raises(EmptySampleError):
        s.delta({"A": 1.0}, {"B": 1.0})


def test_pearson_examples():
    x = as_map(np.arange(10.0) ** 1.5)
    assert s.pearson(x, x) == pytest.approx(1.0, abs=1e-15)
    assert s.pearson(x, {k: -v for k, v in x.items()}) == pytest.approx(-1.0, abs=1e-15)
    with pytest.raises(DegenerateError):
        s.pearson(x, {k: 1.0 for k in x})
    with pytest.raises(InsufficientDataError):
        s.pearson({"a": 1.0, "b": 2.0}, {"a": 1.0, "b": 3.0})


def test_pearson_oracle():
    rng = np.random.default_rng(12)
    a, b = rng.normal(size=100), rng.normal(size=100)
    b += 0.4 * a
    want = np.cov(a, b, ddof=0)[0, 1] / (a.std() * b.std())
    res = s.pearson_test(as_map(a), as_map(b))
    assert res.r == pytest.approx(want, abs=1e-12)
    assert res.n == 100
    # t-test p value against the regression slope p value
    fit = s.ols_fit(s.Design("b", b, ("a",), a))
    assert res.p == pytest.approx(fit.p[1], abs=1e-12)


@given(st.integers(0, 2 ** 31), st.floats(-50, 50).filter(lambda v: abs(v) > 1e-3),
       st.floats(-100, 100))
@settings(max_examples=100, deadline=None)
def test_pearson_affine(seed, a, b):
    rng = np.random.default_rng(seed)
    x, y = rng.normal(size=12), rng.normal(size=12)
    r = s.pearson(as_map(x), as_map(y))
    r2 = s.pearson(as_map(a * x + b), as_map(y))
    assert r2 == pytest.approx(math.copysign(1, a) * r, abs=1e-9)
