import numpy as np
import pytest
from sklearn.base import clone
from sklearn.pipeline import make_pipeline

from ximsis.estimator import XimSisScreener, make_survival_target
from ximsis.impute import WeightedKNNImputer
from ximsis.screening import ScreeningConfig, TopD, screen
from ximsis.simgen import generate, preset


@pytest.fixture(scope="module")
def sample():
    return generate(preset("example1-n200-cr30", quick=True), 0)


def test_fit_matches_functional_api(sample):
    y = make_survival_target(sample.resp.y, sample.resp.delta)
    sel = XimSisScreener(n_features_to_select=38).fit(sample.X, y)
    res = screen(sample.X, sample.resp, ScreeningConfig("auto:1", TopD(38)))
    assert np.array_equal(sel.omega_, res.omega)
    assert sel.M_ == 14
    assert sel.get_support().sum() == 38
    assert set(sel.get_support(indices=True)) == set(res.selected)
    assert sel.transform(sample.X).shape == (200, 38)


def test_default_size_and_array_target(sample):
    y = np.column_stack([sample.resp.y, sample.resp.delta])
    sel = XimSisScreener(m_rule="fixed:5").fit(sample.X, y)
    assert sel.get_support().sum() == 38
    assert sel.M_ == 5
    assert set(range(5)) <= set(sel.ranking_[:38])


def test_threshold_and_clone(sample):
    y = make_survival_target(sample.resp.y, sample.resp.delta)
    sel = XimSisScreener(threshold=0.05)
    c = clone(sel)
    assert c.get_params()["threshold"] == 0.05
    c.fit(sample.X, y)
    assert np.array_equal(c.get_support(), c.omega_ >= 0.05)


def test_pipeline_with_imputer(sample):
    X = sample.X[:, :50].copy()
    X[3, 7] = np.nan
    y = make_survival_target(sample.resp.y, sample.resp.delta)
    pipe = make_pipeline(WeightedKNNImputer(15), XimSisScreener(n_features_to_select=10))
    out = pipe.fit_transform(X, y)
    assert out.shape == (200, 10)


def test_errors(sample):
    y = make_survival_target(sample.resp.y, sample.resp.delta)
    with pytest.raises(ValueError, match="dimension mismatch"):
        XimSisScreener().fit(sample.X[:-1], y)
    with pytest.raises(Exception):
        XimSisScreener().get_support()
