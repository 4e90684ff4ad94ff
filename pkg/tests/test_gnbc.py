import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from febim import data, gnbc
from febim.errors import DimensionMismatch, EmptyClass, NonPositiveVariance

from conftest import make_dataset


def direct_log_density(x, mean, var):
    return math.log(math.exp(-((x - mean) ** 2) / (2 * var)) / math.sqrt(2 * math.pi * var))


def test_moments_by_hand():
    ds = make_dataset([[1.0], [3.0], [10.0]], [0, 0, 1])
    p = gnbc.train(ds)
    # population variance of {1, 3, 10}: mean 14/3, squared deviations sum to 134/3 -> 134/9
    floor = 1e-9 * 134 / 9
    assert p.means[0, 0] == 2.0
    assert p.variances[0, 0] == pytest.approx(1.0 + floor, abs=1e-15)
    assert p.means[1, 0] == 10.0
    assert p.variances[1, 0] == pytest.approx(floor, rel=1e-12)
    assert p.priors.tolist() == pytest.approx([2 / 3, 1 / 3])


def test_single_class_prior():
    p = gnbc.train(make_dataset([[0.0], [1.0], [5.0]], [0, 0, 0]))
    assert p.priors.tolist() == [1.0]


def test_constant_features_get_absolute_floor():
    p = gnbc.train(make_dataset([[2.0], [2.0]], [0, 1]))
    assert np.all(p.variances > 0)


def test_empty_class_raises():
    with pytest.raises(EmptyClass):
        gnbc.train(make_dataset([[0.0], [1.0]], [0, 0], k=2))


def test_iris_params(iris_params):
    assert iris_params.means.shape == (3, 4)
    assert iris_params.variances.shape == (3, 4)
    assert iris_params.priors == pytest.approx([1 / 3] * 3, abs=1e-12)
    assert iris_params.priors.sum() == pytest.approx(1.0, abs=1e-12)


def test_log_pdf_peak():
    assert gnbc.gaussian_log_pdf(0.0, 0.0, 1.0) == pytest.approx(-0.9189385332046727, abs=1e-15)


def test_log_pdf_one_sigma():
    peak = gnbc.gaussian_log_pdf(1.5, 1.5, 2.25)
    assert gnbc.gaussian_log_pdf(3.0, 1.5, 2.25) == pytest.approx(peak - 0.5, abs=1e-14)


def test_log_pdf_substitution():
    assert gnbc.gaussian_log_pdf(2.0, 0.0, 4.0) == pytest.approx(-0.5 * math.log(8 * math.pi) - 0.5, abs=1e-14)


def test_log_pdf_rejects_nonpositive_variance():
    with pytest.raises(NonPositiveVariance):
        gnbc.gaussian_log_pdf(0.0, 0.0, 0.0)


@given(st.floats(-50, 50), st.floats(-50, 50), st.floats(1e-6, 1e3))
def test_log_pdf_matches_direct_density(x, mean, var):
    # keep the direct density away from underflow
    if (x - mean) ** 2 / (2 * var) > 600:
        return
    assert gnbc.gaussian_log_pdf(x, mean, var) == pytest.approx(direct_log_density(x, mean, var), abs=1e-12, rel=1e-12)


def _params(priors, means, variances):
    return gnbc.GnbcParams(np.array(priors, float), np.array(means, float), np.array(variances, float))


def test_predict_single_event():
    p = _params([1.0], [[0.0]], [[1.0]])
    assert gnbc.predict_float(p, [123.0])[0] == 0


def test_predict_prior_dominance():
    p = _params([0.9, 0.1], [[0.0], [0.0]], [[1.0], [1.0]])
    assert gnbc.predict_float(p, [0.3])[0] == 0


def test_predict_crossover():
    # equal variances and priors: decision boundary at the midpoint x = 2
    p = _params([0.5, 0.5], [[0.0], [4.0]], [[1.0], [1.0]])
    assert gnbc.predict_float(p, [1.0])[0] == 0
    assert gnbc.predict_float(p, [3.0])[0] == 1


def test_predict_exact_tie_goes_to_lowest_index():
    p = _params([0.5, 0.5], [[0.0], [4.0]], [[1.0], [1.0]])
    assert gnbc.predict_float(p, [2.0])[0] == 0


def test_predict_log_posteriors_formula():
    p = _params([0.25, 0.75], [[0.0, 1.0], [2.0, -1.0]], [[1.0, 2.0], [0.5, 3.0]])
    x = [0.3, -0.4]
    _, lp = gnbc.predict_float(p, x)
    for c in range(2):
        expect = math.log(p.priors[c]) + sum(
            direct_log_density(x[i], p.means[c, i], p.variances[c, i]) for i in range(2))
        assert lp[c] == pytest.approx(expect, abs=1e-12)


def test_predict_dimension_mismatch():
    p = _params([1.0], [[0.0, 0.0]], [[1.0, 1.0]])
    with pytest.raises(DimensionMismatch):
        gnbc.predict_float(p, [0.0])


@given(st.lists(st.floats(-100, 100), min_size=1, max_size=1), st.floats(-1e3, 1e3))
def test_argmax_invariant_to_class_independent_shift(sample, shift):
    p = _params([0.2, 0.5, 0.3], [[0.0], [1.0], [-2.0]], [[1.0], [0.5], [4.0]])
    _, lp = gnbc.predict_float(p, sample)
    assert np.argmax(lp + shift) == np.argmax(lp)


def test_baseline_iris_band(iris):
    accs = []
    for epoch in range(100):
        tr, te = data.split(iris, data.SplitSpec(0.7, 0, epoch))
        accs.append(gnbc.accuracy(gnbc.train(tr), te))
    assert 0.92 <= np.mean(accs) <= 0.98


def test_model_json_round_trip(tmp_path, iris_params):
    path = tmp_path / "model.json"
    gnbc.save_model(iris_params, path)
    back = gnbc.load_model(path)
    assert np.array_equal(back.priors, iris_params.priors)
    assert np.array_equal(back.means, iris_params.means)
    assert np.array_equal(back.variances, iris_params.variances)
    assert back.class_names == iris_params.class_names
    assert back.feature_names == iris_params.feature_names


def test_model_json_schema_rejects_garbage(tmp_path):
    from febim.errors import SchemaError
    path = tmp_path / "m.json"
    path.write_text('{"priors": "x"}')
    with pytest.raises(SchemaError):
        gnbc.load_model(path)
