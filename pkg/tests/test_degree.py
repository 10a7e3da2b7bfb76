import json
import math
import warnings

import numpy as np
import pytest
from hypothesis import given, strategies as st

from irsa_mpr.degree import (LAMBDA2, LAMBDA3, DegreeDistribution, EdgeView, load_distribution,
                             save_distribution)
from irsa_mpr.design import exponential_distribution
from irsa_mpr.errors import DistributionError, DomainError

X2 = DegreeDistribution.regular(2)


def poly_oracle(dist, x, deriv=0):
    coeffs = np.zeros(dist.max_degree + 1)
    for d, p in dist.entries.items():
        coeffs[d] = p
    return np.polynomial.polynomial.polyval(x, np.polynomial.polynomial.polyder(coeffs, deriv)
                                            if deriv else coeffs)


@st.composite
def distributions(draw):
    degrees = draw(st.lists(st.integers(2, 64), min_size=1, max_size=8, unique=True))
    weights = draw(st.lists(st.floats(0.01, 1.0), min_size=len(degrees), max_size=len(degrees)))
    total = math.fsum(weights)
    return DegreeDistribution({d: w / total for d, w in zip(degrees, weights)})


class TestEvaluate:
    def test_regular_at_one(self):
        assert X2.evaluate(1.0) == 1.0

    def test_lambda2_at_zero(self):
        assert LAMBDA2.evaluate(0.0) == 0.0

    def test_lambda2_at_half(self):
        expected = 0.5 * 0.25 + 0.28 * 0.125 + 0.22 * 0.00390625
        assert expected == pytest.approx(0.16086, abs=1e-5)
        assert LAMBDA2.evaluate(0.5) == pytest.approx(expected, abs=1e-15)
        assert LAMBDA2.evaluate(0.5) == pytest.approx(poly_oracle(LAMBDA2, 0.5), abs=1e-15)

    @pytest.mark.parametrize("x", [-0.1, 1.0000001, float("nan")])
    def test_domain(self, x):
        with pytest.raises(DomainError):
            LAMBDA2.evaluate(x)


class TestDerivative:
    def test_regular(self):
        assert X2.derivative(1.0) == 2.0

    def test_lambda2(self):
        assert LAMBDA2.derivative(1.0) == pytest.approx(3.6, abs=1e-12)

    def test_zero_for_min_degree_two(self):
        assert LAMBDA3.derivative(0.0) == 0.0

    @pytest.mark.parametrize("x", [0.1, 0.5, 0.9])
    def test_against_numpy(self, x):
        assert LAMBDA3.derivative(x) == pytest.approx(poly_oracle(LAMBDA3, x, 1), rel=1e-13)


class TestMeanDegree:
    def test_cubic(self):
        assert DegreeDistribution.regular(3).mean_degree() == 3

    def test_exponential_design(self):
        assert exponential_distribution(1.73, 5).mean_degree() == pytest.approx(2.74, abs=0.005)

    def test_lambda3(self):
        assert LAMBDA3.mean_degree() == pytest.approx(3.5, abs=1e-12)


class TestEdgePerspective:
    def test_regular_maps_to_itself(self):
        assert X2.edge_perspective().entries == {2: 1.0}

    def test_lambda2(self):
        ev = LAMBDA2.edge_perspective()
        for d, v in {2: 1.0 / 3.6, 3: 0.84 / 3.6, 8: 1.76 / 3.6}.items():
            assert ev.entries[d] == pytest.approx(v, abs=1e-12)

    def test_edge_view_polynomial(self):
        ev = LAMBDA2.edge_perspective()
        assert ev.evaluate(0.7) == pytest.approx(LAMBDA2.derivative(0.7) / 3.6, rel=1e-12)


class TestValidation:
    def test_duplicate_degrees(self):
        with pytest.raises(DistributionError):
            DegreeDistribution([(2, 0.5), (2, 0.5)])

    def test_bad_sum_rejected(self):
        with pytest.raises(DistributionError):
            DegreeDistribution({2: 0.5, 3: 0.4})

    def test_small_drift_renormalized(self):
        with pytest.warns(UserWarning, match="renormalizing"):
            d = DegreeDistribution({2: 0.5, 3: 0.5 + 1e-8})
        assert math.fsum(d.probabilities) == pytest.approx(1.0, abs=1e-15)

    def test_exact_sum_silent(self):
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            DegreeDistribution({2: 0.5, 3: 0.28, 8: 0.22})

    def test_degree_cap(self):
        with pytest.raises(DistributionError):
            DegreeDistribution({65: 1.0})

    def test_degree_positive(self):
        with pytest.raises(DistributionError):
            DegreeDistribution({0: 1.0})

    def test_zero_entries_dropped(self):
        d = DegreeDistribution({2: 1.0, 5: 0.0})
        assert d.degrees == (2,)

    def test_negative_probability(self):
        with pytest.raises(DistributionError):
            DegreeDistribution({2: 1.1, 3: -0.1})


class TestJson:
    def test_serialization_shape(self):
        assert LAMBDA2.to_json() == {"entries": [{"degree": 2, "prob": 0.5},
                                                 {"degree": 3, "prob": 0.28},
                                                 {"degree": 8, "prob": 0.22}]}

    def test_file_round_trip(self, tmp_path):
        path = tmp_path / "d.json"
        save_distribution(LAMBDA3, path)
        assert load_distribution(path) == LAMBDA3

    def test_parser_rejects_duplicates(self, tmp_path):
        path = tmp_path / "d.json"
        path.write_text(json.dumps({"entries": [{"degree": 2, "prob": 0.5},
                                                {"degree": 2, "prob": 0.5}]}))
        with pytest.raises(DistributionError):
            load_distribution(path)

    def test_parser_rejects_missing_field(self):
        with pytest.raises(DistributionError):
            DegreeDistribution.from_json({"entries": [{"degree": 2}]})

    def test_plain_mapping(self):
        d = DegreeDistribution.from_json({"2": 0.5, "3": 0.28, "8": 0.22})
        assert d == LAMBDA2
        with pytest.raises(DistributionError):
            DegreeDistribution.from_json({"two": 1.0})
        with pytest.raises(DistributionError):
            DegreeDistribution.from_json({})


@given(distributions())
def test_evaluate_at_one(dist):
    assert dist.evaluate(1.0) == pytest.approx(1.0, abs=1e-12)


@given(distributions())
def test_edge_view_sums_to_one_and_keeps_support(dist):
    ev = dist.edge_perspective()
    assert math.fsum(ev.entries.values()) == pytest.approx(1.0, abs=1e-12)
    assert set(ev.entries) == set(dist.entries)


@given(distributions())
def test_derivative_monotone(dist):
    values = [dist.derivative(x) for x in np.linspace(0, 1, 101)]
    assert all(b >= a for a, b in zip(values, values[1:]))


@given(distributions())
def test_edge_round_trip(dist):
    back = dist.edge_perspective().to_node(dist.mean_degree())
    for d, p in dist.entries.items():
        assert back.entries[d] == pytest.approx(p, abs=1e-12)


def test_edge_view_validates():
    with pytest.raises(DistributionError):
        EdgeView({2: 0.4})
