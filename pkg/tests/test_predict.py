import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from martail import MarModel, total_variation
from martail.errors import NonCauchyInnovation, UnsupportedOrder, ZeroRatio
from martail.model import InnovationSpec, ar_recursion
from martail.predict import (
    ConditioningSet,
    cauchy_mar11_predictive_density,
    dbj_mar02_atoms,
    mar11_level_weights,
    predict_level,
    predict_level_and_ratio_mar11,
    predict_marp1,
    predictive_density_mass,
    predictive_density_modes,
    restrict_to_past_ratio,
)
from martail.tail import tail_coefficients


def test_level_mar11(mar11):
    law = predict_level(mar11)
    assert law.weight_of(0.6) == pytest.approx(0.6 / 0.76, abs=1e-12)
    assert law.weight_of(2.5) == pytest.approx(0.16 / 0.76, abs=1e-12)


@given(st.floats(0.05, 0.9), st.floats(0.5, 2.0))
def test_level_pure_noncausal(psi, alpha):
    law = predict_level(MarModel((0.0,), (psi,)), alpha=alpha)
    assert law.weight_of(0.0) == pytest.approx(1 - psi ** alpha, abs=1e-12)
    assert law.weight_of(1 / psi) == pytest.approx(psi ** alpha, abs=1e-12)


def test_level_two_steps(mar11):
    law = predict_level(mar11, [1, 2])
    assert law.weight_of([0.6, 0.36]) == pytest.approx(0.789474, abs=1e-6)
    assert law.weight_of([2.5, 1.5]) == pytest.approx(0.126316, abs=1e-6)
    assert law.weight_of([2.5, 6.25]) == pytest.approx(0.084211, abs=1e-6)


@given(st.floats(0.05, 0.9), st.floats(0.05, 0.9), st.floats(0.5, 2.0))
def test_drift_based_matches_closed_form(phi, psi, alpha):
    drift = predict_level(MarModel((phi,), (psi,)), alpha=alpha)
    closed = mar11_level_weights(phi, psi, alpha)
    assert total_variation(drift, closed) < 1e-12


def test_second_ratio_given_first(mar11):
    law = predict_level(mar11, [1, 2])
    ratio = law.map(lambda x: [x[0], x[1] / x[0]])
    # conditioning on the first coordinate: Z_1 = 1 / r
    # after a collapse the path keeps decaying at rate phi
    after_phi = restrict_to_past_ratio(ratio, 1 / 0.6)
    assert after_phi.weight_of(0.6) == pytest.approx(1.0)
    after_burst = restrict_to_past_ratio(ratio, 0.4)
    assert after_burst.weight_of(2.5) == pytest.approx(0.4, abs=1e-12)
    assert after_burst.weight_of(0.6) == pytest.approx(0.6, abs=1e-12)


def test_ratio_law_examples(mar11):
    law = predict_level_and_ratio_mar11(mar11, 2.0)
    assert law.weight_of(0.6) == pytest.approx(0.6)
    assert law.weight_of(2.35) == pytest.approx(0.4)
    assert predict_level_and_ratio_mar11(mar11, 2.5).scalar_atoms[-1] == pytest.approx(2.5)
    point = predict_level_and_ratio_mar11(mar11, 0.6)
    assert len(point) == 1 and point.weight_of(0.6) == pytest.approx(1.0)


def test_restriction_reproduces_ratio_law(mar11):
    co = tail_coefficients(mar11, 1.0)
    joint = predict_level(mar11, [-1, 1], coeffs=co)
    for r in (0.6, 2.5):
        restricted = restrict_to_past_ratio(joint, r)
        assert total_variation(restricted, predict_level_and_ratio_mar11(mar11, r)) < 1e-12


def test_marp1_reduces_to_mar11(mar11):
    for r in (0.3, 1.0, 2.0, -1.5):
        assert total_variation(predict_marp1(mar11, [r]), predict_level_and_ratio_mar11(mar11, r)) < 1e-15


def test_marp1_second_order_atom():
    model = MarModel((0.5, -0.06), (0.4,))
    law = predict_marp1(model, [2.0, 1.5])
    # atom A solves Phi(L) y_{t+1} = 0 given y_t = 1, y_{t-1} = 1/2
    assert law.weight_of(0.47) == pytest.approx(1 - 0.4)
    assert 0.47 - 0.5 * 1.0 + 0.06 * 0.5 == pytest.approx(0.0)


def test_marp1_small_psi():
    law = predict_marp1(MarModel((0.5,), (1e-12,)), [2.0])
    assert law.weights.max() == pytest.approx(1.0)


def test_marp1_errors(mar11):
    with pytest.raises(ZeroRatio):
        predict_marp1(mar11, [0.0])
    with pytest.raises(ValueError):
        predict_marp1(mar11, [1.0, 2.0])
    with pytest.raises(UnsupportedOrder):
        predict_marp1(MarModel((0.5,), (0.3, 0.1)), [1.0])


def test_conditioning_set_memory(mar11):
    ConditioningSet("level_and_ratios", ratios=(2.0,)).check_memory(mar11)
    with pytest.raises(ValueError):
        ConditioningSet("level_and_ratios", ratios=(2.0, 1.0)).check_memory(mar11)
    with pytest.raises(ValueError):
        ConditioningSet("sometimes")


# --- predictive density -----------------------------------------------------

@pytest.mark.parametrize("y", [10.0, 100.0, 1000.0])
@pytest.mark.parametrize("r", [0.5, 1.0, 2.0])
def test_density_unit_mass(mar11, y, r):
    assert predictive_density_mass(y, r, mar11) == pytest.approx(1.0, abs=1e-6)


@given(st.floats(-50, 50), st.floats(1.0, 1e3), st.floats(0.2, 3.0))
def test_density_nonnegative(x, y, r):
    model = MarModel((0.6,), (0.4,))
    assert cauchy_mar11_predictive_density(y, r, [x], model)[0] >= 0.0


def test_density_with_scale_unit_mass():
    model = MarModel((0.6,), (0.4,), InnovationSpec("cauchy", scale=3.0))
    assert predictive_density_mass(50.0, 2.0, model) == pytest.approx(1.0, abs=1e-6)


def test_density_modes(mar11):
    assert predictive_density_modes(100.0, 2.0, mar11) == pytest.approx([0.6, 2.35], abs=0.02)
    assert predictive_density_modes(100.0, 1.0, mar11) == pytest.approx([0.6, 1.6], abs=0.02)


def test_density_needs_cauchy():
    model = MarModel((0.6,), (0.4,), InnovationSpec("pareto", alpha=1.5))
    with pytest.raises(NonCauchyInnovation):
        cauchy_mar11_predictive_density(10.0, 2.0, [1.0], model)


# --- double big jumps -------------------------------------------------------

FIG = MarModel((), (1.0, -0.24))


def test_dbj_atom_a():
    law = dbj_mar02_atoms(FIG, 2.0)
    assert law.provenance == "dbj_atoms_only"
    assert law.atoms[0, 0] == pytest.approx((0.5 - 1.0) / -0.24, abs=1e-12)
    assert np.all(np.isnan(law.weights))
    assert law.labels[0] == "A" and law.labels[-1] == "B50"


def test_dbj_b_atoms_converge_to_a():
    law = dbj_mar02_atoms(FIG, 2.0, J=50)
    a = law.atoms[0, 0]
    assert abs(law.atoms[-1, 0] - a) < 1e-6
    # b_{j+1} - b_1 b_j = psi_2 b_{j-1}, so every B_j equals A
    assert np.allclose(law.atoms[1:, 0], a, rtol=1e-12)


def test_dbj_reduces_to_sbj():
    b = ar_recursion(np.array([1.0, -0.24]), 10)
    point = dbj_mar02_atoms(FIG, 1.0 / b[1])
    assert len(point) == 1 and point.atoms[0, 0] == 0.0
    for h in (1, 2, 4):
        r = b[h] / b[h + 1]
        law = dbj_mar02_atoms(FIG, r)
        assert law.atoms[0, 0] == pytest.approx(b[h - 1] / b[h], rel=1e-12)


def test_dbj_errors():
    with pytest.raises(UnsupportedOrder):
        dbj_mar02_atoms(MarModel((0.5,), (0.4,)), 2.0)
    with pytest.raises(ZeroRatio):
        dbj_mar02_atoms(FIG, 0.0)
