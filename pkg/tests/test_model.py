import json
import math

import numpy as np
import pytest
from hypothesis import given

from martail import InnovationSpec, MarModel, ma_coefficients, pure_components, split_polynomials
from martail.errors import DegenerateDecomposition, InvalidInnovation, NonStationary, SeriesTooShort, WindowTooSmall
from martail.model import apply_lag_polynomial, ar_recursion, apply_lead_polynomial, validate_and_roots
from martail.simulate import simulate_trajectory
from strategies import mar_models


# --- roots -----------------------------------------------------------------

def test_order_one_root_is_coefficient():
    lam, mu = validate_and_roots([0.6], [])
    assert np.allclose(lam, [0.6]) and mu.size == 0


def test_double_root():
    lam, _ = validate_and_roots([1.0, -0.25], [])
    assert np.allclose(np.sort(lam.real), [0.5, 0.5], atol=1e-7)


@pytest.mark.parametrize("phi,psi", [([1.2], []), ([], [1.0]), ([0.5], [-1.5]), ([2.0, -1.0], [])])
def test_nonstationary_rejected(phi, psi):
    with pytest.raises(NonStationary):
        validate_and_roots(phi, psi)
    with pytest.raises(NonStationary):
        MarModel(tuple(phi), tuple(psi)).coefficients()


def test_nonfinite_coefficient_rejected():
    with pytest.raises(ValueError):
        validate_and_roots([float("nan")], [])


# --- coefficients: closed forms --------------------------------------------

def test_mar10_geometric():
    co = MarModel((0.5,), ()).coefficients(40)
    h = np.arange(-40, 41)
    expect = np.where(h >= 0, 0.5 ** np.maximum(h, 0), 0.0)
    assert np.max(np.abs(co.c_at(h) - expect)) < 1e-12


def test_mar11_values(mar11):
    co = mar11.coefficients()
    assert co.c_at(0) == pytest.approx(1 / 0.76, abs=1e-12)
    assert co.c_at(1) == pytest.approx(0.6 / 0.76, abs=1e-12)
    assert co.c_at(-1) == pytest.approx(0.4 / 0.76, abs=1e-12)


def test_mar02_values():
    co = MarModel((), (1.0, -0.24)).coefficients()
    assert co.c_at(-1) == pytest.approx(1.0, abs=1e-12)
    assert co.c_at(-2) == pytest.approx(0.76, abs=1e-12)


def _closed_forms():
    h = np.arange(-60, 61)
    hp, hn = np.maximum(h, 0), np.maximum(-h, 0)
    l1, l2, m1, m2 = 0.7, -0.3, 0.6, 0.4
    r, w = 0.8, 0.9
    cases = [
        (MarModel((l1,), ()), np.where(h >= 0, l1 ** hp, 0.0)),
        (MarModel((), (m1,)), np.where(h <= 0, m1 ** hn, 0.0)),
        (MarModel((l1,), (m2,)), np.where(h >= 0, l1 ** hp, m2 ** hn) / (1 - l1 * m2)),
        (MarModel((l1 + l2, -l1 * l2), ()), np.where(h >= 0, (l1 ** (hp + 1) - l2 ** (hp + 1)) / (l1 - l2), 0.0)),
        (MarModel((2 * r * math.cos(w), -r * r), ()), np.where(h >= 0, r ** hp * np.sin((hp + 1) * w) / math.sin(w), 0.0)),
        (MarModel((1.0, -0.25), ()), np.where(h >= 0, (hp + 1) * 0.5 ** hp, 0.0)),
        (MarModel((), (m1 + m2, -m1 * m2)), np.where(h <= 0, (m1 ** (hn + 1) - m2 ** (hn + 1)) / (m1 - m2), 0.0)),
    ]
    return h, cases


def test_closed_forms_match_recursion():
    h, cases = _closed_forms()
    for model, expect in cases:
        co = model.coefficients(60)
        assert np.max(np.abs(co.c_at(h) - expect)) < 1e-12, model


def test_window_too_small():
    with pytest.raises(WindowTooSmall):
        ma_coefficients(MarModel((0.5, 0.1), (0.3,)), 2)


def test_c_range_extends_beyond_window(mar11):
    small = mar11.coefficients()
    big = mar11.coefficients(3 * small.window_H)
    h = np.arange(-2 * small.window_H, 2 * small.window_H + 1)
    assert np.max(np.abs(small.c_range(h[0], h[-1]) - big.c_at(h))) < 1e-14


# --- properties ------------------------------------------------------------

@given(mar_models())
def test_recursions_hold(model):
    co = model.coefficients()
    H = co.window_H
    h = np.arange(1, H - model.p + 1)
    resid = co.c_at(h) - sum(phi * co.c_at(h - i) for i, phi in enumerate(model.phi, start=1))
    assert np.max(np.abs(resid), initial=0) < 1e-10
    h = np.arange(-H + model.q, 0)
    resid = co.c_at(h) - sum(psi * co.c_at(h + k) for k, psi in enumerate(model.psi, start=1))
    assert np.max(np.abs(resid), initial=0) < 1e-10


@given(mar_models())
def test_convolution_matches_ar_expansion(model):
    co = model.coefficients()
    # c = a * b with a causal and b anticausal
    h = co.h
    n = 3 * co.window_H
    a = ar_recursion(np.asarray(model.phi), n)
    b = ar_recursion(np.asarray(model.psi), n)
    conv = np.array([sum(a[k] * b[k - hh] for k in range(max(hh, 0), min(n, n + hh))) for hh in h])
    assert np.max(np.abs(conv - co.c)) < 1e-10


@given(mar_models(positive=True))
def test_positive_roots_give_nonnegative_coefficients(model):
    assert model.is_positive()
    co = model.coefficients()
    assert np.all(co.c >= -1e-15)
    # (1 - l1 L)(1 - l2 L) = 1 - (l1 + l2) L + l1 l2 L^2: signs alternate
    for poly in (model.phi, model.psi):
        signs = np.sign(poly)
        assert np.all(signs[::2] >= 0) and np.all(signs[1::2] <= 0)


@given(mar_models())
def test_truncation_bound_small(model):
    co = model.coefficients()
    H, rho = co.window_H, model.spectral_radius
    assert rho ** H < 1e-12
    # repeated roots add a polynomial factor in h to the geometric decay
    assert 0 <= co.truncation_bound < 1e-12 * (2 * H) ** 2 / (1 - rho) ** 2


# --- split polynomials and pure components --------------------------------

def test_split_mar11(mar11):
    sp = split_polynomials(mar11)
    assert sp.b1[0] == pytest.approx(0.6 / 0.76, abs=1e-12)
    assert sp.b2[0] == pytest.approx(1 / 0.76, abs=1e-12)


def test_split_zero_phi():
    sp = split_polynomials(MarModel((0.0,), (0.4,)))
    assert sp.b1[0] == pytest.approx(0.0, abs=1e-15)
    assert sp.b2[0] == pytest.approx(1.0, abs=1e-15)


def test_split_mar21_degrees_and_identity():
    model = MarModel((0.9, -0.2), (0.5,))
    sp = split_polynomials(model)
    # b1 multiplies L^q Psi(L^-1) (degree q) and b2 multiplies Phi (degree p),
    # so deg b1 = p - 1 = 1 and deg b2 = q - 1 = 0
    assert len(sp.b1) == 2 and len(sp.b2) == 1
    psi_tilde = np.array([-0.5, 1.0])
    phi_poly = np.array([1.0, -0.9, 0.2])
    total = np.zeros(3)
    total[:3] += np.convolve(sp.b1, psi_tilde)
    total[:1] += np.convolve(sp.b2, phi_poly)[:1]
    total[1:] += np.convolve(sp.b2, phi_poly)[1:]
    assert np.max(np.abs(total - [1.0, 0.0, 0.0])) < 1e-10


@given(mar_models(min_p=1, min_q=1))
def test_split_identity(model):
    sp = split_polynomials(model)
    q = model.q
    psi_tilde = np.concatenate([-np.asarray(model.psi)[::-1], [1.0]])
    phi_poly = np.concatenate([[1.0], -np.asarray(model.phi)])
    n = model.p + q
    total = np.zeros(n)
    a = np.convolve(sp.b1, psi_tilde)
    b = np.convolve(sp.b2, phi_poly)
    total[: a.size] += a
    total[: b.size] += b
    assert np.max(np.abs(total - np.eye(n)[0])) < 1e-10


@pytest.mark.parametrize("phi,psi", [((0.5,), ()), ((), (0.5,))])
def test_split_degenerate(phi, psi):
    with pytest.raises(DegenerateDecomposition):
        split_polynomials(MarModel(phi, psi))


def test_pure_components_arithmetic(mar11):
    u, v = pure_components([1.0, 2.0, 3.0], mar11)
    assert np.isnan(u[0]) and u[1] == pytest.approx(1.4) and u[2] == pytest.approx(1.8)
    assert v[0] == pytest.approx(1 - 0.8) and np.isnan(v[2])


def test_pure_components_white_noise():
    y = np.array([1.0, -2.0, 0.5])
    u, v = pure_components(y, MarModel((), ()))
    assert np.array_equal(u, y) and np.array_equal(v, y)


def test_pure_components_too_short(mar11):
    with pytest.raises(SeriesTooShort):
        pure_components([1.0, 2.0], mar11)


def test_pure_components_recover_innovations(mar11):
    traj = simulate_trajectory(mar11, 3000, seed=3)
    u, _ = pure_components(traj.values, mar11)
    eps = u[1:-1] - 0.4 * u[2:]
    scale = np.max(np.abs(traj.values))
    assert np.nanmax(np.abs(eps - traj.innovations[1:-1])) < 1e-9 * scale


def test_decomposition_identity_on_path():
    model = MarModel((0.9, -0.2), (0.5,))
    traj = simulate_trajectory(model, 2000, seed=11)
    y = traj.values
    u, v = pure_components(y, model)
    sp = split_polynomials(model)
    q = model.q
    rebuilt = np.full(y.size, np.nan)
    t = np.arange(10, y.size - 10)
    rebuilt[t] = sum(b * v[t - q - k] for k, b in enumerate(sp.b1)) + sum(b * u[t - k] for k, b in enumerate(sp.b2))
    assert np.nanmax(np.abs(rebuilt - y)) < 1e-8 * max(1.0, np.max(np.abs(y)))


def test_lag_and_lead_filters():
    x = np.arange(1.0, 6.0)
    lag = apply_lag_polynomial(x, [0.5])
    lead = apply_lead_polynomial(x, [0.5])
    assert lag[2] == pytest.approx(3 - 1.0) and np.isnan(lag[0])
    assert lead[2] == pytest.approx(3 - 2.0) and np.isnan(lead[-1])


# --- innovation spec and serialization -----------------------------------

def test_innovation_family_forcing():
    assert InnovationSpec("cauchy", alpha=1.7).alpha == 1.0
    assert InnovationSpec("half_cauchy").skewness_pi == 1.0
    assert InnovationSpec("pareto", alpha=1.5).skewness_pi == 1.0
    with pytest.raises(InvalidInnovation):
        InnovationSpec("gaussian")


def test_model_json_round_trip(tmp_path):
    model = MarModel((0.6, -0.05), (0.4,), InnovationSpec("pareto", alpha=1.5, pareto_minimum=2.0))
    path = tmp_path / "m.json"
    path.write_text(json.dumps(model.to_dict()))
    again = MarModel.from_json(path)
    assert again.to_dict() == model.to_dict()
