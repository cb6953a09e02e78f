"""Limiting predictive laws during an extreme episode.

Conditioning on a large current value and, optionally, on observed growth
ratios ``r_t = y_t / y_{t-1}``.  Most laws are discrete; for the Cauchy
MAR(1,1) the exact finite-level density of the next ratio is also given.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy import integrate, optimize

from .discrete import DiscretePrediction, from_pairs
from .errors import NonCauchyInnovation, UnsupportedOrder, ZeroRatio
from .model import MarModel, ar_recursion
from .tail import forward_law, myopic_laws, online_update, tail_coefficients

__all__ = [
    "ConditioningSet",
    "predict_level",
    "mar11_level_weights",
    "restrict_to_past_ratio",
    "predict_level_and_ratio_mar11",
    "predict_marp1",
    "cauchy_mar11_predictive_density",
    "predictive_density_mass",
    "predictive_density_modes",
    "dbj_mar02_atoms",
    "online_update",
    "myopic_laws",
]

KINDS = ("abs_exceedance", "level_equal", "level_and_ratios", "online_increasing", "first_exceedance")

SBJ_RTOL = 1e-6


@dataclass(frozen=True)
class ConditioningSet:
    """Description of the extreme event a prediction conditions on."""

    kind: str = "level_equal"
    level: float = math.inf
    ratios: tuple = ()
    increasing_steps: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown conditioning kind {self.kind!r}")
        object.__setattr__(self, "ratios", tuple(float(r) for r in self.ratios))

    def check_memory(self, model: MarModel) -> None:
        """Ratio conditioning needs ``p + q - 1`` observed ratios."""
        if self.kind == "level_and_ratios" and len(self.ratios) != model.p + model.q - 1:
            raise ValueError(f"expected {model.p + model.q - 1} ratios, got {len(self.ratios)}")


def predict_level(model: MarModel, horizons: Sequence[int] = (1,), alpha: Optional[float] = None, coeffs=None) -> DiscretePrediction:
    """Limit law of ``(y_{t+h} / y_t)_h`` given ``y_t = y``, ``y`` large."""
    alpha = model.alpha if alpha is None else alpha
    coeffs = tail_coefficients(model, alpha) if coeffs is None else coeffs
    return forward_law(coeffs, alpha, list(horizons))


def _mar11(model: MarModel):
    if model.p != 1 or model.q != 1:
        raise UnsupportedOrder(f"expected a MAR(1,1), got MAR({model.p},{model.q})")
    return model.phi[0], model.psi[0]


def mar11_level_weights(phi: float, psi: float, alpha: float) -> DiscretePrediction:
    """Closed-form one-step law for a MAR(1,1) with nonnegative coefficients.

    Mass ``(1 - psi^a) / (1 - phi^a psi^a)`` at ``phi`` and the complement
    at ``1 / psi``.
    """
    pa, sa = abs(phi) ** alpha, abs(psi) ** alpha
    w_phi = (1.0 - sa) / (1.0 - pa * sa)
    w_psi = (sa - pa * sa) / (1.0 - pa * sa)
    return DiscretePrediction(np.array([phi, 1.0 / psi]), np.array([w_phi, w_psi]), True, "closed_form")


def restrict_to_past_ratio(joint: DiscretePrediction, r: float, rtol: float = 1e-9) -> DiscretePrediction:
    """Condition a joint law of ``(X_{-1}, X_h...)`` on ``X_{-1} = 1 / r``.

    Returns the law of the remaining coordinates, renormalized.
    """
    if r == 0:
        raise ZeroRatio("observed ratio is zero")
    target = 1.0 / r
    hit = np.isclose(joint.atoms[:, 0], target, rtol=rtol, atol=1e-12)
    if not hit.any():
        raise ValueError(f"no atom has X_-1 = {target}")
    w = joint.weights[hit]
    return DiscretePrediction(joint.atoms[hit, 1:], w / w.sum(), False, joint.provenance).merge()


def predict_level_and_ratio_mar11(model: MarModel, r: float, alpha: Optional[float] = None) -> DiscretePrediction:
    """Next-ratio law given ``y_t`` large and the last ratio ``r = y_t / y_{t-1}``.

    Two masses: ``phi`` with weight ``1 - psi^a`` (the big innovation is in
    the past) and ``phi + (1 - phi / r) / psi`` with weight ``psi^a``.
    """
    phi, psi = _mar11(model)
    return predict_marp1(MarModel((phi,), (psi,), model.innovation), [r], alpha)


def predict_marp1(model: MarModel, ratios: Sequence[float], alpha: Optional[float] = None) -> DiscretePrediction:
    """Next-ratio law for a MAR(p, 1) given ``y_t`` large and ``r_t .. r_{t-p+1}``.

    Atom A solves ``Phi(L) y_{t+1} = 0``; atom B solves
    ``Phi(L) y_{t+1} = Phi(L) y_t / psi``.  Weights ``1 - psi^a`` and ``psi^a``.
    """
    if model.q != 1:
        raise UnsupportedOrder(f"expected q = 1, got q = {model.q}")
    p = model.p
    ratios = [float(r) for r in ratios]
    if len(ratios) != p:
        raise ValueError(f"expected {p} ratios, got {len(ratios)}")
    if any(r == 0 for r in ratios):
        raise ZeroRatio("observed ratios must be nonzero")
    alpha = model.alpha if alpha is None else alpha
    psi = model.psi[0]
    phi = model.phi
    # y_{t-i} / y_t = 1 / (r_t ... r_{t-i+1})
    back = np.cumprod([1.0 / r for r in ratios])
    # Phi(L) y_{t+1} / y_t = r_{t+1} - phi_1 - sum_{i>=2} phi_i y_{t+1-i}/y_t
    atom_a = phi[0] + sum(phi[i] * back[i - 1] for i in range(1, p)) if p else 0.0
    # Phi(L) y_t / y_t = 1 - sum_i phi_i y_{t-i}/y_t
    u_ratio = 1.0 - sum(phi[i] * back[i] for i in range(p))
    atom_b = atom_a + u_ratio / psi
    sa = abs(psi) ** alpha
    return from_pairs([(atom_a, 1.0 - sa), (atom_b, sa)])


def _cauchy_params(model: MarModel):
    if model.innovation.family != "cauchy":
        raise NonCauchyInnovation(f"innovations are {model.innovation.family}, not cauchy")
    phi, psi = _mar11(model)
    return phi, psi, model.innovation.scale


def _cauchy_pdf(x, scale):
    return scale / (math.pi * (scale * scale + x * x))


def cauchy_mar11_predictive_density(y: float, r: float, grid, model: MarModel) -> np.ndarray:
    """Density of ``r_{t+1} = y_{t+1} / y_t`` given ``y_t = y`` and ``r_t = r``.

    With ``u_t = y_t - phi y_{t-1}`` and ``eps_t = u_t - psi u_{t+1}``::

        l(y_{t+1}) = f_u(u_{t+1}) f_eps(u_t - psi u_{t+1}) / f_u(u_t)

    where ``f_u`` is Cauchy with scale ``gamma / (1 - |psi|)``.  The ratio
    density carries the Jacobian ``|y|``.
    """
    phi, psi, gamma = _cauchy_params(model)
    if r == 0:
        raise ZeroRatio("observed ratio is zero")
    grid = np.asarray(grid, dtype=float)
    su = gamma / (1.0 - abs(psi))
    u_now = y * (1.0 - phi / r)
    u_next = y * (grid - phi)
    return abs(y) * _cauchy_pdf(u_next, su) * _cauchy_pdf(u_now - psi * u_next, gamma) / _cauchy_pdf(u_now, su)


def predictive_density_mass(y: float, r: float, model: MarModel) -> float:
    """Total mass of the predictive density by adaptive quadrature."""
    law = predict_level_and_ratio_mar11(model, r)
    peaks = sorted(set(float(a) for a in law.scalar_atoms))

    def f(x):
        return float(cauchy_mar11_predictive_density(y, r, [x], model)[0])

    lo, hi = peaks[0] - 1.0, peaks[-1] + 1.0
    inner = sorted(set([lo] + peaks + [hi]))
    total = 0.0
    opts = dict(limit=500, epsabs=1e-13, epsrel=1e-12)
    for a, b in zip(inner[:-1], inner[1:]):
        total += integrate.quad(f, a, b, **opts)[0]
    total += integrate.quad(f, -np.inf, lo, **opts)[0]
    total += integrate.quad(f, hi, np.inf, **opts)[0]
    return total


def predictive_density_modes(y: float, r: float, model: MarModel, lo: float = -2.0, hi: float = 6.0) -> np.ndarray:
    """Local maxima of the predictive density, sorted.

    A grid finer than the peak width ``~ 1 / |y|`` locates candidates, which
    are then polished by bounded scalar minimization.
    """
    _cauchy_params(model)
    step = min(1e-3, 0.05 / max(abs(y), 1.0))
    grid = np.arange(lo, hi + step, step)
    dens = cauchy_mar11_predictive_density(y, r, grid, model)
    inner = (dens[1:-1] > dens[:-2]) & (dens[1:-1] >= dens[2:])
    modes = []
    for i in np.flatnonzero(inner) + 1:
        res = optimize.minimize_scalar(
            lambda x: -float(cauchy_mar11_predictive_density(y, r, [x], model)[0]),
            bounds=(grid[i - 1], grid[i + 1]),
            method="bounded",
            options={"xatol": 1e-12},
        )
        modes.append(float(res.x))
    return np.array(modes)


def dbj_mar02_atoms(model: MarModel, r: float, J: int = 50, rtol: float = SBJ_RTOL) -> DiscretePrediction:
    """Atoms of the next-ratio law for a MAR(0, 2) given ``y_t`` large and ``r_t``.

    Atom A ``= (1/r - psi_1) / psi_2`` comes from two big future innovations;
    atoms ``B_j = (1/r - b_1) b_{j-1} / (b_{j+1} - b_1 b_j)`` from a big
    current innovation paired with one ``j`` steps ahead.  No weights are
    available, so they are NaN.  When ``r`` sits at a single-jump value
    (``1/r = b_1`` or ``1/r = b_{h+1}/b_h``) the law is a point mass and is
    returned as such.
    """
    if model.p != 0 or model.q != 2:
        raise UnsupportedOrder(f"expected a MAR(0,2), got MAR({model.p},{model.q})")
    if r == 0:
        raise ZeroRatio("observed ratio is zero")
    psi1, psi2 = model.psi
    b = ar_recursion(np.asarray(model.psi), J + 2)
    inv = 1.0 / r
    atom_a = (inv - psi1) / psi2
    if math.isclose(inv, b[1], rel_tol=rtol):
        return DiscretePrediction(np.array([0.0]), np.array([1.0]), True, "closed_form")
    for h in range(1, J + 1):
        if b[h] != 0 and math.isclose(inv, b[h + 1] / b[h], rel_tol=rtol):
            return DiscretePrediction(np.array([b[h - 1] / b[h]]), np.array([1.0]), True, "closed_form")
    js = np.arange(1, J + 1)
    with np.errstate(divide="ignore", invalid="ignore"):
        atoms_b = (inv - b[1]) * b[js - 1] / (b[js + 1] - b[1] * b[js])
    atoms = np.concatenate([[atom_a], atoms_b])
    return DiscretePrediction(atoms, np.full(atoms.size, np.nan), False, "dbj_atoms_only", ("A",) + tuple(f"B{j}" for j in js))
