"""Tail-process laws driven by the stochastic drift ``N``.

Given an extreme value at date t, the path ``(y_{t+h}/|y_t|)_h`` converges
to ``X_h = X_0 c_{N+h} / c_N`` where ``P[N = j]`` is proportional to
``|c_j|^alpha``.  Everything in this module is an exact computation on a
finite support of ``N``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .discrete import DiscretePrediction
from .errors import (
    AllZeroCoefficients,
    DegenerateVariance,
    EmptyConditioningSet,
    NoMaximum,
    OneSidedDegenerate,
    UnsupportedOrder,
    WindowTooSmall,
    ZeroPivot,
)
from .model import MaCoefficients, MarModel, ar_recursion, ma_coefficients

COVERAGE_TARGET = 1e-10


def tail_coefficients(model: MarModel, alpha: Optional[float] = None, tol: float = 1e-15) -> MaCoefficients:
    """Coefficients on a window wide enough that ``rho^(alpha H) < tol``.

    The neglected drift mass is then of order ``tol``, well below the
    1e-12 accuracy expected of the exact laws.
    """
    alpha = model.alpha if alpha is None else alpha
    rho = model.spectral_radius
    H = max(model.p + model.q, 1)
    if rho > 0:
        H = max(H, int(math.ceil(math.log(tol) / (alpha * math.log(rho)))) + 1)
    return ma_coefficients(model, H)


@dataclass(frozen=True)
class DriftDistribution:
    """Probability mass function of the drift on ``j_min .. j_min + len(pmf) - 1``.

    ``coverage`` estimates the share of ``sum_j |c_j|^alpha`` captured by the
    truncated support before renormalization.
    """

    j_min: int
    pmf: np.ndarray
    alpha: float
    coverage: float = 1.0

    @property
    def j(self) -> np.ndarray:
        return np.arange(self.j_min, self.j_min + self.pmf.size)

    @property
    def j_max(self) -> int:
        return self.j_min + self.pmf.size - 1

    @property
    def support(self) -> np.ndarray:
        return self.j[self.pmf > 0]

    def prob(self, j: int) -> float:
        k = j - self.j_min
        return float(self.pmf[k]) if 0 <= k < self.pmf.size else 0.0

    def cdf(self, x: float) -> float:
        """``P[N <= x]``."""
        return float(self.pmf[self.j <= x].sum())

    def mean(self) -> float:
        return float(self.j @ self.pmf)

    def mode(self) -> int:
        return int(self.j[np.argmax(self.pmf)])

    def as_prediction(self) -> DiscretePrediction:
        """The law of ``N`` as a discrete law over integer atoms."""
        keep = self.pmf > 0
        return DiscretePrediction(self.j[keep].astype(float), self.pmf[keep], True, "drift_based")

    def to_dict(self) -> dict:
        return {"j_min": int(self.j_min), "pmf": self.pmf.tolist()}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, data: dict, alpha: float = float("nan")) -> "DriftDistribution":
        return cls(int(data["j_min"]), np.asarray(data["pmf"], dtype=float), data.get("alpha", alpha))


def _trimmed(j_min: int, weights: np.ndarray, alpha: float, coverage: float) -> DriftDistribution:
    nz = np.flatnonzero(weights > 0)
    if nz.size == 0:
        raise AllZeroCoefficients("no nonzero coefficient in the window")
    lo, hi = nz[0], nz[-1]
    w = weights[lo : hi + 1]
    return DriftDistribution(j_min + int(lo), w / w.sum(), alpha, coverage)


def drift_distribution(coeffs: MaCoefficients, alpha: float) -> DriftDistribution:
    """Law of the drift ``N``: ``p_j`` proportional to ``|c_j|^alpha``.

    Parameters
    ----------
    coeffs : MaCoefficients
        Coefficient window; the support of ``N`` is the window minus the
        indices where ``c_j = 0``.
    alpha : float
        Tail index.

    Returns
    -------
    DriftDistribution
    """
    mass = np.abs(coeffs.c) ** alpha
    total = mass.sum()
    if not total > 0:
        raise AllZeroCoefficients("no nonzero coefficient in the window")
    # geometric tail beyond the window, for the coverage report
    r = coeffs.spectral_radius ** alpha
    edge = mass[0] + mass[-1]
    beyond = edge * r / (1.0 - r) if r < 1 else np.inf
    coverage = float(total / (total + beyond))
    return _trimmed(-coeffs.window_H, mass, alpha, coverage)


@dataclass(frozen=True)
class TailTrajectory:
    """Tail path for a fixed drift value: ``X_h = sign * c_{j+h} / c_j``."""

    drift_j: int
    sign_x0: int
    H: int
    values: np.ndarray
    pivot: float

    @property
    def h(self) -> np.ndarray:
        return np.arange(-self.H, self.H + 1)

    def at(self, h: int) -> float:
        return float(self.values[h + self.H])


def tail_trajectory(coeffs: MaCoefficients, j: int, sign: int = 1, H: Optional[int] = None) -> TailTrajectory:
    """Deterministic tail path given ``N = j`` and ``X_0 = sign``.

    Coefficients outside the stored window are extended by the exact
    recursions, so zeros only appear where ``c`` itself vanishes.
    """
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    H = coeffs.window_H if H is None else int(H)
    pivot = float(coeffs.c_range(j, j)[0])
    if pivot == 0.0:
        raise ZeroPivot(f"c_{j} = 0, the drift cannot take this value", j=j)
    values = sign * coeffs.c_range(j - H, j + H) / pivot
    return TailTrajectory(int(j), int(sign), H, values, pivot)


def forward_law(
    coeffs: MaCoefficients,
    alpha: float,
    horizons: Sequence[int],
    *,
    ratios: bool = False,
    drift: Optional[DriftDistribution] = None,
) -> DiscretePrediction:
    """Joint law of ``(X_h)_{h in horizons}`` or of ``Z_h = X_h / X_{h-1}``.

    Atoms are ``c_{j+h}/c_j`` (or ``c_{j+h}/c_{j+h-1}``) for each drift value
    ``j``, weighted by ``p_j``; equal atom vectors are merged.  A ratio with a
    zero denominator is NaN (the path has already collapsed to zero).
    """
    drift = drift_distribution(coeffs, alpha) if drift is None else drift
    horizons = [int(h) for h in horizons]
    js = drift.support
    weights = drift.pmf[js - drift.j_min]
    lo = int(js.min()) + min(min(horizons) - 1, 0)
    hi = int(js.max()) + max(max(horizons), 0)
    cext = coeffs.c_range(lo, hi)

    def c(k):
        return cext[k - lo]

    atoms = np.empty((js.size, len(horizons)))
    with np.errstate(divide="ignore", invalid="ignore"):
        for col, h in enumerate(horizons):
            num = c(js + h)
            den = c(js + h - 1) if ratios else c(js)
            atoms[:, col] = np.where(den != 0, num / np.where(den != 0, den, 1.0), np.nan)
    return DiscretePrediction(atoms, weights, False, "drift_based", tuple(horizons)).merge()


def _causal_filter_values(lead: np.ndarray, k: np.ndarray) -> np.ndarray:
    # a~_k = a_k for k >= 0, zero for k < 0
    out = np.zeros(k.shape)
    ok = (k >= 0) & (k < lead.size)
    out[ok] = lead[k[ok]]
    return out


def pure_tail_components(trajectory: TailTrajectory, model: MarModel):
    """Pure noncausal and causal parts of a tail path.

    ``U_h = Phi(L) X_h`` and ``V_h = Psi(L^-1) X_h``.  Filtering ``c`` by
    ``Phi`` leaves the noncausal coefficients ``b_{-k}`` (``k <= 0``) and
    zeros for ``k >= 1``; filtering by ``Psi`` leaves ``a_k`` (``k >= 0``)
    and zeros for ``k < 0``.  Evaluating these identities gives exact zeros
    on ``h >= 1 - j`` for ``U`` and ``h <= -1 - j`` for ``V``.

    Returns
    -------
    h, U, V : ndarray
        Maturities ``-H..H`` and the two component paths.
    """
    if trajectory.H < max(model.p, model.q, 1):
        raise WindowTooSmall(f"trajectory window {trajectory.H} is narrower than the filters")
    h = trajectory.h
    k = trajectory.drift_j + h
    n = int(np.abs(k).max()) + 1
    a = ar_recursion(np.asarray(model.phi), n)
    b = ar_recursion(np.asarray(model.psi), n)
    scale = trajectory.sign_x0 / trajectory.pivot
    U = scale * _causal_filter_values(b, -k)
    V = scale * _causal_filter_values(a, k)
    return h, U, V


def filtered_tail_components(trajectory: TailTrajectory, phi, psi):
    """Apply ``Phi(L)`` and ``Psi(L^-1)`` to a tail path by direct filtering.

    Entries whose filter leaves the stored window are NaN.  Used for
    misspecified polynomials and to cross-check :func:`pure_tail_components`.
    """
    X = trajectory.values
    U = X.copy()
    for i, coef in enumerate(phi, start=1):
        U[i:] -= coef * X[:-i]
    U[: len(phi)] = np.nan
    V = X.copy()
    for k, coef in enumerate(psi, start=1):
        V[:-k] -= coef * X[k:]
    if len(psi):
        V[-len(psi) :] = np.nan
    return trajectory.h, U, V


def one_sided_mass(coeffs: MaCoefficients, alpha: float) -> float:
    """Share of ``sum |c_h|^alpha`` carried by past-indexed coefficients ``h >= 1``."""
    mass = np.abs(coeffs.c) ** alpha
    total = mass.sum()
    if not total > 0:
        raise AllZeroCoefficients("no nonzero coefficient in the window")
    return float(mass[coeffs.window_H + 1 :].sum() / total)


def one_sided_laws(coeffs: MaCoefficients, alpha: float):
    """Bernoulli mixing weight and the drift laws of both one-sided processes.

    The causal part ``sum_{h >= 1} c_h eps_{t-h}`` has drift ``N*_1 >= 1`` and
    the noncausal part ``sum_{h <= 0}`` has drift ``N*_2 <= 0``; the drift of
    the full process is their ``eta``-mixture.

    Returns
    -------
    eta : float
    law1, law2 : DriftDistribution
    """
    H = coeffs.window_H
    mass = np.abs(coeffs.c) ** alpha
    past, rest = mass[H + 1 :], mass[: H + 1]
    if not (past.sum() > 0 and rest.sum() > 0):
        raise OneSidedDegenerate("one side of the coefficient sequence carries no mass")
    full = drift_distribution(coeffs, alpha)
    eta = float(past.sum() / mass.sum())
    law1 = _trimmed(1, past, alpha, full.coverage)
    law2 = _trimmed(-H, rest, alpha, full.coverage)
    return eta, law1, law2


def mixture_drift(eta: float, law1: DriftDistribution, law2: DriftDistribution) -> DriftDistribution:
    """Rebuild the drift law from the one-sided pieces."""
    lo = min(law1.j_min, law2.j_min)
    hi = max(law1.j_max, law2.j_max)
    pmf = np.zeros(hi - lo + 1)
    pmf[law1.j - lo] += eta * law1.pmf
    pmf[law2.j - lo] += (1.0 - eta) * law2.pmf
    return DriftDistribution(lo, pmf, law1.alpha, min(law1.coverage, law2.coverage))


@dataclass(frozen=True)
class TurningPointLaw:
    """Law of the peak date ``h_N = h0 - N`` of the tail path."""

    h0: int
    maximizers: tuple
    h_min: int
    pmf: np.ndarray

    @property
    def h(self) -> np.ndarray:
        return np.arange(self.h_min, self.h_min + self.pmf.size)

    @property
    def mode(self) -> int:
        return int(self.h[np.argmax(self.pmf)])

    @property
    def mean(self) -> float:
        return float(self.h @ self.pmf)

    def interval(self, level: float = 0.9):
        """Central interval ``[lo, hi]`` with at least ``level`` mass."""
        cdf = np.cumsum(self.pmf)
        tail = (1.0 - level) / 2.0
        lo = self.h[np.searchsorted(cdf, tail, side="right")]
        hi = self.h[min(np.searchsorted(cdf, 1.0 - tail - 1e-15, side="left"), self.pmf.size - 1)]
        return int(lo), int(hi)


def turning_point(coeffs: MaCoefficients, alpha: float, tol: float = 1e-12) -> TurningPointLaw:
    """Turning-point law for a nonnegative coefficient sequence.

    ``h0`` is the maximizer of ``c_h``; ties (within ``tol`` relative) are all
    reported and the one closest to zero is used.
    """
    c = coeffs.c
    if np.any(c < -tol * np.abs(c).max()):
        raise NoMaximum("turning point needs a nonnegative coefficient sequence")
    top = c.max()
    idx = np.flatnonzero(c >= top * (1.0 - tol))
    hs = idx - coeffs.window_H
    if np.any(np.abs(hs) == coeffs.window_H):
        raise NoMaximum("coefficient maximum sits on the window edge; widen H")
    h0 = int(hs[np.argmin(np.abs(hs))])
    drift = drift_distribution(coeffs, alpha)
    # h_N = h0 - N runs backwards over the drift support
    pmf = drift.pmf[::-1].copy()
    return TurningPointLaw(h0, tuple(int(x) for x in hs), h0 - drift.j_max, pmf)


def _mar11_roots(model: MarModel):
    if model.p != 1 or model.q != 1:
        raise UnsupportedOrder(f"expected a MAR(1,1), got MAR({model.p},{model.q})")
    return model.phi[0], model.psi[0]


def serial_correlation_mar11(model: MarModel, alpha: float, h: int, k: int, coeffs: Optional[MaCoefficients] = None) -> float:
    """Correlation of the ratio indicators ``1{Z_h = 1/psi}`` and ``1{Z_k = 1/psi}``.

    In a MAR(1,1) with positive roots, ``Z_h = 1/psi`` exactly when
    ``N <= -h``, so the correlation is a function of the drift cdf.
    """
    _mar11_roots(model)
    if h == k:
        return 1.0
    coeffs = tail_coefficients(model, alpha) if coeffs is None else coeffs
    drift = drift_distribution(coeffs, alpha)
    fh, fk = drift.cdf(-h), drift.cdf(-k)
    fmin = drift.cdf(min(-h, -k))
    var = fh * (1.0 - fh) * fk * (1.0 - fk)
    if not var > 0:
        raise DegenerateVariance(f"F_N(-{h}) or F_N(-{k}) is 0 or 1 on the support")
    return float((fmin - fh * fk) / math.sqrt(var))


@dataclass(frozen=True)
class FirstExceedance:
    """Reweighted drift law for a first threshold crossing.

    Attributes
    ----------
    law : DriftDistribution
        ``q_j`` proportional to ``p_j |c_j|^alpha``.
    theta : float
        Normalizer in ``theta * E_q[A] = E_p[A(X) / ||X||_alpha^alpha]``,
        equal to ``sum |c|^(2 alpha) / (sum |c|^alpha)^2``.
    theta_anticlustering : float
        ``P[sup_{h <= -1} |X_h| <= 1]`` on the drift support.
    """

    law: DriftDistribution
    theta: float
    theta_anticlustering: float


def first_exceedance_law(coeffs: MaCoefficients, alpha: float) -> FirstExceedance:
    """Drift law of the first-exceedance tail process and its normalizers."""
    p = drift_distribution(coeffs, alpha)
    js = p.j
    c = coeffs.c_range(p.j_min, p.j_max)
    w = p.pmf * np.abs(c) ** alpha
    norm = float((np.abs(coeffs.c) ** alpha).sum())
    q = _trimmed(p.j_min, w, alpha, p.coverage)
    theta = float(w.sum() / norm)
    # sup over h <= -1 of |c_{j+h}| is a running max of |c| up to j - 1
    cfull = np.abs(coeffs.c_range(-coeffs.window_H, p.j_max))
    run = np.maximum.accumulate(cfull)
    prev = np.concatenate([[0.0], run[:-1]])[js + coeffs.window_H]
    ok = prev <= np.abs(c) * (1.0 + 1e-12)
    anti = float(p.pmf[ok].sum())
    return FirstExceedance(q, theta, anti)


def online_update(coeffs: MaCoefficients, alpha: float, increasing_steps: int = 1) -> DriftDistribution:
    """Drift law after observing ``k`` further increases ``y_{T+1} > ... > y_T``.

    Conditions on ``c_{j+i} > c_{j+i-1}`` for ``i = 1..k``.
    """
    k = int(increasing_steps)
    if k < 1:
        raise ValueError("increasing_steps must be at least 1")
    p = drift_distribution(coeffs, alpha)
    c = coeffs.c_range(p.j_min, p.j_max + k)
    keep = np.ones(p.pmf.size, dtype=bool)
    for i in range(1, k + 1):
        keep &= c[i : i + p.pmf.size] > c[i - 1 : i - 1 + p.pmf.size]
    w = np.where(keep, p.pmf, 0.0)
    if not w.sum() > 0:
        raise EmptyConditioningSet("no drift value is compatible with the observed increases")
    return _trimmed(p.j_min, w, alpha, p.coverage)


def myopic_laws(coeffs: MaCoefficients, alpha: float, steps: int, *, tilt: bool = True):
    """Compare the two myopic predictions of ``(y_{T+1+h}/y_{T+1})_{h=1..steps}``.

    The first law rescales the date-T tail path by ``X_1``; the second uses
    the date-(T+1) tail path directly.  With ``tilt=True`` the date-T law is
    reweighted by ``|X_1|^alpha``, the change of measure that turns an
    extreme at T into an extreme at T+1.  The two laws then coincide
    whenever no tail path starts from zero (``X_{-1} != 0``), which holds
    when ``q >= 1``; for a pure causal model the fresh law also carries
    paths whose big shock lands at T+1.

    Returns
    -------
    shifted, fresh : DiscretePrediction
    """
    p = drift_distribution(coeffs, alpha)
    js = p.support
    c = coeffs.c_range(int(js.min()) - 1, int(js.max()) + steps + 1)
    lo = int(js.min()) - 1

    def cc(k):
        return c[k - lo]

    horizons = np.arange(1, steps + 1)
    w = p.pmf[js - p.j_min]
    x1 = cc(js + 1) / cc(js)
    if tilt:
        w = w * np.abs(x1) ** alpha
    live = x1 != 0
    w = w[live]
    shifted_atoms = np.array([cc(j + 1 + horizons) / cc(j + 1) for j in js[live]])
    shifted = DiscretePrediction(shifted_atoms, w / w.sum(), False, "drift_based", tuple(horizons)).merge()
    fresh = forward_law(coeffs, alpha, list(horizons), drift=p)
    return shifted, fresh
