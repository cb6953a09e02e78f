"""Cauchy MAR(1,1) likelihood and fitting.

The process is Markov of order two: with ``u_t = y_t - phi y_{t-1}``,

    l(y_{t+1} | y_t, y_{t-1}) = f_u(u_{t+1}) f_eps(u_t - psi u_{t+1}) / f_u(u_t),

``f_eps`` Cauchy with scale ``gamma`` and ``f_u`` Cauchy with scale
``gamma / (1 - |psi|)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from .errors import BoundaryEstimate, NonFinite, NotConverged, SeriesTooShort, SingularInformation

GRID_STEP = 0.05
GRID_EDGE = 0.95
BOUNDARY = 0.99
HESSIAN_STEP = 1e-4
LOG_PI = math.log(math.pi)


def _log_cauchy(x, scale):
    return math.log(scale) - LOG_PI - np.log(scale * scale + x * x)


def mar11_log_transition_density(y_next, y, y_prev, phi: float, psi: float, scale: float = 1.0):
    """Log of :func:`mar11_transition_density`; vectorized over the data."""
    y_next, y, y_prev = (np.asarray(a, dtype=float) for a in (y_next, y, y_prev))
    su = scale / (1.0 - abs(psi))
    u_next = y_next - phi * y
    u_now = y - phi * y_prev
    return _log_cauchy(u_next, su) + _log_cauchy(u_now - psi * u_next, scale) - _log_cauchy(u_now, su)


def mar11_transition_density(y_next, y, y_prev, phi: float, psi: float, scale: float = 1.0):
    """Density of ``y_{t+1}`` given ``y_t = y`` and ``y_{t-1} = y_prev``."""
    return np.exp(mar11_log_transition_density(y_next, y, y_prev, phi, psi, scale))


def mar11_cauchy_loglik(series, phi: float, psi: float, scale: float = 1.0) -> float:
    """Conditional log-likelihood ``sum_{t=2}^{T-1} log l(y_{t+1} | y_t, y_{t-1})``.

    The first two observations only condition.  Rescaling the data and
    ``scale`` by ``k`` shifts the value by ``-(T - 2) log k``.
    """
    y = np.asarray(series, dtype=float)
    if y.size < 10:
        raise SeriesTooShort(f"need at least 10 observations, got {y.size}")
    with np.errstate(invalid="ignore", over="ignore"):
        val = float(np.sum(mar11_log_transition_density(y[2:], y[1:-1], y[:-2], phi, psi, scale)))
    if not math.isfinite(val):
        raise NonFinite("log-likelihood is not finite")
    return val


def _robust_scale(y: np.ndarray, phi: float, psi: float) -> float:
    # median |eps| of a Cauchy(0, gamma) is gamma
    u = y[1:] - phi * y[:-1]
    eps = u[:-1] - psi * u[1:]
    s = float(np.median(np.abs(eps)))
    return s if s > 0 else 1.0


@dataclass(frozen=True)
class FitResult:
    """Fitted Cauchy MAR(1,1).

    ``covariance`` is the per-observation asymptotic covariance of
    ``(phi, psi)``: ``n_used`` times the inverse observed information, so
    standard errors are ``sqrt(diag(covariance) / n_used)``.
    """

    phi_hat: float
    psi_hat: float
    scale_hat: float
    loglik: float
    covariance: np.ndarray
    n_used: int
    converged: bool
    information: np.ndarray = field(repr=False, default=None)

    @property
    def se(self) -> np.ndarray:
        return np.sqrt(np.diag(self.covariance) / self.n_used)

    @property
    def variance(self) -> np.ndarray:
        """Finite-sample covariance ``covariance / n_used``."""
        return self.covariance / self.n_used

    def to_dict(self) -> dict:
        return {
            "phi": self.phi_hat,
            "psi": self.psi_hat,
            "scale": self.scale_hat,
            "loglik": self.loglik,
            "covariance": self.covariance.tolist(),
            "n_used": self.n_used,
            "converged": self.converged,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "FitResult":
        return cls(
            float(data["phi"]),
            float(data["psi"]),
            float(data.get("scale", 1.0)),
            float(data.get("loglik", float("nan"))),
            np.asarray(data["covariance"], dtype=float),
            int(data["n_used"]),
            bool(data.get("converged", True)),
        )


def _negloglik(theta, y):
    phi, psi, log_scale = theta
    if abs(phi) >= 1.0 or abs(psi) >= 1.0:
        return np.inf
    val = -float(np.sum(mar11_log_transition_density(y[2:], y[1:-1], y[:-2], phi, psi, math.exp(log_scale))))
    return val if math.isfinite(val) else np.inf


def numerical_hessian(fun, theta: np.ndarray, rel_step: float = HESSIAN_STEP) -> np.ndarray:
    """Central-difference Hessian with steps ``rel_step * max(|theta_i|, 1)``."""
    theta = np.asarray(theta, dtype=float)
    k = theta.size
    steps = rel_step * np.maximum(np.abs(theta), 1.0)
    hess = np.empty((k, k))
    f0 = fun(theta)
    for i in range(k):
        ei = np.zeros(k)
        ei[i] = steps[i]
        hess[i, i] = (fun(theta + ei) - 2.0 * f0 + fun(theta - ei)) / steps[i] ** 2
        for j in range(i + 1, k):
            ej = np.zeros(k)
            ej[j] = steps[j]
            val = (fun(theta + ei + ej) - fun(theta + ei - ej) - fun(theta - ei + ej) + fun(theta - ei - ej)) / (4.0 * steps[i] * steps[j])
            hess[i, j] = hess[j, i] = val
    return hess


def _nelder_mead(start, y, width, xtol):
    simplex = start + np.vstack([np.zeros(3), width * np.eye(3)])
    return optimize.minimize(
        _negloglik,
        start,
        args=(y,),
        method="Nelder-Mead",
        options={"xatol": xtol, "fatol": 1e-10, "maxiter": 4000, "maxfev": 8000, "initial_simplex": simplex},
    )


POLISH_RADII = (0.001, 0.002, 0.005, 0.01)


def _polish(res, y, xtol, rounds: int = 5):
    # Large observations make the likelihood ridged at the scale 1/max|y|,
    # so Nelder-Mead can stop on a local bump; restart around the optimum.
    best = res
    directions = np.array([[1, 0], [-1, 0], [0, 1], [0, -1], [1, 1], [-1, -1], [1, -1], [-1, 1]], dtype=float)
    for _ in range(rounds):
        improved = False
        for radius in POLISH_RADII:
            for d in directions:
                start = best.x.copy()
                start[:2] += radius * d
                if np.any(np.abs(start[:2]) >= 1.0):
                    continue
                cand = _nelder_mead(start, y, radius, xtol)
                if cand.success and cand.fun < best.fun - 1e-9:
                    best, improved = cand, True
        if not improved:
            break
    return best


def fit_mar11_cauchy(series, *, grid_step: float = GRID_STEP, xtol: float = 1e-6, check_boundary: bool = True) -> FitResult:
    """Maximum-likelihood fit of ``(phi, psi, scale)``.

    A grid over ``(-0.95, 0.95)^2`` with the scale set to the median absolute
    residual gives the start; Nelder-Mead on ``(phi, psi, log scale)``
    polishes it.  Covariance from the inverse central-difference Hessian.

    Raises
    ------
    BoundaryEstimate
        An estimate within 0.01 of the unit box edge.
    NotConverged
        The local search failed.
    """
    y = np.asarray(series, dtype=float)
    if y.size < 100:
        raise SeriesTooShort(f"need at least 100 observations, got {y.size}")
    nodes = np.arange(-GRID_EDGE, GRID_EDGE + 1e-9, grid_step)
    best, start = np.inf, None
    for phi in nodes:
        for psi in nodes:
            s = _robust_scale(y, phi, psi)
            val = _negloglik((phi, psi, math.log(s)), y)
            if val < best:
                best, start = val, (phi, psi, math.log(s))
    res = _nelder_mead(np.array(start), y, 0.5 * grid_step, xtol)
    if not res.success:
        raise NotConverged(res.message)
    res = _polish(res, y, xtol)
    phi, psi, log_scale = res.x
    if check_boundary and max(abs(phi), abs(psi)) >= BOUNDARY:
        raise BoundaryEstimate(f"estimate ({phi:.4f}, {psi:.4f}) is at the edge of the stationary box")
    n_used = y.size - 2
    hess = numerical_hessian(lambda th: _negloglik(th, y), res.x)
    try:
        inv = np.linalg.inv(hess)
    except np.linalg.LinAlgError as exc:
        raise SingularInformation("observed information is singular") from exc
    cov = n_used * inv[:2, :2]
    cov = 0.5 * (cov + cov.T)
    ok = bool(np.all(np.isfinite(cov)) and np.all(np.linalg.eigvalsh(cov) > 0))
    return FitResult(float(phi), float(psi), float(math.exp(log_scale)), float(-res.fun), cov, n_used, ok, hess)


def coef_covariance(series, fit: FitResult) -> np.ndarray:
    """Per-observation covariance of the causal coefficient block.

    For a MAR(1,1) this is the ``(phi, phi)`` entry, as a 1x1 matrix.
    """
    if not fit.converged:
        raise SingularInformation("fit did not produce a positive definite information matrix")
    omega = np.asarray(fit.covariance, dtype=float)[:1, :1]
    if not (np.all(np.isfinite(omega)) and omega[0, 0] > 0):
        raise SingularInformation("causal block of the covariance is not positive")
    return omega
