"""Pure-residual panels around a focal date.

At a focal date t the estimated pure noncausal residuals
``U_{t+h} = u_hat_{t+h} / y_t`` vanish in the limit for maturities past the
date of the big innovation, and the pure causal residuals ``V`` vanish
before it.  The 2 x (2H+1) adjacency matrix records which normalized
residuals are statistically indistinguishable from zero.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DegenerateDecomposition, WindowOutOfRange, WindowTooSmall, ZeroFocalValue
from .model import MarModel, pure_components, split_polynomials
from .tail import filtered_tail_components, tail_coefficients, tail_trajectory

DEFAULT_H = 30
Z_975 = 1.959963984540054


@dataclass(frozen=True)
class ResidualPanel:
    """Normalized pure residuals, confidence bands and adjacency indicators.

    Row 0 of ``adjacency`` is the noncausal (u) row, row 1 the causal (v) row.
    """

    focal_t: int
    H: int
    U_norm: np.ndarray
    V_norm: np.ndarray
    band_u: np.ndarray
    band_v: np.ndarray
    adjacency: np.ndarray
    focal_value: float
    breaking_maturity_u: Optional[int] = None
    breaking_maturity_v: Optional[int] = None

    @property
    def h(self) -> np.ndarray:
        return np.arange(-self.H, self.H + 1)

    def rows(self):
        """Plot data: ``h, |U|, |V|, band_u, band_v, adj_u, adj_v``."""
        return np.column_stack([self.h, np.abs(self.U_norm), np.abs(self.V_norm), self.band_u, self.band_v, self.adjacency[0], self.adjacency[1]])


def _as_model(model_fit) -> MarModel:
    if isinstance(model_fit, MarModel):
        return model_fit
    return MarModel((model_fit.phi_hat,), (model_fit.psi_hat,))


def residual_panel(series, model_fit, focal_t: int, H: int = DEFAULT_H, omega=None, omega_q=None, n_obs: Optional[int] = None) -> ResidualPanel:
    """Panel of normalized pure residuals at ``focal_t``.

    Parameters
    ----------
    series : array
    model_fit : MarModel or FitResult
        Polynomials used to filter the series.
    focal_t : int
        Zero-based focal date.
    H : int
        Maturities ``-H..H``.
    omega : array, optional
        Per-observation covariance of the causal coefficients (``p x p``).
        Defaults to the fit's causal block, or zero for a plain model.
    omega_q : array, optional
        Same for the noncausal coefficients; drives the v-row band.
    n_obs : int, optional
        Sample size dividing the covariance; defaults to the fit's
        ``n_used`` or the series length.

    Notes
    -----
    The band at maturity h is ``1.96 sqrt(x' Omega x / n)`` with
    ``x = (y_{t+h-1}, ..., y_{t+h-p}) / y_t`` for U and
    ``x = (y_{t+h+1}, ..., y_{t+h+q}) / y_t`` for V.
    """
    y = np.asarray(series, dtype=float)
    model = _as_model(model_fit)
    p, q = model.p, model.q
    t = int(focal_t)
    if t - H - p < 0 or t + H + q >= y.size:
        raise WindowOutOfRange(f"window [{t - H - p}, {t + H + q}] leaves the sample of size {y.size}")
    yt = y[t]
    if yt == 0:
        raise ZeroFocalValue(f"y[{t}] is zero")
    cov = getattr(model_fit, "covariance", None)
    if omega is None:
        omega = cov[:p, :p] if cov is not None and p else np.zeros((p, p))
    if omega_q is None:
        omega_q = cov[p : p + q, p : p + q] if cov is not None and q else np.zeros((q, q))
    omega = np.atleast_2d(np.asarray(omega, dtype=float))
    omega_q = np.atleast_2d(np.asarray(omega_q, dtype=float))
    n = n_obs if n_obs is not None else getattr(model_fit, "n_used", y.size)

    u, v = pure_components(y, model)
    hs = np.arange(-H, H + 1)
    U = u[t + hs] / yt
    V = v[t + hs] / yt
    band_u = np.zeros(hs.size)
    band_v = np.zeros(hs.size)
    if p:
        x = np.column_stack([y[t + hs - i] for i in range(1, p + 1)]) / yt
        band_u = Z_975 * np.sqrt(np.einsum("ij,jk,ik->i", x, omega, x) / n)
    if q:
        x = np.column_stack([y[t + hs + k] for k in range(1, q + 1)]) / yt
        band_v = Z_975 * np.sqrt(np.einsum("ij,jk,ik->i", x, omega_q, x) / n)
    with np.errstate(invalid="ignore"):
        adj = np.vstack([np.abs(U) <= band_u, np.abs(V) <= band_v]).astype(int)
    _, _, bu, bv = _breaks(adj, H)
    return ResidualPanel(t, H, U, V, band_u, band_v, adj, float(yt), bu, bv)


def _terminal_run_start(row: np.ndarray) -> Optional[int]:
    # index where the trailing block of ones begins
    if row.size == 0 or row[-1] != 1:
        return None
    zeros = np.flatnonzero(row == 0)
    return int(zeros[-1] + 1) if zeros.size else 0


def _initial_run_end(row: np.ndarray) -> Optional[int]:
    if row.size == 0 or row[0] != 1:
        return None
    zeros = np.flatnonzero(row == 0)
    return int(zeros[0] - 1) if zeros.size else row.size - 1


def _breaks(adj: np.ndarray, H: int):
    su = _terminal_run_start(adj[0])
    ev = _initial_run_end(adj[1])
    bu = None if su is None else su - H
    bv = None if ev is None else ev - H
    return su, ev, bu, bv


def adjacency_summary(panel: ResidualPanel, tol: int = 1):
    """Classify the adjacency pattern and estimate ``-N_t``.

    The u row should read 0...0 1...1 with the ones starting at ``1 - N``,
    the v row 1...1 0...0 with the ones ending at ``-1 - N``.  Each row gives
    an estimate of ``-N``; they must agree within ``tol``.

    Returns
    -------
    pattern_class : str
        ``bubble_consistent``, ``inconsistent`` or ``indeterminate``.
    neg_n_hat : int or None
    """
    H = panel.H
    _, _, bu, bv = _breaks(panel.adjacency, H)
    row_u, row_v = panel.adjacency
    if not row_u.any() and not row_v.any():
        return "inconsistent", None
    est_u = None if bu is None else bu - 1
    est_v = None if bv is None else bv + 1
    if est_u is None and est_v is None:
        return "inconsistent", None
    if est_u is None or est_v is None:
        return "indeterminate", est_u if est_u is not None else est_v
    if abs(est_u - est_v) <= tol:
        return "bubble_consistent", int(round(0.5 * (est_u + est_v))) if est_u != est_v else est_u
    return "inconsistent", est_u


def true_drift(traj, t: int, H: Optional[int] = None) -> int:
    """Dominant-jump index ``argmax_j |c_j eps_{t-j}|`` from recorded innovations."""
    model = traj.model
    coeffs = model.coefficients()
    W = coeffs.window_H if H is None else int(H)
    W = min(W, traj.truncation_H)
    j = np.arange(-W, W + 1)
    contrib = np.abs(coeffs.c_at(j) * traj.innovation_at(t - j))
    return int(j[np.argmax(contrib)])


@dataclass(frozen=True)
class MisspecifiedTail:
    h: np.ndarray
    U: np.ndarray
    V: np.ndarray
    u_violations: np.ndarray
    v_violations: np.ndarray
    X: np.ndarray


def misspecified_pure_tail(true_model: MarModel, pseudo_phi, pseudo_psi, drift_j: int, H: int = DEFAULT_H, tol: float = 1e-10) -> MisspecifiedTail:
    """Pure tail components computed with pseudo polynomials.

    The tail path of ``true_model`` given ``N = drift_j`` is filtered by the
    supplied ``Phi*`` and ``Psi*``.  ``u_violations`` lists maturities
    ``h >= 1 - j`` where ``U*`` is not zero, ``v_violations`` those
    ``h <= -1 - j`` where ``V*`` is not zero.
    """
    pseudo_phi = tuple(float(x) for x in pseudo_phi)
    pseudo_psi = tuple(float(x) for x in pseudo_psi)
    if H < max(len(pseudo_phi), len(pseudo_psi), 1):
        raise WindowTooSmall("window narrower than the pseudo filters")
    pad = max(len(pseudo_phi), len(pseudo_psi))
    coeffs = tail_coefficients(true_model)
    traj = tail_trajectory(coeffs, drift_j, 1, H + pad)
    _, U, V = filtered_tail_components(traj, pseudo_phi, pseudo_psi)
    keep = slice(pad, pad + 2 * H + 1)
    h = np.arange(-H, H + 1)
    U, V, X = U[keep], V[keep], traj.values[keep]
    scale = max(np.abs(X).max(), 1.0)
    u_bad = h[(h >= 1 - drift_j) & (np.abs(U) > tol * scale)]
    v_bad = h[(h <= -1 - drift_j) & (np.abs(V) > tol * scale)]
    return MisspecifiedTail(h, U, V, u_bad, v_bad, X)


def recombine_components(U: np.ndarray, V: np.ndarray, phi, psi) -> np.ndarray:
    """Rebuild a path from its pure parts: ``L^q b1(L) V + b2(L) U``.

    Entries whose filters leave the arrays are NaN.
    """
    model = MarModel(tuple(phi), tuple(psi))
    if model.p == 0 or model.q == 0:
        raise DegenerateDecomposition("recombination needs p >= 1 and q >= 1")
    sp = split_polynomials(model)
    n = U.size
    out = np.zeros(n)
    valid = np.ones(n, dtype=bool)
    q = model.q
    for k, coef in enumerate(sp.b1):
        lag = q + k
        out[lag:] += coef * V[: n - lag]
        valid[:lag] = False
    for k, coef in enumerate(sp.b2):
        out[k:] += coef * U[: n - k]
        valid[:k] = False
    valid &= np.isfinite(out)
    return np.where(valid, out, np.nan)
