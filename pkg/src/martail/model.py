"""Mixed causal/noncausal autoregressions and their moving-average expansions.

A MAR(p, q) process solves ``Phi(L) Psi(L^-1) y_t = eps_t`` with

    Phi(L) = 1 - phi_1 L - ... - phi_p L^p
    Psi(F) = 1 - psi_1 F - ... - psi_q F^q,   F = L^-1,

and admits the two-sided expansion ``y_t = sum_h c_h eps_{t-h}``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import (
    DegenerateDecomposition,
    DegenerateOrder,
    InvalidInnovation,
    NonStationary,
    SeriesTooShort,
    WindowTooSmall,
)

STATIONARITY_MARGIN = 1e-8
TINY = np.finfo(float).tiny
WINDOW_TOL = 1e-12

FAMILIES = ("cauchy", "half_cauchy", "pareto")


@dataclass(frozen=True)
class InnovationSpec:
    """Law of the i.i.d. innovations.

    ``scale`` multiplies the Cauchy-type draws; Pareto draws are
    ``pareto_minimum * U**(-1/alpha)``.  The family pins down the tail
    parameters it implies: Cauchy has ``alpha = 1`` and extremal skewness
    1/2, the one-sided families put all tail mass on the right.
    """

    family: str = "cauchy"
    alpha: float = 1.0
    skewness_pi: float = 0.5
    scale: float = 1.0
    pareto_minimum: float = 1.0

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise InvalidInnovation(f"unknown innovation family {self.family!r}")
        if self.family == "cauchy":
            object.__setattr__(self, "alpha", 1.0)
            object.__setattr__(self, "skewness_pi", 0.5)
        elif self.family == "half_cauchy":
            object.__setattr__(self, "alpha", 1.0)
            object.__setattr__(self, "skewness_pi", 1.0)
        else:
            object.__setattr__(self, "skewness_pi", 1.0)
        if not (self.alpha > 0 and math.isfinite(self.alpha)):
            raise InvalidInnovation(f"tail index must be positive, got {self.alpha}")
        if not 0.0 < self.skewness_pi <= 1.0:
            raise InvalidInnovation(f"extremal skewness must lie in (0, 1], got {self.skewness_pi}")
        if not self.scale > 0:
            raise InvalidInnovation(f"scale must be positive, got {self.scale}")
        if not self.pareto_minimum > 0:
            raise InvalidInnovation(f"pareto_minimum must be positive, got {self.pareto_minimum}")

    def tail_constant(self) -> float:
        """Constant K in ``P[eps > z] ~ K z^-alpha`` (right tail)."""
        if self.family == "cauchy":
            return self.scale / math.pi
        if self.family == "half_cauchy":
            return 2.0 * self.scale / math.pi
        return self.pareto_minimum ** self.alpha

    def to_dict(self) -> dict:
        return {
            "family": self.family,
            "alpha": self.alpha,
            "scale": self.scale,
            "pareto_minimum": self.pareto_minimum,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "InnovationSpec":
        known = {k: data[k] for k in ("family", "alpha", "skewness_pi", "scale", "pareto_minimum") if k in data}
        return cls(**known)


def _inverse_roots(coeffs: np.ndarray) -> np.ndarray:
    # 1 - c_1 z - ... - c_k z^k = prod (1 - r_i z)  <=>  r_i are the
    # eigenvalues of the companion matrix with first row c.
    k = coeffs.size
    if k == 0:
        return np.zeros(0, dtype=complex)
    companion = np.zeros((k, k))
    companion[0, :] = coeffs
    companion[1:, :-1] = np.eye(k - 1)
    roots = np.linalg.eigvals(companion).astype(complex)
    return roots[np.argsort(np.abs(roots), kind="stable")]


def validate_and_roots(phi, psi, *, margin: float = STATIONARITY_MARGIN, allow_degenerate: bool = False):
    """Check a MAR(p, q) specification and return its inverse roots.

    Parameters
    ----------
    phi, psi : sequence of float
        Causal coefficients ``phi_1..phi_p`` and noncausal coefficients
        ``psi_1..psi_q``.
    margin : float
        Inverse roots must have modulus below ``1 - margin``.
    allow_degenerate : bool
        Accept a zero highest-order coefficient.  Used for limiting cases
        such as a MAR(1, 1) with ``phi = 0``.

    Returns
    -------
    lam, mu : complex ndarray
        Inverse roots of ``Phi`` and ``Psi`` sorted by modulus.
    """
    phi = np.asarray(phi, dtype=float).ravel()
    psi = np.asarray(psi, dtype=float).ravel()
    if not (np.all(np.isfinite(phi)) and np.all(np.isfinite(psi))):
        raise ValueError("coefficients must be finite")
    if not allow_degenerate:
        for name, v in (("phi", phi), ("psi", psi)):
            if v.size and v[-1] == 0.0:
                raise DegenerateOrder(f"highest-order {name} coefficient is zero", polynomial=name)
    lam = _inverse_roots(phi)
    mu = _inverse_roots(psi)
    for name, roots in (("Phi", lam), ("Psi", mu)):
        if roots.size and np.max(np.abs(roots)) >= 1.0 - margin:
            raise NonStationary(
                f"{name} has an inverse root of modulus {np.max(np.abs(roots)):.6g} >= 1",
                polynomial=name,
            )
    return lam, mu


def default_window(lam, mu, p: int = 0, q: int = 0, tol: float = WINDOW_TOL) -> int:
    """Smallest H with ``rho_max**H < tol``, never below ``p + q`` (nor 1)."""
    moduli = np.abs(np.concatenate([np.asarray(lam), np.asarray(mu)]))
    floor = max(p + q, 1)
    if moduli.size == 0:
        return floor
    rho = float(moduli.max())
    if rho < 1e-300:
        return floor
    return max(floor, int(math.floor(math.log(tol) / math.log(rho))) + 1)


def _flush_subnormal(x: np.ndarray) -> np.ndarray:
    # subnormal coefficients have lost their relative precision; ratios of
    # them produce spurious atoms, so treat them as zero
    x[np.abs(x) < TINY] = 0.0
    return x


def ar_recursion(coeffs: np.ndarray, n: int) -> np.ndarray:
    """Coefficients of ``1 / (1 - c_1 z - ... - c_k z^k)`` up to order ``n - 1``."""
    out = np.zeros(n)
    if n == 0:
        return out
    out[0] = 1.0
    k = coeffs.size
    for h in range(1, n):
        m = min(k, h)
        # out[h] = sum_{i=1..m} c_i out[h-i]
        out[h] = np.dot(coeffs[:m], out[h - 1 :: -1][:m])
    return out


@dataclass(frozen=True)
class MaCoefficients:
    """Truncated one- and two-sided moving-average coefficients.

    ``a[h]`` expands ``1/Phi(L)``, ``b[h]`` expands ``1/Psi(L^-1)`` and
    ``c`` holds ``c_h`` for ``h = -window_H .. window_H`` (``c[h + window_H]``).
    """

    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    window_H: int
    truncation_bound: float
    spectral_radius: float = 0.0
    phi: tuple = ()
    psi: tuple = ()

    @property
    def h(self) -> np.ndarray:
        return np.arange(-self.window_H, self.window_H + 1)

    def c_at(self, h):
        """``c_h`` for integer ``h`` (scalar or array); zero outside the window."""
        h = np.asarray(h)
        idx = h + self.window_H
        inside = (idx >= 0) & (idx < self.c.size)
        out = np.where(inside, self.c[np.clip(idx, 0, self.c.size - 1)], 0.0)
        return out if out.ndim else float(out)

    def c_range(self, lo: int, hi: int) -> np.ndarray:
        """``c_h`` for ``h = lo..hi``, extending past the window by recursion.

        Beyond ``H`` the causal recursion ``c_h = sum_i phi_i c_{h-i}`` holds
        exactly, and below ``-H`` its noncausal mirror does, so the extension
        does not introduce truncation zeros.
        """
        H = self.window_H
        p, q = len(self.phi), len(self.psi)
        left, right = min(lo, -H), max(hi, H)
        out = np.zeros(right - left + 1)
        off = -left
        out[off - H : off + H + 1] = self.c
        for h in range(H + 1, right + 1):
            acc = 0.0
            for i in range(1, p + 1):
                acc += self.phi[i - 1] * out[off + h - i]
            out[off + h] = acc
        for h in range(-H - 1, left - 1, -1):
            acc = 0.0
            for k in range(1, q + 1):
                acc += self.psi[k - 1] * out[off + h + k]
            out[off + h] = acc
        return _flush_subnormal(out[off + lo : off + hi + 1])

    def a_at(self, h):
        """Causal coefficients extended by zero for negative ``h``."""
        h = np.asarray(h)
        inside = (h >= 0) & (h < self.a.size)
        out = np.where(inside, self.a[np.clip(h, 0, self.a.size - 1)], 0.0)
        return out if out.ndim else float(out)

    def b_at(self, h):
        """Noncausal coefficients, indexed as in ``u_t = sum_{h<=0} b_{-h} eps_{t-h}``.

        Returns ``b_{-h}`` for ``h <= 0`` and zero for ``h >= 1``.
        """
        h = np.asarray(h)
        k = -h
        inside = (k >= 0) & (k < self.b.size)
        out = np.where(inside, self.b[np.clip(k, 0, self.b.size - 1)], 0.0)
        return out if out.ndim else float(out)


@dataclass(frozen=True)
class MarModel:
    """MAR(p, q) model with ``Phi(0) = Psi(0) = 1``.

    A zero highest-order coefficient is tolerated here so that limiting cases
    (``phi = 0`` in a MAR(1, 1), say) can be represented; use
    :func:`validate_and_roots` directly, or :meth:`from_dict`, for the strict
    check.
    """

    phi: tuple = ()
    psi: tuple = ()
    innovation: InnovationSpec = field(default_factory=InnovationSpec)

    def __post_init__(self):
        phi = tuple(float(x) for x in np.atleast_1d(np.asarray(self.phi, dtype=float)))
        psi = tuple(float(x) for x in np.atleast_1d(np.asarray(self.psi, dtype=float)))
        object.__setattr__(self, "phi", phi)
        object.__setattr__(self, "psi", psi)
        lam, mu = validate_and_roots(phi, psi, allow_degenerate=True)
        object.__setattr__(self, "_lam", lam)
        object.__setattr__(self, "_mu", mu)

    @property
    def p(self) -> int:
        return len(self.phi)

    @property
    def q(self) -> int:
        return len(self.psi)

    @property
    def alpha(self) -> float:
        return self.innovation.alpha

    @property
    def causal_roots(self) -> np.ndarray:
        return self._lam

    @property
    def noncausal_roots(self) -> np.ndarray:
        return self._mu

    @property
    def spectral_radius(self) -> float:
        moduli = np.abs(np.concatenate([self._lam, self._mu]))
        return float(moduli.max()) if moduli.size else 0.0

    def default_window(self, tol: float = WINDOW_TOL) -> int:
        return default_window(self._lam, self._mu, self.p, self.q, tol)

    def is_positive(self) -> bool:
        """All inverse roots real and nonnegative (so every ``c_h >= 0``)."""
        roots = np.concatenate([self._lam, self._mu])
        return bool(np.all(np.abs(roots.imag) < 1e-6) and np.all(roots.real >= -1e-12))

    def coefficients(self, H: Optional[int] = None, tol: float = WINDOW_TOL) -> MaCoefficients:
        return ma_coefficients(self, H, tol=tol)

    def to_dict(self) -> dict:
        return {"phi": list(self.phi), "psi": list(self.psi), "innovation": self.innovation.to_dict()}

    @classmethod
    def from_dict(cls, data: dict, *, strict: bool = True) -> "MarModel":
        phi = data.get("phi", [])
        psi = data.get("psi", [])
        if strict:
            validate_and_roots(phi, psi)
        innovation = InnovationSpec.from_dict(data.get("innovation", {}))
        return cls(tuple(phi), tuple(psi), innovation)

    @classmethod
    def from_json(cls, path, *, strict: bool = True) -> "MarModel":
        with open(path) as fh:
            return cls.from_dict(json.load(fh), strict=strict)


def ma_coefficients(model: MarModel, H: Optional[int] = None, *, tol: float = WINDOW_TOL) -> MaCoefficients:
    """One- and two-sided moving-average coefficients over ``[-H, H]``.

    ``a`` and ``b`` come from the forward recursions of ``1/Phi`` and
    ``1/Psi``; ``c_h = sum_{k >= max(h, 0)} a_k b_{k-h}``.  Both sequences are
    generated to length ``2H + 1`` so the convolution is accurate over the
    whole window, and the absolute mass of ``c`` between ``H`` and ``2H`` is
    reported as ``truncation_bound``.
    """
    if H is None:
        H = model.default_window(tol)
    H = int(H)
    if H < max(model.p + model.q, 1):
        raise WindowTooSmall(f"window H={H} is smaller than p+q={model.p + model.q}")
    n = 2 * H + 1
    a = ar_recursion(np.asarray(model.phi), n)
    b = ar_recursion(np.asarray(model.psi), n)
    # full[k] = sum_m a[m + k - (n-1)] b[m]  ->  c_h sits at k = h + n - 1
    full = np.correlate(a, b, mode="full")
    c_wide = full[n - 1 - 2 * H : n + 2 * H]  # h = -2H..2H
    c = _flush_subnormal(c_wide[H : 3 * H + 1].copy())
    outside = np.abs(c_wide[:H]).sum() + np.abs(c_wide[3 * H + 1 :]).sum()
    return MaCoefficients(
        a=a[: H + 1].copy(),
        b=b[: H + 1].copy(),
        c=c,
        window_H=H,
        truncation_bound=float(outside),
        spectral_radius=model.spectral_radius,
        phi=model.phi,
        psi=model.psi,
    )


@dataclass(frozen=True)
class SplitPolynomials:
    """Polynomials of ``y_t = L^q b1(L) v_t + b2(L) u_t``.

    ``b1`` has ``p`` coefficients and ``b2`` has ``q``, both in increasing
    powers of ``L``.
    """

    b1: np.ndarray
    b2: np.ndarray


def _psi_tilde(psi: np.ndarray) -> np.ndarray:
    # L^q Psi(L^-1) = L^q - psi_1 L^(q-1) - ... - psi_q, increasing powers
    q = psi.size
    out = np.zeros(q + 1)
    out[q] = 1.0
    out[:q] = -psi[::-1]
    return out


def split_polynomials(model: MarModel) -> SplitPolynomials:
    """Partial fractions ``1/(Phi(L) L^q Psi(L^-1)) = b1/Phi + b2/(L^q Psi(L^-1))``.

    Solved from the polynomial identity ``b1(L) L^q Psi(L^-1) + b2(L) Phi(L) = 1``
    by matching the ``p + q`` coefficients.
    """
    p, q = model.p, model.q
    if p == 0 or q == 0:
        raise DegenerateDecomposition(f"MAR({p},{q}) has no mixed decomposition; use the one-sided representation")
    phi_poly = np.concatenate([[1.0], -np.asarray(model.phi)])
    psi_poly = _psi_tilde(np.asarray(model.psi))
    n = p + q
    system = np.zeros((n, n))
    for i in range(p):
        system[i : i + q + 1, i] = psi_poly
    for j in range(q):
        system[j : j + p + 1, p + j] = phi_poly
    rhs = np.zeros(n)
    rhs[0] = 1.0
    sol = np.linalg.solve(system, rhs)
    return SplitPolynomials(b1=sol[:p], b2=sol[p:])


def pure_components(series: Sequence[float], model: MarModel):
    """Pure noncausal ``u_t = Phi(L) y_t`` and pure causal ``v_t = Psi(L^-1) y_t``.

    Entries whose filter window leaves the sample are NaN: the first ``p``
    entries of ``u`` and the last ``q`` entries of ``v``.
    """
    y = np.asarray(series, dtype=float)
    p, q = model.p, model.q
    if y.size <= p + q:
        raise SeriesTooShort(f"series of length {y.size} needs more than p+q={p + q} points")
    u = y.copy()
    for i, coef in enumerate(model.phi, start=1):
        u[i:] -= coef * y[:-i]
    u[:p] = np.nan
    v = y.copy()
    for k, coef in enumerate(model.psi, start=1):
        v[:-k] -= coef * y[k:]
    if q:
        v[-q:] = np.nan
    return u, v


def apply_lag_polynomial(x: np.ndarray, coeffs: Sequence[float]) -> np.ndarray:
    """``(1 - sum_i coeffs_i L^i) x`` with NaN where the lags leave the array."""
    x = np.asarray(x, dtype=float)
    out = x.copy()
    k = len(coeffs)
    for i, coef in enumerate(coeffs, start=1):
        out[i:] -= coef * x[:-i]
    out[:k] = np.nan
    return out


def apply_lead_polynomial(x: np.ndarray, coeffs: Sequence[float]) -> np.ndarray:
    """``(1 - sum_k coeffs_k F^k) x`` with NaN where the leads leave the array."""
    x = np.asarray(x, dtype=float)
    out = x.copy()
    k = len(coeffs)
    for i, coef in enumerate(coeffs, start=1):
        out[:-i] -= coef * x[i:]
    if k:
        out[-k:] = np.nan
    return out
