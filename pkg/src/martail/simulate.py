"""Heavy-tailed simulation and Monte Carlo checks of the limiting laws.

Random streams
--------------
Every randomized routine takes an integer ``seed`` and builds
``numpy.random.Generator(PCG64(SeedSequence(seed)))``.  Independent
sub-streams (replications, variables of a multivariate draw) come from
``SeedSequence(seed).spawn(n)`` in index order, so results do not depend on
the order in which replications are executed.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import signal

from .errors import TooFewEvents, WindowTooSmall
from .model import InnovationSpec, MarModel

BIN_WIDTH = 0.02
BIN_RANGE = (-0.5, 3.0)
MIN_EVENTS = 20
WARN_EVENTS = 200
MAX_DRAWS = 400_000_000


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed))))


def spawn_rngs(seed: int, n: int) -> list:
    """``n`` independent generators derived from one master seed."""
    return [np.random.Generator(np.random.PCG64(s)) for s in np.random.SeedSequence(int(seed)).spawn(n)]


def sample_innovation(spec: InnovationSpec, rng: np.random.Generator, size=None):
    """Draw innovations by inversion of a uniform.

    Cauchy: ``scale * tan(pi (U - 1/2))``; half-Cauchy: its absolute value;
    Pareto: ``x_m * U^(-1/alpha)``.
    """
    u = rng.random(size)
    if spec.family == "pareto":
        # 1 - U lies in (0, 1], avoiding a zero base
        return spec.pareto_minimum * (1.0 - u) ** (-1.0 / spec.alpha)
    draw = spec.scale * np.tan(np.pi * (u - 0.5))
    if spec.family == "half_cauchy":
        return np.abs(draw)
    return draw


@dataclass(frozen=True)
class Trajectory:
    """Simulated path with the innovations that generated it.

    ``innovations[t]`` is ``eps_t`` aligned with ``values[t]``;
    ``padded_innovations`` keeps the ``truncation_H`` extra draws on each
    side (``eps_t`` sits at index ``t + truncation_H``).
    """

    values: np.ndarray
    innovations: np.ndarray
    padded_innovations: np.ndarray
    model: MarModel
    seed: int
    truncation_H: int

    def innovation_at(self, t):
        return self.padded_innovations[np.asarray(t) + self.truncation_H]


def simulate_trajectory(model: MarModel, T: int, seed: int, H: Optional[int] = None) -> Trajectory:
    """Simulate ``T`` points of a MAR(p, q) path.

    ``T + 2H`` innovations are drawn.  The noncausal part
    ``u_t = Psi(L^-1)^-1 eps_t`` is filtered backwards in time and the
    causal part ``y_t = Phi(L)^-1 u_t`` forwards; ``H`` points are trimmed at
    each end, so every kept value includes the coefficients ``c_h`` for
    ``|h| <= H`` and the neglected ones are below ``rho^H``.
    """
    T = int(T)
    H = model.default_window() if H is None else int(H)
    if H < model.p + model.q:
        raise WindowTooSmall(f"window H={H} is smaller than p+q")
    n = T + 2 * H
    if n > MAX_DRAWS:
        raise MemoryError(f"{n} draws exceed the limit of {MAX_DRAWS}")
    rng = make_rng(seed)
    eps = np.asarray(sample_innovation(model.innovation, rng, n), dtype=float)
    den_psi = np.concatenate([[1.0], -np.asarray(model.psi)])
    den_phi = np.concatenate([[1.0], -np.asarray(model.phi)])
    u = signal.lfilter([1.0], den_psi, eps[::-1])[::-1]
    y = signal.lfilter([1.0], den_phi, u)
    return Trajectory(
        values=y[H : H + T].copy(),
        innovations=eps[H : H + T].copy(),
        padded_innovations=eps,
        model=model,
        seed=int(seed),
        truncation_H=H,
    )


def filter_residual(traj: Trajectory) -> np.ndarray:
    """``Phi(L) Psi(L^-1) y_t - eps_t`` on interior dates (NaN at the edges)."""
    m = traj.model
    y = traj.values
    u = y.copy()
    for i, coef in enumerate(m.phi, start=1):
        u[i:] -= coef * y[:-i]
    u[: m.p] = np.nan
    e = u.copy()
    for k, coef in enumerate(m.psi, start=1):
        e[:-k] -= coef * u[k:]
    if m.q:
        e[-m.q :] = np.nan
    return e - traj.innovations


@dataclass(frozen=True)
class EventCondition:
    """Conditioning events for ratio histograms.

    ``y_t > threshold`` (or above the empirical ``quantile`` when no threshold
    is given), optionally with ``r_low < r_t < r_high``.
    """

    threshold: Optional[float] = None
    quantile: float = 0.975
    r_low: Optional[float] = None
    r_high: Optional[float] = None

    def describe(self) -> str:
        parts = [f"y_t > {self.threshold:.6g}" if self.threshold is not None else f"y_t > q_{self.quantile}"]
        if self.r_low is not None or self.r_high is not None:
            parts.append(f"{self.r_low} < r_t < {self.r_high}")
        return " and ".join(parts)


def event_dates(y: np.ndarray, condition: EventCondition, lead: int = 1) -> tuple:
    """Dates meeting the condition with ``lead`` future points available.

    Returns
    -------
    dates : ndarray of int
    threshold : float
    """
    y = np.asarray(y, dtype=float)
    thr = condition.threshold
    if thr is None:
        thr = float(np.quantile(y, condition.quantile))
    t = np.arange(1, y.size - lead)
    ok = y[t] > thr
    if condition.r_low is not None or condition.r_high is not None:
        with np.errstate(divide="ignore", invalid="ignore"):
            r = y[t] / y[t - 1]
        if condition.r_low is not None:
            ok &= r > condition.r_low
        if condition.r_high is not None:
            ok &= r < condition.r_high
    return t[ok], thr


def ratio_target(y: np.ndarray, dates: np.ndarray, steps: int = 1) -> np.ndarray:
    """``r_{t+1}`` (``steps = 1``) or the vector ``(r_{t+1}, ..., r_{t+steps})``."""
    cols = [y[dates + s] / y[dates + s - 1] for s in range(1, steps + 1)]
    return cols[0] if steps == 1 else np.column_stack(cols)


def ratio_bins(width: float = BIN_WIDTH, lo: float = BIN_RANGE[0], hi: float = BIN_RANGE[1]) -> np.ndarray:
    """Fixed-width edges on ``[lo, hi]`` plus open overflow bins on both sides."""
    n = int(round((hi - lo) / width))
    inner = lo + width * np.arange(n + 1)
    return np.concatenate([[-np.inf], inner, [np.inf]])


@dataclass(frozen=True)
class ConditionalHistogram:
    bin_edges: np.ndarray
    counts: np.ndarray
    n_conditioning: int
    condition: str
    threshold: float = float("nan")
    few_events: bool = False

    @property
    def centers(self) -> np.ndarray:
        lo, hi = self.bin_edges[:-1], self.bin_edges[1:]
        with np.errstate(invalid="ignore"):
            mid = 0.5 * (lo + hi)
        return np.where(np.isfinite(mid), mid, np.where(np.isfinite(lo), lo, hi))

    @property
    def frequencies(self) -> np.ndarray:
        return self.counts / max(self.n_conditioning, 1)

    def top_bins(self, k: int = 3) -> np.ndarray:
        """Centers of the ``k`` highest finite bins, in decreasing count order."""
        finite = np.isfinite(self.bin_edges[:-1]) & np.isfinite(self.bin_edges[1:])
        idx = np.flatnonzero(finite)
        order = idx[np.argsort(-self.counts[idx], kind="stable")]
        return self.centers[order[:k]]

    def local_peaks(self, min_count: int = 1) -> np.ndarray:
        """Centers of finite bins that beat both neighbours."""
        c = self.counts
        inner = np.arange(2, c.size - 2)
        ok = (c[inner] > c[inner - 1]) & (c[inner] >= c[inner + 1]) & (c[inner] >= min_count)
        return self.centers[inner[ok]]

    def mass_in(self, lo: float, hi: float) -> float:
        """Share of events in bins lying inside ``[lo, hi]``."""
        left, right = self.bin_edges[:-1], self.bin_edges[1:]
        tol = 1e-9
        inside = (left >= lo - tol) & (right <= hi + tol)
        return float(self.counts[inside].sum() / max(self.n_conditioning, 1))


def conditional_histogram(
    series,
    condition: EventCondition,
    target: Optional[Callable] = None,
    bins: Optional[np.ndarray] = None,
) -> ConditionalHistogram:
    """Histogram of a target functional over the conditioning events.

    Parameters
    ----------
    series : Trajectory or array
    condition : EventCondition
    target : callable, optional
        ``target(y, dates) -> values``; defaults to ``r_{t+1}``.
    bins : ndarray, optional
        Bin edges; defaults to :func:`ratio_bins`.

    Raises
    ------
    TooFewEvents
        Fewer than 20 conditioning events.
    """
    y = series.values if isinstance(series, Trajectory) else np.asarray(series, dtype=float)
    dates, thr = event_dates(y, condition)
    n = int(dates.size)
    if n < MIN_EVENTS:
        raise TooFewEvents(f"only {n} conditioning events ({condition.describe()})", n=n)
    few = n < WARN_EVENTS
    if few:
        warnings.warn(f"only {n} conditioning events; the histogram is noisy", RuntimeWarning, stacklevel=2)
    values = ratio_target(y, dates) if target is None else np.asarray(target(y, dates))
    edges = ratio_bins() if bins is None else np.asarray(bins, dtype=float)
    idx = np.searchsorted(edges, values, side="right") - 1
    idx = np.clip(idx, 0, edges.size - 2)
    counts = np.bincount(idx[np.isfinite(values)], minlength=edges.size - 1)
    return ConditionalHistogram(edges, counts, n, condition.describe(), thr, few)


def atom_neighborhood_mass(values, atoms: Sequence[float], radius: float = 0.1) -> np.ndarray:
    """Share of ``values`` within ``radius`` of each atom."""
    v = np.asarray(values, dtype=float)
    return np.array([np.mean(np.abs(v - a) <= radius) for a in atoms])


@dataclass(frozen=True)
class SbjResult:
    empirical: float
    predicted: float
    n_events: int
    xi: float


def _tail_ratio(specs: Sequence[InnovationSpec]) -> np.ndarray:
    alphas = {round(s.alpha, 12) for s in specs}
    if len(alphas) != 1:
        raise ValueError("all variables must share the tail index")
    return np.array([s.tail_constant() for s in specs])


def sbj_experiment(spec1: InnovationSpec, spec2: InnovationSpec, s_quantile: float = 0.999, n: int = 10_000_000, seed: int = 0) -> SbjResult:
    """Single-big-jump check for a sum of two heavy-tailed variables.

    Given ``S = Z_1 + Z_2 > s``, the share ``R = Z_1 / S`` is asymptotically
    Bernoulli with ``P[R > 1/2] = xi / (1 + xi)``, ``xi`` the ratio of the
    right-tail constants.
    """
    k = _tail_ratio([spec1, spec2])
    xi = float(k[0] / k[1])
    r1, r2 = spawn_rngs(seed, 2)
    z1 = sample_innovation(spec1, r1, n)
    z2 = sample_innovation(spec2, r2, n)
    s = z1 + z2
    thr = np.quantile(s, s_quantile)
    hit = s > thr
    share = z1[hit] / s[hit]
    return SbjResult(float(np.mean(share > 0.5)), xi / (1.0 + xi), int(hit.sum()), xi)


@dataclass(frozen=True)
class MultinomialResult:
    empirical: np.ndarray
    predicted: np.ndarray
    n_events: int


def sbj_multinomial(specs: Sequence[InnovationSpec], s_quantile: float = 0.999, n: int = 10_000_000, seed: int = 0) -> MultinomialResult:
    """Several variables: frequency with which each one carries the largest share."""
    k = _tail_ratio(specs)
    rngs = spawn_rngs(seed, len(specs))
    z = np.vstack([sample_innovation(sp, r, n) for sp, r in zip(specs, rngs)])
    s = z.sum(axis=0)
    thr = np.quantile(s, s_quantile)
    hit = s > thr
    winner = np.argmax(z[:, hit], axis=0)
    freq = np.bincount(winner, minlength=len(specs)) / max(int(hit.sum()), 1)
    return MultinomialResult(freq, k / k.sum(), int(hit.sum()))


@dataclass(frozen=True)
class DensityRatio:
    estimate: float
    predicted: float


def density_ratio_check(psi: float, family: str = "cauchy", *, alpha: float = 1.5, z: float = 1e6,
                        quantile: float = 0.9999, n: int = 10_000_000, seed: int = 0) -> DensityRatio:
    """Tail ratio of ``u_t = sum_k psi^k eps_{t+k}`` against ``eps_t``.

    Cauchy: the density ratio in closed form at ``z``.  Pareto: the ratio of
    exceedance counts above the empirical ``quantile`` of ``eps``.  Both
    approach ``1 / (1 - psi^alpha)``.
    """
    if family == "cauchy":
        a = 1.0 - psi
        est = a * (1.0 + z * z) / (1.0 + a * a * z * z)
        return DensityRatio(float(est), 1.0 / (1.0 - psi))
    if family != "pareto":
        raise ValueError(f"unsupported family {family!r}")
    spec = InnovationSpec("pareto", alpha=alpha)
    eps = sample_innovation(spec, make_rng(seed), n)
    u = signal.lfilter([1.0], [1.0, -psi], eps[::-1])[::-1]
    burn = int(math.ceil(math.log(1e-12) / math.log(psi))) if psi > 0 else 0
    e, u = eps[: n - burn], u[: n - burn]
    thr = np.quantile(e, quantile)
    est = float(np.sum(u > thr) / np.sum(e > thr))
    return DensityRatio(est, 1.0 / (1.0 - psi ** alpha))


# Monte Carlo replications of the ratio histograms

FIG_MODEL = MarModel((), (1.0, -0.24))  # inverse roots 0.4 and 0.6


def fig_histogram(kind: str, seed: int, T: int = 1_000_000, quantile: float = 0.975, model: MarModel = FIG_MODEL):
    """Histogram of ``r_{t+1}`` for the MAR(0,2) illustrations.

    ``kind`` is ``fig8`` (``y_t`` above the quantile), ``fig9`` (also
    ``1 < r_t < 1.1``) or ``fig10`` (also ``2 < r_t < 2.1``).
    """
    bands = {"fig8": (None, None), "fig9": (1.0, 1.1), "fig10": (2.0, 2.1)}
    if kind not in bands:
        raise ValueError(f"unknown experiment {kind!r}")
    traj = simulate_trajectory(model, T, seed)
    lo, hi = bands[kind]
    return conditional_histogram(traj, EventCondition(quantile=quantile, r_low=lo, r_high=hi))


def level_oracle(model: MarModel, seed: int, T: int = 1_000_000, quantile: float = 0.999, steps: int = 1):
    """Ratios ``y_{t+s}/y_{t+s-1}`` after exceedances of the empirical quantile."""
    traj = simulate_trajectory(model, T, seed)
    dates, thr = event_dates(traj.values, EventCondition(quantile=quantile), lead=steps)
    return ratio_target(traj.values, dates, steps), thr
