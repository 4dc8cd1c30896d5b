"""Bayesian phase-difference estimation with Gaussian beliefs.

Each iteration picks ``t = 1.8 / var_prior`` (rounded to a multiple of
``dt``), evaluates the all-zero probability on ``m`` equally spaced energies
around the prior mean, fits a Gaussian to those points and multiplies it
into the prior.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import math
from dataclasses import asdict, dataclass, field
from typing import Protocol

import numpy as np
from scipy.optimize import least_squares

from .circuit_sim import NoiseSpec

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class GaussianBelief:
    mu: float
    var: float

    def __post_init__(self):
        if not (self.var > 0 and math.isfinite(self.var)):
            raise ValueError(f"variance must be positive and finite, got {self.var!r}")

    @property
    def sigma(self) -> float:
        return math.sqrt(self.var)


def epsilon_grid(prior: GaussianBelief, m: int, half_width: str = "variance") -> np.ndarray:
    """``m`` equally spaced points on ``mu +- var`` (or ``mu +- sigma``)."""
    if m < 2:
        raise ValueError("m must be >= 2")
    if half_width == "variance":
        w = prior.var
    elif half_width == "sigma":
        w = prior.sigma
    else:
        raise ValueError(f"unknown half_width {half_width!r}")
    return np.linspace(prior.mu - w, prior.mu + w, m)


def choose_time(prior: GaussianBelief, dt: float = 0.1, factor: float = 1.8) -> float:
    """``factor / var`` rounded to the nearest positive multiple of ``dt``."""
    steps = max(1, int(math.floor(factor / prior.var / dt + 0.5)))
    return steps * dt


@dataclass
class FitResult:
    amplitude: float
    mu: float
    var: float
    baseline: float = 0.0
    success: bool = True
    message: str = ""

    @classmethod
    def failure(cls, message: str) -> "FitResult":
        return cls(float("nan"), float("nan"), float("nan"), float("nan"), False, message)


def _gauss(x, a, mu, var, c=0.0):
    return a * np.exp(-((x - mu) ** 2) / (2.0 * var)) + c


def gaussian_fit(eps, p, init: GaussianBelief, baseline: bool = True, amplitude_floor: float = 1e-9,
                 max_iter: int = 200, var_hint: float | None = None) -> FitResult:
    """Least-squares fit of ``A exp(-(eps-mu)^2 / (2 var)) [+ c]``.

    Levenberg-Marquardt started from the prior mean and from the grid argmax,
    each with the prior variance and, if given, ``var_hint`` as the width
    guess. A start counts only if it converges with ``var > 0``, ``A`` above
    ``amplitude_floor`` and ``mu`` inside the sampled interval. The start with
    the smallest residual wins.
    """
    x = np.asarray(eps, dtype=float)
    y = np.asarray(p, dtype=float)
    if x.size < 4 or x.size != y.size:
        return FitResult.failure("need at least 4 points")
    if np.ptp(y) <= 0:
        return FitResult.failure("flat probabilities")
    lo, hi = float(x.min()), float(x.max())
    starts = [init.mu]
    j = int(np.argmax(y))
    if abs(x[j] - init.mu) > 1e-12:
        starts.append(float(x[j]))
    widths = [init.var] + ([var_hint] if var_hint else [])
    best = None
    for mu0, v0 in ((m_, w_) for m_ in starts for w_ in widths):
        if baseline:
            p0 = [float(y.max() - y.min()), mu0, v0, float(y.min())]
            fun = lambda q: _gauss(x, q[0], q[1], q[2], q[3]) - y  # noqa: E731
        else:
            p0 = [float(y.max()), mu0, v0]
            fun = lambda q: _gauss(x, q[0], q[1], q[2]) - y  # noqa: E731
        try:
            sol = least_squares(fun, p0, method="lm", max_nfev=max_iter * (len(p0) + 1), xtol=1e-15, ftol=1e-15,
                                gtol=1e-15)
        except (ValueError, FloatingPointError) as exc:
            log.debug("fit start %.4f raised %s", mu0, exc)
            continue
        a, mu, var = sol.x[:3]
        ok = sol.status > 0 and var > 0 and a > amplitude_floor and lo <= mu <= hi and np.all(np.isfinite(sol.x))
        if not ok:
            continue
        cost = float(np.sum(sol.fun**2))
        if best is None or cost < best[0]:
            best = (cost, sol.x)
    if best is None:
        return FitResult.failure("no start converged to an admissible Gaussian")
    q = best[1]
    return FitResult(float(q[0]), float(q[1]), float(q[2]), float(q[3]) if baseline else 0.0)


def bayes_update(prior: GaussianBelief, lh: GaussianBelief) -> GaussianBelief:
    s = prior.var + lh.var
    return GaussianBelief((prior.var * lh.mu + lh.var * prior.mu) / s, prior.var * lh.var / s)


class ProbabilitySource(Protocol):
    n_total: int

    def probabilities(self, epsilons, t: float, noise: NoiseSpec) -> tuple[np.ndarray, np.ndarray]: ...


@dataclass
class EstimatorConfig:
    mu_init: float = 0.0
    var_init: float = 4.0
    m: int = 21
    shots: int | None = 10000  # None: use exact probabilities
    dt: float = 0.1
    p_dep: float = 0.0
    var_threshold: float = 0.005
    max_iter: int = 15
    max_restarts: int = 3
    master_seed: int = 0
    half_width: str = "variance"
    time_factor: float = 1.8
    mu_perturbation: float = 0.01
    fit_baseline: bool = True

    def __post_init__(self):
        if self.var_init <= 0 or self.m < 4 or self.dt <= 0 or self.max_iter < 1:
            raise ValueError("invalid estimator configuration")
        if self.shots is not None and self.shots < 1:
            raise ValueError("shots must be >= 1")
        NoiseSpec(self.p_dep)


@dataclass
class IterationRecord:
    iteration: int
    t: float
    epsilon_grid: list[float]
    p_ideal: list[float]
    p_noisy: list[float]
    p_sampled: list[float]
    fit: dict
    prior: GaussianBelief
    posterior: GaussianBelief | None
    restart: bool = False
    aliasing_ok: bool = True


@dataclass
class EstimationTrace:
    config: dict
    iterations: list[IterationRecord] = field(default_factory=list)
    final: GaussianBelief | None = None
    termination: str = ""
    mode: str = "gap"
    energy_offset: float = 0.0  # fci: energy = offset - mu

    @property
    def estimate(self) -> float:
        if self.final is None:
            return float("nan")
        return self.energy_offset - self.final.mu if self.mode == "fci" else self.final.mu

    @property
    def sigma(self) -> float:
        return self.final.sigma if self.final is not None else float("nan")

    def to_json(self) -> str:
        def belief(b):
            return None if b is None else {"mu": b.mu, "var": b.var}

        its = []
        for r in self.iterations:
            d = asdict(r)
            d["prior"], d["posterior"] = belief(r.prior), belief(r.posterior)
            its.append(d)
        return json.dumps({
            "config": self.config,
            "mode": self.mode,
            "energy_offset": self.energy_offset,
            "iterations": its,
            "final": belief(self.final),
            "estimate": self.estimate,
            "sigma": self.sigma,
            "termination": self.termination,
        }, indent=1, default=float)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf)
        w.writerow(["iteration", "t", "epsilon", "p_ideal", "p_noisy", "p_sampled", "p_sampled_normalized",
                    "mu_lh", "restart"])
        for r in self.iterations:
            peak = max(r.p_sampled) if r.p_sampled else 0.0
            mu_lh = r.fit.get("mu", float("nan"))
            for e, a, b, c in zip(r.epsilon_grid, r.p_ideal, r.p_noisy, r.p_sampled):
                w.writerow([r.iteration, r.t, repr(e), repr(a), repr(b), repr(c), repr(c / peak if peak > 0 else 0.0),
                            repr(mu_lh), int(r.restart)])
        return buf.getvalue()


def _point_rng(master: int, iteration: int, attempt: int, j: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([master, iteration, attempt, j]))


def run_qpde(source: ProbabilitySource, config: EstimatorConfig | None = None, mode: str = "gap",
             energy_offset: float = 0.0) -> EstimationTrace:
    """The estimation loop; ``source`` supplies ideal and noisy probabilities."""
    cfg = config or EstimatorConfig()
    noise = NoiseSpec(cfg.p_dep)
    trace = EstimationTrace(asdict(cfg), mode=mode, energy_offset=energy_offset)
    prior = GaussianBelief(cfg.mu_init, cfg.var_init)
    restarts = 0
    attempt = 0
    restarted = False
    for it in range(1, cfg.max_iter + 1):
        t = choose_time(prior, cfg.dt, cfg.time_factor)
        grid = epsilon_grid(prior, cfg.m, cfg.half_width)
        p0, pn = source.probabilities(grid, t, noise)
        if cfg.shots is None:
            ps = np.array(pn, dtype=float)
        else:
            ps = np.array([_point_rng(cfg.master_seed, it, attempt, j).binomial(cfg.shots, min(max(float(q), 0.0), 1.0))
                           / cfg.shots for j, q in enumerate(pn)])
        aliasing_ok = bool(np.max(np.abs(grid - prior.mu)) * t < math.pi)
        fit = gaussian_fit(grid, ps, prior, baseline=cfg.fit_baseline, var_hint=2.0 / t**2)
        rec = IterationRecord(it, t, grid.tolist(), np.asarray(p0).tolist(), np.asarray(pn).tolist(), ps.tolist(),
                              asdict(fit), prior, None, restarted, aliasing_ok)
        restarted = False
        trace.iterations.append(rec)
        if not fit.success:
            if restarts >= cfg.max_restarts:
                trace.termination = "fit-failed"
                break
            restarts += 1
            attempt += 1
            mu_new = float(grid[int(np.argmax(ps))])
            if abs(mu_new - prior.mu) < 1e-12:
                # the restart would repeat the same grid; nudge it
                mu_new += cfg.mu_perturbation
            log.info("iteration %d: fit failed (%s); restarting at mu=%.6f", it, fit.message, mu_new)
            prior = GaussianBelief(mu_new, prior.var)
            restarted = True
            continue
        post = bayes_update(prior, GaussianBelief(fit.mu, fit.var))
        rec.posterior = post
        trace.final = post
        log.info("iteration %d t=%.1f mu_post=%.6f var_post=%.3e", it, t, post.mu, post.var)
        if post.var <= cfg.var_threshold:
            trace.termination = "converged"
            break
        prior = post
    else:
        trace.termination = "max-iterations"
    if trace.final is None and not trace.termination:
        trace.termination = "fit-failed"
    return trace


def run_fci(source: ProbabilitySource, config: EstimatorConfig | None = None, vacuum_energy: float = 0.0
            ) -> EstimationTrace:
    """Ground-energy mode: the excited branch is the vacuum, the peak sits at ``E_vac - E_g``."""
    return run_qpde(source, config, mode="fci", energy_offset=vacuum_energy)


class AnalyticSource:
    """Exact two-level likelihood ``|a + e^{i eps t} b|^2`` for given energies (tests, demos)."""

    def __init__(self, e_ground: float, e_excited: float, n_total: int, weights=(0.5, 0.5)):
        self.e0, self.e1, self.n_total = e_ground, e_excited, n_total
        self.w = weights

    def probabilities(self, epsilons, t, noise):
        a = self.w[0] * np.exp(-1j * self.e0 * t)
        b = self.w[1] * np.exp(-1j * self.e1 * t)
        eps = np.asarray(epsilons, dtype=float)
        p0 = np.abs(a + np.exp(1j * eps * t) * b) ** 2
        return p0, noise.apply(p0, self.n_total)
