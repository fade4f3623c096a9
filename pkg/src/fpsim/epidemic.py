"""SIS model: derivatives, fixed-step RK4 integration and parameter fitting.

State variables are head counts, so ``beta`` is per person per day and
``gamma`` per day::

    dS/dt = -beta*S*I + gamma*I
    dI/dt =  beta*S*I - gamma*I
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_is_fitted

from .exceptions import IntegrationError
from .validation import check_counts, check_days

DEFAULT_STEP = 0.05
BETA_BOUNDS = (1e-4, 1.0)
GAMMA_BOUNDS = (1e-4, 2.0)


@dataclass
class SISParams:
    beta: float
    gamma: float
    population: float
    residual: float = math.nan
    status: str = "ok"
    iterations: int = 0

    def __post_init__(self):
        if self.beta < 0 or self.gamma < 0:
            raise ValueError("beta and gamma must be non-negative")

    @property
    def endemic_level(self) -> float:
        """Long-run infected count ``N - gamma/beta`` (0 when it would be negative)."""
        if self.beta == 0:
            return 0.0
        return max(self.population - self.gamma / self.beta, 0.0)

    def as_record(self) -> dict:
        def clean(x):
            return None if isinstance(x, float) and not math.isfinite(x) else x

        return {
            "beta": clean(self.beta),
            "gamma": clean(self.gamma),
            "population": self.population,
            "residual": clean(self.residual),
            "status": self.status,
            "iterations": self.iterations,
        }


@dataclass
class SISTrajectory:
    t: np.ndarray
    S: np.ndarray
    I: np.ndarray
    population: float = field(default=0.0)

    def at(self, time: float) -> tuple[float, float]:
        """(S, I) at the grid point nearest ``time``."""
        k = int(np.argmin(np.abs(self.t - time)))
        return float(self.S[k]), float(self.I[k])


def sis_derivatives(S, I, beta, gamma):
    """Return ``(dS/dt, dI/dt)``; works elementwise on arrays."""
    flow = beta * S * I - gamma * I
    return -flow, flow


def _steps(horizon: float, step: float) -> tuple[int, float]:
    if horizon < 0:
        raise ValueError("horizon must be non-negative")
    if step <= 0:
        raise ValueError("step must be positive")
    n = max(1, math.ceil(horizon / step - 1e-9))
    return n, horizon / n


def integrate_sis(
    params: SISParams,
    S0: float,
    I0: float,
    horizon: float,
    step: float = DEFAULT_STEP,
) -> SISTrajectory:
    """Classical fourth-order Runge-Kutta on both compartments.

    The step is shrunk slightly if needed so that ``horizon`` is an exact
    multiple of it.
    """
    if S0 < 0 or I0 < 0:
        raise ValueError("S0 and I0 must be non-negative")
    n_pop = S0 + I0
    if params.population and not math.isclose(n_pop, params.population, rel_tol=1e-12):
        raise ValueError(f"S0 + I0 = {n_pop} but population is {params.population}")
    n, h = _steps(horizon, step)
    beta, gamma = params.beta, params.gamma
    t = np.linspace(0.0, n * h, n + 1)
    S = np.empty(n + 1)
    I = np.empty(n + 1)
    S[0], I[0] = S0, I0
    s, i = float(S0), float(I0)
    for k in range(n):
        ds1, di1 = sis_derivatives(s, i, beta, gamma)
        ds2, di2 = sis_derivatives(s + 0.5 * h * ds1, i + 0.5 * h * di1, beta, gamma)
        ds3, di3 = sis_derivatives(s + 0.5 * h * ds2, i + 0.5 * h * di2, beta, gamma)
        ds4, di4 = sis_derivatives(s + h * ds3, i + h * di3, beta, gamma)
        s += h / 6.0 * (ds1 + 2 * ds2 + 2 * ds3 + ds4)
        i += h / 6.0 * (di1 + 2 * di2 + 2 * di3 + di4)
        if not (math.isfinite(s) and math.isfinite(i)):
            raise IntegrationError(f"non-finite state at t={t[k + 1]:.6g}", time=float(t[k + 1]))
        S[k + 1], I[k + 1] = s, i
    return SISTrajectory(t=t, S=S, I=I, population=n_pop)


def infected_at_days(
    beta, gamma, population: float, I0: float, days: Sequence[int], step: float = DEFAULT_STEP
) -> np.ndarray:
    """Infected counts at integer ``days`` for one or many (beta, gamma) pairs.

    ``beta`` and ``gamma`` broadcast together; the result has shape
    ``broadcast_shape + (len(days),)``. Only ``I`` is integrated here since
    ``S = N - I`` holds exactly under the model.
    """
    beta, gamma = np.broadcast_arrays(np.asarray(beta, float), np.asarray(gamma, float))
    days = np.asarray(days, dtype=int)
    per_day = max(1, round(1.0 / step))
    h = 1.0 / per_day
    i = np.full(beta.shape, float(I0))
    out = np.empty(beta.shape + (len(days),))
    wanted = {int(d): j for j, d in enumerate(days)}
    if 0 in wanted:
        out[..., wanted[0]] = i

    def rate(x):
        return beta * (population - x) * x - gamma * x

    with np.errstate(over="ignore", invalid="ignore"):
        for day in range(1, int(days.max(initial=0)) + 1):
            for _ in range(per_day):
                k1 = rate(i)
                k2 = rate(i + 0.5 * h * k1)
                k3 = rate(i + 0.5 * h * k2)
                k4 = rate(i + h * k3)
                i = i + h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
            if day in wanted:
                out[..., wanted[day]] = i
    return out


def infected_closed_form(beta, gamma, population: float, I0: float, days) -> np.ndarray:
    """Exact solution of the infected equation at ``days``.

    With ``r = beta*N - gamma`` the equation is logistic and solves to
    ``I(t) = I0 / (exp(-r t) + beta*I0*(1 - exp(-r t))/r)``. Broadcasts like
    :func:`infected_at_days`.
    """
    beta, gamma = np.broadcast_arrays(np.asarray(beta, float), np.asarray(gamma, float))
    t = np.asarray(days, dtype=float)
    b = beta[..., None]
    r = (beta * population - gamma)[..., None]
    rt = r * t
    if I0 == 0:
        return np.zeros(rt.shape)
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        safe_r = np.where(r == 0, 1.0, r)
        growth = np.where(np.abs(rt) < 1e-12, t, -np.expm1(-rt) / safe_r)
        out = I0 / (np.exp(-rt) + b * I0 * growth)
    # exp(-rt) overflows only for fast decay, where the true value is 0
    return np.where(np.isfinite(out), out, 0.0)


def _residuals(x, population, I0, days, observed):
    x = np.atleast_2d(x)
    pred = infected_closed_form(np.exp(x[:, 0]), np.exp(x[:, 1]), population, I0, days)
    return pred - observed


def _loss(x, population, I0, days, observed, lo, hi):
    x = np.atleast_2d(x)
    err = np.sum(_residuals(x, population, I0, days, observed) ** 2, axis=-1)
    inside = np.all((x >= lo - 1e-12) & (x <= hi + 1e-12), axis=1)
    return np.where(np.isfinite(err) & inside, err, np.inf)


def _descent_directions(x, population, I0, days, observed, h=1e-6) -> np.ndarray:
    """Two search directions aligned with the local curvature of the loss.

    Eigenvectors of the Gauss-Newton matrix ``J^T J`` (residual Jacobian in
    log space). The flat direction gets the full step and the stiff one a
    proportionally shorter step, so the search can follow the narrow
    beta/gamma valley that defeats axis-aligned moves.
    """
    r0 = _residuals(x, population, I0, days, observed)[0]
    shifted = _residuals(x + np.eye(2) * h, population, I0, days, observed)
    J = ((shifted - r0) / h).T
    if not np.all(np.isfinite(J)):
        return np.eye(2)
    lam, vec = np.linalg.eigh(J.T @ J)
    top = lam.max()
    if top <= 0:
        return np.eye(2)
    lam = np.maximum(lam, top * 1e-12)
    scale = np.sqrt(lam.min() / lam)
    return (vec * scale).T


def fit_sis(
    observed: Sequence[float],
    population: float,
    I0: float,
    days: Sequence[int] | None = None,
    *,
    grid_size: int = 50,
    beta_bounds: tuple[float, float] = BETA_BOUNDS,
    gamma_bounds: tuple[float, float] = GAMMA_BOUNDS,
    max_iter: int = 200,
    tol: float = 1e-8,
) -> SISParams:
    """Least-squares fit of (beta, gamma) to infected counts.

    ``observed[k]`` is the infected count on ``days[k]`` (default
    ``1..len(observed)``); the model starts from ``I0`` at day 0. A
    log-spaced grid search picks the start. Coordinate descent in log space
    then refines it along the local curvature axes, doubling the step after
    a successful move and halving it after a failed one. It stops when the
    relative improvement drops below ``tol`` or after ``max_iter`` rounds.
    """
    observed = check_counts(observed, population, name="observed")
    days = np.arange(1, len(observed) + 1) if days is None else check_days(days, len(observed))
    if len(observed) < 3:
        raise ValueError("need at least 3 observation days to fit")
    if not 0 <= I0 <= population:
        raise ValueError(f"I0={I0} outside [0, {population}]")
    if I0 == 0 or np.all(observed == 0):
        return _degenerate(population)

    lo = np.log([beta_bounds[0], gamma_bounds[0]])
    hi = np.log([beta_bounds[1], gamma_bounds[1]])
    log_b = np.linspace(lo[0], hi[0], grid_size)
    log_g = np.linspace(lo[1], hi[1], grid_size)
    B, G = np.meshgrid(log_b, log_g, indexing="ij")
    cells = np.column_stack([B.ravel(), G.ravel()])
    grid_loss = _loss(cells, population, I0, days, observed, lo, hi)
    k = int(np.argmin(grid_loss))
    x, best = cells[k], float(grid_loss[k])

    delta = float(log_b[1] - log_b[0])
    status = "max_iter"
    it = 0
    for it in range(1, max_iter + 1):
        if best == 0.0:
            status = "ok"
            break
        dirs = _descent_directions(x, population, I0, days, observed)
        cand = np.clip(np.vstack([x + delta * dirs, x - delta * dirs]), lo, hi)
        losses = _loss(cand, population, I0, days, observed, lo, hi)
        j = int(np.argmin(losses))
        if losses[j] < best:
            improvement = (best - losses[j]) / best
            x, best = cand[j], float(losses[j])
            if improvement < tol:
                status = "ok"
                break
            delta *= 2.0
        else:
            delta /= 2.0
            if delta < 1e-12:
                status = "ok"
                break
    return SISParams(
        beta=float(np.exp(x[0])),
        gamma=float(np.exp(x[1])),
        population=population,
        residual=best,
        status=status,
        iterations=it,
    )


def _degenerate(population: float) -> SISParams:
    return SISParams(math.nan, math.nan, population, residual=math.nan, status="degenerate")


def relabel_for_sis(counts) -> tuple[np.ndarray, np.ndarray]:
    """Fold recovered into susceptible: returns ``(S + R, I)`` per day.

    Accepts a trace (anything with ``.counts``) or a sequence of rows with
    ``S``, ``I``, ``R`` attributes or keys.
    """
    rows = getattr(counts, "counts", counts)
    S, I, R = [], [], []
    for row in rows:
        get = row.__getitem__ if isinstance(row, dict) else lambda k, r=row: getattr(r, k)
        S.append(get("S"))
        I.append(get("I"))
        R.append(get("R"))
    S, I, R = (np.asarray(v) for v in (S, I, R))
    return S + R, I


class SISRegressor(RegressorMixin, BaseEstimator):
    """Fit the SIS model to an infected-count time series.

    ``X`` holds day indices (shape ``(n,)`` or ``(n, 1)``), ``y`` the
    infected counts. The day-0 count is the initial condition; pass
    ``initial_infected`` when day 0 is not among the observations.

    Attributes set by ``fit``: ``beta_``, ``gamma_``, ``residual_``,
    ``status_``, ``n_iter_``, ``initial_infected_``.
    """

    def __init__(
        self,
        population=30,
        initial_infected=None,
        grid_size=50,
        beta_bounds=BETA_BOUNDS,
        gamma_bounds=GAMMA_BOUNDS,
        max_iter=200,
        tol=1e-8,
    ):
        self.population = population
        self.initial_infected = initial_infected
        self.grid_size = grid_size
        self.beta_bounds = beta_bounds
        self.gamma_bounds = gamma_bounds
        self.max_iter = max_iter
        self.tol = tol

    def fit(self, X, y):
        days = check_days(X)
        y = check_counts(y, self.population, name="y")
        if len(days) != len(y):
            raise ValueError(f"X has {len(days)} rows but y has {len(y)}")
        if self.initial_infected is not None:
            i0 = float(self.initial_infected)
        elif np.any(days == 0):
            i0 = float(y[days == 0][0])
        else:
            raise ValueError("day 0 missing from X; set initial_infected")
        mask = days > 0
        params = fit_sis(
            y[mask], self.population, i0, days[mask],
            grid_size=self.grid_size,
            beta_bounds=self.beta_bounds, gamma_bounds=self.gamma_bounds,
            max_iter=self.max_iter, tol=self.tol,
        )
        self.params_ = params
        self.beta_ = params.beta
        self.gamma_ = params.gamma
        self.residual_ = params.residual
        self.status_ = params.status
        self.n_iter_ = params.iterations
        self.initial_infected_ = i0
        return self

    def predict(self, X):
        check_is_fitted(self, "params_")
        days = check_days(X)
        if self.status_ == "degenerate":
            return np.zeros(len(days))
        return infected_closed_form(
            self.beta_, self.gamma_, self.population, self.initial_infected_, days
        )
