"""Reverse-time samplers for interpolating SDEs.

All solvers integrate the reverse-time family

    dx = [gamma(t)(y - x) - ((1 + kappa^2)/2) g(t)^2 s(x, y, t)] dt
         + kappa g(t) dw_bar,

from a start time T down to a stop time delta on a strictly decreasing grid;
kappa = 0 is the probability-flow ODE. The exponential integrator
(:func:`isde_solve`, order p in {1, 2}) solves the linear mean-reverting part
exactly through the transition factor Psi and pushes the score term through
exponential-weight integrals; the classical baselines (Euler-Maruyama,
predictor-corrector, explicit midpoint, adaptive embedded RK5(4)) discretize
the whole right-hand side.

Randomness is split into independent per-purpose streams derived from a single
integer seed (spawn keys: 0 initial draw, 1 diffusion increments, 2 corrector
noise), so deterministic and stochastic variants of a run share the same
initial state and trajectories are reproducible bitwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .errors import (
    DivergenceError,
    ParameterError,
    ShapeError,
    StiffnessError,
)
from .quadrature import integrate
from .sde_core import InterpolatingSde, SdeKind
from .score import ScoreModel

__all__ = [
    "TimeGrid",
    "SolverSpec",
    "SolveOutput",
    "reverse_init",
    "linear_step",
    "omega_weight",
    "ito_increment",
    "isde_solve",
    "euler_maruyama",
    "pc_sampler",
    "rk2_midpoint",
    "rk45_adaptive",
    "run_solver",
    "nfe_per_step",
]

_SOLVER_KINDS = ("isde", "euler_maruyama", "pc", "rk2", "rk45")


@dataclass(frozen=True)
class TimeGrid:
    """Strictly decreasing, finite, positive solver grid (nodes, not steps)."""

    times: np.ndarray

    def __post_init__(self):
        t = np.array(self.times, dtype=float, copy=True)
        if t.ndim != 1 or t.size < 2:
            raise ParameterError(f"grid needs a 1-d array of >= 2 nodes, got shape {t.shape}")
        if not np.all(np.isfinite(t)):
            raise ParameterError("grid nodes must be finite")
        if not np.all(np.diff(t) < 0.0):
            raise ParameterError("grid nodes must be strictly decreasing")
        if t[-1] <= 0.0:
            raise ParameterError(f"grid must stop above 0, got {t[-1]!r}")
        t.setflags(write=False)
        object.__setattr__(self, "times", t)

    @property
    def n_steps(self) -> int:
        return self.times.size - 1

    @staticmethod
    def uniform(t_start: float, t_end: float, n_nodes: int) -> "TimeGrid":
        if int(n_nodes) < 2:
            raise ParameterError(f"n_nodes must be >= 2, got {n_nodes!r}")
        return TimeGrid(np.linspace(float(t_start), float(t_end), int(n_nodes)))

    @classmethod
    def for_sde(cls, sde: InterpolatingSde, n_nodes: int) -> "TimeGrid":
        """Uniform grid from the schedule's reverse start t_rev down to delta."""
        return cls.uniform(sde.t_rev, sde.delta, n_nodes)


@dataclass(frozen=True)
class SolverSpec:
    """Which sampler to run and its tuning knobs.

    kind is one of "isde", "euler_maruyama", "pc", "rk2", "rk45". Fields not
    read by the chosen kind are ignored (p and kappa drive "isde", kappa
    drives "euler_maruyama", corrector_stepsize drives "pc", rtol/atol drive
    "rk45").
    """

    kind: str
    p: int = 1
    kappa: float = 0.0
    corrector_stepsize: float = 0.5
    rtol: float = 1e-5
    atol: float = 1e-5

    def __post_init__(self):
        if self.kind not in _SOLVER_KINDS:
            raise ParameterError(
                f"unknown solver kind {self.kind!r}; expected one of {_SOLVER_KINDS}")
        if self.p not in (1, 2):
            raise ParameterError(f"p must be 1 or 2, got {self.p!r}")
        if not (math.isfinite(self.kappa) and self.kappa >= 0.0):
            raise ParameterError(f"kappa must be a nonnegative finite real, got {self.kappa!r}")
        if not (math.isfinite(self.corrector_stepsize) and self.corrector_stepsize >= 0.0):
            raise ParameterError(
                f"corrector_stepsize must be nonnegative, got {self.corrector_stepsize!r}")
        if not (self.rtol > 0.0 and self.atol > 0.0):
            raise ParameterError(
                f"rtol and atol must be positive, got {self.rtol!r}, {self.atol!r}")


@dataclass(frozen=True)
class SolveOutput:
    """Result of one reverse run: endpoint, optional node states, model calls, seed."""

    final_state: np.ndarray
    trajectory: np.ndarray | None
    nfe: int
    seed: int


def _channel_rng(seed: int, channel: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=(channel,)))


def reverse_init(sde: InterpolatingSde, y, rng: np.random.Generator, shape=None):
    """Draw the reverse-time start x_T = y + sigma(t_rev) z, z standard normal."""
    ya = np.asarray(y, dtype=float)
    target = ya.shape if shape is None else tuple(shape)
    try:
        np.broadcast_shapes(ya.shape, target)
    except ValueError:
        raise ShapeError(f"y shape {ya.shape} does not broadcast to {target}")
    z = rng.standard_normal(target)
    return ya + float(sde.sigma(sde.t_rev)) * z


def linear_step(sde: InterpolatingSde, x, y, t_from: float, t_to: float):
    """Exact update of the score-free linear part between two times.

    x(t_to) = Phi x(t_from) + (1 - Phi) y with
    Phi = (1 - k(t_to)) / (1 - k(t_from)); integrating backward (t_to < t_from)
    gives Phi > 1, expanding the state away from y.
    """
    t_from = float(t_from)
    t_to = float(t_to)
    if max(t_from, t_to) >= sde.t_max:
        raise ParameterError(f"times must be below the horizon t_max={sde.t_max!r}")
    k_from = float(sde.k(t_from))
    if k_from >= 1.0:
        raise ParameterError(f"k(t_from) reached 1 at t_from={t_from!r}")
    phi = (1.0 - float(sde.k(t_to))) / (1.0 - k_from)
    xa = np.asarray(x, dtype=float)
    ya = np.asarray(y, dtype=float)
    try:
        np.broadcast_shapes(xa.shape, ya.shape)
    except ValueError:
        raise ShapeError(f"x shape {xa.shape} and y shape {ya.shape} do not broadcast")
    out = phi * xa + (1.0 - phi) * ya
    return out if out.ndim else float(out)


def _omega_constants(sde: InterpolatingSde):
    """(C, zeta) with g^2 / (2 (1 - k)) = C e^{zeta t}, for kinds with a closed form."""
    p = sde.params
    if p.kind not in (SdeKind.FOUVE, SdeKind.OUVE):
        return None
    rho = math.log(p.sigma_max / p.sigma_min)
    zeta = 2.0 * rho + p.gamma0
    if p.kind is SdeKind.FOUVE:
        c = p.sigma_min ** 2 * (rho + p.gamma0)
    else:
        c = p.sigma_min ** 2 * rho
    return c, zeta


def omega_weight(sde: InterpolatingSde, n: int, t_from: float, t_to: float,
                 abs_tol: float = 1e-14, rel_tol: float = 1e-10) -> float:
    """Signed exponential weight of the reverse step from t_from down to t_to:

        int_{t_from}^{t_to} [g(u)^2 / (2 (1 - k(u)))] (u - t_from)^n / n! du.

    For n = 0 the integrand is positive, so the descending value is negative;
    for n = 1 the (u - t_from) factor is negative over the step, so the value
    is positive. Closed forms are used for fOUVE and OUVE (integrand
    C e^{zeta u}); other kinds fall back to adaptive quadrature.
    """
    n = int(n)
    if n < 0:
        raise ParameterError(f"weight order n must be >= 0, got {n!r}")
    t_from = float(t_from)
    t_to = float(t_to)
    if t_to > t_from:
        raise ParameterError(
            f"omega_weight integrates downward, need t_to <= t_from, "
            f"got t_to={t_to!r} > t_from={t_from!r}")
    if t_to < 0.0 or t_from >= sde.t_max:
        raise ParameterError(f"times must satisfy 0 <= t_to <= t_from < t_max={sde.t_max!r}")
    if t_to == t_from:
        return 0.0

    closed = _omega_constants(sde)
    if closed is not None and n in (0, 1):
        c, zeta = closed
        th, tl = t_from, t_to
        h = th - tl
        e_lo = math.exp(zeta * tl)
        growth = math.expm1(zeta * h)
        if n == 0:
            # ascending integral c/zeta (e^{zeta th} - e^{zeta tl}), negated
            return -(c / zeta) * e_lo * growth
        # ascending integral about th: c e^{zeta tl} (h - expm1(zeta h)/zeta)/zeta, negated
        return -(c * e_lo / zeta) * (h - growth / zeta)

    def integrand(u: float) -> float:
        omk = 1.0 - float(sde.k(u))
        base = float(sde.g(u)) ** 2 / (2.0 * omk)
        return base * (u - t_from) ** n / math.factorial(n)

    res = integrate(integrand, t_to, t_from, abs_tol=abs_tol, rel_tol=rel_tol)
    return -res.value


def ito_increment(sde: InterpolatingSde, t_from: float, t_to: float,
                  abs_tol: float = 1e-14, rel_tol: float = 1e-10) -> float:
    """Standard deviation of the reverse-step stochastic integral (per unit kappa):

        I = (1 - k(t_to)) sqrt( int_{t_to}^{t_from} (g(u) / (1 - k(u)))^2 du ),

    satisfying I^2 = Phi^2 var(t_from) - var(t_to) with
    Phi = (1 - k(t_to)) / (1 - k(t_from)). Closed forms for fOUVE and OUVE,
    quadrature otherwise.
    """
    t_from = float(t_from)
    t_to = float(t_to)
    if t_to > t_from:
        raise ParameterError(
            f"ito_increment integrates downward, need t_to <= t_from, "
            f"got t_to={t_to!r} > t_from={t_from!r}")
    if t_to < 0.0 or t_from >= sde.t_max:
        raise ParameterError(f"times must satisfy 0 <= t_to <= t_from < t_max={sde.t_max!r}")
    if t_to == t_from:
        return 0.0

    p = sde.params
    omk_lo = 1.0 - float(sde.k(t_to))
    if p.kind in (SdeKind.FOUVE, SdeKind.OUVE):
        rho = math.log(p.sigma_max / p.sigma_min)
        zeta2 = 2.0 * (rho + p.gamma0)
        span = math.exp(zeta2 * t_from) - math.exp(zeta2 * t_to)
        base = p.sigma_min * omk_lo * math.sqrt(span)
        if p.kind is SdeKind.OUVE:
            base *= math.sqrt(rho / (rho + p.gamma0))
        return base

    def integrand(u: float) -> float:
        return (float(sde.g(u)) / (1.0 - float(sde.k(u)))) ** 2

    res = integrate(integrand, t_to, t_from, abs_tol=abs_tol, rel_tol=rel_tol)
    return omk_lo * math.sqrt(max(res.value, 0.0))


def _prepare_state(sde, y, seed, x_init, shape=None):
    rng_init = _channel_rng(seed, 0)
    if x_init is None:
        return np.asarray(reverse_init(sde, y, rng_init, shape=shape), dtype=float)
    x = np.array(x_init, dtype=float, copy=True)
    try:
        np.broadcast_shapes(x.shape, np.shape(np.asarray(y, dtype=float)))
    except ValueError:
        raise ShapeError(
            f"x_init shape {x.shape} does not broadcast with y shape "
            f"{np.shape(np.asarray(y))}")
    return x


def _check_grid(sde: InterpolatingSde, grid: TimeGrid):
    if grid.times[0] > sde.t_rev + 1e-12:
        raise ParameterError(
            f"grid starts at {grid.times[0]!r}, above the reverse start "
            f"t_rev={sde.t_rev!r}")


def _check_finite(x, step_index: int, t: float):
    if not np.all(np.isfinite(x)):
        raise DivergenceError(f"state became non-finite at t={t!r}",
                              step_index=step_index, time=t)


def _half_log_snr(sde: InterpolatingSde, t: float) -> float:
    return math.log((1.0 - float(sde.k(t))) / float(sde.sigma(t)))


def _invert_half_log_snr(sde: InterpolatingSde, target: float,
                         t_lo: float, t_hi: float) -> float:
    # strictly decreasing in t, so the root is bracketed by [t_lo, t_hi]
    return float(brentq(lambda t: _half_log_snr(sde, t) - target, t_lo, t_hi,
                        xtol=1e-14, rtol=4.0 * np.finfo(float).eps))


def isde_solve(sde: InterpolatingSde, model: ScoreModel, y, grid: TimeGrid,
               p: int = 1, kappa: float = 0.0, seed: int = 0, x_init=None,
               keep_trajectory: bool = False) -> SolveOutput:
    """Exponential integrator of order p in {1, 2} for the reverse family.

    Each step solves the linear part exactly and integrates the score term
    against the exponential weights; p = 2 adds a midpoint stage whose finite
    difference supplies the score's time derivative. Score-parameterized
    models are expanded in t; eps-parameterized models are expanded in the
    half-log-SNR variable lambda = ln((1 - k)/sigma), where the order-1 update
    has the closed form Phi x + (1 - Phi) y - (1+kappa^2) sigma_lo expm1(h) eps_hat.
    """
    if p not in (1, 2):
        raise ParameterError(f"p must be 1 or 2, got {p!r}")
    kappa = float(kappa)
    if not (math.isfinite(kappa) and kappa >= 0.0):
        raise ParameterError(f"kappa must be a nonnegative finite real, got {kappa!r}")
    _check_grid(sde, grid)
    seed = int(seed)
    x = _prepare_state(sde, y, seed, x_init)
    rng_ito = _channel_rng(seed, 1)
    ya = np.asarray(y, dtype=float)
    eps_mode = getattr(model, "parameterization", "score") == "eps"
    times = grid.times
    calls = 0
    traj = [np.array(x, copy=True)] if keep_trajectory else None

    for i in range(times.size - 1):
        th = float(times[i])
        tl = float(times[i + 1])
        k_hi = float(sde.k(th))
        k_lo = float(sde.k(tl))
        phi = (1.0 - k_lo) / (1.0 - k_hi)
        out_hi = np.asarray(model(x, ya, th), dtype=float)
        calls += 1

        if not eps_mode:
            w0 = -omega_weight(sde, 0, th, tl)
            if p == 1:
                corr = out_hi * w0
            else:
                tm = 0.5 * (th + tl)
                k_m = float(sde.k(tm))
                phi_m = (1.0 - k_m) / (1.0 - k_hi)
                w0_half = -omega_weight(sde, 0, th, tm)
                x_mid = phi_m * x + (1.0 - phi_m) * ya + (1.0 - k_m) * out_hi * w0_half
                s_mid = np.asarray(model(x_mid, ya, tm), dtype=float)
                calls += 1
                s_dot = (out_hi - s_mid) / (th - tm)
                w1 = -omega_weight(sde, 1, th, tl)
                corr = out_hi * w0 + s_dot * w1
            x = phi * x + (1.0 - phi) * ya + (1.0 + kappa ** 2) * (1.0 - k_lo) * corr
        else:
            lam_hi = _half_log_snr(sde, th)
            lam_lo = _half_log_snr(sde, tl)
            h = lam_lo - lam_hi  # positive: lambda decreases with t
            sig_lo = float(sde.sigma(tl))
            if p == 1:
                step_term = sig_lo * math.expm1(h) * out_hi
            else:
                lam_mid = 0.5 * (lam_hi + lam_lo)
                tm = _invert_half_log_snr(sde, lam_mid, tl, th)
                k_m = float(sde.k(tm))
                phi_m = (1.0 - k_m) / (1.0 - k_hi)
                x_mid = (phi_m * x + (1.0 - phi_m) * ya
                         - float(sde.sigma(tm)) * math.expm1(0.5 * h) * out_hi)
                eps_mid = np.asarray(model(x_mid, ya, tm), dtype=float)
                calls += 1
                eps_dot = (out_hi - eps_mid) / (lam_hi - lam_mid)
                # (1 - k_lo) omega0 = sigma_lo expm1(h); (1 - k_lo) omega1 = sigma_lo (expm1(h) - h)
                step_term = sig_lo * (math.expm1(h) * out_hi
                                      + (math.expm1(h) - h) * eps_dot)
            x = phi * x + (1.0 - phi) * ya - (1.0 + kappa ** 2) * step_term

        if kappa > 0.0:
            incr = ito_increment(sde, th, tl)
            x = x + kappa * incr * rng_ito.standard_normal(np.shape(x))
        _check_finite(x, i, tl)
        if keep_trajectory:
            traj.append(np.array(x, copy=True))

    trajectory = np.array(traj) if keep_trajectory else None
    return SolveOutput(final_state=x, trajectory=trajectory, nfe=calls, seed=seed)


def _score_eval(model: ScoreModel, sde: InterpolatingSde):
    """Evaluate a model as a score regardless of its parameterization."""
    if getattr(model, "parameterization", "score") == "eps":
        def fn(x, y, t):
            return -np.asarray(model(x, y, t), dtype=float) / float(sde.sigma(t))
        return fn

    def fn(x, y, t):
        return np.asarray(model(x, y, t), dtype=float)
    return fn


def euler_maruyama(sde: InterpolatingSde, model: ScoreModel, y, grid: TimeGrid,
                   kappa: float = 1.0, seed: int = 0, x_init=None,
                   keep_trajectory: bool = False) -> SolveOutput:
    """Euler-Maruyama discretization of the reverse family (kappa = 0: Euler ODE).

    One model call per step, evaluated at the left (larger-time) node.
    """
    kappa = float(kappa)
    if not (math.isfinite(kappa) and kappa >= 0.0):
        raise ParameterError(f"kappa must be a nonnegative finite real, got {kappa!r}")
    _check_grid(sde, grid)
    seed = int(seed)
    x = _prepare_state(sde, y, seed, x_init)
    rng_ito = _channel_rng(seed, 1)
    ya = np.asarray(y, dtype=float)
    score = _score_eval(model, sde)
    times = grid.times
    calls = 0
    traj = [np.array(x, copy=True)] if keep_trajectory else None

    for i in range(times.size - 1):
        th = float(times[i])
        tl = float(times[i + 1])
        dt = tl - th  # negative
        s = score(x, ya, th)
        calls += 1
        g2 = float(sde.g(th)) ** 2
        rhs = float(sde.gamma(th)) * (ya - x) - 0.5 * (1.0 + kappa ** 2) * g2 * s
        x = x + rhs * dt
        if kappa > 0.0:
            x = x + kappa * float(sde.g(th)) * math.sqrt(-dt) \
                * rng_ito.standard_normal(np.shape(x))
        _check_finite(x, i, tl)
        if keep_trajectory:
            traj.append(np.array(x, copy=True))

    trajectory = np.array(traj) if keep_trajectory else None
    return SolveOutput(final_state=x, trajectory=trajectory, nfe=calls, seed=seed)


def pc_sampler(sde: InterpolatingSde, model: ScoreModel, y, grid: TimeGrid,
               corrector_stepsize: float = 0.5, seed: int = 0, x_init=None,
               keep_trajectory: bool = False) -> SolveOutput:
    """Predictor-corrector sampler: Euler-Maruyama (kappa = 1) predictor plus
    one Langevin corrector sweep per node.

    The corrector step size is eta = 2 (r sigma(t))^2 with r the
    corrector_stepsize ratio; r = 0 reproduces the predictor exactly (the
    corrector model call still happens, so NFE is 2 per step). Corrector noise
    comes from its own stream, leaving the predictor's draws unchanged.
    """
    r = float(corrector_stepsize)
    if not (math.isfinite(r) and r >= 0.0):
        raise ParameterError(f"corrector_stepsize must be nonnegative, got {r!r}")
    _check_grid(sde, grid)
    seed = int(seed)
    x = _prepare_state(sde, y, seed, x_init)
    rng_ito = _channel_rng(seed, 1)
    rng_corr = _channel_rng(seed, 2)
    ya = np.asarray(y, dtype=float)
    score = _score_eval(model, sde)
    times = grid.times
    calls = 0
    traj = [np.array(x, copy=True)] if keep_trajectory else None

    for i in range(times.size - 1):
        th = float(times[i])
        tl = float(times[i + 1])
        dt = tl - th
        s = score(x, ya, th)
        calls += 1
        g_hi = float(sde.g(th))
        rhs = float(sde.gamma(th)) * (ya - x) - g_hi ** 2 * s
        x = x + rhs * dt + g_hi * math.sqrt(-dt) * rng_ito.standard_normal(np.shape(x))
        s_corr = score(x, ya, tl)
        calls += 1
        eta = 2.0 * (r * float(sde.sigma(tl))) ** 2
        x = x + eta * s_corr + math.sqrt(2.0 * eta) * rng_corr.standard_normal(np.shape(x))
        _check_finite(x, i, tl)
        if keep_trajectory:
            traj.append(np.array(x, copy=True))

    trajectory = np.array(traj) if keep_trajectory else None
    return SolveOutput(final_state=x, trajectory=trajectory, nfe=calls, seed=seed)


def rk2_midpoint(sde: InterpolatingSde, model: ScoreModel, y, grid: TimeGrid,
                 seed: int = 0, x_init=None, keep_trajectory: bool = False) -> SolveOutput:
    """Explicit midpoint rule on the probability-flow ODE (two model calls per step)."""
    _check_grid(sde, grid)
    seed = int(seed)
    x = _prepare_state(sde, y, seed, x_init)
    ya = np.asarray(y, dtype=float)
    score = _score_eval(model, sde)
    times = grid.times
    calls = 0
    traj = [np.array(x, copy=True)] if keep_trajectory else None

    def rhs(state, t):
        return (float(sde.gamma(t)) * (ya - state)
                - 0.5 * float(sde.g(t)) ** 2 * score(state, ya, t))

    for i in range(times.size - 1):
        th = float(times[i])
        tl = float(times[i + 1])
        dt = tl - th
        f1 = rhs(x, th)
        calls += 1
        x_mid = x + 0.5 * dt * f1
        f2 = rhs(x_mid, 0.5 * (th + tl))
        calls += 1
        x = x + dt * f2
        _check_finite(x, i, tl)
        if keep_trajectory:
            traj.append(np.array(x, copy=True))

    trajectory = np.array(traj) if keep_trajectory else None
    return SolveOutput(final_state=x, trajectory=trajectory, nfe=calls, seed=seed)


# Dormand-Prince 5(4) tableau
_DP_C = (0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0)
_DP_A = (
    (),
    (1.0 / 5.0,),
    (3.0 / 40.0, 9.0 / 40.0),
    (44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0),
    (19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0),
    (9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0),
    (35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0),
)
_DP_B5 = (35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0,
          11.0 / 84.0, 0.0)
_DP_B4 = (5179.0 / 57600.0, 0.0, 7571.0 / 16695.0, 393.0 / 640.0,
          -92097.0 / 339200.0, 187.0 / 2100.0, 1.0 / 40.0)


def rk45_adaptive(sde: InterpolatingSde, model: ScoreModel, y, t_start: float,
                  t_end: float, rtol: float = 1e-5, atol: float = 1e-5,
                  seed: int = 0, x_init=None, max_steps: int = 10_000,
                  keep_trajectory: bool = False) -> SolveOutput:
    """Adaptive embedded RK5(4) on the probability-flow ODE, integrating from
    t_start down to t_end with a PI step controller.

    Seven model calls per attempted step. Raises StiffnessError when the step
    budget is exhausted or the step size underflows, DivergenceError when the
    state or a stage becomes non-finite.
    """
    t_start = float(t_start)
    t_end = float(t_end)
    if not (t_start > t_end > 0.0):
        raise ParameterError(f"need t_start > t_end > 0, got {t_start!r}, {t_end!r}")
    if t_start > sde.t_rev + 1e-12:
        raise ParameterError(
            f"t_start={t_start!r} is above the reverse start t_rev={sde.t_rev!r}")
    rtol = float(rtol)
    atol = float(atol)
    if not (rtol > 0.0 and atol > 0.0):
        raise ParameterError(f"rtol and atol must be positive, got {rtol!r}, {atol!r}")
    max_steps = int(max_steps)
    if max_steps < 1:
        raise ParameterError(f"max_steps must be >= 1, got {max_steps!r}")

    seed = int(seed)
    x = _prepare_state(sde, y, seed, x_init)
    ya = np.asarray(y, dtype=float)
    score = _score_eval(model, sde)
    calls = 0
    traj = [np.array(x, copy=True)] if keep_trajectory else None

    def rhs(state, t):
        out = (float(sde.gamma(t)) * (ya - state)
               - 0.5 * float(sde.g(t)) ** 2 * score(state, ya, t))
        return np.asarray(out, dtype=float)

    t = t_start
    h = (t_end - t_start) / 100.0  # negative
    err_prev = 1.0
    attempts = 0
    # an accepted step can land within one ulp of t_end; treat that as arrival
    # so the final clamped step cannot underflow
    done_gap = 1e-13 * max(abs(t_start), abs(t_end), 1.0)
    while t - t_end > done_gap:
        if attempts >= max_steps:
            raise StiffnessError(
                f"step budget {max_steps} exhausted at t={t!r} "
                f"(rtol={rtol!r}, atol={atol!r})")
        if t + h < t_end:
            h = t_end - t
        if abs(h) < 1e-14 * max(abs(t), 1.0):
            raise StiffnessError(f"step size underflow at t={t!r} (h={h!r})")

        stages = []
        for idx in range(7):
            xi = x
            for j, a in enumerate(_DP_A[idx]):
                if a != 0.0:
                    xi = xi + h * a * stages[j]
            ki = rhs(xi, t + _DP_C[idx] * h)
            calls += 1
            if not np.all(np.isfinite(ki)):
                raise DivergenceError(f"stage derivative non-finite at t={t!r}",
                                      step_index=attempts, time=t)
            stages.append(ki)
        attempts += 1

        x5 = x
        x4 = x
        for j in range(7):
            if _DP_B5[j] != 0.0:
                x5 = x5 + h * _DP_B5[j] * stages[j]
            if _DP_B4[j] != 0.0:
                x4 = x4 + h * _DP_B4[j] * stages[j]
        if not np.all(np.isfinite(x5)):
            raise DivergenceError(f"state became non-finite at t={t + h!r}",
                                  step_index=attempts, time=t + h)

        scale = atol + rtol * np.maximum(np.abs(x), np.abs(x5))
        diff = (x5 - x4) / scale
        err = math.sqrt(float(np.mean(np.square(diff))))
        if err <= 1.0:
            t = t + h
            x = x5
            if keep_trajectory:
                traj.append(np.array(x, copy=True))
            err = max(err, 1e-10)
            fac = 0.9 * err ** -0.14 * err_prev ** 0.08
            fac = min(10.0, max(0.2, fac))
            err_prev = err
            h = h * fac
        else:
            fac = max(0.2, 0.9 * err ** -0.2)
            h = h * fac

    trajectory = np.array(traj) if keep_trajectory else None
    return SolveOutput(final_state=x, trajectory=trajectory, nfe=calls, seed=seed)


def run_solver(sde: InterpolatingSde, model: ScoreModel, y, grid: TimeGrid,
               spec: SolverSpec, seed: int = 0, x_init=None,
               keep_trajectory: bool = False) -> SolveOutput:
    """Dispatch one reverse run according to ``spec``.

    For "rk45" only the grid endpoints are used (the step sequence is chosen
    adaptively).
    """
    if spec.kind == "isde":
        return isde_solve(sde, model, y, grid, p=spec.p, kappa=spec.kappa, seed=seed,
                          x_init=x_init, keep_trajectory=keep_trajectory)
    if spec.kind == "euler_maruyama":
        return euler_maruyama(sde, model, y, grid, kappa=spec.kappa, seed=seed,
                              x_init=x_init, keep_trajectory=keep_trajectory)
    if spec.kind == "pc":
        return pc_sampler(sde, model, y, grid, corrector_stepsize=spec.corrector_stepsize,
                          seed=seed, x_init=x_init, keep_trajectory=keep_trajectory)
    if spec.kind == "rk2":
        return rk2_midpoint(sde, model, y, grid, seed=seed, x_init=x_init,
                            keep_trajectory=keep_trajectory)
    if spec.kind == "rk45":
        return rk45_adaptive(sde, model, y, float(grid.times[0]), float(grid.times[-1]),
                             rtol=spec.rtol, atol=spec.atol, seed=seed, x_init=x_init,
                             keep_trajectory=keep_trajectory)
    raise ParameterError(f"unknown solver kind {spec.kind!r}")


def nfe_per_step(spec: SolverSpec):
    """Model calls per grid step for fixed-grid solvers; None for adaptive ones."""
    if spec.kind == "isde":
        return spec.p
    if spec.kind == "euler_maruyama":
        return 1
    if spec.kind in ("pc", "rk2"):
        return 2
    return None
