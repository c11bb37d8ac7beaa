"""Adiabatic error analysis in the dark/bright frame.

Within each invariant triplet span{|g,n-1>, |e,n-1>, |g',n>} the dynamics is
rewritten in the instantaneous basis {|a(t)>, |b(t)>, |e>} with

    |a(t)> = sin(theta)|g,n-1> - cos(theta)|g',n>,
    |b(t)> = cos(theta)|g,n-1> + sin(theta)|g',n>,

giving the amplitude equations

    da/dt =  theta_dot * b
    db/dt = -theta_dot * a - i nu e
    de/dt = -i nu b - i Delta e

and, in projective coordinates kb = b/a, ke = e/a,

    dkb/dt = -theta_dot - i nu ke - theta_dot kb^2
    dke/dt = -i nu kb - i Delta ke - theta_dot kb ke.

The asymptotic solutions kb = -i theta_dot Delta / nu^2, ke = i theta_dot/nu
(up to O((nu0 T)^-2)) and the phase phi = -Delta * integral(theta_dot^2/nu^2)
are evaluated in closed form.  Everything here is solved with scipy's own
integrator, deliberately independent of the package's sweep kernel, so the
two routes cross-validate each other.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad, solve_ivp

from . import pulses
from .dynamics import SystemConfig
from .errors import ToleranceNotMetError, VacuumProbeError
from .fock import HilbertSpace, PureState
from .pulses import PulseSchedule

KAPPA_GUARD = 1e3


@dataclass(frozen=True)
class AdiabaticReport:
    """Numerical vs asymptotic Appendix-style quantities for one (n, T)."""

    n: int
    T: float
    nu0: float
    kappa_b_end: complex
    kappa_e_end: complex
    kappa_b_pred: complex
    kappa_e_pred: complex
    phi_pred: float
    phi_num: float
    p_diabatic: float


def dark_bright_basis(n: int, t: float, schedule: PulseSchedule,
                      space: HilbertSpace) -> tuple[PureState, PureState, PureState]:
    """Instantaneous (|a>, |b>, |e>) triple embedded in the full space."""
    if n < 1:
        raise ValueError("n >= 1 required")
    th = pulses.theta(t, n, schedule)
    a = np.zeros(space.dim, dtype=complex)
    b = np.zeros(space.dim, dtype=complex)
    e = np.zeros(space.dim, dtype=complex)
    a[space.index("g", n - 1)] = math.sin(th)
    a[space.index("gp", n)] = -math.cos(th)
    b[space.index("g", n - 1)] = math.cos(th)
    b[space.index("gp", n)] = math.sin(th)
    e[space.index("e", n - 1)] = 1.0
    return PureState(space, a), PureState(space, b), PureState(space, e)


def _frame_functions(n: int, config: SystemConfig):
    sch = config.schedule

    def th_dot(t):
        return pulses.theta_dot(t, n, sch)

    def nu_t(t):
        return pulses.nu(t, n, sch)

    return th_dot, nu_t


@dataclass(frozen=True)
class AmplitudeSolution:
    t: np.ndarray
    alpha_a: np.ndarray
    alpha_b: np.ndarray
    alpha_e: np.ndarray


def amplitude_odes_evolve(n: int, config: SystemConfig, sample_times=None,
                          rtol: float = 1e-11, atol: float = 1e-13) -> AmplitudeSolution:
    """Solve the (alpha_a, alpha_b, alpha_e) equations from the dark state."""
    th_dot, nu_t = _frame_functions(n, config)
    Delta = config.Delta
    T = config.schedule.T

    def rhs(t, y):
        aa, ab, ae = y
        td, v = th_dot(t), nu_t(t)
        return [td * ab, -td * aa - 1j * v * ae, -1j * v * ab - 1j * Delta * ae]

    t_eval = None if sample_times is None else np.asarray(sample_times, dtype=float)
    sol = solve_ivp(rhs, (0.0, T), np.array([1.0, 0.0, 0.0], dtype=complex),
                    method="DOP853", rtol=rtol, atol=atol, t_eval=t_eval, dense_output=False)
    if not sol.success:
        raise ToleranceNotMetError(f"amplitude ODE solver failed: {sol.message}")
    norm = np.abs(sol.y[0]) ** 2 + np.abs(sol.y[1]) ** 2 + np.abs(sol.y[2]) ** 2
    if np.max(np.abs(norm - 1.0)) > 1e-9:
        raise ToleranceNotMetError(f"amplitude norm drift {np.max(np.abs(norm - 1.0)):.2e}")
    return AmplitudeSolution(t=sol.t, alpha_a=sol.y[0], alpha_b=sol.y[1], alpha_e=sol.y[2])


@dataclass(frozen=True)
class ProjectiveSolution:
    t: np.ndarray
    kappa_b: np.ndarray
    kappa_e: np.ndarray


def projective_odes_evolve(n: int, config: SystemConfig, sample_times=None,
                           rtol: float = 1e-11, atol: float = 1e-13) -> ProjectiveSolution:
    """Solve the projective-coordinate equations (kb, ke) from (0, 0)."""
    th_dot, nu_t = _frame_functions(n, config)
    Delta = config.Delta
    T = config.schedule.T

    def rhs(t, y):
        kb, ke = y
        td, v = th_dot(t), nu_t(t)
        return [-td - 1j * v * ke - td * kb**2,
                -1j * v * kb - 1j * Delta * ke - td * kb * ke]

    def blow_up(t, y):
        return KAPPA_GUARD - max(abs(y[0]), abs(y[1]))

    blow_up.terminal = True
    t_eval = None if sample_times is None else np.asarray(sample_times, dtype=float)
    sol = solve_ivp(rhs, (0.0, T), np.array([0.0, 0.0], dtype=complex),
                    method="DOP853", rtol=rtol, atol=atol, t_eval=t_eval, events=blow_up)
    if sol.status == 1:
        raise VacuumProbeError("projective coordinates blew up (alpha_a near zero)")
    if not sol.success:
        raise ToleranceNotMetError(f"projective ODE solver failed: {sol.message}")
    return ProjectiveSolution(t=sol.t, kappa_b=sol.y[0], kappa_e=sol.y[1])


def asymptotic_kappas(n: int, t: float, config: SystemConfig) -> tuple[complex, complex]:
    """Leading-order (kb, ke); both vanish wherever d(theta)/dt does."""
    td = pulses.theta_dot(t, n, config.schedule)
    v = pulses.nu(t, n, config.schedule)
    return -1j * td * config.Delta / v**2, 1j * td / v


def phase_shift(n: int, config: SystemConfig) -> tuple[float, float]:
    """(phi_pred, phi_num): quadrature prediction vs arg(alpha_a(T))."""
    th_dot, nu_t = _frame_functions(n, config)
    T = config.schedule.T
    if config.Delta == 0.0:
        phi_pred = 0.0
    else:
        integral, _ = quad(lambda t: th_dot(t) ** 2 / nu_t(t) ** 2, 0.0, T, limit=400)
        phi_pred = -config.Delta * integral
    sol = amplitude_odes_evolve(n, config)
    phi_num = cmath.phase(sol.alpha_a[-1])
    return phi_pred, phi_num


def diabatic_probability(n: int, config: SystemConfig) -> float:
    """Final population outside the dark state, from the amplitude ODEs."""
    sol = amplitude_odes_evolve(n, config)
    return float(abs(sol.alpha_b[-1]) ** 2 + abs(sol.alpha_e[-1]) ** 2)


@dataclass(frozen=True)
class ScalingFit:
    slope: float
    intercept: float
    T_values: np.ndarray
    leakages: np.ndarray
    window: tuple[int, int]


def _stable_window(log_t: np.ndarray, log_p: np.ndarray, rel_tol: float = 0.10) -> tuple[int, int]:
    """Largest contiguous index window whose local log-log slopes agree to
    rel_tol with their own mean; falls back to the full range."""
    local = np.diff(log_p) / np.diff(log_t)
    best = (0, len(log_t) - 1)
    best_len = 0
    for i in range(len(local)):
        for j in range(i + 1, len(local) + 1):
            seg = local[i:j]
            mean = np.mean(seg)
            if mean == 0:
                continue
            if np.max(np.abs(seg - mean)) <= rel_tol * abs(mean) and j - i > best_len:
                best, best_len = (i, j), j - i
    return best


def diabatic_scaling_fit(n: int, T_list, config: SystemConfig) -> ScalingFit:
    """Log-log slope of the diabatic probability against sweep time."""
    T_values = np.sort(np.asarray(T_list, dtype=float))
    leakages = []
    for T in T_values:
        cfg = config.with_schedule(
            pulses.PulseSchedule(T=float(T), gA_max=config.schedule.gA_max,
                                 gB_max=config.schedule.gB_max,
                                 direction=config.schedule.direction,
                                 family=config.schedule.family))
        leakages.append(diabatic_probability(n, cfg))
    leakages = np.array(leakages)
    log_t, log_p = np.log(T_values), np.log(leakages)
    i, j = _stable_window(log_t, log_p)
    slope, intercept = np.polyfit(log_t[i:j + 1], log_p[i:j + 1], 1)
    return ScalingFit(slope=float(slope), intercept=float(intercept),
                      T_values=T_values, leakages=leakages, window=(i, j))


def adiabatic_report(n: int, config: SystemConfig) -> AdiabaticReport:
    """Bundle the numerical and asymptotic quantities for one (n, T)."""
    T = config.schedule.T
    nu0 = pulses.nu_0(n, config.Delta, config.schedule)
    proj = projective_odes_evolve(n, config)
    kb_pred, ke_pred = asymptotic_kappas(n, T, config)
    phi_pred, phi_num = phase_shift(n, config)
    return AdiabaticReport(
        n=n, T=T, nu0=nu0,
        kappa_b_end=complex(proj.kappa_b[-1]), kappa_e_end=complex(proj.kappa_e[-1]),
        kappa_b_pred=kb_pred, kappa_e_pred=ke_pred,
        phi_pred=phi_pred, phi_num=phi_num,
        p_diabatic=diabatic_probability(n, config),
    )
