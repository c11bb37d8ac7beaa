"""Time-dependent coupling envelopes for the adiabatic sweeps.

All rates are in units of g = max gamma_B and times in 1/g.  The default
family modulates the couplings as cos^2 / sin^2 over a single window [0, T]
(phase pi*t/2T), which makes d(theta)/dt vanish at both endpoints.  In the
measurement direction the laser coupling gamma_A starts fully on and the
cavity coupling gamma_B starts at zero (counter-intuitive ordering for the
reversed sweep); the addition direction is the exact time reverse.

A literal four-phase envelope family (A on, B on, A off, B off, in disjoint
quarters with smooth ramps) is provided for comparison; for the ideal
dynamics it is equivalent to the overlapped window because the dark state at
the window end is decoupled from the remaining turn-off.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.optimize import minimize_scalar

MEASUREMENT = "measurement"
ADDITION = "addition"
FAMILIES = ("cos2", "fourphase")


@dataclass(frozen=True)
class PulseSchedule:
    """Coupling envelope pair gamma_A(t), gamma_B(t) on [0, T]."""

    T: float
    gA_max: float = 2.0
    gB_max: float = 1.0
    direction: str = MEASUREMENT
    family: str = "cos2"

    def __post_init__(self):
        if self.T <= 0:
            raise ValueError("schedule duration must be positive")
        if self.direction not in (MEASUREMENT, ADDITION):
            raise ValueError(f"unknown direction {self.direction!r}")
        if self.family not in FAMILIES:
            raise ValueError(f"unknown envelope family {self.family!r}")
        if self.gA_max < 0 or self.gB_max < 0:
            raise ValueError("coupling amplitudes must be non-negative")

    def reversed(self) -> "PulseSchedule":
        other = ADDITION if self.direction == MEASUREMENT else MEASUREMENT
        return replace(self, direction=other)


def _check_t(t: float, schedule: PulseSchedule):
    if t < -1e-12 or t > schedule.T + 1e-12:
        raise ValueError(f"t={t} outside [0, {schedule.T}]")


def _smooth_ramp(u: float) -> float:
    """sin^2 ramp 0 -> 1 on u in [0, 1], flat at both ends."""
    u = min(max(u, 0.0), 1.0)
    return math.sin(math.pi * u / 2) ** 2


def _envelopes_measurement(t: float, schedule: PulseSchedule) -> tuple[float, float]:
    T = schedule.T
    if schedule.family == "cos2":
        x = math.pi * t / (2 * T)
        return schedule.gA_max * math.cos(x) ** 2, schedule.gB_max * math.sin(x) ** 2
    # four-phase: A ramps on, B ramps on, A ramps off, B ramps off
    q = T / 4
    if t < q:
        return schedule.gA_max * _smooth_ramp(t / q), 0.0
    if t < 2 * q:
        return schedule.gA_max, schedule.gB_max * _smooth_ramp((t - q) / q)
    if t < 3 * q:
        return schedule.gA_max * (1.0 - _smooth_ramp((t - 2 * q) / q)), schedule.gB_max
    return 0.0, schedule.gB_max * (1.0 - _smooth_ramp((t - 3 * q) / q))


def envelopes(t: float, schedule: PulseSchedule) -> tuple[float, float]:
    """(gamma_A, gamma_B) at time t."""
    _check_t(t, schedule)
    if schedule.direction == ADDITION:
        t = schedule.T - t
    return _envelopes_measurement(t, schedule)


def gamma_A(t: float, schedule: PulseSchedule) -> float:
    return envelopes(t, schedule)[0]


def gamma_B(t: float, schedule: PulseSchedule) -> float:
    return envelopes(t, schedule)[1]


def envelope_derivatives(t: float, schedule: PulseSchedule) -> tuple[float, float]:
    """(d gamma_A/dt, d gamma_B/dt), analytic for cos2, central-difference
    for the piecewise four-phase family."""
    _check_t(t, schedule)
    sign = 1.0
    if schedule.direction == ADDITION:
        t = schedule.T - t
        sign = -1.0
    if schedule.family == "cos2":
        T = schedule.T
        x = math.pi * t / (2 * T)
        rate = math.pi / (2 * T) * math.sin(2 * x)
        return sign * -schedule.gA_max * rate, sign * schedule.gB_max * rate
    h = schedule.T * 1e-7
    lo, hi = max(t - h, 0.0), min(t + h, schedule.T)
    a_lo, b_lo = _envelopes_measurement(lo, schedule)
    a_hi, b_hi = _envelopes_measurement(hi, schedule)
    return sign * (a_hi - a_lo) / (hi - lo), sign * (b_hi - b_lo) / (hi - lo)


def theta(t: float, n: int, schedule: PulseSchedule) -> float:
    """Mixing angle arctan(sqrt(n) gamma_B / gamma_A) of photon subspace n."""
    if n < 1:
        raise ValueError("theta is defined for photon subspaces n >= 1")
    gA, gB = envelopes(t, schedule)
    return math.atan2(math.sqrt(n) * gB, gA)


def nu(t: float, n: int, schedule: PulseSchedule) -> float:
    """Coupling magnitude sqrt(gamma_A^2 + n gamma_B^2)."""
    if n < 1:
        raise ValueError("nu is defined for photon subspaces n >= 1")
    gA, gB = envelopes(t, schedule)
    return math.hypot(gA, math.sqrt(n) * gB)


def theta_dot(t: float, n: int, schedule: PulseSchedule) -> float:
    """d(theta)/dt from the analytic envelope derivatives."""
    gA, gB = envelopes(t, schedule)
    dA, dB = envelope_derivatives(t, schedule)
    nu2 = gA**2 + n * gB**2
    if nu2 == 0.0:
        return 0.0
    return math.sqrt(n) * (dB * gA - gB * dA) / nu2


def nu_0(n: int, Delta: float, schedule: PulseSchedule, samples: int = 2001) -> float:
    """Minimum over the sweep of sqrt((Delta/2)^2 + nu^2) - Delta/2.

    Dense sampling locates the bracket; a bounded scalar minimization
    refines it.
    """
    if n < 1:
        raise ValueError("n >= 1 required")

    def gap(t: float) -> float:
        v = nu(t, n, schedule)
        return math.sqrt((Delta / 2) ** 2 + v**2) - Delta / 2

    ts = np.linspace(0.0, schedule.T, samples)
    vals = np.array([gap(t) for t in ts])
    k = int(np.argmin(vals))
    lo = ts[max(k - 1, 0)]
    hi = ts[min(k + 1, samples - 1)]
    res = minimize_scalar(gap, bounds=(lo, hi), method="bounded",
                          options={"xatol": schedule.T * 1e-12})
    return float(min(res.fun, vals[k]))
