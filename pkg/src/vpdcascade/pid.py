"""Discrete positional-form PID with conditional-integration anti-windup,
Ziegler-Nichols tuning rules, and relay autotuning.
"""

import math
from dataclasses import dataclass, replace

from .errors import AutotuneError


@dataclass(frozen=True)
class PidGains:
    kp: float
    ki: float
    kd: float


@dataclass(frozen=True)
class PidState:
    integral: float = 0.0  # accumulated error * s, kept within the anti-windup clamp
    prev_error: float = 0.0
    prev_time: float = 0.0
    d_filt: float = 0.0  # first-order filtered derivative, used when d_tau > 0


def pid_step(state, gains, error, dt, out_lo, out_hi, d_tau=0.0):
    """One PID update: returns (output, new_state).

    Positional form u = kp*e + ki*int(e) + kd*de/dt, output clamped to
    [out_lo, out_hi]. The integral accumulates only while the output is
    unsaturated or the error drives it back out of saturation, and the
    I-term alone is clamped to the output span. d_tau > 0 enables a
    first-order derivative filter with that time constant (seconds).
    """
    if dt <= 0.0:
        raise ValueError(f"dt must be positive, got {dt}")
    raw_d = (error - state.prev_error) / dt
    if d_tau > 0.0:
        alpha = dt / (d_tau + dt)
        d = state.d_filt + alpha * (raw_d - state.d_filt)
    else:
        d = raw_d

    # Conditional integration: with the current integral, would the output
    # already sit on a limit in the direction the error is pushing?
    provisional = gains.kp * error + gains.ki * state.integral + gains.kd * d
    integral = state.integral
    pushing_high = provisional >= out_hi and error > 0.0
    pushing_low = provisional <= out_lo and error < 0.0
    if not (pushing_high or pushing_low):
        integral = integral + error * dt
    if gains.ki > 0.0:
        integral = min(max(integral, out_lo / gains.ki), out_hi / gains.ki)

    output = gains.kp * error + gains.ki * integral + gains.kd * d
    output = min(max(output, out_lo), out_hi)
    new_state = PidState(
        integral=integral,
        prev_error=error,
        prev_time=state.prev_time + dt,
        d_filt=d if d_tau > 0.0 else 0.0,
    )
    return output, new_state


def pid_partials(state_before, state_after, error, dt, d_tau=0.0):
    """(du/dKp, du/dKi, du/dKd) for the step just taken: (e, int(e), de/dt)."""
    raw_d = (error - state_before.prev_error) / dt
    if d_tau > 0.0:
        alpha = dt / (d_tau + dt)
        d = state_before.d_filt + alpha * (raw_d - state_before.d_filt)
    else:
        d = raw_d
    return error, state_after.integral, d


def ziegler_nichols(ku, tu):
    """Classic closed-loop ZN PID table from ultimate gain/period."""
    if ku <= 0.0 or tu <= 0.0:
        raise ValueError(f"ultimate gain/period must be positive, got {ku}, {tu}")
    kp = 0.6 * ku
    return PidGains(kp=kp, ki=2.0 * kp / tu, kd=kp * tu / 8.0)


def relay_autotune(
    plant_step,
    setpoint,
    amplitude,
    dt,
    hysteresis=0.0,
    center=0.0,
    max_time=172800.0,
    periods_needed=5,
    period_spread=0.05,
):
    """Relay-feedback experiment: returns (ku, tu).

    plant_step(u, dt) advances the plant one step under input u and returns
    the measured output. The relay switches between center +/- amplitude
    around the setpoint (with optional hysteresis) until `periods_needed`
    consecutive oscillation periods agree within `period_spread`. ku is the
    describing-function estimate 4*amplitude / (pi * oscillation amplitude).
    """
    if amplitude <= 0.0:
        raise ValueError(f"relay amplitude must be positive, got {amplitude}")
    relay_high = True
    switch_up_times = []
    periods = []
    cycle_min = math.inf
    cycle_max = -math.inf
    cycle_amps = []
    t = 0.0
    y = plant_step(center, dt)
    while t < max_time:
        t += dt
        if relay_high and y > setpoint + hysteresis:
            relay_high = False
        elif not relay_high and y < setpoint - hysteresis:
            relay_high = True
            switch_up_times.append(t)
            if len(switch_up_times) >= 2:
                periods.append(switch_up_times[-1] - switch_up_times[-2])
                cycle_amps.append(0.5 * (cycle_max - cycle_min))
            cycle_min = math.inf
            cycle_max = -math.inf
            if len(periods) >= periods_needed:
                recent = periods[-periods_needed:]
                mean_p = sum(recent) / len(recent)
                if (max(recent) - min(recent)) < period_spread * mean_p:
                    amp = sum(cycle_amps[-periods_needed:]) / periods_needed
                    if amp <= 0.0:
                        raise AutotuneError("oscillation amplitude collapsed to zero")
                    ku = 4.0 * amplitude / (math.pi * amp)
                    return ku, mean_p
        u = center + amplitude if relay_high else center - amplitude
        y = plant_step(u, dt)
        cycle_min = min(cycle_min, y)
        cycle_max = max(cycle_max, y)
    raise AutotuneError(
        f"no sustained oscillation within {max_time} s "
        f"({len(periods)} periods observed)"
    )


def reset(state):
    """Fresh state keeping only the clock."""
    return replace(PidState(), prev_time=state.prev_time)
