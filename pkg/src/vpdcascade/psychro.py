"""Psychrometric primitives: saturation pressure, VPD and its sensitivities,
the iso-VPD curve, humidity-ratio conversions, and dew point.

All functions are pure. Temperatures are °C, pressures kPa, relative
humidity percent, humidity ratio kg water per kg dry air.
"""

import math
from dataclasses import dataclass

from .errors import DomainError, InfeasibleVpdError

# Magnus fit constants; the fit is only validated on T_MIN..T_MAX.
MAGNUS_A = 0.6108  # kPa
MAGNUS_B = 17.269
MAGNUS_C = 237.3  # °C
T_MIN = -40.0
T_MAX = 60.0

EPSILON = 0.622  # molecular weight ratio, water vapor / dry air
P_ATM = 101.325  # kPa, default total pressure


def _check_t(t):
    if not (T_MIN <= t <= T_MAX):
        raise DomainError(
            f"temperature {t} °C outside validated Magnus range "
            f"[{T_MIN}, {T_MAX}] °C"
        )


def _check_rh(rh):
    if not (0.0 <= rh <= 100.0):
        raise DomainError(f"relative humidity {rh} % outside [0, 100]")


def saturation_vapor_pressure(t):
    """Saturation vapor pressure e_s(t) in kPa (Magnus form)."""
    _check_t(t)
    return MAGNUS_A * math.exp(MAGNUS_B * t / (t + MAGNUS_C))


def vpd(t, rh):
    """Vapor pressure deficit in kPa at air temperature t and RH percent."""
    _check_rh(rh)
    return saturation_vapor_pressure(t) * (1.0 - rh / 100.0)


def dvpd_dt(t, rh):
    """Partial of VPD w.r.t. temperature, kPa/°C. Non-negative."""
    _check_rh(rh)
    es = saturation_vapor_pressure(t)
    return MAGNUS_B * MAGNUS_C / (t + MAGNUS_C) ** 2 * es * (1.0 - rh / 100.0)


def dvpd_drh(t):
    """Partial of VPD w.r.t. relative humidity, kPa/%RH. Always negative."""
    return -saturation_vapor_pressure(t) / 100.0


def iso_vpd_rh(t, vpd_target):
    """RH (percent) that yields vpd_target at temperature t.

    Raises InfeasibleVpdError when vpd_target exceeds e_s(t), i.e. no RH in
    [0, 100] can produce the requested deficit at this temperature.
    """
    if vpd_target < 0.0:
        raise InfeasibleVpdError(f"VPD target {vpd_target} kPa is negative")
    es = saturation_vapor_pressure(t)
    if vpd_target > es:
        raise InfeasibleVpdError(
            f"VPD target {vpd_target} kPa exceeds max achievable "
            f"{es:.6f} kPa at {t} °C",
            vpd_max=es,
        )
    return 100.0 * (1.0 - vpd_target / es)


def humidity_ratio(t, rh, p_total=P_ATM):
    """Humidity ratio w (kg/kg dry air) from temperature, RH and pressure."""
    _check_rh(rh)
    e = saturation_vapor_pressure(t) * rh / 100.0
    if e >= p_total:
        raise DomainError(
            f"vapor pressure {e:.4f} kPa >= total pressure {p_total} kPa"
        )
    return EPSILON * e / (p_total - e)


def rh_from_humidity_ratio(t, w, p_total=P_ATM):
    """Inverse of humidity_ratio: (rh_percent, supersaturated).

    If the implied RH exceeds 100 the value is clamped to 100 and the
    supersaturation flag is set; the caller decides how to condense.
    """
    if w < 0.0:
        raise DomainError(f"humidity ratio {w} is negative")
    e = w * p_total / (EPSILON + w)
    rh = 100.0 * e / saturation_vapor_pressure(t)
    if rh > 100.0:
        return 100.0, True
    return rh, False


def saturation_humidity_ratio(t, p_total=P_ATM):
    """Humidity ratio of saturated air at temperature t."""
    return humidity_ratio(t, 100.0, p_total)


def dew_point(t, rh):
    """Dew point °C: temperature at which the current vapor pressure saturates."""
    _check_rh(rh)
    if rh == 0.0:
        raise DomainError("dew point undefined at 0% relative humidity")
    e = saturation_vapor_pressure(t) * rh / 100.0
    alpha = math.log(e / MAGNUS_A)
    return MAGNUS_C * alpha / (MAGNUS_B - alpha)


def temperature_at_saturation(e):
    """Invert e_s: temperature (°C) whose saturation pressure equals e (kPa)."""
    if e <= 0.0:
        raise DomainError(f"vapor pressure {e} kPa must be positive")
    alpha = math.log(e / MAGNUS_A)
    return MAGNUS_C * alpha / (MAGNUS_B - alpha)


@dataclass(frozen=True)
class PsychroSample:
    """A (temperature, RH) pair with its derived VPD."""

    t: float
    rh: float
    vpd: float

    @classmethod
    def of(cls, t, rh):
        return cls(t=t, rh=rh, vpd=vpd(t, rh))
