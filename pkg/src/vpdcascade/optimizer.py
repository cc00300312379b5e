"""Energy-optimal setpoint selection on the iso-VPD curve.

The VPD constraint pins RH to the curve, so picking setpoints is a 1D
search over the temperature setpoint. The cost model is thermal
conduction duty divided by a temperature-dependent COP plus a
dehumidification term driven by the outdoor-indoor RH deficit.
"""

import math
from dataclasses import dataclass

from . import psychro
from .errors import BoundActiveError, InfeasibleVpdError

GRID_STEP = 0.25  # coarse bracketing grid, °C
REFINE_TOL = 0.005  # golden-section bracket width, °C
TIE_CENTER = 24.0  # deterministic tie-break target, °C


@dataclass
class EnergyModelParams:
    ua: float = 2.5  # thermal conductance, kW/°C
    cop_curve: tuple = (4.5, -0.05, 0.0)  # COP(t_out) quadratic coefficients
    cop_lo: float = 1.5
    cop_hi: float = 5.0
    cop_dehum: float = 2.5
    l_v: float = 2450.0  # latent heat, kJ/kg
    moisture_rate_coeff: float = 0.2  # kg/h of removal per %RH deficit
    t_min: float = 18.0
    t_max: float = 30.0

    def __post_init__(self):
        if self.t_min >= self.t_max:
            raise ValueError("t_min must be below t_max")
        if self.cop_lo < 1.0:
            raise ValueError("COP clamp must keep COP >= 1")


@dataclass(frozen=True)
class Setpoints:
    t_sp: float
    rh_sp: float
    vpd_target: float
    predicted_cost: float  # kW


@dataclass(frozen=True)
class KktDiagnostics:
    lam: float  # Lagrange multiplier estimate, kW/kPa
    stationarity_residual: float  # kW/°C
    active_bound: str | None  # None | "lower" | "upper"


@dataclass(frozen=True)
class MarginalBalance:
    dj_thermal: float  # kW/°C along the curve
    dj_dehum: float  # kW/°C along the curve
    lam: float  # kW/kPa
    kink: bool
    one_sided: tuple | None  # (left slope, right slope) of total J when kinked


def cop(t_out, params):
    """Clamped quadratic COP of the heat pump at outdoor temperature t_out."""
    c0, c1, c2 = params.cop_curve
    value = c0 + c1 * t_out + c2 * t_out * t_out
    return min(max(value, params.cop_lo), params.cop_hi)


def _q_thermal(t_sp, weather, params):
    return params.ua * abs(t_sp - weather.t_out) / cop(weather.t_out, params)


def _q_dehum(rh_sp, weather, params):
    deficit = max(0.0, weather.rh_out - rh_sp)
    # l_v [kJ/kg] * coeff [kg/h/%RH] * deficit [%RH] -> kJ/h -> kW
    return params.l_v * params.moisture_rate_coeff * deficit / params.cop_dehum / 3600.0


def energy_cost(t_sp, weather, params, vpd_target):
    """Predicted electrical power (kW) to hold (t_sp, RH on the curve)."""
    rh_sp = psychro.iso_vpd_rh(t_sp, vpd_target)
    return _q_thermal(t_sp, weather, params) + _q_dehum(rh_sp, weather, params)


def feasible_interval(params, vpd_target):
    """Temperature span within [t_min, t_max] where the curve has RH in [0, 100]."""
    if vpd_target < 0.0:
        raise InfeasibleVpdError(f"VPD target {vpd_target} kPa is negative")
    lo, hi = params.t_min, params.t_max
    vpd_ceiling = psychro.saturation_vapor_pressure(hi)
    if vpd_target > vpd_ceiling:
        raise InfeasibleVpdError(
            f"VPD target {vpd_target} kPa infeasible for t_sp in "
            f"[{lo}, {hi}] °C; achievable range is [0, {vpd_ceiling:.6f}] kPa",
            vpd_max=vpd_ceiling,
        )
    if vpd_target > psychro.saturation_vapor_pressure(lo):
        lo = psychro.temperature_at_saturation(vpd_target)
    return lo, hi


def _golden(f, a, b, tol):
    """Golden-section minimum of f on [a, b] to bracket width tol."""
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    x1 = b - invphi * (b - a)
    x2 = a + invphi * (b - a)
    f1, f2 = f(x1), f(x2)
    while (b - a) > tol:
        if f1 <= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - invphi * (b - a)
            f1 = f(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + invphi * (b - a)
            f2 = f(x2)
    return 0.5 * (a + b)


def _dehum_extinction_t(weather, vpd_target):
    """Temperature where the curve's RH meets rh_out (the max() kink)."""
    if weather.rh_out >= 100.0 or weather.rh_out <= 0.0:
        return None
    es_needed = vpd_target / (1.0 - weather.rh_out / 100.0)
    try:
        return psychro.temperature_at_saturation(es_needed)
    except Exception:
        return None


def optimize_setpoint(vpd_target, weather, params):
    """Global minimizer of the energy cost on the feasible curve segment.

    Coarse 0.25 °C grid brackets every local basin; each basin is refined
    by golden section; the nondifferentiable candidates (t_out, the
    dehumidification extinction point, the interval ends) are evaluated
    exactly. Ties go to the candidate nearest 24 °C.
    """
    a, b = feasible_interval(params, vpd_target)

    def j(t):
        return energy_cost(t, weather, params, vpd_target)

    n = max(2, int(math.ceil((b - a) / GRID_STEP)) + 1)
    ts = [a + (b - a) * i / (n - 1) for i in range(n)]
    js = [j(t) for t in ts]

    candidates = []  # (t, J)
    for i in range(n):
        left_ok = i == 0 or js[i] <= js[i - 1]
        right_ok = i == n - 1 or js[i] <= js[i + 1]
        if left_ok and right_ok:
            lo = ts[max(0, i - 1)]
            hi = ts[min(n - 1, i + 1)]
            if hi - lo > REFINE_TOL:
                t_ref = _golden(j, lo, hi, REFINE_TOL)
                candidates.append((t_ref, j(t_ref)))
            candidates.append((ts[i], js[i]))

    for t_exact in (weather.t_out, _dehum_extinction_t(weather, vpd_target),
                    a, b, TIE_CENTER):
        if t_exact is not None and a <= t_exact <= b:
            candidates.append((t_exact, j(t_exact)))

    best_j = min(c[1] for c in candidates)
    tol = 1e-12 * max(1.0, abs(best_j))
    near = [c for c in candidates if c[1] <= best_j + tol]
    t_star, j_star = min(near, key=lambda c: (abs(c[0] - TIE_CENTER), c[0]))

    rh_star = psychro.iso_vpd_rh(t_star, vpd_target)
    sp = Setpoints(t_sp=t_star, rh_sp=rh_star, vpd_target=vpd_target,
                   predicted_cost=j_star)
    return sp, _kkt(t_star, a, b, weather, params, vpd_target)


def _kkt(t_star, a, b, weather, params, vpd_target, h=1e-3):
    """Stationarity residual from one-sided slopes plus the multiplier.

    At an interior optimum the directional derivative along the curve
    vanishes; at a kink "vanishes" means the one-sided slopes straddle
    zero; at an active bound the inward slope must be non-negative.
    """
    def j(t):
        return energy_cost(t, weather, params, vpd_target)

    bound = None
    if t_star <= a + 1e-9:
        bound = "lower"
    elif t_star >= b - 1e-9:
        bound = "upper"

    if bound == "lower":
        sr = (j(t_star + h) - j(t_star)) / h
        residual = max(0.0, -sr)
    elif bound == "upper":
        sl = (j(t_star) - j(t_star - h)) / h
        residual = max(0.0, sl)
    else:
        sl = (j(t_star) - j(t_star - h)) / h
        sr = (j(t_star + h) - j(t_star)) / h
        lo, hi = min(sl, sr), max(sl, sr)
        residual = 0.0 if lo <= 0.0 <= hi else min(abs(lo), abs(hi))

    rh_star = psychro.iso_vpd_rh(t_star, vpd_target)
    lam = _lambda_off_curve(t_star, rh_star, weather, params)
    return KktDiagnostics(lam=lam, stationarity_residual=residual,
                          active_bound=bound)


def _lambda_off_curve(t_sp, rh_sp, weather, params):
    """Multiplier from the off-curve partials: dJ/dT at fixed RH over dVPD/dT.

    The dehumidification term depends on temperature only through the
    curve, so its off-curve partial is zero; at the |t - t_out| kink the
    thermal partial is taken as the subgradient midpoint (zero).
    """
    if t_sp > weather.t_out:
        dq_dt = params.ua / cop(weather.t_out, params)
    elif t_sp < weather.t_out:
        dq_dt = -params.ua / cop(weather.t_out, params)
    else:
        dq_dt = 0.0
    slope = psychro.dvpd_dt(t_sp, rh_sp)
    if slope <= 0.0:
        return 0.0
    return -dq_dt / slope


def marginal_balance(t_sp, weather, params, vpd_target, h=1e-4):
    """Along-curve marginal costs of the two energy terms at t_sp.

    Returns central-difference partials of the thermal and dehumidification
    terms, the off-curve multiplier, and one-sided total slopes when t_sp
    sits on a nondifferentiable point (|t - t_out| or the max() extinction).
    """
    if not (params.t_min < t_sp < params.t_max):
        raise BoundActiveError(
            f"t_sp={t_sp} °C is at/outside the bounds "
            f"[{params.t_min}, {params.t_max}]"
        )

    def qth(t):
        return _q_thermal(t, weather, params)

    def qde(t):
        return _q_dehum(psychro.iso_vpd_rh(t, vpd_target), weather, params)

    dj_thermal = (qth(t_sp + h) - qth(t_sp - h)) / (2.0 * h)
    dj_dehum = (qde(t_sp + h) - qde(t_sp - h)) / (2.0 * h)

    kink = abs(t_sp - weather.t_out) <= h
    t_ext = _dehum_extinction_t(weather, vpd_target)
    if t_ext is not None and abs(t_sp - t_ext) <= h:
        kink = True

    one_sided = None
    if kink:
        def j(t):
            return qth(t) + qde(t)

        sl = (j(t_sp) - j(t_sp - h)) / h
        sr = (j(t_sp + h) - j(t_sp)) / h
        one_sided = (sl, sr)

    rh_sp = psychro.iso_vpd_rh(t_sp, vpd_target)
    lam = _lambda_off_curve(t_sp, rh_sp, weather, params)
    return MarginalBalance(dj_thermal=dj_thermal, dj_dehum=dj_dehum, lam=lam,
                           kink=kink, one_sided=one_sided)
