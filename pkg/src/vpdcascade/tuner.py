"""Online 7-3-3 MLP gain tuner.

Maps a 7-feature sensor vector to the three PID gains of one inner loop,
adapted online by backpropagating the squared VPD tracking error through a
sign surrogate of the plant. Gradient clipping, output saturation, weight
capping and sigma-modification keep every update bounded.
"""

from dataclasses import dataclass, field

import numpy as np

from .pid import PidGains

# Fixed normalization ranges applied to features before the forward pass.
FEATURE_RANGES = (
    (10.0, 40.0),  # air temperature °C
    (0.0, 100.0),  # RH %
    (8.0, 38.0),  # leaf temperature °C
    (300.0, 1500.0),  # CO2 ppm
    (0.0, 1500.0),  # PPFD umol/m2/s
    (-1.5, 1.5),  # VPD error kPa
    (-900.0, 900.0),  # VPD error integral kPa*s
)

PARAM_COUNT = 36  # 3*7 + 3 + 3*3 + 3


@dataclass
class MlpParams:
    """Weights of one 7-3-3 network: 36 parameters total."""

    w1: np.ndarray  # (3, 7)
    b1: np.ndarray  # (3,)
    w2: np.ndarray  # (3, 3)
    b2: np.ndarray  # (3,)

    def __post_init__(self):
        self.w1 = np.asarray(self.w1, dtype=float).reshape(3, 7)
        self.b1 = np.asarray(self.b1, dtype=float).reshape(3)
        self.w2 = np.asarray(self.w2, dtype=float).reshape(3, 3)
        self.b2 = np.asarray(self.b2, dtype=float).reshape(3)

    @property
    def count(self):
        return self.w1.size + self.b1.size + self.w2.size + self.b2.size


@dataclass
class TunerConfig:
    eta: float = 0.005  # learning rate
    clip_c: float = 1.0  # gradient norm cap
    sigma_m: float = 0.01  # sigma-modification (weight decay) coefficient
    k_min: tuple = (0.1, 0.1, 0.0)  # lower gain band, (kp, ki, kd) in NN output units
    k_max: tuple = (3.0, 3.0, 3.0)  # upper gain band
    weight_cap: float = 5.0  # |each weight| <= weight_cap after update
    i_max: float = 900.0  # clamp on the VPD error integral feature, kPa*s

    def __post_init__(self):
        if self.eta <= 0.0 or self.clip_c <= 0.0 or self.sigma_m < 0.0:
            raise ValueError("eta, clip_c must be > 0 and sigma_m >= 0")
        if not all(lo < hi for lo, hi in zip(self.k_min, self.k_max)):
            raise ValueError("gain bands need k_min < k_max elementwise")


@dataclass(frozen=True)
class FeatureVector:
    t: float
    rh: float
    t_leaf: float
    co2: float
    ppfd: float
    e_vpd: float
    e_vpd_int: float


@dataclass(frozen=True)
class UubInputs:
    """Inputs of the ultimate-bound formula."""

    d_bar: float  # disturbance bound, kPa equivalents
    l_w: float  # Lipschitz constant of the NN mapping
    kp_min: float  # minimum proportional gain


@dataclass
class ForwardCache:
    """Intermediate values of one forward pass, needed by update()."""

    x: np.ndarray  # normalized input (7,)
    h: np.ndarray  # hidden activations (3,)
    raw: np.ndarray  # pre-clamp outputs (3,)
    gains: np.ndarray  # clamped outputs (3,)
    active: np.ndarray  # bool mask, False where the clamp is pinning


def leaf_temperature(t, ppfd):
    """Simulator's leaf temperature proxy: canopy runs cool + radiant load."""
    return t - 1.5 + 0.8 * (ppfd / 1000.0)


def normalize_features(fv, cfg):
    """Features scaled to [0, 1] by the fixed published ranges."""
    raw = (fv.t, fv.rh, fv.t_leaf, fv.co2, fv.ppfd, fv.e_vpd,
           min(max(fv.e_vpd_int, -cfg.i_max), cfg.i_max))
    out = np.empty(7)
    for i, (v, (lo, hi)) in enumerate(zip(raw, FEATURE_RANGES)):
        out[i] = min(max((v - lo) / (hi - lo), 0.0), 1.0)
    return out


def _sigmoid(z):
    return 1.0 / (1.0 + np.exp(-z))


def forward_full(params, x_norm, cfg):
    """Forward pass on an already-normalized input; returns the full cache."""
    if not (np.all(np.isfinite(params.w1)) and np.all(np.isfinite(params.w2))
            and np.all(np.isfinite(params.b1)) and np.all(np.isfinite(params.b2))):
        raise ValueError("non-finite MLP parameters")
    h = _sigmoid(params.w1 @ x_norm + params.b1)
    raw = params.w2 @ h + params.b2
    lo = np.asarray(cfg.k_min, dtype=float)
    hi = np.asarray(cfg.k_max, dtype=float)
    gains = np.clip(raw, lo, hi)
    active = (raw > lo) & (raw < hi)
    return ForwardCache(x=x_norm, h=h, raw=raw, gains=gains, active=active)


def forward(params, fv, cfg):
    """Sensor features -> saturated PID gains."""
    cache = forward_full(params, normalize_features(fv, cfg), cfg)
    g = cache.gains
    return PidGains(kp=g[0], ki=g[1], kd=g[2])


def surrogate_loss(params, cache0, e_vpd, plant_sign, pid_partials, cfg):
    """Half squared one-step-ahead VPD error under the sign-surrogate plant.

    With u(theta) = sum_j partial_j * gain_j(theta), the predicted error is
    e - sign * (u(theta) - u(theta0)); at theta0 the loss is e^2/2. This is
    the function whose exact gradient update() descends.
    """
    cache = forward_full(params, cache0.x, cfg)
    p = np.asarray(pid_partials, dtype=float)
    du = float(p @ (cache.gains - cache0.gains))
    e_hat = e_vpd - plant_sign * du
    return 0.5 * e_hat * e_hat


def gradient(params, cache, e_vpd, plant_sign, pid_partials):
    """Backprop gradient of the surrogate loss, flat length-36, pre-clip.

    Outputs pinned by the gain clamp contribute zero (their derivative
    through the saturation is zero).
    """
    p = np.asarray(pid_partials, dtype=float)
    # dL/draw_j at theta0: e_hat = e, d(e_hat)/dtheta = -sign * p_j * draw_j/dtheta
    delta2 = -e_vpd * plant_sign * p * cache.active
    g_b2 = delta2
    g_w2 = np.outer(delta2, cache.h)
    delta1 = (params.w2.T @ delta2) * cache.h * (1.0 - cache.h)
    g_b1 = delta1
    g_w1 = np.outer(delta1, cache.x)
    return np.concatenate([g_w1.ravel(), g_b1, g_w2.ravel(), g_b2])


def to_flat(params):
    """Row-major [w1, b1, w2, b2] as a length-36 vector (snapshot order)."""
    return np.concatenate(
        [params.w1.ravel(), params.b1, params.w2.ravel(), params.b2]
    )


def from_flat(flat):
    flat = np.asarray(flat, dtype=float)
    if flat.size != PARAM_COUNT:
        raise ValueError(f"expected {PARAM_COUNT} values, got {flat.size}")
    return MlpParams(
        w1=flat[:21].reshape(3, 7),
        b1=flat[21:24],
        w2=flat[24:33].reshape(3, 3),
        b2=flat[33:36],
    )


def snapshot_line(params):
    """CSV line for reproducible save/restore of all 36 parameters."""
    return ",".join(repr(v) for v in to_flat(params))


def restore_line(line):
    return from_flat([float(tok) for tok in line.strip().split(",")])


def clip_gradient(flat_grad, clip_c):
    """Rescale so the norm is exactly min(||g||, clip_c)."""
    norm = float(np.linalg.norm(flat_grad))
    if norm > clip_c:
        return flat_grad * (clip_c / norm)
    return flat_grad


def update(params, cache, e_vpd, plant_sign, pid_partials, cfg):
    """One online step: clipped gradient descent plus sigma-modification.

    theta <- theta - eta * clip(grad) - eta * sigma_m * theta, then each
    weight is capped to +/- weight_cap. With zero error this reduces to the
    pure geometric decay (1 - eta*sigma_m) * theta.
    """
    if cache is None:
        raise ValueError("update requires the forward cache for this input")
    flat = gradient(params, cache, e_vpd, plant_sign, pid_partials)
    flat = clip_gradient(flat, cfg.clip_c)
    theta = to_flat(params)
    theta = theta - cfg.eta * flat - cfg.eta * cfg.sigma_m * theta
    np.clip(theta, -cfg.weight_cap, cfg.weight_cap, out=theta)
    return from_flat(theta)


def init_params(seed, scale=0.2):
    """Uniform init in +/- scale with a fixed seed per run."""
    rng = np.random.default_rng(seed)
    return MlpParams(
        w1=rng.uniform(-scale, scale, size=(3, 7)),
        b1=rng.uniform(-scale, scale, size=3),
        w2=rng.uniform(-scale, scale, size=(3, 3)),
        b2=rng.uniform(-scale, scale, size=3),
    )


def warm_start(params, target_gains, cfg):
    """Refit b2 so forward(mid-features) emits approximately target_gains.

    Keeps the random hidden layer; only the output bias moves. Targets are
    clamped into the gain band first so the warm start is reachable.
    """
    target = np.clip(np.asarray(target_gains, dtype=float),
                     np.asarray(cfg.k_min), np.asarray(cfg.k_max))
    h_mid = _sigmoid(params.w1 @ np.full(7, 0.5) + params.b1)
    b2 = target - params.w2 @ h_mid
    return MlpParams(w1=params.w1.copy(), b1=params.b1.copy(),
                     w2=params.w2.copy(), b2=b2)


def lipschitz_estimate(params):
    """Upper bound on the input->raw-gain Lipschitz constant.

    Spectral norms with the 1/4 sigmoid slope cap: |W2| * 1/4 * |W1|.
    """
    n1 = float(np.linalg.norm(params.w1, ord=2))
    n2 = float(np.linalg.norm(params.w2, ord=2))
    return n2 * 0.25 * n1


def uub_bound(inputs, cfg):
    """Ultimate bound on the closed-loop VPD error: (d + eta*C*L) / kp_min."""
    if inputs.kp_min <= 0.0:
        raise ValueError(f"kp_min must be positive, got {inputs.kp_min}")
    return (inputs.d_bar + cfg.eta * cfg.clip_c * inputs.l_w) / inputs.kp_min
