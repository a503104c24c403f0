"""Reflex loop core: resonance scoring, decayed memory, fluctuation
injection, persona gradient updates and feature-target scheduling.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass

import numpy as np


class ReflexError(ValueError):
    """Invalid input to a reflex operation."""


def _sigmoid(x: float) -> float:
    return 1.0 / (1.0 + math.exp(-x))


# ---------------------------------------------------------------------------
# Resonance memory
# ---------------------------------------------------------------------------

def reflex_memory(
    history,
    variant: str = "normalized",
    gamma: float = 0.35,
    lam: float = 0.6,
    K: int = 10,
    eta: float = 0.1,
    rng: random.Random | None = None,
) -> float:
    """Exponentially decayed resonance memory over the last K cycles.

    ``history`` is ordered oldest-to-newest; lag k counts back from the
    end.  Variants:

    ``raw``
        sum_{k=1..K} R_{n-k} e^{-lam k}  (undamped partial sum).
    ``normalized``
        gamma * raw / sum_{j=1..K} e^{-lam j}.  The denominator always
        spans the full K lags so short histories are penalized rather
        than renormalized; with a full window this is gamma times a
        convex combination of the history.
    ``short``
        the raw form with K = 5, lam = 0.5.
    ``single-lag-gaussian``
        eta * R_{n-1} * xi with xi ~ N(0, 1) drawn from ``rng``.
    """
    hist = list(history)
    if not hist:
        raise ReflexError("resonance history is empty")
    if variant == "short":
        K, lam = 5, 0.5
        variant = "raw"
    if variant == "single-lag-gaussian":
        rng = rng or random.Random(0)
        return eta * hist[-1] * rng.gauss(0.0, 1.0)
    raw = sum(
        hist[-k] * math.exp(-lam * k) for k in range(1, min(K, len(hist)) + 1)
    )
    if variant == "raw":
        return float(raw)
    if variant == "normalized":
        denom = sum(math.exp(-lam * j) for j in range(1, K + 1))
        return float(gamma * raw / denom)
    raise ReflexError(f"unknown memory variant {variant!r}")


# ---------------------------------------------------------------------------
# Fluctuation function
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FluctuationParams:
    phi_noise: float = 0.15
    phi_rhythm: float = 0.25
    A_0: float = 0.18
    theta_0: float = 0.0
    beta_amp: float = 0.3
    R_max: float = 1.0


def adaptive_amplitude(p: FluctuationParams, resonance_window) -> float:
    """A = A_0 (1 + beta * sigma(R_window) / R_max)."""
    w = list(resonance_window)
    sigma = float(np.std(w)) if len(w) > 1 else 0.0
    return p.A_0 * (1.0 + p.beta_amp * sigma / p.R_max)


def fluctuation(
    n: int,
    variant: str = "extended",
    params: FluctuationParams = FluctuationParams(),
    memory: float = 0.0,
    resonance_window=None,
    sigma_override: float | None = None,
) -> float:
    """Entropy fluctuation f(n) in bits.

    ``basic``:    sin(n phi_noise) + memory.
    ``extended``: A sin(n phi_noise + theta_0) + 0.5 A cos(2 n phi_rhythm)
                  + memory, with A = A_0.
    ``adaptive``: the extended form with A modulated by the standard
                  deviation of the recent resonance window.
    """
    p = params
    if variant == "basic":
        return math.sin(n * p.phi_noise) + memory
    if variant == "extended":
        A = p.A_0
    elif variant == "adaptive":
        if sigma_override is not None:
            A = p.A_0 * (1.0 + p.beta_amp * sigma_override / p.R_max)
        else:
            if resonance_window is None:
                raise ReflexError("adaptive variant needs a resonance window")
            A = adaptive_amplitude(p, resonance_window)
    else:
        raise ReflexError(f"unknown fluctuation variant {variant!r}")
    B = 0.5 * A
    return (
        A * math.sin(n * p.phi_noise + p.theta_0)
        + B * math.cos(2.0 * n * p.phi_rhythm)
        + memory
    )


# ---------------------------------------------------------------------------
# Resonance models
# ---------------------------------------------------------------------------

def resonance_cosine(observation, persona, phi_resonance: float = 0.8) -> float:
    """R = cos(observation, persona) * phi_resonance."""
    o = np.asarray(observation, dtype=float)
    p = np.asarray(persona, dtype=float)
    no, np_ = np.linalg.norm(o), np.linalg.norm(p)
    if no == 0 or np_ == 0:
        raise ReflexError("resonance undefined for zero-norm vectors")
    return float(np.dot(o, p) / (no * np_) * phi_resonance)


def resonance_composite(delta_coherence: float, metaphor: float,
                        h_semantic: float, feedback: float) -> float:
    """R = 0.35 dC + 0.25 M + 0.20 (1 - H_s) + 0.20 F."""
    return (
        0.35 * delta_coherence
        + 0.25 * metaphor
        + 0.20 * (1.0 - h_semantic)
        + 0.20 * feedback
    )


def resonance_logistic(indicators, weights=(0.2, 0.2, 0.2, 0.4),
                       bias: float = -0.5) -> float:
    """R = sigmoid(sum w_i I_i + bias)."""
    ind = list(indicators)
    if len(ind) != len(weights):
        raise ReflexError("indicator/weight length mismatch")
    return _sigmoid(sum(w * i for w, i in zip(weights, ind)) + bias)


def resonance_blend(delta_e: float, metaphor_z: float, h_s_z: float,
                    phi_noise: float) -> float:
    """R = clip(0.4 tanh(dE) + 0.3 z(M) - 0.2 z(H_s) + 0.1 cos(phi_noise))."""
    r = (
        0.4 * math.tanh(delta_e)
        + 0.3 * metaphor_z
        - 0.2 * h_s_z
        + 0.1 * math.cos(phi_noise)
    )
    return float(min(1.0, max(-1.0, r)))


def integration_rate(r_t: float, r_mean: float, lo: float = 0.1,
                     span: float = 0.4, gain: float = 3.0) -> float:
    """lambda_t = lo + span * sigmoid(gain (R_t - R_mean))."""
    return lo + span * _sigmoid(gain * (r_t - r_mean))


# ---------------------------------------------------------------------------
# Quality loss
# ---------------------------------------------------------------------------

def quality_score(h_syn: float, h_lex: float, rho_r: float,
                  metaphor: float) -> float:
    """Generation quality 0.25 H_syn + 0.20 H_lex + 0.30 rho_r + 0.25 M."""
    return 0.25 * h_syn + 0.20 * h_lex + 0.30 * rho_r + 0.25 * metaphor


def quality_loss(h_syn: float, h_lex: float, rho_r: float,
                 metaphor: float) -> float:
    """Loss to minimize: the negated quality score."""
    return -quality_score(h_syn, h_lex, rho_r, metaphor)


# ---------------------------------------------------------------------------
# Persona gradients and updates
# ---------------------------------------------------------------------------

def persona_gradient(
    persona,
    mode: str = "metric-proxy",
    observed=None,
    target=None,
    probe=None,
    delta: float = 0.1,
) -> np.ndarray:
    """Signed 3-component update direction for the persona state.

    ``metric-proxy``
        g = target - observed: a cheap surrogate pointing from the
        measured axis values toward the desired ones.
    ``generator-probe``
        central finite differences of a scalar quality probe
        Q(persona) with step ``delta`` per component.
    """
    psi = np.asarray(persona, dtype=float)
    if psi.shape != (3,):
        raise ReflexError("persona must be 3-dimensional")
    if mode == "metric-proxy":
        if observed is None or target is None:
            raise ReflexError("metric-proxy needs observed and target")
        return np.asarray(target, float) - np.asarray(observed, float)
    if mode == "generator-probe":
        if probe is None:
            raise ReflexError("generator-probe needs a quality probe")
        g = np.zeros(3)
        for i in range(3):
            hi, lo = psi.copy(), psi.copy()
            hi[i] += delta
            lo[i] -= delta
            g[i] = (probe(hi) - probe(lo)) / (2.0 * delta)
        return g
    raise ReflexError(f"unknown gradient mode {mode!r}")


def persona_update(
    persona,
    gradient,
    resonance: float,
    alpha: float = 0.12,
    theta_r: float = 0.6,
    clip_step: float = 0.15,
    bound: bool = True,
) -> np.ndarray:
    """Resonance-weighted gradient step with per-component step clipping.

    Psi' = Psi + a * R * g, where a is the full learning rate above the
    resonance threshold and half of it below; each component step is
    clipped to +-clip_step and the result is kept inside [0, 1]^3.
    ``bound=False`` disables both clips (raw update law, e.g. for
    stability analysis).
    """
    psi = np.asarray(persona, dtype=float)
    g = np.asarray(gradient, dtype=float)
    a = alpha if resonance > theta_r else alpha / 2.0
    step = a * resonance * g
    if not bound:
        return psi + step
    step = np.clip(step, -clip_step, clip_step)
    return np.clip(psi + step, 0.0, 1.0)


# ---------------------------------------------------------------------------
# Emergent-behavior probabilities
# ---------------------------------------------------------------------------

def self_reference_probability(eps: float, p_limit: float = 0.12) -> float:
    """P = p_limit * |eps| / sqrt(1 + eps^2); saturates at p_limit."""
    return p_limit * abs(eps) / math.sqrt(1.0 + eps * eps)


def echo_probability(distance: int, p0: float = 0.3,
                     decay: float = 0.15) -> float:
    """P = p0 * exp(-decay * |i - j|) for echoing cycle i at cycle j."""
    if distance < 0:
        raise ReflexError("distance must be >= 0")
    return p0 * math.exp(-decay * distance)


# ---------------------------------------------------------------------------
# Feature targets and soft constraints
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TargetBases:
    kappa_base: float = 1.2
    sigma_L_base: float = 12.0
    sc_base: float = 0.45
    le_base: float = 0.50
    lr_base: float = 0.55
    A_sc: float = 0.10
    theta_sc: float = 0.0
    beta_le: float = 0.15
    A_lr: float = 0.10
    phi_noise: float = 0.15


def feature_targets(
    f_n: float,
    r_t: float,
    eps: float,
    t: int,
    theta_t: float = 0.0,
    eta: float = 0.0,
    bases: TargetBases = TargetBases(),
) -> dict:
    """Per-cycle generation targets driven by the fluctuation state."""
    b = bases
    return {
        "kappa_p": b.kappa_base + 0.3 * f_n,
        "sigma_L": b.sigma_L_base + 3.0 * abs(f_n),
        "p_metaphor": 0.03 + 0.02 * max(0.0, f_n),
        "sc": b.sc_base + b.A_sc * math.sin(b.phi_noise * t + b.theta_sc)
              + 0.4 * (1.0 - r_t),
        "le": b.le_base + b.beta_le * math.tanh(eps),
        "lr": b.lr_base + b.A_lr * math.sin(theta_t) + eta,
    }


def length_weight(length: float, mu_L: float, sigma_L: float,
                  l_min: float = 80, l_max: float = 2000) -> float:
    """Gaussian length window with hard bounds."""
    if not (l_min <= length <= l_max):
        return 0.0
    return math.exp(-((length - mu_L) ** 2) / (2.0 * sigma_L ** 2))


def rhythm_constraint(acf, target_acf) -> float:
    a, t = np.asarray(acf, float), np.asarray(target_acf, float)
    if a.shape != t.shape:
        raise ReflexError("ACF shape mismatch")
    return float(np.sum(np.abs(a - t) ** 2))


def punctuation_constraint(kappa: float, target: float,
                           weight: float = 1.0) -> float:
    return weight * (kappa - target) ** 2


def metaphor_constraint(density: float, target: float,
                        sigma: float = 0.05) -> float:
    return ((density - target) ** 2) / (2.0 * sigma ** 2)


def constraint_jitter(losses_now: dict, losses_prev: dict) -> float:
    """J(t) = sum_c |L_c(t) - L_c(t-1)| over shared constraint keys."""
    keys = set(losses_now) & set(losses_prev)
    if not keys:
        raise ReflexError("no shared constraint keys")
    return float(sum(abs(losses_now[k] - losses_prev[k]) for k in keys))


def constraint_overload(losses: dict, thresholds: dict,
                        min_exceeded: int = 2) -> bool:
    """True when at least ``min_exceeded`` losses exceed their thresholds."""
    exceeded = sum(
        1 for k, v in losses.items() if v > thresholds.get(k, math.inf)
    )
    return exceeded >= min_exceeded
