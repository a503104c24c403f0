"""Narrative-cycle phase classification, cycle completion detection and
drift tracking over emotional-state trajectories.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


class CycleError(ValueError):
    """Invalid input to a cycle operation."""


PHASES = ("Static", "StaticReturn", "Transition", "Resonance", "Collapse")


@dataclass(frozen=True)
class CycleObservation:
    """Per-cycle deltas and scores feeding phase classification."""

    delta_c: float  # coherence delta
    delta_e: float  # emotional-intensity delta
    delta_hs: float  # semantic-entropy delta
    resonance: float
    theta: float | None = None  # drift angle, radians

    def angle(self) -> float:
        if self.theta is not None:
            return self.theta
        return math.atan2(self.delta_e, self.delta_c)


def smoothed_deltas(raw_deltas, alpha: float = 0.3):
    """Exponential moving average of a delta series (first value as-is)."""
    vals = list(raw_deltas)
    if not vals:
        raise CycleError("empty delta series")
    out = [float(vals[0])]
    for v in vals[1:]:
        out.append(alpha * float(v) + (1.0 - alpha) * out[-1])
    return out


def drift_angle(delta_c: float, delta_e: float) -> float:
    """Theta = atan2(dE, dC) in (-pi, pi]."""
    return math.atan2(delta_e, delta_c)


# ---------------------------------------------------------------------------
# Phase classification
# ---------------------------------------------------------------------------

def classify_phase(
    obs: CycleObservation,
    variant: str = "threshold",
    baselines: dict | None = None,
) -> str:
    """Classify one cycle into a narrative phase.

    ``threshold`` applies fixed-threshold rules in priority order:

    1. Static      if |dC| < 0.15 and |dE| < 0.15 and |dHs| < 0.05
    2. Resonance   if R > 0.4 and dE > 0.2 and dC > 0.1
    3. Collapse    if dC < -0.2 and |dE| > 0.3 and dHs > 0.08
    4. Transition  if |theta| > pi / 6
    5. Static      otherwise

    ``angular`` partitions the drift angle into quadrants and refines
    each with entropy/metric conditions against supplied baselines
    (keys: M, M_baseline, H_s, H_baseline, sigma_H, kappa_p,
    kappa_base).
    """
    if variant == "threshold":
        if (
            abs(obs.delta_c) < 0.15
            and abs(obs.delta_e) < 0.15
            and abs(obs.delta_hs) < 0.05
        ):
            return "Static"
        if obs.resonance > 0.4 and obs.delta_e > 0.2 and obs.delta_c > 0.1:
            return "Resonance"
        if obs.delta_c < -0.2 and abs(obs.delta_e) > 0.3 and obs.delta_hs > 0.08:
            return "Collapse"
        if abs(obs.angle()) > math.pi / 6.0:
            return "Transition"
        return "Static"
    if variant == "angular":
        b = baselines or {}
        theta = obs.angle() % (2.0 * math.pi)
        q = math.pi / 4.0
        if theta >= 2.0 * math.pi - q or theta < q:
            return "StaticReturn" if obs.delta_hs < 0 else "Static"
        if theta < 3.0 * q:
            m, m0 = b.get("M", 0.0), b.get("M_baseline", 1.0)
            if m > 1.3 * m0 and obs.delta_hs > 0:
                return "Resonance"
            return "Static"
        if theta < 5.0 * q:
            hs = b.get("H_s", 0.0)
            h0 = b.get("H_baseline", 0.0)
            sh = b.get("sigma_H", 0.0)
            kp = b.get("kappa_p", 1.0)
            k0 = b.get("kappa_base", 1.0)
            if hs > h0 + sh and (kp > 1.5 * k0 or kp < 0.5 * k0):
                return "Collapse"
            return "Resonance"
        return "StaticReturn"
    raise CycleError(f"unknown classification variant {variant!r}")


def classify_series(observations, variant: str = "threshold",
                    baselines=None):
    return [classify_phase(o, variant, baselines) for o in observations]


# ---------------------------------------------------------------------------
# Cycle completion
# ---------------------------------------------------------------------------

# Recognized phase sequences, longest first; StaticReturn aliases Static.
_CYCLE_PATTERNS = (
    ("Static", "Transition", "Resonance", "Collapse", "Static"),
    ("Static", "Resonance", "Collapse", "Static"),
    ("Resonance", "Collapse", "Static"),
)


def detect_cycle_completion(labels, window: int = 5) -> tuple | None:
    """Longest recognized phase pattern ending at the newest label.

    Only the most recent ``window`` labels are inspected; StaticReturn
    counts as Static for matching.  Returns the matched pattern or None.
    """
    recent = ["Static" if l == "StaticReturn" else l for l in labels[-window:]]
    for pat in _CYCLE_PATTERNS:
        if len(recent) >= len(pat) and tuple(recent[-len(pat):]) == pat:
            return pat
    return None


# ---------------------------------------------------------------------------
# Drift tracking
# ---------------------------------------------------------------------------

@dataclass
class DriftTracker:
    """EMA drift vector over emotional-state steps with re-stabilization
    detection (drift reversal) and micro-cycle counting."""

    gamma: float = 0.2
    drift: np.ndarray = None
    _last_label: str | None = None
    transitions: int = 0

    def __post_init__(self):
        if self.drift is None:
            self.drift = np.zeros(3)

    def update(self, step, label: str | None = None) -> dict:
        step = np.asarray(step, dtype=float)
        prev = self.drift.copy()
        self.drift = (1.0 - self.gamma) * self.drift + self.gamma * step
        restab = False
        np_, nd = np.linalg.norm(prev), np.linalg.norm(self.drift)
        if np_ > 1e-12 and nd > 1e-12:
            cosang = float(np.dot(prev, self.drift)) / float(np_ * nd)
            restab = cosang < -0.5
        if label is not None:
            if self._last_label is not None and label != self._last_label:
                self.transitions += 1
            self._last_label = label
        return {"drift": self.drift.copy(), "restabilization": restab}

    def micro_cycle(self, min_transitions: int = 3) -> bool:
        return self.transitions >= min_transitions


def cycle_displacement(trajectory, t: int, k: int) -> np.ndarray:
    """Delta_cycle(t, t+k) = e(t+k) - e(t)."""
    traj = [np.asarray(p, float) for p in trajectory]
    if not (0 <= t and t + k < len(traj)):
        raise CycleError("displacement indices out of range")
    return traj[t + k] - traj[t]


# ---------------------------------------------------------------------------
# Return-rate fitting
# ---------------------------------------------------------------------------

def return_rate_fit(trajectory, centroid) -> dict:
    """Exponential return rate toward a centroid via log-distance
    least squares: d(t) ~ d(0) exp(-alpha t)."""
    c = np.asarray(centroid, dtype=float)
    dists = [float(np.linalg.norm(np.asarray(p, float) - c)) for p in trajectory]
    if len(dists) < 3:
        raise CycleError("need >= 3 trajectory points")
    if min(dists) < 1e-12:
        raise CycleError("trajectory touches the centroid; rate undefined")
    logs = np.log(dists)
    if np.allclose(logs, logs[0], atol=1e-12):
        raise CycleError("constant distance; return rate undefined")
    t = np.arange(len(dists), dtype=float)
    slope, intercept = np.polyfit(t, logs, 1)
    pred = slope * t + intercept
    ss_res = float(np.sum((logs - pred) ** 2))
    ss_tot = float(np.sum((logs - logs.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return {"alpha": float(-slope), "r2": r2}


def collapse_spacings(labels):
    """Gaps between successive Collapse onsets in a label series."""
    onsets = [
        i for i, l in enumerate(labels)
        if l == "Collapse" and (i == 0 or labels[i - 1] != "Collapse")
    ]
    return [b - a for a, b in zip(onsets, onsets[1:])]
