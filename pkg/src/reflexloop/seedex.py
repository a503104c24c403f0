"""Persona-seed extraction from noise fields.

Condenses a noise field into a 12-component statistical descriptor
(entropy profile, rhythm, breakpoints, class densities) and maps that
descriptor to the three radian-valued phase parameters that drive the
reflex loop.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, asdict

import numpy as np

from .noise import char_class, shannon_entropy, transition_irregularity, NoiseError


@dataclass(frozen=True)
class RhythmFeatures:
    """Dominant-period summary of an autocorrelation profile."""

    acf_max: float
    k_max: int
    period: int | None
    strength: float


@dataclass(frozen=True)
class PersonaSeed:
    """The 12-dimensional descriptor extracted from a noise field."""

    mean_entropy: float
    entropy_std: float
    mean_rhythm: float
    rhythm_std: float
    cluster_count: int
    breakpoint_count: int
    irregularity: float
    rhythm_wavelength: float
    symbol_density: float
    digit_density: float
    upper_density: float
    lower_density: float

    def as_vector(self) -> list:
        return [
            self.mean_entropy, self.entropy_std,
            self.mean_rhythm, self.rhythm_std,
            self.cluster_count, self.breakpoint_count,
            self.irregularity, self.rhythm_wavelength,
            self.symbol_density, self.digit_density,
            self.upper_density, self.lower_density,
        ]

    def to_dict(self) -> dict:
        return asdict(self)

    def __post_init__(self):
        total = (self.symbol_density + self.digit_density
                 + self.upper_density + self.lower_density)
        if not (0.99 <= total <= 1.01):
            raise NoiseError(f"class densities must sum to ~1, got {total:.4f}")


@dataclass(frozen=True)
class PhaseParams:
    """Phase triplet (phi_noise, phi_rhythm, phi_resonance) in radians."""

    phi_noise: float
    phi_rhythm: float
    phi_resonance: float
    variant: str  # "sigmoid-appendixA" | "acf-section3"

    def to_dict(self) -> dict:
        return asdict(self)


def sliding_entropy(chars: str, w: int = 15) -> np.ndarray:
    """Per-character Shannon entropy over a sliding window of width ``w``.

    Returns a profile of length ``len(chars) - w + 1``.
    """
    if len(chars) < w:
        raise NoiseError(f"field length {len(chars)} shorter than window {w}")
    n = len(chars)
    profile = np.empty(n - w + 1)
    counts = Counter(chars[:w])
    profile[0] = _entropy_of_counts(counts, w)
    for i in range(1, n - w + 1):
        out_ch, in_ch = chars[i - 1], chars[i + w - 1]
        counts[out_ch] -= 1
        if counts[out_ch] == 0:
            del counts[out_ch]
        counts[in_ch] += 1
        profile[i] = _entropy_of_counts(counts, w)
    return profile


def _entropy_of_counts(counts: Counter, total: int) -> float:
    return -sum((c / total) * math.log2(c / total) for c in counts.values())


def classify_chars(chars: str) -> np.ndarray:
    """Per-character class sequence over {0: digit, 1: letter, 2: symbol}."""
    if not chars:
        raise NoiseError("empty field")
    return np.fromiter((char_class(c) for c in chars), dtype=np.int8, count=len(chars))


def autocorrelation(series, k_max: int) -> np.ndarray:
    """Normalized autocorrelation for lags 0..k_max (ACF(0) = 1)."""
    x = np.asarray(series, dtype=float)
    if len(x) <= k_max or k_max < 1:
        raise NoiseError("series must be longer than k_max >= 1")
    x = x - x.mean()
    denom = float(np.dot(x, x))
    if denom == 0.0:
        raise NoiseError("zero-variance series has no autocorrelation")
    acf = np.empty(k_max + 1)
    for k in range(k_max + 1):
        acf[k] = float(np.dot(x[: len(x) - k], x[k:])) / denom
    return acf


def extract_rhythm(acf, theta_r: float = 0.3) -> RhythmFeatures:
    """Locate the dominant lag of an ACF profile.

    The period is only reported when the peak exceeds ``theta_r``; ties
    resolve to the smallest lag (favoring the fundamental over harmonics).
    """
    acf = np.asarray(acf, dtype=float)
    lags = acf[1:]
    k_best = int(np.argmax(lags)) + 1  # argmax returns the first (smallest) tie
    acf_max = float(lags[k_best - 1])
    period = k_best if acf_max > theta_r else None
    multiples = [abs(acf[m]) for m in range(k_best, len(acf), k_best)]
    strength = float(np.mean(multiples)) if multiples else 0.0
    return RhythmFeatures(acf_max=acf_max, k_max=k_best, period=period,
                          strength=strength)


def density_profiles(chars: str, w: int = 50) -> dict:
    """Sliding class-density profiles with per-class summary statistics.

    For each class (symbolic / digit / upper / lower) returns the windowed
    density mean, std, max gradient, and -- for the symbolic class -- the
    count of maximal runs exceeding mean + std (micro-clusters).
    """
    if len(chars) < w:
        raise NoiseError(f"field length {len(chars)} shorter than window {w}")
    masks = {
        "symbolic": np.fromiter((char_class(c) == 2 for c in chars), dtype=float),
        "digit": np.fromiter((c.isdigit() for c in chars), dtype=float),
        "upper": np.fromiter((c.isupper() for c in chars), dtype=float),
        "lower": np.fromiter((c.islower() for c in chars), dtype=float),
    }
    out = {}
    kernel = np.ones(w) / w
    for name, mask in masks.items():
        prof = np.convolve(mask, kernel, mode="valid")
        grad = np.abs(np.diff(prof)) if len(prof) > 1 else np.array([0.0])
        entry = {
            "profile": prof,
            "mean": float(prof.mean()),
            "std": float(prof.std()),
            "gradient_max": float(grad.max()),
        }
        if name == "symbolic":
            entry["cluster_count"] = _count_runs_above(
                prof, entry["mean"] + entry["std"]
            )
        out[name] = entry
    return out


def _count_runs_above(profile: np.ndarray, threshold: float) -> int:
    above = profile > threshold
    # count rising edges
    return int(np.sum(above[1:] & ~above[:-1]) + (1 if above[0] else 0))


def detect_breakpoints(
    chars: str,
    variant: str = "joint",
    theta_b: float = 0.4,
    theta_H: float = 0.5,
    theta_rho: float = 0.15,
    w: int = 15,
) -> dict:
    """Structural-break positions from entropy and density profiles.

    ``density-only``: positions where the windowed symbolic-density step
    exceeds ``theta_b``.  ``joint`` (default): positions where both the
    entropy step exceeds ``theta_H`` and the density step exceeds
    ``theta_rho``.
    """
    if variant not in ("density-only", "joint"):
        raise NoiseError(f"unknown breakpoint variant {variant!r}")
    ent = sliding_entropy(chars, w=w)
    mask = np.fromiter((char_class(c) == 2 for c in chars), dtype=float)
    rho = np.convolve(mask, np.ones(w) / w, mode="valid")
    d_ent = np.abs(np.diff(ent))
    d_rho = np.abs(np.diff(rho))
    if variant == "density-only":
        hits = np.nonzero(d_rho > theta_b)[0]
    else:
        hits = np.nonzero((d_ent > theta_H) & (d_rho > theta_rho))[0]
    positions = _merge_adjacent(list(hits + w // 2))
    if len(positions) >= 2:
        gaps = np.diff(positions)
        mean_gap, max_gap = float(gaps.mean()), int(gaps.max())
    else:
        mean_gap, max_gap = 0.0, 0
    return {
        "positions": positions,
        "count": len(positions),
        "mean_gap": mean_gap,
        "max_gap": max_gap,
    }


def _merge_adjacent(positions, min_sep: int = 5):
    """Collapse runs of near-adjacent hit indices into single breakpoints."""
    merged = []
    for p in positions:
        if merged and p - merged[-1] < min_sep:
            continue
        merged.append(int(p))
    return merged


def symbolic_ngrams(chars: str, n: int = 2, top_k: int = 5):
    """Most frequent n-grams containing at least one symbolic character."""
    if n not in (2, 3):
        raise NoiseError("n must be 2 or 3")
    if len(chars) < n:
        raise NoiseError("field shorter than n")
    if top_k <= 0:
        return []
    counts = Counter(
        chars[i: i + n]
        for i in range(len(chars) - n + 1)
        if any(char_class(c) == 2 for c in chars[i: i + n])
    )
    ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    return ranked[:top_k]


def rhythm_signal(chars: str, w: int = 15) -> np.ndarray:
    """Windowed character-class transition rate (rhythm-density signal).

    For each window spanning ``w`` adjacent character pairs, counts pairs
    whose members belong to different classes (digit / letter / symbol)
    and divides by ``w``.
    """
    if len(chars) < w + 1:
        raise NoiseError("field shorter than window")
    classes = np.fromiter((char_class(c) for c in chars), dtype=np.int8)
    trans = (classes[1:] != classes[:-1]).astype(float)
    sums = np.convolve(trans, np.ones(w), mode="valid")
    return sums / w


def build_seed(chars: str, w_entropy: int = 15, w_density: int = 50) -> PersonaSeed:
    """Compose the full 12-component persona seed from a field."""
    if len(chars) < 60:
        raise NoiseError("field too short for seed extraction (need >= 60)")
    ent = sliding_entropy(chars, w=w_entropy)
    rhythm = rhythm_signal(chars, w=w_entropy)
    dens = density_profiles(chars, w=w_density)
    breaks = detect_breakpoints(chars, variant="joint", w=w_entropy)
    n = len(chars)
    classes = [char_class(c) for c in chars]
    lam = _rhythm_wavelength(rhythm)
    return PersonaSeed(
        mean_entropy=float(ent.mean()),
        entropy_std=float(ent.std()),
        mean_rhythm=float(rhythm.mean()),
        rhythm_std=float(rhythm.std()),
        cluster_count=int(dens["symbolic"]["cluster_count"]),
        breakpoint_count=int(breaks["count"]),
        irregularity=transition_irregularity(chars),
        rhythm_wavelength=lam,
        symbol_density=classes.count(2) / n,
        digit_density=classes.count(0) / n,
        upper_density=sum(1 for c in chars if c.isupper()) / n,
        lower_density=sum(1 for c in chars if c.islower()) / n,
    )


def _rhythm_wavelength(rhythm: np.ndarray) -> float:
    """Dominant ACF lag of the rhythm-density signal, in characters."""
    k_max = max(1, len(rhythm) // 3)
    if len(rhythm) <= k_max or np.allclose(rhythm.std(), 0.0):
        return 0.0
    try:
        acf = autocorrelation(rhythm, k_max)
    except NoiseError:
        return 0.0
    feats = extract_rhythm(acf)
    return float(feats.k_max)


def _sigmoid(x: float) -> float:
    return 1.0 / (1.0 + math.exp(-x))


def phase_params(seed: PersonaSeed, variant: str = "sigmoid-appendixA",
                 rhythm_feats: RhythmFeatures | None = None) -> PhaseParams:
    """Map a persona seed to phase parameters.

    ``sigmoid-appendixA``:
        phi_noise     = 2*pi * sigmoid(0.5*H_mean + 0.3*tau - 2.0)
        phi_rhythm    = 2*pi * rho_mean / (rho_mean + rho_std)
        phi_resonance = 2*pi * ((lambda_rhythm / 10) mod 1)

    ``acf-section3`` (needs rhythm features):
        phi_noise     = 2*pi / k_max    (fallback 2*pi/50, clamp [0.01, 0.7])
        phi_rhythm    = 0.5 * acf_max
        phi_resonance = 2.0 * rho_std
    """
    two_pi = 2.0 * math.pi
    if variant == "sigmoid-appendixA":
        phi_n = two_pi * _sigmoid(
            0.5 * seed.mean_entropy + 0.3 * seed.irregularity - 2.0
        )
        denom = seed.mean_rhythm + seed.rhythm_std
        phi_r = two_pi * (seed.mean_rhythm / denom) if denom > 0 else 0.0
        phi_res = two_pi * ((seed.rhythm_wavelength / 10.0) % 1.0)
        return PhaseParams(phi_n % two_pi, phi_r % two_pi, phi_res % two_pi,
                           variant)
    if variant == "acf-section3":
        if rhythm_feats is not None and rhythm_feats.period is not None:
            phi_n = two_pi / rhythm_feats.k_max
        else:
            phi_n = two_pi / 50.0
        phi_n = min(0.7, max(0.01, phi_n))
        acf_max = rhythm_feats.acf_max if rhythm_feats is not None else 0.0
        return PhaseParams(phi_n, 0.5 * acf_max, 2.0 * seed.rhythm_std, variant)
    raise NoiseError(f"unknown phase variant {variant!r}")
