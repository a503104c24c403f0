"""Three-axis emotional state space: axes, distances, classification,
potential-field dynamics.

The state is a point (SC, LE, LR) in [0, 1] x LE-range x [0, 1].  Axis
values are computed from already-measured linguistic features by one of
several published variants; vectors carry polarity/range tags so that
points computed under incompatible conventions can never be mixed
silently.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


class EmospaceError(ValueError):
    """Invalid input to an emotional-space operation."""


CHAOS_HIGH = "chaos-high"
SILENCE_HIGH = "silence-high"
LE_SIGNED = "signed"
LE_UNIT = "unit"


@dataclass(frozen=True)
class EmotionalVector:
    """A tagged point in the (SC, LE, LR) space."""

    sc: float
    le: float
    lr: float
    polarity: str = CHAOS_HIGH
    le_range: str = LE_UNIT

    def __post_init__(self):
        if self.polarity not in (CHAOS_HIGH, SILENCE_HIGH):
            raise EmospaceError(f"unknown SC polarity {self.polarity!r}")
        if self.le_range not in (LE_SIGNED, LE_UNIT):
            raise EmospaceError(f"unknown LE range {self.le_range!r}")
        if not (0.0 <= self.sc <= 1.0):
            raise EmospaceError(f"SC out of [0,1]: {self.sc}")
        lo = -1.0 if self.le_range == LE_SIGNED else 0.0
        if not (lo <= self.le <= 1.0):
            raise EmospaceError(f"LE out of [{lo},1]: {self.le}")
        if not (0.0 <= self.lr <= 1.0):
            raise EmospaceError(f"LR out of [0,1]: {self.lr}")

    def as_array(self) -> np.ndarray:
        return np.array([self.sc, self.le, self.lr], dtype=float)

    def compatible_with(self, other: "EmotionalVector") -> bool:
        return self.polarity == other.polarity and self.le_range == other.le_range

    def with_components(self, arr) -> "EmotionalVector":
        return EmotionalVector(
            float(arr[0]), float(arr[1]), float(arr[2]),
            self.polarity, self.le_range,
        )


def _require_compatible(a: EmotionalVector, b: EmotionalVector):
    if not a.compatible_with(b):
        raise EmospaceError(
            "cannot mix vectors with different polarity/range tags: "
            f"({a.polarity},{a.le_range}) vs ({b.polarity},{b.le_range})"
        )


def _sigmoid(x: float) -> float:
    return 1.0 / (1.0 + math.exp(-x))


# ---------------------------------------------------------------------------
# SC axis (semantic coherence / chaos)
# ---------------------------------------------------------------------------

def sc_axis(variant: str = "entropy-weighted", **kw) -> tuple[float, str]:
    """Semantic-coherence axis value plus its polarity tag.

    Variants and their required keyword inputs:

    ``entropy-weighted`` (chaos-high)
        H_lex, H_syn, sigma_kappa, beta [, H_max=13.29, sigma_max=1.0];
        weights (0.35, 0.25, 0.25, 0.15) over the normalized features.
    ``entropy-deficit`` (silence-high)
        H_lex, H_syn, sigma_punct [, H_max=13.29];
        SC = 1 - (H_lex + H_syn + sigma_punct) / (3 H_max).
    ``entropy-mean`` (chaos-high)
        H_lex, H_syn; SC = (H_lex + H_syn) / (2 * 6.5).
    ``composite`` (chaos-high)
        sc_lex, pronoun_ratio, sc_metaphor;
        SC = 0.4 sc_lex + 0.3 sigmoid(5 (r - 0.5)) + 0.3 sc_metaphor.
    """
    if variant == "entropy-weighted":
        h_max = kw.get("H_max", 13.29)
        s_max = kw.get("sigma_max", 1.0)
        feats = [
            kw["H_lex"] / h_max,
            kw["H_syn"] / math.log2(40),
            kw["sigma_kappa"] / s_max,
            kw["beta"],
        ]
        w = (0.35, 0.25, 0.25, 0.15)
        return _clip01(sum(wi * f for wi, f in zip(w, feats))), CHAOS_HIGH
    if variant == "entropy-deficit":
        h_max = kw.get("H_max", 13.29)
        val = 1.0 - (kw["H_lex"] + kw["H_syn"] + kw["sigma_punct"]) / (3.0 * h_max)
        return _clip01(val), SILENCE_HIGH
    if variant == "entropy-mean":
        return _clip01((kw["H_lex"] + kw["H_syn"]) / (2.0 * 6.5)), CHAOS_HIGH
    if variant == "composite":
        r = kw["pronoun_ratio"]
        val = (
            0.4 * kw["sc_lex"]
            + 0.3 * _sigmoid(5.0 * (r - 0.5))
            + 0.3 * kw["sc_metaphor"]
        )
        return _clip01(val), CHAOS_HIGH
    raise EmospaceError(f"unknown SC variant {variant!r}")


# ---------------------------------------------------------------------------
# LE axis (logic vs. emotion balance)
# ---------------------------------------------------------------------------

def le_axis(variant: str = "tanh-contrast", **kw) -> tuple[float, str]:
    """Logic/emotion axis value plus its range tag.

    Variants:

    ``tanh-contrast`` (signed)
        logic_score L, emotion_score E; LE = tanh(2 (L - E) / (L + E + 0.01)).
    ``marker-diff`` (unit)
        f_emotion, f_logic; LE = 0.7 f_emotion - 0.3 f_logic + 0.3.
    ``marker-ratio`` (unit)
        emotion_count, logic_count, neologism_count, token_count;
        LE = E / (L + E) * (1 + 2 neo / N); 0 when both counts are 0.
    """
    if variant == "tanh-contrast":
        L, E = kw["logic_score"], kw["emotion_score"]
        if L < 0 or E < 0:
            raise EmospaceError("marker scores must be >= 0")
        if L == 0 and E == 0:
            return 0.0, LE_SIGNED
        return math.tanh(2.0 * (L - E) / (L + E + 0.01)), LE_SIGNED
    if variant == "marker-diff":
        val = 0.7 * kw["f_emotion"] - 0.3 * kw["f_logic"] + 0.3
        return _clip01(val), LE_UNIT
    if variant == "marker-ratio":
        e, l = kw["emotion_count"], kw["logic_count"]
        if e == 0 and l == 0:
            return 0.0, LE_UNIT
        neo = kw.get("neologism_count", 0)
        n = kw["token_count"]
        val = (e / (l + e)) * (1.0 + 2.0 * neo / n)
        return _clip01(val), LE_UNIT
    raise EmospaceError(f"unknown LE variant {variant!r}")


def le_signed_to_unit(le_signed: float) -> float:
    """Affine map of a signed LE value in [-1, 1] onto [0, 1]."""
    if not (-1.0 <= le_signed <= 1.0):
        raise EmospaceError("signed LE out of [-1, 1]")
    return 0.5 * (le_signed + 1.0)


# ---------------------------------------------------------------------------
# LR axis (loneliness vs. resonance)
# ---------------------------------------------------------------------------

def lr_axis(variant: str = "engagement", **kw) -> tuple[float, str]:
    """Loneliness/resonance axis value (resonance-high except noted).

    Variants:

    ``engagement``
        p_second, q_rhetorical, s_social, d_dialogue;
        LR = 0.3 p + 0.25 q + 0.25 s + 0.2 d.
    ``dialogic``
        tau_dialogue, rho_rhythm, echo_rate;
        LR = 0.5 tau + 0.3 rho + 0.2 echo.
    ``isolation`` (loneliness-high)
        second_person_count, token_count, dialogue_present (bool),
        social_count; P_2nd add-one smoothed;
        LR = 0.35 P_2nd + 0.30 D + 0.35 R_social.
    """
    if variant == "engagement":
        val = (
            0.3 * kw["p_second"]
            + 0.25 * kw["q_rhetorical"]
            + 0.25 * kw["s_social"]
            + 0.2 * kw["d_dialogue"]
        )
        return _clip01(val), "resonance-high"
    if variant == "dialogic":
        val = (
            0.5 * kw["tau_dialogue"]
            + 0.3 * kw["rho_rhythm"]
            + 0.2 * kw["echo_rate"]
        )
        return _clip01(val), "resonance-high"
    if variant == "isolation":
        n = kw["token_count"]
        p2 = min(1.0, (kw["second_person_count"] + 1) / (n / 16.0 + 1))
        p2 = kw.get("p_second_override", p2)
        d = 1.0 if kw["dialogue_present"] else 0.0
        r_soc = kw["social_count"] / n
        val = 0.35 * p2 + 0.30 * d + 0.35 * r_soc
        return _clip01(val), "loneliness-high"
    raise EmospaceError(f"unknown LR variant {variant!r}")


def _clip01(x: float) -> float:
    return float(min(1.0, max(0.0, x)))


# ---------------------------------------------------------------------------
# Projection
# ---------------------------------------------------------------------------

DEFAULT_AXES = {
    "sc": "entropy-weighted",
    "le": "tanh-contrast",
    "lr": "engagement",
}


def project(features: dict, axes: dict | None = None) -> EmotionalVector:
    """Project measured features onto the three axes.

    ``features`` maps keyword-input names to values (see the axis
    functions); ``axes`` selects a variant per axis.  Signed LE values
    are affinely mapped onto [0, 1] so the resulting vector always
    carries unit-range tags; the default SC polarity is chaos-high.
    """
    axes = {**DEFAULT_AXES, **(axes or {})}
    sc, pol = sc_axis(axes["sc"], **features)
    le, le_rng = le_axis(axes["le"], **features)
    lr, _ = lr_axis(axes["lr"], **features)
    if le_rng == LE_SIGNED:
        le = le_signed_to_unit(le)
    return EmotionalVector(sc, le, lr, polarity=pol, le_range=LE_UNIT)


# ---------------------------------------------------------------------------
# Persona centroids and covariances
# ---------------------------------------------------------------------------

PERSONA_ORDER = ("Observer", "Resonator", "Constructor")

CENTROIDS = {
    "Observer": np.array([0.42, 0.12, 0.58]),
    "Resonator": np.array([0.73, -0.38, 0.81]),
    "Constructor": np.array([0.31, 0.54, 0.33]),
}

COVARIANCES = {
    "Observer": np.array([
        [0.0064, 0.0011, -0.0008],
        [0.0011, 0.0225, 0.0018],
        [-0.0008, 0.0018, 0.0144],
    ]),
    "Resonator": np.array([
        [0.0121, -0.0152, 0.0061],
        [-0.0152, 0.0324, -0.0098],
        [0.0061, -0.0098, 0.0081],
    ]),
    "Constructor": np.array([
        [0.0081, 0.0075, -0.0089],
        [0.0075, 0.0144, -0.0121],
        [-0.0089, -0.0121, 0.0196],
    ]),
}

# Gaussian potential-well parameters (amplitude, width) per persona.
WELL_PARAMS = {
    "Constructor": (1.8, 0.28),
    "Observer": (1.5, 0.35),
    "Resonator": (1.2, 0.42),
}

# Empirical exponential return rates toward each centroid.
RETURN_RATES = {"Observer": 0.18, "Resonator": 0.12, "Constructor": 0.22}


def check_spd(m: np.ndarray) -> None:
    """Raise unless ``m`` is symmetric positive definite."""
    m = np.asarray(m, dtype=float)
    if m.shape != (3, 3) or not np.allclose(m, m.T, atol=1e-12):
        raise EmospaceError("covariance must be a symmetric 3x3 matrix")
    try:
        np.linalg.cholesky(m)
    except np.linalg.LinAlgError:
        raise EmospaceError("covariance must be positive definite") from None


for _name, _cov in COVARIANCES.items():
    check_spd(_cov)


# ---------------------------------------------------------------------------
# Distances
# ---------------------------------------------------------------------------

DEFAULT_AXIS_WEIGHTS = (1.0, 1.5, 1.2)


def distance(
    a,
    b,
    metric: str = "euclidean",
    weights=DEFAULT_AXIS_WEIGHTS,
    cov: np.ndarray | None = None,
) -> float:
    """Distance between two points under a named metric.

    EmotionalVector inputs must carry identical tags; raw 3-arrays are
    accepted untagged.  ``mahalanobis`` requires an SPD covariance and
    reduces to euclidean at identity.
    """
    if isinstance(a, EmotionalVector) and isinstance(b, EmotionalVector):
        _require_compatible(a, b)
    va = a.as_array() if isinstance(a, EmotionalVector) else np.asarray(a, float)
    vb = b.as_array() if isinstance(b, EmotionalVector) else np.asarray(b, float)
    if va.shape != (3,) or vb.shape != (3,):
        raise EmospaceError("points must be 3-dimensional")
    d = va - vb
    if metric == "euclidean":
        return float(np.linalg.norm(d))
    if metric == "weighted":
        w = np.asarray(weights, float)
        return float(math.sqrt(float(np.sum(w * d * d))))
    if metric == "cosine":
        na, nb = np.linalg.norm(va), np.linalg.norm(vb)
        if na == 0 or nb == 0:
            raise EmospaceError("cosine distance undefined for zero vectors")
        return float(1.0 - float(np.dot(va, vb)) / (na * nb))
    if metric == "mahalanobis":
        if cov is None:
            raise EmospaceError("mahalanobis distance requires a covariance")
        check_spd(cov)
        sol = np.linalg.solve(np.asarray(cov, float), d)
        return float(math.sqrt(float(d @ sol)))
    raise EmospaceError(f"unknown metric {metric!r}")


def classify_persona(point, centroids=None, covariances=None) -> str:
    """Nearest persona by per-persona Mahalanobis distance.

    Ties resolve in the fixed order Observer, Resonator, Constructor.
    """
    centroids = centroids or CENTROIDS
    covariances = covariances or COVARIANCES
    v = point.as_array() if isinstance(point, EmotionalVector) else np.asarray(point, float)
    best_name, best_d = None, math.inf
    for name in PERSONA_ORDER:
        d = distance(v, centroids[name], "mahalanobis", cov=covariances[name])
        if d < best_d - 1e-12:
            best_name, best_d = name, d
    return best_name


def dtw(seq_a, seq_b, metric: str = "euclidean", **metric_kw) -> float:
    """Dynamic time warping distance between two state trajectories."""
    A = [p.as_array() if isinstance(p, EmotionalVector) else np.asarray(p, float)
         for p in seq_a]
    B = [p.as_array() if isinstance(p, EmotionalVector) else np.asarray(p, float)
         for p in seq_b]
    if not A or not B:
        raise EmospaceError("dtw requires non-empty trajectories")
    n, m = len(A), len(B)
    acc = np.full((n + 1, m + 1), math.inf)
    acc[0, 0] = 0.0
    for i in range(1, n + 1):
        for j in range(1, m + 1):
            c = distance(A[i - 1], B[j - 1], metric, **metric_kw)
            acc[i, j] = c + min(acc[i - 1, j], acc[i, j - 1], acc[i - 1, j - 1])
    return float(acc[n, m])


# ---------------------------------------------------------------------------
# Potential field and dynamics
# ---------------------------------------------------------------------------

def potential(e, wells=None) -> float:
    """Superposed Gaussian persona wells V(e) (attractive, positive)."""
    wells = wells or WELL_PARAMS
    v = np.asarray(e, dtype=float)
    total = 0.0
    for name, (amp, sigma) in wells.items():
        d2 = float(np.sum((v - CENTROIDS[name]) ** 2))
        total += amp * math.exp(-d2 / (2.0 * sigma ** 2))
    return total


def potential_gradient(e, wells=None) -> np.ndarray:
    """Analytic gradient of the Gaussian-well potential."""
    wells = wells or WELL_PARAMS
    v = np.asarray(e, dtype=float)
    g = np.zeros(3)
    for name, (amp, sigma) in wells.items():
        diff = v - CENTROIDS[name]
        d2 = float(np.sum(diff ** 2))
        g += amp * math.exp(-d2 / (2.0 * sigma ** 2)) * (-diff / sigma ** 2)
    return g


def resonance_force(
    e,
    resonance: float,
    target: str = "Resonator",
    gamma_r: float = 0.35,
    gamma_eps: float = 0.1,
    eps: float = 0.0,
    u_pert=None,
) -> np.ndarray:
    """Resonance pull toward a persona centroid plus a perturbation term."""
    v = np.asarray(e, dtype=float)
    f = gamma_r * resonance * (CENTROIDS[target] - v)
    if eps != 0.0:
        u = np.asarray(u_pert, float) if u_pert is not None else np.zeros(3)
        nu = np.linalg.norm(u)
        if nu > 0:
            f = f + gamma_eps * eps * (u / nu)
    return f


@dataclass
class DynamicsState:
    """Second-order state of the emotional point mass."""

    e: np.ndarray
    v: np.ndarray

    @classmethod
    def at(cls, e) -> "DynamicsState":
        return cls(e=np.asarray(e, dtype=float).copy(), v=np.zeros(3))


def dynamics_step(
    state: DynamicsState,
    force: np.ndarray | None = None,
    mass: float = 1.0,
    damping: float = 0.8,
    dt: float = 1.0,
    wells=None,
) -> DynamicsState:
    """One semi-implicit Euler step of m e'' + mu e' = -grad V + F.

    The potential wells are attractive, so the driving term is the
    negative well gradient plus external force; the new position is
    clipped into the unit cube.
    """
    f = -(-potential_gradient(state.e, wells))  # toward the wells
    if force is not None:
        f = f + np.asarray(force, float)
    a = (f - damping * state.v) / mass
    v_new = state.v + dt * a
    e_new = np.clip(state.e + dt * v_new, 0.0, 1.0)
    return DynamicsState(e=e_new, v=v_new)


def collapse_trigger(e, centroid, dsc_dt: float,
                     dist_threshold: float = 0.35,
                     rate_threshold: float = 0.15) -> bool:
    """Collapse precondition: far from the home centroid AND SC rising fast."""
    d = float(np.linalg.norm(np.asarray(e, float) - np.asarray(centroid, float)))
    return d > dist_threshold and dsc_dt > rate_threshold


def drift_angle(delta_sc: float, delta_le: float) -> float:
    """Drift direction angle atan2(dLE, dSC) in (-pi, pi]."""
    return math.atan2(delta_le, delta_sc)
