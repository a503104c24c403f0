"""Closed-loop session driver: noise -> targets -> generation -> analysis
-> resonance -> persona update, with JSONL logging, anomaly scanning,
parameter sweeps and export.

Runs are fully deterministic for a given (config, seed): mock mode uses
a virtual clock and derived per-cycle noise seeds, so re-running a
session reproduces the log byte for byte.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
import random
from dataclasses import dataclass, field as dc_field, asdict

import numpy as np

from . import cycles as cyc
from . import generator as gen
from . import noise
from . import reflex
from . import textmetrics as tm
from .lexicons import load_markers

VIRTUAL_EPOCH_US = 1_700_000_000_000_000
VIRTUAL_STEP_US = 90_000_000  # 90 s per cycle


class SessionError(ValueError):
    """Invalid session configuration or log input."""


# Accepted parameter ranges; construction fails outside them unless
# explicitly overridden.
PARAM_RANGES = {
    "phi_noise": (0.01, 0.7),
    "phi_rhythm": (0.02, 1.0),
    "phi_resonance": (0.1, 2.0),
    "alpha": (0.01, 0.5),
    "lam": (0.1, 0.9),
    "amplitude_A": (0.5, 3.0),
    "amplitude_B": (0.2, 2.0),
    "gamma": (0.1, 1.0),
    "tau_hs": (0.10, 0.25),
    "tau_c": (0.05, 0.30),
    "r_min": (0.4, 0.8),
}


@dataclass(frozen=True)
class SessionConfig:
    phi_noise: float = 0.15
    phi_rhythm: float = 0.25
    phi_resonance: float = 0.8
    alpha: float = 0.12
    lam: float = 0.6
    amplitude_A: float = 1.8
    amplitude_B: float = 1.2
    gamma: float = 0.35
    tau_hs: float = 0.15
    tau_c: float = 0.18
    r_min: float = 0.6
    seed: int = 1
    persona_text: str = "an observer of quiet structures"
    allow_out_of_range: bool = False

    def __post_init__(self):
        if self.allow_out_of_range:
            return
        for name, (lo, hi) in PARAM_RANGES.items():
            v = getattr(self, name)
            if not (lo <= v <= hi):
                raise SessionError(
                    f"{name}={v} outside typical range [{lo}, {hi}] "
                    "(set allow_out_of_range to force)"
                )

    @classmethod
    def from_dict(cls, d: dict) -> "SessionConfig":
        return cls(**d)

    def to_dict(self) -> dict:
        return asdict(self)


# ---------------------------------------------------------------------------
# Persona initialization
# ---------------------------------------------------------------------------

def init_persona(text: str) -> tuple[np.ndarray, bool]:
    """Hash a persona description into an initial (SC, LE, LR) point.

    The SHA-256 of the first 256 characters yields three two-digit
    components from the leading four digest bytes.  Shorter inputs hash
    in full and set the returned short-input flag.
    """
    if not text:
        raise SessionError("persona text must be non-empty")
    short = len(text) < 256
    h = hashlib.sha256(text[:256].encode("utf-8")).digest()
    word = int.from_bytes(h[:4], "big")
    vec = np.array([
        (word % 100) / 100.0,
        ((word >> 8) % 100) / 100.0,
        ((word >> 16) % 100) / 100.0,
    ])
    return vec, short


def blend_persona(e_prev, e_seed, carry: float = 0.85) -> np.ndarray:
    """Warm-start blend of a previous state with a fresh hashed seed."""
    return carry * np.asarray(e_prev, float) + (1 - carry) * np.asarray(e_seed, float)


# ---------------------------------------------------------------------------
# Per-cycle analysis
# ---------------------------------------------------------------------------

H_LEX_REF = 6.65  # reference lexical entropy for coherence scaling


def analyze_cycle(text: str) -> dict:
    """Scalar observables of one generated text.

    coherence      1 - mean of (scaled lexical entropy, normalized
                   semantic entropy): repetitive focused text scores high
    emotion        weighted emotion-marker density per word
    social         weighted social-marker density per word
    h_s            semantic entropy normalized by log2(word count)
    """
    stream = tm.tokenize(text, "whitespace-latin")
    words = stream.surfaces(words_only=True)
    if len(words) < 4:
        raise SessionError("generated text too short to analyze")
    markers = load_markers()
    h_lex, _ = tm.token_entropy(stream, "unigram")
    h_s = tm.semantic_entropy(stream, n_segments=1)[0]
    h_s_norm = h_s / math.log2(len(words))
    coherence = min(1.0, max(0.0, 1.0 - 0.5 * (h_lex / H_LEX_REF + h_s_norm)))
    emotion = markers["emotional"].count_weighted(words) / len(words)
    social = markers["social"].count_weighted(words) / len(words)
    kappa_p = tm.punctuation_coefficient(stream, "D22")
    return {
        "coherence": coherence,
        "emotion": emotion,
        "social": social,
        "h_lex": h_lex,
        "h_s": h_s_norm,
        "kappa_p": kappa_p,
        "token_count": len(words),
    }


def schedule_mode(n: int, phi_noise: float, offset: float = 0.0) -> str:
    """Map the cycle's phase position onto a generation mode.

    One full noise period (2 pi / phi_noise cycles) runs calm ->
    resonant -> collapse -> recovery, so collapse onsets recur once per
    period.
    """
    u = (phi_noise * n / (2.0 * math.pi) + offset) % 1.0
    if u < 0.70:
        return "calm"
    if u < 0.85:
        return "resonant"
    if u < 0.95:
        return "collapse"
    return "recovery"


# ---------------------------------------------------------------------------
# Session loop
# ---------------------------------------------------------------------------

def _cycle_signals(rng: random.Random, n: int) -> noise.StochasticSignals:
    rates = tuple(round(0.5 + rng.random() * 2.0, 6) for _ in range(9))
    return noise.StochasticSignals(
        rates=rates, timestamp_us=VIRTUAL_EPOCH_US + n * VIRTUAL_STEP_US
    )


def run_session(
    config: SessionConfig,
    n_cycles: int,
    generator: str = "mock",
    log_path: str | None = None,
    adapter: gen.LLMAdapter | None = None,
) -> list[dict]:
    """Run the full reflex loop for ``n_cycles`` and return log records.

    Each cycle: (1) derive a noise seed and field, (2) compute the
    fluctuation f(n) with decayed resonance memory, (3) schedule the
    generation mode from the noise phase, (4) derive feature targets,
    (5) generate text, (6) quality-gate with one retry, (7) analyze the
    text into observables and resonance, (8) classify the phase and
    update the persona state.  Failures mark the cycle and continue.
    """
    if n_cycles < 1:
        raise SessionError("n_cycles must be >= 1")
    if generator not in ("mock", "live"):
        raise SessionError(f"unknown generator {generator!r}")
    if generator == "live" and adapter is None:
        raise SessionError("live generation requires an adapter")

    sig_rng = random.Random(config.seed ^ 0x51674A1)
    e, _short = init_persona(config.persona_text)
    fl_params = reflex.FluctuationParams(
        phi_noise=config.phi_noise, phi_rhythm=config.phi_rhythm
    )
    noise_cfg = noise.NoiseConfig(
        phi_noise=config.phi_noise, amplitude_A=config.amplitude_A
    )

    records: list[dict] = []
    r_history: list[float] = []
    prev_obs: dict | None = None
    phase_labels: list[str] = []

    for n in range(1, n_cycles + 1):
        try:
            rec = _run_one_cycle(
                n, config, e, sig_rng, fl_params, noise_cfg,
                r_history, prev_obs, generator, adapter,
            )
        except Exception as exc:  # mark and continue
            records.append({"cycle": n, "failed": True, "error": str(exc)})
            continue
        e = np.array([
            rec["persona_vector"]["SC"],
            rec["persona_vector"]["LE"],
            rec["persona_vector"]["LR"],
        ])
        r_history.append(rec["resonance"])
        prev_obs = rec["metrics"]
        phase_labels.append(rec["phase"])
        records.append(rec)
        if n % 10 == 0:
            records.append(_summary_record(n, records))

    if log_path:
        with open(log_path, "w", encoding="utf-8") as fh:
            for rec in records:
                fh.write(json.dumps(rec, ensure_ascii=False) + "\n")
    return records


def _run_one_cycle(
    n, config, e, sig_rng, fl_params, noise_cfg,
    r_history, prev_obs, generator, adapter,
) -> dict:
    signals = _cycle_signals(sig_rng, n)
    fld = noise.make_field(signals, n=n, cfg=noise_cfg)

    memory = (
        reflex.reflex_memory(r_history, "normalized", gamma=config.gamma,
                             lam=config.lam)
        if r_history else 0.0
    )
    f_n = reflex.fluctuation(
        n, "adaptive" if len(r_history) >= 5 else "extended",
        params=fl_params, memory=memory,
        resonance_window=r_history[-5:] if len(r_history) >= 5 else None,
    )
    mode = schedule_mode(n, config.phi_noise)
    targets = reflex.feature_targets(
        f_n, r_history[-1] if r_history else 0.5,
        eps=memory, t=n,
        bases=reflex.TargetBases(phi_noise=config.phi_noise),
    )
    kappa_target = targets["kappa_p"] * (6.0 if mode == "collapse" else 1.0)
    req = gen.GenRequest(
        persona=tuple(float(x) for x in e),
        cycle=n,
        mode=mode,
        kappa_target=kappa_target,
        p_metaphor=targets["p_metaphor"],
        p_selfref=reflex.self_reference_probability(memory),
        p_echo=reflex.echo_probability(1) if r_history else 0.0,
        echo_phrase="the river returns",
    )

    if generator == "mock":
        text = gen.mock_generate(req, fld.seed)
        if gen.quality_check(text):
            text = gen.mock_generate(req, fld.seed + 1)
    else:
        prompt = gen.build_prompt(
            config.persona_text, tuple(e), fld.chars[:160],
            None if not r_history else "previous cycle summary",
            r_history[-1] if r_history else None,
            "Write one reflective paragraph.",
        )
        text = adapter.generate(prompt)
        if gen.quality_check(text):
            text = adapter.generate(
                gen.build_prompt(
                    config.persona_text, tuple(e),
                    gen.shrink_noise_field(fld.chars[:160]),
                    None, r_history[-1] if r_history else None,
                    "Write one reflective paragraph.",
                )
            )

    obs = analyze_cycle(text)
    o_vec = np.array([
        obs["coherence"],
        min(1.0, obs["emotion"]),
        min(1.0, 2.0 * obs["social"]),
    ])
    resonance = reflex.resonance_cosine(o_vec, e, config.phi_resonance)
    r_mean = float(np.mean(r_history)) if r_history else resonance
    lambda_t = reflex.integration_rate(resonance, r_mean)

    if prev_obs is None:
        deltas = {"dC": 0.0, "dE": 0.0, "dH": 0.0}
    else:
        deltas = {
            "dC": obs["coherence"] - prev_obs["coherence"],
            "dE": obs["emotion"] - prev_obs["emotion"],
            "dH": obs["h_s"] - prev_obs["h_s"],
        }
    phase = cyc.classify_phase(
        cyc.CycleObservation(deltas["dC"], deltas["dE"], deltas["dH"], resonance)
    )

    g = reflex.persona_gradient(e, "metric-proxy", observed=e, target=o_vec)
    e_new = reflex.persona_update(
        e, g, resonance, alpha=config.alpha, theta_r=config.r_min
    )

    return {
        "cycle": n,
        "timestamp": signals.timestamp_us,
        "noise_seed": fld.seed,
        "persona_vector": {
            "SC": round(float(e_new[0]), 9),
            "LE": round(float(e_new[1]), 9),
            "LR": round(float(e_new[2]), 9),
        },
        "resonance": round(float(resonance), 9),
        "semantic_entropy": round(obs["h_s"], 9),
        "phase": phase,
        "deltas": {k: round(v, 9) for k, v in deltas.items()},
        "metrics": {k: (round(v, 9) if isinstance(v, float) else v)
                    for k, v in obs.items()},
        "text_output": text,
        "token_count": obs["token_count"],
        "f_n": round(float(f_n), 9),
        "lambda_t": round(float(lambda_t), 9),
    }


def _summary_record(n: int, records) -> dict:
    window = [r for r in records if not r.get("failed") and "phase" in r
              and r.get("cycle", 0) > n - 10]
    counts: dict[str, int] = {}
    for r in window:
        counts[r["phase"]] = counts.get(r["phase"], 0) + 1
    return {
        "summary_through_cycle": n,
        "mean_resonance": round(float(np.mean([r["resonance"] for r in window])), 9)
        if window else 0.0,
        "mean_semantic_entropy": round(
            float(np.mean([r["semantic_entropy"] for r in window])), 9
        ) if window else 0.0,
        "phase_counts": dict(sorted(counts.items())),
    }


def cycle_records(records) -> list[dict]:
    """Filter a log down to successful per-cycle records."""
    return [r for r in records if "phase" in r and not r.get("failed")]


# ---------------------------------------------------------------------------
# Anomaly scanning
# ---------------------------------------------------------------------------

def anomaly_scan(
    records,
    max_static: int = 8,
    max_step: float = 0.3,
    max_entropy: float = 1.2,
) -> list[dict]:
    """Scan a session log for stalls, runaway jumps and entropy spikes."""
    recs = cycle_records(records)
    out = []
    static_run = 0
    prev_e = None
    for r in recs:
        if r["phase"] in ("Static", "StaticReturn"):
            static_run += 1
            if static_run == max_static + 1:
                out.append({"kind": "static-stall", "cycle": r["cycle"]})
        else:
            static_run = 0
        ev = np.array([r["persona_vector"][k] for k in ("SC", "LE", "LR")])
        if prev_e is not None and float(np.max(np.abs(ev - prev_e))) > max_step:
            out.append({"kind": "runaway", "cycle": r["cycle"]})
        prev_e = ev
        if r["semantic_entropy"] > max_entropy:
            out.append({"kind": "entropy-spike", "cycle": r["cycle"]})
    return out


# ---------------------------------------------------------------------------
# Collapse periodicity and sweeps
# ---------------------------------------------------------------------------

def collapse_period(records) -> float | None:
    """Mean spacing between Collapse onsets; ACF of semantic entropy as
    a fallback; None with fewer than two Collapse events."""
    recs = cycle_records(records)
    labels = [r["phase"] for r in recs]
    spacings = cyc.collapse_spacings(labels)
    if spacings:
        return float(np.mean(spacings))
    hs = np.array([r["semantic_entropy"] for r in recs])
    if len(hs) >= 20 and np.std(hs) > 0:
        x = hs - hs.mean()
        denom = float(np.dot(x, x))
        acfs = [
            float(np.dot(x[: len(x) - k], x[k:])) / denom
            for k in range(2, len(x) // 2)
        ]
        if acfs and max(acfs) > 0.2:
            return float(2 + int(np.argmax(acfs)))
    return None


def sweep_phi_noise(phis, n_cycles: int = 300, seed: int = 1) -> dict:
    """Measured collapse period per phi_noise value."""
    out = {}
    for phi in phis:
        cfg = SessionConfig(phi_noise=phi, seed=seed)
        records = run_session(cfg, n_cycles)
        out[phi] = collapse_period(records)
    return out


# ---------------------------------------------------------------------------
# Export
# ---------------------------------------------------------------------------

CSV_COLUMNS = (
    "cycle", "timestamp", "noise_seed", "sc", "le", "lr", "resonance",
    "semantic_entropy", "phase", "dC", "dE", "dH", "f_n", "lambda_t",
    "token_count",
)


def export(records, path: str, fmt: str = "csv") -> None:
    """Write a session log as csv, seedfile (replay JSON) or plotdata."""
    recs = cycle_records(records)
    if fmt == "csv":
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(CSV_COLUMNS)
            for r in recs:
                w.writerow([
                    r["cycle"], r["timestamp"], r["noise_seed"],
                    r["persona_vector"]["SC"], r["persona_vector"]["LE"],
                    r["persona_vector"]["LR"], r["resonance"],
                    r["semantic_entropy"], r["phase"],
                    r["deltas"]["dC"], r["deltas"]["dE"], r["deltas"]["dH"],
                    r["f_n"], r["lambda_t"], r["token_count"],
                ])
    elif fmt == "seedfile":
        payload = {
            "noise_seeds": [r["noise_seed"] for r in recs],
            "final_persona": recs[-1]["persona_vector"] if recs else None,
        }
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True)
    elif fmt == "plotdata":
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(("cycle", "coherence", "emotion", "semantic_entropy",
                        "resonance", "phase"))
            for r in recs:
                w.writerow([
                    r["cycle"], r["metrics"]["coherence"],
                    r["metrics"]["emotion"], r["semantic_entropy"],
                    r["resonance"], r["phase"],
                ])
    else:
        raise SessionError(f"unknown export format {fmt!r}")


def export_phases_csv(records, path: str) -> None:
    """Phase table: cycle, deltas, drift angle, resonance, label."""
    recs = cycle_records(records)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(("cycle", "dC", "dE", "dHs", "theta_rad", "R", "label"))
        for r in recs:
            d = r["deltas"]
            theta = math.atan2(d["dE"], d["dC"])
            w.writerow([r["cycle"], d["dC"], d["dE"], d["dH"],
                        round(theta, 6), r["resonance"], r["phase"]])
