"""Text generation backends: a deterministic mock generator for offline
closed-loop runs, the prompt builder, output quality gate, and a thin
JSON chat-completion adapter for live backends.

The mock generator is not a language model: it emits token streams whose
*measured* statistics (punctuation coefficient, emotion-marker density,
lexical entropy, metaphor rate) track the requested targets, so the full
analysis-feedback loop can run and be tested without network access.
"""

from __future__ import annotations

import json
import math
import os
import random
from dataclasses import dataclass, field as dc_field

import numpy as np

from .lexicons import load_markers, neutral_filler

MODES = ("calm", "resonant", "collapse", "recovery")

# Mean output length (tokens) per persona pole, interpolated by
# inverse distance in the emotional space.
PERSONA_LENGTH = {
    "Observer": (np.array([0.42, 0.12, 0.58]), 110.0),
    "Resonator": (np.array([0.73, -0.38, 0.81]), 95.0),
    "Constructor": (np.array([0.31, 0.54, 0.33]), 125.0),
}

# Baseline punctuation coefficient and metaphor emission rate per pole.
PERSONA_KAPPA = {"Observer": 1.21, "Resonator": 1.89, "Constructor": 1.54}
PERSONA_METAPHOR = {"Observer": 0.030, "Resonator": 0.060, "Constructor": 0.020}


class GeneratorError(ValueError):
    """Invalid generation request or unusable backend response."""


class RetriableError(GeneratorError):
    """Transient backend failure; the call may be retried."""


class PermanentError(GeneratorError):
    """Non-retriable backend failure (bad request / malformed reply)."""


@dataclass(frozen=True)
class GenRequest:
    """One generation request: persona state plus per-cycle targets."""

    persona: tuple  # (sc, le, lr)
    cycle: int = 1
    mode: str = "calm"
    kappa_target: float | None = None  # None: derive from persona
    p_metaphor: float | None = None    # None: derive from persona
    p_selfref: float = 0.0
    p_echo: float = 0.0
    echo_phrase: str = ""
    length_sigma: float = 15.0

    def __post_init__(self):
        if len(self.persona) != 3:
            raise GeneratorError("persona must be 3-dimensional")
        if self.mode not in MODES:
            raise GeneratorError(f"unknown mode {self.mode!r}")


def _interp(persona, table) -> float:
    """Inverse-distance interpolation over the three persona poles."""
    p = np.asarray(persona, dtype=float)
    num = den = 0.0
    for name, (centroid, *_rest) in PERSONA_LENGTH.items():
        d = float(np.linalg.norm(p - centroid))
        if d < 1e-9:
            return table[name]
        w = 1.0 / d
        num += w * table[name]
        den += w
    return num / den


def persona_kappa(persona) -> float:
    return _interp(persona, PERSONA_KAPPA)


def persona_metaphor_rate(persona) -> float:
    return _interp(persona, PERSONA_METAPHOR)


def persona_length(persona) -> float:
    return _interp(persona, {k: v for k, (_c, v) in PERSONA_LENGTH.items()})


# ---------------------------------------------------------------------------
# Mock generation
# ---------------------------------------------------------------------------

def _vocab_pools():
    markers = load_markers()
    latin = lambda ws: [w for w in ws if all(ord(c) < 128 for c in w)]
    emo = latin(markers["emotional"].weights)
    soc = latin(markers["social"].weights)
    meta = markers["metaphor"].groups
    nouns = latin(meta["abstract_nouns"]["words"])
    verbs = latin(
        meta["motion_verbs"]["words"] + meta["transformation_verbs"]["words"]
    )
    return {
        "filler": list(neutral_filler()),
        "emotional": emo,
        "social": soc,
        "meta_nouns": nouns,
        "meta_verbs": verbs,
    }


def mock_generate(req: GenRequest, seed: int) -> str:
    """Deterministic mock text for one cycle.

    The emitted stream is a whitespace-tokenizable pseudo-text whose
    measured punctuation coefficient approaches ``kappa_target``, whose
    metaphor spans appear at roughly ``p_metaphor`` per word, and whose
    lexical diversity / emotion-marker density depend on ``mode``:

    - calm:      wide flat vocabulary, few emotion markers
    - resonant:  narrow chant-like vocabulary, dense emotion/social markers
    - collapse:  fragmented one-off pseudo-tokens, ellipsis-heavy
    - recovery:  like calm with a reduced vocabulary
    """
    rng = random.Random((seed << 20) ^ (req.cycle * 0x9E3779B1 & 0xFFFFFFFF))
    pools = _vocab_pools()
    n_tokens = int(
        min(150, max(80, round(rng.gauss(persona_length(req.persona),
                                         req.length_sigma))))
    )

    words: list[str] = []
    if req.mode == "calm":
        vocab = pools["filler"][:120]
        for _ in range(n_tokens):
            words.append(rng.choice(vocab))
            if rng.random() < 0.04:
                words.append(rng.choice(pools["emotional"]))
    elif req.mode == "resonant":
        # chant-like repetition: tiny vocabulary -> high coherence,
        # dense emotion/social markers -> high measured intensity
        chant = pools["emotional"][:2] + pools["social"][:2]
        for _ in range(n_tokens):
            words.append(rng.choice(chant))
    elif req.mode == "collapse":
        # heavy-weight markers (heart/interjection classes) against
        # one-off fragments: high emotional intensity + maximal dispersion
        intense = pools["emotional"][6:9]
        for i in range(n_tokens):
            if rng.random() < 0.55:
                words.append(rng.choice(intense))
            else:
                words.append(f"frag{req.cycle}x{i}{rng.randrange(1000)}")
    elif req.mode == "recovery":
        vocab = pools["filler"][:40]
        for _ in range(n_tokens):
            words.append(rng.choice(vocab))

    # metaphor insertion: abstract noun + figurative verb bigrams
    p_meta = (
        req.p_metaphor
        if req.p_metaphor is not None
        else persona_metaphor_rate(req.persona)
    )
    n_meta = int(round(p_meta * n_tokens))
    for _ in range(n_meta):
        pos = rng.randrange(len(words) + 1)
        words[pos:pos] = [rng.choice(pools["meta_nouns"]),
                          rng.choice(pools["meta_verbs"])]

    # emergent behaviors
    if rng.random() < req.p_selfref:
        pos = rng.randrange(len(words) + 1)
        words[pos:pos] = ["these", "words", "watch", "themselves"]
    if req.p_echo > 0 and req.echo_phrase and rng.random() < req.p_echo:
        pos = rng.randrange(len(words) + 1)
        words[pos:pos] = req.echo_phrase.split()

    # punctuation emission toward the kappa target
    kappa = (
        req.kappa_target
        if req.kappa_target is not None
        else persona_kappa(req.persona)
    )
    if req.mode == "collapse":
        out = _punctuate(words, kappa, rng, ellipsis_heavy=True)
    else:
        out = _punctuate(words, max(0.0, kappa), rng, ellipsis_heavy=False)
    return out


def _punctuate(words, kappa: float, rng: random.Random,
               ellipsis_heavy: bool) -> str:
    """Distribute punctuation so the D22-weighted coefficient ~= kappa.

    Measured kappa = (100 m / chars / 4.2) * wf, with wf the weighted
    type-frequency sum; solve for the mark count m given the emitted
    mix (3:1 period:comma, wf = 0.95; collapse mode uses an
    ellipsis/dash/period mix, wf ~= 2.08).
    """
    chars = sum(len(w) for w in words)
    if ellipsis_heavy:
        wf, mix = 2.0833, ("...", "...", "...", "—", "—", ".")
    else:
        wf, mix = 0.95, (".", ".", ".", ",")
    m = max(1, int(round(kappa * 4.2 * chars / (100.0 * wf))))
    m = min(m, max(1, len(words) // 2))
    positions = sorted(rng.sample(range(1, len(words) + 1), min(m, len(words))))
    out = []
    k = 0
    for i, w in enumerate(words, start=1):
        out.append(w)
        if k < len(positions) and i == positions[k]:
            out.append(mix[k % len(mix)])
            k += 1
    if out[-1] not in mix:
        out.append(".")
    return " ".join(out)


# ---------------------------------------------------------------------------
# Prompt construction
# ---------------------------------------------------------------------------

PROMPT_SECTIONS = (
    "persona", "emotional state", "noise field",
    "previous summary", "resonance feedback", "instruction",
)

EMPTY_HISTORY = "(no previous cycles)"


def build_prompt(
    persona_desc: str,
    emotional_state,
    noise_field: str,
    prev_summary: str | None,
    resonance: float | None,
    instruction: str,
) -> str:
    """Assemble the labeled six-section generation prompt."""
    sc, le, lr = emotional_state
    lines = [
        "[persona]",
        persona_desc,
        "",
        "[emotional state]",
        f"SC={sc:.3f} LE={le:.3f} LR={lr:.3f}",
        "",
        "[noise field]",
        noise_field,
        "",
        "[previous summary]",
        prev_summary if prev_summary else EMPTY_HISTORY,
        "",
        "[resonance feedback]",
        f"{resonance:.3f}" if resonance is not None else EMPTY_HISTORY,
        "",
        "[instruction]",
        instruction,
    ]
    return "\n".join(lines)


def shrink_noise_field(noise_field: str, factor: float = 0.8) -> str:
    """Drop the tail of the noise field (retry path after a failed check)."""
    keep = max(1, int(len(noise_field) * factor))
    return noise_field[:keep]


# ---------------------------------------------------------------------------
# Output quality gate
# ---------------------------------------------------------------------------

TERMINAL_PUNCT = set(".!?。！？…")


def quality_check(
    text: str,
    min_words: int = 60,
    max_words: int = 200,
    expect_latin: bool = True,
    min_language_ratio: float = 0.6,
) -> list[str]:
    """Return a list of failed-check names (empty list = pass)."""
    issues = []
    words = text.split()
    if not (min_words <= len(words) <= max_words):
        issues.append("length")
    letters = [c for c in text if c.isalpha()]
    if letters:
        ascii_ratio = sum(1 for c in letters if ord(c) < 128) / len(letters)
        ratio = ascii_ratio if expect_latin else 1.0 - ascii_ratio
        if ratio < min_language_ratio:
            issues.append("language-ratio")
    stripped = text.rstrip()
    if not stripped or stripped[-1] not in TERMINAL_PUNCT:
        issues.append("truncation")
    return issues


# ---------------------------------------------------------------------------
# Live backend adapter
# ---------------------------------------------------------------------------

API_KEY_ENV = "REFLEXLOOP_API_KEY"


@dataclass
class LLMAdapter:
    """JSON chat-completion client over an injectable transport.

    ``transport(payload: dict) -> dict`` performs the actual request;
    network-level failures must be raised as ConnectionError or
    TimeoutError (mapped to RetriableError), anything else is treated
    as permanent.  Credentials come from the environment, never from
    configuration files.
    """

    transport: object
    model: str = "default"
    max_retries: int = 3
    sleeper: object = None  # injectable for tests
    extra_headers: dict = dc_field(default_factory=dict)

    def api_key(self) -> str:
        key = os.environ.get(API_KEY_ENV, "")
        if not key:
            raise PermanentError(f"missing credential: set {API_KEY_ENV}")
        return key

    def generate(self, prompt: str) -> str:
        payload = {
            "model": self.model,
            "messages": [{"role": "user", "content": prompt}],
        }
        last = None
        for attempt in range(self.max_retries):
            try:
                reply = self.transport(payload)
            except (ConnectionError, TimeoutError) as exc:
                last = RetriableError(str(exc))
                if self.sleeper:
                    self.sleeper(2.0 ** attempt)
                continue
            return self._extract(reply)
        raise last

    @staticmethod
    def _extract(reply) -> str:
        if isinstance(reply, str):
            try:
                reply = json.loads(reply)
            except json.JSONDecodeError as exc:
                raise PermanentError(f"malformed reply: {exc}") from None
        try:
            return reply["choices"][0]["message"]["content"]
        except (KeyError, IndexError, TypeError):
            raise PermanentError("malformed reply: missing content") from None


def local_stub_transport(payload: dict) -> dict:
    """Offline transport satisfying the adapter contract (echo stub)."""
    if "messages" not in payload or not payload["messages"]:
        raise ValueError("bad payload")
    content = payload["messages"][-1]["content"]
    return {
        "choices": [
            {"message": {"role": "assistant",
                         "content": f"stub reply to {len(content)} chars."}}
        ]
    }
