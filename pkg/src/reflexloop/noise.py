"""Deterministic ASCII noise-field generation and characterization.

A noise field is a printable-ASCII character sequence (code points 33..126)
derived from a hashed seed.  The field carries entropy and irregularity
statistics that downstream persona-seed extraction consumes.
"""

from __future__ import annotations

import hashlib
import math
import random
from collections import Counter
from dataclasses import dataclass

ASCII_LO = 33
ASCII_HI = 126
ALPHABET_SIZE = ASCII_HI - ASCII_LO + 1  # 94 printable symbols
H_MAX = math.log2(ALPHABET_SIZE)  # ~6.5546 bits/char

# Small fixed kana set for the optional injection mode.
_KANA = "アイウエオカキクケコ"

# Characters drawn on for entropy raising / burst injection: a spread of
# symbols, digits and both letter cases so a burst is locally high-variety.
# Exactly 25 distinct symbols: uniform draws land at log2(25) ~ 4.64 bits,
# inside the default entropy target band, so injection converges.
_HIGH_VARIETY = "!@#$%^&*~+:-|<>,.aZ3qX8mK"


class NoiseError(ValueError):
    """Invalid input to a noise operation."""


@dataclass(frozen=True)
class StochasticSignals:
    """External stochastic inputs: nine rate-like values plus a timestamp.

    Parameters
    ----------
    rates : tuple of 9 floats
        Exchange-rate-like dimensionless values.
    timestamp_us : int
        Microsecond timestamp, >= 0.
    """

    rates: tuple
    timestamp_us: int

    def __post_init__(self):
        if len(self.rates) != 9:
            raise NoiseError(f"expected exactly 9 rates, got {len(self.rates)}")
        for r in self.rates:
            if not math.isfinite(r):
                raise NoiseError(f"non-finite rate: {r!r}")
        if self.timestamp_us < 0:
            raise NoiseError("timestamp_us must be >= 0")


@dataclass(frozen=True)
class NoiseConfig:
    """Configuration for field sizing, entropy targets and bursts."""

    L_base: int = 1200
    amplitude_A: float = 1.8
    swing_chars: float | None = None  # explicit override of the length swing
    phi_noise: float = 0.15
    psi_0: float = 0.0
    entropy_lo: float = 4.2
    entropy_hi: float = 4.8
    burst_kappa: float = 0.08
    burst_sigma: float = 150.0
    max_rejection_iters: int = 5
    inject_kana: bool = False
    kana_prob: float = 0.15

    @property
    def effective_swing(self) -> float:
        """Length swing in characters.

        The dimensionless amplitude A is scaled so the default A = 1.8
        produces a +/-400-char swing around L_base; an explicit
        ``swing_chars`` overrides the scaling.
        """
        if self.swing_chars is not None:
            return self.swing_chars
        return self.amplitude_A * 400.0 / 1.8


@dataclass(frozen=True)
class NoiseField:
    """An ASCII noise field with provenance and summary statistics."""

    chars: str
    seed: int
    entropy_bits: float
    tau_irregularity: float
    warning: str | None = None

    @property
    def length(self) -> int:
        return len(self.chars)

    def __post_init__(self):
        for ch in self.chars:
            cp = ord(ch)
            if not (ASCII_LO <= cp <= ASCII_HI) and ch not in _KANA:
                raise NoiseError(f"code point out of range: {cp}")


def derive_seed(signals: StochasticSignals) -> int:
    """Hash the stochastic signals into a 32-bit unsigned seed.

    Serialization: each rate rendered with ``repr``-style decimal text,
    joined by ``"|"`` with the timestamp last, encoded UTF-8, SHA-256
    hashed; the first four digest bytes (big-endian) reduced mod 2**32.
    """
    parts = [_format_rate(r) for r in signals.rates]
    parts.append(str(signals.timestamp_us))
    payload = "|".join(parts).encode("utf-8")
    digest = hashlib.sha256(payload).digest()
    return int.from_bytes(digest[:4], "big") % (2 ** 32)


def _format_rate(r: float) -> str:
    # Integral floats render as e.g. "1.0" to keep the serialization stable
    # across int/float inputs.
    return repr(float(r))


def field_length(n: int, cfg: NoiseConfig = NoiseConfig()) -> int:
    """Cycle-indexed field length: a clamped sinusoid around L_base."""
    if n < 1:
        raise NoiseError("cycle index must be >= 1")
    raw = cfg.L_base + cfg.effective_swing * math.sin(
        2.0 * math.pi * cfg.phi_noise * n + cfg.psi_0
    )
    return int(min(2000, max(500, round(raw))))


def generate_field(seed: int, length: int) -> NoiseField:
    """Generate a deterministic noise field of exactly ``length`` chars.

    Characters are ``33 + (draw mod 94)`` from a Mersenne-Twister stream
    seeded with ``seed`` (CPython ``random.Random``), giving bit-exact
    reproducibility for a fixed interpreter-independent algorithm.
    """
    if not (1 <= length <= 10_000):
        raise NoiseError(f"length must be in [1, 10000], got {length}")
    rng = random.Random(seed)
    chars = "".join(
        chr(ASCII_LO + (rng.getrandbits(32) % ALPHABET_SIZE)) for _ in range(length)
    )
    f = _with_stats(chars, seed)
    return f


def _with_stats(chars: str, seed: int, warning: str | None = None) -> NoiseField:
    return NoiseField(
        chars=chars,
        seed=seed,
        entropy_bits=shannon_entropy(chars),
        tau_irregularity=transition_irregularity(chars) if len(chars) >= 2 else 0.0,
        warning=warning,
    )


def shannon_entropy(chars) -> float:
    """Per-character Shannon entropy in bits over empirical frequencies."""
    if len(chars) == 0:
        raise NoiseError("entropy of empty sequence is undefined")
    n = len(chars)
    counts = Counter(chars)
    return -sum((c / n) * math.log2(c / n) for c in counts.values())


def char_class(ch: str) -> int:
    """Character class: 0 = digit, 1 = letter, 2 = other printable."""
    if ch.isdigit():
        return 0
    if ch.isalpha():
        return 1
    return 2


def transition_irregularity(chars) -> float:
    """Fraction of adjacent pairs that cross character-class boundaries.

    tau = 1 - (1/(n-1)) * sum_i delta(class_i == class_{i+1}), in [0, 1].
    """
    if len(chars) < 2:
        raise NoiseError("need at least 2 characters")
    same = sum(
        1 for a, b in zip(chars, chars[1:]) if char_class(a) == char_class(b)
    )
    return 1.0 - same / (len(chars) - 1)


def normalize_entropy(
    fld: NoiseField, cfg: NoiseConfig = NoiseConfig(), rng: random.Random | None = None
) -> NoiseField:
    """Nudge field entropy into [entropy_lo, entropy_hi] by rejection.

    Low-entropy fields receive injected high-variety symbols; high-entropy
    fields receive modal-character substitutions.  After
    ``max_rejection_iters`` failed attempts the current best field is
    returned with a warning flag set.
    """
    rng = rng if rng is not None else random.Random(fld.seed ^ 0x5EED)
    chars = list(fld.chars)
    for _ in range(cfg.max_rejection_iters):
        h = shannon_entropy(chars)
        if cfg.entropy_lo <= h <= cfg.entropy_hi:
            return _with_stats("".join(chars), fld.seed)
        if h < cfg.entropy_lo:
            # inject variety at random positions
            for _ in range(max(1, len(chars) // 3)):
                i = rng.randrange(len(chars))
                chars[i] = rng.choice(_HIGH_VARIETY)
        else:
            # substitute toward the modal character to lower entropy
            mode = Counter(chars).most_common(1)[0][0]
            for _ in range(max(1, len(chars) // 7)):
                i = rng.randrange(len(chars))
                chars[i] = mode
    h = shannon_entropy(chars)
    if cfg.entropy_lo <= h <= cfg.entropy_hi:
        return _with_stats("".join(chars), fld.seed)
    return _with_stats(
        "".join(chars), fld.seed, warning="entropy-normalization-failed"
    )


def inject_bursts(
    fld: NoiseField, cfg: NoiseConfig = NoiseConfig(), rng: random.Random | None = None
) -> NoiseField:
    """Overwrite short high-variety bursts at stochastic positions.

    Burst starts are spaced by exponentially distributed gaps whose mean is
    ``burst_sigma * 0.08 / burst_kappa`` characters, so the defaults yield
    roughly 6-8 bursts per 1200 characters; each burst spans 5-15
    characters.  ``burst_kappa == 0`` leaves the field unchanged.
    """
    if cfg.burst_kappa <= 0:
        return fld
    rng = rng if rng is not None else random.Random(fld.seed ^ 0xB0B5)
    chars = list(fld.chars)
    mean_gap = cfg.burst_sigma * 0.08 / cfg.burst_kappa
    pos = 0
    while True:
        gap = rng.expovariate(1.0 / mean_gap)
        pos += max(1, int(round(gap)))
        if pos >= len(chars):
            break
        burst_len = rng.randint(5, 15)
        for i in range(pos, min(pos + burst_len, len(chars))):
            if cfg.inject_kana and rng.random() < cfg.kana_prob:
                chars[i] = rng.choice(_KANA)
            else:
                chars[i] = rng.choice(_HIGH_VARIETY)
        pos += burst_len
    return _with_stats("".join(chars), fld.seed, warning=fld.warning)


def count_bursts_positions(cfg: NoiseConfig, length: int, rng: random.Random) -> int:
    """Count how many bursts inject_bursts would place (test helper)."""
    if cfg.burst_kappa <= 0:
        return 0
    mean_gap = cfg.burst_sigma * 0.08 / cfg.burst_kappa
    pos = 0
    count = 0
    while True:
        gap = rng.expovariate(1.0 / mean_gap)
        pos += max(1, int(round(gap)))
        if pos >= length:
            break
        count += 1
        pos += rng.randint(5, 15)
    return count


def make_field(
    signals: StochasticSignals,
    n: int = 1,
    cfg: NoiseConfig = NoiseConfig(),
) -> NoiseField:
    """Full pipeline: derive seed, size, generate, normalize, burst."""
    seed = derive_seed(signals)
    length = field_length(n, cfg)
    fld = generate_field(seed, length)
    fld = normalize_entropy(fld, cfg)
    return inject_bursts(fld, cfg)
