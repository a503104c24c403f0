"""Per-text linguistic metrics on token streams and dependency trees.

Covers rhythm density, punctuation coefficients, break frequency, metaphor
detection and waves, token/semantic entropy, burstiness, syntactic
complexity and the aggregate stability score.  All operations are pure
functions of (stream, config) and bit-reproducible.
"""

from __future__ import annotations

import hashlib
import math
import re
from collections import Counter
from dataclasses import dataclass, field as dc_field

import numpy as np

from .lexicons import load_markers, punct_class, punct_weights

SENTENCE_FINAL = set(".!?。！？…")
CLAUSE_SEPARATORS = set(",、:;：；—")
DIALOGUE_MARKS = set("「」『』\"'")


class MetricError(ValueError):
    """Invalid input to a text-metric operation."""


@dataclass(frozen=True)
class Token:
    surface: str
    kind: str  # "word" | "punct" | "dialogue-mark"

    @property
    def length(self) -> int:
        return len(self.surface)


@dataclass(frozen=True)
class TokenStream:
    """An ordered token sequence with sentence boundary indices."""

    tokens: tuple
    sentence_bounds: tuple  # indices of sentence-final tokens
    mode: str

    def __len__(self):
        return len(self.tokens)

    def surfaces(self, words_only: bool = False):
        if words_only:
            return [t.surface for t in self.tokens if t.kind == "word"]
        return [t.surface for t in self.tokens]

    def word_tokens(self):
        return [t for t in self.tokens if t.kind == "word"]

    def text(self) -> str:
        joiner = " " if self.mode == "whitespace-latin" else ""
        return joiner.join(t.surface for t in self.tokens)


_LATIN_SPLIT = re.compile(r"(\.\.\.|…|—|--|[.,!?;:\"'])")


def tokenize(text: str, mode: str = "whitespace-latin") -> TokenStream:
    """Deterministic segmentation with punctuation as standalone tokens."""
    if not text:
        raise MetricError("cannot tokenize empty text")
    tokens: list[Token] = []
    if mode == "whitespace-latin":
        for chunk in text.split():
            for piece in _LATIN_SPLIT.split(chunk):
                if not piece:
                    continue
                tokens.append(_make_token(piece))
    elif mode == "char-cjk":
        i = 0
        while i < len(text):
            ch = text[i]
            if ch.isspace():
                i += 1
                continue
            # group ellipsis runs
            if ch in "…‥" or text[i : i + 3] == "...":
                run = ch if ch in "…‥" else "..."
                tokens.append(Token(run, "punct"))
                i += len(run)
                continue
            tokens.append(_make_token(ch))
            i += 1
    elif mode == "external":
        # pre-tokenized input: whitespace-separated surfaces, no splitting
        for piece in text.split():
            tokens.append(_make_token(piece))
    else:
        raise MetricError(f"unknown tokenize mode {mode!r}")
    bounds = tuple(
        i for i, t in enumerate(tokens) if t.surface and t.surface[0] in SENTENCE_FINAL
    )
    return TokenStream(tokens=tuple(tokens), sentence_bounds=bounds, mode=mode)


def _make_token(piece: str) -> Token:
    if piece in DIALOGUE_MARKS:
        return Token(piece, "dialogue-mark")
    if punct_class(piece) is not None or (len(piece) == 1 and not piece.isalnum()
                                          and not _is_cjk_word_char(piece)):
        return Token(piece, "punct")
    return Token(piece, "word")


def _is_cjk_word_char(ch: str) -> bool:
    cp = ord(ch)
    return (
        0x3040 <= cp <= 0x30FF  # hiragana + katakana
        or 0x4E00 <= cp <= 0x9FFF  # CJK ideographs
        or 0xFF66 <= cp <= 0xFF9D
    )


# ---------------------------------------------------------------------------
# Rhythm density
# ---------------------------------------------------------------------------

def boundary_signal(stream: TokenStream) -> np.ndarray:
    """Binary per-token boundary indicator (sentence/clause markers)."""
    sig = np.zeros(len(stream))
    for i, t in enumerate(stream.tokens):
        if t.kind == "punct" and (
            t.surface[0] in SENTENCE_FINAL or t.surface[0] in CLAUSE_SEPARATORS
        ):
            sig[i] = 1.0
    return sig


def _acf_raw_normalized(b: np.ndarray, tau_max: int) -> np.ndarray:
    """Raw-product ACF of a binary signal, normalized by lag 0."""
    r0 = float(np.dot(b, b))
    if r0 == 0:
        return np.zeros(tau_max + 1)
    out = np.empty(tau_max + 1)
    for tau in range(tau_max + 1):
        out[tau] = float(np.dot(b[: len(b) - tau], b[tau:])) / r0
    return out


def rhythm_density(
    stream: TokenStream | None = None,
    variant: str = "combined",
    K_max: int = 50,
    alpha: float = 0.6,
    boundaries: np.ndarray | None = None,
    min_peak_lag: int = 5,
) -> float:
    """Rhythm density in [0, 1].

    Variants:

    ``acf-mean``
        Mean |ACF| of the token-length series over lags 1..K_max.
    ``psd-ratio``
        Dominant spectral component share: PSD_max / PSD_total of the
        token-length series (DC excluded).
    ``combined`` (default)
        alpha * boundary density + (1 - alpha) * dominant boundary-signal
        ACF peak at lag >= ``min_peak_lag``.
    """
    if variant == "combined":
        if boundaries is not None:
            b = np.asarray(boundaries, dtype=float)
        else:
            if stream is None or len(stream) < 10:
                raise MetricError("combined variant needs >= 10 tokens")
            b = boundary_signal(stream)
        n = len(b)
        tau_max = n // 3
        acf = _acf_raw_normalized(b, tau_max)
        if tau_max >= min_peak_lag:
            rho_acf = float(np.max(acf[min_peak_lag:]))
        else:
            rho_acf = 0.0
        return float(alpha * b.mean() + (1 - alpha) * rho_acf)

    if stream is None:
        raise MetricError("token stream required")
    lengths = np.array([t.length for t in stream.tokens], dtype=float)
    if len(lengths) < K_max + 2:
        raise MetricError(f"need >= {K_max + 2} tokens for variant {variant!r}")
    if variant == "acf-mean":
        x = lengths - lengths.mean()
        denom = float(np.dot(x, x))
        if denom == 0:
            raise MetricError("zero-variance token lengths")
        vals = [
            abs(float(np.dot(x[: len(x) - k], x[k:])) / denom)
            for k in range(1, K_max + 1)
        ]
        return float(np.mean(vals))
    if variant == "psd-ratio":
        x = lengths - lengths.mean()
        psd = np.abs(np.fft.rfft(x)) ** 2
        psd = psd[1:]  # drop DC
        total = float(psd.sum())
        if total == 0:
            raise MetricError("zero-variance token lengths")
        return float(psd.max() / total)
    raise MetricError(f"unknown rhythm variant {variant!r}")


# ---------------------------------------------------------------------------
# Punctuation
# ---------------------------------------------------------------------------

def _punct_counts(stream: TokenStream) -> tuple[Counter, int]:
    """Punctuation-class counts and non-punctuation character count."""
    counts: Counter = Counter()
    non_punct_chars = 0
    for t in stream.tokens:
        cls = punct_class(t.surface)
        if t.kind == "punct" and cls is not None:
            counts[cls] += 1
        elif t.kind == "word":
            non_punct_chars += t.length
    return counts, non_punct_chars


def punctuation_coefficient(
    stream: TokenStream,
    table: dict | str = "D22",
    baseline_density: float = 4.2,
    variant: str = "weighted",
    baseline_dist: dict | None = None,
) -> float:
    """Punctuation coefficient kappa_p >= 0.

    Weighted variant: (observed punct per 100 non-punct chars /
    baseline density) times the weight-frequency dot product over the
    normalized punctuation-type distribution.

    KL variant: (total punct / baseline expected count) *
    exp(D_KL(observed type distribution || baseline type distribution)).
    """
    weights = punct_weights(table) if isinstance(table, str) else dict(table)
    counts, n_chars = _punct_counts(stream)
    total = sum(counts.values())
    if total == 0:
        return 0.0
    if n_chars == 0:
        raise MetricError("text has no non-punctuation characters")
    density = 100.0 * total / n_chars
    if variant == "weighted":
        wf = sum(weights.get(cls, 0.0) * (c / total) for cls, c in counts.items())
        return float((density / baseline_density) * wf)
    if variant == "kl":
        if not baseline_dist:
            raise MetricError("kl variant requires a baseline distribution")
        dkl = 0.0
        for cls, c in counts.items():
            p = c / total
            q = baseline_dist.get(cls, 1e-9)
            dkl += p * math.log(p / q)
        expected = baseline_density * n_chars / 100.0
        return float((total / expected) * math.exp(dkl))
    raise MetricError(f"unknown punctuation variant {variant!r}")


def sliding_kappa_std(
    stream: TokenStream, window: int = 50, table: dict | str = "D22",
    baseline_density: float = 4.2,
) -> float:
    """Standard deviation of the weighted kappa_p across sliding windows."""
    n = len(stream)
    if n < window + 1:
        raise MetricError("need at least two windows")
    vals = []
    for start in range(0, n - window + 1):
        sub = TokenStream(
            tokens=stream.tokens[start : start + window],
            sentence_bounds=(),
            mode=stream.mode,
        )
        try:
            vals.append(
                punctuation_coefficient(sub, table, baseline_density, "weighted")
            )
        except MetricError:
            vals.append(0.0)
    return float(np.std(vals))


# ---------------------------------------------------------------------------
# Break frequency
# ---------------------------------------------------------------------------

def break_frequency(segment_entropies, theta: float = 0.4):
    """Rate of large inter-segment entropy jumps, with break positions."""
    h = list(segment_entropies)
    if len(h) < 2:
        raise MetricError("need >= 2 segment entropies")
    deltas = [h[i + 1] - h[i] for i in range(len(h) - 1)]
    positions = [i + 1 for i, d in enumerate(deltas) if abs(d) > theta]
    beta = len(positions) / len(deltas)
    return beta, positions


# ---------------------------------------------------------------------------
# Metaphor detection (three-stage pipeline)
# ---------------------------------------------------------------------------

def stub_embedder(surface: str, dim: int = 16) -> np.ndarray:
    """Deterministic hash-derived unit vector for a token surface."""
    digest = hashlib.sha256(surface.encode("utf-8")).digest()
    need = dim * 4
    buf = digest
    while len(buf) < need:
        buf += hashlib.sha256(buf).digest()
    raw = np.frombuffer(buf[:need], dtype=np.uint32).astype(float)
    v = (raw / 2 ** 32) * 2.0 - 1.0
    return v / np.linalg.norm(v)


@dataclass(frozen=True)
class MetaphorSpan:
    start: int
    end: int  # exclusive token index
    stage: int
    kind: str


@dataclass(frozen=True)
class MetaphorConfig:
    sim_threshold: float = 0.30
    entropy_spike: float = 0.15
    window: int = 5


def metaphor_detect(
    stream: TokenStream,
    lexicons: dict | None = None,
    embedder=None,
    cfg: MetaphorConfig = MetaphorConfig(),
):
    """Three-stage metaphor detection.

    Stage 1 (rules): simile markers; abstract-noun + figurative-verb pairs;
    nominal "A is B" with an abstract subject.  Stage 2 (embeddings):
    low-similarity adjacent word pairs become candidates.  Stage 3
    (entropy filter): candidates survive only when the local 5-token
    window entropy exceeds the adjacent-window mean by the spike
    threshold.  Without an embedder, Stages 2-3 are skipped and the
    result is flagged.
    """
    lex = lexicons if lexicons is not None else load_markers()["metaphor"].groups
    simile = set(lex["simile_markers"]["words"])
    verbs = set(lex["motion_verbs"]["words"]) | set(lex["transformation_verbs"]["words"])
    abstract = set(lex["abstract_nouns"]["words"])

    spans: list[MetaphorSpan] = []
    toks = stream.tokens
    n = len(toks)
    claimed = set()

    def claim(s, e, stage, kind):
        spans.append(MetaphorSpan(s, e, stage, kind))
        claimed.update(range(s, e))

    for i, t in enumerate(toks):
        if t.kind != "word":
            continue
        if t.surface in simile or any(t.surface.endswith(m) for m in simile if len(m) > 2):
            claim(max(0, i - 1), min(n, i + 2), 1, "simile")
            continue
        if t.surface in abstract:
            # look ahead a few tokens for a figurative verb
            for j in range(i + 1, min(n, i + 4)):
                if toks[j].kind == "word" and toks[j].surface in verbs:
                    claim(i, j + 1, 1, "verb-class")
                    break
            else:
                # nominal "A is B"
                if i + 2 < n and toks[i + 1].surface in ("is", "are", "だ", "である"):
                    if toks[i + 2].kind == "word":
                        claim(i, i + 3, 1, "nominal")

    flagged_no_embedder = embedder is None
    if embedder is not None:
        word_idx = [i for i, t in enumerate(toks) if t.kind == "word"]
        for a, b in zip(word_idx, word_idx[1:]):
            if a in claimed or b in claimed:
                continue
            va, vb = embedder(toks[a].surface), embedder(toks[b].surface)
            sim = float(np.dot(va, vb))
            if sim < cfg.sim_threshold:
                if _entropy_spike_ok(stream, a, cfg):
                    claim(a, b + 1, 2, "embedding")
    return {"spans": spans, "stage2_skipped": flagged_no_embedder}


def _window_entropy(stream: TokenStream, center: int, w: int) -> float:
    lo = max(0, center - w // 2)
    hi = min(len(stream), lo + w)
    surfaces = [t.surface for t in stream.tokens[lo:hi]]
    if not surfaces:
        return 0.0
    return _unigram_entropy(surfaces)


def _entropy_spike_ok(stream: TokenStream, center: int, cfg: MetaphorConfig) -> bool:
    h_here = _window_entropy(stream, center, cfg.window)
    h_before = _window_entropy(stream, center - cfg.window, cfg.window)
    h_after = _window_entropy(stream, center + cfg.window, cfg.window)
    adjacent = 0.5 * (h_before + h_after)
    return (h_here - adjacent) > cfg.entropy_spike


def entropy_spike_gate(h_window: float, h_before: float, h_after: float,
                       threshold: float = 0.15) -> bool:
    """Bare Stage-3 arithmetic: spike vs adjacent-window mean."""
    return (h_window - 0.5 * (h_before + h_after)) > threshold


def metaphor_wave(stream: TokenStream, metaphor_spans, m_segments: int = 10):
    """Per-segment metaphor densities and wave amplitude A_meta."""
    n = len(stream)
    if n < m_segments:
        raise MetricError("fewer tokens than segments")
    centers = [s.start for s in metaphor_spans]
    bounds = np.linspace(0, n, m_segments + 1).astype(int)
    densities = []
    for k in range(m_segments):
        lo, hi = bounds[k], bounds[k + 1]
        cnt = sum(1 for c in centers if lo <= c < hi)
        densities.append(cnt / max(1, hi - lo))
    amp = max(densities) - min(densities)
    return {"densities": densities, "amplitude": amp}


def metaphor_wave_model(t, M_0: float, A_m: float, omega_m: float, phi_m: float):
    """Evaluate M(t) = M_0 + A_m sin(omega_m t + phi_m)."""
    t = np.asarray(t, dtype=float)
    return M_0 + A_m * np.sin(omega_m * t + phi_m)


def fit_metaphor_wave(t, densities, omega_m: float):
    """Least-squares (M_0, A_m, phi_m) at fixed omega_m, with R^2."""
    t = np.asarray(t, dtype=float)
    y = np.asarray(densities, dtype=float)
    if len(t) < 4 or omega_m <= 0 or len(t) * omega_m < 4 * math.pi:
        raise MetricError("need >= 2 periods of data to fit")
    X = np.column_stack([np.ones_like(t), np.sin(omega_m * t), np.cos(omega_m * t)])
    coef, *_ = np.linalg.lstsq(X, y, rcond=None)
    m0, a, b = coef
    amp = math.hypot(a, b)
    phi = math.atan2(b, a)
    resid = y - X @ coef
    ss_res = float(np.dot(resid, resid))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return {"M_0": float(m0), "A_m": float(amp), "phi_m": float(phi), "r2": r2}


# ---------------------------------------------------------------------------
# Entropy family
# ---------------------------------------------------------------------------

def _unigram_entropy(surfaces) -> float:
    n = len(surfaces)
    counts = Counter(surfaces)
    return -sum((c / n) * math.log2(c / n) for c in counts.values())


def token_entropy(stream: TokenStream, variant: str = "unigram",
                  alpha: float = 0.01, words_only: bool = True):
    """Token-level entropy (H, H_norm).

    ``unigram``: empirical word-frequency entropy, H_norm = H / log2 |V|.
    ``trigram-laplace``: entropy of the Laplace-smoothed trigram
    distribution, p(g) = (n_g + alpha) / (N + alpha |V|^3).
    """
    surfaces = stream.surfaces(words_only=words_only)
    if not surfaces:
        raise MetricError("no tokens")
    if variant == "unigram":
        h = _unigram_entropy(surfaces)
        v = len(set(surfaces))
        h_norm = h / math.log2(v) if v > 1 else 0.0
        return h, h_norm
    if variant == "trigram-laplace":
        if len(surfaces) < 3:
            raise MetricError("need >= 3 tokens for trigrams")
        grams = Counter(tuple(surfaces[i : i + 3]) for i in range(len(surfaces) - 2))
        n_grams = sum(grams.values())
        v = len(set(surfaces))
        m = float(v) ** 3
        denom = n_grams + alpha * m
        h = 0.0
        for c in grams.values():
            p = (c + alpha) / denom
            h -= p * math.log2(p)
        unseen = m - len(grams)
        if unseen > 0 and alpha > 0:
            p0 = alpha / denom
            h -= unseen * p0 * math.log2(p0)
        h_max = math.log2(m) if m > 1 else 1.0
        return h, h / h_max
    raise MetricError(f"unknown entropy variant {variant!r}")


def burstiness(stream: TokenStream, variant: str = "freq-cv"):
    """Token burstiness B.

    ``freq-cv``: coefficient of variation of type frequencies.
    ``interval-cv``: mean per-word CV of inter-occurrence intervals over
    words with >= 3 occurrences; None when no word qualifies.
    """
    surfaces = stream.surfaces(words_only=True)
    if variant == "freq-cv":
        counts = np.array(list(Counter(surfaces).values()), dtype=float)
        if len(counts) < 2:
            raise MetricError("need >= 2 types for freq-cv")
        return float(counts.std() / counts.mean())
    if variant == "interval-cv":
        positions: dict[str, list[int]] = {}
        for i, s in enumerate(surfaces):
            positions.setdefault(s, []).append(i)
        cvs = []
        for pos in positions.values():
            if len(pos) >= 3:
                gaps = np.diff(pos).astype(float)
                if gaps.mean() > 0:
                    cvs.append(float(gaps.std() / gaps.mean()))
        return float(np.mean(cvs)) if cvs else None
    raise MetricError(f"unknown burstiness variant {variant!r}")


def entropy_gradient(stream: TokenStream, n_segments: int = 4):
    """Inter-segment unigram entropy deltas (n_segments - 1 junctions)."""
    surfaces = stream.surfaces(words_only=True)
    if len(surfaces) < n_segments:
        raise MetricError("too few tokens for segmentation")
    bounds = np.linspace(0, len(surfaces), n_segments + 1).astype(int)
    hs = [
        _unigram_entropy(surfaces[bounds[k] : bounds[k + 1]])
        for k in range(n_segments)
    ]
    return [hs[k + 1] - hs[k] for k in range(n_segments - 1)]


# ---------------------------------------------------------------------------
# Syntactic metrics
# ---------------------------------------------------------------------------

SUBORDINATE_RELATIONS = {"sub", "subord", "advcl", "ccomp", "acl", "relcl"}


@dataclass(frozen=True)
class DependencyTree:
    """A single-rooted dependency tree over sentence tokens.

    Built from TSV rows ``index<TAB>surface<TAB>parent<TAB>relation`` with
    1-based indices and parent 0 marking the root.
    """

    surfaces: tuple
    parents: tuple  # 0 = root
    relations: tuple
    heuristic: bool = False

    @classmethod
    def from_tsv(cls, text: str) -> "DependencyTree":
        surfaces, parents, relations = [], [], []
        for line in text.strip().splitlines():
            if not line.strip() or line.startswith("#"):
                continue
            parts = line.rstrip("\n").split("\t")
            if len(parts) != 4:
                raise MetricError(f"bad tree row: {line!r}")
            idx, surface, parent, rel = parts
            surfaces.append(surface)
            parents.append(int(parent))
            relations.append(rel)
        tree = cls(tuple(surfaces), tuple(parents), tuple(relations))
        tree.depths()  # validates
        return tree

    @classmethod
    def right_branching(cls, surfaces) -> "DependencyTree":
        """Fallback chain tree for tree-less corpora (heuristic)."""
        n = len(surfaces)
        parents = tuple(i for i in range(n))  # token i+1 depends on token i
        rels = tuple("dep" if i else "root" for i in range(n))
        return cls(tuple(surfaces), parents, rels, heuristic=True)

    def __post_init__(self):
        n = len(self.surfaces)
        roots = [i for i, p in enumerate(self.parents) if p == 0]
        if n and len(roots) != 1:
            raise MetricError(f"tree must have exactly one root, got {len(roots)}")
        for p in self.parents:
            if not (0 <= p <= n):
                raise MetricError(f"parent index {p} out of bounds")

    def depths(self):
        n = len(self.surfaces)
        depths = [None] * n
        for i in range(n):
            d, j, seen = 0, i, set()
            while self.parents[j] != 0:
                if j in seen:
                    raise MetricError("cyclic dependency tree")
                seen.add(j)
                j = self.parents[j] - 1
                d += 1
                if d > n:
                    raise MetricError("cyclic dependency tree")
            depths[i] = d
        return depths


def syntactic_metrics(tree: DependencyTree) -> dict:
    """Depth, branching and clause-complexity statistics of one tree.

    kappa_clause = d_max * (1 + 0.5 * n_sub) * (b_avg / 2)
    """
    n = len(tree.surfaces)
    if n == 0:
        raise MetricError("empty tree")
    depths = tree.depths()
    d_avg = float(np.mean(depths))
    d_max = int(max(depths))
    has_child = set(p - 1 for p in tree.parents if p != 0)
    edges = sum(1 for p in tree.parents if p != 0)
    non_leaf = len(has_child)
    b_avg = edges / non_leaf if non_leaf else 0.0
    n_sub = sum(1 for r in tree.relations if r in SUBORDINATE_RELATIONS)
    kappa = d_max * (1 + 0.5 * n_sub) * (b_avg / 2.0)
    return {
        "d_avg": d_avg,
        "d_max": d_max,
        "b_avg": b_avg,
        "n_sub": n_sub,
        "kappa_clause": kappa,
        "heuristic": tree.heuristic,
    }


def clause_alternation(complexities) -> float:
    """Mean absolute step |Delta C| of a sentence-complexity series."""
    c = list(complexities)
    if len(c) < 2:
        raise MetricError("need >= 2 sentences")
    return float(np.mean([abs(c[i + 1] - c[i]) for i in range(len(c) - 1)]))


def dependency_length_variance(tree: DependencyTree) -> float:
    """Variance of |dependent - head| distances over tree edges."""
    dists = [
        abs((i + 1) - p) for i, p in enumerate(tree.parents) if p != 0
    ]
    if not dists:
        return 0.0
    return float(np.var(dists))


# ---------------------------------------------------------------------------
# Semantic entropy (pluggable clusterer)
# ---------------------------------------------------------------------------

def greedy_cosine_clusterer(vectors, threshold: float = 0.7):
    """Greedy agglomeration: join the first cluster whose centroid matches."""
    centroids: list[np.ndarray] = []
    sums: list[np.ndarray] = []
    counts: list[int] = []
    labels = []
    for v in vectors:
        best = None
        for k, c in enumerate(centroids):
            sim = float(np.dot(v, c) / (np.linalg.norm(v) * np.linalg.norm(c)))
            if sim >= threshold:
                best = k
                break
        if best is None:
            centroids.append(v.copy())
            sums.append(v.copy())
            counts.append(1)
            labels.append(len(centroids) - 1)
        else:
            sums[best] += v
            counts[best] += 1
            centroids[best] = sums[best] / counts[best]
            labels.append(best)
    return labels


def dirichlet_entropy(cluster_sizes, alpha: float = 0.01) -> float:
    """Entropy of the Dirichlet-smoothed cluster distribution."""
    sizes = list(cluster_sizes)
    n = sum(sizes)
    k = len(sizes)
    if n == 0:
        raise MetricError("empty segment")
    h = 0.0
    for c in sizes:
        p = (c + alpha) / (n + alpha * k)
        h -= p * math.log2(p)
    return h


def semantic_entropy(
    stream: TokenStream,
    clusterer=None,
    n_segments: int = 1,
    embedder=stub_embedder,
    alpha: float = 0.01,
):
    """Per-segment semantic entropy over embedded-token clusters."""
    surfaces = stream.surfaces(words_only=True)
    if len(surfaces) < n_segments:
        raise MetricError("too few tokens")
    clusterer = clusterer or greedy_cosine_clusterer
    bounds = np.linspace(0, len(surfaces), n_segments + 1).astype(int)
    out = []
    for k in range(n_segments):
        seg = surfaces[bounds[k] : bounds[k + 1]]
        if not seg:
            raise MetricError("empty segment")
        labels = clusterer([embedder(s) for s in seg])
        sizes = list(Counter(labels).values())
        out.append(dirichlet_entropy(sizes, alpha=alpha))
    return out


# ---------------------------------------------------------------------------
# Bundle + stability
# ---------------------------------------------------------------------------

@dataclass
class MetricBundle:
    """Aggregated per-text measurements feeding axes and classification."""

    rho_r: float = 0.0
    kappa_p: float = 0.0
    beta: float = 0.0
    metaphor_density: float = 0.0  # per-token rate
    metaphor_amplitude: float = 0.0
    H_token: float = 0.0
    H_norm: float = 0.0
    burstiness: float = 0.0
    H_lex: float = 0.0
    H_syn: float = 0.0
    d_avg: float = 0.0
    d_max: float = 0.0
    b_avg: float = 0.0
    kappa_clause: float = 0.0
    sigma_d2: float = 0.0
    A_clause: float = 0.0
    H_s: float = 0.0
    sigma_kappa_p: float = 0.0
    entropy_gradients: list = dc_field(default_factory=list)
    L_stability: float = 0.0
    extras: dict = dc_field(default_factory=dict)

    def to_dict(self) -> dict:
        d = {k: v for k, v in self.__dict__.items() if k != "extras"}
        d.update(self.extras)
        return d


def stability_score(bundle: MetricBundle,
                    weights=(0.2, 0.15, 0.15, 0.25, 0.25)):
    """Linguistic stability score with an alarm below 2.5.

    L = w1*rho_r + w2*(5 - kappa_p) + w3*(1 - mu_meta/0.5)
        + w4*H_token + w5*d_avg
    """
    w1, w2, w3, w4, w5 = weights
    l = (
        w1 * bundle.rho_r
        + w2 * (5.0 - bundle.kappa_p)
        + w3 * (1.0 - bundle.metaphor_density / 0.5)
        + w4 * bundle.H_token
        + w5 * bundle.d_avg
    )
    return float(l), bool(l < 2.5)


def build_bundle(
    stream: TokenStream,
    tree: DependencyTree | None = None,
    embedder=stub_embedder,
    punct_table: str = "D22",
) -> MetricBundle:
    """Convenience builder computing the full metric suite for one text."""
    b = MetricBundle()
    try:
        b.rho_r = rhythm_density(stream, variant="combined")
    except MetricError:
        b.rho_r = 0.0
    b.kappa_p = punctuation_coefficient(stream, punct_table)
    try:
        b.H_token, b.H_norm = token_entropy(stream, "unigram")
    except MetricError:
        pass
    b.H_lex = b.H_token
    try:
        b.burstiness = burstiness(stream, "freq-cv")
    except MetricError:
        pass
    det = metaphor_detect(stream, embedder=embedder)
    words = max(1, len(stream.word_tokens()))
    b.metaphor_density = len(det["spans"]) / words
    try:
        wave = metaphor_wave(stream, det["spans"])
        b.metaphor_amplitude = wave["amplitude"]
    except MetricError:
        pass
    if tree is None and stream.tokens:
        tree = DependencyTree.right_branching(stream.surfaces(words_only=True))
    if tree is not None and len(tree.surfaces) > 0:
        syn = syntactic_metrics(tree)
        b.d_avg = syn["d_avg"]
        b.d_max = syn["d_max"]
        b.b_avg = syn["b_avg"]
        b.kappa_clause = syn["kappa_clause"]
        b.sigma_d2 = dependency_length_variance(tree)
        b.H_syn = math.log2(1 + syn["d_avg"]) + math.log2(1 + syn["b_avg"])
    try:
        b.entropy_gradients = entropy_gradient(stream)
        hs = []
        surfaces = stream.surfaces(words_only=True)
        bounds = np.linspace(0, len(surfaces), 5).astype(int)
        hs = [
            _unigram_entropy(surfaces[bounds[k] : bounds[k + 1]])
            for k in range(4)
            if bounds[k + 1] > bounds[k]
        ]
        beta, _ = break_frequency(hs) if len(hs) >= 2 else (0.0, [])
        b.beta = beta
    except MetricError:
        pass
    try:
        b.H_s = semantic_entropy(stream, n_segments=1, embedder=embedder)[0]
    except MetricError:
        pass
    try:
        b.sigma_kappa_p = sliding_kappa_std(stream)
    except MetricError:
        pass
    b.L_stability, _ = stability_score(b)
    return b
