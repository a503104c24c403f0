import math

import numpy as np
import pytest

from reflexloop import textmetrics as tm
from reflexloop.textmetrics import (
    DependencyTree,
    MetricBundle,
    MetricError,
    Token,
    TokenStream,
    boundary_signal,
    break_frequency,
    build_bundle,
    burstiness,
    clause_alternation,
    dirichlet_entropy,
    entropy_gradient,
    entropy_spike_gate,
    fit_metaphor_wave,
    greedy_cosine_clusterer,
    metaphor_detect,
    metaphor_wave,
    metaphor_wave_model,
    punctuation_coefficient,
    rhythm_density,
    semantic_entropy,
    sliding_kappa_std,
    stability_score,
    stub_embedder,
    syntactic_metrics,
    token_entropy,
    tokenize,
)

CJK_SENTENCE = (
    "「言葉は鏡を通過するたびに姿を変える。意味の残響が時間を逆走し、"
    "未来の記憶が過去の予感と交差する。存在しない対話の痕跡。」"
)

TREE_TSV = "\n".join(
    "\t".join(row)
    for row in (
        ("1", "取り戻して", "0", "root"),
        ("2", "言葉たち", "1", "nsubj"),
        ("3", "の", "2", "case"),
        ("4", "静寂", "3", "dep"),
        ("5", "檻", "2", "obl"),
        ("6", "に", "5", "case"),
        ("7", "閉じ込められた", "2", "acl"),
        ("8", "光", "1", "obj"),
        ("9", "を", "8", "case"),
        ("10", "いく", "1", "aux"),
    )
)


def latin_stream(text="the cat sat on the mat and the dog sat down too."):
    return tokenize(text, "whitespace-latin")


# ---------------------------------------------------------------------------
# Tokenization
# ---------------------------------------------------------------------------

def test_tokenize_latin_splits_punctuation():
    st = tokenize("Wait... what? Yes!", "whitespace-latin")
    surfaces = st.surfaces()
    assert "..." in surfaces and "?" in surfaces and "!" in surfaces
    assert all(t.kind == "punct" for t in st.tokens if t.surface in ("...", "?", "!"))


def test_tokenize_cjk_per_character():
    st = tokenize("時間。", "char-cjk")
    assert [t.surface for t in st.tokens] == ["時", "間", "。"]
    assert st.tokens[-1].kind == "punct"


def test_tokenize_dialogue_marks_tagged():
    st = tokenize("「夢」", "char-cjk")
    kinds = [t.kind for t in st.tokens]
    assert kinds == ["dialogue-mark", "word", "dialogue-mark"]


def test_tokenize_external_preserves_tokens():
    st = tokenize("取り戻して 言葉たち 。", "external")
    assert len(st.tokens) == 3
    assert st.tokens[0].surface == "取り戻して"


def test_tokenize_empty_rejected():
    with pytest.raises(MetricError):
        tokenize("", "whitespace-latin")
    with pytest.raises(MetricError):
        tokenize("abc", "no-such-mode")


# ---------------------------------------------------------------------------
# Rhythm density
# ---------------------------------------------------------------------------

def test_rhythm_combined_from_boundary_vector():
    b = np.zeros(36)
    for p in (9, 15, 21, 30, 36):
        b[p - 1] = 1
    # boundary density 5/36 plus a dominant normalized lag-6 peak of 0.6
    assert rhythm_density(boundaries=b) == pytest.approx(0.3233, abs=1e-3)


def test_rhythm_combined_flat_signal():
    assert rhythm_density(boundaries=np.zeros(40)) == 0.0


def test_boundary_signal_marks_separators():
    st = tokenize("one, two. three", "whitespace-latin")
    b = boundary_signal(st)
    assert b.sum() == 2


def test_rhythm_acf_mean_and_psd_bounds():
    rng = np.random.default_rng(3)
    words = " ".join("x" * rng.integers(1, 8) for _ in range(120))
    st = tokenize(words, "whitespace-latin")
    for variant in ("acf-mean", "psd-ratio"):
        val = rhythm_density(st, variant=variant)
        assert 0.0 <= val <= 1.0


def test_rhythm_acf_mean_rejects_constant_lengths():
    st = tokenize(" ".join(["abc"] * 120), "whitespace-latin")
    with pytest.raises(MetricError):
        rhythm_density(st, variant="acf-mean")


# ---------------------------------------------------------------------------
# Punctuation coefficient
# ---------------------------------------------------------------------------

def test_punctuation_cjk_period_comma_profile():
    st = tokenize(CJK_SENTENCE, "char-cjk")
    counts, _ = tm._punct_counts(st)
    assert counts["period"] == 3 and counts["comma"] == 1


def test_punctuation_coefficient_no_punct_zero():
    st = tokenize("plain words only here", "whitespace-latin")
    assert punctuation_coefficient(st) == 0.0


def test_punctuation_coefficient_kl_variant():
    st = latin_stream()
    base = {"period": 0.6, "comma": 0.4}
    val = punctuation_coefficient(st, variant="kl", baseline_dist=base)
    assert val > 0
    with pytest.raises(MetricError):
        punctuation_coefficient(st, variant="kl")


def test_sliding_kappa_std_nonnegative():
    text = ("word " * 30 + ". ") * 5
    st = tokenize(text, "whitespace-latin")
    assert sliding_kappa_std(st) >= 0.0


# ---------------------------------------------------------------------------
# Break frequency
# ---------------------------------------------------------------------------

def test_break_frequency_counts_jumps():
    beta, pos = break_frequency([4.0, 4.1, 5.0, 5.05, 4.2], theta=0.4)
    assert beta == pytest.approx(2 / 4)
    assert pos == [2, 4]


def test_break_frequency_monotone_in_threshold():
    hs = [4.0, 4.5, 3.8, 5.1, 4.9]
    b_lo, _ = break_frequency(hs, theta=0.2)
    b_hi, _ = break_frequency(hs, theta=0.8)
    assert b_hi <= b_lo


# ---------------------------------------------------------------------------
# Metaphor pipeline
# ---------------------------------------------------------------------------

def test_metaphor_rule_stage_abstract_plus_verb():
    st = tokenize("時間 が 逆走 する", "external")
    out = metaphor_detect(st)
    assert out["stage2_skipped"] is True
    assert any(s.stage == 1 for s in out["spans"])


def test_metaphor_rule_stage_simile():
    st = tokenize("silence spreads like water", "whitespace-latin")
    out = metaphor_detect(st)
    assert any(s.kind == "simile" for s in out["spans"])


def test_metaphor_plain_text_clean():
    st = tokenize("the door opens and the door closes", "whitespace-latin")
    assert metaphor_detect(st)["spans"] == []


def test_metaphor_embedding_stage_runs_with_embedder():
    st = tokenize("memory weaves patterns through time", "whitespace-latin")
    out = metaphor_detect(st, embedder=stub_embedder)
    assert out["stage2_skipped"] is False


def test_entropy_spike_gate_arithmetic():
    assert entropy_spike_gate(0.81, 0.57, 0.56) is True
    assert entropy_spike_gate(0.60, 0.57, 0.56) is False


def test_metaphor_wave_amplitude_zero_iff_uniform():
    st = tokenize(" ".join(f"w{i}" for i in range(40)), "whitespace-latin")
    spans = [tm.MetaphorSpan(4 * k, 4 * k + 1, 1, "t") for k in range(10)]
    wave = metaphor_wave(st, spans, m_segments=10)
    assert wave["amplitude"] == pytest.approx(0.0)
    wave2 = metaphor_wave(st, spans[:3], m_segments=10)
    assert wave2["amplitude"] > 0


def test_metaphor_wave_model_fit_recovers_parameters():
    omega = 0.5
    t = np.arange(60, dtype=float)
    y = metaphor_wave_model(t, 0.1, 0.04, omega, 1.2)
    fit = fit_metaphor_wave(t, y, omega)
    assert fit["M_0"] == pytest.approx(0.1, abs=1e-9)
    assert fit["A_m"] == pytest.approx(0.04, abs=1e-9)
    assert fit["r2"] == pytest.approx(1.0)


def test_metaphor_wave_fit_needs_two_periods():
    t = np.arange(10, dtype=float)
    with pytest.raises(MetricError):
        fit_metaphor_wave(t, np.ones(10) * 0.1, omega_m=0.05)


# ---------------------------------------------------------------------------
# Entropy family
# ---------------------------------------------------------------------------

def test_token_entropy_unigram_bounds():
    st = latin_stream()
    h, h_norm = token_entropy(st)
    assert h > 0 and 0.0 <= h_norm <= 1.0


def test_token_entropy_single_type():
    st = tokenize("again again again", "whitespace-latin")
    h, h_norm = token_entropy(st)
    assert h == 0.0 and h_norm == 0.0


def test_token_entropy_trigram_smoothed():
    st = latin_stream()
    h, h_norm = token_entropy(st, "trigram-laplace")
    assert h > 0 and 0.0 <= h_norm <= 1.0


def test_burstiness_variants():
    st = tokenize("a a a b a c a d a e a f", "whitespace-latin")
    assert burstiness(st, "freq-cv") > 0
    assert burstiness(st, "interval-cv") is not None
    flat = tokenize("one two three four five six", "whitespace-latin")
    assert burstiness(flat, "interval-cv") is None


def test_entropy_gradient_junctions():
    st = tokenize(" ".join(f"w{i % 9}" for i in range(80)), "whitespace-latin")
    grads = entropy_gradient(st)
    assert len(grads) == 3


# ---------------------------------------------------------------------------
# Syntactic metrics
# ---------------------------------------------------------------------------

def test_dependency_tree_reference_sentence():
    tree = DependencyTree.from_tsv(TREE_TSV)
    syn = syntactic_metrics(tree)
    assert syn["d_avg"] == pytest.approx(1.7)
    assert syn["d_max"] == 3
    assert syn["b_avg"] == pytest.approx(1.8)
    assert syn["n_sub"] == 1
    assert syn["kappa_clause"] == pytest.approx(4.05)


def test_dependency_tree_rejects_multi_root_and_cycle():
    with pytest.raises(MetricError):
        DependencyTree.from_tsv("1\ta\t0\troot\n2\tb\t0\troot")
    with pytest.raises(MetricError):
        DependencyTree.from_tsv("1\ta\t2\tdep\n2\tb\t1\tdep\n3\tc\t0\troot")


def test_right_branching_fallback_flagged():
    tree = DependencyTree.right_branching(["a", "b", "c", "d"])
    syn = syntactic_metrics(tree)
    assert syn["heuristic"] is True
    assert syn["d_max"] == 3


def test_kappa_clause_zero_iff_flat():
    flat = DependencyTree.from_tsv("1\ta\t0\troot")
    assert syntactic_metrics(flat)["kappa_clause"] == 0.0


def test_kappa_clause_increases_with_subordination():
    def k(n_sub):
        rows = ["1\ta\t0\troot"]
        for i in range(2, 6):
            rel = "acl" if i - 2 < n_sub else "dep"
            rows.append(f"{i}\tw{i}\t{i - 1}\t{rel}")
        return syntactic_metrics(DependencyTree.from_tsv("\n".join(rows)))[
            "kappa_clause"
        ]

    vals = [k(n) for n in range(4)]
    assert all(b > a for a, b in zip(vals, vals[1:]))


def test_clause_alternation_reference():
    assert clause_alternation([1, 3, 1, 3]) == pytest.approx(2.0)


# ---------------------------------------------------------------------------
# Semantic entropy
# ---------------------------------------------------------------------------

def test_semantic_entropy_repetition_lowers():
    rep = tokenize("echo " * 30, "whitespace-latin")
    var = tokenize(" ".join(f"tok{i}" for i in range(30)), "whitespace-latin")
    assert semantic_entropy(rep)[0] < semantic_entropy(var)[0]


def test_dirichlet_entropy_uniform_max():
    h_uni = dirichlet_entropy([5, 5, 5, 5])
    h_skew = dirichlet_entropy([17, 1, 1, 1])
    assert h_uni > h_skew
    assert h_uni == pytest.approx(2.0, abs=0.01)


def test_greedy_clusterer_groups_identical_vectors():
    v = stub_embedder("alpha")
    labels = greedy_cosine_clusterer([v, v, stub_embedder("omega")])
    assert labels[0] == labels[1] != labels[2]


# ---------------------------------------------------------------------------
# Stability + bundle
# ---------------------------------------------------------------------------

def test_stability_score_reference_point():
    b = MetricBundle(rho_r=0.5, kappa_p=1.0, metaphor_density=0.25,
                     H_token=4.0, d_avg=3.0)
    score, alarm = stability_score(b)
    assert score == pytest.approx(2.525)
    assert alarm is False


def test_stability_alarm_fires_low():
    b = MetricBundle(rho_r=0.0, kappa_p=5.0, metaphor_density=0.5,
                     H_token=0.0, d_avg=0.0)
    _, alarm = stability_score(b)
    assert alarm is True


def test_build_bundle_end_to_end():
    text = ("The morning light crosses the narrow street and the quiet room "
            "waits. Memory weaves a thin thread through the old glass, and "
            "the window opens. ") * 3
    bundle = build_bundle(tokenize(text, "whitespace-latin"))
    d = bundle.to_dict()
    assert 0.0 <= d["H_norm"] <= 1.0
    assert d["kappa_p"] > 0
    assert d["L_stability"] == pytest.approx(
        stability_score(bundle)[0]
    )
