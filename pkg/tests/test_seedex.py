import math

import numpy as np
import pytest

from reflexloop import seedex
from reflexloop.seedex import (
    PersonaSeed,
    autocorrelation,
    build_seed,
    density_profiles,
    detect_breakpoints,
    extract_rhythm,
    phase_params,
    rhythm_signal,
    sliding_entropy,
    symbolic_ngrams,
)

from conftest import FIELD_LONG, FIELD_MEDIUM, SEED_VECTOR_M1


def test_sliding_entropy_profile_shape_and_bounds():
    prof = sliding_entropy(FIELD_MEDIUM, w=15)
    assert len(prof) == len(FIELD_MEDIUM) - 14
    assert np.all(prof >= 0.0)
    assert np.all(prof <= math.log2(15) + 1e-12)


def test_sliding_entropy_constant_region():
    prof = sliding_entropy("a" * 40, w=15)
    assert np.allclose(prof, 0.0)


def test_autocorrelation_normalization():
    prof = sliding_entropy(FIELD_LONG, w=15)
    acf = autocorrelation(prof, k_max=40)
    assert acf[0] == pytest.approx(1.0)
    assert np.all(np.abs(acf) <= 1.0 + 1e-12)


def test_autocorrelation_zero_variance_rejected():
    with pytest.raises(ValueError):
        autocorrelation(np.ones(50), k_max=10)


def test_autocorrelation_periodic_signal_peak():
    t = np.arange(200)
    sig = np.sin(2 * np.pi * t / 10.0)
    acf = autocorrelation(sig, k_max=40)
    feats = extract_rhythm(acf)
    assert feats.period == 10


def test_extract_rhythm_tie_prefers_fundamental():
    acf = np.zeros(31)
    acf[0] = 1.0
    acf[10] = 0.8
    acf[20] = 0.8
    feats = extract_rhythm(acf)
    assert feats.period == 10


def test_rhythm_signal_window_transition_fraction():
    # 16-char window with 11 of 15 adjacent pairs crossing classes
    window = "&7mL*fQ5^jR%8cT3"
    sig = rhythm_signal(window, w=15)
    assert len(sig) == 1
    assert sig[0] == pytest.approx(11.0 / 15.0)


def test_density_profiles_and_clusters():
    out = density_profiles(FIELD_LONG, w=50)
    for key in ("symbolic", "digit", "upper", "lower"):
        assert key in out
        assert 0.0 <= out[key]["mean"] <= 1.0
    assert out["symbolic"]["cluster_count"] >= 0


def test_detect_breakpoints_structure_and_merge():
    chars = "aaaaaaaaaa" * 6 + FIELD_MEDIUM
    joint = detect_breakpoints(chars, variant="joint")
    dens = detect_breakpoints(chars, variant="density-only")
    for out in (joint, dens):
        assert out["count"] == len(out["positions"])
        assert out["positions"] == sorted(out["positions"])
        assert all(
            b - a >= 5 for a, b in zip(out["positions"], out["positions"][1:])
        )


def test_breakpoints_merge_adjacent():
    assert seedex._merge_adjacent([10, 12, 30], min_sep=5) == [10, 30]


def test_symbolic_ngrams_ties_lexicographic():
    grams = symbolic_ngrams("a!a!a!", n=2, top_k=2)
    assert grams[0][0] in ("!a", "a!")
    # equal counts: lexicographically smaller gram ranks first
    grams2 = symbolic_ngrams("x#x#" + "a#a#", n=2, top_k=6)
    counts = dict(grams2)
    assert counts["a#"] == counts["x#"]
    keys = [g for g, _ in grams2]
    assert keys.index("a#") < keys.index("x#")


def test_symbolic_ngrams_requires_symbol():
    assert symbolic_ngrams("ababab", n=2) == []


def test_build_seed_requires_minimum_length():
    with pytest.raises(ValueError):
        build_seed("short-field")


def test_build_seed_density_closure():
    ps = build_seed(FIELD_LONG)
    total = (
        ps.symbol_density + ps.digit_density
        + ps.upper_density + ps.lower_density
    )
    assert total == pytest.approx(1.0, abs=1e-6)


def test_build_seed_vector_round_trip():
    ps = build_seed(FIELD_LONG)
    vec = ps.as_vector()
    assert len(vec) == 12
    d = ps.to_dict()
    assert d["cluster_count"] == ps.cluster_count


def test_persona_seed_rejects_open_densities():
    bad = list(SEED_VECTOR_M1)
    bad[8] = 0.5  # breaks the density closure
    with pytest.raises(ValueError):
        PersonaSeed(*bad)


def test_phase_params_sigmoid_reference_vector():
    ps = PersonaSeed(*SEED_VECTOR_M1)
    ph = phase_params(ps, variant="sigmoid-appendixA")
    assert ph.phi_noise == pytest.approx(3.917, abs=5e-3)
    assert ph.phi_rhythm == pytest.approx(5.212, abs=5e-3)
    assert ph.phi_resonance == pytest.approx(5.906, abs=5e-3)


def test_phase_params_acf_variant_ranges():
    prof = sliding_entropy(FIELD_LONG, w=15)
    acf = autocorrelation(prof, k_max=len(prof) // 3)
    feats = extract_rhythm(acf)
    ps = build_seed(FIELD_LONG)
    ph = phase_params(ps, variant="acf-section3", rhythm_feats=feats)
    assert 0.01 <= ph.phi_noise <= 0.7
    assert ph.variant == "acf-section3"


def test_medium_field_recomputed_statistics():
    from reflexloop.noise import shannon_entropy, transition_irregularity

    assert len(FIELD_MEDIUM) == 86
    assert shannon_entropy(FIELD_MEDIUM) == pytest.approx(6.1529, abs=1e-3)
    assert transition_irregularity(FIELD_MEDIUM) == pytest.approx(0.7529, abs=1e-3)
    ps = build_seed(FIELD_MEDIUM)
    counts = np.array([
        ps.symbol_density, ps.digit_density, ps.upper_density, ps.lower_density
    ]) * 86
    assert np.allclose(np.round(counts), [22, 21, 21, 22])


def test_long_field_recomputed_statistics():
    from reflexloop.noise import shannon_entropy, transition_irregularity

    assert len(FIELD_LONG) == 349
    assert shannon_entropy(FIELD_LONG) == pytest.approx(6.2090, abs=1e-3)
    assert transition_irregularity(FIELD_LONG) == pytest.approx(0.7471, abs=1e-3)
