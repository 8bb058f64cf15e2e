import math

import numpy as np
import pytest

import stcsim as st
from stcsim import decoders as dec
from stcsim.constellation import PamAlphabet, QamAlphabet

from conftest import random_alamouti_instance, random_golden_instance, recompute_cost


def test_exhaustive_noiseless_and_count(rng):
    eff, y, alphabet, idx = random_golden_instance(rng, 4)
    y = eff.h @ alphabet.symbols[idx]  # noiseless
    r = dec.decode_exhaustive(eff, y, alphabet)
    assert r.indices == tuple(idx)
    assert r.cost <= 1e-20
    assert r.nodes_visited == 256
    assert np.array_equal(r.x_hat, alphabet.symbols[list(idx)])


def test_exhaustive_cap():
    eff = st.effective_channel_from_matrix(np.eye(4, dtype=complex), "golden-dv")
    with pytest.raises(ValueError, match="cap"):
        dec.decode_exhaustive(eff, np.zeros(4), st.make_qam(256))


def test_exhaustive_is_global_minimum_by_full_scan(rng):
    eff, y, alphabet, _ = random_golden_instance(rng, 4, snr_db=3.0)
    r = dec.decode_exhaustive(eff, y, alphabet)
    # independent scan oracle over all 256 candidates
    best = math.inf
    for i1 in range(4):
        for i2 in range(4):
            for i3 in range(4):
                for i4 in range(4):
                    x = alphabet.symbols[[i1, i2, i3, i4]]
                    best = min(best, recompute_cost(eff, y, x))
    assert r.cost == pytest.approx(best, abs=1e-12)


def test_exhaustive_tie_breaks_lexicographically():
    eff = st.effective_channel_from_matrix(np.eye(4, dtype=complex), "golden-dv")
    alphabet = st.make_qam(4)
    # y = 0 ties all 256 candidates (constant-modulus alphabet)
    r = dec.decode_exhaustive(eff, np.zeros(4, dtype=complex), alphabet)
    assert r.indices == (0, 0, 0, 0)


@pytest.mark.parametrize("variant", st.GOLDEN_VARIANTS)
def test_fast_noiseless_recovery(rng, variant):
    for model in ("quasistatic", "rapid"):
        eff, _, alphabet, idx = random_golden_instance(rng, 16, variant, model)
        y = eff.h @ alphabet.symbols[idx]
        r = dec.decode_fast_golden(eff, y, alphabet)
        assert r.indices == tuple(idx)
        assert r.cost <= 1e-18
        assert r.full_sorts == 2


@pytest.mark.parametrize("m", (4, 16))
def test_fast_matches_exhaustive(rng, m):
    trials = 200 if m == 4 else 40
    for t in range(trials):
        model = ("quasistatic", "rapid", "markov")[t % 3]
        alphabet = st.make_qam(m)
        ch = st.sample_channel(rng, model, rho=0.7 if model == "markov" else None)
        idx = rng.integers(0, m, 4)
        eff = st.effective_channel(ch, "golden-dv")
        y = eff.h @ alphabet.symbols[idx] + eff.stack_noise(
            st.sample_noise(rng, st.snr_to_n0(float(rng.integers(0, 21))))
        )
        ref = dec.decode_exhaustive(eff, y, alphabet)
        fast = dec.decode_fast_golden(eff, y, alphabet)
        assert abs(fast.cost - ref.cost) <= 1e-9
        assert fast.full_sorts == 2
        assert abs(fast.cost - recompute_cost(eff, y, fast.x_hat)) <= 1e-9


def test_fast_all_allowed_permutations_are_exact(rng):
    alphabet = st.make_qam(4)
    for _ in range(25):
        eff, y, _, _ = random_golden_instance(rng, 4, model="rapid", snr_db=6.0)
        ref = dec.decode_exhaustive(eff, y, alphabet).cost
        for perm in dec.FAST_PERMUTATIONS:
            r = dec.decode_fast_golden(eff, y, alphabet, perm=perm)
            assert abs(r.cost - ref) <= 1e-9
            assert r.permutation_used == perm


def test_fast_rejects_bad_inputs(rng):
    eff, y, alphabet, _ = random_golden_instance(rng, 4)
    with pytest.raises(ValueError, match="not fast-decodable"):
        dec.decode_fast_golden(eff, y, alphabet, perm=(0, 2, 1, 3))
    al = st.effective_channel(st.sample_channel(rng, "quasistatic"), "overlaid-alamouti")
    with pytest.raises(ValueError, match="golden-variant"):
        dec.decode_fast_golden(al, y, alphabet)
    # hand-built non-separable alphabet trips the square-QAM guard
    pam = PamAlphabet(levels=(-1.0, 1.0), scale=1.0)
    crooked = QamAlphabet(
        pam=pam, symbols=np.array([1 + 1j, -1 + 1j, 1 - 1j, -1 - 1j]), scale=1.0
    )
    with pytest.raises(ValueError, match="square QAM"):
        dec.decode_fast_golden(eff, y, crooked)


def test_check_fast_permutation_table():
    allowed = {
        (0, 1, 2, 3), (0, 1, 3, 2), (1, 0, 2, 3), (1, 0, 3, 2),
        (2, 3, 0, 1), (2, 3, 1, 0), (3, 2, 0, 1), (3, 2, 1, 0),
    }
    assert set(dec.FAST_PERMUTATIONS) == allowed
    assert dec.check_fast_permutation((0, 1, 2, 3))
    assert dec.check_fast_permutation((2, 3, 0, 1))
    assert not dec.check_fast_permutation((0, 2, 1, 3))


@pytest.mark.parametrize(
    "m,expected", [(4, 4 + 16 + 128), (16, 16 + 256 + 4096)]
)
def test_fast_worst_case_node_formula(rng, m, expected):
    # with pruning disabled: M + M^2 + 4 * M^2.5 exactly
    eff, y, alphabet, _ = random_golden_instance(rng, m, snr_db=5.0)
    r = dec.decode_fast_golden(eff, y, alphabet, prune=False)
    assert r.nodes_visited == expected
    pruned = dec.decode_fast_golden(eff, y, alphabet)
    assert pruned.nodes_visited <= expected
    assert abs(pruned.cost - r.cost) <= 1e-12


def test_sphere_matches_exhaustive_and_ordering_invariance(rng):
    alphabet = st.make_qam(4)
    for t in range(150):
        eff, y, _, _ = random_golden_instance(
            rng, 4, model=("quasistatic", "rapid")[t % 2], snr_db=float(5 + (t % 3) * 7)
        )
        ref = dec.decode_exhaustive(eff, y, alphabet)
        plain = dec.decode_sphere_conventional(eff, y, alphabet, ordering="none")
        blast = dec.decode_sphere_conventional(eff, y, alphabet, ordering="blast")
        assert abs(plain.cost - ref.cost) <= 1e-9
        assert abs(blast.cost - ref.cost) <= 1e-9
        assert abs(plain.cost - recompute_cost(eff, y, plain.x_hat)) <= 1e-9


def test_sphere_noiseless(rng):
    eff, _, alphabet, idx = random_golden_instance(rng, 16)
    y = eff.h @ alphabet.symbols[idx]
    r = dec.decode_sphere_conventional(eff, y, alphabet)
    assert r.indices == tuple(idx)
    assert r.cost <= 1e-18


def test_sphere_worst_case_counters(rng):
    # with pruning disabled: M + M^2 + 2 M^3 nodes, 1 + M + M^2 sorts
    m = 4
    eff, y, alphabet, _ = random_golden_instance(rng, m, snr_db=5.0)
    r = dec.decode_sphere_conventional(eff, y, alphabet, prune=False)
    assert r.nodes_visited == m + m**2 + 2 * m**3
    assert r.full_sorts == 1 + m + m**2
    assert dec.decode_sphere_conventional(eff, y, alphabet).nodes_visited <= r.nodes_visited


def test_sphere_rejects_unknown_ordering(rng):
    eff, y, alphabet, _ = random_golden_instance(rng, 4)
    with pytest.raises(ValueError, match="ordering"):
        dec.decode_sphere_conventional(eff, y, alphabet, ordering="wat")


def test_alamouti_fast_matches_exhaustive(rng):
    for t in range(150):
        eff, y, alphabet, _ = random_alamouti_instance(rng, 4, snr_db=float(3 + (t % 4) * 5))
        ref = dec.decode_exhaustive(eff, y, alphabet)
        fast = dec.decode_alamouti_fast(eff, y, alphabet)
        assert abs(fast.cost - ref.cost) <= 1e-9
        assert abs(fast.cost - recompute_cost(eff, y, fast.x_hat)) <= 1e-9


def test_alamouti_fast_noiseless_and_counters(rng):
    eff, _, alphabet, idx = random_alamouti_instance(rng, 16)
    y = eff.h @ alphabet.symbols[idx]
    r = dec.decode_alamouti_fast(eff, y, alphabet)
    assert r.indices == tuple(idx)
    assert r.cost <= 1e-18
    m = alphabet.size
    nop = dec.decode_alamouti_fast(eff, y, alphabet, prune=False)
    assert nop.nodes_visited == m + m**2 + 4 * m**2
    assert r.nodes_visited <= nop.nodes_visited


def test_alamouti_fast_rejects_time_varying(rng):
    raised = 0
    for _ in range(30):
        eff, y, alphabet, _ = random_alamouti_instance(rng, 4, model="rapid")
        try:
            dec.decode_alamouti_fast(eff, y, alphabet)
        except ValueError as exc:
            assert "invalid for this channel" in str(exc)
            raised += 1
    assert raised == 30


def test_alamouti_fast_requires_alamouti_channel(rng):
    eff, y, alphabet, _ = random_golden_instance(rng, 4)
    with pytest.raises(ValueError, match="overlaid-alamouti"):
        dec.decode_alamouti_fast(eff, y, alphabet)


def test_blast_ordering_properties(rng):
    assert dec.blast_ordering(np.eye(4, dtype=complex)) == (0, 1, 2, 3)
    for _ in range(50):
        eff, _, _, _ = random_golden_instance(rng, 4, model="rapid")
        perm = dec.blast_ordering(eff)
        assert sorted(perm) == [0, 1, 2, 3]
    h = np.asarray(st.effective_channel(st.sample_channel(rng, "rapid"), "golden-dv").h).copy()
    h[:, 2] *= 10.0
    # the boosted column is detected first, i.e. placed last in column order
    assert dec.blast_ordering(h)[3] == 2


def test_blast_ordering_restricted_to_fast_set(rng):
    for _ in range(25):
        eff, _, _, _ = random_golden_instance(rng, 4, model="rapid")
        perm = dec.blast_ordering(eff, allowed=dec.FAST_PERMUTATIONS)
        assert perm in dec.FAST_PERMUTATIONS


@pytest.mark.parametrize("m", (4, 16))
def test_worst_case_dominance_over_trial_set(rng, m):
    fast_cap = m + m**2 + 4 * m**2 * math.isqrt(m)
    alam_cap = m + m**2 + 4 * m**2
    worst_fast = 0
    worst_alam = 0
    for t in range(120):
        snr = float(t % 12)  # low SNR stresses the search
        eff, y, alphabet, _ = random_golden_instance(rng, m, model="rapid", snr_db=snr)
        worst_fast = max(worst_fast, dec.decode_fast_golden(eff, y, alphabet).nodes_visited)
        effa, ya, alphabeta, _ = random_alamouti_instance(rng, m, snr_db=snr)
        worst_alam = max(worst_alam, dec.decode_alamouti_fast(effa, ya, alphabeta).nodes_visited)
    assert worst_fast <= fast_cap
    assert worst_alam <= alam_cap


def test_radius_equals_cost_and_monotone_updates(rng):
    # final cost equals the independently recomputed distance for all decoders
    eff, y, alphabet, _ = random_golden_instance(rng, 16, snr_db=8.0)
    for result in (
        dec.decode_fast_golden(eff, y, alphabet),
        dec.decode_sphere_conventional(eff, y, alphabet),
        dec.decode_exhaustive(eff, y, alphabet),
    ):
        assert abs(result.cost - recompute_cost(eff, y, result.x_hat)) <= 1e-9

    effa, ya, alphabeta, _ = random_alamouti_instance(rng, 16, snr_db=8.0)
    ra = dec.decode_alamouti_fast(effa, ya, alphabeta)
    assert abs(ra.cost - recompute_cost(effa, ya, ra.x_hat)) <= 1e-9
