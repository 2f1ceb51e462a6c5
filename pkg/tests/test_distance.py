import math

import numpy as np
import pytest

from infolaw.bits import BitString, strings_of_length, xor
from infolaw.compressor import LZ78B
from infolaw.distance import (DistanceMatrix, DomainMismatchError, OneSidedBoundError,
                              admissible_hamming_matrix, check_admissible, compression_matrix,
                              conditional_triangle_slack, d_max, d_sum, discrete_matrix, dumps_matrix,
                              euclid_bits, euclid_matrix, hamming, hamming_matrix, info_matrix,
                              invariance_gap, load_matrix, loads_matrix, minorization, ncd_matrix,
                              save_matrix)
from infolaw.enumerator import build_table

from oracles import brute_force


def b(s):
    return BitString(s)


def test_hamming_examples():
    assert hamming("01011", "10001") == 3
    assert euclid_bits("01011", "10001") == pytest.approx(math.sqrt(3))
    assert hamming("0110", "0110") == 0 and euclid_bits("0110", "0110") == 0
    assert hamming("1111", "0000") == 4 and euclid_bits("1111", "0000") == 2
    with pytest.raises(ValueError):
        hamming("01", "1")


def test_hamming_is_weight_of_xor():
    for x in strings_of_length(5):
        assert hamming(x, b("01011")) == xor(x, b("01011")).bits.count("1")


def test_discrete_metric_fails_normalization():
    rep = check_admissible(discrete_matrix(strings_of_length(2)))
    assert all(s == 1.5 for s in rep.normalization_sums.values())
    assert not rep.normalized_ok
    assert rep.identity_ok and rep.symmetry_ok and rep.triangle_ok


@pytest.mark.parametrize("size, ok", [(1, True), (2, True), (3, True), (4, False), (5, False), (9, False)])
def test_discrete_metric_normalization_by_size(size, ok):
    domain = [BitString.from_int(i, 4) for i in range(size)]
    rep = check_admissible(discrete_matrix(domain))
    assert rep.normalized_ok is ok
    assert max(rep.normalization_sums.values()) == (size - 1) / 2


def test_raw_hamming_fails_normalization():
    rep = check_admissible(hamming_matrix(strings_of_length(4)))
    assert set(rep.normalization_sums.values()) == {4.0625}
    assert not rep.normalized_ok
    assert rep.triangle_ok and rep.identity_ok


def test_single_point_domain_passes():
    rep = check_admissible(DistanceMatrix([b("0")], np.zeros((1, 1)), "trivial"))
    assert rep.identity_ok and rep.symmetry_ok and rep.triangle_ok and rep.normalized_ok


def test_euclid_bits_is_a_metric():
    rep = check_admissible(euclid_matrix(strings_of_length(3)))
    assert rep.identity_ok and rep.symmetry_ok and rep.triangle_ok


def test_triangle_violations_reported_worst_first():
    d = np.array([[0, 1, 5], [1, 0, 1], [5, 1, 0]], dtype=float)
    rep = check_admissible(DistanceMatrix([b("0"), b("1"), b("00")], d, "bad"))
    assert not rep.triangle_ok
    assert rep.worst_triangle_slack == 3
    assert rep.triangle_violation_count == 2
    x, z, y, slack = rep.triangle_violations[0]
    assert (x, z, y, slack) == (b("0"), b("00"), b("1"), 3.0)


def test_asymmetry_detected():
    d = np.array([[0, 1], [2, 0]], dtype=float)
    assert not check_admissible(DistanceMatrix([b("0"), b("1")], d, "asym")).symmetry_ok


def test_admissible_hamming_is_normalized_on_4_bits():
    m = admissible_hamming_matrix(strings_of_length(4))
    assert m.params["shift"] == 7
    rep = check_admissible(m)
    assert rep.normalized_ok and rep.identity_ok and rep.symmetry_ok and rep.triangle_ok


def test_info_distances_basic(table4, domain4):
    for a in domain4:
        assert d_sum(table4, a, a) == 2 * table4.entries[(a, a)]
        assert d_max(table4, a, a) == table4.entries[(a, a)]


def test_sum_max_chain_on_domain(table4, domain4):
    s = info_matrix(table4, domain4, "dsum").values
    m = info_matrix(table4, domain4, "dmax").values
    assert np.all(m <= s) and np.all(s <= 2 * m)
    assert np.array_equal(s, s.T) and np.array_equal(m, m.T)


def test_normalized_variant_zero_diagonal(table4, domain4):
    for kind in ("dsum", "dmax"):
        m = info_matrix(table4, domain4, kind, normalized=True)
        assert np.all(np.diag(m.values) == 0)
        assert np.all(m.values >= 0)


def test_complement_pair_dmax(table4):
    # 15 bits = four OUT instructions + HALT; frozen from the enumerated table and
    # confirmed at T=64 by brute force over all programs of at most 15 bits
    assert d_max(table4, "0101", "1010") == 15
    best, _ = brute_force("UPM-1", b("0101"), 15, 64, max_output=4)
    assert best[b("1010")] == 15


def test_missing_entry_is_one_sided():
    table = build_table("UPM-1", ["1", "11"], 8, 64)
    with pytest.raises(OneSidedBoundError, match=r"K\(b11\|b1\)"):
        d_max(table, "1", "11")


def test_minorization_examples(table4, hypercube4):
    dm = info_matrix(table4, hypercube4, "dmax")
    assert minorization(dm, dm)[0] == 0
    shifted = DistanceMatrix(dm.domain, dm.values + 5, "shifted")
    assert minorization(dm, shifted)[0] == -5
    c, (x, y) = minorization(dm, admissible_hamming_matrix(hypercube4))
    # every off-diagonal D_max is 15 on this machine; H' ranges over 8..11
    assert c == 15 - 8
    assert hamming(x, y) == 1
    with pytest.raises(DomainMismatchError):
        minorization(dm, hamming_matrix(strings_of_length(3)))


def test_conditional_triangle_slack_is_finite_and_stable(table4, domain4):
    s1, w1 = conditional_triangle_slack(table4, domain4)
    s2, w2 = conditional_triangle_slack(table4, domain4)
    assert math.isfinite(s1) and (s1, w1) == (s2, w2)
    x, y, z = w1
    k = table4.entries
    assert k[(z, x)] - k[(y, x)] - k[(z, y)] == s1


def test_invariance_gap_self_and_disjoint():
    t = build_table("UPM-1", ["", "0"], 12, 64)
    rep = invariance_gap(t, t)
    assert rep.max_gap == 0 and rep.compared == len(t.entries)
    other = build_table("UPM-2", ["11"], 12, 64)
    with pytest.warns(UserWarning):
        rep = invariance_gap(t, other)
    assert rep.compared == 0 and rep.max_gap is None
    assert len(rep.only_first) == len(t.entries)


def test_invariance_gap_between_machines():
    t1 = build_table("UPM-1", [""], 22, 4096, max_output=6)
    t2 = build_table("UPM-2", [""], 22, 4096, max_output=6)
    rep = invariance_gap(t1, t2)
    assert rep.compared > 0 and rep.max_gap is not None
    assert sum(rep.histogram.values()) == rep.compared
    x, y = rep.witness
    assert abs(t1.entries[(x, y)] - t2.entries[(x, y)]) == rep.max_gap


def test_compressor_matrices():
    dom = [b("0101"), b("1111"), b("0110")]
    n = ncd_matrix(LZ78B, dom)
    assert np.array_equal(n.values, n.values.T)
    e = compression_matrix(LZ78B, dom, "dmax")
    s = compression_matrix(LZ78B, dom, "dsum")
    assert np.all(e.values <= s.values) and np.all(s.values <= 2 * e.values)
    assert e.name == "emax" and e.source == "lz78b"


def test_csv_round_trip(tmp_path, hypercube4):
    m = admissible_hamming_matrix(hypercube4)
    path = tmp_path / "m.csv"
    save_matrix(m, path)
    again = load_matrix(path)
    assert again.domain == m.domain and np.array_equal(again.values, m.values)
    assert again.name == "hamming_adm" and again.params == {"shift": 7}
    assert dumps_matrix(again) == path.read_text()


def test_csv_with_empty_string_item():
    m = discrete_matrix([b(""), b("0")])
    again = loads_matrix(dumps_matrix(m))
    assert again.domain == [b(""), b("0")]
