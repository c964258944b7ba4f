import math
import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import (
    ap_average_naive,
    block_totals_bincount,
    block_totals_naive,
    good_set_naive,
    mobius,
    rotation_e1_orbit,
    weight,
)
from riglab import correlators as cor
from riglab.arith import in_Dj
from riglab.diophantine import parse_alpha
from riglab.dynamics import Anzai, Constant, FourierCocycle, FourierMode, Iet, Rotation
from riglab.errors import BlocksInvalid, RangeInvalid

ALPHA = parse_alpha("(0-1+1*sqrt(2))/1")
A = float(ALPHA)


# -- weighted orbit averages -------------------------------------------------


def test_orbit_average_n1_is_f_of_Tx():
    avg = cor.weighted_orbit_average(Rotation(ALPHA), FourierMode(1), 0.2, 1, "mobius")
    assert avg.value == pytest.approx(rotation_e1_orbit(A, 0.2, 1, 1)[0], abs=1e-15)


@pytest.mark.parametrize("kind", ["mobius", "liouville"])
def test_orbit_average_matches_oracle(kind):
    N = 3000
    vals = rotation_e1_orbit(A, 0.3, 1, N)
    ref = sum(weight(kind, n) * vals[n - 1] for n in range(1, N + 1)) / N
    got = cor.weighted_orbit_average(Rotation(ALPHA), FourierMode(1), 0.3, N, kind, segment_size=97)
    assert abs(got.value - ref) < 1e-12
    assert got.modulus == pytest.approx(abs(ref), abs=1e-12)


def test_orbit_average_segment_invariant():
    sys_ = Anzai(ALPHA, FourierCocycle.cosine(0.1))
    f = FourierMode(1, coordinate=1)
    a = cor.weighted_orbit_average(sys_, f, (0.1, 0.2), 5000, "liouville", segment_size=333)
    b = cor.weighted_orbit_average(sys_, f, (0.1, 0.2), 5000, "liouville")
    assert abs(a.value - b.value) < 1e-14


def test_orbit_average_constant_is_mertens_mean():
    N = 10**5
    got = cor.weighted_orbit_average(Iet((0.3, 0.7), (2, 1)), Constant(1.0), 0.5, N, "mobius")
    from riglab.arith import sieve_signs

    assert got.value == pytest.approx(int(sieve_signs(1, N + 1, "mobius").values.sum()) / N, abs=1e-15)
    assert abs(got.value) < 0.01


def test_orbit_average_rejects_bad_N():
    with pytest.raises(RangeInvalid):
        cor.weighted_orbit_average(Rotation(ALPHA), FourierMode(1), 0.0, 0, "mobius")


# -- autocorrelations --------------------------------------------------------


def test_autocorrelation_h0_identities():
    N = 5000
    assert cor.autocorrelation("liouville", 0, N) == 1
    squarefree = sum(1 for n in range(1, N + 1) if mobius(n) != 0)
    assert cor.autocorrelation("mobius", 0, N) == Fraction(squarefree, N)


@given(kind=st.sampled_from(["mobius", "liouville"]), h=st.integers(0, 40), N=st.integers(1, 600))
@settings(max_examples=40, deadline=None)
def test_autocorrelation_matches_oracle(kind, h, N):
    ref = Fraction(sum(weight(kind, n) * weight(kind, n + h) for n in range(1, N + 1)), N)
    assert cor.autocorrelation(kind, h, N) == ref


def test_correlation_sums_segment_invariant():
    hs = [1, 2, 3, 50, 120]
    a = cor._correlation_sums("liouville", hs, 7777, segment_size=13)
    b = cor._correlation_sums("liouville", hs, 7777)
    assert a == b


def test_scan_Dj_is_filtered_submap():
    full = cor.autocorrelation_scan("liouville", 60, 4000)
    d1 = cor.autocorrelation_scan_Dj("liouville", 1, 30, 4000)
    assert 30 not in d1.entries and set(d1.entries) == set(range(1, 30))
    d2 = cor.autocorrelation_scan_Dj("liouville", 2, 60, 4000)
    assert set(d2.entries) == {h for h in range(1, 61) if in_Dj(h, 2)}
    for h, v in d2.entries.items():
        assert full.entries[h] == v
    assert all(abs(v) <= 1 for v in full.entries.values())
    assert full.max_abs == abs(full.entries[full.argmax])


def test_autocorrelation_errors():
    with pytest.raises(RangeInvalid):
        cor.autocorrelation("mobius", -1, 10)
    with pytest.raises(RangeInvalid):
        cor.autocorrelation_scan_Dj("mobius", 0, 10, 10)


# -- short AP averages -------------------------------------------------------


@pytest.mark.parametrize("X,H,q", [(2000, 20, 6), (1000, 5, 30), (200, 3, 1), (300, 1, 7), (500, 4, 11)])
def test_ap_average_matches_naive(X, H, q):
    assert cor.ap_short_average(X, H, q).value == ap_average_naive(X, H, q)


def test_ap_average_trivial_bound_sweep():
    rng = random.Random(5)
    for _ in range(20):
        q, H = rng.randint(1, 12), rng.randint(1, 15)
        if q * H < 2:
            continue
        X = rng.randint(q * H, 3000)
        r = cor.ap_short_average(X, H, q)
        assert 0 <= r.value <= 1 + Fraction(1, H)


def test_ap_average_range_and_condition():
    with pytest.raises(RangeInvalid):
        cor.ap_short_average(10**4, 20, 30030)
    with pytest.raises(RangeInvalid):
        cor.ap_short_average(10, 1, 1)
    r = cor.ap_short_average(5000, 50, 7)
    assert r.condition_met and r.epsilon_used == Fraction(1, 200)


# -- block decompositions ----------------------------------------------------


@pytest.mark.parametrize("M,L,q", [(2000, 5, 6), (200, 5, 1), (900, 3, 10)])
def test_block_search_matches_naive(M, L, q):
    r = cor.block_z_search(M, L, q)
    ref = block_totals_naive(M, L, q)
    assert list(r.totals) == ref
    assert r.total_at_z == min(ref) and r.z_star == ref.index(min(ref))
    assert r.mean_over_z == Fraction(sum(ref), L * q)


@pytest.mark.slow
def test_block_search_large_matches_oracle():
    r = cor.block_z_search(10**5, 50, 6)
    ref = block_totals_bincount(10**5, 50, 6)
    assert list(r.totals) == ref and r.z_star == ref.index(min(ref))


def test_block_q1_is_plain_interval_sums():
    M, L = 400, 7
    r = cor.block_z_search(M, L, 1)
    mu = [mobius(n) for n in range(0, M + 3 * L)]
    for z in (0, 3, 6):
        t = sum(abs(sum(mu[z + j * L : z + (j + 1) * L])) for j in range(M // L + 1))
        assert r.totals[z] == t


def test_block_pigeonhole_and_range():
    for M, L, q in [(500, 2, 3), (1000, 10, 4), (3000, 7, 2)]:
        r = cor.block_z_search(M, L, q)
        assert r.total_at_z <= r.mean_over_z and 0 <= r.z_star < L * q
    with pytest.raises(RangeInvalid):
        cor.block_z_search(10, 5, 2)


# -- good sets ---------------------------------------------------------------


@pytest.mark.parametrize("M,z", [(10**5, 0), (2400, 37)])
def test_good_set_matches_naive(M, z):
    q, L, eps = 12, 2, 0.5
    reach = (L - 1) * q
    vals = rotation_e1_orbit(A, 0.1, z - reach, M + 2 * reach)
    values = {n: v for n, v in zip(range(z - reach, z + M + reach), vals)}
    ref = good_set_naive(values, M, q, L, eps, z)
    r = cor.good_set_diagnostics(Rotation(ALPHA), FourierMode(1), 0.1, M, q, L, eps, z)
    assert r.good_m_fraction == pytest.approx(ref["good_m"], abs=1e-12)
    assert r.good_interval_fraction == pytest.approx(ref["good_interval"], abs=1e-12)
    assert r.good_residue_mean == pytest.approx(ref["residue_mean"], abs=1e-12)
    assert r.good_residue_min == pytest.approx(ref["residue_min"], abs=1e-12)
    assert r.mean_rigidity_sum == pytest.approx(ref["mean_sum"], abs=1e-10)


def test_good_set_constant_all_good():
    r = cor.good_set_diagnostics(Anzai(ALPHA, FourierCocycle.cosine(0.1)), Constant(2.0), (0.0, 0.0), 500, 5, 3, 0.01)
    assert r.good_m_fraction == r.good_interval_fraction == r.good_residue_min == 1.0
    assert r.mean_rigidity_sum == 0


def test_good_set_markov_bound():
    for q, eps in [(12, 0.5), (29, 0.1), (70, 0.05), (5, 0.3)]:
        r = cor.good_set_diagnostics(Rotation(ALPHA), FourierMode(1), 0.0, 4000, q, 2, eps)
        assert r.markov_holds
        for v in (r.good_m_fraction, r.good_interval_fraction, r.good_residue_mean, r.good_residue_min):
            assert 0 <= v <= 1


def test_good_set_range():
    with pytest.raises(RangeInvalid):
        cor.good_set_diagnostics(Rotation(ALPHA), FourierMode(1), 0.0, 10, 12, 2, 0.5)
    with pytest.raises(RangeInvalid):
        cor.good_set_diagnostics(Rotation(ALPHA), FourierMode(1), 0.0, 100, 12, 2, 1.5)


# -- MOMO --------------------------------------------------------------------


def test_default_block_ends():
    assert cor.default_block_ends(5) == [1, 2, 5, 8, 11]
    ends = cor.block_ends_upto(1000)
    assert ends[-1] <= 1000 and math.isqrt((len(ends) + 1) ** 3) > 1000
    m = cor.monotone_from(ends)
    gaps = np.diff(ends)
    assert all(gaps[i] <= gaps[i + 1] for i in range(m, len(gaps) - 1))
    assert m == 0 or gaps[m - 1] > gaps[m]


def test_momo_length_one_blocks():
    N = 2000
    r = cor.momo_average(Rotation(ALPHA), FourierMode(1), 0.3, list(range(N + 1)), "mobius")
    assert r.exact_sup
    ref = sum(abs(mobius(n)) for n in range(1, N)) / N
    assert r.value == pytest.approx(ref, abs=1e-12)


def test_momo_single_block_is_orbit_average():
    N = 5000
    r = cor.momo_average(Rotation(ALPHA), FourierMode(1), 0.0, [0, N], "liouville")
    # lambda(0) is weighted zero, so the block is n = 1..N-1
    avg = cor.weighted_orbit_average(Rotation(ALPHA), FourierMode(1), 0.0, N - 1, "liouville")
    assert r.value * N == pytest.approx(avg.modulus * (N - 1), abs=1e-9)


def test_momo_rotation_sup_independent_of_start():
    ends = cor.block_ends_upto(3000)
    a = cor.momo_average(Rotation(ALPHA), FourierMode(1), 0.0, ends, "mobius")
    b = cor.momo_average(Rotation(ALPHA), FourierMode(1), 0.77, ends, "mobius")
    assert a.value == pytest.approx(b.value, abs=1e-12)


def test_momo_grid_sup_dominates_single_point():
    ends = cor.block_ends_upto(2000)
    sys_ = Anzai(ALPHA, FourierCocycle.cosine(0.1))
    f = FourierMode(1, coordinate=1)
    r = cor.momo_average(sys_, f, (0.1, 0.1), ends, "mobius", sup_grid=8)
    assert not r.exact_sup and r.sup_points == 1 + 64
    single = 0.0
    for k in range(len(ends) - 1):
        vals = [
            weight("mobius", n) * v
            for n, v in zip(
                range(ends[k], ends[k + 1]),
                cor.orbit_values(sys_, f, (0.1, 0.1), ends[k], ends[k + 1] - ends[k]),
            )
        ]
        single += abs(sum(vals))
    assert r.value >= single / ends[-1] - 1e-12


def test_momo_blocks_invalid():
    for ends in ([5], [1, 3, 3], [3, 2, 9], [-1, 4, 8]):
        with pytest.raises(BlocksInvalid):
            cor.momo_average(Rotation(ALPHA), FourierMode(1), 0.0, ends, "mobius")
