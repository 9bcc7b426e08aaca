import math

import mpmath
import numpy as np
import pytest

from fastescape.errors import TailBoundUnavailable
from fastescape.zeros import (
    GeneratorZeros,
    ListWithTail,
    PowerZeros,
    scaled_zeta_sum,
    tail_log_sum,
    tail_recip_sum,
)


def _zeta_oracle(s: float, q: float) -> float:
    """High-precision sum of (q/(q+m))^s: explicit head in mpmath plus the
    Hurwitz tail (mpmath.zeta alone drifts ~1e-10 at large s with large q)."""
    with mpmath.workdps(40):
        head_n = 20_000
        head = mpmath.fsum((mpmath.mpf(q) / (q + m)) ** s for m in range(head_n))
        tail = mpmath.power(q, s) * mpmath.zeta(s, q + head_n)
        return float(head + tail)


@pytest.mark.parametrize("q", [0.7, 1.5, 17.0, 1439.5])
def test_scaled_zeta_against_mpmath(q):
    s = np.array([2.0, 3.0, 6.0, 15.0, 40.0])
    got, err = scaled_zeta_sum(s, q)
    for si, gi, ei in zip(s, got, err):
        want = _zeta_oracle(float(si), q)
        assert abs(gi - want) <= max(5e-13 * want, 5 * ei + 1e-13)


def test_scaled_zeta_error_bound_honest():
    q = 3.5
    s = np.array([2.0, 8.0])
    got, err = scaled_zeta_sum(s, q)
    want = np.array([_zeta_oracle(float(si), q) for si in s])
    assert np.all(np.abs(got - want) <= err + 1e-12 * want)


def brute_tail_log(seq, N, z, terms=4_000_000):
    idx = np.arange(N + 1, N + terms + 1)
    a = seq.values(idx)
    return complex(np.sum(np.log1p(z / a)))


def test_tail_log_sum_vs_bruteforce():
    seq = PowerZeros(math.pi**2, 2.0, -0.5)
    N = 40
    terms = 4_000_000
    frame = seq.tail_frame(N)
    for z in (10.0 + 0j, 100.0 + 40j, -200.0 + 5j, 400.0 + 0j):
        assert abs(z) <= 0.25 * frame.a_next
        got, err = tail_log_sum(frame, np.array([z]), 1e-12)
        want = brute_tail_log(seq, N, z, terms)
        # the brute force itself truncates, leaving about |z|/(pi^2 M)
        brute_rem = 1.5 * abs(z) / (math.pi**2 * (N + terms))
        assert abs(got[0] - want) < brute_rem + 1e-9
        assert err < 1e-12


def test_tail_recip_sum_vs_bruteforce():
    seq = PowerZeros(1.0, 2.0, 0.0)
    N = 64
    terms = 2_000_000
    frame = seq.tail_frame(N)
    z = 500.0 + 120j
    got, err = tail_recip_sum(frame, np.array([z]), 1e-16)
    idx = np.arange(N + 1, N + terms + 1)
    want = complex(np.sum(1.0 / (z + seq.values(idx))))
    brute_rem = 1.5 / (N + terms)
    assert abs(got[0] - want) < brute_rem + 1e-12
    assert err < 1e-14


def test_count_at_most_boundaries():
    seq = PowerZeros(math.pi**2, 2.0, -0.5)
    a = seq.moduli(np.arange(1, 200))
    for n in (1, 5, 42, 150):
        an = a[n - 1]
        assert seq.count_at_most(an) == n
        assert seq.count_at_most(an * (1 - 1e-12)) == n - 1
    assert seq.count_at_most(0.1) == 0
    assert seq.count_at_most(1e200) > 1e90


def test_head_cut_certifies_ratio():
    seq = PowerZeros(math.pi**2, 2.0, -0.5)
    for z_abs in (1.0, 37.0, 1e4, 3e7):
        N = seq.head_cut(z_abs)
        a_next = seq.moduli(np.array([N + 1]))[0]
        assert z_abs <= 0.25 * a_next


def test_tail_bound_decreases_to_zero():
    seq = PowerZeros(math.pi**2, 2.0, -0.5)
    bounds = [seq.tail_bound(N, 50.0) for N in (4, 16, 64, 256, 4096)]
    assert all(b > n for b, n in zip(bounds, bounds[1:]))
    assert bounds[-1] < 1e-2
    # upper bound indeed: compare against brute force
    idx = np.arange(17, 1_000_017)
    brute = float(np.sum(50.0 / seq.moduli(idx)))
    assert seq.tail_bound(16, 50.0) >= brute


def test_list_with_tail_validation():
    with pytest.raises(ValueError, match="decrease"):
        ListWithTail([2.0, 1.0, 3.0], tail_coeff=1.0, tail_exponent=2.0)
    with pytest.raises(ValueError, match="below the last head modulus"):
        ListWithTail([5.0, 100.0], tail_coeff=1.0, tail_exponent=2.0)
    seq = ListWithTail([1.0, 4.0, 9.0], tail_coeff=1.0, tail_exponent=2.0)
    assert seq.all_real_positive
    assert seq.count_at_most(9.5) == 3
    assert seq.count_at_most(16.0) == 4      # model continues as n^2
    np.testing.assert_allclose(
        seq.values(np.array([2, 5])).real, [4.0, 25.0]
    )


def test_list_with_tail_complex_head():
    head = [1.0 + 0.1j, 2.0 - 0.2j, 4.0 + 0j]
    seq = ListWithTail(head, tail_coeff=1.0, tail_exponent=2.0)
    assert not seq.all_real_positive
    assert seq.head_cut(0.5) >= 3            # head always evaluated directly


def test_generator_zeros():
    seq = GeneratorZeros(lambda n: n**3, tail_bound_fn=lambda N, R: R * 0.5 / N**2)
    assert seq.count_at_most(27.0) == 3
    assert seq.tail_bound(10, 1.0) == pytest.approx(0.005)
    bare = GeneratorZeros(lambda n: n**3)
    with pytest.raises(TailBoundUnavailable):
        bare.tail_bound(10, 1.0)
