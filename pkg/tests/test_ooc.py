import itertools

import numpy as np
import pytest

from owcrelay.channel import ImpulseResponse
from owcrelay.errors import InvalidArgumentError, NoSignalError
from owcrelay.ooc import (
    CodeFamily, Codeword, chip_samples, correlate, encode, estimate_delay, generate, johnson_bound, verify_family,
)

DT = 1e-10
A = Codeword(13, (0, 1, 4))
B = Codeword(13, (0, 2, 7))


def brute_correlation(a: Codeword, b: Codeword, shift: int) -> int:
    # independent definition: overlap of {0,1} sequences
    x = np.zeros(a.n, int)
    y = np.zeros(a.n, int)
    x[list(a.marks)] = 1
    y[list(b.marks)] = 1
    return int((x * np.roll(y, shift)).sum())


def test_correlate_examples():
    assert correlate(A, A, 0) == 3
    assert all(correlate(A, A, s) <= 1 for s in range(1, 13))
    assert all(correlate(A, B, s) <= 1 for s in range(13))


def test_correlate_matches_sequence_overlap():
    for a, b in itertools.product([A, B, Codeword(13, (0, 3, 5, 9))], repeat=2):
        for s in range(13):
            assert correlate(a, b, s) == brute_correlation(a, b, s)


def test_correlate_errors():
    with pytest.raises(InvalidArgumentError):
        correlate(A, Codeword(7, (0, 1, 3)), 0)
    with pytest.raises(InvalidArgumentError):
        correlate(A, B, 13)


def test_codeword_invariants():
    with pytest.raises(InvalidArgumentError):
        Codeword(13, ())
    with pytest.raises(InvalidArgumentError):
        Codeword(13, (0, 0, 4))
    with pytest.raises(InvalidArgumentError):
        Codeword(13, (0, 4, 13))
    assert A.w == 3 and str(A) == "0 1 4"


def exhaustive_ok(fam: CodeFamily) -> bool:
    for i, a in enumerate(fam):
        if brute_correlation(a, a, 0) != fam.w:
            return False
        if any(brute_correlation(a, a, s) > fam.lambda_a for s in range(1, fam.n)):
            return False
        for b in fam.codewords[i + 1 :]:
            if any(brute_correlation(a, b, s) > fam.lambda_c for s in range(fam.n)):
                return False
    return True


def test_generate_13_3_1():
    fam = generate(13, 3, 1)
    assert [c.marks for c in fam] == [(0, 1, 4), (0, 2, 7)]
    assert verify_family(fam) and exhaustive_ok(fam)


def test_generate_7_3_1():
    fam = generate(7, 3, 1)
    assert [c.marks for c in fam] == [(0, 1, 3)]


def test_generate_73_3_1_serves_twelve_relays():
    fam = generate(73, 3, 1)
    assert len(fam) == 12 == johnson_bound(73, 3, 1)
    assert verify_family(fam) and exhaustive_ok(fam)


@pytest.mark.parametrize("n,w", [(19, 3), (25, 3), (31, 3), (37, 4), (41, 4), (61, 5)])
def test_generated_families_verify_and_respect_bound(n, w):
    fam = generate(n, w, 1)
    assert 1 <= len(fam) <= johnson_bound(n, w, 1)
    assert verify_family(fam) and exhaustive_ok(fam)


@pytest.mark.parametrize("n,w,lam", [(20, 4, 2), (16, 4, 2), (30, 5, 2)])
def test_higher_lambda_families(n, w, lam):
    fam = generate(n, w, lam)
    assert len(fam) >= 1 and verify_family(fam) and exhaustive_ok(fam)


def test_max_codewords_limits_family():
    assert len(generate(73, 3, 1, max_codewords=4)) == 4


def test_generate_is_deterministic():
    assert generate(73, 3, 1) == generate(73, 3, 1)


@pytest.mark.parametrize("n,w,lam", [(6, 3, 1), (12, 4, 1), (10, 3, 0), (0, 1, 1)])
def test_generate_rejects_infeasible(n, w, lam):
    with pytest.raises(InvalidArgumentError):
        generate(n, w, lam)


def test_johnson_bound_values():
    assert johnson_bound(13, 3, 1) == 2
    assert johnson_bound(73, 3, 1) == 12
    assert johnson_bound(7, 3, 1) == 1


def test_family_text():
    text = generate(13, 3, 1).to_text()
    assert text == "# n=13 w=3 lambda=1 size=2\n0 1 4\n0 2 7\n"


def test_encode_unit_chips():
    x = encode(A, DT, DT)
    assert list(np.flatnonzero(x.samples)) == [0, 1, 4] and x.samples.size == 13


def test_encode_wide_chips():
    x = encode(A, 2 * DT, DT)
    assert list(np.flatnonzero(x.samples)) == [0, 1, 2, 3, 8, 9] and x.samples.size == 26


def test_encode_rejects_non_multiple_chip():
    with pytest.raises(InvalidArgumentError):
        encode(A, 1.5 * DT, DT)


def shifted_copy(c: Codeword, s: int, chip_bins: int = 1) -> ImpulseResponse:
    return ImpulseResponse(DT, s * chip_bins, encode(c, chip_bins * DT, DT).samples)


def test_estimate_delay_examples():
    assert estimate_delay(shifted_copy(A, 5), A, DT, DT) == 5
    assert estimate_delay(shifted_copy(A, 0), A, DT, DT) == 0


def test_estimate_delay_zero_signal():
    with pytest.raises(NoSignalError):
        estimate_delay(ImpulseResponse.zero(), A, DT, DT)


def test_fold_equals_periodic_capture():
    # a one-shot capture folded mod n equals one period of the repeated probe
    x = shifted_copy(B, 9).dense()
    periodic = np.zeros(13)
    for k in range(13 + 9):
        periodic[k % 13] += x[k] if k < x.size else 0.0
    assert np.array_equal(chip_samples(x, 13, DT, DT), periodic)


@pytest.mark.parametrize("chip", [1, 3])
def test_single_code_every_shift_every_codeword(chip):
    fam = generate(73, 3, 1)
    for c in fam:
        for s in range(73):
            assert estimate_delay(shifted_copy(c, s, chip), c, chip * DT, DT) == s


def test_two_code_superposition_exhaustive():
    for sa, sb in itertools.product(range(13), repeat=2):
        rx = shifted_copy(A, sa).dense(40) + shifted_copy(B, sb).dense(40)
        assert estimate_delay(rx, A, DT, DT) == sa
        assert estimate_delay(rx, B, DT, DT) == sb
