import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from owcrelay.channel import (
    ChannelConfig, ChannelEngine, ImpulseResponse, bin_accumulate, convolve, impulse_response,
)
from owcrelay.errors import InvalidArgumentError
from owcrelay.geometry import RoomModel
from owcrelay.oracle import naive_impulse_response
from owcrelay.radiometry import Detector, Emitter, normal_from_angles

DT = 1e-10


def test_los_only_single_bin(room, tx, floor_detector):
    h = impulse_response(tx, floor_detector, room, ChannelConfig(max_bounces=0))
    assert h.start_bin == 66 and len(h) == 1
    assert math.isclose(h.gains[0], 1e-4 / (4 * math.pi), rel_tol=1e-10)


def test_facing_away_is_zero(room):
    e = Emitter((2.0, 4.0, 2.0), (0, 0, 1))
    d = Detector((2.0, 4.0, 1.0), (0, 0, -1))
    assert impulse_response(e, d, room, ChannelConfig(max_bounces=0)).is_zero


def test_position_outside_room_rejected(room, tx):
    with pytest.raises(InvalidArgumentError):
        impulse_response(tx, Detector((5.0, 4.0, 1.0), (0, 0, 1)), room, ChannelConfig(max_bounces=0))


GEOMETRIES = [
    (Emitter((2.0, 4.0, 3.0), (0, 0, -1), 1.0), Detector((1.0, 1.0, 1.0), (0, 0, 1))),
    (Emitter((0.0, 2.5, 2.0), (1, 0, 0), 1.0), Detector((2.0, 6.0, 1.0), (0, 0, 1), 1e-4, 60.0)),
    (Emitter((3.2, 7.1, 0.4), normal_from_angles(30, 200), 2.5), Detector((0.6, 0.9, 2.2), normal_from_angles(-20, 45))),
]


@pytest.mark.parametrize("bounces", [1, 2])
@pytest.mark.parametrize("geom", range(len(GEOMETRIES)))
def test_engine_matches_naive_oracle(room, bounces, geom):
    e, d = GEOMETRIES[geom]
    cfg = ChannelConfig(bounces, 0.5, 0.5)
    fast = ChannelEngine(room, cfg).response(e, d)
    ref = naive_impulse_response(e, d, room, cfg)
    assert fast.start_bin == ref.start_bin and len(fast) == len(ref)
    nz = ref.gains > 0
    assert np.array_equal(fast.gains > 0, nz)
    assert np.all(np.abs(fast.gains[nz] - ref.gains[nz]) <= 1e-9 * ref.gains[nz])
    if float(e.order).is_integer():
        # same enumeration order: bit-for-bit (vectorised pow differs from
        # scalar pow in the last ulp for non-integer exponents)
        assert fast == ref


def test_oracle_with_unequal_resolutions(room):
    e, d = GEOMETRIES[0]
    cfg = ChannelConfig(2, 0.4, 0.8)
    assert ChannelEngine(room, cfg).response(e, d) == naive_impulse_response(e, d, room, cfg)


def test_total_gain_monotone_in_bounces(room):
    for e, d in GEOMETRIES:
        totals = [ChannelEngine(room, ChannelConfig(b, 0.5, 0.5)).response(e, d).total for b in (0, 1, 2)]
        assert totals[0] <= totals[1] <= totals[2]
        assert totals[2] > totals[1]


def test_refinement_converges(room, tx):
    d = Detector((1.0, 2.0, 1.0), (0, 0, 1))
    sums = [ChannelEngine(room, ChannelConfig(1, s, 0.8)).response(tx, d).total for s in (0.4, 0.2, 0.1, 0.05)]
    steps = [abs(b - a) for a, b in zip(sums, sums[1:])]
    assert all(b < a for a, b in zip(steps, steps[1:]))


def test_engine_is_deterministic(coarse_engine, tx):
    d = Detector((3.0, 6.5, 1.0), (0, 0, 1))
    assert coarse_engine.response(tx, d) == coarse_engine.response(tx, d)


def test_response_has_no_leading_zeros(coarse_engine, tx):
    h = coarse_engine.response(tx, Detector((3.0, 6.5, 1.0), (0, 0, 1)))
    assert h.gains[0] > 0 and h.gains[-1] > 0


def test_bin_accumulate_examples():
    h = bin_accumulate([(1.0, 0.25e-9)], DT)
    assert h.start_bin == 2 and list(h.gains) == [1.0]
    h = bin_accumulate([(1.0, 0.0), (2.0, 0.05e-9)], DT)
    assert h.start_bin == 0 and list(h.gains) == [3.0]
    assert bin_accumulate([], DT).is_zero


def test_bin_accumulate_lower_edge():
    # a delay exactly on a bin edge lands in that bin
    assert bin_accumulate([(1.0, 3 * 0.5)], 0.5).start_bin == 3


def test_bin_accumulate_rejects_negative():
    with pytest.raises(InvalidArgumentError):
        bin_accumulate([(1.0, -1e-12)], DT)
    with pytest.raises(InvalidArgumentError):
        bin_accumulate([(-1.0, 1e-9)], DT)


def test_convolve_deltas():
    a = ImpulseResponse.delta(2, 0.5)
    b = ImpulseResponse.delta(3, 0.25)
    c = convolve(a, b)
    assert c.start_bin == 5 and list(c.gains) == [0.125]


def test_convolve_identity():
    h = ImpulseResponse(DT, 7, [0.1, 0.0, 0.3])
    assert convolve(ImpulseResponse.delta(0, 1.0), h) == h


def test_convolve_rejects_mixed_bin_widths():
    with pytest.raises(InvalidArgumentError):
        convolve(ImpulseResponse(1e-10, 0, [1.0]), ImpulseResponse(2e-10, 0, [1.0]))


def test_convolve_with_zero():
    assert convolve(ImpulseResponse.zero(), ImpulseResponse.delta(4)).is_zero


signals = st.builds(
    lambda start, g: ImpulseResponse(DT, start, g),
    st.integers(0, 50),
    st.lists(st.one_of(st.just(0.0), st.floats(1e-3, 10.0)), min_size=1, max_size=40).filter(lambda g: any(g)),
)


def _close(a: ImpulseResponse, b: ImpulseResponse, rtol=1e-12) -> bool:
    n = max(a.stop_bin, b.stop_bin)
    x, y = a.dense(n), b.dense(n)
    return bool(np.all(np.abs(x - y) <= rtol * max(np.abs(y).max(), 1e-300)))


@settings(max_examples=300, deadline=None)
@given(signals, signals)
def test_convolution_sum_is_product_of_sums(a, b):
    assert math.isclose(convolve(a, b).total, a.total * b.total, rel_tol=1e-12)


@settings(max_examples=300, deadline=None)
@given(signals, signals, signals)
def test_convolution_commutes_and_associates(a, b, c):
    assert _close(convolve(a, b), convolve(b, a))
    assert _close(convolve(convolve(a, b), c), convolve(a, convolve(b, c)))


def test_trimming_and_equality():
    h = ImpulseResponse(DT, 3, [0.0, 0.0, 1.0, 2.0, 0.0])
    assert h.start_bin == 5 and list(h.gains) == [1.0, 2.0]
    assert h == ImpulseResponse(DT, 5, [1.0, 2.0])
    assert ImpulseResponse(DT, 9, [0.0, 0.0]) == ImpulseResponse.zero()


def test_invalid_responses():
    with pytest.raises(InvalidArgumentError):
        ImpulseResponse(0.0, 0, [1.0])
    with pytest.raises(InvalidArgumentError):
        ImpulseResponse(DT, 0, [-1.0])
    with pytest.raises(InvalidArgumentError):
        ImpulseResponse(DT, -1, [1.0])


def test_serialisation_round_trip():
    h = ImpulseResponse(DT, 66, [7.9577e-6, 0.0, 1.5e-9])
    assert ImpulseResponse.from_record(h.to_record()) == h
    table = h.to_table()
    assert table.splitlines()[0] == "time_ns,gain"
    assert table.splitlines()[1] == "6.6,7.9577e-06"
    assert len(table.splitlines()) == 4


def test_dense_and_lookup():
    h = ImpulseResponse(DT, 2, [1.0, 3.0])
    assert list(h.dense()) == [0.0, 0.0, 1.0, 3.0]
    assert h.value_at(3) == 3.0 and h.value_at(10) == 0.0
    assert h.shifted(4).start_bin == 6
    with pytest.raises(InvalidArgumentError):
        h.dense(2)


def test_config_validation_and_scaling():
    with pytest.raises(InvalidArgumentError):
        ChannelConfig(max_bounces=3)
    with pytest.raises(InvalidArgumentError):
        ChannelConfig(element_side_bounce1=0.0)
    s = ChannelConfig().scaled(4)
    assert (s.element_side_bounce1, s.element_side_bounce2) == (0.2, 0.8)


def test_second_bounce_excludes_self_pairs():
    # 1 m cube at 1 m elements: six elements, pairs only between distinct faces
    room = RoomModel(1.0, 1.0, 1.0)
    e = Emitter((0.5, 0.5, 1.0), (0, 0, -1))
    d = Detector((0.5, 0.5, 0.5), (0, 0, 1))
    cfg = ChannelConfig(2, 1.0, 1.0)
    assert ChannelEngine(room, cfg).response(e, d) == naive_impulse_response(e, d, room, cfg)
