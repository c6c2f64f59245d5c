import math

import numpy as np
import pytest

from owcrelay.errors import InvalidArgumentError
from owcrelay.geometry import RoomModel, Vec3, tessellate


def test_room_surfaces_bound_the_box(room):
    assert len(room.surfaces) == 6
    assert room.surface_area == pytest.approx(2 * (8 * 4 + 8 * 3 + 4 * 3))
    for s in room.surfaces:
        assert s.normal.norm() == pytest.approx(1.0)
        # normal points into the room: a step along it from the face stays inside
        p = [0.0, 0.0, 0.0]
        p[s.axis] = s.offset
        p[s.u_axis] = s.u_extent / 2
        p[s.v_axis] = s.v_extent / 2
        inward = [p[i] + 0.1 * s.normal[i] for i in range(3)]
        assert room.contains(inward)


def test_reflectivities_follow_configuration():
    r = RoomModel(wall_reflectivity=0.7, ceiling_reflectivity=0.6, floor_reflectivity=0.2)
    by_name = {s.name: s.reflectivity for s in r.surfaces}
    assert by_name["floor"] == 0.2 and by_name["ceiling"] == 0.6
    assert all(by_name[n] == 0.7 for n in ("wall_x0", "wall_xW", "wall_y0", "wall_yL"))


@pytest.mark.parametrize("bad", [0.0, -1.0, math.nan])
def test_room_rejects_bad_dimensions(bad):
    with pytest.raises(InvalidArgumentError):
        RoomModel(length=bad)


def test_reflectivity_out_of_range():
    with pytest.raises(InvalidArgumentError):
        RoomModel(wall_reflectivity=1.2)


def test_long_wall_at_5cm_has_9600_elements(room):
    t = tessellate(room, 0.05)
    names = np.array(t.surface_names)[t.surface_index]
    assert int((names == "wall_x0").sum()) == 160 * 60
    assert int((names == "wall_xW").sum()) == 9600


@pytest.mark.parametrize("side,count", [(0.05, 54_400), (0.20, 3_400), (0.80, 220)])
def test_element_counts(room, side, count):
    assert len(tessellate(room, side)) == count


@pytest.mark.parametrize("side", [0.05, 0.2, 0.5, 0.8, 0.3, 0.7, 1.3])
def test_areas_sum_to_room_surface(room, side):
    t = tessellate(room, side)
    assert math.isclose(t.total_area, room.surface_area, rel_tol=1e-9)
    assert np.all(t.areas > 0)


def test_clipped_edges_keep_area():
    # 0.7 does not divide 4, 8 or 3: the trailing rows are clipped, not dropped
    r = RoomModel()
    t = tessellate(r, 0.7)
    assert t.areas.min() < 0.7 * 0.7 - 1e-12
    assert t.areas.max() == pytest.approx(0.49)


def test_centroids_lie_on_their_face(room):
    t = tessellate(room, 0.2)
    for k, s in enumerate(room.surfaces):
        sel = t.surface_index == k
        c = t.centroids[sel]
        assert np.all(c[:, s.axis] == s.offset)
        assert np.all((c[:, s.u_axis] > 0) & (c[:, s.u_axis] < s.u_extent))
        assert np.all((c[:, s.v_axis] > 0) & (c[:, s.v_axis] < s.v_extent))
        assert np.all(t.normals[sel] == np.asarray(s.normal))
        assert np.all(t.reflectivity[sel] == s.reflectivity)


def test_element_order_surface_then_row_major(room):
    t = tessellate(room, 1.0)
    assert list(t.surface_index) == sorted(t.surface_index)
    floor = t.centroids[t.surface_index == 0]
    # floor: u = x (4 cells), v = y (8 cells); u varies fastest
    assert tuple(floor[0]) == (0.5, 0.5, 0.0)
    assert tuple(floor[1]) == (1.5, 0.5, 0.0)
    assert tuple(floor[4]) == (0.5, 1.5, 0.0)


def test_tessellation_is_deterministic(room):
    a, b = tessellate(room, 0.2), tessellate(room, 0.2)
    for name in ("centroids", "normals", "areas", "reflectivity", "surface_index"):
        assert np.array_equal(getattr(a, name), getattr(b, name))
    assert list(a)[:5] == list(b)[:5]


def test_element_view(room):
    t = tessellate(room, 0.5)
    e = t[0]
    assert e.surface == "floor" and e.normal == Vec3(0.0, 0.0, 1.0)
    assert e.area == 0.25 and e.reflectivity == 0.3


@pytest.mark.parametrize("side", [0.0, -0.1, math.inf, 3.5])
def test_tessellate_rejects_bad_side(room, side):
    with pytest.raises(InvalidArgumentError):
        tessellate(room, side)


def test_contains(room):
    assert room.contains((0, 0, 0)) and room.contains((4, 8, 3))
    assert not room.contains((4.1, 1, 1))
