"""Naive reference channel engine.

Plain loops over reflection elements with scalar arithmetic; no
vectorisation, no precomputed coupling matrix. It enumerates paths in the
same order as :class:`~owcrelay.channel.ChannelEngine` (LOS, first-order
elements, then second-order pairs row-major) so that on small instances
the two agree bit for bit. Only practical for coarse tessellations.
"""
from __future__ import annotations

import math

from .channel import ChannelConfig, ImpulseResponse
from .errors import InvalidArgumentError
from .geometry import RoomModel, tessellate

_C = 2.99792458e8


def _link(src, src_n, order, dst, dst_n, area, cos_fov):
    dx = dst[0] - src[0]
    dy = dst[1] - src[1]
    dz = dst[2] - src[2]
    r2 = dx * dx + dy * dy + dz * dz
    if r2 == 0.0:
        return 0.0, 0.0
    r = math.sqrt(r2)
    cp = (src_n[0] * dx + src_n[1] * dy + src_n[2] * dz) / r
    ct = -(dst_n[0] * dx + dst_n[1] * dy + dst_n[2] * dz) / r
    if cp <= 0.0 or ct <= 0.0 or ct < cos_fov - 1e-12:
        return 0.0, r / _C
    return (order + 1.0) / (2.0 * math.pi * r2) * cp**order * area * ct, r / _C


def naive_impulse_response(emitter, detector, room: RoomModel, cfg: ChannelConfig) -> ImpulseResponse:
    for p in (emitter.position, detector.position):
        if not room.contains(p):
            raise InvalidArgumentError(f"position {tuple(p)} lies outside the room")
    dt = cfg.bin_width
    bins: dict[int, float] = {}

    def add(gain: float, delay: float) -> None:
        if gain > 0.0:
            k = math.floor(delay / dt)
            bins[k] = bins.get(k, 0.0) + gain

    ep, en, n = emitter.position, emitter.normal, emitter.order
    dp, dn, area, cos_fov = detector.position, detector.normal, detector.area, detector.cos_fov

    if ep != dp:
        add(*_link(ep, en, n, dp, dn, area, cos_fov))

    if cfg.max_bounces >= 1:
        for el in tessellate(room, cfg.element_side_bounce1):
            g1, t1 = _link(ep, en, n, el.centroid, el.normal, el.area, 0.0)
            g2, t2 = _link(el.centroid, el.normal, 1.0, dp, dn, area, cos_fov)
            add((g1 * el.reflectivity) * g2, t1 + t2)

    if cfg.max_bounces >= 2:
        elems = list(tessellate(room, cfg.element_side_bounce2))
        first = [_link(ep, en, n, el.centroid, el.normal, el.area, 0.0) for el in elems]
        last = [_link(el.centroid, el.normal, 1.0, dp, dn, area, cos_fov) for el in elems]
        for i, k1 in enumerate(elems):
            g1, t1 = first[i]
            if g1 == 0.0:
                continue
            for j, k2 in enumerate(elems):
                if i == j:
                    continue
                g3, t3 = last[j]
                if g3 == 0.0:
                    continue
                g2, t2 = _link(k1.centroid, k1.normal, 1.0, k2.centroid, k2.normal, k2.area, 0.0)
                add((((g1 * k1.reflectivity) * g2) * k2.reflectivity) * g3, (t1 + t2) + t3)

    if not bins:
        return ImpulseResponse.zero(dt)
    hi = max(bins)
    dense = [0.0] * (hi + 1)
    for k, v in bins.items():
        dense[k] = v
    return ImpulseResponse(dt, 0, dense)
