import math

import numpy as np
import pytest

from coarselab.corona import (CompactificationModel, CoronaCoverSchedule,
                              check_cc_entourage, corona_dim_cover, map_f, map_g,
                              roundtrip_bounds)
from coarselab.covers import Cover, multiplicity
from coarselab.errors import InvalidInputError
from coarselab.spaces import Entourage, Space
from coarselab.transforms import ColoredCover


def unit_interval_model(step=1.0 / 400):
    """hX = [0,1] sampled; the corona is the right endpoint."""
    n = int(round(1.0 / step)) + 1
    coords = np.arange(n)[:, None] * step
    sp = Space.cloud(coords)
    corona = [n - 1]
    interior = [i for i in range(n) if i != n - 1]
    return CompactificationModel(sp, interior, corona)


def disk_model(radial=20, angular=36):
    """hX = closed unit disk; the corona is the boundary circle sample."""
    pts = [(0.0, 0.0)]
    for i in range(1, radial + 1):
        r = i / radial
        for j in range(angular):
            a = 2 * math.pi * j / angular
            pts.append((r * math.cos(a), r * math.sin(a)))
    coords = np.array(pts)
    sp = Space.cloud(coords)
    rr = np.linalg.norm(coords, axis=1)
    corona = [i for i in range(sp.n) if rr[i] > 1 - 1e-9]
    interior = [i for i in range(sp.n) if rr[i] <= 1 - 1e-9]
    return CompactificationModel(sp, interior, corona)


class TestModelAndMaps:
    def test_filtration_monotone_and_exhaustive(self):
        m = unit_interval_model(1.0 / 50)
        prev: set = set()
        for i in range(1, m.depth + 1):
            cur = set(m.filtration_set(i))
            assert prev <= cur
            prev = cur
        assert prev == set(range(len(m.interior)))

    def test_map_f_on_interval(self):
        m = unit_interval_model(1.0 / 400)
        # X_10 = {x <= 0.9}; nearest point of X_10 to the corona point 1.0
        y = map_f(m, 0, 10)
        assert m.ambient.points[y][0] == pytest.approx(0.9, abs=1e-9)

    def test_map_f_empty_level_rejected(self):
        # every interior point sits within 0.5 of the corona, so X_1 is empty
        coords = np.arange(0.5, 1.0 + 1e-9, 0.025)[:, None]
        sp = Space.cloud(coords)
        m = CompactificationModel(sp, list(range(sp.n - 1)), [sp.n - 1])
        with pytest.raises(InvalidInputError):
            map_f(m, 0, 1)

    def test_map_g_on_interval(self):
        m = unit_interval_model(1.0 / 400)
        x = next(i for i in m.interior
                 if m.ambient.points[i][0] == pytest.approx(0.9, abs=1e-9))
        ci, level = map_g(m, x)
        assert level == 10
        assert ci == 0

    def test_deep_interior_lands_in_level_one(self):
        m = unit_interval_model(1.0 / 50)
        ci, level = map_g(m, 0)  # the left endpoint, far from the corona
        assert level == 1

    def test_roundtrip_bounds_interval(self):
        m = unit_interval_model(1.0 / 200)
        out = roundtrip_bounds(m)
        assert not out["fg_failures"]
        assert not out["gf_failures"]
        assert out["gf_checked"] > 0

    def test_roundtrip_bounds_disk(self):
        m = disk_model()
        out = roundtrip_bounds(m)
        assert not out["fg_failures"]
        assert not out["gf_failures"]

    def test_radial_nearest_point_on_disk(self):
        m = disk_model()
        ci = 0
        y = map_f(m, ci, 5)
        c = np.array(m.ambient.points[m.corona[ci]])
        got = np.array(m.ambient.points[y])
        # nearest X_5 point to a boundary point sits radially inward
        assert np.linalg.norm(got) == pytest.approx(1 - 1 / 5, abs=0.06)
        assert np.dot(got, c) > 0


class TestBoundaryControl:
    def test_diagonal_is_controlled(self):
        m = unit_interval_model(1.0 / 100)
        sub = [i for i in m.interior]
        diag = Entourage.from_pairs(m.ambient, [(i, i) for i in sub])
        out = check_cc_entourage(m, diag)
        assert out["controlled"]
        assert max(out["rho"]) == 0.0

    def test_fixed_radius_not_controlled(self):
        m = unit_interval_model(1.0 / 100)
        pts = [m.ambient.points[i][0] for i in range(m.ambient.n)]
        pairs = [(i, j) for i in m.interior for j in m.interior
                 if abs(pts[i] - pts[j]) < 0.3]
        e = Entourage.from_pairs(m.ambient, pairs)
        out = check_cc_entourage(m, e)
        assert not out["controlled"]
        assert out["rho"][-1] >= 0.3 - 0.02

    def test_shrinking_relation_is_controlled(self):
        m = unit_interval_model(1.0 / 100)
        pts = [m.ambient.points[i][0] for i in range(m.ambient.n)]
        pairs = [(i, j) for i in m.interior for j in m.interior
                 if abs(pts[i] - pts[j]) <= 0.5 * (1 - max(pts[i], pts[j])) + 1e-12]
        e = Entourage.from_pairs(m.ambient, pairs)
        out = check_cc_entourage(m, e)
        assert out["controlled"]
        for i, r in enumerate(out["rho"], start=1):
            assert r <= 0.5 / i + 1e-9

    def test_monotone_in_relation(self):
        m = unit_interval_model(1.0 / 100)
        pts = [m.ambient.points[i][0] for i in range(m.ambient.n)]
        pairs = [(i, j) for i in m.interior for j in m.interior
                 if abs(pts[i] - pts[j]) <= 0.5 * (1 - max(pts[i], pts[j])) + 1e-12]
        small = [(i, j) for (i, j) in pairs if abs(pts[i] - pts[j]) < 0.05]
        big = check_cc_entourage(m, Entourage.from_pairs(m.ambient, pairs))
        lit = check_cc_entourage(
            m, Entourage.from_pairs(m.ambient, small),
            schedule_constant=big["schedule_constant"])
        assert big["controlled"] and lit["controlled"]


def circle_space(n_points=720):
    pts = [(math.cos(2 * math.pi * j / n_points), math.sin(2 * math.pi * j / n_points))
           for j in range(n_points)]
    return Space.cloud(np.array(pts))


def arc_cover_builder(space: Space):
    """Covers of the circle sample by two alternating arc families with
    mesh <= 1/k and near-maximal overlap, arc half-width 0.95 spacing."""
    n = space.n
    angles = np.arange(n) * (2 * math.pi / n)

    def chord(angle):
        return 2 * math.sin(min(angle / 2, math.pi / 2))

    def arc_count(k: int) -> int:
        m = 4
        while chord(2 * math.pi / m * 1.9) > 1.0 / k:
            m += 2
        return m

    def build(k: int) -> Cover:
        m = arc_count(k)
        sigma = 2 * math.pi / m
        half = 0.95 * sigma
        sets, fams = [], [[], []]
        for j in range(m):
            center = j * sigma
            d = np.abs((angles - center + math.pi) % (2 * math.pi) - math.pi)
            members = [int(p) for p in np.nonzero(d <= half - 1e-12)[0]]
            fams[j % 2].append(len(sets))
            sets.append(members)
        return ColoredCover(space, sets, fams, Entourage.diagonal(space),
                            require_covering=True, canonicalize=False)

    def lebesgue(k: int) -> float:
        # every angle lies within sigma/2 of a center whose arc reaches
        # 0.45 sigma beyond it; convert that angular margin to a chord
        sigma = 2 * math.pi / arc_count(k)
        return 0.98 * chord(0.45 * sigma)

    return build, lebesgue


class TestDimCover:
    def test_point_corona_bands(self):
        pt = Space.cloud(np.zeros((1, 2)))

        def build(k):
            return ColoredCover(pt, [[0]], [[0]], Entourage.diagonal(pt),
                                canonicalize=False)

        sched = CoronaCoverSchedule(pt, 1, build, lambda k: 1.0)
        depth = 60
        levels = Space.line(0, depth + 10, 1.0)
        shift = Entourage.from_pairs(levels, [(i, i + 1) for i in range(depth + 10)])
        deltas = [1.0 / (m + 1) for m in range(depth + 11)]
        cov, cert, info = corona_dim_cover(sched, deltas, shift, depth)
        assert multiplicity(cov) <= 2
        assert cov.uncovered_points() == []
        assert all(g["pass"] for g in cert)

    def test_circle_corona_depth_200(self):
        space = circle_space(720)
        build, leb = arc_cover_builder(space)
        sched = CoronaCoverSchedule(space, 2, build, leb)
        depth = 200
        levels = Space.line(0, depth + 10, 1.0)
        shift = Entourage.from_pairs(levels, [(i, i + 1) for i in range(depth + 10)])
        deltas = [4.0 / (m + 1) ** 1.5 for m in range(depth + 11)]
        cov, cert, info = corona_dim_cover(sched, deltas, shift, depth)
        assert multiplicity(cov) <= 3
        assert cov.uncovered_points() == []
        assert all(g["pass"] for g in cert)
        d = info["d_sequence"]
        assert all(d[i] >= d[i + 1] - 1e-12 for i in range(len(d) - 1))
        assert d[-1] < d[0]
