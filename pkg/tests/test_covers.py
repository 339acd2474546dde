import math
from itertools import combinations

import numpy as np
import pytest

from coarselab.covers import (Cover, appetite_witness, cover_entourage, has_appetite,
                              lebesgue_number, mesh, multiplicity, stats)
from coarselab.errors import InvalidInputError
from coarselab.spaces import Entourage, Space
from coarselab.witnesses import cube_cover


def brute_multiplicity(cover):
    """Oracle: max size of a subfamily of distinct sets with a common point."""
    distinct = sorted(set(cover.sets))
    best = 0
    for k in range(1, min(len(distinct), 10) + 1):
        for combo in combinations(range(len(distinct)), k):
            common = set(distinct[combo[0]])
            for i in combo[1:]:
                common &= set(distinct[i])
            if common:
                best = max(best, k)
    return best


class TestMultiplicity:
    def test_singleton_partition(self):
        sp = Space.line(0, 9, 1.0)
        c = Cover(sp, [[i] for i in range(10)])
        assert multiplicity(c) == 1

    def test_cube_cover_on_plane_is_three(self):
        grid = Space.grid(2, [0, 0], [20, 20], 0.5)
        cov, _ = cube_cover(grid, 2, 6.0)
        assert multiplicity(cov) == 3

    def test_matches_brute_force_oracle(self):
        rng = np.random.default_rng(11)
        sp = Space.line(0, 49, 1.0)
        for _ in range(5):
            sets = []
            for _ in range(rng.integers(3, 9)):
                size = rng.integers(1, 20)
                sets.append(sorted(set(int(x) for x in rng.integers(0, 50, size))))
            sets.append(list(range(50)))  # keep it covering
            c = Cover(sp, sets)
            assert multiplicity(c) == brute_multiplicity(c)

    def test_duplicate_sets_count_once(self):
        sp = Space.line(0, 3, 1.0)
        c = Cover(sp, [[0, 1, 2, 3], [0, 1, 2, 3], [2, 3]])
        assert multiplicity(c) == 2


class TestMesh:
    def test_singletons_have_zero_mesh(self):
        sp = Space.line(0, 9, 1.0)
        assert mesh(Cover(sp, [[i] for i in range(10)])) == 0.0

    def test_cube_cover_mesh_is_diagonal(self):
        grid = Space.grid(2, [0, 0], [20, 20], 0.5)
        cov, _ = cube_cover(grid, 2, 6.0)
        assert mesh(cov) <= 6 * math.sqrt(2) + 0.5 + 1e-9

    def test_mesh_equals_smallest_radius_bound(self):
        sp = Space.line(0, 9, 1.0)
        c = Cover(sp, [[0, 1, 2], [2, 3, 4, 5, 6, 7, 8, 9]])
        m = mesh(c)
        ce = cover_entourage(c)
        assert ce.is_subset_of(Entourage.radius(sp, m, closed=True))
        assert not ce.is_subset_of(Entourage.radius(sp, m * 0.99))


class TestLebesgue:
    def test_whole_space_gives_infinity(self):
        sp = Space.line(0, 9, 1.0)
        assert lebesgue_number(Cover(sp, [list(range(10))])) == math.inf

    def test_cube_cover_bound(self):
        grid = Space.grid(2, [0, 0], [20, 20], 0.5)
        cov, _ = cube_cover(grid, 2, 6.0)
        assert lebesgue_number(cov) >= 6 / (2 * 3) - 1e-9

    def test_lebesgue_implies_appetite(self):
        sp = Space.line(0, 20, 0.5)
        c = Cover(sp, [list(range(0, 25)), list(range(18, 41))])
        L = lebesgue_number(c)
        assert has_appetite(c, Entourage.radius(sp, L))


class TestAppetite:
    def test_diagonal_appetite_is_covering(self):
        sp = Space.line(0, 9, 1.0)
        c = Cover(sp, [[i, (i + 1) % 10] for i in range(10)])
        assert has_appetite(c, Entourage.diagonal(sp))

    def test_singletons_fail_radius_appetite(self):
        sp = Space.line(0, 9, 1.0)
        c = Cover(sp, [[i] for i in range(10)])
        assert not has_appetite(c, Entourage.radius(sp, 1.5))
        assert appetite_witness(c, Entourage.radius(sp, 1.5)) is not None

    def test_cube_cover_has_unit_appetite(self):
        grid = Space.grid(2, [0, 0], [20, 20], 0.5)
        cov, _ = cube_cover(grid, 2, 6.0)
        assert has_appetite(cov, Entourage.radius(grid, 1.0))


class TestCoverEntourage:
    def test_singleton_cover_gives_diagonal(self):
        sp = Space.line(0, 9, 1.0)
        c = Cover(sp, [[i] for i in range(10)])
        ce = cover_entourage(c)
        assert np.array_equal(ce.keys(), Entourage.diagonal(sp).keys())

    def test_single_set_gives_square(self):
        sp = Space.line(0, 4, 1.0)
        c = Cover(sp, [[0, 1, 2, 3, 4]])
        assert cover_entourage(c).pair_count() == 25

    def test_cube_cover_entourage_inside_mesh_ball(self):
        grid = Space.grid(2, [0, 0], [12, 12], 0.5)
        cov, _ = cube_cover(grid, 2, 6.0)
        ce = cover_entourage(cov)
        assert ce.is_subset_of(Entourage.radius(grid, 6 * math.sqrt(2) + 0.01))


class TestCoverValidation:
    def test_non_covering_rejected(self):
        sp = Space.line(0, 9, 1.0)
        with pytest.raises(InvalidInputError):
            Cover(sp, [[0, 1, 2]])

    def test_family_overlap_rejected(self):
        sp = Space.line(0, 3, 1.0)
        with pytest.raises(InvalidInputError):
            Cover(sp, [[0, 1], [1, 2, 3]], families=[[0, 1]])

    def test_families_bound_multiplicity(self):
        sp = Space.line(0, 9, 1.0)
        sets = [[0, 1, 2, 3, 4], [6, 7, 8, 9], [3, 4, 5, 6]]
        c = Cover(sp, sets, families=[[0, 1], [2]])
        assert multiplicity(c) <= 2

    def test_stats_shape(self):
        sp = Space.line(0, 9, 1.0)
        c = Cover(sp, [[i] for i in range(10)])
        out = stats(c, Entourage.diagonal(sp))
        assert out["multiplicity"] == 1 and out["appetite"] is True
