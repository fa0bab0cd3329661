from itertools import product

import numpy as np
import pytest

from rosa.edgeword import Edgeword, balance_constant, frequency_ordered, subrosa_edgeword
from rosa.errors import InvalidParameter, LimitExceeded, NoMatching, PreconditionFailed
from rosa.geometry import Tile, direction_table
from rosa.kenyon import (
    BoundaryPolygon,
    EdgeOrigin,
    boundary_polygon,
    boundary_rhombi,
    brute_force_tile,
    build_matching,
    corner_crossing_check,
    polygon_area,
    tile_interior,
    tileability_criterion,
)


class TestBoundaryPolygon:
    """Test metatile boundaries"""

    def setup_method(self):
        """Set up test fixtures"""
        self.u = subrosa_edgeword(4)
        self.polygon = boundary_polygon(4, self.u, 1)

    def test_side_zero_reads_the_expansion(self):
        """Test side zero reads the expansion"""
        assert list(self.polygon.side_displacement(0)) == [4, 2, 0, -2]

    def test_sides_are_rotated_images(self):
        """Test sides are rotated images"""
        assert list(self.polygon.side_displacement(2)) == [-4, -2, 0, 2]

    def test_corner_angles(self):
        """Test corner angles"""
        assert self.polygon.corner_angles() == (1, 3, 1, 3)
        square = boundary_polygon(4, self.u, 2)
        assert square.corner_angles() == (2, 2, 2, 2)

    def test_nonzero_letters_emit_two_edges(self):
        """Test nonzero letters emit two edges"""
        polygon = boundary_polygon(6, subrosa_edgeword(6), 2)
        assert polygon.dirs[3:5] == (2, 10)
        assert np.allclose(direction_table(6)[2] + direction_table(6)[10], [1, 0])

    def test_boundary_rhombi(self):
        """Test boundary rhombi"""
        rhombi = boundary_rhombi(self.polygon)
        assert len(rhombi) == 8
        assert rhombi[0].tile.type == (1, 3)
        assert rhombi[0].origin == EdgeOrigin(0, 1, 2)

    def test_angle_class_range(self):
        """Test angle class range"""
        with pytest.raises(InvalidParameter):
            boundary_polygon(4, self.u, 3)

    def test_empty_word(self):
        """Test empty word"""
        with pytest.raises(PreconditionFailed):
            boundary_polygon(4, Edgeword(4, ()), 1)


class TestCriterion:
    """Test the tileability criterion"""

    def test_subrosa_passes(self):
        """Test Sub Rosa words pass"""
        assert tileability_criterion(4, Edgeword.parse("020020", 4)).ok
        assert tileability_criterion(6, subrosa_edgeword(6)).ok

    def test_witness(self):
        """Test a failing word reports position and letters"""
        result = tileability_criterion(4, Edgeword.parse("0220", 4))
        assert not result.ok
        assert result.witness == (3, 0, 2)
        assert result.to_json() == {"ok": False, "witness": [3, 0, 2]}

    def test_missing_letter(self):
        """Test missing letter"""
        with pytest.raises(PreconditionFailed):
            tileability_criterion(4, Edgeword.parse("0000", 4))

    def test_rare_letter_outnumbers_frequent_one(self):
        """Test rare letter outnumbers frequent one"""
        with pytest.raises(PreconditionFailed) as info:
            tileability_criterion(4, Edgeword.parse("2220", 4))
        assert info.value.details["counts"] == [1, 3]

    def test_unbalanced_word(self):
        """Test unbalanced word"""
        with pytest.raises(PreconditionFailed):
            tileability_criterion(4, Edgeword.parse("222000", 4))


class TestCornerCrossing:
    """Test corner crossing checks"""

    def test_subrosa_n6_every_corner(self):
        """Test subrosa n6 every corner"""
        u = subrosa_edgeword(6)
        assert all(corner_crossing_check(6, u, k) for k in range(1, 6))

    def test_word_must_start_with_02(self):
        """Test word must start with 02"""
        with pytest.raises(PreconditionFailed):
            corner_crossing_check(4, Edgeword.parse("2002", 4), 1)

    def test_angle_range(self):
        """Test angle range"""
        with pytest.raises(InvalidParameter):
            corner_crossing_check(4, subrosa_edgeword(4), 4)


class TestMatching:
    """Test Kenyon matchings"""

    def test_unit_square(self):
        """Test the unit square"""
        polygon = boundary_polygon(4, Edgeword.parse("0", 4), 2)
        matching = build_matching(polygon)
        assert matching.pairs() == [(0, 2), (1, 3)]

    def test_partners_are_opposite_edges(self):
        """Test partners are opposite edges"""
        polygon = boundary_polygon(4, subrosa_edgeword(4), 1)
        matching = build_matching(polygon)
        for a, b in matching.pairs():
            assert (polygon.dirs[a] - polygon.dirs[b]) % 8 == 4

    def test_unbalanced_type(self):
        """Test unbalanced type"""
        polygon = BoundaryPolygon(4, 1, Edgeword(4, (0,)), (0, 0, 4), (), (0, 1, 2, 3))
        with pytest.raises(NoMatching) as info:
            build_matching(polygon)
        assert info.value.prop == "K1"
        assert info.value.to_dict()["details"]["property"] == "K1"


class TestInteriorTiling:
    """Test chain peeling"""

    def test_unit_square_is_one_tile(self):
        """Test unit square is one tile"""
        polygon = boundary_polygon(4, Edgeword.parse("0", 4), 2)
        tiling = tile_interior(polygon, force_corners=False)
        assert tiling.tiles == (Tile((0, 0, 0, 0), (0, 2)),)

    @pytest.mark.parametrize("k", [1, 2])
    def test_subrosa_n4_metatiles(self, k):
        """Test subrosa n4 metatiles"""
        polygon = boundary_polygon(4, subrosa_edgeword(4), k)
        tiling = tile_interior(polygon)
        assert tiling.area() == pytest.approx(polygon_area(polygon))
        assert len(tiling.to_patch()) == len(tiling)

    @pytest.mark.parametrize("k", [1, 2, 3])
    def test_subrosa_n6_metatiles(self, k):
        """Test subrosa n6 metatiles"""
        polygon = boundary_polygon(6, subrosa_edgeword(6), k)
        tiling = tile_interior(polygon)
        assert tiling.area() == pytest.approx(polygon_area(polygon))

    def test_forced_corners_hold_narrow_rhombi(self):
        """Test forced corners hold narrow rhombi"""
        polygon = boundary_polygon(4, subrosa_edgeword(4), 1)
        tiling = tile_interior(polygon)
        assert Tile((0, 0, 0, 0), (0, 1)) in tiling.tiles


class TestBruteForce:
    """Test the backtracking search"""

    def test_unit_square(self):
        """Test unit square"""
        result = brute_force_tile(boundary_polygon(4, Edgeword.parse("0", 4), 2))
        assert result.tileable
        assert len(result.tiling) == 1

    def test_subrosa_narrow_metatile(self):
        """Test subrosa narrow metatile"""
        polygon = boundary_polygon(4, subrosa_edgeword(4), 1)
        result = brute_force_tile(polygon)
        assert result.tileable
        assert result.tiling.area() == pytest.approx(polygon_area(polygon))

    def test_node_limit(self):
        """Test node limit"""
        polygon = boundary_polygon(6, subrosa_edgeword(6), 3)
        with pytest.raises(LimitExceeded):
            brute_force_tile(polygon, node_limit=2)


def _eligible_palindromes(n, max_length):
    letters = range(0, n - 1, 2)
    for length in range(2, max_length + 1):
        half = (length + 1) // 2
        for head in product(letters, repeat=half):
            word = head + tuple(reversed(head[:length // 2]))
            u = Edgeword(n, word)
            if not set(letters) <= set(word) or not frequency_ordered(u):
                continue
            if balance_constant(u) > 2:
                continue
            yield u


@pytest.mark.slow
class TestCriterionAgainstSearch:
    """Test the criterion against exhaustive search"""

    @pytest.mark.parametrize("n,max_length", [(4, 10), (6, 8)])
    def test_criterion_matches_exhaustive_search(self, n, max_length):
        """Test criterion matches exhaustive search"""
        checked = 0
        for u in _eligible_palindromes(n, max_length):
            try:
                tileable = all(brute_force_tile(boundary_polygon(n, u, k), node_limit=50_000).tileable
                               for k in range(1, n // 2 + 1))
            except LimitExceeded:
                continue
            assert tileability_criterion(n, u).ok == tileable, str(u)
            checked += 1
        assert checked > 0
