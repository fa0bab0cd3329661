import pytest

from rosa.edgeword import Edgeword, billiard_prefix
from rosa.errors import InvalidParameter, PatchTooLarge
from rosa.multigrid import cone_check, dual_patch, halfline_word
from rosa.substitution import edge_audit, tile_types


class TestHalflineWord:
    """Test half-line words"""

    def test_n4(self):
        """Test the n=4 half-line word"""
        assert str(halfline_word(4, 7)) == "0202002"

    @pytest.mark.parametrize("n", [4, 6, 8, 10])
    def test_matches_the_billiard_word(self, n):
        """Test matches the billiard word"""
        assert halfline_word(n, 60) == billiard_prefix(n, 60)

    @pytest.mark.parametrize("n", [4, 6, 8, 10])
    def test_long_prefix_matches_the_billiard_word(self, n):
        """Test long prefix matches the billiard word"""
        assert halfline_word(n, 500) == billiard_prefix(n, 500)

    def test_empty(self):
        """Test the empty half-line word"""
        assert len(halfline_word(6, 0)) == 0

    def test_negative_length(self):
        """Test negative length"""
        with pytest.raises(InvalidParameter):
            halfline_word(4, -1)


class TestDualPatch:
    """Test multigrid dual patches"""

    def setup_method(self):
        """Set up test fixtures"""
        self.patch = dual_patch(4, 5.3)

    def test_every_type_appears(self):
        """Test every type appears"""
        assert set(self.patch.type_counts()) == set(tile_types(4))

    def test_rotation_invariant(self):
        """Test rotation invariant"""
        assert self.patch.rotate(1) == self.patch

    def test_edge_to_edge(self):
        """Test edge to edge"""
        assert edge_audit(self.patch)

    def test_meta(self):
        """Test the patch metadata"""
        assert self.patch.meta == {"seed": "multigrid", "radius": 5.3}

    def test_radius_must_be_positive(self):
        """Test radius must be positive"""
        with pytest.raises(InvalidParameter):
            dual_patch(4, 0)

    def test_too_large(self):
        """Test too large"""
        with pytest.raises(PatchTooLarge):
            dual_patch(8, 50, max_tiles=100)


class TestCone:
    """Test the cone check"""

    @pytest.mark.parametrize("n", [4, 6])
    def test_word_on_both_cone_sides(self, n):
        """Test word on both cone sides"""
        patch = dual_patch(n, 30)
        assert cone_check(patch, billiard_prefix(n, 40))

    def test_wrong_word_is_rejected(self):
        """Test wrong word is rejected"""
        patch = dual_patch(4, 30)
        word = billiard_prefix(4, 40)
        wrong = Edgeword(4, (2,) + word.letters[1:])
        assert not cone_check(patch, wrong)
