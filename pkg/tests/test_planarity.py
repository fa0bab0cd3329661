import math
from functools import lru_cache

import pytest

from rosa.edgeword import subrosa_edgeword
from rosa.errors import InsufficientData, InvalidParameter
from rosa.planarity import (
    BoundedEvidence,
    DeviationProfile,
    GrowthEvidence,
    ProfileRow,
    deviation_profile,
    fitted_rate,
    patch_deviation,
    planarity_verdict,
    profile_patches,
)
from rosa.spectral import subrosa_eigenvalue
from rosa.substitution import apply, build_substitution, select_planar_rosa, star_pattern


@lru_cache(maxsize=None)
def rule_for(n, kind):
    if kind == "subrosa":
        return build_substitution(n, subrosa_edgeword(n))
    return select_planar_rosa(n).rule


def _profile(values):
    return DeviationProfile(4, [ProfileRow(k, 1, v) for k, v in enumerate(values)])


def _affine_geometric(a, b, lam, count):
    return [b + a * lam ** k for k in range(count)]


class TestPatchDeviation:
    """Test deviation of single patches from the slope"""

    def test_star(self):
        """Test the n=4 star sits at distance 1/sqrt(2)"""
        deviation, components, count = patch_deviation(star_pattern(4))
        assert deviation == pytest.approx(1 / math.sqrt(2))
        assert components == [pytest.approx(1 / math.sqrt(2))]
        assert count == 17

    def test_rotation_invariant(self):
        """Test rotating a patch keeps its deviation"""
        patch = apply(rule_for(4, "subrosa"), star_pattern(4))
        assert patch_deviation(patch.rotate(1))[0] == pytest.approx(patch_deviation(patch)[0])


class TestFittedRate:
    """Test the growth factor fitted to the tail of a profile"""

    def test_pure_geometric(self):
        """Test a geometric sequence gives its ratio"""
        assert fitted_rate([1, 2, 4, 8]) == pytest.approx(2.0)

    def test_affine_geometric(self):
        """Test an offset geometric sequence gives its ratio, not its plain ratios"""
        values = _affine_geometric(2, 5, 1.5, 5)
        assert values == pytest.approx([7, 8, 9.5, 11.75, 15.125])
        assert fitted_rate(values) == pytest.approx(1.5)

    def test_saturating(self):
        """Test a sequence converging from below gives a rate under one"""
        values = _affine_geometric(-8, 9, 0.7, 6)
        assert fitted_rate(values) == pytest.approx(0.7)

    def test_decreasing_tail(self):
        """Test a falling last step gives zero"""
        assert fitted_rate([1, 3, 5, 4]) == 0.0

    def test_constant_increments_fall_back(self):
        """Test a flat start falls back to plain ratios"""
        assert fitted_rate([2, 2, 4]) == pytest.approx(math.sqrt(2))


class TestVerdict:
    """Test growth and bounded verdicts"""

    def test_geometric_growth(self):
        """Test doubling deviations read as growth with rate 2"""
        verdict = planarity_verdict(_profile([1, 2, 4, 8]))
        assert isinstance(verdict, GrowthEvidence)
        assert verdict.rate == pytest.approx(2.0)
        assert verdict.to_json()["heuristic"] is True

    def test_bounded(self):
        """Test slowing deviations read as bounded"""
        verdict = planarity_verdict(_profile([1.0, 1.2, 1.25, 1.26]))
        assert isinstance(verdict, BoundedEvidence)
        assert verdict.max_deviation == pytest.approx(1.26)

    def test_saturating_profile_is_bounded(self):
        """Test ratios above the tolerance still give bounded when the fit saturates"""
        profile = _profile(_affine_geometric(-8, 9, 0.7, 6))
        assert all(r > 1.05 for r in profile.ratios[-3:])
        verdict = planarity_verdict(profile)
        assert isinstance(verdict, BoundedEvidence)
        assert verdict.rate == pytest.approx(0.7)
        assert verdict.to_json()["rate"] == pytest.approx(0.7)

    def test_measured_planar_shape_is_bounded(self):
        """Test a profile shaped like an n=6 planar run reads as bounded"""
        verdict = planarity_verdict(_profile([0.87, 4.23, 6.19, 7.44, 8.39, 9.06]))
        assert isinstance(verdict, BoundedEvidence)
        assert verdict.rate < 1

    def test_offset_growth_reports_fitted_rate(self):
        """Test the reported rate is the fitted one"""
        verdict = planarity_verdict(_profile(_affine_geometric(2, 5, 1.5, 5)))
        assert isinstance(verdict, GrowthEvidence)
        assert verdict.rate == pytest.approx(1.5)

    def test_constant_profile(self):
        """Test a constant profile is bounded with rate zero"""
        verdict = planarity_verdict(_profile([2.0, 2.0, 2.0, 2.0]))
        assert isinstance(verdict, BoundedEvidence)
        assert verdict.rate == 0.0

    def test_too_short(self):
        """Test two iterations are not enough"""
        with pytest.raises(InsufficientData):
            planarity_verdict(_profile([1, 2]))

    def test_zero_start(self):
        """Test ratios after a zero deviation"""
        assert _profile([0, 0, 1]).ratios == [1.0, math.inf]

    def test_no_patches(self):
        """Test an empty patch sequence"""
        with pytest.raises(InsufficientData):
            profile_patches([])


class TestProfile:
    """Test deviation profiles of iterated substitutions"""

    def test_bad_mode(self):
        """Test an unknown mode is rejected"""
        with pytest.raises(InvalidParameter):
            deviation_profile(rule_for(4, "subrosa"), star_pattern(4), 2, mode="exact")

    def test_bad_depth(self):
        """Test a zero depth is rejected"""
        with pytest.raises(InvalidParameter):
            deviation_profile(rule_for(4, "subrosa"), star_pattern(4), 0)

    def test_hull_mode_matches_patch_mode(self):
        """Test hull propagation agrees with materialised patches"""
        rule = rule_for(4, "subrosa")
        exact = deviation_profile(rule, star_pattern(4), 2, mode="patch")
        hulls = deviation_profile(rule, star_pattern(4), 2, mode="hull")
        assert hulls.deviations == pytest.approx(exact.deviations, abs=1e-6)
        assert [row.mode for row in hulls.rows] == ["patch", "hull", "hull"]

    def test_matches_external_patches(self):
        """Test profiling given patches matches the built profile"""
        rule = rule_for(4, "subrosa")
        star = star_pattern(4)
        level1 = apply(rule, star)
        assert profile_patches([star, level1]).deviations == \
            pytest.approx(deviation_profile(rule, star, 1, mode="patch").deviations)

    def test_subrosa_n4_grows_like_its_first_eigenvalue(self):
        """Test Sub Rosa n=4 grows at a rate near lambda_1"""
        profile = deviation_profile(rule_for(4, "subrosa"), star_pattern(4), 5, mode="hull")
        verdict = planarity_verdict(profile)
        assert isinstance(verdict, GrowthEvidence)
        assert all(1.0 <= r <= 2.0 for r in verdict.ratios)
        assert verdict.rate == pytest.approx(subrosa_eigenvalue(4, 1), rel=0.25)
        assert len(profile.to_json()) == 6


@pytest.mark.slow
class TestLongProfiles:
    """Test long profiles of both families"""

    def test_subrosa_n6_grows_like_its_second_eigenvalue(self):
        """Test Sub Rosa n=6 grows at a rate near lambda_1"""
        profile = deviation_profile(rule_for(6, "subrosa"), star_pattern(6), 5, mode="hull")
        verdict = planarity_verdict(profile)
        assert isinstance(verdict, GrowthEvidence)
        assert verdict.rate == pytest.approx(subrosa_eigenvalue(6, 1), rel=0.25)

    def test_planar_rosa_n4_stays_bounded(self):
        """Test Planar Rosa n=4 stays near the slope"""
        profile = deviation_profile(rule_for(4, "planar"), star_pattern(4), 5)
        assert max(profile.deviations) <= 3 * profile.deviations[2]
        assert isinstance(planarity_verdict(profile), BoundedEvidence)
        assert profile.rows[-1].mode == "hull"

    def test_planar_rosa_n6_stays_bounded(self):
        """Test Planar Rosa n=6 stays near the slope while Sub Rosa n=6 does not"""
        planar = deviation_profile(rule_for(6, "planar"), star_pattern(6), 5, mode="hull")
        assert max(planar.deviations) <= 3 * planar.deviations[2]
        assert isinstance(planarity_verdict(planar), BoundedEvidence)
        subrosa = deviation_profile(rule_for(6, "subrosa"), star_pattern(6), 5, mode="hull")
        assert isinstance(planarity_verdict(subrosa), GrowthEvidence)
