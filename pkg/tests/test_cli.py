import json

import pytest
from click.testing import CliRunner

from rosa.cli import cli
from rosa.edgeword import subrosa_edgeword
from rosa.patch import LiftedPatch
from rosa.substitution import apply, build_substitution, star_pattern


def _error(result):
    lines = [line for line in result.stderr.splitlines() if line.strip()]
    return json.loads(lines[-1])


class TestEdgewordCommand:
    """Test the edgeword subcommand"""

    def setup_method(self):
        """Set up test fixtures"""
        self.runner = CliRunner()

    def test_subrosa(self):
        """Test the Sub Rosa word for n=4"""
        result = self.runner.invoke(cli, ["edgeword", "--n", "4"])
        assert result.exit_code == 0
        assert result.stdout.strip() == "020020"

    def test_candidate_json(self):
        """Test a candidate printed as a JSON array"""
        result = self.runner.invoke(cli, ["edgeword", "--n", "4", "--kind", "candidate", "--i", "5", "--json"])
        assert json.loads(result.stdout) == [0, 2, 0, 2, 0, 0, 2, 0, 2, 0]

    def test_billiard_length(self):
        """Test a billiard prefix of a given length"""
        result = self.runner.invoke(cli, ["edgeword", "--n", "4", "--kind", "billiard", "--length", "7"])
        assert result.exit_code == 0
        assert result.stdout.strip() == "0202002"

    def test_billiard_index_still_accepted(self):
        """Test --i still sets the billiard length"""
        result = self.runner.invoke(cli, ["edgeword", "--n", "6", "--kind", "billiard", "--i", "6"])
        assert result.stdout.strip() == "024020"

    def test_length_required(self):
        """Test a billiard word needs a length"""
        result = self.runner.invoke(cli, ["edgeword", "--kind", "billiard"])
        assert result.exit_code == 2

    def test_index_required(self):
        """Test a candidate word needs an index"""
        result = self.runner.invoke(cli, ["edgeword", "--kind", "candidate", "--length", "6"])
        assert result.exit_code == 2

    def test_odd_n_is_a_domain_error(self):
        """Test odd n exits with a JSON error"""
        result = self.runner.invoke(cli, ["edgeword", "--n", "5"])
        assert result.exit_code == 1
        assert _error(result)["error"] == "invalid_parameter"

    def test_config_file(self, tmp_path):
        """Test n read from a config file"""
        path = tmp_path / "rosa.env"
        path.write_text("n=6\n")
        result = self.runner.invoke(cli, ["--config", str(path), "edgeword"])
        assert result.stdout.strip() == "024020020420"

    def test_config_precision_reaches_billiard_words(self, tmp_path):
        """Test float_tol and max_precision_bits from the config govern crossing comparisons"""
        path = tmp_path / "rosa.env"
        path.write_text("float_tol=10\nmax_precision_bits=32\n")
        result = self.runner.invoke(cli, ["--config", str(path), "edgeword", "--n", "4", "--kind", "billiard",
                                          "--length", "5"])
        assert result.exit_code == 1
        assert _error(result)["error"] == "precision_exhausted"


class TestAnalysisCommands:
    """Test the spectrum, tileability, select, planarity and multigrid subcommands"""

    def setup_method(self):
        """Set up test fixtures"""
        self.runner = CliRunner()

    def test_spectrum(self):
        """Test the Sub Rosa n=4 spectrum"""
        result = self.runner.invoke(cli, ["spectrum", "--n", "4"])
        data = json.loads(result.stdout)
        assert data["classification"] == "NonPlanar"
        assert data["lambdas"][0] == pytest.approx(6.828427, abs=1e-6)

    def test_spectrum_tolerance(self):
        """Test a wide tolerance turns lambda_1 = 1.17 into an undecided plane"""
        result = self.runner.invoke(cli, ["spectrum", "--n", "4", "--tol", "0.5"])
        assert json.loads(result.stdout)["classification"] == "Indeterminate"

    def test_spectrum_of_given_word(self):
        """Test the spectrum of an explicit edgeword"""
        result = self.runner.invoke(cli, ["spectrum", "--n", "4", "--edgeword", "0202002020"])
        assert json.loads(result.stdout)["classification"] == "PlanarSlope0"

    def test_tileability_witness(self):
        """Test a failing word reports its witness"""
        result = self.runner.invoke(cli, ["tileability", "--n", "4", "0220"])
        data = json.loads(result.stdout)
        assert data["ok"] is False
        assert data["witness"] == [3, 0, 2]
        assert data["balance"] == 2
        assert set(data["corner"]) == {"1", "2", "3"}

    def test_tileability_precondition(self):
        """Test a word missing letters is a precondition failure"""
        result = self.runner.invoke(cli, ["tileability", "--n", "4", "0000"])
        assert result.exit_code == 1
        assert _error(result)["error"] == "precondition_failed"

    def test_tileability_frequency_order(self):
        """Test a word with more 2s than 0s is a precondition failure"""
        result = self.runner.invoke(cli, ["tileability", "--n", "4", "2220"])
        assert result.exit_code == 1
        assert _error(result)["error"] == "precondition_failed"

    def test_select(self):
        """Test selection of Planar Rosa n=4"""
        result = self.runner.invoke(cli, ["select", "--n", "4", "--max-i", "10"])
        data = json.loads(result.stdout)
        assert data["i"] == 5
        assert data["edgeword"] == "0202002020"

    def test_select_tolerance(self):
        """Test select passes its tolerance to the configuration"""
        result = self.runner.invoke(cli, ["select", "--n", "4", "--max-i", "10", "--tol", "1e-9"])
        assert json.loads(result.stdout)["i"] == 5
        result = self.runner.invoke(cli, ["select", "--n", "4", "--max-i", "10", "--tol", "0"])
        assert result.exit_code == 1
        assert "classify_tol" in _error(result)["details"]["values"]

    def test_select_not_found(self):
        """Test an exhausted search reports max_i"""
        result = self.runner.invoke(cli, ["select", "--n", "4", "--max-i", "3"])
        assert result.exit_code == 1
        assert _error(result)["details"]["max_i"] == 3

    def test_planarity(self):
        """Test a planarity report on a short profile"""
        result = self.runner.invoke(cli, ["planarity", "--n", "4", "--edgeword", "020020", "-k", "3",
                                          "--mode", "hull"])
        data = json.loads(result.stdout)
        assert len(data["rows"]) == 4
        assert data["verdict"]["heuristic"] is True
        assert data["verdict"]["verdict"] == "GrowthEvidence"

    def test_planarity_tolerance(self):
        """Test a large growth tolerance turns the verdict bounded"""
        result = self.runner.invoke(cli, ["planarity", "--n", "4", "--edgeword", "020020", "-k", "3",
                                          "--mode", "hull", "--tol", "5"])
        assert json.loads(result.stdout)["verdict"]["verdict"] == "BoundedEvidence"

    def test_multigrid_word(self):
        """Test the half-line word of the multigrid"""
        result = self.runner.invoke(cli, ["multigrid", "--n", "4", "--length", "7"])
        assert result.stdout.strip() == "0202002"


class TestPatchCommands:
    """Test the generate and render subcommands"""

    def setup_method(self):
        """Set up test fixtures"""
        self.runner = CliRunner()

    def test_generate(self):
        """Test one iteration on the star"""
        result = self.runner.invoke(cli, ["generate", "--n", "4", "--edgeword", "020020", "-k", "1"])
        assert result.exit_code == 0
        patch = LiftedPatch.from_json(json.loads(result.stdout))
        rule = build_substitution(4, subrosa_edgeword(4))
        assert patch == apply(rule, star_pattern(4))
        assert patch.meta["iterations"] == 1

    def test_generate_from_a_tile(self):
        """Test a single-tile seed"""
        result = self.runner.invoke(cli, ["generate", "--n", "4", "--rule", "subrosa", "--seed", "tile:0,1",
                                          "-k", "1"])
        patch = LiftedPatch.from_json(json.loads(result.stdout))
        assert patch.meta["seed"] == "tile:0,1"

    def test_generate_bad_seed(self):
        """Test an unknown seed name"""
        result = self.runner.invoke(cli, ["generate", "--n", "4", "--rule", "subrosa", "--seed", "disc"])
        assert result.exit_code == 1

    def test_generate_iteration_cap(self):
        """Test iterations beyond max_iterations are rejected"""
        result = self.runner.invoke(cli, ["generate", "--n", "4", "--rule", "subrosa", "-k", "9"])
        assert result.exit_code == 1
        assert _error(result)["error"] == "invalid_parameter"

    def test_generate_then_render(self, tmp_path):
        """Test rendering a generated patch file"""
        patch_file = tmp_path / "patch.json"
        svg_file = tmp_path / "patch.svg"
        result = self.runner.invoke(cli, ["generate", "--n", "4", "--rule", "subrosa", "-k", "1",
                                          "--out", str(patch_file)])
        assert result.exit_code == 0
        result = self.runner.invoke(cli, ["render", str(patch_file), "--out", str(svg_file)])
        assert result.exit_code == 0
        assert "<polygon" in svg_file.read_text()

    def test_render_in_option(self, tmp_path):
        """Test --in names the patch file"""
        patch_file = tmp_path / "star.json"
        patch_file.write_text(star_pattern(4).dumps())
        result = self.runner.invoke(cli, ["render", "--in", str(patch_file)])
        assert result.exit_code == 0
        assert result.stdout.count("<polygon") == 8

    def test_render_in_and_argument_conflict(self, tmp_path):
        """Test giving the patch twice is a usage error"""
        patch_file = tmp_path / "star.json"
        patch_file.write_text(star_pattern(4).dumps())
        result = self.runner.invoke(cli, ["render", str(patch_file), "--in", str(patch_file)])
        assert result.exit_code == 2

    def test_render_from_stdin(self):
        """Test reading the patch from stdin"""
        document = star_pattern(4).dumps()
        result = self.runner.invoke(cli, ["render"], input=document)
        assert result.stdout.count("<polygon") == 8

    def test_render_rejects_garbage(self):
        """Test non-JSON input"""
        result = self.runner.invoke(cli, ["render"], input="not json")
        assert result.exit_code == 1
