"""
Command-line front end.

Results go to stdout (JSON unless stated otherwise); logs and errors go to
stderr. Domain errors exit with status 1 and a JSON error document.
"""

import json
import logging
import sys
from pathlib import Path
from typing import Any, Dict, Optional

import click

from .config import RunConfig, configure_logging, load_config
from .edgeword import Edgeword, balance_constant, billiard_prefix, candidate_edgeword, subrosa_edgeword
from .errors import InvalidParameter, PreconditionFailed, RosaError
from .kenyon import corner_crossing_check, tileability_criterion
from .multigrid import dual_patch, halfline_word
from .patch import LiftedPatch
from .planarity import deviation_profile, planarity_verdict
from .render import render_svg
from .spectral import spectrum
from .substitution import PatchCache, build_substitution, iterate, select_planar_rosa, single_tile, star_pattern

logger = logging.getLogger(__name__)


class RosaGroup(click.Group):
    """Turns RosaError into a JSON document on stderr and exit status 1."""

    def invoke(self, ctx: click.Context):
        try:
            return super().invoke(ctx)
        except RosaError as e:
            logger.error(f"{e.code}: {e.message}")
            click.echo(json.dumps(e.to_dict(), default=str), err=True)
            ctx.exit(1)


def _emit(data: Any, out: Optional[Path] = None) -> None:
    text = json.dumps(data, indent=2, default=str)
    if out:
        Path(out).write_text(text)
        logger.info(f"Wrote {out}")
    else:
        click.echo(text)


def _config(ctx: click.Context, **overrides) -> RunConfig:
    path = ctx.obj.get("config_path") if ctx.obj else None
    return load_config(path, overrides)


def _resolve_word(cfg: RunConfig, word: Optional[str], rule: str) -> Edgeword:
    if word:
        return Edgeword.parse(word, cfg.n)
    if rule == "subrosa":
        return subrosa_edgeword(cfg.n)
    return _select(cfg).edgeword


def _select(cfg: RunConfig):
    return select_planar_rosa(cfg.n, cfg.max_i, cfg.node_limit, cfg.classify_tol, cfg.progress,
                              cfg.max_precision_bits, cfg.float_tol)


def _seed(n: int, name: str) -> LiftedPatch:
    if name == "star":
        return star_pattern(n)
    if name.startswith("tile:"):
        try:
            i, j = (int(x) for x in name[len("tile:"):].split(","))
        except ValueError:
            raise InvalidParameter(f"bad seed {name!r}, expected tile:i,j")
        if not 0 <= i < j < n:
            raise InvalidParameter(f"seed tile type must satisfy 0 <= i < j < {n}")
        return single_tile(n, (i, j))
    raise InvalidParameter(f"unknown seed {name!r}; use 'star' or 'tile:i,j'")


n_option = click.option("--n", "n", type=int, default=None, help="Symmetry parameter (even, >= 4).")
word_option = click.option("--edgeword", "word", default=None, help='Edgeword such as "0202002020".')
rule_option = click.option("--rule", type=click.Choice(["subrosa", "planar"]), default="planar",
                           show_default=True, help="Edgeword source when --edgeword is not given.")


@click.group(cls=RosaGroup)
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False, path_type=Path),
              default=None, help="key=value configuration file.")
@click.option("--log-level", default="WARNING", show_default=True,
              type=click.Choice(["DEBUG", "INFO", "WARNING", "ERROR"], case_sensitive=False))
@click.pass_context
def cli(ctx: click.Context, config_path: Optional[Path], log_level: str):
    """Sub Rosa and Planar Rosa rhombus substitutions."""
    configure_logging(log_level)
    ctx.ensure_object(dict)
    ctx.obj["config_path"] = config_path


@cli.command()
@n_option
@click.option("--kind", type=click.Choice(["subrosa", "billiard", "candidate"]), default="subrosa",
              show_default=True)
@click.option("--i", "index", type=int, default=None, help="Candidate index i of P_i.")
@click.option("--length", type=int, default=None, help="Number of letters of a billiard word.")
@click.option("--json", "as_json", is_flag=True, help="Print a JSON integer array.")
@click.pass_context
def edgeword(ctx, n, kind, index, length, as_json):
    """Print a Sub Rosa, billiard or candidate edgeword."""
    cfg = _config(ctx, n=n)
    precision = (cfg.max_precision_bits, cfg.float_tol)
    if kind == "subrosa":
        word = subrosa_edgeword(cfg.n)
    elif kind == "billiard":
        # --i doubles as the length
        length = length if length is not None else index
        if length is None:
            raise click.UsageError("--length is required for billiard words")
        word = billiard_prefix(cfg.n, length, *precision)
    else:
        if index is None:
            raise click.UsageError("--i is required for candidate words")
        word = candidate_edgeword(cfg.n, index, *precision)
    click.echo(json.dumps(word.to_json()) if as_json else str(word))


@cli.command("spectrum")
@n_option
@word_option
@click.option("--rule", type=click.Choice(["subrosa", "planar"]), default="subrosa", show_default=True)
@click.option("--tol", type=float, default=None, help="Classification tolerance on |lambda|.")
@click.pass_context
def spectrum_command(ctx, n, word, rule, tol):
    """Eigenvalues of the expansion on every plane E_n^k."""
    cfg = _config(ctx, n=n, classify_tol=tol)
    u = _resolve_word(cfg, word, rule)
    _emit(spectrum(cfg.n, u).to_json(cfg.classify_tol))


@cli.command()
@n_option
@click.argument("word")
@click.pass_context
def tileability(ctx, n, word):
    """Counting-function tileability criterion and corner checks."""
    cfg = _config(ctx, n=n)
    u = Edgeword.parse(word, cfg.n)
    result = tileability_criterion(cfg.n, u).to_json()
    result["balance"] = balance_constant(u)
    try:
        result["corner"] = {k: corner_crossing_check(cfg.n, u, k) for k in range(1, cfg.n)}
    except PreconditionFailed:
        result["corner"] = None
    _emit(result)


@cli.command()
@n_option
@click.option("--max-i", type=int, default=None)
@click.option("--progress/--no-progress", default=None)
@click.option("--tol", type=float, default=None, help="Classification tolerance on |lambda|.")
@click.pass_context
def select(ctx, n, max_i, progress, tol):
    """Find the minimal Planar Rosa index i."""
    cfg = _config(ctx, n=n, max_i=max_i, progress=progress, classify_tol=tol)
    _emit(_select(cfg).to_json())


@cli.command()
@n_option
@word_option
@rule_option
@click.option("--seed", default="star", show_default=True, help="'star' or 'tile:i,j'.")
@click.option("--iterations", "-k", type=int, default=2, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False, path_type=Path), default=None)
@click.option("--max-tiles", type=int, default=None)
@click.option("--cache-dir", type=click.Path(file_okay=False, path_type=Path), default=None)
@click.pass_context
def generate(ctx, n, word, rule, seed, iterations, out, max_tiles, cache_dir):
    """Iterate a substitution and print the patch JSON."""
    cfg = _config(ctx, n=n, out=out, max_tiles=max_tiles, cache_dir=cache_dir)
    if iterations > cfg.max_iterations:
        raise InvalidParameter(f"iterations {iterations} exceed max_iterations={cfg.max_iterations}")
    u = _resolve_word(cfg, word, rule)
    substitution = build_substitution(cfg.n, u, node_limit=cfg.node_limit)
    cache = PatchCache(cfg.cache_dir) if cfg.cache_dir else None
    patch = iterate(substitution, _seed(cfg.n, seed), iterations, cfg.max_tiles, cache, cfg.progress)
    _emit(patch.to_json(), cfg.out)


@cli.command()
@n_option
@word_option
@rule_option
@click.option("--seed", default="star", show_default=True)
@click.option("--iterations", "-k", type=int, default=4, show_default=True)
@click.option("--mode", type=click.Choice(["auto", "patch", "hull"]), default="auto", show_default=True)
@click.option("--tol", type=float, default=None, help="Growth tolerance: ratios must exceed 1 + tol.")
@click.pass_context
def planarity(ctx, n, word, rule, seed, iterations, mode, tol):
    """Deviation profile from the slope E_n^0 and a growth verdict."""
    cfg = _config(ctx, n=n, growth_tol=tol)
    u = _resolve_word(cfg, word, rule)
    substitution = build_substitution(cfg.n, u, node_limit=cfg.node_limit)
    profile = deviation_profile(substitution, _seed(cfg.n, seed), iterations, mode, cfg.max_tiles, cfg.progress)
    report: Dict[str, Any] = {"edgeword": str(u), "rows": profile.to_json()}
    report["verdict"] = planarity_verdict(profile, cfg.growth_tol).to_json() if len(profile.rows) >= 3 else None
    _emit(report)


@cli.command()
@n_option
@click.option("--radius", type=float, default=6.0, show_default=True)
@click.option("--length", type=int, default=None, help="Print the half-line word of this length instead.")
@click.option("--out", type=click.Path(dir_okay=False, path_type=Path), default=None)
@click.pass_context
def multigrid(ctx, n, radius, length, out):
    """Dual tiling of the multigrid G_n(1/2)."""
    cfg = _config(ctx, n=n, out=out)
    if length is not None:
        click.echo(str(halfline_word(cfg.n, length, cfg.max_precision_bits, cfg.float_tol)))
        return
    _emit(dual_patch(cfg.n, radius, cfg.max_tiles).to_json(), cfg.out)


@cli.command()
@click.argument("patch_file", type=click.File("r"), required=False, default=None)
@click.option("--in", "in_file", type=click.File("r"), default=None, help="Patch JSON file; '-' for stdin.")
@click.option("--out", type=click.Path(dir_okay=False, path_type=Path), default=None)
@click.pass_context
def render(ctx, patch_file, in_file, out):
    """Render a patch JSON document as SVG."""
    cfg = _config(ctx)
    if patch_file is not None and in_file is not None:
        raise click.UsageError("give the patch either as an argument or with --in, not both")
    source = in_file or patch_file or click.get_text_stream("stdin")
    try:
        data = json.load(source)
    except ValueError as e:
        raise InvalidParameter(f"patch input is not JSON: {e}")
    svg = render_svg(LiftedPatch.from_json(data), cfg.render)
    if out:
        Path(out).write_text(svg)
        logger.info(f"Wrote {out}")
    else:
        click.echo(svg)


def main() -> None:
    cli(prog_name="rosa")


if __name__ == "__main__":
    sys.exit(main())
