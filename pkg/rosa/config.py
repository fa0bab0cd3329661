"""
Run configuration for rosa.

Defaults live in module-level constants; a RunConfig is built from them,
optionally overridden by a key=value config file and then by CLI flags.
The process environment is never consulted.
"""

import logging
from pathlib import Path
from typing import Any, Dict, Optional

from dotenv import dotenv_values
from pydantic import BaseModel, Field, field_validator

from .errors import InvalidParameter

logger = logging.getLogger(__name__)

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'

# Numeric tolerances
TOLERANCES = {
    'float': 1e-9,
    'classify': 1e-6,
    'growth': 0.05,
    'area': 1e-9,
}

# Interval refinement for exact comparisons (bits)
PRECISION = {
    'start_bits': 64,
    'max_bits': 4096,
}

# Resource caps
LIMITS = {
    'max_i': 500,
    'max_iterations': 5,
    'max_tiles': 2_000_000,
    'node_limit': 200_000,
}

# Fill colours keyed by angle class
DEFAULT_COLORS = {
    1: '#e8b04a',
    2: '#5b8fb9',
    3: '#b5485d',
    4: '#6aa56e',
    5: '#8a6bb8',
    6: '#d9825b',
    7: '#4a9ea0',
    8: '#c9c16a',
    9: '#7d7d7d',
    10: '#a35f8f',
    11: '#5f7fa3',
}


def configure_logging(level: str = "WARNING") -> None:
    """Send rosa logs to stderr in the standard format."""
    logging.basicConfig(level=getattr(logging, level.upper(), logging.WARNING), format=LOG_FORMAT)


def check_n(n: int) -> int:
    """Validate the symmetry parameter: even and at least 4."""
    if not isinstance(n, int) or isinstance(n, bool) or n < 4 or n % 2:
        raise InvalidParameter(f"n must be an even integer >= 4, got {n!r}", {"n": n})
    return n


class RenderOptions(BaseModel):
    """SVG rendering options."""
    scale: float = Field(default=20.0, gt=0)
    stroke: str = '#222222'
    stroke_width: float = Field(default=0.04, ge=0)
    colors: Dict[int, str] = Field(default_factory=lambda: dict(DEFAULT_COLORS))

    def color_for(self, angle_class: int) -> str:
        return self.colors.get(angle_class, '#cccccc')


class RunConfig(BaseModel):
    """Configuration shared by every CLI subcommand."""
    n: int = 4
    float_tol: float = Field(default=TOLERANCES['float'], gt=0)
    classify_tol: float = Field(default=TOLERANCES['classify'], gt=0)
    growth_tol: float = Field(default=TOLERANCES['growth'], gt=0)
    max_precision_bits: int = Field(default=PRECISION['max_bits'], gt=0)
    max_i: int = Field(default=LIMITS['max_i'], gt=0)
    max_iterations: int = Field(default=LIMITS['max_iterations'], gt=0)
    max_tiles: int = Field(default=LIMITS['max_tiles'], gt=0)
    node_limit: int = Field(default=LIMITS['node_limit'], gt=0)
    cache_dir: Optional[Path] = None
    out: Optional[Path] = None
    progress: bool = False
    render: RenderOptions = Field(default_factory=RenderOptions)

    @field_validator('n')
    @classmethod
    def validate_n(cls, value: int) -> int:
        if value < 4 or value % 2:
            raise ValueError(f"n must be an even integer >= 4, got {value}")
        return value


def _parse_colors(text: str) -> Dict[int, str]:
    colors = {}
    for item in text.split(','):
        item = item.strip()
        if not item:
            continue
        key, _, value = item.partition(':')
        if not key.strip().isdigit() or not value.strip():
            raise InvalidParameter(f"bad render_colors entry {item!r}, expected class:colour")
        colors[int(key)] = value.strip()
    return colors


def load_config(path: Optional[Path] = None, overrides: Optional[Dict[str, Any]] = None) -> RunConfig:
    """
    Build a RunConfig.

    This function:
    1. Starts from the module defaults
    2. Applies key=value pairs from the config file, if given
    3. Applies explicit overrides (CLI flags), skipping None values
    """
    values: Dict[str, Any] = {}
    render: Dict[str, Any] = {}

    if path is not None:
        try:
            raw = dotenv_values(path)
        except Exception as e:
            logger.error(f"Failed to read config file {path}: {e}")
            raise InvalidParameter(f"cannot read config file {path}: {e}", {"path": str(path)})
        for key, value in raw.items():
            key = key.strip().lower()
            if value is None:
                continue
            if key == 'render_colors':
                render['colors'] = _parse_colors(value)
            elif key.startswith('render_'):
                render[key[len('render_'):]] = value
            else:
                values[key] = value

    for key, value in (overrides or {}).items():
        if value is not None:
            values[key] = value

    try:
        if render:
            values['render'] = RenderOptions(**render)
        return RunConfig(**values)
    except ValueError as e:
        logger.error(f"Invalid configuration: {e}")
        raise InvalidParameter(f"invalid configuration: {e}", {"values": {k: str(v) for k, v in values.items()}})
