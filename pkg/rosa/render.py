"""SVG output for lifted patches."""

import logging
import xml.etree.ElementTree as ET
from pathlib import Path
from typing import Optional

import numpy as np

from .config import RenderOptions
from .geometry import angle_class
from .patch import LiftedPatch

logger = logging.getLogger(__name__)

SVG_NS = "http://www.w3.org/2000/svg"


def render_svg(patch: LiftedPatch, options: Optional[RenderOptions] = None) -> str:
    """One filled polygon per tile, coloured by angle class min(j - i, n - j + i)."""
    options = options or RenderOptions()
    ET.register_namespace("", SVG_NS)

    corners = patch.plane_vertices() * options.scale
    corners[..., 1] *= -1
    if len(patch):
        low = corners.reshape(-1, 2).min(axis=0)
        high = corners.reshape(-1, 2).max(axis=0)
    else:
        low, high = np.zeros(2), np.ones(2)
    pad = options.scale * 0.5
    width, height = high - low + 2 * pad

    root = ET.Element("svg", {
        "xmlns": SVG_NS,
        "version": "1.1",
        "viewBox": f"{low[0] - pad:.3f} {low[1] - pad:.3f} {width:.3f} {height:.3f}",
        "width": f"{width:.0f}",
        "height": f"{height:.0f}",
    })
    group = ET.SubElement(root, "g", {
        "stroke": options.stroke,
        "stroke-width": f"{options.stroke_width * options.scale:.3f}",
        "stroke-linejoin": "round",
    })
    classes = [angle_class(patch.n, (int(i), int(j))) for i, j in patch.types]
    for quad, angle in zip(corners, classes):
        ET.SubElement(group, "polygon", {
            "points": " ".join(f"{x:.3f},{y:.3f}" for x, y in quad),
            "fill": options.color_for(int(angle)),
        })
    return ET.tostring(root, encoding="unicode", xml_declaration=True)


def write_svg(patch: LiftedPatch, path: Path, options: Optional[RenderOptions] = None) -> None:
    """Render patch and write the SVG text to path."""
    Path(path).write_text(render_svg(patch, options))
    logger.info(f"Rendered {len(patch)} tiles to {path}")
