import xml.etree.ElementTree as ET

from rosa.config import DEFAULT_COLORS, RenderOptions
from rosa.geometry import Tile
from rosa.patch import LiftedPatch
from rosa.render import SVG_NS, render_svg, write_svg
from rosa.substitution import star_pattern


class TestRenderSvg:
    """Test SVG rendering of lifted patches"""

    def setup_method(self):
        """Set up test fixtures"""
        self.star = star_pattern(4)

    def _polygons(self, svg):
        root = ET.fromstring(svg)
        return root.findall(f".//{{{SVG_NS}}}polygon")

    def test_one_polygon_per_tile(self):
        """Test every tile becomes one polygon"""
        svg = render_svg(self.star)
        assert svg.startswith("<?xml")
        assert len(self._polygons(svg)) == 8

    def test_star_has_one_angle_class(self):
        """Test the n=4 star tiles (0,1) and (0,3) share class 1"""
        fills = {p.get("fill") for p in self._polygons(render_svg(self.star))}
        assert fills == {DEFAULT_COLORS[1]}

    def test_fill_by_angle_class(self):
        """Test tiles of different classes get different fills"""
        patch = LiftedPatch.from_tiles(4, [Tile((0, 0, 0, 0), (0, 1)), Tile((0, 0, 0, 0), (0, 2)),
                                           Tile((0, 0, 0, 0), (1, 2))])
        fills = [p.get("fill") for p in self._polygons(render_svg(patch))]
        assert fills == [DEFAULT_COLORS[1], DEFAULT_COLORS[2], DEFAULT_COLORS[1]]

    def test_custom_options(self):
        """Test custom colours replace the palette"""
        options = RenderOptions(scale=5, colors={1: "#000000", 2: "#111111"})
        svg = render_svg(self.star, options)
        assert {p.get("fill") for p in self._polygons(svg)} == {"#000000"}

    def test_empty_patch(self):
        """Test an empty patch renders no polygons"""
        assert self._polygons(render_svg(LiftedPatch.empty(6))) == []

    def test_write(self, tmp_path):
        """Test writing the SVG to a file"""
        path = tmp_path / "star.svg"
        write_svg(self.star, path)
        assert len(self._polygons(path.read_text())) == 8
