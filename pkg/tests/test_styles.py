"""Registry defaults, additive composition, cell catalog, metrics."""
from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from diagrid import units
from diagrid.styles import (
    FillSpec,
    Metrics,
    StyleError,
    builtin_catalog,
    load_metrics,
)

PT = units.SP_PER_PT
MM = units.SP_PER_MM
CM = units.SP_PER_CM


# The full default table, sp-exact.
DEFAULTS = {
    "grid": CM,
    "range": 1,
    "Diagrampad": 5 * PT,
    "Figurepad": 0,
    "Graphpad": 0,
    "vpad": 0,
    "hpad": 0,
    "gridgray": Fraction(1, 2),
    "framegray": Fraction(0),
    "shadegray": Fraction(0),
    "graygray": Fraction(1, 2),
    "framepad": 5 * PT,
    "framerulewidth": 26214,      # .4pt
    "Framerulewidth": 26214,
    "Rulewidth": 5 * PT,
    "celllength": CM,
    "cellwidth": CM,
    "columndist": 15 * MM,
    "bracewidth": CM,
    "MinimumCellLength": 0,
    "labelpoint": Fraction(1, 2),
    "ptpoint": Fraction(1, 2),
    "labelwidthpad": 5 * PT,
    "labelpad": 3 * PT,
    "breakpad": 163840,           # 2.5pt
    "cellpush": 2 * PT,
    "ptpush": 0,
    "atpush": 3 * PT,
    "joinpush": -PT,
}


class TestDefaults:
    def test_table(self):
        reg = builtin_catalog()
        for name, want in DEFAULTS.items():
            assert reg.resolve(name) == want, name

    def test_grid_inheritance(self):
        reg = builtin_catalog()
        assert reg.resolve("xgrid") == CM
        assert reg.resolve("ygrid") == CM
        reg.set_param("grid", None, "0sp")
        assert reg.resolve("xgrid") == 0
        reg.set_param("xgrid", None, "3pt")
        assert reg.resolve("xgrid") == 3 * PT
        assert reg.resolve("ygrid") == 0

    def test_per_cell_pad_families(self):
        reg = builtin_catalog()
        for cell in ("Two", "Impl", "Bar", "Null", "Eq"):
            for param in ("labelpad", "atpush", "breakpad"):
                base = DEFAULTS[param]
                assert reg.effective(param, cell) == base + 52428, (param, cell)
        for param in ("cellpush", "ptpush", "joinpush"):
            assert reg.effective(param, "Rule") == DEFAULTS[param] + PT

    def test_spec_worked_examples(self):
        reg = builtin_catalog()
        assert reg.effective("labelpad", "Two") == 3 * PT + 52428
        assert reg.effective("cellpush", "To") == 2 * PT
        assert reg.effective("joinpush", "Rule") == 0


class TestSetParam:
    def test_relative_length(self):
        reg = builtin_catalog()
        reg.set_param("ygrid", None, "-2mm", "relative")
        assert reg.resolve("ygrid") == CM - 2 * MM

    def test_absolute_fraction(self):
        reg = builtin_catalog()
        reg.set_param("labelpoint", None, ".5")
        assert reg.resolve("labelpoint") == Fraction(1, 2)

    def test_unknown_parameter(self):
        with pytest.raises(StyleError):
            builtin_catalog().set_param("nosuch", None, "1pt")

    def test_malformed_length(self):
        with pytest.raises(units.UnitError):
            builtin_catalog().set_param("grid", None, "3furlongs")

    def test_gray_out_of_range_ignored(self):
        reg = builtin_catalog()
        reg.set_param("gridgray", None, "2")
        assert reg.resolve("gridgray") == Fraction(1, 2)
        reg.set_param("gridgray", None, ".25")
        assert reg.resolve("gridgray") == Fraction(1, 4)

    def test_fraction_override_per_cell(self):
        reg = builtin_catalog()
        reg.set_param("labelpoint", "To", ".3")
        assert reg.effective("labelpoint", "To") == Fraction(3, 10)
        assert reg.effective("labelpoint", "One") == Fraction(1, 2)
        reg.set_param("labelpoint", "To", "")
        assert reg.effective("labelpoint", "To") == Fraction(1, 2)

    @given(st.integers(-(10**6), 10**6), st.integers(-(10**6), 10**6))
    def test_additivity(self, g, p):
        reg = builtin_catalog()
        reg.set_param("labelpad", None, g)
        reg.set_param("labelpad", "To", p)
        assert reg.effective("labelpad", "To") == g + p


class TestRegisterCell:
    def test_new_cell_gets_directional_forms(self):
        reg = builtin_catalog()
        reg.register_cell("Onto", FillSpec("none", "single-line", "double-arrowhead"))
        assert reg.cell("Onto").fill.head == "double-arrowhead"
        assert reg.effective("labelpad", "Onto") == 3 * PT

    def test_duplicate_rejected_without_mutation(self):
        reg = builtin_catalog()
        before = reg.cell("To")
        with pytest.raises(StyleError):
            reg.register_cell("To", FillSpec())
        assert reg.cell("To") is before

    def test_unknown_glyph_rejected(self):
        with pytest.raises(StyleError):
            FillSpec("sparkle", "single-line", "none")


class TestMetrics:
    def test_empty(self):
        assert Metrics().measure("", "vertexstyle") == (0, 0, 0)

    def test_vertex_two_chars(self):
        assert Metrics().measure("AB", "vertexstyle") == (655360, 458752, 131072)

    def test_label_single_char_truncation(self):
        assert Metrics().measure("f", "labelstyle") == (229376, 321126, 91750)

    def test_metrics_file(self, tmp_path):
        path = tmp_path / "m.txt"
        path.write_text("# comment\nem labelstyle 10\n")
        metrics = load_metrics(str(path))
        assert metrics.measure("f", "labelstyle")[0] == 5 * PT
        assert metrics.measure("A", "vertexstyle")[0] == 5 * PT

    def test_metrics_file_rejects_garbage(self, tmp_path):
        path = tmp_path / "m.txt"
        path.write_text("em labelstyle\n")
        with pytest.raises(StyleError):
            load_metrics(str(path))


def test_unit_factors():
    assert units.parse_length("1pt") == 65536
    assert units.parse_length("1mm") == 186467
    assert units.parse_length("1cm") == 1864679
    assert units.parse_length("-2mm") == -372934
    assert units.parse_length("2.5pt") == 163840
    assert units.parse_length("0.8pt") == 52428
    assert units.parse_length("42sp") == 42
    with pytest.raises(units.UnitError):
        units.parse_length("12")
    with pytest.raises(units.UnitError):
        units.parse_length("1.5sp")
