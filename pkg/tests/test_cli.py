"""CLI: subcommands, exit codes, presets, flag layering."""
from __future__ import annotations

import json
import os

from diagrid.cli import main

SQUARE = "AB & \\rTo^{f} & CD \\\\\n\\dTo & & \\dTo \\\\\nEF & \\rTo & GH"


def write(tmp_path, name, content):
    path = tmp_path / name
    path.write_text(content, encoding="utf-8")
    return str(path)


class TestCompile:
    def test_svg_to_file(self, tmp_path, capsys):
        src = write(tmp_path, "sq.kd", SQUARE)
        out = str(tmp_path / "sq.svg")
        assert main(["compile", src, "-o", out]) == 0
        assert open(out).read().startswith("<?xml")

    def test_stdout_default(self, tmp_path, capsys):
        src = write(tmp_path, "sq.kd", SQUARE)
        assert main(["compile", src, "--no-cache"]) == 0
        assert capsys.readouterr().out.startswith("<?xml")

    def test_json_format(self, tmp_path, capsys):
        src = write(tmp_path, "sq.kd", SQUARE)
        assert main(["compile", src, "--format", "json"]) == 0
        doc = json.loads(capsys.readouterr().out)
        assert "items" in doc and "grid" in doc

    def test_stdin(self, tmp_path, capsys, monkeypatch):
        import io
        monkeypatch.setattr("sys.stdin", io.StringIO(SQUARE))
        assert main(["compile", "-", "--no-cache"]) == 0
        assert capsys.readouterr().out.startswith("<?xml")

    def test_multiple_inputs_to_directory(self, tmp_path, capsys):
        a = write(tmp_path, "a.kd", SQUARE)
        b = write(tmp_path, "b.kd", "X & \\rTo & Y")
        outdir = str(tmp_path / "out")
        assert main(["compile", a, b, "-o", outdir]) == 0
        assert sorted(os.listdir(outdir)) == ["a.svg", "b.svg"]

    def test_no_cache_deterministic(self, tmp_path, capsys):
        src = write(tmp_path, "sq.kd", SQUARE)
        assert main(["compile", src, "--no-cache"]) == 0
        first = capsys.readouterr().out
        assert main(["compile", src, "--no-cache"]) == 0
        assert capsys.readouterr().out == first

    def test_cache_roundtrip_identical(self, tmp_path, capsys):
        src = write(tmp_path, "sq.kd", SQUARE)
        cache_dir = str(tmp_path / "cache")
        argv = ["compile", src, "--cache-dir", cache_dir]
        assert main(argv) == 0
        first = capsys.readouterr().out
        assert os.listdir(cache_dir) == ["sq.kdc"] or "sq.kdc" in os.listdir(cache_dir)
        assert main(argv) == 0
        assert capsys.readouterr().out == first

    def test_missing_input_is_io_error(self, tmp_path, capsys):
        assert main(["compile", str(tmp_path / "absent.kd")]) == 3


class TestCheck:
    def test_ok(self, tmp_path):
        src = write(tmp_path, "sq.kd", SQUARE)
        assert main(["check", src]) == 0

    def test_unbalanced_brace_diagnostic(self, tmp_path, capsys):
        src = write(tmp_path, "bad.kd", "A & \\rTo^{f")
        assert main(["check", src]) == 1
        err = capsys.readouterr().err
        assert "E_UNBALANCED" in err
        assert "bad.kd:1:" in err

    def test_unknown_style(self, tmp_path, capsys):
        src = write(tmp_path, "bad.kd", "A & \\rWat & B")
        assert main(["check", src]) == 1
        assert "E_UNKNOWN_STYLE" in capsys.readouterr().err


class TestDump:
    def test_json_layout(self, tmp_path, capsys):
        src = write(tmp_path, "sq.kd", SQUARE)
        assert main(["dump", src]) == 0
        doc = json.loads(capsys.readouterr().out)
        arrows = doc["arrows"]
        assert len(arrows) == 4
        assert all(a["shaft_length"] > 0 for a in arrows)


class TestOptionLayering:
    def test_preset_dg(self, tmp_path, capsys):
        src = write(tmp_path, "sq.kd", "A & B")
        assert main(["dump", src, "--preset", "dg"]) == 0
        doc = json.loads(capsys.readouterr().out)
        # ygrid 1cm - 2mm
        assert doc["grid"]["ygrid"] == 1864679 - 2 * 186467
        assert doc["grid"]["xgrid"] == 0

    def test_set_after_preset(self, tmp_path, capsys):
        src = write(tmp_path, "sq.kd", "A \\\\ B")
        assert main(["dump", src, "--preset", "dg", "--set", "ygrid=1cm"]) == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["grid"]["ygrid"] == 1864679

    def test_set_relative_and_per_cell(self, tmp_path, capsys):
        src = write(tmp_path, "sq.kd", "A & B")
        code = main(["dump", src, "--set", "xgrid+=5pt", "--set", "labelpad{Two}=1pt"])
        assert code == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["grid"]["xgrid"] == 1864679 + 5 * 65536

    def test_bad_set_is_usage_error(self, tmp_path, capsys):
        src = write(tmp_path, "sq.kd", "A & B")
        assert main(["dump", src, "--set", "bogus"]) == 2

    def test_gravitate_flag(self, tmp_path, capsys):
        src = write(tmp_path, "sq.kd", "A & B & C")
        assert main(["dump", src, "--gravitate", "left"]) == 0
        assert json.loads(capsys.readouterr().out)["gravity"] == 0

    def test_gridlines_flag(self, tmp_path, capsys):
        src = write(tmp_path, "sq.kd", "A & B \\\\ C & D")
        assert main(["dump", src, "--gridlines"]) == 0
        doc = json.loads(capsys.readouterr().out)
        lines = [it for it in doc["items"] if it["kind"] == "gridline"]
        assert len(lines) == 4

    def test_metrics_file(self, tmp_path, capsys):
        src = write(tmp_path, "sq.kd", "A")
        mfile = write(tmp_path, "m.txt", "em vertexstyle 20\n")
        assert main(["dump", src, "--metrics", mfile]) == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["boxes"][0]["w"] == 10 * 65536

    def test_config_file(self, tmp_path, capsys):
        src = write(tmp_path, "sq.kd", "A & B")
        cfg = write(tmp_path, "conf.txt", "# comment\nxgrid = 5pt\n")
        assert main(["dump", src, "--config", cfg]) == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["grid"]["xgrid"] == 5 * 65536
