"""Column solver: constraints, splits, bindings, movements, interpolation."""
from __future__ import annotations

from fractions import Fraction

import pytest

from diagrid import layout
from diagrid.dsl import parse
from diagrid.layout import (
    Constraint,
    Grid,
    MovementAt,
    apply_movement,
    build_constraints,
    collect_vertices,
    fixed_positions,
    flexible_solve,
    gravity_default,
    graph_coords,
    move_bound,
    normalize,
)
from diagrid.styles import LABEL_STYLE, Metrics, builtin_catalog

PT = 65536
CM = 1864679


def metrics_label10() -> Metrics:
    """Label em pinned to 10pt so a one-char label is 5pt wide."""
    return Metrics().with_em(LABEL_STYLE, 10 * PT)


class TestCollect:
    def test_vertex_measured(self):
        ast = parse("A").ast
        boxes = collect_vertices(ast, Metrics())
        assert boxes[(0, 0)].w == 5 * PT
        assert boxes[(0, 0)].h == 7 * PT
        assert boxes[(0, 0)].d == 2 * PT

    def test_empty_and_arrows_record_nothing(self):
        ast = parse("A & \\rTo & ").ast
        boxes = collect_vertices(ast, Metrics())
        assert set(boxes) == {(0, 0)}

    def test_stop_records_zero_box(self):
        ast = parse("A & \\rTo & \\stop").ast
        boxes = collect_vertices(ast, Metrics())
        assert boxes[(0, 2)].w == 0 and boxes[(0, 2)].h == 0


class TestFixed:
    def test_positions(self):
        grid = fixed_positions(2, 1, builtin_catalog())
        assert grid.X == [0, 1864679, 3729358]
        assert grid.Y == [0, 1864679]

    def test_zero_xgrid(self):
        reg = builtin_catalog()
        reg.set_param("xgrid", None, "0pt")
        assert fixed_positions(3, 0, reg).X == [0, 0, 0, 0]

    def test_uniform_gaps(self):
        grid = fixed_positions(5, 5, builtin_catalog())
        for c in range(1, 6):
            assert grid.X[c] - grid.X[c - 1] == CM


class TestGravity:
    def test_default_middle(self):
        assert gravity_default(2) == 10
        assert gravity_default(3) == 15

    def test_gravitate_flags(self):
        assert gravity_default(2, {"gravitateleft"}) == 0
        assert gravity_default(2, {"gravitateright"}) == 20

    def test_grav_marker_wins(self):
        assert gravity_default(4, {"gravitateleft"}, grav_col=2) == 20


class TestBuildConstraints:
    def test_worked_a_constraint(self):
        ast = parse("\\Diagram[cellwidth=20pt]\nAB & \\rTo^{f} & CD").ast
        reg = builtin_catalog()
        reg.set_param("cellwidth", None, "20pt")
        boxes = collect_vertices(ast, metrics_label10())
        cons = build_constraints(ast, boxes, reg, metrics_label10())
        a = [c for c in cons if c.kind == "A"]
        assert len(a) == 1
        # 5 + 5 + max(5 + 2*(3+5), 20) = 31pt
        assert a[0].required == 31 * PT
        assert (a[0].c1, a[0].c2) == (0, 2)

    def test_vertical_only_no_a(self):
        ast = parse("A \\\\ \\dTo \\\\ B").ast
        boxes = collect_vertices(ast, Metrics())
        cons = build_constraints(ast, boxes, builtin_catalog(), Metrics())
        assert not [c for c in cons if c.kind == "A"]

    def test_c_clearance(self):
        ast = parse("AB & CD").ast
        reg = builtin_catalog()
        reg.set_param("xgrid", None, "0pt")
        boxes = collect_vertices(ast, Metrics())
        cons = build_constraints(ast, boxes, reg, Metrics())
        c = [c for c in cons if c.kind == "C"]
        assert len(c) == 1
        assert c[0].required == 10 * PT  # (10+10)/2

    def test_c_spans_empty_columns(self):
        ast = parse("AB & & CD").ast
        reg = builtin_catalog()
        reg.set_param("xgrid", None, "0pt")
        cons = build_constraints(ast, collect_vertices(ast, Metrics()), reg, Metrics())
        c = [c for c in cons if c.kind == "C"]
        assert (c[0].c1, c[0].c2) == (0, 2)

    def test_w_for_diagonal(self):
        ast = parse("A & \\rdTo & \\\\ & & B").ast
        reg = builtin_catalog()
        boxes = collect_vertices(ast, Metrics())
        cons = build_constraints(ast, boxes, reg, Metrics())
        w = [c for c in cons if c.kind == "W"]
        assert len(w) == 1
        assert w[0].required == reg.resolve("columndist")

    def test_w_braced_uses_bracewidth(self):
        ast = parse("AB & \\rdTo & \\\\ & & CD").ast
        reg = builtin_catalog()
        boxes = collect_vertices(ast, Metrics())
        cons = build_constraints(ast, boxes, reg, Metrics(), braced=True)
        w = [c for c in cons if c.kind == "W"]
        # max over the two rows of half-width sums: row0 has only AB (5pt),
        # row1 only CD (5pt); plus bracewidth.
        assert w[0].required == 5 * PT + int(reg.resolve("bracewidth"))

    def test_nw_suppresses_a(self):
        ast = parse("A & \\rTo\\nw & B").ast
        cons = build_constraints(ast, collect_vertices(ast, Metrics()),
                                 builtin_catalog(), Metrics())
        assert not [c for c in cons if c.kind == "A"]

    def test_registration_order(self):
        ast = parse("A & \\rTo & B \\\\ C & \\rdTo & \\\\ & & D").ast
        reg = builtin_catalog()
        reg.set_param("xgrid", None, "0pt")
        cons = build_constraints(ast, collect_vertices(ast, Metrics()), reg, Metrics())
        kinds = [c.kind for c in cons]
        assert kinds == sorted(kinds, key="AWC".index)
        assert [c.order for c in cons] == list(range(len(cons)))


def zero_xgrid_registry():
    reg = builtin_catalog()
    reg.set_param("xgrid", None, "0pt")
    return reg


class TestSolve:
    def test_single_straddle_split(self):
        cons = [Constraint("A", 0, 0, 2, 31 * PT, 0)]
        grid = flexible_solve(cons, 2, 0, zero_xgrid_registry(), gravity=10)
        normalize(grid)
        assert grid.X[2] - grid.X[0] == 31 * PT
        assert grid.X == [0, 31 * PT // 2, 31 * PT]

    def test_no_constraints_all_zero(self):
        grid = flexible_solve([], 2, 0, zero_xgrid_registry(), gravity=10)
        assert grid.X == [0, 0, 0]

    def test_gravityleft_moves_only_right_column(self):
        cons = [Constraint("A", 0, 0, 1, 10 * PT, 0)]
        grid = flexible_solve(cons, 1, 0, zero_xgrid_registry(), gravity=0)
        assert grid.X == [0, 10 * PT]

    def test_gravityright_moves_only_left_column(self):
        cons = [Constraint("A", 0, 0, 1, 10 * PT, 0)]
        grid = flexible_solve(cons, 1, 0, zero_xgrid_registry(), gravity=10)
        normalize(grid)
        assert grid.X == [0, 10 * PT]

    def test_binding_propagates(self):
        # First constraint binds (0,1) by moving 1 right; the second moves 1
        # again and must drag 0 along, keeping their distance.
        cons = [
            Constraint("A", 0, 0, 1, 10 * PT, 0),
            Constraint("A", 0, 1, 2, 20 * PT, 1),
        ]
        grid = flexible_solve(cons, 2, 0, zero_xgrid_registry(), gravity=0)
        assert grid.X[1] - grid.X[0] == 10 * PT
        assert grid.X[2] - grid.X[1] == 20 * PT

    def test_revisited_constraint_fixpoint(self):
        # The later, larger constraint re-violates the pair; the solver
        # re-runs to a fixpoint and must satisfy every constraint.
        cons = [
            Constraint("A", 0, 0, 2, 10 * PT, 0),
            Constraint("C", 0, 0, 2, 25 * PT, 1),
        ]
        grid = flexible_solve(cons, 2, 0, zero_xgrid_registry(), gravity=10)
        for con in cons:
            assert con.deficiency(grid.X) <= 0

    def test_monotone_after_solve(self):
        cons = [
            Constraint("A", 0, 0, 1, 7 * PT, 0),
            Constraint("A", 0, 1, 2, 9 * PT, 1),
            Constraint("C", 0, 0, 2, 30 * PT, 2),
        ]
        grid = flexible_solve(cons, 2, 0, zero_xgrid_registry(), gravity=10)
        assert grid.X == sorted(grid.X)


class TestGoldenSquare:
    SRC = ("\\Diag[cellwidth=20pt]\n"
           "AB & \\rTo^{f} & CD \\\\\n"
           "\\dTo & & \\dTo \\\\\n"
           "EF & \\rTo & GH")

    def solve(self):
        from diagrid.pipeline import compile_source
        out = compile_source(self.SRC, metrics=metrics_label10())
        assert out.ok, [d.format() for d in out.diagnostics]
        return out.result

    def test_column_gap_exactly_31pt(self):
        grid = self.solve().grid
        assert grid.X[2] - grid.X[0] == 31 * PT
        assert grid.X == [0, 31 * PT // 2, 31 * PT]

    def test_all_constraints_satisfied(self):
        res = self.solve()
        ast = parse(self.SRC).ast
        reg = builtin_catalog()
        reg.set_param("cellwidth", None, "20pt")
        reg.set_param("xgrid", None, "0pt")
        boxes = collect_vertices(ast, metrics_label10())
        for con in build_constraints(ast, boxes, reg, metrics_label10()):
            assert con.deficiency(res.grid.X) <= 0

    def test_rows_stay_uniform(self):
        grid = self.solve().grid
        assert grid.Y == [0, CM, 2 * CM]


class TestMovements:
    def make(self):
        return Grid(X=[0, 20 * PT, 40 * PT], Y=[0, 20 * PT], xgrid=CM, ygrid=CM)

    def test_dx_suffix_shift(self):
        grid = self.make()
        apply_movement(grid, MovementAt("dx", 0, 1, 10 * PT), {})
        assert grid.X == [0, 30 * PT, 50 * PT]

    def test_mx_single_shift(self):
        grid = self.make()
        apply_movement(grid, MovementAt("mx", 0, 1, 10 * PT), {})
        assert grid.X == [0, 30 * PT, 40 * PT]

    def test_dx_fraction_of_gap(self):
        grid = self.make()
        apply_movement(grid, MovementAt("dx", 0, 1, Fraction(1, 2)), {})
        assert grid.X == [0, 30 * PT, 50 * PT]

    def test_fraction_without_next_column_is_zero(self):
        grid = self.make()
        apply_movement(grid, MovementAt("dx", 0, 2, Fraction(1, 2)), {})
        assert grid.X == [0, 20 * PT, 40 * PT]

    def test_ax_moves_bound_set(self):
        grid = self.make()
        grid.bindings = {1: {0}, 0: {1}}
        apply_movement(grid, MovementAt("ax", 0, 1, 5 * PT), {})
        assert grid.X == [5 * PT, 25 * PT, 40 * PT]

    def test_dy_and_my(self):
        grid = self.make()
        apply_movement(grid, MovementAt("dy", 0, 0, 3 * PT), {})
        assert grid.Y == [3 * PT, 23 * PT]
        apply_movement(grid, MovementAt("my", 1, 0, -3 * PT), {})
        assert grid.Y == [3 * PT, 20 * PT]

    def test_ml_aligns_edges(self):
        ast = parse("AAAA & BB").ast
        boxes = collect_vertices(ast, Metrics())
        grid = Grid(X=[0, 40 * PT], Y=[0], xgrid=CM, ygrid=CM)
        apply_movement(grid, MovementAt("ml", 0, 1, None), boxes)
        # clearance (20+10)/2 = 15pt from column 0
        assert grid.X == [0, 15 * PT]

    def test_mr_aligns_edges(self):
        ast = parse("AAAA & BB").ast
        boxes = collect_vertices(ast, Metrics())
        grid = Grid(X=[0, 40 * PT], Y=[0], xgrid=CM, ygrid=CM)
        apply_movement(grid, MovementAt("mr", 0, 0, None), boxes)
        assert grid.X == [25 * PT, 40 * PT]

    def test_alignment_without_neighbor_is_noop(self):
        ast = parse("A & ").ast
        boxes = collect_vertices(ast, Metrics())
        grid = Grid(X=[0, 40 * PT], Y=[0], xgrid=CM, ygrid=CM)
        apply_movement(grid, MovementAt("mr", 0, 0, None), boxes)
        assert grid.X == [0, 40 * PT]


class TestBindingGraph:
    def test_cycle_visits_once(self):
        grid = Grid(X=[0, 0, 0], Y=[0], xgrid=0, ygrid=0,
                    bindings={0: {1}, 1: {2}, 2: {0}})
        move_bound(grid, 0, 7)
        assert grid.X == [7, 7, 7]

    def test_pairwise_distances_preserved(self):
        grid = Grid(X=[3, 8, 20], Y=[0], xgrid=0, ygrid=0,
                    bindings={0: {1}, 1: {0, 2}, 2: {1}})
        before = [grid.X[1] - grid.X[0], grid.X[2] - grid.X[1]]
        move_bound(grid, 1, -5)
        assert [grid.X[1] - grid.X[0], grid.X[2] - grid.X[1]] == before


class TestGraphCoords:
    def make(self):
        return Grid(X=[0, 100, 200], Y=[0, 100, 200], xgrid=50, ygrid=50)

    def test_interpolation(self):
        grid = self.make()
        assert graph_coords(grid, Fraction(3, 2), Fraction(0))[0] == 150

    def test_origin(self):
        grid = self.make()
        assert graph_coords(grid, Fraction(0), Fraction(0))[0] == 0

    def test_extrapolation_beyond_last(self):
        grid = self.make()
        x, _ = graph_coords(grid, Fraction(9, 4), Fraction(0))
        assert x == 200 + 0 * 50 + 50 // 4  # X[2] + 0.25*xgrid

    def test_negative_linear(self):
        grid = self.make()
        assert graph_coords(grid, Fraction(-1, 2), Fraction(0))[0] == -25

    def test_y_measured_upward(self):
        grid = self.make()
        # y=0 is the bottom row, y=2 the top.
        assert graph_coords(grid, Fraction(0), Fraction(0))[1] == 200
        assert graph_coords(grid, Fraction(0), Fraction(2))[1] == 0
        assert graph_coords(grid, Fraction(0), Fraction(1, 2))[1] == 150


class TestSolverFailure:
    def test_unsatisfiable_raises(self):
        # Contradictory pair: same columns, later constraint needs more but
        # the bound pair would move jointly without the severed propagation;
        # with it the solver converges, so force failure differently: a
        # constraint with c1 == c2 can never gain a gap.
        cons = [Constraint("A", 0, 1, 1, 5 * PT, 0)]
        with pytest.raises(layout.LayoutError):
            flexible_solve(cons, 2, 0, zero_xgrid_registry(), gravity=10)
