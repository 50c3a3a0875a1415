import numpy as np
import pytest

from curvefold import curves
from curvefold.errors import NotRigidFoldable, OutOfRange
from curvefold.foldsim import (clash_test, default_driving_crease,
                               extract_polylines, propagate, sweep_to_halt)
from curvefold.geometry import measure_polyline, partition_uniform
from curvefold.verify import rigid_align

RHO4 = 5 * np.pi / 6


class TestPropagate:
    def test_flat_state_is_planar_embedding(self, small_parallel):
        pattern, _ = small_parallel
        st = propagate(pattern, 0.0)
        assert np.abs(st.vertex_coords[:, 2]).max() < 1e-12
        assert np.abs(st.vertex_coords[:, :2] - pattern.vertices).max() < 1e-12

    def test_closure_at_random_driving(self, small_parallel):
        pattern, _ = small_parallel
        sgn = pattern.creases[default_driving_crease(pattern)].mv or 1
        for d in (0.2, 0.7, 1.5):
            st = propagate(pattern, sgn * d)
            assert st.residuals["closure"] < 1e-9
            assert st.residuals["vertex_spread"] < 1e-9

    def test_isometry(self, small_parallel):
        pattern, _ = small_parallel
        st = propagate(pattern, 0.9 * (pattern.creases[default_driving_crease(pattern)].mv or 1))
        V = st.vertex_coords
        for _, _, quad in pattern.face_grid_iter():
            for a in range(4):
                for b in range(a + 1, 4):
                    d2 = np.linalg.norm(pattern.vertices[quad[a]] - pattern.vertices[quad[b]])
                    d3 = np.linalg.norm(V[quad[a]] - V[quad[b]])
                    assert abs(d3 - d2) <= 1e-9 * max(d2, 1.0)

    def test_corrupted_sector_fails(self, small_parallel):
        pattern, _ = small_parallel
        sectors = pattern.sectors.copy()
        try:
            pattern.sectors[1, 1, 0] += 1e-3
            with pytest.raises((NotRigidFoldable, OutOfRange)):
                propagate(pattern, 0.5)
        finally:
            pattern.sectors = sectors

    def test_compensated_corruption_fails_closure(self, small_parallel):
        # keep the angle sum intact so the vertex stays developable but the
        # transfer equations break
        pattern, _ = small_parallel
        sectors = pattern.sectors.copy()
        try:
            pattern.sectors[1, 1, 0] += 1e-3
            pattern.sectors[1, 1, 1] -= 1e-3
            with pytest.raises((NotRigidFoldable, OutOfRange)):
                propagate(pattern, 0.5)
        finally:
            pattern.sectors = sectors

    def test_beyond_pi_rejected(self, small_parallel):
        pattern, _ = small_parallel
        with pytest.raises(OutOfRange):
            propagate(pattern, 3.5)


class TestSweep:
    def test_fig5_halts_at_designed_column(self, fig5_design, fig5_halt):
        pattern, _ = fig5_design
        traj = fig5_halt
        halt = traj.halt
        assert halt.halted and halt.halt_reason == "crease-at-pi"
        # the halting creases are exactly the left row stubs
        ext = pattern.ext_id
        stubs = sorted(pattern.crease_between(int(ext[r, 0]), int(ext[r, 1]))
                       for r in range(1, pattern.rows + 1))
        assert sorted(halt.residuals["halting_creases"]) == stubs
        # and no other crease reached pi first: at halt all others are below
        others = [abs(halt.rho[i]) for i in range(len(pattern.creases)) if i not in stubs]
        assert max(others) < np.pi - 1e-4

    def test_fig5_driving_halt_equals_rho4(self, fig5_halt):
        assert abs(fig5_halt.driving_values[-1] - RHO4) < 1e-6

    def test_trajectory_from_flat(self, fig5_halt):
        traj = fig5_halt
        assert np.abs(traj.states[0].rho).max() < 1e-12
        assert traj.states[-1].halted

    def test_fig7_halts_at_datum_column(self, fig7_design, fig7_halt):
        pattern, _ = fig7_design
        halt = fig7_halt.halt
        assert halt.halt_reason == "crease-at-pi"
        ext = pattern.ext_id
        stubs = sorted(pattern.crease_between(int(ext[r, 0]), int(ext[r, 1]))
                       for r in range(1, pattern.rows + 1))
        assert sorted(halt.residuals["halting_creases"]) == stubs

    def test_fig5_halt_matches_design_state(self, fig5_design, fig5_halt):
        pattern, _ = fig5_design
        Va = pattern.design["halting_state"]["coords"]
        Vs = fig5_halt.halt.vertex_coords
        R, t = rigid_align(Vs, Va)
        assert np.abs((Vs @ R.T + t) - Va).max() < 1e-6

    def test_one_dof_continuity(self, small_parallel):
        pattern, _ = small_parallel
        sgn = pattern.creases[default_driving_crease(pattern)].mv or 1
        base = propagate(pattern, sgn * 0.8)
        for delta in (1e-3, 1e-6):
            st = propagate(pattern, sgn * (0.8 + delta), prev=base)
            move = np.abs(st.vertex_coords - base.vertex_coords).max()
            assert move < 50 * delta
            assert move > 0
            # strict function of the driving angle: all folds move
            interior = [i for i, c in enumerate(pattern.creases) if c.mv != 0]
            assert all(abs(st.rho[i] - base.rho[i]) > 0 for i in interior)

    def test_single_vertex_flat_foldable_halts_at_pi(self):
        from curvefold.parallel import ParallelDesignSpec, build_pattern
        spec = ParallelDesignSpec(datum=curves.space_arc(65), target=curves.exp_curve(65),
                                  n_row=1, n_col=1, rho4=RHO4, theta=np.deg2rad(73),
                                  eps=2.0)
        pattern, _ = build_pattern(spec)
        traj = sweep_to_halt(pattern, samples=4)
        assert traj.halt.halt_reason == "crease-at-pi"


class TestClash:
    def test_flat_state_empty(self, small_parallel):
        pattern, _ = small_parallel
        st = propagate(pattern, 0.0)
        assert clash_test(pattern, st) == []

    def test_mid_trajectory_clean(self, fig5_design, fig5_halt):
        pattern, _ = fig5_design
        mid = fig5_halt.states[len(fig5_halt.states) // 2]
        assert clash_test(pattern, mid) == []

    def test_coincident_adjacent_panels_reported(self, small_parallel):
        pattern, _ = small_parallel
        st = propagate(pattern, 0.0)
        st.rho = st.rho.copy()
        idx = default_driving_crease(pattern)
        st.rho[idx] = np.pi  # fake a fully folded crease
        sides = pattern.crease_sides[idx]
        pair = tuple(sorted((sides["left"], sides["right"])))
        assert pair in clash_test(pattern, st)


class TestExtract:
    def test_flat_rows_are_pattern_lines(self, small_parallel):
        pattern, _ = small_parallel
        st = propagate(pattern, 0.0)
        row = extract_polylines(pattern, st, "row", 1)
        assert len(row.samples) == pattern.cols
        assert np.abs(row.samples[:, 2]).max() < 1e-12

    def test_fig4_row_reproduces_partition(self, fig5_design, fig5_halt):
        pattern, _ = fig5_design
        halt = fig5_halt.halt
        part = partition_uniform(curves.space_arc(), 9)
        row = extract_polylines(pattern, halt, "row", 1, include_boundary=True)
        l, b, th = measure_polyline(row.samples)
        assert np.abs(l - part.lengths).max() / part.lengths.max() < 1e-6
        assert np.abs(b - part.turn_angles).max() < 1e-6
        dd = np.abs(((th - part.dihedrals + np.pi) % (2 * np.pi)) - np.pi)
        assert dd.max() < 1e-6

    def test_column_coplanar_at_halt(self, fig5_design, fig5_halt):
        pattern, _ = fig5_design
        halt = fig5_halt.halt
        for i in range(1, pattern.cols + 1):
            col = extract_polylines(pattern, halt, "column", i).samples
            q = col - col.mean(axis=0)
            res = np.linalg.svd(q, compute_uv=False)[-1]
            assert res / pattern.diameter < 1e-8

    def test_opposite_row_folds(self, fig5_design, fig5_halt):
        pattern, _ = fig5_design
        halt = fig5_halt.halt
        ext = pattern.ext_id
        for r in range(1, pattern.rows):
            for c in range(1, pattern.cols + 1):
                a = pattern.crease_between(int(ext[r, c - 1]), int(ext[r, c]))
                b = pattern.crease_between(int(ext[r + 1, c - 1]), int(ext[r + 1, c]))
                assert abs(halt.rho[a] + halt.rho[b]) < 1e-9

    def test_row_fold_magnitudes_equal(self, fig5_design, fig5_halt):
        pattern, _ = fig5_design
        for st in (fig5_halt.states[3], fig5_halt.halt):
            ext = pattern.ext_id
            for r in range(1, pattern.rows + 1):
                mags = [abs(st.rho[pattern.crease_between(int(ext[r, c]), int(ext[r, c + 1]))])
                        for c in range(1, pattern.cols)]
                assert np.ptp(mags) < 1e-8
