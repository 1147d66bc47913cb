"""Tests for the iterative group-division search and its baselines."""

import logging
import math

import numpy as np
import pytest

from swiptcran.beamform import (
    GroupDivision,
    PowerReport,
    SystemParams,
    infeasible_report,
)
from swiptcran.division import (
    BRUTE_FORCE_CAP,
    DivisionRunResult,
    InfeasibleDivision,
    Termination,
    _iterate,
    algorithm1,
    algorithm2,
    baseline_all_fet,
    baseline_all_met,
    boundary_refine,
    brute_force,
    channel_check,
    update_division,
)
from swiptcran.topology import (
    ChannelRealization,
    NetworkTopology,
    Position,
    assigned_rrh,
    draw_channels,
    generate_topology,
)

PARAMS = SystemParams()


def _instance(seed: int, n_it: int = 3, n_et: int = 7):
    topo = generate_topology(seed=seed, n_rrh=3, n_it=n_it, n_et=n_et)
    return topo, draw_channels(topo, seed=seed, slot=0)


def _fake_report(objective: float) -> PowerReport:
    z = np.zeros(3)
    return PowerReport(p_op=z, p_pu=z, ranges=z, objective=objective, feasible=True)


def _scripted(transitions: dict, objectives: dict):
    """update_fn replaying a canned division graph; None means infeasible."""

    def update(group):
        nxt = transitions[group]
        if nxt is None:
            raise InfeasibleDivision("scripted")
        return nxt, _fake_report(objectives[group])

    return update


class TestChannelCheck:
    def _two_cell(self, h_et):
        topo = NetworkTopology(
            rrh_positions=(Position(0.0, 0.0), Position(20.0, 0.0)),
            it_positions=(Position(1.0, 0.0),),
            et_positions=(Position(4.0, 0.0),),
            hex_side=20.0 / math.sqrt(3.0),
        )
        ch = ChannelRealization(h_id=np.ones((2, 1), dtype=complex), h_et=h_et)
        return topo, ch

    def test_demotes_deep_fade(self):
        topo, ch = self._two_cell(np.zeros((2, 1), dtype=complex))
        out = channel_check(topo, ch, GroupDivision.all_met(1), PARAMS)
        assert out.fet_set == {0}

    def test_keeps_average_link(self):
        # realized gain exactly at the path-loss mean clears any factor < 1
        gain = 4.0 ** (-PARAMS.alpha_abs / 2.0)
        topo, ch = self._two_cell(np.array([[gain], [0.0]], dtype=complex))
        out = channel_check(topo, ch, GroupDivision.all_met(1), PARAMS)
        assert out.met_set == {0}

    def test_only_assigned_rrh_link_counts(self):
        # strong gain at the far RRH does not save a dead assigned link
        h_et = np.array([[0.0], [10.0]], dtype=complex)
        topo, ch = self._two_cell(h_et)
        out = channel_check(topo, ch, GroupDivision.all_met(1), PARAMS)
        assert out.fet_set == {0}

    def test_factor_zero_disables_demotion(self):
        topo, ch = self._two_cell(np.zeros((2, 1), dtype=complex))
        out = channel_check(topo, ch, GroupDivision.all_met(1), PARAMS, poor_channel_factor=0.0)
        assert out.met_set == {0}

    def test_never_promotes_fets(self):
        topo, ch = self._two_cell(np.ones((2, 1), dtype=complex))
        out = channel_check(topo, ch, GroupDivision.all_fet(1), PARAMS)
        assert out.fet_set == {0}

    def test_threshold_scales_with_factor(self):
        mean_amp = 4.0 ** (-PARAMS.alpha_abs / 2.0)
        weak = np.array([[0.1 * mean_amp], [0.0]], dtype=complex)  # gain 1% of mean
        topo, ch = self._two_cell(weak)
        default = channel_check(topo, ch, GroupDivision.all_met(1), PARAMS)
        lenient = channel_check(
            topo, ch, GroupDivision.all_met(1), PARAMS, poor_channel_factor=0.005
        )
        assert default.fet_set == {0}
        assert lenient.met_set == {0}


class TestBoundaryRefine:
    def test_zero_band_is_identity(self):
        topo, ch = _instance(11)
        division = GroupDivision.all_met(7)
        ranges = np.full(3, 50.0)
        out = boundary_refine(topo, ch, division, ranges, PARAMS, boundary_band=0.0)
        assert out == division

    def test_far_from_boundary_is_untouched(self):
        topo, ch = _instance(11)
        division = GroupDivision.all_met(7)
        out = boundary_refine(topo, ch, division, np.full(3, 1e6), PARAMS)
        assert out == division

    def test_near_terminal_moves_to_cheaper_side(self):
        # a terminal inside the band whose FET floor is nearly free should
        # end up free: the MET floor binds harder than the geometric one
        topo, ch = _instance(11)
        division = GroupDivision.all_met(7)
        _, d0 = assigned_rrh(topo, 0)
        d0 = max(d0, 1.0)
        ranges = np.full(3, d0 * 1.01)
        out = boundary_refine(topo, ch, division, ranges, PARAMS)
        assert 0 in out.fet_set

    def test_keeps_assignment_when_both_sides_infeasible(self, caplog):
        topo, ch = _instance(0, n_it=4)  # four SINR floors: always infeasible
        division = GroupDivision.all_met(7)
        _, d0 = assigned_rrh(topo, 0)
        ranges = np.full(3, max(d0, 1.0) * 1.01)
        with caplog.at_level(logging.WARNING, logger="swiptcran.division"):
            out = boundary_refine(topo, ch, division, ranges, PARAMS)
        assert out == division
        assert any("infeasible both ways" in rec.message for rec in caplog.records)


class TestUpdateDivision:
    def test_returns_partition_and_previous_report(self):
        topo, ch = _instance(11)
        nxt, report = update_division(topo, ch, GroupDivision.all_met(7), PARAMS)
        nxt.validate_for(7)
        assert report.feasible
        assert report.objective > 0

    def test_raises_on_infeasible_division(self):
        topo, ch = _instance(0, n_it=4)
        with pytest.raises(InfeasibleDivision):
            update_division(topo, ch, GroupDivision.all_met(7), PARAMS)

    def test_fixed_point_is_idempotent(self):
        topo, ch = _instance(11)
        result = algorithm1(topo, ch, PARAMS)
        assert result.termination is Termination.FIXED_POINT
        again, _ = update_division(topo, ch, result.final_division, PARAMS)
        assert again == result.final_division


class TestIterateSeam:
    G = [GroupDivision.from_bitmask(m, 3) for m in range(8)]

    def test_fixed_point_shape(self):
        g0, g1 = self.G[0], self.G[1]
        update = _scripted({g0: g1, g1: g1}, {g0: 5.0, g1: 4.0})
        res = _iterate(g0, update, max_iters=50, n_rrh=3)
        assert res.termination is Termination.FIXED_POINT
        assert res.final_division == g1
        assert res.iterations == 2
        assert res.history == ((g0, 5.0), (g1, 4.0), (g1, 4.0))
        assert res.report.objective == 4.0

    def test_cycle_returns_cheapest_member(self):
        g0, g1, g2 = self.G[0], self.G[1], self.G[2]
        update = _scripted({g0: g1, g1: g2, g2: g1}, {g0: 9.0, g1: 7.0, g2: 3.0})
        res = _iterate(g0, update, max_iters=50, n_rrh=3)
        assert res.termination is Termination.CYCLE_BROKEN
        assert res.final_division == g2
        assert res.report.objective == 3.0
        assert res.iterations == 3
        # terminal repeat names the revisited division
        assert res.history == ((g0, 9.0), (g1, 7.0), (g2, 3.0), (g1, 7.0))

    def test_first_round_infeasible(self):
        g0 = self.G[0]
        update = _scripted({g0: None}, {})
        res = _iterate(g0, update, max_iters=50, n_rrh=3)
        assert res.termination is Termination.INFEASIBLE
        assert res.final_division == g0
        assert not res.report.feasible
        assert res.iterations == 1
        assert len(res.history) == 1
        assert math.isnan(res.history[0][1])

    def test_mid_run_infeasible_reverts(self):
        g0, g1 = self.G[0], self.G[1]
        update = _scripted({g0: g1, g1: None}, {g0: 6.0})
        res = _iterate(g0, update, max_iters=50, n_rrh=3)
        assert res.termination is Termination.ITERATION_CAP
        assert res.final_division == g0
        assert res.report.objective == 6.0
        assert res.history == ((g0, 6.0),)

    def test_iteration_cap(self):
        order = self.G[:6]
        transitions = {g: order[k + 1] for k, g in enumerate(order[:-1])}
        objectives = {g: float(k) for k, g in enumerate(order)}
        update = _scripted(transitions, objectives)
        res = _iterate(order[0], update, max_iters=4, n_rrh=3)
        assert res.termination is Termination.ITERATION_CAP
        assert res.iterations == 4
        assert len(res.history) == 4
        assert res.final_division == order[3]


class TestAlgorithms:
    @pytest.mark.parametrize("seed", [3, 11, 21])
    def test_brute_force_is_lower_bound(self, seed):
        topo, ch = _instance(seed, n_et=4)
        oracle = brute_force(topo, ch, PARAMS)
        assert oracle.termination is Termination.FIXED_POINT
        for alg in (algorithm1, algorithm2):
            res = alg(topo, ch, PARAMS)
            if res.report.feasible:
                assert res.report.objective >= oracle.report.objective - 1e-6

    @pytest.mark.parametrize("seed", [3, 11, 21])
    def test_brute_force_beats_baselines(self, seed):
        topo, ch = _instance(seed, n_et=4)
        oracle = brute_force(topo, ch, PARAMS)
        for baseline in (baseline_all_fet, baseline_all_met):
            res = baseline(topo, ch, PARAMS)
            if res.report.feasible:
                assert oracle.report.objective <= res.report.objective + 1e-6

    def test_history_invariants(self):
        topo, ch = _instance(11)
        for alg in (algorithm1, algorithm2):
            res = alg(topo, ch, PARAMS)
            assert res.termination is Termination.FIXED_POINT
            assert res.iterations <= 50
            assert len(res.history) == res.iterations + 1
            for division, objective in res.history:
                division.validate_for(7)
                assert objective > 0
            assert res.history[-1][0] == res.final_division
            assert res.history[-1] == res.history[-2]

    def test_deterministic(self):
        topo, ch = _instance(11)
        a = algorithm2(topo, ch, PARAMS)
        b = algorithm2(topo, ch, PARAMS)
        assert a.final_division == b.final_division
        assert a.termination is b.termination
        assert a.history == b.history
        np.testing.assert_array_equal(a.report.p_op, b.report.p_op)
        assert a.report.objective == b.report.objective

    def test_infeasible_initial_division(self):
        # green-range seeding frees too many terminals on this draw
        topo, ch = _instance(16)
        res = algorithm2(topo, ch, PARAMS)
        assert res.termination is Termination.INFEASIBLE
        assert not res.report.feasible
        assert math.isnan(res.report.objective)

    def test_update_walking_into_infeasibility_reverts(self):
        topo, ch = _instance(16)
        res = algorithm1(topo, ch, PARAMS)
        assert res.termination is Termination.ITERATION_CAP
        assert res.report.feasible
        assert res.final_division == res.history[-1][0]

    def test_baseline_shape(self):
        topo, ch = _instance(11)
        res = baseline_all_met(topo, ch, PARAMS)
        assert res.termination is Termination.FIXED_POINT
        assert res.iterations == 1
        assert res.history[0] == res.history[1]
        assert res.final_division == GroupDivision.all_met(7)

    def test_brute_force_rejects_large_search(self):
        topo = generate_topology(seed=1, n_rrh=3, n_it=1, n_et=BRUTE_FORCE_CAP + 1)
        ch = draw_channels(topo, seed=1, slot=0)
        with pytest.raises(ValueError):
            brute_force(topo, ch, PARAMS)

    def test_brute_force_all_infeasible(self):
        topo, ch = _instance(0, n_it=4, n_et=2)
        res = brute_force(topo, ch, PARAMS)
        assert res.termination is Termination.INFEASIBLE
        assert not res.report.feasible
