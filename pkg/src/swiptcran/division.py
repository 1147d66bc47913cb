"""Energy-user group division: iterative updating, oracle, and baselines.

The division loop alternates solving the beamforming SDP under the current
MET/FET split with a range-based reclassification of every ET, refined by
explicit two-way solves for terminals sitting near a free charge range
boundary.  Two initializations are provided (all-MET and green-range based),
plus an exhaustive brute-force oracle and the two fixed baselines.
"""

import logging
from dataclasses import dataclass
from enum import Enum

from .beamform import (
    GroupDivision,
    PowerReport,
    SystemParams,
    infeasible_report,
    initial_green_range,
    solve_division,
)
from .sdp import SolverOptions
from .topology import D_MIN_M, assigned_rrh

POOR_CHANNEL_FACTOR = 0.05
BOUNDARY_BAND = 0.05
MAX_DIVISION_ITERS = 50
BRUTE_FORCE_CAP = 12

_log = logging.getLogger(__name__)


class Termination(str, Enum):
    FIXED_POINT = "FixedPoint"
    CYCLE_BROKEN = "CycleBroken"
    INFEASIBLE = "Infeasible"
    ITERATION_CAP = "IterationCap"


class InfeasibleDivision(RuntimeError):
    """The SDP under the requested division has no feasible point."""


@dataclass(frozen=True)
class DivisionRunResult:
    """Outcome of one division search.

    `history` records every solved division in round order as
    (division, objective); a terminal repeat entry marks FixedPoint and
    CycleBroken endings.  `iterations` counts solve rounds, terminal repeat
    excluded.
    """

    final_division: GroupDivision
    report: PowerReport
    iterations: int
    history: tuple
    termination: Termination


def _assigned_distance(topology, et_index: int) -> tuple[int, float]:
    n, dist = assigned_rrh(topology, et_index)
    return n, max(dist, D_MIN_M)


def _classify_by_ranges(topology, ranges) -> GroupDivision:
    """FET iff the assigned-RRH distance falls inside that RRH's range."""
    met, fet = set(), set()
    for j in range(topology.n_et):
        n, d = _assigned_distance(topology, j)
        (fet if d <= ranges[n] else met).add(j)
    return GroupDivision(met_set=frozenset(met), fet_set=frozenset(fet))


def channel_check(
    topology,
    channels,
    division: GroupDivision,
    params: SystemParams,
    poor_channel_factor: float = POOR_CHANNEL_FACTOR,
) -> GroupDivision:
    """Demote METs whose assigned-RRH link is far below its path-loss mean.

    A unit-variance fading draw has mean power gain d^(-alpha); METs whose
    realized gain falls under `poor_channel_factor` times that are moved to
    the FET set, where only geometry matters.
    """
    met, fet = set(division.met_set), set(division.fet_set)
    for j in sorted(division.met_set):
        n, d = _assigned_distance(topology, j)
        gain = abs(channels.h_et[n, j]) ** 2
        if gain < poor_channel_factor * d ** (-params.alpha_abs):
            met.remove(j)
            fet.add(j)
    return GroupDivision(met_set=frozenset(met), fet_set=frozenset(fet))


def boundary_refine(
    topology,
    channels,
    division: GroupDivision,
    ranges,
    params: SystemParams,
    boundary_band: float = BOUNDARY_BAND,
    options: SolverOptions | None = None,
) -> GroupDivision:
    """Re-decide ETs within `boundary_band` (relative) of their RRH's range.

    Each boundary terminal is evaluated under both assignments, holding all
    others fixed, and the cheaper feasible option is committed before moving
    to the next index (ties prefer FET).  If neither assignment is feasible
    the current one is kept.
    """
    met, fet = set(division.met_set), set(division.fet_set)
    for j in range(topology.n_et):
        n, d = _assigned_distance(topology, j)
        if not abs(d - ranges[n]) < boundary_band * ranges[n]:
            continue
        as_met = GroupDivision(frozenset(met | {j}), frozenset(fet - {j}))
        as_fet = GroupDivision(frozenset(met - {j}), frozenset(fet | {j}))
        rep_met, _ = solve_division(topology, channels, as_met, params, options)
        rep_fet, _ = solve_division(topology, channels, as_fet, params, options)
        if not rep_met.feasible and not rep_fet.feasible:
            _log.warning("boundary ET %d infeasible both ways; keeping assignment", j)
            continue
        if rep_fet.feasible and (not rep_met.feasible or rep_fet.objective <= rep_met.objective):
            met.discard(j)
            fet.add(j)
        else:
            fet.discard(j)
            met.add(j)
    return GroupDivision(met_set=frozenset(met), fet_set=frozenset(fet))


def update_division(
    topology,
    channels,
    prev: GroupDivision,
    params: SystemParams,
    boundary_band: float = BOUNDARY_BAND,
    options: SolverOptions | None = None,
) -> tuple[GroupDivision, PowerReport]:
    """One division update round.

    Solves the SDP under `prev`, reclassifies every ET against the resulting
    free charge ranges, refines boundary terminals, and returns the new
    division together with the report of the solve under `prev`.
    """
    report, _ = solve_division(topology, channels, prev, params, options)
    if not report.feasible:
        raise InfeasibleDivision(f"division {prev} admits no feasible beamforming")
    division = _classify_by_ranges(topology, report.ranges)
    division = boundary_refine(
        topology, channels, division, report.ranges, params, boundary_band, options
    )
    return division, report


def _iterate(initial: GroupDivision, update_fn, max_iters: int, n_rrh: int) -> DivisionRunResult:
    """Drive `update_fn` to a fixed point, cycle, infeasibility, or the cap."""
    rounds: list[tuple[GroupDivision, PowerReport]] = []
    group = initial
    for _ in range(max_iters):
        try:
            nxt, report = update_fn(group)
        except InfeasibleDivision:
            if not rounds:
                return DivisionRunResult(
                    final_division=group,
                    report=infeasible_report(n_rrh),
                    iterations=1,
                    history=((group, float("nan")),),
                    termination=Termination.INFEASIBLE,
                )
            last_group, last_report = rounds[-1]
            return DivisionRunResult(
                final_division=last_group,
                report=last_report,
                iterations=len(rounds),
                history=tuple((g, r.objective) for g, r in rounds),
                termination=Termination.ITERATION_CAP,
            )
        rounds.append((group, report))
        if nxt == group:
            history = tuple((g, r.objective) for g, r in rounds) + ((group, report.objective),)
            return DivisionRunResult(group, report, len(rounds), history, Termination.FIXED_POINT)
        seen = [g for g, _ in rounds]
        if nxt in seen:
            start = seen.index(nxt)
            cycle = rounds[start:]
            best_group, best_report = min(cycle, key=lambda gr: gr[1].objective)
            history = tuple((g, r.objective) for g, r in rounds) + (
                (nxt, rounds[start][1].objective),
            )
            return DivisionRunResult(
                best_group, best_report, len(rounds), history, Termination.CYCLE_BROKEN
            )
        group = nxt
    last_group, last_report = rounds[-1]
    return DivisionRunResult(
        final_division=last_group,
        report=last_report,
        iterations=len(rounds),
        history=tuple((g, r.objective) for g, r in rounds),
        termination=Termination.ITERATION_CAP,
    )


def _make_update(topology, channels, params, boundary_band, options):
    def update(prev: GroupDivision):
        return update_division(topology, channels, prev, params, boundary_band, options)

    return update


def _run_iterative(
    topology,
    channels,
    params: SystemParams,
    initial: GroupDivision,
    poor_channel_factor: float,
    boundary_band: float,
    max_division_iters: int,
    options: SolverOptions | None,
) -> DivisionRunResult:
    start = channel_check(topology, channels, initial, params, poor_channel_factor)
    update_fn = _make_update(topology, channels, params, boundary_band, options)
    return _iterate(start, update_fn, max_division_iters, topology.n_rrh)


def algorithm1(
    topology,
    channels,
    params: SystemParams,
    poor_channel_factor: float = POOR_CHANNEL_FACTOR,
    boundary_band: float = BOUNDARY_BAND,
    max_division_iters: int = MAX_DIVISION_ITERS,
    options: SolverOptions | None = None,
) -> DivisionRunResult:
    """Iterative division starting from the all-MET assumption."""
    return _run_iterative(
        topology,
        channels,
        params,
        GroupDivision.all_met(topology.n_et),
        poor_channel_factor,
        boundary_band,
        max_division_iters,
        options,
    )


def algorithm2(
    topology,
    channels,
    params: SystemParams,
    poor_channel_factor: float = POOR_CHANNEL_FACTOR,
    boundary_band: float = BOUNDARY_BAND,
    max_division_iters: int = MAX_DIVISION_ITERS,
    options: SolverOptions | None = None,
) -> DivisionRunResult:
    """Iterative division seeded by each RRH's green-energy-only range."""
    green = initial_green_range(params)
    met, fet = set(), set()
    for j in range(topology.n_et):
        n, d = _assigned_distance(topology, j)
        (fet if d <= green[n] else met).add(j)
    initial = GroupDivision(met_set=frozenset(met), fet_set=frozenset(fet))
    return _run_iterative(
        topology,
        channels,
        params,
        initial,
        poor_channel_factor,
        boundary_band,
        max_division_iters,
        options,
    )


def _single_division_result(topology, channels, division, params, options) -> DivisionRunResult:
    report, _ = solve_division(topology, channels, division, params, options)
    if not report.feasible:
        return DivisionRunResult(
            final_division=division,
            report=report,
            iterations=1,
            history=((division, float("nan")),),
            termination=Termination.INFEASIBLE,
        )
    history = ((division, report.objective), (division, report.objective))
    return DivisionRunResult(division, report, 1, history, Termination.FIXED_POINT)


def brute_force(
    topology,
    channels,
    params: SystemParams,
    brute_force_cap: int = BRUTE_FORCE_CAP,
    options: SolverOptions | None = None,
) -> DivisionRunResult:
    """Exhaustive search over all 2^U_E divisions; the optimality oracle."""
    n_et = topology.n_et
    if n_et > brute_force_cap:
        raise ValueError(f"{n_et} ETs exceed the brute force cap of {brute_force_cap}")
    best: tuple[GroupDivision, PowerReport] | None = None
    for mask in range(1 << n_et):
        division = GroupDivision.from_bitmask(mask, n_et)
        report, _ = solve_division(topology, channels, division, params, options)
        if report.feasible and (best is None or report.objective < best[1].objective):
            best = (division, report)
    if best is None:
        return DivisionRunResult(
            final_division=GroupDivision.all_met(n_et),
            report=infeasible_report(topology.n_rrh),
            iterations=1,
            history=((GroupDivision.all_met(n_et), float("nan")),),
            termination=Termination.INFEASIBLE,
        )
    division, report = best
    history = ((division, report.objective), (division, report.objective))
    return DivisionRunResult(division, report, 1, history, Termination.FIXED_POINT)


def baseline_all_fet(
    topology,
    channels,
    params: SystemParams,
    options: SolverOptions | None = None,
) -> DivisionRunResult:
    """Fixed division treating every ET as free; infeasibility is a valid outcome."""
    return _single_division_result(
        topology, channels, GroupDivision.all_fet(topology.n_et), params, options
    )


def baseline_all_met(
    topology,
    channels,
    params: SystemParams,
    options: SolverOptions | None = None,
) -> DivisionRunResult:
    """Fixed division keeping every ET CSI-assisted."""
    return _single_division_result(
        topology, channels, GroupDivision.all_met(topology.n_et), params, options
    )
