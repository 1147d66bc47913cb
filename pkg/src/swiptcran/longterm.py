"""Two-stage protocol: training to estimate FET affinity, then a frozen run.

During training every ET reports CSI each slot and the chosen single-slot
division algorithm runs on fresh fading; the fraction of slots an ET ends up
free determines its frozen role.  In the long-term stage the division stays
fixed, frozen FETs stop reporting CSI, and each slot solves the same problem
with their channel columns structurally removed (zeroed): free-terminal
floors depend only on geometry, so the solves are bit-identical whatever
those columns contained.
"""

from dataclasses import dataclass

import numpy as np

from .beamform import GroupDivision, PowerReport, SystemParams, solve_division
from .division import DivisionRunResult, algorithm1, algorithm2
from .sdp import SolverOptions
from .topology import ChannelRealization, draw_channels

ALGORITHMS = {"alg1": algorithm1, "alg2": algorithm2}

Q_TRAINING = 10
DIVISION_THRESHOLD = 0.5


class TrainingFailure(RuntimeError):
    """Every training slot was infeasible; no division can be frozen."""


@dataclass(frozen=True)
class TrainingResult:
    """Per-ET FET frequency over training plus the frozen division.

    `fet_frequency` divides by the number of training slots (infeasible
    slots count as never-FET); `slots_used` is the number of feasible slots
    that actually contributed.
    """

    fet_frequency: np.ndarray
    frozen_division: GroupDivision
    slots_used: int

    def __post_init__(self):
        object.__setattr__(
            self, "fet_frequency", np.asarray(self.fet_frequency, dtype=float)
        )


def mask_fet_channels(channels: ChannelRealization, division: GroupDivision) -> ChannelRealization:
    """Zero the channel columns of free terminals: they are silent uplink."""
    h_et = channels.h_et.copy()
    for j in division.fet_set:
        h_et[:, j] = 0.0
    return ChannelRealization(h_id=channels.h_id, h_et=h_et)


def training_stage(
    topology,
    seed: int,
    q_training: int = Q_TRAINING,
    threshold: float = DIVISION_THRESHOLD,
    params: SystemParams | None = None,
    algorithm: str = "alg2",
    options: SolverOptions | None = None,
) -> TrainingResult:
    """Estimate each ET's FET frequency over `q_training` fading slots.

    The frozen division assigns FET to every ET whose frequency reaches
    `threshold`; an exact tie freezes as FET (the CSI-free mode is cheaper).
    """
    if q_training < 1:
        raise ValueError("q_training must be at least 1")
    if not 0 <= threshold <= 1:
        raise ValueError("threshold must lie in [0, 1]")
    params = params or SystemParams()
    if callable(algorithm):
        run = algorithm
    elif algorithm in ALGORITHMS:
        run = ALGORITHMS[algorithm]
    else:
        raise ValueError(f"unknown algorithm {algorithm!r}; pick from {sorted(ALGORITHMS)}")

    counts = np.zeros(topology.n_et)
    slots_used = 0
    for slot in range(q_training):
        channels = draw_channels(topology, seed, slot)
        result: DivisionRunResult = run(topology, channels, params, options=options)
        if not result.report.feasible:
            continue
        slots_used += 1
        for j in result.final_division.fet_set:
            counts[j] += 1
    if slots_used == 0:
        raise TrainingFailure(f"all {q_training} training slots were infeasible")

    frequency = counts / q_training
    fet = frozenset(int(j) for j in range(topology.n_et) if frequency[j] >= threshold)
    frozen = GroupDivision(met_set=frozenset(range(topology.n_et)) - fet, fet_set=fet)
    return TrainingResult(fet_frequency=frequency, frozen_division=frozen, slots_used=slots_used)


def longterm_stage(
    topology,
    seed: int,
    division: GroupDivision,
    q_longterm: int,
    params: SystemParams | None = None,
    options: SolverOptions | None = None,
) -> list[PowerReport]:
    """Run `q_longterm` slots under a frozen division with silent FETs.

    Frozen FET channel columns are zeroed before each build: their floors
    are geometric, so results cannot depend on what those ETs would have
    reported.  Infeasible slots yield NaN reports with `feasible` unset.
    """
    if q_longterm < 0:
        raise ValueError("q_longterm must be nonnegative")
    params = params or SystemParams()
    division.validate_for(topology.n_et)
    reports = []
    for slot in range(q_longterm):
        channels = mask_fet_channels(draw_channels(topology, seed, slot), division)
        report, _ = solve_division(topology, channels, division, params, options)
        reports.append(report)
    return reports
