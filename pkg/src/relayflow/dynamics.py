"""Mobile-team simulation: drifting task agents, chasing relay agents.

Task agents follow a random-acceleration model inside a square box,
bouncing off its walls; relay agents chase the shadow-price climb
direction under a hard speed cap.  In lockstep mode every tick solves
the flow problem at the tick's exact snapshot, which makes runs fully
reproducible from the seed.  In async mode a separate solver thread
works on the latest snapshot while the clock advances in real time and
relays coast on the most recent finished direction; async runs are not
deterministic and are meant for demonstration only.
"""

from __future__ import annotations

import json
import threading
import time as _time
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from .ascent import AscentConfig, ascend, gradient_from_duals
from .lp import SolverOptions
from .mcfp import McfpSolveError, build_instance, solve_mcfp
from .network import Scenario, area_side, validate_weights


@dataclass(frozen=True)
class MotionConfig:
    """Random-acceleration motion parameters.

    ``accel_std`` is the acceleration noise level ``a`` in km/s^2.  By
    default it is read as the per-component variance of the sampled
    acceleration (components drawn from N(0, a), standard deviation
    sqrt(a)); set ``accel_as_variance`` to False to read it as the
    standard deviation itself.  ``v_max`` caps relay speed in km/s.
    ``box_size`` is the side of the navigation square for task agents;
    when omitted it defaults to the spawn-area rule sqrt(num_task).
    ``pinned_tasks`` lists task agents that do not move at all, such as
    a fixed access point.
    """

    dt: float = 0.2
    accel_std: float = 0.01
    v_max: float = 0.09
    box_size: Optional[float] = None
    duration: float = 20.0
    rng_seed: int = 0
    pinned_tasks: tuple[int, ...] = ()
    accel_as_variance: bool = True

    def __post_init__(self) -> None:
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.v_max < 0:
            raise ValueError("v_max cannot be negative")
        if self.accel_std < 0:
            raise ValueError("accel_std cannot be negative")
        if self.box_size is not None and self.box_size <= 0:
            raise ValueError("box_size must be positive")
        if self.duration < 0:
            raise ValueError("duration cannot be negative")

    @property
    def accel_sigma(self) -> float:
        return float(np.sqrt(self.accel_std)) if self.accel_as_variance else float(self.accel_std)

    @property
    def num_steps(self) -> int:
        return int(round(self.duration / self.dt))


@dataclass(frozen=True)
class SimState:
    time: float
    task_positions: np.ndarray
    task_velocities: np.ndarray
    relay_positions: np.ndarray
    directions: np.ndarray
    phi: float


@dataclass
class SimTimeline:
    states: list
    box_side: float
    mode: str
    deterministic: bool

    @property
    def num_snapshots(self) -> int:
        return len(self.states)

    def phi_series(self) -> np.ndarray:
        return np.array([st.phi for st in self.states])

    def times(self) -> np.ndarray:
        return np.array([st.time for st in self.states])

    def to_csv(self) -> str:
        if not self.states:
            return "tick,time_s,phi\n"
        num_task = self.states[0].task_positions.shape[0]
        num_relay = self.states[0].relay_positions.shape[0]
        cols = ["tick", "time_s", "phi"]
        for i in range(num_task):
            cols += [f"task{i}_x", f"task{i}_y"]
        for i in range(num_relay):
            cols += [f"relay{i}_x", f"relay{i}_y"]
        lines = [",".join(cols)]
        for tick, st in enumerate(self.states):
            row = [str(tick), repr(st.time), repr(st.phi)]
            for i in range(num_task):
                row += [repr(float(st.task_positions[i, 0])), repr(float(st.task_positions[i, 1]))]
            for i in range(num_relay):
                row += [repr(float(st.relay_positions[i, 0])), repr(float(st.relay_positions[i, 1]))]
            lines.append(",".join(row))
        return "\n".join(lines) + "\n"

    def to_json_dict(self) -> dict:
        return {
            "mode": self.mode,
            "deterministic": self.deterministic,
            "box_side": self.box_side,
            "snapshots": [
                {
                    "time": st.time,
                    "phi": st.phi,
                    "task_positions": st.task_positions.tolist(),
                    "task_velocities": st.task_velocities.tolist(),
                    "relay_positions": st.relay_positions.tolist(),
                    "directions": st.directions.tolist(),
                }
                for st in self.states
            ],
        }

    def save(self, csv_path=None, json_path=None) -> None:
        if csv_path is not None:
            Path(csv_path).write_text(self.to_csv(), encoding="utf-8")
        if json_path is not None:
            Path(json_path).write_text(
                json.dumps(self.to_json_dict(), indent=2) + "\n", encoding="utf-8"
            )


class SimulationError(RuntimeError):
    """Solver failure mid-run; carries the timeline gathered so far."""

    def __init__(self, message: str, partial_timeline: Optional[SimTimeline] = None):
        super().__init__(message)
        self.partial_timeline = partial_timeline


def _reflect(position: float, velocity: float, side: float) -> tuple[float, float]:
    # mirror across whichever wall was crossed; repeat in case the step
    # overshoots the whole box
    while position < 0.0 or position > side:
        if position < 0.0:
            position = -position
        else:
            position = 2.0 * side - position
        velocity = -velocity
    return position, velocity


def step_task(
    positions: np.ndarray,
    velocities: np.ndarray,
    cfg: MotionConfig,
    rng: np.random.Generator,
    box_side: float,
) -> tuple[np.ndarray, np.ndarray]:
    """One motion tick: sample accelerations, integrate, bounce off walls."""
    num = positions.shape[0]
    accel = rng.normal(0.0, cfg.accel_sigma, size=(num, 2))
    pinned = np.zeros(num, dtype=bool)
    if cfg.pinned_tasks:
        pinned[list(cfg.pinned_tasks)] = True
    accel[pinned] = 0.0

    new_vel = velocities + accel * cfg.dt
    new_pos = positions + velocities * cfg.dt + 0.5 * accel * cfg.dt**2
    new_vel[pinned] = 0.0
    new_pos[pinned] = positions[pinned]

    for i in range(num):
        if pinned[i]:
            continue
        for dim in range(2):
            new_pos[i, dim], new_vel[i, dim] = _reflect(
                new_pos[i, dim], new_vel[i, dim], box_side
            )
    return new_pos, new_vel


def step_relay(positions: np.ndarray, directions: np.ndarray, cfg: MotionConfig) -> np.ndarray:
    """Move each relay along its direction at speed min(|d|, v_max)."""
    out = positions.copy()
    for i in range(positions.shape[0]):
        norm = float(np.linalg.norm(directions[i]))
        if norm == 0.0:
            continue
        speed = min(norm, cfg.v_max)
        out[i] = positions[i] + speed * (directions[i] / norm) * cfg.dt
    return out


def run_simulation(
    scenario: Scenario,
    weights,
    cfg: MotionConfig,
    mode: str = "lockstep",
    pre_optimize: bool = True,
    ascent_config: Optional[AscentConfig] = None,
    opts: Optional[SolverOptions] = None,
) -> SimTimeline:
    """Simulate a mobile team for ``cfg.duration`` seconds.

    Relays start from positions optimized for the initial task layout
    (``pre_optimize``), then every tick they chase the latest climb
    direction while task agents drift.  A run of T seconds at step dt
    yields round(T/dt) + 1 snapshots including the initial one.
    """
    if mode not in ("lockstep", "async"):
        raise ValueError(f"unknown mode {mode!r}")
    w = validate_weights(weights, len(scenario.commodities))
    box_side = cfg.box_size if cfg.box_size is not None else area_side(scenario.num_task)
    if np.any(scenario.task_positions < 0) or np.any(scenario.task_positions > box_side):
        raise ValueError("task agents must start inside the navigation box")
    if cfg.pinned_tasks and max(cfg.pinned_tasks) >= scenario.num_task:
        raise ValueError("pinned task index out of range")

    if pre_optimize and scenario.num_relay:
        trace = ascend(scenario, w, ascent_config, opts)
        scenario = scenario.with_relay_positions(trace.final_relay_positions)

    if mode == "lockstep":
        return _run_lockstep(scenario, w, cfg, box_side, opts)
    return _run_async(scenario, w, cfg, box_side, opts)


def _run_lockstep(scenario, w, cfg, box_side, opts) -> SimTimeline:
    rng = np.random.default_rng(cfg.rng_seed)
    task_pos = scenario.task_positions.copy()
    task_vel = np.zeros_like(task_pos)
    relay_pos = scenario.relay_positions.copy()
    states: list[SimState] = []

    for tick in range(cfg.num_steps + 1):
        current = Scenario(
            task_pos, relay_pos, scenario.capacity_model, scenario.commodities
        )
        try:
            sol = solve_mcfp(build_instance(current, w), opts)
        except McfpSolveError as exc:
            timeline = SimTimeline(states, box_side, "lockstep", deterministic=True)
            raise SimulationError(f"solve failed at tick {tick}: {exc}", timeline) from exc
        directions = gradient_from_duals(sol, current)
        states.append(
            SimState(
                time=tick * cfg.dt,
                task_positions=task_pos.copy(),
                task_velocities=task_vel.copy(),
                relay_positions=relay_pos.copy(),
                directions=directions.copy(),
                phi=sol.phi,
            )
        )
        if tick == cfg.num_steps:
            break
        task_pos, task_vel = step_task(task_pos, task_vel, cfg, rng, box_side)
        relay_pos = step_relay(relay_pos, directions, cfg)

    return SimTimeline(states, box_side, "lockstep", deterministic=True)


def _run_async(scenario, w, cfg, box_side, opts) -> SimTimeline:
    """Two-thread variant: the clock never waits for the solver.

    The solver thread repeatedly grabs the most recent snapshot and
    publishes (phi, directions) when done; relays move on whatever
    direction is newest, which may lag several ticks on slow solves.
    """
    rng = np.random.default_rng(cfg.rng_seed)
    task_pos = scenario.task_positions.copy()
    task_vel = np.zeros_like(task_pos)
    relay_pos = scenario.relay_positions.copy()

    lock = threading.Lock()
    latest_snapshot = {"task": task_pos.copy(), "relay": relay_pos.copy()}
    latest_output = {"phi": np.nan, "directions": np.zeros_like(relay_pos)}
    stop = threading.Event()
    failure: list[Exception] = []

    def solver_loop() -> None:
        while not stop.is_set():
            with lock:
                snap_task = latest_snapshot["task"].copy()
                snap_relay = latest_snapshot["relay"].copy()
            current = Scenario(
                snap_task, snap_relay, scenario.capacity_model, scenario.commodities
            )
            try:
                sol = solve_mcfp(build_instance(current, w), opts)
                directions = gradient_from_duals(sol, current)
            except McfpSolveError as exc:  # surfaced after the run
                failure.append(exc)
                return
            with lock:
                latest_output["phi"] = sol.phi
                latest_output["directions"] = directions

    worker = threading.Thread(target=solver_loop, daemon=True)
    worker.start()

    states: list[SimState] = []
    next_deadline = _time.monotonic()
    for tick in range(cfg.num_steps + 1):
        with lock:
            latest_snapshot["task"] = task_pos.copy()
            latest_snapshot["relay"] = relay_pos.copy()
            phi = latest_output["phi"]
            directions = latest_output["directions"].copy()
        states.append(
            SimState(
                time=tick * cfg.dt,
                task_positions=task_pos.copy(),
                task_velocities=task_vel.copy(),
                relay_positions=relay_pos.copy(),
                directions=directions.copy(),
                phi=phi,
            )
        )
        if tick == cfg.num_steps or failure:
            break
        task_pos, task_vel = step_task(task_pos, task_vel, cfg, rng, box_side)
        relay_pos = step_relay(relay_pos, directions, cfg)
        next_deadline += cfg.dt
        pause = next_deadline - _time.monotonic()
        if pause > 0:
            _time.sleep(pause)

    stop.set()
    worker.join(timeout=10.0)
    timeline = SimTimeline(states, box_side, "async", deterministic=False)
    if failure:
        raise SimulationError(f"solver thread failed: {failure[0]}", timeline)
    return timeline
