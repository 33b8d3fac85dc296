"""Shadow-price ascent over relay positions.

Each round solves the flow problem at the current configuration, reads
the capacity-row shadow prices, and assembles a climb direction for
every relay: edges whose capacity the optimum is straining pull the
relay along the capacity gradient of that edge.  Relays step along the
direction with a geometrically decaying step size until the utility
stops changing.

The direction for relay i is

    sum_j (mu[i, j] + mu[j, i]) * grad_{x_i} rate(x_i, x_j)

which is a direction of local increase of the team utility because the
duals measure the sensitivity of the optimal value to each capacity
bound.  At configurations where the optimal duals are not unique the
solver returns centered duals, and the formula still yields a direction
of local increase, not necessarily the steepest one.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from .capacity import gradient_factor_matrix
from .lp import SolverOptions
from .mcfp import FlowSolution, McfpSolveError, build_instance, solve_mcfp
from .network import Scenario, validate_weights


@dataclass(frozen=True)
class AscentConfig:
    """Step schedule and stopping rule for the ascent loop.

    ``backtracking`` is off by default, matching the plain fixed
    schedule; switching it on halves the step until the utility does
    not decrease (at most ``max_halvings`` times), which makes the
    recorded utility nondecreasing.
    """

    alpha0: float = 0.4
    decay: float = 0.97
    tol: float = 1e-5
    max_iters: int = 500
    backtracking: bool = False
    max_halvings: int = 20

    def __post_init__(self) -> None:
        if self.alpha0 <= 0:
            raise ValueError("alpha0 must be positive")
        if not 0 < self.decay <= 1:
            raise ValueError("decay must lie in (0, 1]")
        if self.tol <= 0:
            raise ValueError("tol must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")


@dataclass(frozen=True)
class AscentRecord:
    iteration: int
    phi: float
    relay_positions: np.ndarray  # positions the solve was run at
    gradient: np.ndarray
    alpha: float  # step size applied after this solve


@dataclass
class AscentTrace:
    records: list
    final_relay_positions: np.ndarray
    converged: bool

    @property
    def iterations(self) -> int:
        return len(self.records)

    @property
    def initial_phi(self) -> float:
        return self.records[0].phi

    @property
    def final_phi(self) -> float:
        return self.records[-1].phi

    def phi_series(self) -> np.ndarray:
        return np.array([rec.phi for rec in self.records])

    def to_csv(self) -> str:
        num_relay = self.final_relay_positions.shape[0]
        cols = ["iteration", "phi", "alpha"]
        for r in range(num_relay):
            cols += [f"relay{r}_x", f"relay{r}_y"]
        lines = [",".join(cols)]
        for rec in self.records:
            row = [str(rec.iteration), repr(rec.phi), repr(rec.alpha)]
            for r in range(num_relay):
                row += [repr(float(rec.relay_positions[r, 0])), repr(float(rec.relay_positions[r, 1]))]
            lines.append(",".join(row))
        return "\n".join(lines) + "\n"

    def to_json_dict(self) -> dict:
        return {
            "converged": self.converged,
            "iterations": self.iterations,
            "final_relay_positions": self.final_relay_positions.tolist(),
            "records": [
                {
                    "iteration": rec.iteration,
                    "phi": rec.phi,
                    "alpha": rec.alpha,
                    "relay_positions": rec.relay_positions.tolist(),
                    "gradient": rec.gradient.tolist(),
                }
                for rec in self.records
            ],
        }

    def save(self, csv_path=None, json_path=None) -> None:
        if csv_path is not None:
            Path(csv_path).write_text(self.to_csv(), encoding="utf-8")
        if json_path is not None:
            Path(json_path).write_text(
                json.dumps(self.to_json_dict(), indent=2) + "\n", encoding="utf-8"
            )


class AscentError(RuntimeError):
    """Solver failure mid-ascent; carries the trace gathered so far."""

    def __init__(self, message: str, partial_trace: Optional[AscentTrace] = None):
        super().__init__(message)
        self.partial_trace = partial_trace


def gradient_from_duals(sol: FlowSolution, scenario: Scenario) -> np.ndarray:
    """Climb direction per relay from the capacity shadow prices."""
    pts = scenario.positions()
    factors = gradient_factor_matrix(scenario.capacity_model, pts)
    weights = (sol.mu + sol.mu.T) * factors
    diff = pts[:, None, :] - pts[None, :, :]
    directions = np.einsum("ij,ijd->id", weights, diff)
    return directions[scenario.num_task :]


def team_utility(
    scenario: Scenario, weights, opts: Optional[SolverOptions] = None
) -> float:
    """Optimal flow utility of a configuration (one solve)."""
    return solve_mcfp(build_instance(scenario, weights), opts).phi


def finite_difference_phi(
    scenario: Scenario,
    weights,
    h: float = 1e-4,
    opts: Optional[SolverOptions] = None,
) -> np.ndarray:
    """Central-difference estimate of the utility gradient per relay.

    Costs two solves per relay coordinate; serves as the independent
    check of :func:`gradient_from_duals`.
    """
    if h <= 0:
        raise ValueError("step h must be positive")
    w = validate_weights(weights, len(scenario.commodities))
    out = np.zeros_like(scenario.relay_positions)
    for rel in range(scenario.num_relay):
        for dim in range(2):
            for sign in (1.0, -1.0):
                bumped = scenario.relay_positions.copy()
                bumped[rel, dim] += sign * h
                out[rel, dim] += sign * team_utility(
                    scenario.with_relay_positions(bumped), w, opts
                )
    return out / (2.0 * h)


def ascend(
    scenario: Scenario,
    weights,
    config: Optional[AscentConfig] = None,
    opts: Optional[SolverOptions] = None,
) -> AscentTrace:
    """Run the ascent loop and return the per-iteration trace.

    Task positions never move.  Every iteration records the utility and
    the configuration it was evaluated at, then steps the relays, so
    the last recorded utility belongs to the configuration just before
    the final step.  The loop stops when the utility change between
    consecutive solves drops below ``config.tol``, or at
    ``config.max_iters``.
    """
    cfg = config if config is not None else AscentConfig()
    w = validate_weights(weights, len(scenario.commodities))

    relay_pos = scenario.relay_positions.copy()
    records: list[AscentRecord] = []
    alpha = cfg.alpha0
    phi_prev = -np.inf
    delta_phi = np.inf
    cached_sol: Optional[FlowSolution] = None

    while abs(delta_phi) >= cfg.tol and len(records) < cfg.max_iters:
        current = scenario.with_relay_positions(relay_pos)
        try:
            sol = cached_sol if cached_sol is not None else solve_mcfp(
                build_instance(current, w), opts
            )
        except McfpSolveError as exc:
            trace = AscentTrace(records, relay_pos.copy(), converged=False)
            raise AscentError(f"solve failed at iteration {len(records)}: {exc}", trace) from exc
        cached_sol = None

        direction = gradient_from_duals(sol, current)
        records.append(
            AscentRecord(
                iteration=len(records),
                phi=sol.phi,
                relay_positions=relay_pos.copy(),
                gradient=direction.copy(),
                alpha=alpha,
            )
        )

        if cfg.backtracking:
            step = alpha
            accepted = False
            for _ in range(cfg.max_halvings + 1):
                candidate = relay_pos + step * direction
                try:
                    trial_sol = solve_mcfp(
                        build_instance(scenario.with_relay_positions(candidate), w), opts
                    )
                except McfpSolveError as exc:
                    trace = AscentTrace(records, relay_pos.copy(), converged=False)
                    raise AscentError(
                        f"solve failed during backtracking at iteration {len(records) - 1}: {exc}",
                        trace,
                    ) from exc
                if trial_sol.phi >= sol.phi:
                    relay_pos = candidate
                    cached_sol = trial_sol
                    accepted = True
                    break
                step *= 0.5
            if not accepted:
                # no improving step found: stay put, the loop will stop
                cached_sol = sol
        else:
            relay_pos = relay_pos + alpha * direction

        delta_phi = sol.phi - phi_prev
        phi_prev = sol.phi
        alpha *= cfg.decay

    return AscentTrace(
        records=records,
        final_relay_positions=relay_pos,
        converged=abs(delta_phi) < cfg.tol,
    )
