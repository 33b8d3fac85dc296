"""Three small static teams where the right relay placement is obvious.

Walks the optimizer through the classic sanity layouts: a relay between
two task agents should end on the segment midpoint; two relays inside a
square of four task agents should end near its center; and when one
agent sits far from a cluster of three, the relays should form a bridge
to it.  Each run prints the utility trajectory summary and writes the
utility curve as an SVG next to this script.
"""

import pathlib

import numpy as np

from relayflow import CapacityModel, Scenario, ascend, default_commodities, team_utility
from relayflow.svg import save_line_chart

OUT = pathlib.Path(__file__).parent / "out"

LAYOUTS = {
    "pair": (
        "one relay between two task agents",
        np.array([[-1.0, 0.0], [1.0, 0.0]]),
        np.array([[0.3, 0.4]]),
    ),
    "square": (
        "two relays inside a square of four task agents",
        np.array([[0.0, 0.0], [2.0, 0.0], [2.0, 2.0], [0.0, 2.0]]),
        np.array([[0.6, 0.4], [1.5, 1.7]]),
    ),
    "outlier": (
        "two relays bridging a cluster of three to a distant fourth",
        np.array([[0.0, 0.0], [0.8, 0.0], [0.0, 0.8], [3.2, 0.6]]),
        np.array([[0.5, 0.5], [1.4, 0.4]]),
    ),
}


def main():
    OUT.mkdir(exist_ok=True)
    model = CapacityModel()
    for name, (blurb, tasks, relays) in LAYOUTS.items():
        scenario = Scenario(tasks, relays, model, default_commodities(len(tasks)))
        weights = np.ones(len(tasks))
        no_relay = team_utility(
            Scenario(tasks, np.zeros((0, 2)), model, scenario.commodities), weights
        )
        trace = ascend(scenario, weights)
        print(f"\n=== {name}: {blurb} ===")
        print(f"iterations: {trace.iterations} (converged: {trace.converged})")
        print(f"utility: {trace.initial_phi:.4f} -> {trace.final_phi:.4f} "
              f"(without relays: {no_relay:.4f})")
        print("final relay positions (km):")
        for row in trace.final_relay_positions:
            print(f"  ({row[0]:+.3f}, {row[1]:+.3f})")
        svg_path = OUT / f"static_{name}_utility.svg"
        save_line_chart(
            svg_path,
            [rec.iteration for rec in trace.records],
            [rec.phi for rec in trace.records],
            title=f"{name}: utility per iteration",
            x_label="iteration",
            y_label="utility",
        )
        print(f"wrote {svg_path}")


if __name__ == "__main__":
    main()
