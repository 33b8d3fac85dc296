"""Same team, different objectives, different relay layouts.

Optimizes one fixed 5-task / 4-relay team three times: once weighting
all commodities equally (an ad-hoc mesh), and twice with a one-hot
weight so a single agent acts as the access point everyone routes to.
Uniform weights disperse the relays; one-hot weights pull them toward
the chosen access point.
"""

import numpy as np

from relayflow import ScenarioConfig, ascend, spawn_scenario, weight_preset


def mean_distance_to(positions, anchor):
    return float(np.linalg.norm(positions - anchor, axis=1).mean())


def main():
    scenario = spawn_scenario(ScenarioConfig(num_task=5, num_relay=4, rng_seed=42))
    print("task agents (km):")
    for i, row in enumerate(scenario.task_positions):
        print(f"  {i}: ({row[0]:.2f}, {row[1]:.2f})")

    runs = {"adhoc": "adhoc", "ap:2": "ap:2", "ap:4": "ap:4"}
    finals = {}
    for label, preset in runs.items():
        trace = ascend(scenario, weight_preset(preset, 5))
        finals[label] = trace.final_relay_positions
        print(f"\n--- weights {label} ---")
        print(f"utility {trace.initial_phi:.4f} -> {trace.final_phi:.4f} "
              f"in {trace.iterations} iterations")
        for row in trace.final_relay_positions:
            print(f"  relay ({row[0]:.2f}, {row[1]:.2f})")

    for label, ap_index in [("ap:2", 2), ("ap:4", 4)]:
        anchor = scenario.task_positions[ap_index]
        d_focus = mean_distance_to(finals[label], anchor)
        d_adhoc = mean_distance_to(finals["adhoc"], anchor)
        print(f"\nmean relay distance to agent {ap_index}: "
              f"{d_focus:.3f} km with {label} weights vs {d_adhoc:.3f} km with adhoc")


if __name__ == "__main__":
    main()
