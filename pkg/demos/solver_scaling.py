"""How the flow-solve time grows with team size.

Times one verified flow solve per spawned scenario at several team
sizes, with relays at half the task count.  Absolute numbers depend
entirely on the machine; the point is the growth shape.
"""

import time

import numpy as np

from relayflow import ScenarioConfig, build_instance, solve_mcfp, spawn_scenario


def main(sizes=(2, 5, 10, 15), repeats=5):
    print(f"{'tasks':>6} {'relays':>7} {'mean':>10} {'std':>10}")
    for num_task in sizes:
        num_relay = num_task // 2
        samples = []
        for rep in range(repeats):
            scenario = spawn_scenario(
                ScenarioConfig(num_task=num_task, num_relay=num_relay, rng_seed=rep)
            )
            inst = build_instance(scenario, np.ones(num_task))
            start = time.perf_counter()
            solve_mcfp(inst)
            samples.append(time.perf_counter() - start)
        samples = np.asarray(samples)
        print(f"{num_task:>6} {num_relay:>7} {samples.mean():>9.4f}s {samples.std():>9.4f}s")


if __name__ == "__main__":
    main()
