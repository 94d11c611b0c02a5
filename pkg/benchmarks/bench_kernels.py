"""Throughput of the numba and numpy slot kernels (and the scalar reference).

    python benchmarks/bench_kernels.py --trials 1000000 --repeat 5
"""

import argparse
import time

from qcrtomo import _kernels
from qcrtomo.network import SlotRequest, StarNetwork, run_trials, run_trials_scalar


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        result = fn()
        times.append(time.perf_counter() - t0)
    return min(times), result


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--trials", type=int, default=1_000_000)
    parser.add_argument("--scalar-trials", type=int, default=20_000)
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--workers", type=int, default=1)
    args = parser.parse_args()

    net = StarNetwork.from_rates([0.1, 0.1, 0.3], [0.1, 0.1, 0.3])
    request = SlotRequest(2, 3)
    results = {}
    print(f"{'backend':<10}{'trials':>12}{'best s':>10}{'Mtrials/s':>12}")
    for backend in _kernels.BACKENDS:
        run_trials(net, request, 10, 0, backend=backend)  # compile / warm up
        elapsed, tally = best_of(
            lambda: run_trials(net, request, args.trials, 0, workers=args.workers, backend=backend), args.repeat
        )
        results[backend] = tally
        print(f"{backend:<10}{args.trials:>12}{elapsed:>10.4f}{args.trials / elapsed / 1e6:>12.2f}")

    elapsed, scalar = best_of(lambda: run_trials_scalar(net, request, args.scalar_trials, 0), 1)
    print(f"{'scalar':<10}{args.scalar_trials:>12}{elapsed:>10.4f}{args.scalar_trials / elapsed / 1e6:>12.2f}")

    if len({t.counts for t in results.values()}) != 1:
        raise SystemExit("backends disagree: " + repr({k: v.counts for k, v in results.items()}))
    check = run_trials(net, request, args.scalar_trials, 0)
    if check != scalar:
        raise SystemExit("batch kernel disagrees with the scalar path")
    print("all backends agree")


if __name__ == "__main__":
    main()
