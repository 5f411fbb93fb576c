"""Compare the compiled and numpy kernels on identical inputs.

    python3 benchmarks/bench_kernels.py [--trials N] [--repeat R]

Prints the best wall time of each backend and checks both return the same
answers.
"""

import argparse
import time

import numpy as np

from povm_labeler import _pykernels, trine, uniform_observable
from povm_labeler.simulator import _compile, custom_strategy, sequential_three_effect

try:
    from povm_labeler import _ckernels
except ImportError:
    _ckernels = None


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        start = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - start)
    return min(times), out


def bench_trials(trials, repeat):
    obs = trine()
    comp = _compile(obs, sequential_three_effect(obs).probe_at, 2)
    rng = np.random.default_rng(0)
    hidden = rng.integers(0, 6, size=trials, dtype=np.int64)
    uniforms = rng.random((trials, 2))
    ok = rng.integers(0, 2, size=(6, 9), dtype=np.uint8)
    args = (comp.cum, comp.next_probe, comp.offsets, ok, hidden, uniforms)
    yield "run_trials", f"{trials} trials, 2 adaptive shots", args, "run_trials"


def bench_tables():
    for n, shots in ((4, 4), (5, 4), (6, 3)):
        obs = uniform_observable(n, d=3)
        rng = np.random.default_rng(n)
        probes = [v / np.linalg.norm(v) for v in rng.standard_normal((shots, 3))]
        comp = _compile(obs, lambda prefix: probes[len(prefix)], shots)
        args = (comp.lik, comp.next_probe, comp.offsets, shots, 1e-12)
        yield "map_decisions", f"n={n}, {shots} shots, {n**shots} tuples", args, "map_decisions"


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--trials", type=int, default=2_000_000)
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()

    if _ckernels is None:
        print("compiled extension not built; only the numpy backend is available")
    print(f"{'kernel':<14} {'case':<38} {'numpy s':>9} {'cython s':>9} {'speedup':>8} same")
    for name, case, kargs, attr in [*bench_trials(args.trials, args.repeat), *bench_tables()]:
        t_py, out_py = best_of(lambda: getattr(_pykernels, attr)(*kargs), args.repeat)
        if _ckernels is None:
            print(f"{name:<14} {case:<38} {t_py:9.4f} {'-':>9} {'-':>8} -")
            continue
        t_c, out_c = best_of(lambda: getattr(_ckernels, attr)(*kargs), args.repeat)
        same = bool(np.array_equal(out_py, out_c))
        print(f"{name:<14} {case:<38} {t_py:9.4f} {t_c:9.4f} {t_py / t_c:7.1f}x {same}")


if __name__ == "__main__":
    main()
