"""Compare the numba and pure-numpy SVI kernels.

    python benchmarks/bench_kernels.py [--iters 5000] [--repeats 3]

Each case runs ``--iters`` SVI steps from the same start with both kernels,
checks that the two end states agree, and reports the best wall time of
``--repeats`` runs. The numba kernel is compiled before timing.
"""

import argparse
import time

import numpy as np

from blmix.generative import MixtureHyperparams, sample_corpus
from blmix.inference import init_state, svi_run_block
from blmix.inference import _kernels
from blmix.inference.updates import as_count_matrix

CASES = [
    # name, G, p, n, mean document length
    ("synthetic", 3, 30, 600, 40),
    ("reuters-like", 5, 754, 750, 28),
    ("bbcsport-like", 5, 506, 737, 120),
]


def run_case(name, G, p, n, length, iters, repeats, prior):
    rng = np.random.default_rng(0)
    if prior == "bl":
        hyper = MixtureHyperparams.beta_liouville(G, p, delta=-0.3)
        kernels = {"numba": _kernels.svi_chunk_bl_numba, "numpy": _kernels.svi_chunk_bl_numpy}
    else:
        hyper = MixtureHyperparams.dirichlet(G, p)
        kernels = {"numba": _kernels.svi_chunk_dirichlet_numba, "numpy": _kernels.svi_chunk_dirichlet_numpy}
    Y = as_count_matrix(sample_corpus(hyper, n, length, rng=rng).dtm)
    start = init_state(hyper, n, p, rng)
    samples = rng.integers(n, size=iters)

    # compile outside the timed region
    svi_run_block(start.copy(), Y, hyper, samples[:1], 1, 0.6, kernel=kernels["numba"])

    times, finals = {}, {}
    for label, kernel in kernels.items():
        best = np.inf
        for _ in range(repeats):
            state = start.copy()
            t0 = time.perf_counter()
            svi_run_block(state, Y, hyper, samples, 1, 0.6, kernel=kernel)
            best = min(best, time.perf_counter() - t0)
        times[label] = best
        finals[label] = state.topic_params()
    agree = np.allclose(finals["numba"], finals["numpy"], rtol=1e-9, atol=1e-12)
    return times, agree


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--iters", type=int, default=5000)
    parser.add_argument("--repeats", type=int, default=3)
    args = parser.parse_args()
    print(f"{'case':<15} {'prior':<9} {'G':>2} {'p':>4} {'n':>4}  {'numba s':>8} {'numpy s':>8} {'speedup':>8}  agree")
    for name, G, p, n, length in CASES:
        for prior in ("bl", "dirichlet"):
            times, agree = run_case(name, G, p, n, length, args.iters, args.repeats, prior)
            speedup = times["numpy"] / times["numba"]
            print(f"{name:<15} {prior:<9} {G:>2} {p:>4} {n:>4}  {times['numba']:>8.3f} {times['numpy']:>8.3f} "
                  f"{speedup:>7.1f}x  {agree}")


if __name__ == "__main__":
    main()
