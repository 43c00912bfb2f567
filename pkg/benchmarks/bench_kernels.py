"""Time the batch IBR kernel under each backend.

    python3 benchmarks/bench_kernels.py [--starts 20000] [--repeat 5]

Runs the same batch of starting points through the compiled kernel, the
lock-step numpy fallback and (on a smaller slice) the plain-Python loop,
checks that every backend returns identical outcome codes, and prints the
best wall time of each.
"""

import argparse
import time

import numpy as np

from trustgame import _kernels
from trustgame.game import GameParams
from trustgame.ibr import IbrConfig, OutcomeKind, sample_initial_conditions


def best_time(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--starts", type=int, default=20000)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    # slow geometric contraction: most runs use the whole iteration budget
    p = GameParams([0.8, 0.0], [0.0, 0.0], [0.3, -0.2], [-0.35, 0.0])
    cfg = IbrConfig()
    starts = sample_initial_conditions(p, args.starts, 1.6, seed=0)

    def run(backend, s=starts):
        return _kernels.ibr_terminal_batch(
            p.y_hat, p.mu, p.zeta, p.y_attack, s,
            cfg.max_iter, cfg.alpha_tol, cfg.tau_one, cfg.divergence_norm, backend=backend,
        )

    results = {}
    if _kernels.HAVE_NUMBA:
        run("numba", starts[:2])  # compile (or load from cache) outside the timing
        results["numba"] = best_time(lambda: run("numba"), args.repeat)
    results["numpy"] = best_time(lambda: run("numpy"), args.repeat)
    small = starts[: max(1, args.starts // 20)]
    t_py, out_py = best_time(lambda: run("python", small), 1)

    kinds = {name: out[0] for name, (_, out) in results.items()}
    ref = kinds["numpy"]
    for name, k in kinds.items():
        assert np.array_equal(k, ref), f"{name} outcome codes differ from numpy"
    assert np.array_equal(out_py[0], ref[: small.shape[0]]), "python outcome codes differ"

    print(f"{args.starts} starts, max_iter={cfg.max_iter}")
    for name, (t, _) in results.items():
        print(f"  {name:<6} {t * 1e3:9.2f} ms   {t / args.starts * 1e6:8.3f} us/start")
    print(f"  {'python':<6} {t_py * 1e3:9.2f} ms   {t_py / small.shape[0] * 1e6:8.3f} us/start "
          f"({small.shape[0]} starts)")
    if "numba" in results:
        print(f"  numba speedup over numpy: {results['numpy'][0] / results['numba'][0]:.1f}x")
    codes, counts = np.unique(ref, return_counts=True)
    print("  outcomes:", ", ".join(f"{OutcomeKind(int(c)).label}={int(n)}" for c, n in zip(codes, counts)))


if __name__ == "__main__":
    main()
