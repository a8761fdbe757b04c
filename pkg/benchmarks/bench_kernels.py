"""Benchmark the compiled kernel backend against the pure-numpy fallback.

Times the operations that dominate the SPSA inner loops and prints the
per-call cost and speedup. Run from the repo root:

    python3 benchmarks/bench_kernels.py [--repeats 20000]
"""

import argparse
import time

import numpy as np

from criticalcircuits import ansatz
from criticalcircuits.kernels import FP_MIXED, get_backend


def _timer(fn, args, repeats):
    # warm up, then best-of-3 batches
    for _ in range(5):
        fn(*args)
    best = np.inf
    for _ in range(3):
        t0 = time.perf_counter()
        for _ in range(repeats):
            fn(*args)
        best = min(best, (time.perf_counter() - t0) / repeats)
    return best


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeats", type=int, default=20000)
    args = ap.parse_args()

    rng = np.random.default_rng(0)
    p = rng.uniform(-np.pi, np.pi, 8)
    pp = rng.uniform(-np.pi, np.pi, 8)
    W = ansatz.trotter_gate(ansatz.HamiltonianParams(1.0, 0.2), 0.1)
    V = np.eye(4, dtype=complex)

    backends = {}
    for name in ("fast", "pure"):
        try:
            backends[name] = get_backend(name)
        except (ImportError, ValueError):
            print(f"backend {name!r} unavailable, skipping")
    if not backends:
        return

    cases = [
        ("unitary_from_angles", lambda b: (b.unitary_from_angles, (p,))),
        ("mps_from_angles", lambda b: (b.mps_from_angles, (p,))),
        ("mixed_transfer", lambda b: (
            b.mixed_transfer, (b.mps_from_angles(p), b.mps_from_angles(pp)))),
        ("dressed_transfer", lambda b: (
            b.dressed_transfer, (b.mps_from_angles(p), b.mps_from_angles(pp), W))),
        ("dressed_amp", lambda b: (b.dressed_amp, (p, pp, W, 2, 0))),
        ("evolution_probs", lambda b: (b.evolution_probs, (p, pp, W, 2, FP_MIXED, V))),
        ("sweep_terms", lambda b: (b.sweep_terms, (p, pp, 1.0, 1.0))),
    ]

    print(f"{'kernel':<20} " + " ".join(f"{n + ' [us]':>12}" for n in backends)
          + ("      speedup" if len(backends) == 2 else ""))
    for label, make in cases:
        times = {}
        for name, mod in backends.items():
            fn, fargs = make(mod)
            times[name] = _timer(fn, fargs, args.repeats)
        row = f"{label:<20} " + " ".join(f"{times[n] * 1e6:12.2f}" for n in backends)
        if len(times) == 2:
            row += f" {times['pure'] / times['fast']:11.1f}x"
        print(row)

    # agreement check: the two backends must compute the same numbers
    if len(backends) == 2:
        f, g = backends["fast"], backends["pure"]
        worst = 0.0
        for label, make in cases:
            ff, fa = make(f)
            gf, ga = make(g)
            worst = max(worst, float(np.max(np.abs(
                np.asarray(ff(*fa)) - np.asarray(gf(*ga))))))
        print(f"max |fast - pure| over all kernels: {worst:.2e}")


if __name__ == "__main__":
    main()
