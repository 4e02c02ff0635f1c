"""Compare the numba and numpy kernel flavours.

    python3 benchmarks/bench_kernels.py [--n 4000] [--m 1500] [--repeat 5]

Times each kernel pair on the same inputs (after a warm-up call so JIT
compilation is excluded), checks that both return the same numbers, and
then times a whole ``neo_cc`` run in a fresh interpreter per backend, since
the backend is fixed at import time by ``NEOCC_DISABLE_NUMBA``.
"""
import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from neocc import PlantedConfig, generate_planted, kernels, phase_budgets
from neocc.eval import oracle_params
from neocc.objective import _rcm_means, cocluster_means
from neocc.solver import neo_kmeans_oneway, row_distances_m

FULL_RUN = """
import time
from neocc import NeoParams, PlantedConfig, generate_planted, neo_cc, backend
from neocc.eval import oracle_params
cfg = PlantedConfig(n={n}, m={m}, k=4, l=4, overlap_frac_r=0.2, overlap_frac_c=0.2,
                    outlier_frac_r=0.05, outlier_frac_c=0.05, noise_sd=0.05, seed=0)
X, _, _ = generate_planted(cfg)
ar, br, ac, bc = oracle_params(cfg)
p = NeoParams(k=4, l=4, alpha_r=ar, beta_r=br, alpha_c=ac, beta_c=bc, objective="{kind}", t_max=20, tol=0.0)
neo_cc(X, NeoParams(k=4, l=4, t_max=1))  # warm-up / JIT
t = time.perf_counter()
r = neo_cc(X, p)
print(backend(), time.perf_counter() - t, repr(r.objective))
"""


def best_of(fn, repeat):
    fn()
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=4000)
    ap.add_argument("--m", type=int, default=1500)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    cfg = PlantedConfig(n=args.n, m=args.m, k=4, l=4, overlap_frac_r=0.2, overlap_frac_c=0.2,
                        outlier_frac_r=0.05, outlier_frac_c=0.05, noise_sd=0.05, seed=0)
    X, _, _ = generate_planted(cfg)
    ar, br, ac, bc = oracle_params(cfg)
    U = neo_kmeans_oneway(X, 4, ar, br, t_max=3)
    V = neo_kmeans_oneway(X.T, 4, ac, bc, t_max=3)
    pattern = (*X.pattern(), *U.ragged(), *V.ragged())
    mu = cocluster_means(X, U, V).means
    rcm = _rcm_means(X, U, V)
    D = np.ascontiguousarray(row_distances_m(X, U, V).values)
    n1, n2 = phase_budgets(args.n, ar, br)

    cases = [
        ("objective_m_terms", lambda f: f(*pattern, mu), kernels.objective_m_terms_nb, kernels.objective_m_terms_np),
        ("objective_rcm_terms", lambda f: f(*pattern, *rcm), kernels.objective_rcm_terms_nb,
         kernels.objective_rcm_terms_np),
        ("greedy_select", lambda f: f(D, n1, n2), kernels.greedy_select_nb, kernels.greedy_select_np),
    ]
    print(f"{args.n} x {args.m} dense planted matrix, k = l = 4, best of {args.repeat}")
    print(f"{'kernel':<22}{'numba [ms]':>12}{'numpy [ms]':>12}{'speedup':>10}  agree")
    for name, call, nb, npy in cases:
        a, b = call(nb), call(npy)
        a = a if isinstance(a, tuple) else (a,)
        b = b if isinstance(b, tuple) else (b,)
        agree = all(np.allclose(x, y, rtol=1e-12, atol=1e-9) for x, y in zip(a, b))
        t_nb = best_of(lambda: call(nb), args.repeat)
        t_np = best_of(lambda: call(npy), args.repeat)
        print(f"{name:<22}{1e3 * t_nb:>12.2f}{1e3 * t_np:>12.2f}{t_np / t_nb:>9.1f}x  {agree}")

    print("\nfull neo_cc run (at most 20 iterations, fresh process per backend)")
    for kind in ("M", "RCM"):
        for disable in ("0", "1"):
            env = dict(os.environ, NEOCC_DISABLE_NUMBA=disable)
            if disable == "0":
                env.pop("NEOCC_DISABLE_NUMBA")
            code = FULL_RUN.format(n=args.n, m=args.m, kind=kind)
            out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
            name, secs, obj = out.stdout.split()
            print(f"  NEO-CC-{kind:<4}{name:<7}{float(secs):8.3f} s   objective {float(obj):.10g}")


if __name__ == "__main__":
    main()
