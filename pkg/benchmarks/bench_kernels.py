"""Time the compiled and pure-numpy simulator kernels on the same inputs.

Usage::

    python3 benchmarks/bench_kernels.py --qubits 3 5 7 --repeat 20
"""

import argparse
import timeit

import numpy as np
from scipy.stats import unitary_group

from mitbench import kernels


def random_density(n, rng):
    a = rng.normal(size=(2**n, 2**n)) + 1j * rng.normal(size=(2**n, 2**n))
    rho = a @ a.conj().T
    return rho / np.trace(rho)


def cases(n, rng):
    u1 = unitary_group.rvs(2, random_state=1)
    u2 = unitary_group.rvs(4, random_state=2)
    rho = random_density(n, rng)
    psi = rng.normal(size=2**n) + 1j * rng.normal(size=2**n)
    q = (0, n - 1)
    return {
        "sv_apply 2q": lambda m: m.sv_apply(psi.copy(), u2, q, n),
        "dm_apply_unitary 1q": lambda m: m.dm_apply_unitary(rho.copy(), u1, (n // 2,), n),
        "dm_apply_unitary 2q": lambda m: m.dm_apply_unitary(rho.copy(), u2, q, n),
        "dm_depolarize 2q": lambda m: m.dm_depolarize(rho.copy(), 0.01, q, n),
        "dm_thermal": lambda m: m.dm_thermal(rho.copy(), 0, n, 0.01, 0.98),
    }


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--qubits", type=int, nargs="+", default=[3, 5, 7])
    p.add_argument("--repeat", type=int, default=20)
    args = p.parse_args(argv)

    impls = kernels.implementations()
    print(f"selected backend: {kernels.BACKEND}; available: {', '.join(sorted(impls))}")
    if "compiled" not in impls:
        print("compiled extension not built; timing the python kernels only")
    rng = np.random.default_rng(0)
    header = f"{'kernel':<22}{'n':>3}" + "".join(f"{name + ' µs':>16}" for name in sorted(impls))
    if len(impls) == 2:
        header += f"{'speed-up':>10}"
    print(header)
    for n in args.qubits:
        for label, fn in cases(n, rng).items():
            times = {}
            for name, mod in sorted(impls.items()):
                fn(mod)  # warm-up
                best = min(timeit.repeat(lambda: fn(mod), number=1, repeat=args.repeat))
                times[name] = best * 1e6
            row = f"{label:<22}{n:>3}" + "".join(f"{times[k]:>16.1f}" for k in sorted(times))
            if len(times) == 2:
                row += f"{times['python'] / times['compiled']:>10.2f}"
            print(row)


if __name__ == "__main__":
    main()
