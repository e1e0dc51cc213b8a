"""How lambda(eps) and the realized amplitude behave as eps shrinks.

Compares the cubic example, whose branch stays on the crossing angle
because the kernel line is invariant, with the tailed family, whose branch
bends. Usage: python3 scripts/branch_amplitude.py [--n N]
"""

import argparse

from hombif import catalog, homoclinic

EPS = (1e-1, 3e-2, 1e-2, 3e-3, 1e-3, 1e-4, 1e-5)


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--n", type=int, default=40, help="truncation length on each side")
    args = p.parse_args()
    for name in ("paper_example_s7_cubic", "s7_tail", "s7_block"):
        fam = catalog.get(name)
        crossing = homoclinic.scan(fam, 64, args.n, args.n).crossings[0]
        print(f"{name}: crossing of d in [{crossing.lo:.10f}, {crossing.hi:.10f}]")
        print(f"  {'eps':>8} {'lambda - lambda*':>18} {'sup/eps - 1':>12} {'residual':>10} {'iters':>5}")
        for eps in EPS:
            seg = homoclinic.branch_solve(fam, crossing, eps, args.n, args.n)
            print(f"  {eps:8.0e} {seg.theta - crossing.estimate:18.10e} {seg.amplitude / eps - 1:12.2e} "
                  f"{seg.residual:10.1e} {seg.iterations:5d}")


if __name__ == "__main__":
    main()
