"""Tabulate small group cohomology and restricted obstruction classes.

The second table shows why antisymmetric forms are compared with coefficients
Z/N^2: their class is visible in H^3(G, Z/N) but dies in H^3(G, Q/Z).
"""
import argparse

from modob.cocycle import obstruction_cochain
from modob.fincoh import FiniteAbelianGroup, class_is_trivial, cohomology, cohomology_order_by_kernels, restrict
from modob.qforms import IntegralBilinearForm

FORMS = {
    "x^2": IntegralBilinearForm(((1,),)),
    "3x^2": IntegralBilinearForm(((3,),)),
    "xy": IntegralBilinearForm(((0, 1), (0, 0))),
    "antisym": IntegralBilinearForm(((0, 1), (-1, 0))),
    "x^2+xy+y^2": IntegralBilinearForm(((1, 1), (0, 1))),
}


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--max-n", type=int, default=5)
    parser.add_argument("--degree", type=int, default=3)
    args = parser.parse_args()

    print(f"H^n(Z/N, Z/N) orders, n = 0..{args.degree}")
    for N in range(2, args.max_n + 1):
        G = FiniteAbelianGroup((N,))
        orders = [cohomology(G, n, N).order for n in range(args.degree + 1)]
        check = cohomology_order_by_kernels(G, args.degree, N)
        print(f"  N={N}: {orders}  (kernel count in top degree: {check})")

    print("\nobstruction class of each form, restricted to (Z/N)^d")
    for name, B in FORMS.items():
        for N in (2, 3):
            row = []
            for L in (N, N * N):
                c = restrict(obstruction_cochain(B), N, L)
                row.append(f"L={L}: {'trivial' if class_is_trivial(c) else 'nontrivial'}")
            print(f"  {name:12s} N={N}  " + "  ".join(row))


if __name__ == "__main__":
    main()
