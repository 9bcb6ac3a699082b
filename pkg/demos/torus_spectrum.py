"""Dirac spectrum on the flat 3-torus, compared against its Fourier oracle.

The operator D = sum_a e_a x d/dx_a acts on 4-component normal fields over a
periodic n^3 grid.  Because it is translation invariant, its spectrum can be
written down in closed form from the central-difference symbol
s_h(k)_a = sin(2 pi k_a / n) / h.  This script assembles the sparse operator,
diagonalises it, and checks the match.  It also demonstrates the classic
even-grid doubling: on an even grid the symbol vanishes at every momentum
with components in {0, n/2}, so the kernel has dimension 8 x 4 = 32 instead
of the 4 constant sections one would expect from the continuum.
"""

import numpy as np

from g2cal import dirac, meshes


def main():
    for n in (5, 7, 8):
        dom = meshes.build_torus_grid(n)
        op = dirac.assemble_D(dom)
        vals = dirac.spectrum(op)
        oracle = dirac.fourier_oracle(n)
        err = np.abs(vals - oracle).max()
        dim, gap = dirac.kernel_dim(op, count=40)
        parity = "even" if n % 2 == 0 else "odd"
        print(f"n = {n} ({parity} grid)")
        print(f"  spectrum vs Fourier oracle : max error {err:.3e}")
        print(f"  kernel dimension           : {dim} (gap {gap:.2e})")
        if n % 2 == 0:
            print("  -> doubling: 2^3 symbol zeros x 4 components = 32 modes")
        else:
            print("  -> no doubling: only k = 0 kills the odd-grid symbol")
        print()


if __name__ == "__main__":
    main()
