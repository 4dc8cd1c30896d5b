"""Dense accuracy and bond dimension of the reference MPO versus truncation cutoff."""

import argparse
import time

import numpy as np
from scipy.linalg import expm

from tnqpde.hamiltonian import hubbard_1d
from tnqpde.mpo import trotterized_reference


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n-s", type=int, default=4)
    ap.add_argument("--dt", type=float, default=0.1)
    ap.add_argument("--slices", type=int, default=100)
    ap.add_argument("--cutoffs", type=float, nargs="+", default=[1e-12, 1e-14, 1e-16, 1e-18])
    a = ap.parse_args()
    h = hubbard_1d(a.n_s)
    exact = expm(-1j * a.dt * h.to_dense())
    print("cutoff,frobenius_distance_per_sqrt_dim,max_bond,seconds")
    for c in a.cutoffs:
        t0 = time.perf_counter()
        u = trotterized_reference(h, a.dt, a.slices, c)
        secs = time.perf_counter() - t0
        dist = np.linalg.norm(u.to_dense() - exact) / np.sqrt(len(exact))
        print(f"{c:.0e},{dist:.3e},{u.max_bond},{secs:.1f}")


if __name__ == "__main__":
    main()
