"""δ of single-step first/second-order Trotter products for the Hubbard chain.

With --orderings K, also samples K random term orders to show how strongly
the second-order value depends on the order of the Pauli terms.
"""

import argparse

import numpy as np
from scipy.linalg import expm

from tnqpde.compress import dense_delta
from tnqpde.hamiltonian import QubitHamiltonian, hubbard_1d
from tnqpde.mpo import trotter_product_dense


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n-s", type=int, default=4)
    ap.add_argument("--dt", type=float, default=0.1)
    ap.add_argument("--orderings", type=int, default=0)
    ap.add_argument("--seed", type=int, default=0)
    a = ap.parse_args()
    h = hubbard_1d(a.n_s)
    n = h.n_qubits
    exact = expm(-1j * a.dt * h.to_dense())
    print(f"first order  delta = {dense_delta(trotter_product_dense(h, a.dt, 1), exact, n):.4e}")
    print(f"second order delta = {dense_delta(trotter_product_dense(h, a.dt, 2), exact, n):.4e}")
    if a.orderings:
        rng = np.random.default_rng(a.seed)
        vals = []
        for _ in range(a.orderings):
            terms = [h.terms[i] for i in rng.permutation(len(h.terms))]
            vals.append(dense_delta(trotter_product_dense(QubitHamiltonian(n, terms), a.dt, 2), exact, n))
        print(f"second order over {a.orderings} random term orders: min {min(vals):.4e} "
              f"median {np.median(vals):.4e} max {max(vals):.4e}")


if __name__ == "__main__":
    main()
