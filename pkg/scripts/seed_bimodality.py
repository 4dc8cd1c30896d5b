"""Single-start compression δ per seed, showing the two basins of the 8-qubit instance."""

import argparse

from tnqpde.brickwall import init_circuit
from tnqpde.compress import compress_to_mpo, delta_from_overlap
from tnqpde.hamiltonian import hubbard_1d
from tnqpde.mpo import MatrixProductOperator, trotterized_reference


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n-s", type=int, default=4)
    ap.add_argument("--depth", type=int, default=5)
    ap.add_argument("--sweeps", type=int, default=1000)
    ap.add_argument("--seeds", type=int, nargs="+", default=list(range(12)))
    ap.add_argument("--reference", help="cached reference MPO file")
    a = ap.parse_args()
    h = hubbard_1d(a.n_s)
    u_ref = MatrixProductOperator.load(a.reference) if a.reference else trotterized_reference(h, 0.1)
    n = h.n_qubits
    print("seed,delta_100,delta_final")
    for s in a.seeds:
        res = compress_to_mpo(init_circuit(n, a.depth, 0.01, s), u_ref, a.sweeps)
        hist = res.objective_history
        d100 = delta_from_overlap(hist[min(99, len(hist) - 1)], n)
        print(f"{s},{d100:.4e},{delta_from_overlap(hist[-1], n):.4e}", flush=True)


if __name__ == "__main__":
    main()
