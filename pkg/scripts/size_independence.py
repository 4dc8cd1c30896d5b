"""Compressed δ at fixed depth for a longer Hubbard chain (default 20 qubits)."""

import argparse
import logging
import time
from pathlib import Path

from tnqpde.compress import compress_multistart, distance_metric_delta
from tnqpde.hamiltonian import hubbard_1d
from tnqpde.mpo import MatrixProductOperator, trotterized_reference


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n-s", type=int, default=10)
    ap.add_argument("--depth", type=int, default=5)
    ap.add_argument("--sweeps", type=int, default=1000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--reference", help="reference MPO file; built and saved there if absent")
    a = ap.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(asctime)s %(message)s")
    t0 = time.perf_counter()
    if a.reference and Path(a.reference).exists():
        u_ref = MatrixProductOperator.load(a.reference)
    else:
        u_ref = trotterized_reference(hubbard_1d(a.n_s), 0.1)
        if a.reference:
            u_ref.save(a.reference)
    print(f"reference: bonds up to {u_ref.max_bond}, {time.perf_counter() - t0:.0f}s", flush=True)
    res = compress_multistart(u_ref.n_sites, a.depth, u_ref.dagger(), a.sweeps, a.seed)
    print(f"delta = {distance_metric_delta(res.circuit, u_ref):.4e} after {res.sweeps_run} sweeps, "
          f"total {time.perf_counter() - t0:.0f}s")


if __name__ == "__main__":
    main()
