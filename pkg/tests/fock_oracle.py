"""Occupation-number oracle: ladder operators act on bitstrings with explicit sign counting.

Independent of the Pauli-algebra Jordan-Wigner code; mode 0 is the most
significant bit, matching the qubit convention.
"""

import numpy as np


def apply_op(state: int, mode: int, create: bool, n_modes: int):
    bit = 1 << (n_modes - 1 - mode)
    if bool(state & bit) == create:
        return None, 0
    before = sum(1 << (n_modes - 1 - k) for k in range(mode))
    sign = -1 if bin(state & before).count("1") % 2 else 1
    return state ^ bit, sign


def fock_matrix(terms, n_modes: int) -> np.ndarray:
    """Matrix of sum(c * op_1 op_2 ...) with the rightmost operator applied first."""
    dim = 2**n_modes
    h = np.zeros((dim, dim))
    for c, ops in terms:
        for s in range(dim):
            st, sg = s, 1
            for mode, cr in reversed(ops):
                st, x = apply_op(st, mode, cr, n_modes)
                if st is None:
                    break
                sg *= x
            if st is not None:
                h[st, s] += c * sg
    return h
