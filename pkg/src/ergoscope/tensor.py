"""Dense tensor-network-free kron bookkeeping.

Conventions, fixed once for the whole package:
  * a state or operator lives on a sorted tuple of 1-based sites;
  * basis index digits follow the site enumeration with the LOWEST site as
    the least significant digit, so for support (a1 < a2 < ... < an) the
    flat index is sum_m digit(a_m) * d**(m-1);
  * reshaping a flat array to [d]*n therefore puts the HIGHEST site on
    axis 0 (most significant first).

All functions here take raw ndarrays plus site tuples; the typed wrappers
live in states.py / hamiltonian.py.
"""

import numpy as np


def _desc(support):
    return sorted(support, reverse=True)


def embed_operator(mat: np.ndarray, op_support, target_support, d: int) -> np.ndarray:
    """Embed an operator on op_support into the larger target_support.

    Returns the dense matrix op (x) identity_rest with axes permuted to the
    package digit convention.
    """
    op_sites = tuple(sorted(op_support))
    target = tuple(sorted(target_support))
    if not set(op_sites) <= set(target):
        raise ValueError(f"operator support {op_sites} not inside {target}")
    n = len(target)
    k = len(op_sites)
    if mat.shape != (d**k, d**k):
        raise ValueError(f"operator shape {mat.shape} != ({d**k}, {d**k})")
    if k == n:
        return mat
    rest = [s for s in target if s not in set(op_sites)]
    full = np.kron(mat, np.identity(d ** len(rest), dtype=mat.dtype))
    # axis i of the reshaped tensor currently holds site cur[i]
    cur = _desc(op_sites) + _desc(rest)
    want = _desc(target)
    perm = [cur.index(s) for s in want]
    tens = full.reshape([d] * (2 * n))
    tens = tens.transpose(perm + [p + n for p in perm])
    return np.ascontiguousarray(tens.reshape(d**n, d**n))


def apply_unitary_vec(psi: np.ndarray, gate: np.ndarray, gate_support,
                      state_support, d: int) -> np.ndarray:
    """Apply a k-site gate to a flat state vector without embedding it."""
    sites = tuple(sorted(gate_support))
    support = tuple(sorted(state_support))
    if not set(sites) <= set(support):
        raise ValueError(f"gate support {sites} not inside state support {support}")
    n = len(support)
    k = len(sites)
    order = _desc(support)
    pos = [order.index(s) for s in _desc(sites)]
    gt = gate.reshape([d] * (2 * k))
    pt = psi.reshape([d] * n)
    out = np.tensordot(gt, pt, axes=(list(range(k, 2 * k)), pos))
    out = np.moveaxis(out, list(range(k)), pos)
    return np.ascontiguousarray(out.reshape(d**n))


def apply_unitary_rho(rho: np.ndarray, gate: np.ndarray, gate_support,
                      state_support, d: int) -> np.ndarray:
    """U rho U^dag for a k-site gate, contracted without embedding the gate."""
    sites = tuple(sorted(gate_support))
    support = tuple(sorted(state_support))
    if not set(sites) <= set(support):
        raise ValueError(f"gate support {sites} not inside state support {support}")
    n = len(support)
    k = len(sites)
    order = _desc(support)
    pos = [order.index(s) for s in _desc(sites)]
    gt = gate.reshape([d] * (2 * k))
    out = rho.reshape([d] * (2 * n))
    out = np.tensordot(gt, out, axes=(list(range(k, 2 * k)), pos))
    out = np.moveaxis(out, list(range(k)), pos)
    col = [p + n for p in pos]
    out = np.tensordot(gt.conj(), out, axes=(list(range(k, 2 * k)), col))
    out = np.moveaxis(out, list(range(k)), col)
    return np.ascontiguousarray(out.reshape(d**n, d**n))


def ptrace_vec(psi: np.ndarray, keep, support, d: int) -> np.ndarray:
    """Reduced density matrix of a pure state on the kept sites."""
    keep_sites = tuple(sorted(keep))
    full = tuple(sorted(support))
    if not set(keep_sites) <= set(full):
        raise ValueError(f"keep {keep_sites} not inside support {full}")
    n = len(full)
    order = _desc(full)
    keep_pos = [order.index(s) for s in _desc(keep_sites)]
    rest_pos = [i for i in range(n) if i not in keep_pos]
    pt = psi.reshape([d] * n).transpose(keep_pos + rest_pos)
    m = pt.reshape(d ** len(keep_sites), -1)
    return m @ m.conj().T


def ptrace_rho(rho: np.ndarray, keep, support, d: int) -> np.ndarray:
    """Reduced density matrix of a density matrix on the kept sites."""
    keep_sites = tuple(sorted(keep))
    full = tuple(sorted(support))
    if not set(keep_sites) <= set(full):
        raise ValueError(f"keep {keep_sites} not inside support {full}")
    n = len(full)
    order = _desc(full)
    keep_pos = [order.index(s) for s in _desc(keep_sites)]
    rest_pos = [i for i in range(n) if i not in keep_pos]
    nk, nr = len(keep_pos), len(rest_pos)
    perm = keep_pos + rest_pos
    tens = rho.reshape([d] * (2 * n)).transpose(perm + [p + n for p in perm])
    tens = tens.reshape(d**nk, d**nr, d**nk, d**nr)
    return np.einsum("arbr->ab", tens)


def hermitian_norm(mat: np.ndarray) -> float:
    """Operator norm (largest singular value) of a Hermitian matrix."""
    if mat.shape == (1, 1):
        return abs(float(mat[0, 0].real))
    return float(np.max(np.abs(np.linalg.eigvalsh(mat))))


def real_if_close(mat: np.ndarray) -> np.ndarray:
    """Drop an exactly-zero imaginary part (keeps dense eigh in the fast lane)."""
    if np.iscomplexobj(mat) and not np.any(mat.imag):
        return np.ascontiguousarray(mat.real)
    return mat


def matvec(mat: np.ndarray, vec: np.ndarray) -> np.ndarray:
    """mat @ vec that avoids promoting a large real matrix to complex."""
    if np.iscomplexobj(vec) and not np.iscomplexobj(mat):
        return mat @ vec.real + 1j * (mat @ vec.imag)
    return mat @ vec
