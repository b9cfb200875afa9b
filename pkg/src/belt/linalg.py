"""
Dense complex linear algebra on qubit registers.

Conventions used across the package:

* matrices are plain ``numpy`` arrays of dtype ``complex128``;
* qubit ordering is big-endian, qubit 0 being the most significant bit of a
  basis index, so ``kron(a, b)`` places ``a`` on the leading qubits;
* a *split* is an ordered sequence of subsystem qubit counts whose sum is
  ``log2`` of the matrix dimension.

Every function is pure. Random sampling takes an explicit
:class:`numpy.random.Generator`; no global random state is touched.
"""

from __future__ import annotations

from functools import reduce
from typing import Sequence

import numpy as np
import numpy.typing as npt

ComplexMatrix = npt.NDArray[np.complex128]
QubitSplit = Sequence[int]

# Eigenvalues in [-PSD_CLAMP, 0) are treated as roundoff and clamped to zero.
PSD_CLAMP = 1e-12


def num_qubits(dim: int) -> int:
    """Return ``log2(dim)``, raising if ``dim`` is not a power of two."""
    n = int(dim).bit_length() - 1
    if dim < 1 or (1 << n) != dim:
        raise ValueError(f"dimension {dim} is not a power of two")
    return n


def as_matrix(m) -> ComplexMatrix:
    arr = np.asarray(m, dtype=np.complex128)
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    if arr.ndim != 2:
        raise ValueError(f"expected a matrix, got array of shape {arr.shape}")
    return arr


def kron(*mats) -> ComplexMatrix:
    """Kronecker product of one or more matrices, leftmost on the leading qubits."""
    if not mats:
        raise ValueError("kron needs at least one operand")
    return reduce(np.kron, (as_matrix(m) for m in mats))


def eye(qubits: int) -> ComplexMatrix:
    return np.eye(1 << qubits, dtype=np.complex128)


def basis_state(index: int, qubits: int) -> ComplexMatrix:
    v = np.zeros((1 << qubits, 1), dtype=np.complex128)
    v[index, 0] = 1.0
    return v


def dagger(m) -> ComplexMatrix:
    return np.conj(as_matrix(m)).T


def _hermitian_norm(h) -> float:
    # spectral norm of a Hermitian matrix from its eigenvalues (cheaper than an SVD)
    if h.size == 0:
        return 0.0
    return float(np.abs(np.linalg.eigvalsh(h)).max())


def is_unitary(m, tol: float = 1e-10) -> bool:
    m = as_matrix(m)
    if m.shape[0] != m.shape[1]:
        return False
    return _hermitian_norm(dagger(m) @ m - np.eye(m.shape[0])) <= tol


def is_hermitian(m, tol: float = 1e-10) -> bool:
    m = as_matrix(m)
    if m.shape[0] != m.shape[1]:
        return False
    return _hermitian_norm(1j * (m - dagger(m))) <= tol


def is_density(m, tol: float = 1e-10) -> bool:
    """Hermitian, PSD within ``tol`` and unit trace within ``tol``."""
    m = as_matrix(m)
    if not is_hermitian(m, tol):
        return False
    if abs(np.trace(m) - 1.0) > tol:
        return False
    evals = np.linalg.eigvalsh((m + dagger(m)) / 2)
    return bool(evals.min() >= -tol)


def operator_norm(m) -> float:
    """Largest singular value (the spectral norm)."""
    m = as_matrix(m)
    if m.size == 0:
        return 0.0
    return float(np.linalg.norm(m, 2))


def _check_split(dim: int, split: QubitSplit) -> list[int]:
    split = [int(c) for c in split]
    if any(c < 0 for c in split):
        raise ValueError(f"negative qubit count in split {split}")
    if sum(split) != num_qubits(dim):
        raise ValueError(f"split {split} does not match dimension {dim}")
    return split


def partial_trace(m, split: QubitSplit, keep: Sequence[int]) -> ComplexMatrix:
    """Trace out every subsystem of ``split`` not listed in ``keep``.

    Kept subsystems appear in the result in the order of ``split``, not in
    the order given by ``keep``.

    Examples
    --------
    >>> bell = np.array([1, 0, 0, 1]) / np.sqrt(2)
    >>> partial_trace(np.outer(bell, bell), [1, 1], keep=[0]).real
    array([[0.5, 0. ],
           [0. , 0.5]])
    """
    m = as_matrix(m)
    if m.shape[0] != m.shape[1]:
        raise ValueError("partial_trace needs a square matrix")
    split = _check_split(m.shape[0], split)
    keep = sorted(set(int(k) for k in keep))
    nsub = len(split)
    for k in keep:
        if not 0 <= k < nsub:
            raise IndexError(f"subsystem index {k} out of range for {nsub} subsystems")
    dims = [1 << c for c in split]
    t = m.reshape(dims + dims)
    # einsum subscripts: row index letters then column letters; traced pairs share a letter
    letters = iter("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ")
    rows = [next(letters) for _ in range(nsub)]
    cols = [rows[i] if i not in keep else next(letters) for i in range(nsub)]
    out = [rows[i] for i in keep] + [cols[i] for i in keep]
    reduced = np.einsum("".join(rows + cols) + "->" + "".join(out), t)
    kd = int(np.prod([dims[i] for i in keep])) if keep else 1
    return reduced.reshape(kd, kd)


def partial_transpose_first(m, first_qubits: int) -> ComplexMatrix:
    """Transpose the leading ``first_qubits``-qubit tensor factor."""
    m = as_matrix(m)
    if m.shape[0] != m.shape[1]:
        raise ValueError("partial transpose needs a square matrix")
    d1 = 1 << first_qubits
    if m.shape[0] % d1:
        raise ValueError(f"dimension {m.shape[0]} not divisible by 2^{first_qubits}")
    d2 = m.shape[0] // d1
    return m.reshape(d1, d2, d1, d2).transpose(2, 1, 0, 3).reshape(d1 * d2, d1 * d2)


def permute_qubits(m, perm: Sequence[int]) -> ComplexMatrix:
    """Reorder the qubits of an operator.

    Qubit ``j`` of the result is qubit ``perm[j]`` of ``m``. Column vectors
    are permuted the same way.
    """
    m = as_matrix(m)
    perm = list(perm)
    nq = len(perm)
    if sorted(perm) != list(range(nq)):
        raise ValueError(f"{perm} is not a permutation")
    if m.shape[1] == 1:
        if m.shape[0] != 1 << nq:
            raise ValueError("vector dimension does not match permutation")
        return m.reshape([2] * nq).transpose(perm).reshape(-1, 1)
    if m.shape != (1 << nq, 1 << nq):
        raise ValueError("operator dimension does not match permutation")
    t = m.reshape([2] * (2 * nq)).transpose(perm + [p + nq for p in perm])
    return t.reshape(1 << nq, 1 << nq)


def permutation_matrix(perm: Sequence[int]) -> ComplexMatrix:
    """Unitary ``P`` with ``P v == permute_qubits(v, perm)`` for every vector ``v``."""
    nq = len(perm)
    d = 1 << nq
    return eye(nq).reshape([2] * nq + [d]).transpose(list(perm) + [nq]).reshape(d, d)


def swap_operator(qubits: int) -> ComplexMatrix:
    """SWAP of two ``qubits``-qubit registers."""
    return permutation_matrix(list(range(qubits, 2 * qubits)) + list(range(qubits)))


def psd_sqrt(m) -> ComplexMatrix:
    """Square root of a Hermitian PSD matrix.

    Eigenvalues in ``[-1e-12, 0)`` are clamped to zero; anything more
    negative is rejected.
    """
    m = as_matrix(m)
    if not is_hermitian(m, 1e-10 * max(1.0, operator_norm(m))):
        raise ValueError("psd_sqrt needs a Hermitian matrix")
    evals, evecs = np.linalg.eigh((m + dagger(m)) / 2)
    if evals.min() < -PSD_CLAMP:
        raise ValueError(f"matrix is not PSD (min eigenvalue {evals.min():.3e})")
    evals = np.clip(evals, 0.0, None)
    return (evecs * np.sqrt(evals)) @ dagger(evecs)


def mat_exp_i(h, t: float) -> ComplexMatrix:
    """``exp(-i h t)`` for Hermitian ``h``, via eigendecomposition."""
    h = as_matrix(h)
    scale = max(1.0, operator_norm(h))
    if not is_hermitian(h, 1e-10 * scale):
        raise ValueError("mat_exp_i needs a Hermitian generator")
    evals, evecs = np.linalg.eigh((h + dagger(h)) / 2)
    return (evecs * np.exp(-1j * evals * t)) @ dagger(evecs)


def unitary_completion(columns) -> ComplexMatrix:
    """Extend orthonormal columns to a unitary.

    The completion is the complete Householder QR factor of ``columns``
    (LAPACK reflectors applied in canonical index order), so the result
    depends only on the input.

    Parameters
    ----------
    columns : array_like or list of vectors
        Either a ``d x k`` matrix or a list of ``k`` length-``d`` vectors.
    """
    if isinstance(columns, (list, tuple)):
        q = np.hstack([as_matrix(c).reshape(-1, 1) for c in columns])
    else:
        q = as_matrix(columns)
    d, k = q.shape
    if k > d:
        raise ValueError(f"{k} columns cannot be orthonormal in dimension {d}")
    if operator_norm(dagger(q) @ q - np.eye(k)) > 1e-10:
        raise ValueError("columns are not orthonormal")
    if k == d:
        return q.copy()
    full, _ = np.linalg.qr(q, mode="complete")
    # the leading factor columns equal q up to phases; use q itself
    u = full.copy()
    u[:, :k] = q
    return u


def fix_global_phase(v) -> ComplexMatrix:
    """Rotate ``v`` so its largest-magnitude entry (lowest index on ties) is real positive."""
    v = as_matrix(v)
    flat = v.reshape(-1)
    mags = np.abs(flat)
    idx = int(np.flatnonzero(mags >= mags.max() - 1e-12)[0])
    if mags[idx] == 0:
        return v
    return v * (np.conj(flat[idx]) / mags[idx])


def make_rng(seed: int | Sequence[int] | None) -> np.random.Generator:
    """PCG64 generator from an int or a sequence of ints (e.g. ``(seed, trial)``)."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))


def haar_state(qubits: int, rng: np.random.Generator) -> ComplexMatrix:
    """Haar-random pure state as a column vector (normalised Ginibre vector)."""
    if qubits < 1:
        raise ValueError("haar_state needs at least one qubit")
    d = 1 << qubits
    v = rng.standard_normal(d) + 1j * rng.standard_normal(d)
    v /= np.linalg.norm(v)
    return v.reshape(-1, 1)


def haar_unitary(qubits: int, rng: np.random.Generator) -> ComplexMatrix:
    """Haar-random unitary via QR of a Ginibre matrix with the phase correction."""
    d = 1 << qubits
    z = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    ph = np.diag(r) / np.abs(np.diag(r))
    return q * ph


def random_density(qubits: int, rng: np.random.Generator, rank: int | None = None) -> ComplexMatrix:
    """Random density matrix of the given rank (full rank by default)."""
    d = 1 << qubits
    rank = d if rank is None else rank
    g = rng.standard_normal((d, rank)) + 1j * rng.standard_normal((d, rank))
    rho = g @ dagger(g)
    return rho / np.trace(rho).real


def pure_density(v) -> ComplexMatrix:
    v = as_matrix(v).reshape(-1, 1)
    return v @ dagger(v)


def trace_distance(a, b) -> float:
    evals = np.linalg.eigvalsh(as_matrix(a) - as_matrix(b))
    return 0.5 * float(np.abs(evals).sum())
