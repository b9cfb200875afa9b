"""
Block encodings and three ways to build them.

A unitary ``U`` on ``m + s`` qubits is an ``(alpha, m, eps)``-block encoding
of an ``s``-qubit matrix ``A`` when
``|| A - alpha (<0^m| (x) I) U (|0^m> (x) I) ||_inf <= eps``. The ancilla
register is always the most significant one, so the encoded block is the
top-left ``2^s x 2^s`` corner of ``U``.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np
from scipy.optimize import brentq

from belt.linalg import (
    ComplexMatrix,
    as_matrix,
    dagger,
    eye,
    is_unitary,
    kron,
    mat_exp_i,
    num_qubits,
    operator_norm,
    swap_operator,
    unitary_completion,
)

UNITARY_TOL = 1e-10


@dataclass(frozen=True)
class BlockEncoding:
    unitary: ComplexMatrix
    alpha: float
    anc_qubits: int
    declared_eps: float
    sys_qubits: int

    def __post_init__(self):
        u = as_matrix(self.unitary)
        object.__setattr__(self, "unitary", u)
        dim = 1 << (self.anc_qubits + self.sys_qubits)
        if u.shape != (dim, dim):
            raise ValueError(
                f"unitary shape {u.shape} does not match {self.anc_qubits}+{self.sys_qubits} qubits"
            )
        if self.alpha <= 0:
            raise ValueError("alpha must be positive")
        if self.declared_eps < 0:
            raise ValueError("declared_eps must be non-negative")

    @property
    def total_qubits(self) -> int:
        return self.anc_qubits + self.sys_qubits

    def block(self) -> ComplexMatrix:
        """Top-left corner of the unitary (the encoded matrix divided by alpha)."""
        d = 1 << self.sys_qubits
        return self.unitary[:d, :d]

    def encoded(self) -> ComplexMatrix:
        """``alpha * block``, the matrix this unitary encodes."""
        return self.alpha * self.block()

    def is_unitary(self, tol: float = UNITARY_TOL) -> bool:
        return is_unitary(self.unitary, tol)


def verify(be: BlockEncoding, target) -> float:
    """Measured deviation ``|| target - alpha * block ||_inf``."""
    target = as_matrix(target)
    if target.shape != (1 << be.sys_qubits,) * 2:
        raise ValueError(f"target shape {target.shape} does not match {be.sys_qubits} system qubits")
    return operator_norm(target - be.encoded())


def _with_measured_eps(be: BlockEncoding, target) -> BlockEncoding:
    return replace(be, declared_eps=verify(be, target))


def exact_dilation(a, alpha: float | None = None) -> BlockEncoding:
    """One-ancilla unitary dilation of ``a / alpha``.

    ``U = [[B, sqrt(I - B B^dagger)], [sqrt(I - B^dagger B), -B^dagger]]`` with
    ``B = a / alpha``. Both square roots come from one SVD of ``B`` so the
    off-diagonal identities hold to machine precision.

    Parameters
    ----------
    a : array_like
        Square matrix on ``s`` qubits.
    alpha : float, optional
        Scale; defaults to ``||a||_inf``.
    """
    a = as_matrix(a)
    if a.shape[0] != a.shape[1]:
        raise ValueError("exact_dilation needs a square matrix")
    s = num_qubits(a.shape[0])
    norm = operator_norm(a)
    if alpha is None:
        alpha = norm if norm > 0 else 1.0
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    if norm > alpha * (1 + 1e-12):
        raise ValueError(f"alpha={alpha:.6g} is below ||a||_inf={norm:.6g}; no block encoding exists")
    b = a / alpha
    w, sv, vh = np.linalg.svd(b)
    sv = np.clip(sv, 0.0, 1.0)
    comp = np.sqrt((1.0 - sv) * (1.0 + sv))
    v = dagger(vh)
    left = (w * comp) @ dagger(w)
    right = (v * comp) @ dagger(v)
    u = np.block([[b, left], [right, -dagger(b)]])
    return _with_measured_eps(BlockEncoding(u, float(alpha), 1, 0.0, s), a)


def _state_prep(amplitudes: Sequence[complex]) -> ComplexMatrix:
    v = np.asarray(amplitudes, dtype=np.complex128).reshape(-1, 1)
    return unitary_completion(v / np.linalg.norm(v))


def lcu(coeffs: Sequence[float], unitaries: Sequence) -> BlockEncoding:
    """PREPARE-SELECT-PREPARE^dagger encoding of ``sum_i c_i U_i``.

    Signs of the coefficients are absorbed into SELECT; PREPARE loads
    ``sqrt(|c_i| / sum|c|)``. Index slots beyond ``len(coeffs)`` select the
    identity.
    """
    coeffs = [float(c) for c in coeffs]
    unitaries = [as_matrix(u) for u in unitaries]
    if len(coeffs) != len(unitaries) or not coeffs:
        raise ValueError("need one coefficient per unitary")
    if any(c == 0 for c in coeffs):
        raise ValueError("coefficients must be nonzero")
    d = unitaries[0].shape[0]
    for u in unitaries:
        if u.shape != (d, d) or not is_unitary(u, UNITARY_TOL):
            raise ValueError("every LCU term must be a unitary of one common size")
    s = num_qubits(d)
    lam = sum(abs(c) for c in coeffs)
    target = sum(c * u for c, u in zip(coeffs, unitaries))
    m = int(np.ceil(np.log2(len(coeffs)))) if len(coeffs) > 1 else 0
    if m == 0:
        u = np.sign(coeffs[0]) * unitaries[0]
        return _with_measured_eps(BlockEncoding(u, lam, 0, 0.0, s), target)
    slots = 1 << m
    amps = np.zeros(slots)
    amps[: len(coeffs)] = np.sqrt(np.abs(coeffs) / lam)
    prep = kron(_state_prep(amps), eye(s))
    select = np.zeros((slots * d, slots * d), dtype=np.complex128)
    for i in range(slots):
        term = np.sign(coeffs[i]) * unitaries[i] if i < len(coeffs) else np.eye(d)
        select[i * d : (i + 1) * d, i * d : (i + 1) * d] = term
    u = dagger(prep) @ select @ prep
    return _with_measured_eps(BlockEncoding(u, lam, m, 0.0, s), target)


def _nonzero_pattern(a: ComplexMatrix, tol: float = 1e-14) -> np.ndarray:
    return np.abs(a) > tol


def sparse_block_encoding(a, s: int) -> BlockEncoding:
    """``(s, w + 3)``-block encoding of an ``s``-sparse matrix with ``|a_ij| <= 1``.

    Ancilla registers, most significant first: entry flag ``f`` (1 qubit),
    row-padding marker ``dL`` (1), column-padding marker ``dR`` (1), index
    register ``g`` (``w`` qubits). Two state-preparation unitaries are built
    from exact sparsity/entry lookup tables::

        V_R |0,0,0,0,j> = s^{-1/2} sum_{i in col j} (a_ij|0> + sqrt(1-|a_ij|^2)|1>)_f |0,0>|j>_g |i>
                          + padding slots on dR
        V_L |0,0,0,0,i> = s^{-1/2} sum_{j in row i} |0,0,0>|j>_g |i>  + padding slots on dL

    and ``U = V_L^dagger V_R`` has top-left block ``a / s``.
    """
    a = as_matrix(a)
    if a.shape[0] != a.shape[1]:
        raise ValueError("sparse_block_encoding needs a square matrix")
    w = num_qubits(a.shape[0])
    d = 1 << w
    if s < 1 or s > d:
        raise ValueError(f"sparsity s={s} must lie in [1, {d}]")
    if np.abs(a).max() > 1 + 1e-12:
        raise ValueError("entries must satisfy |a_ij| <= 1")
    nz = _nonzero_pattern(a)
    if nz.sum(axis=1).max() > s or nz.sum(axis=0).max() > s:
        raise ValueError(f"matrix is not {s}-sparse")

    anc = w + 3
    big = 1 << (anc + w)

    def index(f, dl, dr, g, sysidx):
        return ((((f * 2 + dl) * 2 + dr) * d + g) * d) + sysidx

    norm = 1 / np.sqrt(s)
    cols_r, cols_l = [], []
    for j in range(d):
        v = np.zeros(big, dtype=np.complex128)
        rows = np.flatnonzero(nz[:, j])
        for i in rows:
            aij = a[i, j]
            v[index(0, 0, 0, j, i)] += norm * aij
            v[index(1, 0, 0, j, i)] += norm * np.sqrt(max(0.0, 1 - abs(aij) ** 2))
        for k in range(s - len(rows)):
            v[index(0, 0, 1, j, k)] += norm
        cols_r.append(v)
    for i in range(d):
        v = np.zeros(big, dtype=np.complex128)
        cols = np.flatnonzero(nz[i, :])
        for j in cols:
            v[index(0, 0, 0, j, i)] += norm
        for k in range(s - len(cols)):
            v[index(0, 1, 0, k, i)] += norm
        cols_l.append(v)
    v_r = unitary_completion(np.stack(cols_r, axis=1))
    v_l = unitary_completion(np.stack(cols_l, axis=1))
    u = dagger(v_l) @ v_r
    return _with_measured_eps(BlockEncoding(u, float(s), anc, 0.0, w), a)


def swap_encoding(qubits: int) -> BlockEncoding:
    """SWAP of two registers viewed as an ``(1, 0, 0)``-encoding of itself."""
    return BlockEncoding(swap_operator(qubits), 1.0, 0, 0.0, 2 * qubits)


def perturb_to_deviation(be: BlockEncoding, target, eps: float, rng: np.random.Generator) -> BlockEncoding:
    """Unitary perturbation ``U e^{-i t H}`` whose measured deviation from ``target`` equals ``eps``.

    ``H`` is a random Hermitian generator of unit norm and ``t`` is found by
    root bracketing, so the result stays exactly unitary.
    """
    target = as_matrix(target)
    base = verify(be, target)
    if eps <= base:
        raise ValueError(f"requested deviation {eps:g} is below the current one {base:g}")
    d = be.unitary.shape[0]
    g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    h = (g + dagger(g)) / 2
    h /= operator_norm(h)

    def perturbed(t):
        return BlockEncoding(be.unitary @ mat_exp_i(h, t), be.alpha, be.anc_qubits, 0.0, be.sys_qubits)

    def gap(t):
        return verify(perturbed(t), target) - eps

    hi = 1e-3
    while gap(hi) < 0:
        hi *= 2
        if hi > 4 * np.pi:
            raise ValueError("could not reach the requested deviation")
    t = brentq(gap, 0.0, hi, xtol=1e-15, rtol=1e-14)
    return _with_measured_eps(perturbed(t), target)


def _pauli_strings(qubits: int):
    paulis = [
        np.eye(2, dtype=np.complex128),
        np.array([[0, 1], [1, 0]], dtype=np.complex128),
        np.array([[0, -1j], [1j, 0]], dtype=np.complex128),
        np.diag([1, -1]).astype(np.complex128),
    ]
    for idx in np.ndindex(*(4,) * qubits):
        yield kron(*(paulis[i] for i in idx)) if qubits else np.eye(1, dtype=np.complex128)


def pauli_lcu(a, tol: float = 1e-13) -> BlockEncoding:
    """LCU over the Pauli expansion ``a = sum_P c_P P``.

    Complex phases of ``c_P`` are folded into the selected unitaries, so the
    scale is ``sum |c_P|``.
    """
    a = as_matrix(a)
    s = num_qubits(a.shape[0])
    coeffs, units = [], []
    for p in _pauli_strings(s):
        c = np.trace(p @ a) / a.shape[0]
        if abs(c) > tol:
            coeffs.append(abs(c))
            units.append(p * (c / abs(c)))
    if not coeffs:
        raise ValueError("cannot encode the zero matrix")
    return lcu(coeffs, units)
