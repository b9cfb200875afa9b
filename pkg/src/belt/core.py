"""
Block encoding of a linear map applied to a density matrix.

Given a purification oracle ``U_rho`` (``U_rho|0^{r+n}> = |psi>`` with
``Tr_r |psi><psi| = rho``) and an ``(alpha, m, eps)``-block encoding ``U_N``
of the partially transposed Choi matrix of ``N``, the circuit

    V = (I_m (x) U_rho^dagger (x) I_k) (U_N (x) I_r) (I_m (x) U_rho (x) I_k)

is an ``(alpha, m + r + n, eps)``-block encoding of ``N(rho)``. Registers are
ordered ``(m, r, n, k)`` from most to least significant; ``U_N`` acts on
``(m, n, k)`` and the purifier register ``r`` idles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from belt.blockenc import BlockEncoding
from belt.linalg import (
    ComplexMatrix,
    as_matrix,
    dagger,
    eye,
    fix_global_phase,
    is_density,
    kron,
    num_qubits,
    partial_trace,
    permute_qubits,
    unitary_completion,
)

DEFAULT_QUBIT_CAP = 13
RANK_TOL = 1e-12


class QubitCapError(ValueError):
    """The dense circuit would exceed the configured qubit cap."""


@dataclass(frozen=True)
class PurificationOracle:
    unitary: ComplexMatrix
    r: int
    n: int

    def state(self) -> ComplexMatrix:
        """``U|0^{r+n}>`` as a column vector."""
        return self.unitary[:, :1]

    def reduced(self) -> ComplexMatrix:
        psi = self.state()
        return partial_trace(psi @ dagger(psi), [self.r, self.n], keep=[1])


@dataclass(frozen=True)
class PostSelection:
    success_prob: float
    conditional_state: Optional[ComplexMatrix]


def purify(rho, r_policy: Union[str, int] = "minimal") -> PurificationOracle:
    """Purification oracle for ``rho``.

    ``|psi> = sum_i sqrt(lambda_i) |i>_r |v_i>_n`` over eigenvalues sorted
    descending (those below 1e-12 dropped), each eigenvector phase-fixed so
    its largest-magnitude entry is real positive. The unitary is completed
    deterministically around ``|psi>``.

    Parameters
    ----------
    rho : array_like
        Density matrix on ``n`` qubits.
    r_policy : "minimal" or int
        ``"minimal"`` uses ``ceil(log2 rank)`` purifier qubits; an integer
        fixes ``r`` (must be at least the minimal value).
    """
    rho = as_matrix(rho)
    if not is_density(rho, 1e-9):
        raise ValueError("purify needs a density matrix")
    n = num_qubits(rho.shape[0])
    evals, evecs = np.linalg.eigh((rho + dagger(rho)) / 2)
    order = np.argsort(-evals, kind="stable")
    evals, evecs = evals[order], evecs[:, order]
    keep = evals > RANK_TOL
    evals, evecs = evals[keep], evecs[:, keep]
    rank = len(evals)
    r_min = math.ceil(math.log2(rank)) if rank > 1 else 0
    if r_policy == "minimal":
        r = r_min
    else:
        r = int(r_policy)
        if r < r_min:
            raise ValueError(f"r={r} is too small for a rank-{rank} state (needs {r_min})")
    weights = evals / evals.sum()
    psi = np.zeros(((1 << r) * (1 << n), 1), dtype=np.complex128)
    for i, (lam, v) in enumerate(zip(weights, evecs.T)):
        psi += np.sqrt(lam) * kron(np.eye(1 << r)[:, i : i + 1], fix_global_phase(v))
    psi /= np.linalg.norm(psi)
    return PurificationOracle(unitary_completion(psi), r, n)


def assemble_unitary(u_map: ComplexMatrix, oracle_u: ComplexMatrix, m: int, r: int, n: int, k: int):
    """Dense ``V`` on registers ``(m, r, n, k)``."""
    prep = kron(eye(m), oracle_u, eye(k))
    # U_N (x) I_r is built on (m, n, k, r); move the idle r register next to m
    m_pos = list(range(m))
    n_pos = list(range(m, m + n))
    k_pos = list(range(m + n, m + n + k))
    r_pos = list(range(m + n + k, m + n + k + r))
    un_r = permute_qubits(kron(u_map, eye(r)), m_pos + r_pos + n_pos + k_pos)
    return dagger(prep) @ un_r @ prep


def belt_assemble(
    u_map: BlockEncoding,
    oracle: PurificationOracle,
    n: int,
    k: int,
    qubit_cap: int = DEFAULT_QUBIT_CAP,
) -> BlockEncoding:
    """Block encoding of ``N(rho)`` from an encoding of ``choi_t1(N)`` and ``U_rho``.

    The result has scale ``u_map.alpha``, ``m + r + n`` ancillas and inherits
    ``u_map.declared_eps`` (the construction never amplifies the error).
    """
    if u_map.sys_qubits != n + k:
        raise ValueError(f"u_map encodes {u_map.sys_qubits} qubits, expected n+k={n + k}")
    if oracle.n != n:
        raise ValueError(f"oracle prepares a {oracle.n}-qubit state, expected {n}")
    m, r = u_map.anc_qubits, oracle.r
    total = m + r + n + k
    if total > qubit_cap:
        raise QubitCapError(f"circuit needs {total} qubits, cap is {qubit_cap}")
    v = assemble_unitary(u_map.unitary, oracle.unitary, m, r, n, k)
    return BlockEncoding(v, u_map.alpha, m + r + n, u_map.declared_eps, k)


def postselect(v: BlockEncoding, sigma, zero_tol: float = 1e-15) -> PostSelection:
    """Run ``V`` on ``|0..0><0..0| (x) sigma`` and post-select the ancillas on zero.

    The output columns reached from the all-zero ancilla input are
    ``V[:, :d]``; the post-selected rows are the first ``d`` of them, so the
    unnormalised output is ``B sigma B^dagger`` with ``B`` the top-left block.
    """
    sigma = as_matrix(sigma)
    d = 1 << v.sys_qubits
    if sigma.shape != (d, d):
        raise ValueError("sigma does not match the output register")
    reachable = v.unitary[:, :d]
    kept = reachable[:d, :]
    out = kept @ sigma @ dagger(kept)
    prob = float(np.real(np.trace(out)))
    prob = min(max(prob, 0.0), 1.0)
    if prob <= zero_tol:
        return PostSelection(prob, None)
    state = out / prob
    return PostSelection(prob, (state + dagger(state)) / 2)


def success_probability_formula(n_rho, sigma, alpha: float) -> float:
    """``alpha^{-2} Tr[N(rho) sigma N(rho)^dagger]``."""
    n_rho, sigma = as_matrix(n_rho), as_matrix(sigma)
    return float(np.real(np.trace(n_rho @ sigma @ dagger(n_rho)))) / alpha**2


def sandwich(lam_t1, psi, k: int) -> ComplexMatrix:
    """``(<psi| (x) I_k)(I_r (x) lam_t1)(|psi> (x) I_k)`` with ``|psi>`` on ``r + n`` qubits."""
    lam_t1 = as_matrix(lam_t1)
    psi = as_matrix(psi).reshape(-1, 1)
    nk = num_qubits(lam_t1.shape[0])
    n = nk - k
    r = num_qubits(psi.shape[0]) - n
    big = kron(eye(r), lam_t1)
    left = kron(psi, eye(k))
    return dagger(left) @ big @ left
