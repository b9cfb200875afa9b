"""
Linear maps on operators and their Choi matrices.

A map ``N : L(C^{2^n}) -> L(C^{2^k})`` is stored as its superoperator acting
on column-stacked operators, ``vec(N(X)) = S vec(X)`` with
``vec(X)[c * d + r] = X[r, c]``. Under this convention ``X -> A X B^dagger``
has superoperator ``conj(B) kron A``.

The Choi matrix uses the unnormalised maximally entangled vector,
``Lambda_N = sum_ij |i><j| (x) N(|i><j|)``, input factor first.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from belt.linalg import (
    ComplexMatrix,
    as_matrix,
    dagger,
    eye,
    kron,
    num_qubits,
    operator_norm,
    partial_transpose_first,
    permutation_matrix,
    swap_operator,
)

DEFAULT_CONDITION_CAP = 1e8

PAULIS = {
    "I": np.eye(2, dtype=np.complex128),
    "X": np.array([[0, 1], [1, 0]], dtype=np.complex128),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=np.complex128),
    "Z": np.array([[1, 0], [0, -1]], dtype=np.complex128),
}


class IllConditionedMapError(ValueError):
    """Raised when a superoperator is singular or too ill-conditioned to invert."""

    def __init__(self, condition: float, cap: float):
        self.condition = condition
        self.cap = cap
        super().__init__(f"superoperator condition number {condition:.3e} exceeds cap {cap:.1e}")


@dataclass(frozen=True)
class LinearMapRep:
    """Superoperator of a linear map from ``in_qubits`` to ``out_qubits``."""

    in_qubits: int
    out_qubits: int
    superop: ComplexMatrix

    def __post_init__(self):
        s = as_matrix(self.superop)
        expected = (4**self.out_qubits, 4**self.in_qubits)
        if s.shape != expected:
            raise ValueError(f"superoperator shape {s.shape} != {expected}")
        object.__setattr__(self, "superop", s)

    @property
    def din(self) -> int:
        return 1 << self.in_qubits

    @property
    def dout(self) -> int:
        return 1 << self.out_qubits

    def tensor(self) -> np.ndarray:
        """Index form ``T[out_row, out_col, in_row, in_col]``."""
        do, di = self.dout, self.din
        return self.superop.reshape(do, do, di, di).transpose(1, 0, 3, 2)

    @classmethod
    def from_tensor(cls, t: np.ndarray) -> LinearMapRep:
        do, _, di, _ = t.shape
        s = t.transpose(1, 0, 3, 2).reshape(do * do, di * di)
        return cls(num_qubits(di), num_qubits(do), s)

    def __call__(self, x) -> ComplexMatrix:
        return apply(self, x)

    def __matmul__(self, other: LinearMapRep) -> LinearMapRep:
        return compose(self, other)


def vec(x) -> np.ndarray:
    return as_matrix(x).reshape(-1, order="F")


def unvec(v: np.ndarray, dim: int) -> ComplexMatrix:
    return np.asarray(v, dtype=np.complex128).reshape(dim, dim, order="F")


def apply(m: LinearMapRep, x) -> ComplexMatrix:
    """Evaluate ``N(x)``."""
    x = as_matrix(x)
    if x.shape != (m.din, m.din):
        raise ValueError(f"input of shape {x.shape} does not match map on {m.in_qubits} qubits")
    return unvec(m.superop @ vec(x), m.dout)


def compose(outer: LinearMapRep, inner: LinearMapRep) -> LinearMapRep:
    """``outer o inner``."""
    if outer.in_qubits != inner.out_qubits:
        raise ValueError("composition dimension mismatch")
    return LinearMapRep(inner.in_qubits, outer.out_qubits, outer.superop @ inner.superop)


def tensor_maps(first: LinearMapRep, second: LinearMapRep) -> LinearMapRep:
    """``first (x) second`` acting on the concatenated registers."""
    t1, t2 = first.tensor(), second.tensor()
    t = np.einsum("abcd,efgh->aebfcgdh", t1, t2)
    do = first.dout * second.dout
    di = first.din * second.din
    return LinearMapRep.from_tensor(t.reshape(do, do, di, di))


def tensor_with_identity(m: LinearMapRep, extra_qubits: int) -> LinearMapRep:
    """``m (x) id`` with the identity on ``extra_qubits`` trailing qubits."""
    if extra_qubits == 0:
        return m
    return tensor_maps(m, identity(extra_qubits))


def from_kraus_pairs(pairs: Iterable[tuple]) -> LinearMapRep:
    """Map ``X -> sum_i A_i X B_i^dagger`` from pairs ``(A_i, B_i)``."""
    pairs = [(as_matrix(a), as_matrix(b)) for a, b in pairs]
    if not pairs:
        raise ValueError("need at least one pair")
    shape = pairs[0][0].shape
    for a, b in pairs:
        if a.shape != shape or b.shape != shape:
            raise ValueError("all operators must share one shape")
    dout, din = shape
    s = sum(np.kron(np.conj(b), a) for a, b in pairs)
    return LinearMapRep(num_qubits(din), num_qubits(dout), s)


def from_kraus(ops: Iterable) -> LinearMapRep:
    """CP map ``X -> sum_i K_i X K_i^dagger``."""
    return from_kraus_pairs((k, k) for k in ops)


def choi(m: LinearMapRep) -> ComplexMatrix:
    """``sum_ij |i><j| (x) N(|i><j|)`` (input register first)."""
    di, do = m.din, m.dout
    # Lambda[(i,a),(j,b)] = N(|i><j|)[a,b] = T[a,b,i,j]
    return m.tensor().transpose(2, 0, 3, 1).reshape(di * do, di * do)


def from_choi(c, in_qubits: int, out_qubits: int) -> LinearMapRep:
    c = as_matrix(c)
    di, do = 1 << in_qubits, 1 << out_qubits
    if c.shape != (di * do, di * do):
        raise ValueError("Choi matrix shape does not match qubit counts")
    t = c.reshape(di, do, di, do).transpose(1, 3, 0, 2)
    return LinearMapRep.from_tensor(t)


def choi_t1(m: LinearMapRep) -> ComplexMatrix:
    """Choi matrix with the input factor transposed."""
    return partial_transpose_first(choi(m), m.in_qubits)


def from_choi_t1(c, in_qubits: int, out_qubits: int) -> LinearMapRep:
    return from_choi(partial_transpose_first(c, in_qubits), in_qubits, out_qubits)


def is_hermitian_preserving(m: LinearMapRep, tol: float = 1e-12) -> bool:
    c = choi(m)
    return operator_norm(c - dagger(c)) <= tol * max(1.0, operator_norm(c))


def is_trace_preserving(m: LinearMapRep, tol: float = 1e-10) -> bool:
    # Tr N(X) = vec(I)^T S vec(X) for all X  <=>  vec(I)^T S = vec(I)^T
    row = vec(np.eye(m.dout)) @ m.superop
    return float(np.max(np.abs(row - vec(np.eye(m.din))))) <= tol


def is_completely_positive(m: LinearMapRep, tol: float = 1e-10) -> bool:
    c = choi(m)
    if operator_norm(c - dagger(c)) > tol:
        return False
    return bool(np.linalg.eigvalsh((c + dagger(c)) / 2).min() >= -tol)


def condition_number(m: LinearMapRep) -> float:
    return float(np.linalg.cond(m.superop))


def invert(m: LinearMapRep, cond_cap: float = DEFAULT_CONDITION_CAP) -> LinearMapRep:
    """Exact inverse of a square superoperator.

    Raises
    ------
    IllConditionedMapError
        If the condition number exceeds ``cond_cap`` (singular maps give ``inf``).
    """
    if m.in_qubits != m.out_qubits:
        raise ValueError("only maps with equal input and output size can be inverted")
    cond = condition_number(m)
    if not np.isfinite(cond) or cond > cond_cap:
        raise IllConditionedMapError(cond, cond_cap)
    return LinearMapRep(m.in_qubits, m.out_qubits, np.linalg.inv(m.superop))


def choi_t1_cp(a, env_qubits: int) -> ComplexMatrix:
    """Partially transposed Choi matrix of ``rho -> Tr_Z(A rho A^dagger)``.

    Evaluated through the Stinespring sandwich
    ``(I_X I_Y <Phi+|_ZZ)(I_X A I_Z)(S_XX I_Z)(I_X A^dagger I_Z)(I_X I_Y |Phi+>_ZZ)``
    where ``A : X -> Y (x) Z``.
    """
    a = as_matrix(a)
    dz = 1 << env_qubits
    dyz, dx = a.shape
    if dyz % dz:
        raise ValueError("row dimension of A is not divisible by the environment dimension")
    dy = dyz // dz
    nx, ny = num_qubits(dx), num_qubits(dy)
    ix, iy, iz = eye(nx), eye(ny), np.eye(dz, dtype=np.complex128)
    phi = np.eye(dz, dtype=np.complex128).reshape(-1, 1)  # sum_z |zz>
    swap_xx = swap_operator(nx)
    close = kron(ix, iy, dagger(phi))
    open_ = kron(ix, iy, phi)
    return close @ kron(ix, a, iz) @ kron(swap_xx, iz) @ kron(ix, dagger(a), iz) @ open_


# named constructors ---------------------------------------------------------


def identity(qubits: int) -> LinearMapRep:
    d = 4**qubits
    return LinearMapRep(qubits, qubits, np.eye(d, dtype=np.complex128))


def transpose(qubits: int) -> LinearMapRep:
    d = 1 << qubits
    s = np.zeros((d * d, d * d), dtype=np.complex128)
    for r, c in itertools.product(range(d), repeat=2):
        s[r * d + c, c * d + r] = 1.0
    return LinearMapRep(qubits, qubits, s)


def reduction(qubits: int) -> LinearMapRep:
    """``A -> Tr(A) I - A``."""
    d = 1 << qubits
    vi = vec(np.eye(d))
    s = np.outer(vi, vi) - np.eye(d * d)
    return LinearMapRep(qubits, qubits, s.astype(np.complex128))


def partial_reduction(q: int) -> LinearMapRep:
    """Reduction map on the first ``q`` of ``2q`` qubits, identity on the rest."""
    return tensor_with_identity(reduction(q), q)


def pauli_strings(qubits: int) -> list[ComplexMatrix]:
    return [kron(*(PAULIS[c] for c in s)) for s in itertools.product("IXYZ", repeat=qubits)]


def depolarizing(p: float, qubits: int = 1) -> LinearMapRep:
    """``rho -> (1 - p) rho + p Tr(rho) I / d`` for ``p`` in ``[0, 1]``."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"depolarizing parameter p={p} outside [0, 1]")
    d = 1 << qubits
    strings = pauli_strings(qubits)
    weights = [1.0 - p + p / d**2] + [p / d**2] * (len(strings) - 1)
    return from_kraus(np.sqrt(w) * k for w, k in zip(weights, strings))


def amplitude_damping(gamma: float) -> LinearMapRep:
    if not 0.0 <= gamma <= 1.0:
        raise ValueError(f"damping gamma={gamma} outside [0, 1]")
    k0 = np.array([[1, 0], [0, np.sqrt(1 - gamma)]], dtype=np.complex128)
    k1 = np.array([[0, np.sqrt(gamma)], [0, 0]], dtype=np.complex128)
    return from_kraus([k0, k1])


def pauli_channel(px: float, py: float, pz: float) -> LinearMapRep:
    probs = [1.0 - px - py - pz, px, py, pz]
    if min(probs) < 0:
        raise ValueError("Pauli channel probabilities must be non-negative and sum to <= 1")
    return from_kraus(np.sqrt(w) * PAULIS[c] for w, c in zip(probs, "IXYZ"))


def conjugation(a) -> LinearMapRep:
    """``X -> A X A^dagger``."""
    a = as_matrix(a)
    return from_kraus_pairs([(a, a)])


def random_map(in_qubits: int, out_qubits: int, rng: np.random.Generator) -> LinearMapRep:
    """Gaussian superoperator: generically neither Hermitian-preserving nor positive."""
    shape = (4**out_qubits, 4**in_qubits)
    s = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    return LinearMapRep(in_qubits, out_qubits, s)


def random_hp_map(in_qubits: int, out_qubits: int, rng: np.random.Generator) -> LinearMapRep:
    """Random Hermitian-preserving map (Hermitian Choi matrix)."""
    d = 1 << (in_qubits + out_qubits)
    g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    return from_choi((g + dagger(g)) / 2, in_qubits, out_qubits)


def by_name(name: str, **params) -> LinearMapRep:
    """Build a named map; used by the JSON shorthand."""
    q = int(params.get("qubits", 1))
    key = name.lower()
    if key == "identity":
        return identity(q)
    if key == "transpose":
        return transpose(q)
    if key == "reduction":
        return reduction(q)
    if key in ("partial_reduction", "reduction_partial", "reduction-partial"):
        return partial_reduction(q)
    if key in ("depolarizing", "dep"):
        return depolarizing(float(params["p"]), q)
    if key in ("amplitude_damping", "ad"):
        return amplitude_damping(float(params["gamma"]))
    if key == "pauli":
        return pauli_channel(float(params["px"]), float(params["py"]), float(params["pz"]))
    raise ValueError(f"unknown map name {name!r}")


def parse_shorthand(text: str) -> LinearMapRep:
    """Parse CLI shorthands such as ``identity:1``, ``dep:0.25``, ``dep:0.1:2``.

    ``name:qubits`` for identity/transpose/reduction/reduction-partial,
    ``dep:p[:qubits]``, ``ad:gamma``, ``pauli:px,py,pz``.
    """
    parts = text.split(":")
    name, args = parts[0].lower(), parts[1:]
    try:
        if name in ("identity", "transpose", "reduction", "reduction-partial"):
            q = int(args[0]) if args else 1
            if q < 1:
                raise ValueError("qubit count must be positive")
            return by_name(name, qubits=q)
        if name in ("dep", "depolarizing"):
            q = int(args[1]) if len(args) > 1 else 1
            return depolarizing(float(args[0]), q)
        if name in ("ad", "amplitude_damping"):
            return amplitude_damping(float(args[0]))
        if name == "pauli":
            px, py, pz = (float(v) for v in args[0].split(","))
            return pauli_channel(px, py, pz)
    except IndexError:
        raise ValueError(f"map shorthand {text!r} is missing a parameter") from None
    raise ValueError(f"unknown map shorthand {text!r}")


def reduction_t1_terms(q: int) -> tuple[ComplexMatrix, ComplexMatrix]:
    """The two permutation unitaries ``I_A (x) S_B`` and ``S_A (x) S_B``.

    Register order is ``(A, B, A', B')``, i.e. input then output of the
    ``2q``-qubit map ``R (x) id``; their difference is its ``choi_t1``.
    """
    n = 2 * q
    a, b, a2, b2 = (list(range(i * q, (i + 1) * q)) for i in range(4))
    swap_b = permutation_matrix(a + b2 + a2 + b)
    swap_all = permutation_matrix(a2 + b2 + a + b)
    return swap_b, swap_all


def kraus_from_choi(c, in_qubits: int, out_qubits: int, tol: float = 1e-12) -> list[ComplexMatrix]:
    """Kraus operators of a CP map from its PSD Choi matrix."""
    c = as_matrix(c)
    evals, evecs = np.linalg.eigh((c + dagger(c)) / 2)
    di, do = 1 << in_qubits, 1 << out_qubits
    ops = []
    for lam, v in zip(evals[::-1], evecs.T[::-1]):
        if lam < -1e-10:
            raise ValueError("Choi matrix is not PSD; map is not CP")
        if lam > tol:
            # v[(i,a)] -> K[a, i]
            ops.append(np.sqrt(lam) * v.reshape(di, do).T)
    return ops


__all__: Sequence[str] = [
    "IllConditionedMapError",
    "LinearMapRep",
    "amplitude_damping",
    "apply",
    "by_name",
    "choi",
    "choi_t1",
    "choi_t1_cp",
    "compose",
    "conjugation",
    "depolarizing",
    "from_choi",
    "from_choi_t1",
    "from_kraus",
    "from_kraus_pairs",
    "identity",
    "invert",
    "parse_shorthand",
    "partial_reduction",
    "pauli_channel",
    "random_hp_map",
    "random_map",
    "reduction",
    "reduction_t1_terms",
    "tensor_maps",
    "tensor_with_identity",
    "transpose",
]
