"""
Polynomial transformations of block encodings, and their sample-based variant.

Two phase conventions are pinned by the circuit builders below.

``qsvt-reflection``
    For phases ``(phi_0, ..., phi_d)`` and a block encoding ``U`` with
    ancilla projector ``Pi = |0^m><0^m| (x) I``, the circuit is
    ``e^{i phi_d R} X_d ... e^{i phi_1 R} X_1 e^{i phi_0 R}`` with
    ``R = 2 Pi - I``, ``X_j = U`` for odd ``j`` and ``U^dagger`` for even ``j``.
    Each ``e^{i phi R}`` is realised on one extra control qubit as
    ``C_Pi NOT (e^{-i phi Z} (x) I) C_Pi NOT``. With interior phases ``pi/2``
    the block is ``T_d`` of the input block's singular values.

``qetu-symmetric``
    ``e^{i phi_0 X} cU e^{i phi_1 X} cU^dagger e^{i phi_2 X} ...`` on one control
    qubit, controlled-``U`` and controlled-``U^dagger`` alternating. Its
    ``<0|.|0>`` block is an even polynomial ``F(cos(H/2))`` for ``U = e^{-iH}``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from belt.blockenc import BlockEncoding
from belt.linalg import (
    ComplexMatrix,
    as_matrix,
    dagger,
    eye,
    is_density,
    is_hermitian,
    kron,
    mat_exp_i,
    num_qubits,
    operator_norm,
    partial_trace,
    permute_qubits,
)
from belt.maps import LinearMapRep, apply, choi_t1, is_hermitian_preserving

QSVT = "qsvt-reflection"
QETU = "qetu-symmetric"

X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
P0 = np.array([[1, 0], [0, 0]], dtype=np.complex128)
P1 = np.array([[0, 0], [0, 1]], dtype=np.complex128)


@dataclass(frozen=True)
class PhaseSequence:
    phases: tuple
    convention: str = QSVT

    def __post_init__(self):
        object.__setattr__(self, "phases", tuple(float(p) for p in self.phases))
        if self.convention not in (QSVT, QETU):
            raise ValueError(f"unknown phase convention {self.convention!r}")

    @property
    def degree(self) -> int:
        return len(self.phases) - 1

    def is_palindromic(self, tol: float = 1e-12) -> bool:
        p = np.asarray(self.phases)
        return bool(np.all(np.abs(p - p[::-1]) <= tol))


def chebyshev_phases(degree: int, convention: str = QSVT) -> PhaseSequence:
    """Closed-form phases realising the Chebyshev polynomial ``T_degree``.

    In the QSVT convention the interior phases are ``pi/2`` (each turning
    ``e^{i phi R}`` into ``i R``) and the two end phases
    ``-(degree - 1) pi / 4`` cancel the accumulated ``i^{degree-1}``. In the
    QETU convention (even degree only) the sequence ``(pi/4, -pi/2, ...,
    -pi/2, pi/4)`` gives ``T_degree(cos(H/2))``, with the middle phase
    raised by ``pi`` when ``degree`` is a multiple of four.
    """
    if degree < 1 and convention == QSVT:
        raise ValueError("Chebyshev degree must be at least 1")
    if convention == QSVT:
        end = -(degree - 1) * math.pi / 4
        return PhaseSequence((end,) + (math.pi / 2,) * (degree - 1) + (end,), QSVT)
    if degree % 2:
        raise ValueError("QETU realises even polynomials only")
    if degree == 0:
        return PhaseSequence((0.0,), QETU)
    inner = [-math.pi / 2] * (degree - 1)
    if degree % 4 == 0:
        # e^{i pi X} = -I: shifting the middle phase by pi fixes the overall sign
        inner[degree // 2 - 1] += math.pi
    return PhaseSequence((math.pi / 4, *inner, math.pi / 4), QETU)


def qetu_square_phases() -> PhaseSequence:
    """Phases giving ``F(x) = x^2``, i.e. the block ``cos^2(H/2)``."""
    return PhaseSequence((math.pi / 8, -math.pi / 4, math.pi / 8), QETU)


def _projector_phase(phi: float, m: int, s: int) -> ComplexMatrix:
    """``C_Pi NOT (e^{-i phi Z} (x) I) C_Pi NOT`` on (control, m ancillas, s system)."""
    d = 1 << (m + s)
    pi = np.zeros((d, d), dtype=np.complex128)
    pi[: 1 << s, : 1 << s] = np.eye(1 << s)
    cnot = kron(X, pi) + kron(eye(1), np.eye(d) - pi)
    rz = np.diag([np.exp(-1j * phi), np.exp(1j * phi)])
    return cnot @ kron(rz, np.eye(d)) @ cnot


def qsvt_apply(be: BlockEncoding, phases: PhaseSequence) -> BlockEncoding:
    """Polynomial of the block of ``be`` via alternating ``U``/``U^dagger``.

    Uses one extra ancilla (most significant). The returned encoding has
    ``alpha = 1``: its block is the polynomial applied to ``block(be)``, for
    odd degree ``W P(Sigma) V^dagger`` and for even degree ``V P(Sigma) V^dagger``
    in terms of the SVD ``W Sigma V^dagger`` of the input block.
    """
    if not phases.phases:
        raise ValueError("empty phase sequence")
    if phases.convention != QSVT:
        raise ValueError("qsvt_apply expects qsvt-reflection phases")
    m, s = be.anc_qubits, be.sys_qubits
    u = kron(eye(1), be.unitary)
    ud = dagger(u)
    circ = _projector_phase(phases.phases[0], m, s)
    for j, phi in enumerate(phases.phases[1:], start=1):
        circ = (u if j % 2 else ud) @ circ
        circ = _projector_phase(phi, m, s) @ circ
    return BlockEncoding(circ, 1.0, m + 1, 0.0, s)


def unitary_calls(degree: int) -> dict:
    """How many times a degree-``degree`` QSVT sequence uses ``U`` and ``U^dagger``."""
    return {"U": (degree + 1) // 2, "U_dagger": degree // 2, "total": degree}


def chebyshev(degree: int, x):
    return np.polynomial.chebyshev.chebval(x, [0] * degree + [1])


def amplification_degree(c: float) -> int:
    """Odd ``N`` nearest to ``pi / (2 arcsin c)``, where ``|T_N(c)|`` peaks."""
    if not 0 < c <= 1:
        raise ValueError("amplitude must lie in (0, 1]")
    target = math.pi / (2 * math.asin(c))
    lo = max(1, 2 * math.floor((target - 1) / 2) + 1)
    return lo if target - lo <= lo + 2 - target else lo + 2


@dataclass
class AmplifiedEncoding:
    encoding: BlockEncoding
    degree: int
    input_amplitude: float
    gain: float
    unitary_calls: int
    second_ratio: float
    warnings: list = field(default_factory=list)


def amplify(be: BlockEncoding, degree: int | None = None) -> AmplifiedEncoding:
    """Chebyshev amplification of a block close to ``c |psi><psi|``.

    ``degree`` defaults to :func:`amplification_degree` of the measured
    ``c``. The achieved gain is the top singular value of the output block.
    """
    sv = np.linalg.svd(be.block(), compute_uv=False)
    c = float(sv[0])
    ratio = float(sv[1] / sv[0]) if len(sv) > 1 and sv[0] > 0 else 0.0
    warnings = []
    if ratio > 0.1:
        warnings.append(f"block is not close to rank one (second/first singular value {ratio:.3f})")
    if degree is None:
        degree = amplification_degree(min(c, 1.0))
    out = qsvt_apply(be, chebyshev_phases(degree))
    gain = float(np.linalg.svd(out.block(), compute_uv=False)[0])
    return AmplifiedEncoding(out, degree, c, gain, unitary_calls(degree)["total"], ratio, warnings)


# QETU -----------------------------------------------------------------------


def _check_qetu_phases(phases: PhaseSequence):
    if phases.convention != QETU:
        raise ValueError("QETU needs qetu-symmetric phases")
    if len(phases.phases) % 2 == 0 or not phases.is_palindromic():
        raise ValueError("QETU phases must be a palindrome of odd length (even degree)")


def _x_rotation(phi: float, s: int) -> ComplexMatrix:
    rx = np.cos(phi) * np.eye(2) + 1j * np.sin(phi) * X
    return kron(rx, eye(s))


def _controlled(u: ComplexMatrix) -> ComplexMatrix:
    return kron(P0, np.eye(u.shape[0])) + kron(P1, u)


def qetu_circuit(u, phases: PhaseSequence) -> BlockEncoding:
    """``(1, 1, 0)``-block encoding of ``F(cos(H/2))`` for ``u = e^{-iH}``."""
    _check_qetu_phases(phases)
    u = as_matrix(u)
    s = num_qubits(u.shape[0])
    cu, cud = _controlled(u), _controlled(dagger(u))
    circ = _x_rotation(phases.phases[0], s)
    for j, phi in enumerate(phases.phases[1:], start=1):
        circ = (cu if j % 2 else cud) @ circ
        circ = _x_rotation(phi, s) @ circ
    return BlockEncoding(circ, 1.0, 1, 0.0, s)


# HME ------------------------------------------------------------------------


def hme_step(lam_t1, rho, sigma, delta: float) -> ComplexMatrix:
    """One interaction step ``Tr_1[e^{-i L delta} (rho (x) sigma) e^{i L delta}]``.

    ``L`` is the (Hermitian) partially transposed Choi matrix of the map; the
    first register holds the consumed copy of ``rho``. To first order in
    ``delta`` this is ``sigma - i delta [N(rho), sigma]``.
    """
    lam_t1, rho, sigma = as_matrix(lam_t1), as_matrix(rho), as_matrix(sigma)
    if not is_hermitian(lam_t1, 1e-10 * max(1.0, operator_norm(lam_t1))):
        raise ValueError("HME needs a Hermitian-preserving map (Hermitian choi_t1)")
    n, k = num_qubits(rho.shape[0]), num_qubits(sigma.shape[0])
    w = mat_exp_i(lam_t1, delta)
    out = w @ kron(rho, sigma) @ dagger(w)
    return partial_trace(out, [n, k], keep=[1])


@dataclass(frozen=True)
class HmeConfig:
    total_time: float
    steps: int

    def __post_init__(self):
        if int(self.steps) != self.steps or self.steps < 1:
            raise ValueError("steps must be a positive integer")
        if not self.total_time > 0:
            raise ValueError("total_time must be positive")

    @property
    def delta(self) -> float:
        return self.total_time / self.steps

    @property
    def copies(self) -> int:
        return int(self.steps)


def hme_evolve(lam_t1, rho, sigma, t: float | HmeConfig, steps: int | None = None) -> ComplexMatrix:
    """``steps`` HME steps of size ``t / steps``; approximates ``e^{-iN(rho)t} sigma e^{iN(rho)t}``.

    ``t`` may be an :class:`HmeConfig`, in which case ``steps`` is taken from it.
    """
    cfg = t if isinstance(t, HmeConfig) else HmeConfig(float(t), steps if steps is not None else 0)
    steps, delta = cfg.steps, cfg.delta
    w = mat_exp_i(as_matrix(lam_t1), delta)
    rho = as_matrix(rho)
    n, k = num_qubits(rho.shape[0]), num_qubits(as_matrix(sigma).shape[0])
    out = as_matrix(sigma)
    for _ in range(steps):
        out = partial_trace(w @ kron(rho, out) @ dagger(w), [n, k], keep=[1])
    return out


def _superop_of_unitary(u: ComplexMatrix) -> ComplexMatrix:
    return np.kron(np.conj(u), u)


def controlled_hme_superop(lam_t1, rho, delta: float) -> ComplexMatrix:
    """Superoperator on (control, system) of one controlled HME unit cell.

    The cell exponentiates ``|1><1|_c (x) L`` acting on (control, copy, system)
    and traces out the copy of ``rho``.
    """
    lam_t1, rho = as_matrix(lam_t1), as_matrix(rho)
    n = num_qubits(rho.shape[0])
    k = num_qubits(lam_t1.shape[0]) - n
    g = kron(P1, lam_t1)  # on (c, copy, sys)
    # reorder to (copy, c, sys) so the copy is the leading register
    g = permute_qubits(g, list(range(1, 1 + n)) + [0] + list(range(1 + n, 1 + n + k)))
    w = mat_exp_i(g, delta)
    dcs = 1 << (1 + k)
    evals, evecs = np.linalg.eigh((rho + dagger(rho)) / 2)
    sup = np.zeros((dcs * dcs, dcs * dcs), dtype=np.complex128)
    for lam, v in zip(evals, evecs.T):
        if lam <= 1e-15:
            continue
        # K_{a,i} = (<a| (x) I) W (|v_i> (x) I)
        wv = w @ kron(v.reshape(-1, 1), np.eye(dcs))
        for a in range(1 << n):
            kop = wv[a * dcs : (a + 1) * dcs, :]
            sup += lam * np.kron(np.conj(kop), kop)
    return sup


@dataclass
class QetuHmeReport:
    degree: int
    steps_per_u: int
    copies: int
    deviation_from_circuit: float
    deviation_from_target: float | None
    ideal_block: ComplexMatrix
    block_superop: ComplexMatrix


def _block_superop(total: ComplexMatrix, s: int) -> ComplexMatrix:
    """Restrict a (control, system) superoperator to ``X -> <0| S(|0><0| (x) X) |0>``."""
    d = 1 << s
    full = 2 * d
    # column-stacked index of (c_r, x_r, c_c, x_c) with c = 0 on both sides
    sel = [col * full + row for col in range(d) for row in range(d)]
    return total[np.ix_(sel, sel)]


def qetu_hme(
    m: LinearMapRep,
    rho,
    phases: PhaseSequence,
    steps_per_u: int,
    target: Callable[[ComplexMatrix], ComplexMatrix] | ComplexMatrix | None = None,
) -> QetuHmeReport:
    """QETU with every controlled ``e^{-iN(rho)}`` replaced by controlled HME.

    Deviation is the spectral norm of the difference between the realised
    post-selected superoperator ``X -> <0|C(|0><0| (x) X)|0>`` and ``X -> B X B^dagger``
    for the ideal block ``B``. ``target``, when given, is the matrix
    ``F(cos(N(rho)/2))`` (or a function of ``N(rho)`` returning it).
    """
    _check_qetu_phases(phases)
    if m.in_qubits != m.out_qubits:
        raise ValueError("QETU+HME needs a map with equal input and output size")
    if not is_hermitian_preserving(m, 1e-10):
        raise ValueError("QETU+HME needs a Hermitian-preserving map")
    if steps_per_u < 1:
        raise ValueError("steps_per_u must be positive")
    rho = as_matrix(rho)
    if not is_density(rho, 1e-9):
        raise ValueError("rho must be a density matrix")
    s = m.out_qubits
    h = apply(m, rho)
    h = (h + dagger(h)) / 2
    ideal = qetu_circuit(mat_exp_i(h, 1.0), phases).block()

    lam = choi_t1(m)
    delta = 1.0 / steps_per_u
    fwd = np.linalg.matrix_power(controlled_hme_superop(lam, rho, delta), steps_per_u)
    bwd = np.linalg.matrix_power(controlled_hme_superop(lam, rho, -delta), steps_per_u)
    total = _superop_of_unitary(_x_rotation(phases.phases[0], s))
    for j, phi in enumerate(phases.phases[1:], start=1):
        total = (fwd if j % 2 else bwd) @ total
        total = _superop_of_unitary(_x_rotation(phi, s)) @ total
    realised = _block_superop(total, s)
    dev_circuit = operator_norm(realised - _superop_of_unitary(ideal))
    dev_target = None
    if target is not None:
        tmat = target(h) if callable(target) else as_matrix(target)
        dev_target = operator_norm(realised - _superop_of_unitary(tmat))
    degree = phases.degree
    return QetuHmeReport(degree, steps_per_u, degree * steps_per_u, dev_circuit, dev_target, ideal, realised)


def matrix_function(h, f: Callable[[np.ndarray], np.ndarray]) -> ComplexMatrix:
    """``f(h)`` for Hermitian ``h`` by eigendecomposition."""
    h = as_matrix(h)
    evals, evecs = np.linalg.eigh((h + dagger(h)) / 2)
    return (evecs * f(evals)) @ dagger(evecs)


__all__: Sequence[str] = [
    "HmeConfig",
    "PhaseSequence",
    "amplification_degree",
    "amplify",
    "chebyshev_phases",
    "controlled_hme_superop",
    "hme_evolve",
    "hme_step",
    "matrix_function",
    "qetu_circuit",
    "qetu_hme",
    "qetu_square_phases",
    "qsvt_apply",
]
