"""
Discretised pseudo-differential operators and their conjugation action.

On a periodic grid of ``P = 2^p`` points per axis in ``d`` dimensions,

    T[x, y] = P^{-d} sum_xi exp(2 pi i (x - y) . xi / P) a(x, xi),

so the constant symbol ``a = 1`` gives the identity. Frequencies ``xi`` are
the signed integers ``-P/2, ..., P/2 - 1``; positions enter symbols as the
physical coordinate ``x / P`` in ``[0, 1)``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from belt.blockenc import BlockEncoding, exact_dilation
from belt.core import DEFAULT_QUBIT_CAP, belt_assemble, purify
from belt.linalg import ComplexMatrix, as_matrix, dagger, eye, kron, num_qubits, operator_norm, permute_qubits, swap_operator
from belt.maps import choi_t1, from_kraus_pairs

MAX_GRID_QUBITS = 13

Symbol = Callable[[np.ndarray, np.ndarray], complex]


@dataclass(frozen=True)
class PdoSpec:
    dims: int
    p: int
    symbol: Symbol
    omega: Optional[Callable] = None

    def __post_init__(self):
        if self.dims < 1 or self.p < 1:
            raise ValueError("dims and p must be positive")
        if self.dims * self.p > MAX_GRID_QUBITS:
            raise ValueError(f"grid of (2^{self.p})^{self.dims} points exceeds 2^{MAX_GRID_QUBITS}")

    @property
    def points(self) -> int:
        return 1 << self.p

    @property
    def size(self) -> int:
        return self.points**self.dims


def signed_frequencies(points: int) -> np.ndarray:
    return np.fft.fftshift(np.fft.fftfreq(points, 1.0 / points)).astype(int)


def grid(points: int, dims: int) -> np.ndarray:
    """All grid indices in row-major order, shape ``(points**dims, dims)``."""
    return np.array(list(itertools.product(range(points), repeat=dims)), dtype=int).reshape(-1, dims)


def pdo_build(spec: PdoSpec) -> ComplexMatrix:
    """Dense ``P^d x P^d`` matrix of the discretised operator."""
    pts, d = spec.points, spec.dims
    xs = grid(pts, d)
    freqs = signed_frequencies(pts)
    xis = np.array(list(itertools.product(freqs, repeat=d)), dtype=int).reshape(-1, d)
    # F[xi, y] = exp(-2 pi i y . xi / P)
    fwd = np.exp(-2j * np.pi * (xis @ xs.T) / pts)
    symb = np.array([[spec.symbol(x, xi) for xi in xis] for x in xs], dtype=np.complex128)
    back = np.exp(2j * np.pi * (xs @ xis.T) / pts) * symb
    return back @ fwd / pts**d


def constant_symbol(value: complex = 1.0) -> Symbol:
    return lambda x, xi: value


def elliptic_symbol(points: int, omega: Callable, grad_omega: Callable) -> Symbol:
    """``a(x, xi) = 1 - 2 pi i grad(omega)(x/P) . xi + 4 pi^2 |xi|^2``.

    ``omega`` maps physical coordinates to reals; only its gradient enters
    the symbol.
    """

    def a(x, xi):
        xp = np.asarray(x, dtype=float) / points
        xi = np.asarray(xi, dtype=float)
        g = np.asarray(grad_omega(xp), dtype=float).reshape(xi.shape)
        return 1 - 2j * np.pi * float(g @ xi) + 4 * np.pi**2 * float(xi @ xi)

    a.omega = omega
    return a


def omega_preset(text: str, dims: int):
    """``const:c`` or ``sin:amp`` (``omega = 1 + amp * prod sin(2 pi x_j)``); returns (omega, grad)."""
    kind, _, arg = text.partition(":")
    val = float(arg) if arg else 1.0
    if kind == "const":
        return (lambda x: val), (lambda x: np.zeros(dims))
    if kind == "sin":

        def omega(x):
            return 1 + val * float(np.prod(np.sin(2 * np.pi * np.asarray(x))))

        def grad(x):
            s = np.sin(2 * np.pi * np.asarray(x, dtype=float))
            c = np.cos(2 * np.pi * np.asarray(x, dtype=float))
            return np.array([val * 2 * np.pi * c[j] * np.prod(np.delete(s, j)) for j in range(dims)])

        return omega, grad
    raise ValueError(f"unknown omega preset {text!r}")


def elliptic_spec(dims: int, p: int, omega: str = "const:1") -> PdoSpec:
    w, g = omega_preset(omega, dims)
    return PdoSpec(dims, p, elliptic_symbol(1 << p, w, g), w)


def conjugation_unitary(u_t: BlockEncoding) -> ComplexMatrix:
    """``(I_X (x) U_T)(S_XY)(I_X (x) U_T^dagger)`` on registers ``(a1, a2, X, Y)``.

    ``U_T`` acts on ancilla ``a1`` and register ``Y``, ``U_T^dagger`` on ``a2``
    and ``Y``. With both ancillas in zero this is ``(I (x) T) S (I (x) T^dagger) / alpha^2``,
    the partially transposed Choi matrix of ``X -> T X T^dagger``.
    """
    s = u_t.sys_qubits
    if u_t.anc_qubits != 1:
        raise ValueError("expected a one-ancilla encoding of T")
    # built on (anc, Y, idle ancilla, X), then moved to (a1, a2, X, Y)
    xs = [2 + s + i for i in range(s)]
    ys = [1 + i for i in range(s)]
    left = permute_qubits(kron(u_t.unitary, eye(1 + s)), [0, 1 + s] + xs + ys)
    right = permute_qubits(kron(dagger(u_t.unitary), eye(1 + s)), [1 + s, 0] + xs + ys)
    mid = kron(eye(2), swap_operator(s))
    return left @ mid @ right


def pdo_conjugate(t, rho, qubit_cap: int = DEFAULT_QUBIT_CAP) -> BlockEncoding:
    """Block encoding of ``T rho T^dagger`` with scale ``||T||^2``."""
    t, rho = as_matrix(t), as_matrix(rho)
    if t.shape[0] != t.shape[1] or t.shape != rho.shape:
        raise ValueError(f"T {t.shape} and rho {rho.shape} must be square of one size")
    s = num_qubits(t.shape[0])
    u_t = exact_dilation(t, operator_norm(t))
    alpha = u_t.alpha**2
    u_f = BlockEncoding(conjugation_unitary(u_t), alpha, 2, 2 * u_t.declared_eps * u_t.alpha, 2 * s)
    return belt_assemble(u_f, purify(rho), s, s, qubit_cap)


def pdo_conjugate_via_map(t, rho, qubit_cap: int = DEFAULT_QUBIT_CAP) -> BlockEncoding:
    """Same target through the generic map route: ``from_kraus_pairs([(T, T)])``, exact dilation, assembly."""
    t, rho = as_matrix(t), as_matrix(rho)
    s = num_qubits(t.shape[0])
    lam = choi_t1(from_kraus_pairs([(t, t)]))
    return belt_assemble(exact_dilation(lam, operator_norm(lam)), purify(rho), s, s, qubit_cap)
