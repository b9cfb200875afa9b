"""
Recovering a pure state from its image under a known invertible channel.

The partially transposed Choi matrix of ``E^{-1}`` is block encoded by exact
dilation with ``alpha = ||choi_t1(E^{-1})||``. Assembled with a purification
of ``E(psi)`` it block encodes ``|psi><psi| / alpha``, so post-selecting on a
reference state ``sigma`` succeeds with probability ``<psi|sigma|psi> / alpha^2``
and leaves exactly ``psi`` behind.
"""

from __future__ import annotations

import math

import numpy as np

from belt.blockenc import BlockEncoding, exact_dilation
from belt.core import DEFAULT_QUBIT_CAP, QubitCapError, belt_assemble, postselect, purify
from belt.linalg import as_matrix, dagger, is_density, operator_norm, pure_density
from belt.maps import LinearMapRep, choi_t1, invert
from belt.protocols.report import ProtocolReport
from belt.spectral import amplify

FIDELITY_TOL = 1e-9


def trial_budget(p_run: float, delta: float) -> int:
    """Smallest number of independent runs that all fail with probability at most ``delta``."""
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    if p_run <= 0:
        raise ValueError("per-run success probability is zero; sigma is orthogonal to psi")
    if p_run >= 1:
        return 1
    return max(1, math.ceil(math.log(1 / delta) / -math.log1p(-p_run)))


def inverse_encoding(e: LinearMapRep) -> BlockEncoding:
    lam = choi_t1(invert(e))
    return exact_dilation(lam, operator_norm(lam))


def invert_channel(
    e: LinearMapRep,
    psi,
    sigma,
    mode: str = "postselect",
    delta: float = 0.01,
    rng=None,
    seed: int | None = None,
    shots: int = 0,
    degree: int | None = None,
    qubit_cap: int = DEFAULT_QUBIT_CAP,
) -> ProtocolReport:
    """Run the recovery circuit repeatedly until success or the trial budget runs out.

    Parameters
    ----------
    e : LinearMapRep
        Invertible channel on ``n`` qubits.
    psi : array_like
        The unknown pure state (vector), used to prepare ``E(psi)`` and to
        score the recovered state.
    sigma : array_like
        Reference density matrix.
    mode : {"postselect", "amplified"}
        ``amplified`` wraps the assembled unitary in Chebyshev amplification.
    shots : int
        Extra independent runs used only to estimate the per-run success rate.
    """
    if mode not in ("postselect", "amplified"):
        raise ValueError(f"unknown mode {mode!r}")
    if e.in_qubits != e.out_qubits:
        raise ValueError("channel must map n qubits to n qubits")
    if rng is None:
        rng = np.random.default_rng(seed)
    psi = as_matrix(psi).reshape(-1, 1)
    psi = psi / np.linalg.norm(psi)
    sigma = as_matrix(sigma)
    n = e.in_qubits
    if psi.shape[0] != 1 << n or sigma.shape != (1 << n, 1 << n):
        raise ValueError("psi and sigma must live on the channel's qubits")
    if not is_density(sigma, 1e-9):
        raise ValueError("sigma must be a density matrix")

    u_inv = inverse_encoding(e)
    alpha = u_inv.alpha
    rho = e(pure_density(psi))
    rho = (rho + dagger(rho)) / 2
    oracle = purify(rho)
    v = belt_assemble(u_inv, oracle, n, n, qubit_cap)
    overlap = float(np.real(dagger(psi) @ sigma @ psi)[0, 0])
    p_formula = overlap / alpha**2

    rep = ProtocolReport("invert", seed, 0)
    calls_per_run = 2
    if mode == "amplified":
        if v.total_qubits + 1 > qubit_cap:
            raise QubitCapError(f"amplified circuit needs {v.total_qubits + 1} qubits, cap is {qubit_cap}")
        amp = amplify(v, degree)
        run_enc = amp.encoding
        calls_per_run = 2 * amp.unitary_calls
        p_formula = amp.gain**2 * overlap
        rep.warnings.extend(amp.warnings)
        rep.result["amplification"] = {
            "degree": amp.degree,
            "input_amplitude": amp.input_amplitude,
            "gain": amp.gain,
            "unitary_calls": amp.unitary_calls,
        }
    else:
        run_enc = v

    post = postselect(run_enc, sigma)
    p_circuit = post.success_prob
    budget = trial_budget(p_formula, delta)

    fidelity = None
    outcomes = []
    if post.conditional_state is not None:
        fidelity = float(np.real(dagger(psi) @ post.conditional_state @ psi)[0, 0])
    for _ in range(budget):
        ok = bool(rng.random() < p_circuit)
        outcomes.append(int(ok))
        if ok:
            break
    succeeded = bool(outcomes and outcomes[-1])
    rep.trials = len(outcomes)
    rep.outcomes = outcomes
    rep.oracle_calls = rep.trials * calls_per_run
    rep.result.update(
        {
            "mode": mode,
            "qubits": n,
            "alpha": alpha,
            "choi_t1_norm": alpha,
            "sigma_overlap": overlap,
            "trial_budget": budget,
            "succeeded": succeeded,
            "fidelity": fidelity if succeeded else None,
            "postselected_fidelity": fidelity,
            "calls_per_trial": calls_per_run,
            "circuit_qubits": run_enc.total_qubits,
        }
    )
    rep.probabilities = {"per_run_formula": p_formula, "per_run_circuit": p_circuit}
    if shots:
        hits = int((rng.random(shots) < p_circuit).sum())
        rate = hits / shots
        se = math.sqrt(max(p_formula * (1 - p_formula), 1e-300) / shots)
        rep.probabilities.update({"shots": shots, "empirical_rate": rate, "std_error": se})
        rep.add_claim("empirical_rate_within_3sigma", abs(rate - p_formula), 3 * se)
    rep.add_claim("formula_vs_circuit", abs(p_formula - p_circuit), 1e-10)
    if fidelity is not None:
        rep.add_claim("recovered_fidelity", fidelity, 1 - FIDELITY_TOL, ">=")
    return rep
