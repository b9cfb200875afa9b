"""
``belt`` command-line interface.

Every subcommand prints one JSON report (or a CSV table with ``--csv``) on
standard output. Exit status is 0 when every claim in the report holds, 1 on
invalid input and 2 when a numerical claim misses its tolerance.
"""

from __future__ import annotations

import argparse
import csv
import io as _io
import os
import sys
import time
from dataclasses import replace
from pathlib import Path

import numpy as np

from belt import __version__
from belt import maps
from belt.blockenc import exact_dilation, pauli_lcu, sparse_block_encoding, verify
from belt.core import DEFAULT_QUBIT_CAP, QubitCapError, belt_assemble, postselect, purify, success_probability_formula
from belt.io import dumps, map_from_json, matrix_from_json, phases_from_json, read_json
from belt.linalg import (
    basis_state,
    haar_state,
    is_hermitian,
    make_rng,
    mat_exp_i,
    operator_norm,
    pure_density,
    random_density,
)
from belt.protocols.detection import reduction_encoding, run_detection
from belt.protocols.inversion import invert_channel
from belt.protocols.pdo import (
    PdoSpec,
    constant_symbol,
    elliptic_spec,
    pdo_build,
    pdo_conjugate,
    pdo_conjugate_via_map,
)
from belt.protocols.report import Claim
from belt.spectral import (
    PhaseSequence,
    chebyshev_phases,
    hme_evolve,
    qetu_circuit,
    qetu_hme,
    qetu_square_phases,
    qsvt_apply,
)

SEED_ENV = "BELT_SEED"
EXIT_OK, EXIT_INVALID, EXIT_NUMERICAL = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"{SEED_ENV}={raw!r} is not an integer") from None


# argument helpers -----------------------------------------------------------


def load_map(text: str) -> maps.LinearMapRep:
    """A map file in the JSON format or a shorthand like ``dep:0.25``."""
    if Path(text).is_file():
        return map_from_json(read_json(text))
    return maps.parse_shorthand(text)


def load_state(text: str, qubits: int, rng) -> np.ndarray:
    """Density matrix from ``mixed``, ``zero``, ``random``, ``pure`` or a matrix file."""
    if Path(text).is_file():
        rho = matrix_from_json(read_json(text))
        if rho.shape != (1 << qubits, 1 << qubits):
            raise ValueError(f"state in {text} has shape {rho.shape}, expected {qubits} qubits")
        return rho
    if text == "mixed":
        return np.eye(1 << qubits, dtype=np.complex128) / (1 << qubits)
    if text == "zero":
        return pure_density(basis_state(0, qubits))
    if text == "random":
        return random_density(qubits, rng)
    if text == "pure":
        return pure_density(haar_state(qubits, rng))
    raise ValueError(f"unknown state {text!r} (use mixed, zero, random, pure or a file)")


def load_vector(text: str, qubits: int, rng) -> np.ndarray:
    if Path(text).is_file():
        v = matrix_from_json(read_json(text)).reshape(-1, 1)
        if v.shape[0] != 1 << qubits:
            raise ValueError(f"vector in {text} has the wrong dimension")
        return v / np.linalg.norm(v)
    if text == "haar":
        return haar_state(qubits, rng)
    if text == "zero":
        return basis_state(0, qubits)
    if text == "plus":
        return np.ones((1 << qubits, 1), dtype=np.complex128) / np.sqrt(1 << qubits)
    raise ValueError(f"unknown vector {text!r} (use haar, zero, plus or a file)")


def _int_list(text: str) -> list[int]:
    try:
        vals = [int(v) for v in text.split(",") if v]
    except ValueError:
        raise argparse.ArgumentTypeError(f"{text!r} is not a comma-separated list of integers") from None
    if not vals or any(v < 1 for v in vals):
        raise argparse.ArgumentTypeError("expected positive integers")
    return vals


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{text!r} is not an integer") from None
    if v < 1:
        raise argparse.ArgumentTypeError("expected a positive integer")
    return v


# subcommands ----------------------------------------------------------------


def _map_encoding(m: maps.LinearMapRep, constructor: str):
    lam = maps.choi_t1(m)
    if constructor == "dilation":
        return exact_dilation(lam, operator_norm(lam))
    if constructor == "lcu":
        if m.in_qubits == m.out_qubits and m.in_qubits % 2 == 0:
            q = m.in_qubits // 2
            if np.allclose(m.superop, maps.partial_reduction(q).superop, atol=1e-12):
                return reduction_encoding(q)
        return pauli_lcu(lam)
    nz = np.abs(lam) > 1e-14
    s = int(max(nz.sum(axis=0).max(), nz.sum(axis=1).max()))
    scale = float(np.abs(lam).max())
    be = sparse_block_encoding(lam / scale, s)
    return replace(be, alpha=be.alpha * scale, declared_eps=be.declared_eps * scale)


def cmd_verify(args) -> dict:
    m = load_map(args.map)
    rng = make_rng(args.seed)
    n = m.in_qubits
    rho = load_state(args.rho, n, rng)
    sigma = rho if args.sigma == "rho" and m.out_qubits == n else load_state(
        "mixed" if args.sigma == "rho" else args.sigma, m.out_qubits, rng
    )
    u_map = _map_encoding(m, args.constructor)
    v = belt_assemble(u_map, purify(rho), n, m.out_qubits, args.qubit_cap)
    target = m(rho)
    eps = verify(v, target)
    p_formula = success_probability_formula(target, sigma, v.alpha)
    p_circuit = postselect(v, sigma).success_prob
    lam_norm = operator_norm(maps.choi_t1(m))
    claims = [
        Claim("measured_eps", eps, max(args.tol, u_map.declared_eps + 1e-10)),
        Claim("unitarity_residual", operator_norm(v.unitary.conj().T @ v.unitary - np.eye(v.unitary.shape[0])), 1e-10),
        Claim("success_prob_agreement", abs(p_formula - p_circuit), 1e-10),
    ]
    report = {
        "map": args.map,
        "constructor": args.constructor,
        "alpha": v.alpha,
        "choi_t1_norm": lam_norm,
        "ancilla_qubits": v.anc_qubits,
        "total_qubits": v.total_qubits,
        "declared_eps": v.declared_eps,
        "measured_eps": eps,
        "success_prob_formula": p_formula,
        "success_prob_circuit": p_circuit,
    }
    rows = [{"key": k, "value": val} for k, val in report.items()]
    return {"report": report, "claims": claims, "rows": rows}


def cmd_detect(args) -> dict:
    rep = run_detection(args.q, args.samples, args.K, args.seed, args.mode, args.jobs)
    claims = [
        Claim("max_product_probability", rep.probabilities["max_product"], 1e-14),
        Claim("oracle_calls_per_sample", rep.result["oracle_calls_per_sample"], 3 * args.K, "=="),
    ]
    if args.min_rate is not None:
        claims.append(Claim("success_rate", rep.result["success_rate"], args.min_rate, ">="))
    rows = [
        {
            "index": i,
            "label": rep.result["labels"][i],
            "probability": rep.probabilities["per_run"][i],
            "outcomes": "".join(str(b) for b in rep.outcomes[i]),
            "classified": rep.result["classified"][i],
        }
        for i in range(args.samples)
    ]
    return {"report": rep.to_dict(), "claims": claims, "rows": rows}


def cmd_invert(args) -> dict:
    e = load_map(args.channel)
    rng = make_rng(args.seed)
    n = e.in_qubits
    psi = load_vector(args.psi, n, rng)
    sigma = pure_density(psi) if args.sigma == "psi" else load_state(args.sigma, n, rng)
    mode = "amplified" if args.amplify else "postselect"
    rep = invert_channel(
        e, psi, sigma, mode, args.delta, rng=rng, seed=args.seed, shots=args.shots, degree=args.degree, qubit_cap=args.qubit_cap
    )
    row = {"mode": mode, **{k: v for k, v in rep.result.items() if not isinstance(v, dict)}}
    row.update({k: v for k, v in rep.probabilities.items()})
    row["trials"], row["oracle_calls"] = rep.trials, rep.oracle_calls
    return {"report": rep.to_dict(), "claims": rep.claims, "rows": [row]}


def cmd_pdo(args) -> dict:
    if args.symbol == "elliptic":
        spec = elliptic_spec(args.d, args.p, args.omega)
    else:
        spec = PdoSpec(args.d, args.p, constant_symbol(1.0))
    t = pdo_build(spec)
    s = args.d * args.p
    herm = is_hermitian(t, 1e-10 * max(1.0, operator_norm(t)))
    evals = np.linalg.eigvalsh((t + t.conj().T) / 2)
    report = {
        "dims": args.d,
        "p": args.p,
        "grid_points": spec.size,
        "symbol": args.symbol,
        "omega": args.omega if args.symbol == "elliptic" else None,
        "norm": operator_norm(t),
        "hermitian": bool(herm),
        "min_eigenvalue": float(evals.min()) if herm else None,
    }
    claims = []
    if args.symbol == "identity":
        claims.append(Claim("identity_error", operator_norm(t - np.eye(spec.size)), 1e-12))
    if herm:
        report["psd"] = bool(evals.min() >= -1e-9 * max(1.0, operator_norm(t)))
    rho = load_state(args.rho, s, make_rng(args.seed))
    try:
        be = pdo_conjugate(t, rho, args.qubit_cap)
        two = pdo_conjugate_via_map(t, rho, args.qubit_cap)
    except QubitCapError as exc:
        report["conjugation"] = None
        warnings = [f"conjugation circuit skipped: {exc}"]
    else:
        direct = t @ rho @ t.conj().T
        err = operator_norm(be.block() - direct / operator_norm(t) ** 2)
        two_path = operator_norm(be.block() - two.encoded() / be.alpha)
        report["conjugation"] = {
            "alpha": be.alpha,
            "total_qubits": be.total_qubits,
            "block_error": err,
            "two_path_error": two_path,
        }
        claims += [Claim("block_error", err, 1e-9), Claim("two_path_error", two_path, 1e-9)]
        warnings = []
    report["warnings"] = warnings
    rows = [{"key": k, "value": v} for k, v in report.items() if not isinstance(v, (dict, list))]
    if report.get("conjugation"):
        rows += [{"key": f"conjugation.{k}", "value": v} for k, v in report["conjugation"].items()]
    return {"report": report, "claims": claims, "rows": rows}


def _qetu_phases(args) -> PhaseSequence:
    if args.phases:
        return phases_from_json(read_json(args.phases))
    if args.polynomial == "square":
        return qetu_square_phases()
    return chebyshev_phases(args.degree, "qetu-symmetric")


def cmd_qetu_hme(args) -> dict:
    m = load_map(args.map)
    rho = load_state(args.rho, m.in_qubits, make_rng(args.seed))
    phases = _qetu_phases(args)

    def target(h):
        return qetu_circuit(mat_exp_i(h, 1.0), phases).block()

    runs = []
    for steps in args.steps:
        rep = qetu_hme(m, rho, phases, steps, target=target)
        runs.append({"steps_per_u": steps, "copies": rep.copies, "deviation": rep.deviation_from_target})
    devs = [r["deviation"] for r in runs]
    claims = [Claim("copies_mismatch", sum(r["copies"] != phases.degree * r["steps_per_u"] for r in runs), 0, "==")]
    if len(runs) > 1 and sorted(args.steps) == list(args.steps):
        worst = max(b - a for a, b in zip(devs, devs[1:]))
        claims.append(Claim("deviation_increase", worst, 0.0))
    report = {"map": args.map, "convention": phases.convention, "phases": list(phases.phases), "degree": phases.degree, "runs": runs}
    return {"report": report, "claims": claims, "rows": runs}


def cmd_bench(args) -> dict:
    """Fixed small workloads; timings only with ``--timing``."""
    rng = make_rng(args.seed)
    results = []

    def timed(name, fn):
        t0 = time.perf_counter()
        value = fn()
        row = {"name": name, "value": value}
        if args.timing:
            row["seconds"] = time.perf_counter() - t0
        results.append(row)

    def assembly_exactness():
        worst = 0.0
        for _ in range(args.trials):
            n, k = int(rng.integers(1, 3)), int(rng.integers(1, 3))
            m = maps.random_map(n, k, rng)
            rho = random_density(n, rng)
            lam = maps.choi_t1(m)
            v = belt_assemble(exact_dilation(lam), purify(rho), n, k, args.qubit_cap)
            worst = max(worst, verify(v, m(rho)))
        return worst

    def chebyshev_err():
        worst = 0.0
        for deg in (1, 2, 3, 5):
            h = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
            h = h + h.conj().T
            be = exact_dilation(h, 1.2 * operator_norm(h))
            b = be.block()
            w, vecs = np.linalg.eigh((b + b.conj().T) / 2)
            ref = (vecs * np.polynomial.chebyshev.chebval(w, [0] * deg + [1])) @ vecs.conj().T
            worst = max(worst, operator_norm(qsvt_apply(be, chebyshev_phases(deg)).block() - ref))
        return worst

    def hme_err():
        rho, sigma = random_density(1, rng), random_density(1, rng)
        h = rho
        u = mat_exp_i(h, 1.0)
        out = hme_evolve(maps.choi_t1(maps.identity(1)), rho, sigma, 1.0, 32)
        return operator_norm(out - u @ sigma @ u.conj().T)

    timed("assembly_worst_error", assembly_exactness)
    timed("chebyshev_worst_error", chebyshev_err)
    timed("hme_error_t1_steps32", hme_err)
    claims = [
        Claim("assembly_worst_error", results[0]["value"], 1e-9),
        Claim("chebyshev_worst_error", results[1]["value"], 1e-8),
    ]
    return {"report": {"trials": args.trials, "results": results}, "claims": claims, "rows": results}


# parser and entry point -----------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help=f"RNG seed (default ${SEED_ENV} or 0)")
    common.add_argument("--qubit-cap", type=int, default=DEFAULT_QUBIT_CAP)
    common.add_argument("--csv", action="store_true", help="emit a flat CSV table instead of JSON")
    common.add_argument("--pretty", action="store_true", help="indented JSON")
    common.add_argument("--jobs", type=_positive_int, default=1, help="worker processes for Monte Carlo")

    p = _Parser(prog="belt", description="Block encodings of linear maps on density matrices.")
    p.add_argument("--version", action="version", version=f"belt {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    v = sub.add_parser("verify", parents=[common], help="check the block encoding of N(rho)")
    v.add_argument("--map", required=True)
    v.add_argument("--rho", default="random")
    v.add_argument("--constructor", choices=["dilation", "lcu", "sparse"], default="dilation")
    v.add_argument("--sigma", default="rho", help="reference state for the success probability")
    v.add_argument("--tol", type=float, default=1e-10)
    v.set_defaults(func=cmd_verify)

    d = sub.add_parser("detect", parents=[common], help="entanglement detection Monte Carlo")
    d.add_argument("--q", type=_positive_int, required=True)
    d.add_argument("--samples", type=_positive_int, required=True)
    d.add_argument("--K", type=int, default=2)
    d.add_argument("--mode", choices=["formula", "circuit"], default="formula")
    d.add_argument("--min-rate", type=float, default=None, help="add a success-rate claim")
    d.set_defaults(func=cmd_detect)

    i = sub.add_parser("invert", parents=[common], help="recover a state through a channel inverse")
    i.add_argument("--channel", required=True)
    i.add_argument("--psi", default="haar")
    i.add_argument("--sigma", default="mixed", help="mixed, zero, random, pure, psi or a file")
    i.add_argument("--delta", type=float, default=0.01)
    i.add_argument("--amplify", action="store_true")
    i.add_argument("--degree", type=_positive_int, default=None)
    i.add_argument("--shots", type=int, default=0)
    i.set_defaults(func=cmd_invert)

    pd = sub.add_parser("pdo", parents=[common], help="discretised pseudo-differential operator")
    pd.add_argument("--d", type=_positive_int, default=1)
    pd.add_argument("--p", type=_positive_int, default=3)
    pd.add_argument("--symbol", choices=["elliptic", "identity"], default="elliptic")
    pd.add_argument("--omega", default="const:1")
    pd.add_argument("--rho", default="random")
    pd.set_defaults(func=cmd_pdo)

    q = sub.add_parser("qetu-hme", parents=[common], help="QETU with sample-based controlled evolution")
    q.add_argument("--map", default="reduction:1")
    q.add_argument("--rho", default="random")
    q.add_argument("--polynomial", choices=["square", "chebyshev"], default="square")
    q.add_argument("--degree", type=int, default=2)
    q.add_argument("--phases", default=None, help="phase-sequence JSON file")
    q.add_argument("--steps", type=_int_list, default=[8, 16, 32, 64])
    q.set_defaults(func=cmd_qetu_hme)

    b = sub.add_parser("bench", parents=[common], help="fixed verification workloads")
    b.add_argument("--trials", type=_positive_int, default=20)
    b.add_argument("--timing", action="store_true", help="include wall-clock times (nondeterministic)")
    b.set_defaults(func=cmd_bench)
    return p


def _config_echo(args) -> dict:
    return {k: v for k, v in sorted(vars(args).items()) if k not in ("func",)}


def _render_csv(rows: list[dict]) -> str:
    buf = _io.StringIO()
    if not rows:
        return ""
    fields = list(rows[0].keys())
    for r in rows[1:]:
        fields += [k for k in r if k not in fields]
    w = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: ("" if r.get(k) is None else r.get(k)) for k in fields})
    return buf.getvalue()


def run(argv=None, stdout=None, stderr=None) -> int:
    """Parse ``argv``, run one subcommand and write its report; returns the exit code."""
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        args = build_parser().parse_args(argv)
        if args.seed is None:
            args.seed = _default_seed()
        out = args.func(args)
    except UsageError as exc:
        print(exc, file=stderr)
        return EXIT_INVALID
    except SystemExit as exc:  # --help and --version
        return int(exc.code or 0)
    except (ValueError, QubitCapError, FileNotFoundError, KeyError) as exc:
        print(f"belt: error: {exc}", file=stderr)
        return EXIT_INVALID
    claims = out["claims"]
    passed = all(c.passed for c in claims)
    if args.csv:
        stdout.write(_render_csv(out["rows"]))
    else:
        envelope = {
            "command": args.command,
            "version": __version__,
            "seed": args.seed,
            "config": _config_echo(args),
            "report": out["report"],
            "claims": [vars(c) for c in claims],
            "passed": passed,
        }
        stdout.write(dumps(envelope, pretty=args.pretty) + "\n")
    return EXIT_OK if passed else EXIT_NUMERICAL


def main(argv=None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
