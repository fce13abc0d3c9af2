"""Command-line entry point: every pipeline as a seeded run that emits one JSON report.

Exit codes: 0 success, 2 invalid input, 3 simulation-size cap exceeded.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from . import antisym, fyshuffle, netgen, phaseprep, qcompare, qubitize
from .report import dumps
from .sim import SimulationCapError, run_basis

EXIT_OK, EXIT_INVALID, EXIT_CAP = 0, 2, 3


class UsageError(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _ints(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def cmd_antisym(args) -> dict:
    network = netgen.generate(args.network, args.eta)
    job = antisym.AntisymJob(args.eta, args.orbitals, tuple(args.values), args.f, network)
    result = antisym.antisymmetrize(job, rng_seed=args.seed, attempt_limit=args.attempt_limit, variant=args.variant)
    ref = antisym.antisymmetric_reference(job.target_values, job.target_width)
    return {
        "eta": job.eta,
        "N": job.n_orbitals,
        "f": job.f_eta,
        "network_family": network.family,
        "success_probability": result.success_probability,
        "exact_failure_probability": float(antisym.collision_probability(job.eta, job.f_eta)),
        "failure_bound": float(antisym.collision_bound(job.eta, job.f_eta)),
        "attempts": result.attempts,
        "resources": result.resources,
        "fidelity_vs_oracle": antisym.fidelity_up_to_phase(result.state.amplitudes, ref),
        "antisymmetric": antisym.verify_antisymmetry(result.state),
    }


def cmd_shuffle(args) -> dict:
    job = fyshuffle.ShuffleJob(args.eta, args.orbitals, tuple(args.values))
    state = fyshuffle.shuffle_antisymmetrize(job)
    ref = antisym.antisymmetric_reference(job.input_values, state.layout["input"].element_width)
    circuit = fyshuffle.shuffle_circuit(job)
    return {
        "eta": job.eta,
        "N": job.n_orbitals,
        "qubits": job.layout.num_qubits,
        "fidelity_vs_oracle": antisym.fidelity_up_to_phase(state.amplitudes, ref),
        "antisymmetric": antisym.verify_antisymmetry(state, "input"),
        "resources": circuit.resource_tally,
        "block_resources": fyshuffle.block_tallies(job.eta, job.n_orbitals),
    }


def cmd_netgen(args) -> dict:
    schedule = netgen.generate(args.family, args.wires)
    out = {
        "family": schedule.family,
        "num_wires": schedule.num_wires,
        "comparators": schedule.num_comparators,
        "depth": schedule.depth,
    }
    if args.verify:
        out["zero_one_verified"] = netgen.verify_zero_one(schedule)
    if args.element_width:
        out["resources"] = netgen.resource_summary(schedule, args.element_width, args.variant)
    if args.schedule:
        out["schedule"] = schedule.to_dict()
    return out


def cmd_compare(args) -> dict:
    bundle = qcompare.build_full_comparator(args.bits, args.variant, args.fanout)
    out = {
        "bits": args.bits,
        "variant": args.variant,
        "fanout": args.fanout,
        "ancillas": bundle.ancilla_count,
        "oracle": bundle.oracle_circuit.resource_tally,
        "swap": bundle.swap_circuit.resource_tally,
        "full_comparator": bundle.full_comparator.resource_tally,
    }
    if args.a is not None or args.b is not None:
        if args.a is None or args.b is None:
            raise ValueError("operands_paired: give both --a and --b")
        top = 1 << args.bits
        if not (0 <= args.a < top and 0 <= args.b < top):
            raise ValueError(f"operands_in_range: operands must lie in [0, {top})")
        layout = bundle.layout
        bits = run_basis(bundle.full_comparator, layout.encode({"A": args.a, "B": args.b}))
        out["evaluation"] = {
            "A_in": args.a,
            "B_in": args.b,
            "A_out": layout.decode(bits, "A")[0],
            "B_out": layout.decode(bits, "B")[0],
            "record": layout.decode(bits, "q")[0],
        }
    return out


def _load_lcu(args) -> qubitize.LcuHamiltonian:
    if args.lcu:
        return qubitize.LcuHamiltonian.from_json(Path(args.lcu).read_text())
    if args.pauli:
        terms = []
        for item in args.pauli.split(","):
            weight, _, label = item.partition(":")
            terms.append((float(weight), label.strip()))
        return qubitize.LcuHamiltonian.from_paulis(terms)
    raise ValueError("lcu_required: give --lcu FILE or --pauli 'w:P,...'")


def cmd_qubitize(args) -> dict:
    lcu = _load_lcu(args)
    report = qubitize.spectral_check(lcu)
    out = {"num_terms": lcu.num_terms, "n_sys": lcu.n_sys, **report.to_dict()}
    if args.sigma_phase is not None:
        out["energy_errors"] = [
            qubitize.error_propagation(args.sigma_phase, float(e), lcu.lam) for e in report.reference_energies
        ]
    return out


def cmd_phase_estimate(args) -> dict:
    lcu = _load_lcu(args)
    energies = lcu.eigenvalues()
    phi = np.zeros(1 << lcu.n_sys, dtype=complex)
    if args.initial:
        vals = args.initial
        if len(vals) != phi.size:
            raise ValueError(f"initial_state_size: need {phi.size} amplitudes")
        phi[:] = vals
    else:
        phi[args.initial_basis] = 1.0
    if np.linalg.norm(phi) == 0:
        raise ValueError("initial_state_nonzero: initial state must be nonzero")
    e0_bound = args.e0_bound if args.e0_bound is not None else float(energies[0] + energies[1]) / 2
    e_star = args.e_star if args.e_star is not None else float(energies[1])
    _, ground = lcu.ground_state()
    alpha0 = float(abs(np.vdot(ground, phi / np.linalg.norm(phi))) ** 2)
    params = phaseprep.CostModelParams(
        alpha0=max(alpha0, 1e-300), e0=float(energies[0]), e_star=e_star, e0_bound=e0_bound, epsilon_f=args.epsilon_f
    )
    res = phaseprep.end_to_end_ground_state(lcu, phi, params, args.seed, args.bits, args.max_attempts)
    return {
        "lambda": lcu.lam,
        "reference_ground_energy": float(energies[0]),
        "alpha0": alpha0,
        "e0_bound": e0_bound,
        "e_star": e_star,
        "energy_estimate": res.energy,
        "abs_error": abs(res.energy - float(energies[0])),
        "resolution": 2 * math.pi * lcu.lam / (1 << args.bits),
        "fidelity": res.fidelity,
        "attempts": res.attempts,
        "rejections": res.rejections,
        "walk_applications": res.cost,
        "coarse_bits": res.coarse_bits,
        "fine_bits": res.fine_bits,
    }


def cmd_cost_model(args) -> dict:
    if args.fixture:
        params = phaseprep.load_fixture(args.fixture)
        if args.e1_bound is not None:
            params.e1_bound = args.e1_bound
    else:
        needed = ("alpha0", "e0", "e_star", "e0_bound")
        missing = [n for n in needed if getattr(args, n) is None]
        if missing:
            raise ValueError(f"parameters_required: missing {', '.join('--' + m.replace('_', '-') for m in missing)}")
        params = phaseprep.CostModelParams(
            alpha0=args.alpha0,
            e0=args.e0,
            e_star=args.e_star,
            e0_bound=args.e0_bound,
            epsilon_f=args.epsilon_f,
            e1_bound=args.e1_bound,
        )
    model = phaseprep.SpectralModel.two_level(params)
    rej = phaseprep.rejection_run(model, params, args.seed, args.trials)
    naive = phaseprep.naive_run(model, params, args.seed, args.trials)
    out = {
        "fixture": args.fixture,
        "params": {
            "alpha0": params.alpha0,
            "e0": params.e0,
            "e_star": params.e_star,
            "e0_bound": params.e0_bound,
            "epsilon_f": params.epsilon_f,
            "e1_bound": params.e1_bound,
        },
        "coarse_gap": params.coarse_gap,
        "rejection": rej.to_dict(),
        "naive": naive.to_dict(),
        "speedup": naive.mean_cost / rej.mean_cost,
        "analytic_speedup": naive.analytic_cost / rej.analytic_cost,
    }
    if params.e1_bound is not None:
        out["amplitude_amplified_cost"] = phaseprep.amplitude_amplified_cost(params)
    return out


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


def _add_lcu_args(p):
    p.add_argument("--lcu", help="LCU JSON file")
    p.add_argument("--pauli", help="comma-separated weight:PAULI terms, e.g. '0.5:X,0.5:Z'")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="fermiprep", description="Fermionic state-preparation circuits and cost models.")
    parser.add_argument("--output", help="write the JSON report here instead of standard output")
    sub = parser.add_subparsers(dest="subcommand", required=True, parser_class=_Parser)

    p = sub.add_parser("antisym", help="antisymmetrize by reversing a sorting network")
    p.add_argument("--eta", type=int, required=True)
    p.add_argument("--orbitals", type=int, required=True)
    p.add_argument("--values", type=_ints, required=True)
    p.add_argument("--network", choices=netgen.FAMILIES, default="bitonic")
    p.add_argument("--f", type=int, default=None, help="seed alphabet size (power of two >= eta^2)")
    p.add_argument("--variant", choices=qcompare.VARIANTS, default="parallel")
    p.add_argument("--attempt-limit", type=int, default=antisym.DEFAULT_ATTEMPT_LIMIT)
    p.add_argument("--seed", type=int, required=True)
    p.set_defaults(func=cmd_antisym)

    p = sub.add_parser("shuffle", help="antisymmetrize by the quantum Fisher-Yates shuffle")
    p.add_argument("--eta", type=int, required=True)
    p.add_argument("--orbitals", type=int, required=True)
    p.add_argument("--values", type=_ints, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_shuffle)

    p = sub.add_parser("netgen", help="generate and check a sorting network")
    p.add_argument("--family", choices=netgen.FAMILIES, required=True)
    p.add_argument("--wires", type=int, required=True)
    p.add_argument("--verify", action="store_true")
    p.add_argument("--element-width", type=int, default=None)
    p.add_argument("--variant", choices=qcompare.VARIANTS, default="parallel")
    p.add_argument("--schedule", action="store_true", help="include the comparator schedule")
    p.set_defaults(func=cmd_netgen)

    p = sub.add_parser("compare", help="build a quantum comparator")
    p.add_argument("--bits", type=int, required=True)
    p.add_argument("--variant", choices=qcompare.VARIANTS, default="parallel")
    p.add_argument("--fanout", action=argparse.BooleanOptionalAction, default=True)
    p.add_argument("--a", type=int, default=None)
    p.add_argument("--b", type=int, default=None)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("qubitize", help="check the walk-operator spectrum of an LCU")
    _add_lcu_args(p)
    p.add_argument("--sigma-phase", type=float, default=None)
    p.set_defaults(func=cmd_qubitize)

    p = sub.add_parser("phase-estimate", help="ground state by phase estimation with rejection")
    _add_lcu_args(p)
    p.add_argument("--bits", type=int, default=10)
    p.add_argument("--initial", type=_floats, default=None, help="real system amplitudes")
    p.add_argument("--initial-basis", type=int, default=0)
    p.add_argument("--e0-bound", type=float, default=None)
    p.add_argument("--e-star", type=float, default=None)
    p.add_argument("--epsilon-f", type=float, default=0.0016)
    p.add_argument("--max-attempts", type=int, default=64)
    p.add_argument("--seed", type=int, required=True)
    p.set_defaults(func=cmd_phase_estimate)

    p = sub.add_parser("cost-model", help="Monte-Carlo cost of rejection vs naive phase estimation")
    p.add_argument("--fixture", default=None)
    p.add_argument("--alpha0", type=float)
    p.add_argument("--e0", type=float)
    p.add_argument("--e-star", type=float)
    p.add_argument("--e0-bound", type=float)
    p.add_argument("--e1-bound", type=float)
    p.add_argument("--epsilon-f", type=float, default=0.0016)
    p.add_argument("--trials", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_cost_model)
    return parser


def _config(args) -> dict:
    return {k: v for k, v in sorted(vars(args).items()) if k not in ("func", "output")}


def _destination(args) -> Path | None:
    if args.output:
        path = Path(args.output)
        base = os.environ.get("FERMIPREP_OUTPUT_DIR")
        return Path(base) / path if base and not path.is_absolute() else path
    base = os.environ.get("FERMIPREP_OUTPUT_DIR")
    if base:
        seed = getattr(args, "seed", None)
        name = args.subcommand + (f"-seed{seed}" if seed is not None else "") + ".json"
        return Path(base) / name
    return None


def run_cli(argv: Sequence[str] | None = None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(f"error: {exc}", file=stderr)
        return EXIT_INVALID
    handler: Callable = args.func
    try:
        body = handler(args)
    except SimulationCapError as exc:
        print(f"error: simulation_cap: {exc}", file=stderr)
        return EXIT_CAP
    except (ValueError, KeyError, FileNotFoundError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=stderr)
        return EXIT_INVALID
    report = {"subcommand": args.subcommand, "config": _config(args), **body}
    report["timestamp"] = datetime.now(timezone.utc).isoformat()
    text = dumps(report)
    dest = _destination(args)
    if dest is None:
        stdout.write(text)
    else:
        dest.parent.mkdir(parents=True, exist_ok=True)
        dest.write_text(text)
        print(f"wrote {dest}", file=stderr)
    return EXIT_OK


def main() -> None:
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
