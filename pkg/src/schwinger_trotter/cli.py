"""Command-line entry point: verification suites, cost tables, circuit dumps and measurement runs.

Precedence of settings is flags, then the ``--config`` JSON file, then
defaults.  Output goes to ``--output``, else to a file in the directory named
by SCHWINGER_TROTTER_OUTPUT_DIR, else to stdout.
"""
from __future__ import annotations

import argparse
import csv
import io
import itertools
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from . import cost_engine as ce
from .circuit import count_gates, dumps
from .lattice import (LatticeParams, basis_index, build_dense_hamiltonian, exact_propagator,
                      validate_params, vacuum_index)
from .measurement import (ae_config, basis_state_prep, build_hadamard_test, sample_pair_density,
                          shots_required, simulate_amplitude_estimation)
from .resources import ft_qubits
from .trotter_circuits import (build_adder, build_decrementer, build_electric_step, build_hopping_step,
                               build_incrementer_ancilla, build_incrementer_qft, build_mass_step,
                               build_squarer, build_trotter_step)
from .verify import circuit_checks, commutator_checks, trotter_checks

OUTPUT_ENV = "SCHWINGER_TROTTER_OUTPUT_DIR"

# documented cost-table header; delta, toffolis and ancillas trail as extras
COST_COLUMNS = ["N", "Lambda", "eta", "x", "mu", "T", "eps", "kappa", "tau", "trotter_steps", "expected_T",
                "cnots", "qubits", "shots_or_queries", "scheme", "delta", "toffolis", "ancillas"]
NEG_COLUMNS = ["scheme", "N", "Lambda", "x", "mu", "T", "delta_g", "eps_min", "delta_trot", "n_gates",
               "objective", "gamma"]
NEG_TABLE_COLUMNS = ["x", "delta_g", "T", "eps_min_sq", "n_gates", "resolved"]
TROTTER_COLUMNS = ["N", "Lambda", "x", "mu", "t", "empirical_error", "bound", "ratio", "pass"]
COMPARISON_COLUMNS = ["N", "Lambda", "T", "eps", "sampling_T", "ae_T", "ratio", "sampling_opt_T",
                    "kappa_opt", "tau_opt", "gain"]


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    """Everything needed to reproduce a run."""
    command: list[str]
    options: dict = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True)


# -- argument parsing -----------------------------------------------------------

def _floats(p, name, default, help_):
    p.add_argument(f"--{name}", type=float, nargs="+", default=default, help=help_)


def _lattice_flags(p, *, n=(2,), lam=(1,)):
    p.add_argument("--n", dest="N", type=int, nargs="+", default=list(n), help="lattice sites")
    p.add_argument("--lambda", dest="Lambda", type=int, nargs="+", default=list(lam), help="electric cutoff")
    _floats(p, "x", [1.0], "hopping strength")
    _floats(p, "mu", [1.0], "mass")


def _common(p):
    p.add_argument("--config", help="JSON run description; flags override it")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output", help="output file (default: stdout or $" + OUTPUT_ENV + ")")
    p.add_argument("--format", choices=["csv", "json"], default=None)
    p.add_argument("--workers", type=int, default=os.cpu_count() or 1, help="processes for grid sweeps")
    p.add_argument("--save-config", help="write the resolved run description here")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="schwinger-trotter",
                                     description="Trotterized Schwinger-model circuits, bounds and costs")
    sub = parser.add_subparsers(dest="cmd", required=True)

    verify = sub.add_parser("verify", help="run a verification suite").add_subparsers(dest="what", required=True)
    p = verify.add_parser("circuits", help="built circuits against dense oracles")
    p.add_argument("--max-eta", type=int, default=3)
    p.add_argument("--max-n", type=int, default=4)
    _floats(p, "t", [0.0, 0.1, 0.7], "evolution times")
    _common(p)
    for what, help_ in (("trotter", "single-step bound against dense error"),
                        ("commutators", "nested-commutator case bounds")):
        p = verify.add_parser(what, help=help_)
        _lattice_flags(p, n=(2, 3), lam=(1, 2))
        p.set_defaults(x=[0.5, 1.0, 2.0], mu=[0.0, 1.0])
        if what == "trotter":
            _floats(p, "t", [0.01, 0.1, 0.3], "step sizes")
        _common(p)

    cost = sub.add_parser("cost", help="cost reports").add_subparsers(dest="what", required=True)
    for what in ("ft-sampling", "ft-ae", "ft-evolve", "neg"):
        p = cost.add_parser(what)
        _lattice_flags(p)
        _floats(p, "t", [1.0], "total evolution time")
        if what in ("ft-sampling", "ft-ae"):
            _floats(p, "eps", [0.1], "rms error target")
        if what == "ft-sampling":
            _floats(p, "kappa", [0.5], "share of the error budget spent on the state")
            _floats(p, "tau", [0.5], "share of the state error spent on Trotterization")
            p.add_argument("--optimize", action="store_true", help="minimise over kappa and tau")
        if what == "ft-evolve":
            _floats(p, "delta", [0.1], "operator-norm error target")
        if what == "neg":
            _floats(p, "delta-g", [1e-5], "CNOT error rate")
        _common(p)

    table = sub.add_parser("table", help="tables").add_subparsers(dest="what", required=True)
    p = table.add_parser("neg-errors", help="minimum rms error under CNOT noise")
    _floats(p, "x", list(ce.NEG_TABLE_X), "hopping strengths")
    _floats(p, "delta-g", list(ce.NEG_TABLE_DELTA_G), "CNOT error rates")
    p.add_argument("--text", action="store_true", help="print the rendered grid")
    _common(p)
    p = table.add_parser("appendixB", help="sampling against amplitude-estimation costs")
    p.add_argument("--n", dest="N", type=int, nargs="+", default=[8, 16, 32, 64])
    p.add_argument("--lambda", dest="Lambda", type=int, nargs="+", default=[2, 4, 8])
    _floats(p, "t", [1.0, 10.0], "evolution times")
    _floats(p, "eps", [0.1, 0.05, 0.01], "rms error targets")
    p.add_argument("--no-optimize", action="store_true")
    _common(p)

    p = sub.add_parser("measure-sim", help="simulate a measurement scheme over seeds")
    p.add_argument("--scheme", choices=["sampling", "ae"], default="sampling")
    p.add_argument("--state", choices=["vacuum", "full", "evolved"], default="evolved")
    p.add_argument("--n", dest="N", type=int, default=2)
    p.add_argument("--lambda", dest="Lambda", type=int, default=1)
    p.add_argument("--x", type=float, default=1.0)
    p.add_argument("--mu", type=float, default=1.0)
    p.add_argument("--t", type=float, default=1.0, help="evolution time of the evolved state")
    p.add_argument("--eps", type=float, default=0.1)
    p.add_argument("--kappa", type=float, default=0.5)
    p.add_argument("--runs", type=int, default=10)
    _common(p)

    p = sub.add_parser("dump-circuit", help="print a circuit as text")
    p.add_argument("kind", choices=["incrementer-qft", "incrementer-ancilla", "decrementer", "electric",
                                    "hopping", "mass", "trotter-step", "adder", "squarer", "hadamard-test"])
    p.add_argument("--eta", type=int, default=2)
    p.add_argument("--n", dest="N", type=int, default=2)
    p.add_argument("--lambda", dest="Lambda", type=int, default=1)
    p.add_argument("--x", type=float, default=1.0)
    p.add_argument("--mu", type=float, default=1.0)
    p.add_argument("--t", type=float, default=0.1)
    p.add_argument("--mode", choices=["neg", "ft"], default="neg")
    p.add_argument("--census", action="store_true", help="print the gate census instead")
    _common(p)
    return parser


def _find_subparser(parser, path):
    p = parser
    for name in path:
        action = next(a for a in p._actions if isinstance(a, argparse._SubParsersAction))
        p = action.choices[name]
    return p


def parse(argv):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        try:
            with open(args.config) as fh:
                cfg = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from exc
        cfg = {k: v for k, v in cfg.get("options", cfg).items() if k not in ("cmd", "what")}
        path = [args.cmd] + ([args.what] if getattr(args, "what", None) else [])
        sub = _find_subparser(parser, path)
        known = {a.dest for a in sub._actions}
        unknown = set(cfg) - known
        if unknown:
            raise UsageError(f"unknown config keys: {sorted(unknown)}")
        sub.set_defaults(**cfg)
        args = parser.parse_args(argv)
    return args


# -- output ------------------------------------------------------------------------

def _clean(v):
    if isinstance(v, float) and math.isinf(v):
        return "inf"
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    return v


def render(rows: list[dict], columns: list[str], fmt: str) -> str:
    if fmt == "json":
        return "".join(json.dumps({k: _clean(v) for k, v in r.items()}, sort_keys=True) + "\n" for r in rows)
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=columns, extrasaction="ignore", lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: _clean(r.get(k, "")) for k in columns})
    return buf.getvalue()


def emit(text: str, args, default_name: str) -> None:
    path = args.output
    if path is None and os.environ.get(OUTPUT_ENV):
        path = os.path.join(os.environ[OUTPUT_ENV], default_name)
    if path is None:
        sys.stdout.write(text)
        return
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w") as fh:
        fh.write(text)


def _pmap(fn, items, workers):
    if workers > 1 and len(items) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, items))  # map keeps grid order
    return [fn(i) for i in items]


# -- commands ----------------------------------------------------------------------

def _lattices(args, require_even=True):
    for N, L, x, mu in itertools.product(args.N, args.Lambda, args.x, args.mu):
        yield validate_params(N, L, x, mu, require_even=require_even)


def _pdict(p: LatticeParams) -> dict:
    return {"N": p.N, "Lambda": p.Lambda, "x": p.x, "mu": p.mu}


def cmd_verify(args):
    if args.what == "circuits":
        recs = circuit_checks(args.max_eta, args.max_n, tuple(args.t))
    else:
        grid = {"N": args.N, "Lambda": args.Lambda, "x": args.x, "mu": args.mu}
        list(_lattices(args, require_even=False))  # reject bad grid values before the slow part
        recs = trotter_checks(grid, tuple(args.t)) if args.what == "trotter" else commutator_checks(grid)
    if args.what == "trotter" and (args.format or "csv") == "csv":
        rows = [{**r["params"], "empirical_error": r["value"], "bound": r["bound"],
                 "ratio": r["value"] / r["bound"] if r["bound"] else math.inf, "pass": r["pass"]} for r in recs]
        emit(render(rows, TROTTER_COLUMNS, "csv"), args, "verify-trotter.csv")
    else:
        text = "".join(json.dumps(r, sort_keys=True) + "\n" for r in recs)
        emit(text, args, f"verify-{args.what}.jsonl")
    failures = [r for r in recs if not r["pass"]]
    if failures:
        sys.stderr.write(json.dumps({"status": "fail", "suite": args.what, "failures": failures},
                                    sort_keys=True) + "\n")
        return 1
    return 0


def _cost_row(job):
    what, p, vals = job
    base = {**_pdict(p), **vals}
    if what == "neg":
        r = ce.neg_min_rms_error(p, vals["T"], vals["delta_g"])
        return {"scheme": "neg", **base, **asdict(r)}
    if what == "ft-sampling":
        kappa, tau = vals["kappa"], vals["tau"]
        if vals.pop("optimize", False):
            kappa, tau, _ = ce.optimize_error_split(p, vals["T"], vals["eps"])
            base.update(kappa=kappa, tau=tau)
        base.pop("optimize", None)
        rep = ce.ft_sampling_cost(p, vals["T"], vals["eps"], kappa, tau)
    elif what == "ft-ae":
        rep = ce.ft_ae_cost(p, vals["T"], vals["eps"])
    else:
        rep = ce.ft_evolution_cost(p, vals["T"], vals["delta"])
    return {"scheme": what, **base, "eta": p.eta, "trotter_steps": rep.trotter_steps,
            "expected_T": rep.expected_T, "cnots": rep.CNOT, "qubits": rep.total_qubits,
            "shots_or_queries": rep.shots_or_queries, "toffolis": rep.Toffoli, "ancillas": rep.ancillas}


def cmd_cost(args):
    keys = {"ft-sampling": ["T", "eps", "kappa", "tau"], "ft-ae": ["T", "eps"],
            "ft-evolve": ["T", "delta"], "neg": ["T", "delta_g"]}[args.what]
    src = {"T": args.t, "eps": getattr(args, "eps", None), "kappa": getattr(args, "kappa", None),
           "tau": getattr(args, "tau", None), "delta": getattr(args, "delta", None),
           "delta_g": getattr(args, "delta_g", None)}
    jobs = []
    for p in _lattices(args):
        for combo in itertools.product(*(src[k] for k in keys)):
            vals = dict(zip(keys, combo))
            if args.what == "ft-sampling":
                vals["optimize"] = args.optimize
            jobs.append((args.what, p, vals))
    rows = _pmap(_cost_row, jobs, args.workers)
    cols = NEG_COLUMNS if args.what == "neg" else COST_COLUMNS
    emit(render(rows, cols, args.format or "csv"), args, f"cost-{args.what}.{args.format or 'csv'}")
    return 0


def _comparison_row(job):
    return ce.comparison_row(*job[0], optimize=job[1])


def cmd_table(args):
    if args.what == "neg-errors":
        rows = ce.neg_error_table(tuple(args.x), tuple(args.delta_g))
        if args.text:
            emit(ce.render_neg_table(rows) + "\n", args, "neg-errors.txt")
            return 0
        emit(render(rows, NEG_TABLE_COLUMNS, args.format or "csv"), args,
             f"neg-errors.{args.format or 'csv'}")
        return 0
    for N, L in itertools.product(args.N, args.Lambda):
        validate_params(N, L, 1.0, 1.0)
    grid = list(itertools.product(args.N, args.Lambda, args.t, args.eps))
    rows = _pmap(_comparison_row, [(g, not args.no_optimize) for g in grid], args.workers)
    emit(render(rows, COMPARISON_COLUMNS, args.format or "csv"), args, f"appendixB.{args.format or 'csv'}")
    return 0


def _initial_state(params, which):
    if which == "full":
        occ = [1] * params.N
    else:
        occ = [r % 2 for r in range(1, params.N + 1)]
    return basis_index(params, occ, [0] * (params.N - 1))


def cmd_measure(args):
    params = validate_params(args.N, args.Lambda, args.x, args.mu)
    rows = []
    pdesc = {**_pdict(params), "state": args.state, "t": args.t, "eps": args.eps}
    if args.scheme == "sampling":
        psi = np.zeros(2**params.n_qubits, dtype=complex)
        psi[_initial_state(params, args.state)] = 1.0
        if args.state == "evolved":
            U = exact_propagator(build_dense_hamiltonian(params), args.t)
            psi = U @ psi
        shots, _ = shots_required(args.eps, args.kappa)
        results = [sample_pair_density(params, psi, shots, args.seed + i, args.eps) for i in range(args.runs)]
    else:
        m = params.N.bit_length() - 2
        if params.N != 2 ** (m + 1):
            raise UsageError("amplitude estimation needs N = 2^(m+1) sites")
        if args.state == "evolved":
            raise UsageError("amplitude estimation runs on basis states (vacuum or full)")
        prep = basis_state_prep(params.n_qubits, _initial_state(params, args.state))
        cfg = ae_config(args.eps, m)
        results = [simulate_amplitude_estimation(prep, cfg, args.seed + i, params, args.eps)
                   for i in range(args.runs)]
    for r in results:
        rows.append({"scheme": r.scheme, "params": pdesc, "seed": r.seed, "estimate": r.estimate,
                     "truth": r.truth, "error": r.error, "shots_or_queries": r.shots_or_queries})
    emit(render(rows, [], "json"), args, f"measure-{args.scheme}.jsonl")
    return 0


def _circuit_for(args):
    kind = args.kind
    if kind == "incrementer-qft":
        return build_incrementer_qft(args.eta)
    if kind == "incrementer-ancilla":
        return build_incrementer_ancilla(args.eta)
    if kind == "decrementer":
        return build_decrementer(args.eta, args.mode)
    if kind == "electric":
        return build_electric_step(args.eta, args.t, args.mode)
    if kind == "adder":
        return build_adder(args.eta)
    if kind == "squarer":
        return build_squarer(args.eta)
    params = validate_params(args.N, args.Lambda, args.x, args.mu)
    if kind == "hopping":
        return build_hopping_step(params, 1, args.t, args.mode)
    if kind == "mass":
        return build_mass_step(params, 1, args.t)
    if kind == "trotter-step":
        return build_trotter_step(params, args.t, args.mode)
    m = params.N.bit_length() - 2
    if params.N != 2 ** (m + 1):
        raise UsageError("the Hadamard test needs N = 2^(m+1) sites")
    return build_hadamard_test(m, basis_state_prep(params.n_qubits, vacuum_index(params)), params)


def cmd_dump(args):
    c = _circuit_for(args)
    if args.census:
        census = count_gates(c)
        info = {"kind": args.kind, "n_qubits": c.n_qubits, "width": c.width, "counts": dict(census.counts),
                "cnot": census.cnot, "toffoli": census.toffoli, "rotations": census.rotations,
                "ancilla_high_water": census.ancilla_high_water}
        if args.kind == "trotter-step" and args.mode == "ft":
            info["ft_qubits_formula"] = ft_qubits(validate_params(args.N, args.Lambda, args.x, args.mu))
        emit(json.dumps(info, sort_keys=True) + "\n", args, f"{args.kind}.census.json")
    else:
        emit(dumps(c), args, f"{args.kind}.circuit")
    return 0


COMMANDS = {"verify": cmd_verify, "cost": cmd_cost, "table": cmd_table, "measure-sim": cmd_measure,
            "dump-circuit": cmd_dump}


def _without_save_flag(argv):
    out, skip = [], False
    for a in argv:
        if skip:
            skip = False
        elif a == "--save-config":
            skip = True
        elif not a.startswith("--save-config="):
            out.append(a)
    return out


def run(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = parse(argv)
    except SystemExit as exc:  # argparse reports usage errors this way
        return int(exc.code or 0)
    except UsageError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2
    opts = {k: v for k, v in vars(args).items() if k not in ("config", "save_config", "output")}
    if args.save_config:
        with open(args.save_config, "w") as fh:
            fh.write(RunConfig(_without_save_flag(argv), opts).to_json() + "\n")
    try:
        return COMMANDS[args.cmd](args)
    except (ValueError, UsageError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
