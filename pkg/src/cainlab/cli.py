"""Command-line entry point.

Exit codes: 0 on success, 1 on usage or input errors, 2 when a verification
(or a user-supplied process check) fails.
"""
from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import __version__, bsc, cbnet, ledger, thermal
from .config import FORMATS, MODES, SAMPLES, ConfigError, RunConfig
from .io import InputError, chain_from_dict, dumps, load_json, params_from_dict
from .szilard import (
    random_c1_params,
    random_c2_params,
    random_q1_params,
    random_q2_params,
    table_c1,
    table_c2,
    table_q1,
    table_q2,
    work_report,
)
from .verify import SUITES, verify_suite

OUTPUT_DIR_ENV = "CAINLAB_OUTPUT_DIR"

EXIT_OK, EXIT_INPUT, EXIT_FAILED = 0, 1, 2

TABLES = {"c1": table_c1, "c2": table_c2, "q1": table_q1, "q2": table_q2}
RANDOM_PARAMS = {"c1": random_c1_params, "c2": random_c2_params, "q1": random_q1_params, "q2": random_q2_params}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


# ---------------------------------------------------------------------------
# output helpers


def _kv_markdown(title: str, data: dict) -> str:
    lines = [f"# {title}", "", "| quantity | value |", "|---|---|"]
    lines += [f"| {k} | {_fmt(v)} |" for k, v in data.items()]
    return "\n".join(lines) + "\n"


def _kv_csv(data: dict) -> str:
    return "quantity,value\n" + "".join(f"{k},{_fmt(v)}\n" for k, v in data.items())


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _flat(d: dict, prefix: str = "") -> dict:
    out = {}
    for k, v in d.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            out.update(_flat(v, key + "."))
        elif isinstance(v, (list, tuple)) and v and isinstance(v[0], dict):
            for i, item in enumerate(v):
                out.update(_flat(item, f"{key}.{i}."))
        else:
            out[key] = v
    return out


def _emit(text: str, cfg: RunConfig) -> None:
    if cfg.out is None:
        sys.stdout.write(text)
        return
    path = cfg.out
    base = os.environ.get(OUTPUT_DIR_ENV)
    if base and not os.path.isabs(path):
        path = os.path.join(base, path)
    parent = os.path.dirname(path)
    if parent:
        os.makedirs(parent, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)


def _render_mapping(title: str, data: dict, fmt: str) -> str:
    if fmt == "json":
        return dumps(data)
    flat = _flat(data)
    return _kv_markdown(title, flat) if fmt == "markdown" else _kv_csv(flat)


# ---------------------------------------------------------------------------
# commands


def _cmd_thermal(args, cfg: RunConfig) -> int:
    beta = args.beta
    if cfg.params_path:
        data = load_json(cfg.params_path)
        extra = set(data) - {"hamiltonian", "energies", "beta", "temperature"}
        if extra:
            raise InputError(f"unknown thermal fields: {', '.join(sorted(extra))}")
        if "hamiltonian" in data:
            h = np.asarray(data["hamiltonian"], dtype=complex if _has_complex(data["hamiltonian"]) else float)
            if h.ndim == 3:
                h = h[..., 0] + 1j * h[..., 1]
        elif "energies" in data:
            h = np.diag(np.asarray(data["energies"], dtype=float))
        else:
            raise InputError("thermal parameters need 'hamiltonian' or 'energies'")
        if "beta" in data:
            beta = data["beta"]
        elif "temperature" in data:
            beta = 1.0 / float(data["temperature"])
    elif args.energies:
        h = np.diag(np.asarray(args.energies, dtype=float))
    else:
        raise UsageError("thermal: give --energies or --params")
    if beta is None:
        raise UsageError("thermal: give --beta (or beta/temperature in the parameter file)")
    try:
        ham = thermal.Hamiltonian(h)
        p = thermal.ThermalParams(float(beta))
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    b = p.beta
    out = {
        "dim": ham.dim,
        "beta": b,
        "temperature": p.temperature,
        "ground_energy": ham.ground_energy,
        "log_partition_function": thermal.log_partition_function(ham, b),
        "free_energy": thermal.free_energy(ham, b),
        "mean_energy": thermal.mean_energy(ham, b),
        "entropy": thermal.thermal_entropy(ham, b),
        "energy_variance": thermal.energy_variance(ham, b),
    }
    _emit(_render_mapping("Gibbs state", out, cfg.format), cfg)
    return EXIT_OK


def _has_complex(x) -> bool:
    return np.asarray(x).ndim == 3


def _render_table(table, work, fmt: str) -> str:
    if fmt == "json":
        d = {"table": table.to_dict()}
        if work is not None:
            d["work"] = work.to_dict()
        return dumps(d)
    if fmt == "csv":
        return table.to_csv()
    text = table.to_markdown()
    if work is not None:
        rows = ["", f"Work at T = {work.temperature!r}", "", "| term | kind | entropy | work |", "|---|---|---|---|"]
        rows += [f"| {e.label} | {e.kind} | {e.entropy:.12g} | {e.work:.12g} |" for e in work.entries]
        text += "\n".join(rows) + "\n"
    return text


def _cmd_szilard(args, cfg: RunConfig) -> int:
    case = cfg.case
    if case not in TABLES:
        raise UsageError("szilard: --case must be one of c1, c2, q1, q2")
    if cfg.params_path:
        params = params_from_dict(load_json(cfg.params_path), case)
    elif args.random:
        if cfg.seed is None:
            raise ConfigError("szilard --random needs --seed")
        params = RANDOM_PARAMS[case](np.random.default_rng(cfg.seed))
    else:
        raise UsageError("szilard: give --params or --random")
    table = TABLES[case](params)
    work = None
    if args.temperature is not None:
        try:
            work = work_report(table, args.temperature)
        except ValueError as exc:
            raise InputError(str(exc)) from exc
    _emit(_render_table(table, work, cfg.format), cfg)
    return EXIT_OK


def _cmd_reverse(args, cfg: RunConfig) -> int:
    if not cfg.params_path:
        raise UsageError("reverse: --params is required")
    spec = chain_from_dict(load_json(cfg.params_path))
    chain = spec.chain if isinstance(spec, cbnet.StructuredChainSpec) else spec
    try:
        rev = cbnet.reverse_chain(chain, warn=False)
    except cbnet.ChainSizeError as exc:
        raise InputError(str(exc)) from exc
    out = {
        "reversed": rev.to_dict(),
        "ratio_identity_error": cbnet.ratio_identity_check(chain),
        "joint_reversal_error": cbnet.joint_reversal_error(chain),
        "double_reversal_error": cbnet.double_reversal_error(chain),
    }
    if isinstance(spec, cbnet.StructuredChainSpec):
        rep = cbnet.estimate_sigma(spec, mode=cfg.mode, n_samples=cfg.samples, seed=cfg.seed)
        out["sigma_hat"] = rep.to_dict()
        out["conditional_entropy_change"] = cbnet.conditional_entropy_change(spec)
    elif cfg.mode == "mc":
        raise UsageError("reverse: --mode mc needs a chain with sub_axes and thermal")
    _emit(_render_mapping("Time reversal", out, cfg.format), cfg)
    return EXIT_OK


def _cmd_bsc(args, cfg: RunConfig) -> int:
    if args.bsc_command == "table":
        try:
            table = bsc.c1_bsc_table(args.l, args.alpha, args.beta)
        except ValueError as exc:
            raise InputError(str(exc)) from exc
        _emit(_render_table(table, None, cfg.format), cfg)
        return EXIT_OK
    if args.bsc_command == "product":
        try:
            out = {"a": args.a, "b": args.b, "product": bsc.sym_product(args.a, args.b)}
        except ValueError as exc:
            raise InputError(str(exc)) from exc
        _emit(_render_mapping("Symmetric product", out, cfg.format), cfg)
        return EXIT_OK
    # sweep
    n = int((cfg.sweep or {}).get("points", SAMPLES["bsc_table_grid"]))
    if n < 2:
        raise ConfigError("sweep needs at least 2 points per axis")
    grid = np.linspace(0.0, 1.0, n)
    err = cyc = 0.0
    for l in grid:
        for a in grid:
            for b in grid:
                t = bsc.c1_bsc_table(l, a, b)
                err = max(err, t.max_cell_error())
                cyc = max(cyc, t.max_cycle_sum())
    out = {"points": n, "max_cell_error": err, "max_cycle_sum": cyc}
    _emit(_render_mapping("Binary-channel sweep", out, cfg.format), cfg)
    return EXIT_OK


def _process_from_dict(data: dict) -> ledger.CycleSpec:
    extra = set(data) - {"steps", "cyclic"}
    if extra:
        raise InputError(f"unknown process fields: {', '.join(sorted(extra))}")
    steps = []
    for i, s in enumerate(data.get("steps", [])):
        bad = set(s) - {"label", "ledgers", "thermal_edges", "mechanical_edges"}
        if bad:
            raise InputError(f"step {i}: unknown fields {', '.join(sorted(bad))}")
        leds = {}
        for name, led in s.get("ledgers", {}).items():
            wrong = set(led) - {"dQ", "dE", "dW", "dS"}
            if wrong or not {"dQ", "dE", "dW"} <= set(led):
                raise InputError(f"step {i}, system {name!r}: need dQ, dE, dW (and optional dS)")
            leds[name] = ledger.PortLedger(**{k: float(v) for k, v in led.items()})
        steps.append(
            ledger.ProcessStep(
                leds,
                [tuple(e) for e in s.get("thermal_edges", [])],
                [tuple(e) for e in s.get("mechanical_edges", [])],
                str(s.get("label", f"step {i}")),
            )
        )
    if not steps:
        raise InputError("process needs at least one step")
    return ledger.CycleSpec(steps, tuple(data.get("cyclic", ())))


def _cmd_ledger(args, cfg: RunConfig) -> int:
    sub = args.ledger_command
    try:
        if sub == "engine":
            out = ledger.heat_engine_cycle(args.th, args.tc, args.qc).to_dict()
        elif sub == "carnot":
            out = ledger.carnot_cycle_check(args.th, args.tc, args.s_low, args.s_high).to_dict()
        elif sub == "flow":
            f = ledger.two_bath_flow(args.th, args.tc, args.qc)
            out = {"valid": f.valid, "entropy_production": f.entropy_production, "dQ_h": f.dQ_h, "dQ_c": f.dQ_c}
        elif sub == "gas":
            g = ledger.ideal_gas_work(args.temperature, args.v1, args.v2)
            out = {"quadrature": g.quadrature, "closed_form": g.closed_form, "error": g.error}
        else:
            if not cfg.params_path:
                raise UsageError("ledger check: --params is required")
            cyc = _process_from_dict(load_json(cfg.params_path))
            try:
                cyc.validate()
                out = {"status": "pass", "closure": {k: list(v) for k, v in cyc.closure_residuals().items()}}
            except (ledger.ContactError, ledger.CycleClosureError, KeyError) as exc:
                out = {"status": "fail", "reason": str(exc).strip("'\"")}
            except ValueError as exc:
                out = {"status": "fail", "reason": str(exc)}
            _emit(_render_mapping("Process check", out, cfg.format), cfg)
            return EXIT_OK if out["status"] == "pass" else EXIT_FAILED
    except (InputError, UsageError):
        raise
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    _emit(_render_mapping(f"Ledger {sub}", out, cfg.format), cfg)
    return EXIT_OK


def _cmd_verify(args, cfg: RunConfig) -> int:
    suite = cfg.case or "all"
    seed = 0 if cfg.seed is None else cfg.seed
    rep = verify_suite(suite, seed, cfg.tolerances)
    if cfg.format == "json":
        text = dumps(rep.to_dict())
    elif cfg.format == "markdown":
        text = rep.to_markdown()
    else:
        text = rep.to_csv()
    _emit(text, cfg)
    if args.timing:
        sys.stderr.write(f"wall time: {rep.wall_time:.2f} s\n")
    return EXIT_OK if rep.passed else EXIT_FAILED


COMMANDS = {
    "thermal": _cmd_thermal,
    "szilard": _cmd_szilard,
    "reverse": _cmd_reverse,
    "bsc": _cmd_bsc,
    "ledger": _cmd_ledger,
    "verify": _cmd_verify,
}


# ---------------------------------------------------------------------------
# parser


def _tol_pair(text: str):
    name, sep, value = text.partition("=")
    if not sep:
        raise argparse.ArgumentTypeError(f"expected NAME=VALUE, got {text!r}")
    try:
        return name, float(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"tolerance {name!r} is not a number") from None


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--format", choices=FORMATS, default=None, help="output format (default json)")
    common.add_argument("--out", default=None, help=f"output file; relative paths resolve against ${OUTPUT_DIR_ENV}")
    common.add_argument("--config", default=None, help="RunConfig JSON file supplying defaults")
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--tol", type=_tol_pair, action="append", default=None, metavar="NAME=VALUE",
                        help="override a named tolerance")

    p = _Parser(prog="cainlab", description="Information-thermodynamics calculators and verification suites.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    t = sub.add_parser("thermal", parents=[common], help="Gibbs-state quantities")
    t.add_argument("--energies", type=float, nargs="+")
    t.add_argument("--beta", type=float)
    t.add_argument("--params", dest="params_path")

    s = sub.add_parser("szilard", parents=[common], help="4x2 entropy tables for the Szilard engines")
    s.add_argument("--case", choices=sorted(TABLES), required=True)
    s.add_argument("--params", dest="params_path")
    s.add_argument("--random", action="store_true", help="random parameters from --seed")
    s.add_argument("--temperature", type=float, help="also convert entropy terms to work")

    r = sub.add_parser("reverse", parents=[common], help="time reversal and Sigma-hat of a chain")
    r.add_argument("--params", dest="params_path")
    r.add_argument("--mode", choices=MODES, default=None)
    r.add_argument("--samples", type=int)

    b = sub.add_parser("bsc", help="binary symmetric channel algebra")
    bsub = b.add_subparsers(dest="bsc_command", parser_class=_Parser, required=True)
    bt = bsub.add_parser("table", parents=[common])
    bt.add_argument("--l", type=float, required=True)
    bt.add_argument("--alpha", type=float, required=True)
    bt.add_argument("--beta", type=float, required=True)
    bp = bsub.add_parser("product", parents=[common])
    bp.add_argument("--a", type=float, required=True)
    bp.add_argument("--b", type=float, required=True)
    bw = bsub.add_parser("sweep", parents=[common])
    bw.add_argument("--points", type=int, default=None)

    lg = sub.add_parser("ledger", help="first- and second-law bookkeeping")
    lsub = lg.add_subparsers(dest="ledger_command", parser_class=_Parser, required=True)
    for name in ("engine", "flow"):
        x = lsub.add_parser(name, parents=[common])
        x.add_argument("--th", type=float, required=True)
        x.add_argument("--tc", type=float, required=True)
        x.add_argument("--qc", type=float, required=True, help="heat received by the cold bath")
    c = lsub.add_parser("carnot", parents=[common])
    c.add_argument("--th", type=float, required=True)
    c.add_argument("--tc", type=float, required=True)
    c.add_argument("--s-low", type=float, required=True)
    c.add_argument("--s-high", type=float, required=True)
    g = lsub.add_parser("gas", parents=[common])
    g.add_argument("--temperature", type=float, required=True)
    g.add_argument("--v1", type=float, required=True)
    g.add_argument("--v2", type=float, required=True)
    k = lsub.add_parser("check", parents=[common])
    k.add_argument("--params", dest="params_path")

    v = sub.add_parser("verify", parents=[common], help="run verification suites")
    v.add_argument("--suite", dest="case", choices=("all",) + SUITES, default=None)
    v.add_argument("--timing", action="store_true", help="print wall time to stderr")
    return p


def _config(args) -> RunConfig:
    base = {}
    if args.config:
        base = load_json(args.config)
        if not isinstance(base, dict):
            raise InputError(f"{args.config}: configuration must be a JSON object")
        if base.get("command", args.command) != args.command:
            raise ConfigError(f"configuration is for command {base['command']!r}, not {args.command!r}")
    cli = {"command": args.command}
    for key in ("case", "params_path", "format", "seed", "mode", "samples", "out"):
        val = getattr(args, key, None)
        if val is not None:
            cli[key] = val
    if getattr(args, "points", None) is not None:
        cli["sweep"] = {"points": args.points}
    if args.tol:
        cli["tolerances"] = {**base.get("tolerances", {}), **dict(args.tol)}
    try:
        return RunConfig.from_dict({**base, **cli})
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def run(argv=None) -> int:
    """Parse ``argv`` and run one command; returns the exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError(parser.format_usage().strip())
        cfg = _config(args)
        return COMMANDS[args.command](args, cfg)
    except SystemExit as exc:  # --help and --version
        return int(exc.code or 0)
    except UsageError as exc:
        sys.stderr.write(f"usage error: {exc}\n")
        return EXIT_INPUT
    except (InputError, ConfigError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_INPUT
    except ValueError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_INPUT


def main() -> None:
    sys.exit(run())
