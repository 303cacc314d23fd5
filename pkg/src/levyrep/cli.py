"""Command-line interface: one subcommand per operation, JSON reports on stdout.

Exit status is 0 on success, 1 when the computation certifies a negative
verdict (a norm that does not embed, an isometry check that fails its
tolerance), and 2 on bad input.
"""

from __future__ import annotations

import argparse
import json
import sys
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .cosine2d import lp_membership_report
from .cubature import NoRepresentationError, fit_weights_even_p, moment_system, residual_check
from .embedding import EmbeddingMatrix, embedding_to_rep, rep_to_embedding, verify_isometry
from .levy1_2d import BoundaryFunction2D, l1_embeddability_report
from .qstable import p_projection_histogram, verify_lq_levy_rep
from .representation import DiscreteLevyRep, NormOracle
from .sphere import c_pn

TOOL = "levyrep"
EXIT_OK, EXIT_REFUTED, EXIT_INPUT = 0, 1, 2


class InputError(Exception):
    """Bad command-line input; reported on one line with status 2."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _count(text: str) -> int:
    """Positive integer that may be written as 1e6."""
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not (v.is_integer() and v > 0):
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}")
    return int(v)


def _exponent(text: str) -> float:
    if text.lower() in ("inf", "infinity"):
        return float("inf")
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None


_FLAGS = {
    "p": dict(type=_exponent, help="exponent p"),
    "q": dict(type=_exponent, help="exponent q of an l_q norm (inf allowed where meaningful)"),
    "n": dict(type=_count, help="dimension"),
    "m": dict(type=_count, help="circle grid size"),
    "bins": dict(type=_count, help="histogram bins"),
    "probes": dict(type=_count, help="random unit probes"),
    "mc": dict(type=_count, help="Monte-Carlo samples"),
    "seed": dict(type=int, help="random seed"),
    "tol": dict(type=float, help="tolerance"),
    "out": dict(type=Path, help="output file"),
}

# subcommand -> (help, accepted flags, defaults)
_COMMANDS = {
    "cpn": ("constant c_{p,n} = average of |<u, e>|^p over the unit sphere", ["p", "n", "tol", "out"], {"tol": 1e-10}),
    "embed": ("representation JSON -> embedding matrix JSON", ["in", "out"], {}),
    "extract": ("embedding matrix JSON -> canonical representation JSON", ["in", "out"], {}),
    "verify": (
        "check that a matrix is an isometric embedding of a norm",
        ["in", "q", "probes", "seed", "tol", "out"],
        {"probes": 100, "seed": 0, "tol": 1e-8},
    ),
    "levy1": ("classify the Levy 1-measure of a planar norm", ["in", "q", "m", "tol", "out"], {"m": 2048, "tol": 1e-3}),
    "invert": ("decide embeddability of a planar norm into L_p and l_p", ["in", "q", "p", "m", "tol", "out"], {"m": 2048, "tol": 1e-3}),
    "qstable-verify": (
        "Monte-Carlo check of the q-stable representation of l_q^n",
        ["q", "p", "n", "probes", "mc", "seed", "tol", "out"],
        {"q": 1.5, "p": 1.0, "n": 2, "probes": 20, "mc": 10**6, "seed": 0, "tol": 1e-2},
    ),
    "project": (
        "histogram of the p-projection of the q-stable measure",
        ["q", "p", "n", "bins", "mc", "seed", "out"],
        {"q": 1.5, "p": 1.0, "n": 2, "bins": 64, "mc": 10**6, "seed": 0},
    ),
    "cubature": (
        "discrete representation for even p by moment matching",
        ["in", "q", "p", "n", "m", "probes", "seed", "tol", "out"],
        {"m": 256, "probes": 100, "seed": 0, "tol": 1e-10},
    ),
}


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog=TOOL, description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"{TOOL} {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, (help_text, flags, defaults) in _COMMANDS.items():
        sp = sub.add_parser(name, help=help_text, description=help_text)
        for flag in flags:
            if flag == "in":
                sp.add_argument("--in", dest="inputs", action="append", type=Path, default=[], help="input file (repeatable)")
                continue
            opts = dict(_FLAGS[flag])
            if flag in defaults:
                opts["help"] += f" (default {defaults[flag]})"
            sp.add_argument(f"--{flag}", default=defaults.get(flag), **opts)
    return parser


# -- inputs --------------------------------------------------------------------


def _read_json(path: Path):
    try:
        return json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})") from None


def _load_rep(path: Path) -> DiscreteLevyRep:
    data = _read_json(path)
    if not isinstance(data, dict) or "atoms" not in data:
        raise InputError(f"{path}: not a representation file (expected keys dim, p, atoms)")
    return DiscreteLevyRep.from_dict(data)


def _load_matrix(path: Path) -> EmbeddingMatrix:
    data = _read_json(path)
    if not isinstance(data, dict) or "rows" not in data:
        raise InputError(f"{path}: not an embedding matrix file (expected keys p, rows)")
    return EmbeddingMatrix.from_dict(data)


def _boundary(args) -> BoundaryFunction2D:
    if args.inputs:
        if len(args.inputs) != 1:
            raise InputError("expected exactly one --in boundary CSV")
        return BoundaryFunction2D.from_csv(args.inputs[0])
    if args.q is None:
        raise InputError("give a boundary CSV with --in or an l_q norm with --q")
    return BoundaryFunction2D.from_norm(NormOracle.lq(args.q, 2), args.m)


def _norm_from_file(path: Path) -> NormOracle:
    if path.suffix.lower() == ".csv":
        return NormOracle.boundary2d(BoundaryFunction2D.from_csv(path))
    data = _read_json(path)
    if isinstance(data, dict) and "atoms" in data:
        return NormOracle.discrete(DiscreteLevyRep.from_dict(data))
    if isinstance(data, dict) and "rows" in data:
        M = EmbeddingMatrix.from_dict(data)
        return NormOracle.custom(M.lp_norm, M.dim, name="embedding")
    raise InputError(f"{path}: expected a representation, embedding matrix or boundary CSV")


def _require(args, *names):
    missing = [f"--{n}" for n in names if getattr(args, n) is None]
    if missing:
        raise InputError(f"{args.command} needs {', '.join(missing)}")


def _describe(path: Path | None):
    return None if path is None else str(path)


# -- subcommands ---------------------------------------------------------------
# each returns (result dict, exit status, artifact writer or None)


def _cmd_cpn(args):
    _require(args, "p", "n")
    return {"c_pn": c_pn(args.p, args.n, tol=args.tol)}, EXIT_OK, None


def _cmd_embed(args):
    if len(args.inputs) != 1:
        raise InputError("embed needs exactly one --in representation JSON")
    M = rep_to_embedding(_load_rep(args.inputs[0]))
    return {"shape": list(M.shape), "p": M.p, "embedding": M.to_dict()}, EXIT_OK, M.save


def _cmd_extract(args):
    if len(args.inputs) != 1:
        raise InputError("extract needs exactly one --in embedding matrix JSON")
    rep = embedding_to_rep(_load_matrix(args.inputs[0]))
    return {"atoms": len(rep), "p": rep.p, "representation": rep.to_dict()}, EXIT_OK, rep.save


def _cmd_verify(args):
    if not args.inputs:
        raise InputError("verify needs --in M.json")
    M = _load_matrix(args.inputs[0])
    if len(args.inputs) == 2:
        norm = _norm_from_file(args.inputs[1])
    elif len(args.inputs) == 1 and args.q is not None:
        norm = NormOracle.lq(args.q, M.dim)
    else:
        raise InputError("verify needs the target norm: a second --in file or --q")
    report = verify_isometry(M, norm, probes=args.probes, seed=args.seed)
    result = {"norm": norm.describe(), **report.to_dict(), "tol": args.tol, "passed": report.max_rel_error <= args.tol}
    return result, EXIT_OK if result["passed"] else EXIT_REFUTED, None


def _cmd_levy1(args):
    G = _boundary(args)
    report = l1_embeddability_report(G, threshold=args.tol)
    result = report.to_dict()
    if report.embedding is not None:
        result["embedding"] = report.embedding.to_dict()
    writer = report.embedding.save if report.embedding is not None else None
    return result, EXIT_REFUTED if report.refutes else EXIT_OK, writer


def _cmd_invert(args):
    _require(args, "p")
    report = lp_membership_report(_boundary(args), args.p, threshold=args.tol)
    result = {**report.to_dict(), "reason": report.reason}
    if report.embedding is not None:
        writer = report.embedding.save
    elif report.density is not None:
        writer = report.density.to_csv
    else:
        writer = None
    return result, EXIT_REFUTED if report.refutes else EXIT_OK, writer


def _cmd_qstable_verify(args):
    report = verify_lq_levy_rep(args.q, args.p, args.n, probes=args.probes, mc=args.mc, seed=args.seed)
    result = {**report.to_dict(), "tol": args.tol, "passed": report.max_rel_error <= args.tol}
    return result, EXIT_OK if result["passed"] else EXIT_REFUTED, None


def _cmd_project(args):
    if args.out is not None and args.n != 2:
        raise InputError("histogram CSV output is defined for --n 2 only")
    hist = p_projection_histogram(args.q, args.p, n=args.n, bins=args.bins, mc=args.mc, seed=args.seed)
    frac = hist.max_fraction()
    result = {
        "bins": int(hist.masses.size),
        "samples": hist.samples_used,
        "total_mass": hist.total,
        "max_fraction": frac,
        "max_fraction_times_bins": frac * hist.masses.size,
    }
    return result, EXIT_OK, hist.to_csv


def _cmd_cubature(args):
    _require(args, "p")
    if args.inputs:
        if len(args.inputs) != 1:
            raise InputError("cubature takes one --in norm file")
        norm = _norm_from_file(args.inputs[0])
    elif args.q is not None:
        _require(args, "n")
        norm = NormOracle.lq(args.q, args.n)
    else:
        raise InputError("give the target norm with --in or --q and --n")
    system = moment_system(norm, args.p, m=args.m, seed=args.seed)
    try:
        rep, residual = fit_weights_even_p(system, None, tol=args.tol, seed=args.seed)
    except NoRepresentationError as exc:
        return {"found": False, "residual": exc.residual, "message": str(exc)}, EXIT_OK, None
    result = {
        "found": True,
        "atoms": len(rep),
        "residual": residual,
        "probe_residual": residual_check(rep, norm, probes=args.probes, seed=args.seed),
        "representation": rep.to_dict(),
    }
    return result, EXIT_OK, rep.save


_HANDLERS = {
    "cpn": _cmd_cpn,
    "embed": _cmd_embed,
    "extract": _cmd_extract,
    "verify": _cmd_verify,
    "levy1": _cmd_levy1,
    "invert": _cmd_invert,
    "qstable-verify": _cmd_qstable_verify,
    "project": _cmd_project,
    "cubature": _cmd_cubature,
}

# reports that are themselves the artifact written by --out
_REPORT_IS_ARTIFACT = {"cpn", "verify", "qstable-verify"}


# -- reports -------------------------------------------------------------------


def _plain(obj):
    """Convert numpy scalars and arrays to plain Python for JSON."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    return obj


def config_echo(args) -> dict:
    _, flags, _ = _COMMANDS[args.command]
    out = {}
    for flag in flags:
        if flag == "in":
            out["in"] = [str(p) for p in args.inputs]
        elif flag == "out":
            out["out"] = _describe(args.out)
        else:
            value = getattr(args, flag)
            # echo --q inf in the spelling the parser reads back
            out[flag] = "inf" if isinstance(value, float) and np.isinf(value) else value
    return out


def emit_report(args, result: dict) -> str:
    """Serialize a report with a fixed field order; non-finite numbers are refused."""
    report = {
        "tool": TOOL,
        "version": __version__,
        "command": args.command,
        "config": config_echo(args),
        "seed": getattr(args, "seed", None),
        "result": result,
        "timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds"),
    }
    try:
        return json.dumps(_plain(report), indent=2, allow_nan=False)
    except ValueError:
        raise InputError("report contains non-finite numbers; refusing to emit it") from None


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        result, status, writer = _HANDLERS[args.command](args)
        text = emit_report(args, result)
        if args.out is not None:
            if args.command in _REPORT_IS_ARTIFACT:
                args.out.write_text(text + "\n")
            elif writer is not None:
                writer(args.out)
        # cpn prints the bare constant so it can be used in shell arithmetic
        print(f"{result['c_pn']:.15g}" if args.command == "cpn" else text)
    except (InputError, ValueError, KeyError, OSError) as exc:
        msg = str(exc).splitlines()[0] if str(exc) else type(exc).__name__
        print(f"{TOOL} {args.command}: error: {msg}", file=sys.stderr)
        return EXIT_INPUT
    return status


def main(argv=None):
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
