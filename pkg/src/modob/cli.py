"""``modob`` command line: generators in, freeness verdict and verified cocycles out.

Every subcommand builds a JSON document first; ``--text`` renders that
document, it never recomputes anything.
"""
from __future__ import annotations

import argparse
import json
import sys
import time
from contextlib import contextmanager
from fractions import Fraction
from pathlib import Path

from . import __version__
from .abgroup import parse_matrix
from .cocycle import obstruction_cochain, table_limit, verify_bockstein, verify_cocycle
from .errors import ModobError, PrecisionExhausted, SizeLimit
from .exactreal import load_basis
from .fincoh import class_is_trivial, format_table, restrict
from .qforms import IntegralBilinearForm, IntegralQuadraticForm, parse_form, polarize, quad_of_bilinear
from .relations import (
    EXACT,
    FREE,
    FREE_UP_TO_BOUND,
    NOT_FREE,
    NUMERIC,
    FreenessCertificate,
    LogGenerators,
    QuadraticRelation,
    SearchConfig,
    form_at_generator,
    is_quadratically_free,
    isotropy_defect,
    relation_to_form,
)

SCHEMA = "modob-report/1"
EXIT_CODES = {FREE: 0, NOT_FREE: 10, FREE_UP_TO_BOUND: 20}
EXIT_PARSE, EXIT_PRECISION, EXIT_LIMIT = 2, 3, 4
DATA_DIR = Path(__file__).parent / "data"


class InputError(ValueError):
    pass


# -- input parsing --------------------------------------------------------------------------


def split_top_level(text: str) -> list[str]:
    """Split on commas outside parentheses."""
    parts, depth, cur = [], 0, []
    for ch in text:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        if ch == "," and depth == 0:
            parts.append("".join(cur))
            cur = []
        else:
            cur.append(ch)
    parts.append("".join(cur))
    parts = [p.strip() for p in parts]
    if depth or not all(parts):
        raise InputError(f"malformed generator list {text!r}")
    return parts


def resolve_basis(path: str) -> Path:
    p = Path(path)
    if p.exists():
        return p
    bundled = DATA_DIR / p.name
    if bundled.exists():
        return bundled
    raise InputError(f"basis file {path!r} not found")


def generators_from_args(args) -> LogGenerators:
    if not args.gens:
        raise InputError("--gens is required")
    gens = split_top_level(args.gens)
    if args.mode == EXACT:
        if not args.basis:
            raise InputError("exact mode needs --basis")
        basis = load_basis(resolve_basis(args.basis))
        return LogGenerators.exact(basis, gens)
    return LogGenerators.numeric(gens, args.prec)


def form_from_args(args) -> IntegralQuadraticForm | None:
    if getattr(args, "bilinear", None):
        rows = parse_matrix(args.bilinear.replace(";", "\n"))
        if any(v.denominator != 1 for r in rows for v in r):
            raise InputError("bilinear form entries must be integers")
        return quad_of_bilinear(IntegralBilinearForm(tuple(tuple(int(v) for v in r) for r in rows)))
    if getattr(args, "form", None):
        return parse_form(args.form)
    if getattr(args, "relation", None):
        coeffs = [int(c) for c in args.relation.split(",")]
        n = 0
        while n * (n + 1) // 2 < len(coeffs):
            n += 1
        if n * (n + 1) // 2 != len(coeffs):
            raise InputError(f"{len(coeffs)} coefficients do not fit any n(n+1)/2")
        return relation_to_form(QuadraticRelation(n, tuple(coeffs)))
    return None


def bilinear_from_args(args, q: IntegralQuadraticForm) -> IntegralBilinearForm:
    if getattr(args, "bilinear", None):
        rows = parse_matrix(args.bilinear.replace(";", "\n"))
        return IntegralBilinearForm(tuple(tuple(int(v) for v in r) for r in rows))
    return polarize(q)


# -- report fragments ------------------------------------------------------------------------


class Timer:
    def __init__(self):
        self.stages: dict[str, float] = {}

    @contextmanager
    def stage(self, name: str):
        t0 = time.perf_counter()
        try:
            yield
        finally:
            self.stages[name] = round(time.perf_counter() - t0, 6)


def config_from_args(args) -> SearchConfig:
    return SearchConfig(prec=args.prec, coeff_bound=args.bound)


def input_echo(args) -> dict:
    return {
        "generators": split_top_level(args.gens) if args.gens else None,
        "mode": args.mode,
        "basis_file": getattr(args, "basis", None),
        "precision_bits": args.prec,
        "coeff_bound": args.bound,
    }


def defect_json(q: IntegralQuadraticForm, T: LogGenerators, prec: int) -> dict:
    out = {}
    if T.mode == EXACT:
        exact = isotropy_defect(q, T)
        out["exact"] = str(exact)
        out["exact_coords"] = exact.to_json()
        out["is_zero"] = exact.is_zero()
    numeric = isotropy_defect(q, T, prec)
    out["numeric"] = str(numeric)
    out["form_at_generator"] = str(form_at_generator(q, T, prec))
    if T.mode == NUMERIC:
        out["is_zero"] = numeric.is_zero()
    return out


def form_json(q: IntegralQuadraticForm) -> dict:
    B = polarize(q)
    return {"literal": q.to_literal(), "form": q.to_json(), "polarized_bilinear": B.to_json()}


def cocycle_json(B: IntegralBilinearForm, grids: list[int], oracles: list[int], seed: int, samples: int) -> dict:
    c = obstruction_cochain(B)
    limit = table_limit()
    out = {"bilinear": B.to_json(), "quadratic_form": quad_of_bilinear(B).to_literal(), "verification": [], "oracle": []}
    for N in grids:
        report = verify_cocycle(c, N, seed=seed, samples=samples)
        if B.dim and (N**B.dim) ** 4 <= limit:
            report["bockstein"] = verify_bockstein(B, N)
        else:
            report["bockstein"] = None
        out["verification"].append(report)
    for N in oracles:
        results = []
        for L in (N, N * N):
            table = restrict(c, N, L)
            results.append({"modulus": L, "trivial": class_is_trivial(table)})
        out["oracle"].append({"N": N, "group": f"(Z/{N})^{B.dim}", "classes": results})
    out["max_defect"] = str(max((Fraction(r["max_defect"]) for r in out["verification"]), default=Fraction(0)))
    return out


def relations_json(cert: FreenessCertificate) -> dict:
    data = cert.to_json()
    data["relation_lattice"] = {"rank": len(cert.lattice), "basis": data.pop("lattice")}
    return data


# -- commands ------------------------------------------------------------------------------------


def cmd_relations(args, timer: Timer) -> tuple[dict, int]:
    with timer.stage("relations"):
        T = generators_from_args(args)
        cert = is_quadratically_free(T, config_from_args(args))
    body = {"input": input_echo(args), **relations_json(cert)}
    return body, EXIT_CODES[cert.verdict]


def cmd_free(args, timer: Timer) -> tuple[dict, int]:
    with timer.stage("relations"):
        T = generators_from_args(args)
        cert = is_quadratically_free(T, config_from_args(args))
    witness = cert.witness.to_json() if cert.witness else None
    return {"input": input_echo(args), "verdict": cert.verdict, "witness": witness}, EXIT_CODES[cert.verdict]


def cmd_form(args, timer: Timer) -> tuple[dict, int]:
    with timer.stage("form"):
        T = generators_from_args(args)
        q = form_from_args(args)
        body = {"input": input_echo(args)}
        code = 0
        if q is None:
            cert = is_quadratically_free(T, config_from_args(args))
            body["verdict"] = cert.verdict
            code = EXIT_CODES[cert.verdict]
            if cert.witness is None:
                return {**body, "witness_form": None}, code
            T = cert.basis_reduction.basis
            body["basis"] = list(T.labels)
            q = relation_to_form(cert.witness)
        if q.dim != len(T):
            raise InputError(f"form has dimension {q.dim} but there are {len(T)} generators")
        body["witness_form"] = {**form_json(q), "isotropy_defect": defect_json(q, T, args.prec)}
    return body, code


def cocycle_form(args) -> IntegralBilinearForm:
    q = form_from_args(args)
    if q is None:
        raise InputError("give --form, --bilinear or --relation")
    return bilinear_from_args(args, q)


def cmd_cocycle(args, timer: Timer) -> tuple[dict, int]:
    with timer.stage("cocycle"):
        B = cocycle_form(args)
        body = cocycle_json(B, args.grid, args.oracle_N, args.seed, args.samples)
        if args.gens:
            T = generators_from_args(args)
            if len(T) != B.dim:
                raise InputError(f"form has dimension {B.dim} but there are {len(T)} generators")
            body["isotropy_defect"] = defect_json(quad_of_bilinear(B), T, args.prec)
    return body, 0


def cmd_verify(args, timer: Timer) -> tuple[dict, int]:
    with timer.stage("verify"):
        B = cocycle_form(args)
        c = obstruction_cochain(B)
        reports = [verify_cocycle(c, N, seed=args.seed, samples=args.samples) for N in args.grid]
    return {"bilinear": B.to_json(), "verification": reports}, 0


def cmd_restrict(args, timer: Timer) -> tuple[dict, int]:
    with timer.stage("restrict"):
        B = cocycle_form(args)
        N = args.grid[0]
        L = args.modulus or N
        table = restrict(obstruction_cochain(B), N, L)
    return {"bilinear": B.to_json(), "N": N, "modulus": L, "table": format_table(table)}, 0


def cmd_report(args, timer: Timer) -> tuple[dict, int]:
    with timer.stage("relations"):
        T = generators_from_args(args)
        cert = is_quadratically_free(T, config_from_args(args))
    body = {"input": input_echo(args), **relations_json(cert), "witness_form": None, "cocycle_verification": None}
    if cert.witness is not None:
        basis = cert.basis_reduction.basis
        q = relation_to_form(cert.witness)
        with timer.stage("form"):
            body["witness_form"] = {**form_json(q), "isotropy_defect": defect_json(q, basis, args.prec)}
        with timer.stage("cocycle"):
            body["cocycle_verification"] = cocycle_json(polarize(q), args.grid, args.oracle_N, args.seed, args.samples)
    return body, EXIT_CODES[cert.verdict]


COMMANDS = {
    "relations": cmd_relations,
    "free": cmd_free,
    "form": cmd_form,
    "cocycle": cmd_cocycle,
    "verify": cmd_verify,
    "restrict": cmd_restrict,
    "report": cmd_report,
}


# -- output ---------------------------------------------------------------------------------------


def render_text(data, indent: int = 0) -> str:
    pad = "  " * indent
    lines = []
    if isinstance(data, dict):
        for k, v in data.items():
            if isinstance(v, (dict, list)) and v:
                lines.append(f"{pad}{k}:")
                lines.append(render_text(v, indent + 1))
            elif isinstance(v, str) and "\n" in v:
                lines.append(f"{pad}{k}:")
                lines.extend(f"{pad}  {ln}" for ln in v.rstrip("\n").splitlines())
            else:
                lines.append(f"{pad}{k}: {json.dumps(v) if not isinstance(v, str) else v}")
    elif isinstance(data, list):
        if all(not isinstance(v, (dict, list)) for v in data):
            return f"{pad}{json.dumps(data)}"
        for v in data:
            lines.append(f"{pad}-")
            lines.append(render_text(v, indent + 1))
    else:
        lines.append(f"{pad}{data}")
    return "\n".join(lines)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="modob", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"modob {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        mode = p.add_mutually_exclusive_group()
        mode.add_argument("--exact", dest="mode", action="store_const", const=EXACT)
        mode.add_argument("--numeric", dest="mode", action="store_const", const=NUMERIC)
        p.set_defaults(mode=None)
        p.add_argument("--basis", help="basis file (exact mode); bundled fixtures are found by name")
        p.add_argument("--gens", help="comma separated generators")
        p.add_argument("--prec", type=int, default=256, help="working precision in bits")
        p.add_argument("--bound", type=int, default=10**6, help="PSLQ coefficient bound")
        p.add_argument("--form", help='quadratic form literal, e.g. "diag:[2,-1];cross:[]"')
        p.add_argument("--bilinear", help='integral bilinear form, rows separated by ";"')
        p.add_argument("--relation", help="relation coefficients over t_i t_j (i <= j)")
        p.add_argument("--grid", type=int, nargs="+", default=[2], help="verification grid orders N")
        p.add_argument("--oracle-N", dest="oracle_N", type=int, nargs="*", default=[2], help="finite oracle orders")
        p.add_argument("--modulus", type=int, help="coefficient modulus L for restrict (default N)")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--samples", type=int, default=20000, help="sample count when a grid is too large")
        out = p.add_mutually_exclusive_group()
        out.add_argument("--json", dest="output", action="store_const", const="json")
        out.add_argument("--text", dest="output", action="store_const", const="text")
        p.set_defaults(output="json")
        p.add_argument("--no-timings", action="store_true", help="omit wall-clock timings from the output")
    return parser


def run(argv: list[str] | None = None) -> tuple[dict, int]:
    """Parse ``argv`` and return ``(document, exit code)`` without printing."""
    args = build_parser().parse_args(argv)
    if args.mode is None:
        args.mode = EXACT if args.basis else NUMERIC
    timer = Timer()
    doc = {"schema": SCHEMA, "tool_version": __version__, "command": args.command, "seed": args.seed}
    try:
        body, code = COMMANDS[args.command](args, timer)
    except PrecisionExhausted as exc:
        body, code = {"error": {"kind": "precision-exhausted", "message": str(exc)}}, EXIT_PRECISION
    except SizeLimit as exc:
        body, code = {"error": {"kind": "size-limit", "message": str(exc)}}, EXIT_LIMIT
    except (InputError, ModobError, ValueError, SyntaxError, KeyError) as exc:
        body, code = {"error": {"kind": "input", "message": str(exc)}}, EXIT_PARSE
    doc.update(body)
    doc["exit_code"] = code
    if not args.no_timings:
        doc["timings"] = timer.stages
    return doc, code


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    doc, code = run(argv)
    text = "--text" in argv
    if text:
        print(render_text(doc))
    else:
        print(json.dumps(doc, indent=2, sort_keys=True))
    return code


if __name__ == "__main__":
    sys.exit(main())
