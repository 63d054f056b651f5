"""``rnsforge`` command line: plan, minimize, synthesize, emit, verify, RNS codec.

Exit codes: 0 success, 1 verification failure, 2 planning error,
3 parameter or capacity error.  ``RNSFORGE_SEED`` sets the default seed.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time
from pathlib import Path

from . import __version__
from .emit import emit_blif, emit_pla_bundle, emit_verilog
from .errors import CapacityError, ContractError, PlanningError, RnsForgeError, VerificationError
from .minimize import cover_to_pla
from .modmath import plan_mul, plan_reduction
from .netlist import (Netlist, cost, minimize_tables, mod_circuit_tables, mul_circuit_tables,
                      synth_mod_circuit, synth_mul_circuit)
from .rns import (RnsBase, decode_polynomial, encode, parse_residues, reduction_plans,
                  residues_to_csv, residues_to_json, select_moduli)
from .simulate import check_exhaustive, check_random, read_blif
from .tables import table_to_pla

EXIT_OK, EXIT_VERIFY, EXIT_PLAN, EXIT_PARAM = 0, 1, 2, 3
DEFAULT_TRIALS = 10_000


class _Parser(argparse.ArgumentParser):
    # bad flags are parameter errors, not argparse's default exit 2
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_PARAM, f"{self.prog}: error: {message}\n")


def _sha256(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


class Run:
    """Collects inputs/outputs of one command and writes its manifest."""

    def __init__(self, command: str, params: dict):
        self.command = command
        self.params = params
        self.inputs: list[Path] = []
        self.outputs: list[Path] = []
        self.start = time.perf_counter()

    def write(self, path: Path, text: str) -> Path:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)
        self.outputs.append(path)
        return path

    def read(self, path) -> str:
        path = Path(path)
        self.inputs.append(path)
        return path.read_text()

    def manifest(self, root: Path | None = None) -> dict:
        def name(p: Path) -> str:
            if root is not None:
                try:
                    return str(p.relative_to(root))
                except ValueError:
                    pass
            return str(p)
        return {
            "format": "rnsforge.run-manifest/1",
            "command": self.command,
            "parameters": self.params,
            "tool_version": __version__,
            "inputs": {name(p): _sha256(p) for p in self.inputs},
            "outputs": {name(p): _sha256(p) for p in self.outputs},
            "duration_s": round(time.perf_counter() - self.start, 6),
        }

    def finish(self, manifest_path: str | Path | None, root: Path | None = None):
        doc = json.dumps(self.manifest(root), indent=2, sort_keys=True) + "\n"
        if manifest_path is None:
            sys.stderr.write(doc)
        else:
            Path(manifest_path).parent.mkdir(parents=True, exist_ok=True)
            Path(manifest_path).write_text(doc)


def _params(args) -> dict:
    skip = {"func", "manifest"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip and v is not None}


def _table_name(key) -> str:
    return f"{key[0]}_c{key[1]}"


def _write_artifacts(run: Run, out: Path, plan_doc: dict, tables: dict, covers: dict,
                     netlist: Netlist, emit: list[str]):
    run.write(out / "plan.json", json.dumps(plan_doc, indent=2) + "\n")
    for key in sorted(tables):
        run.write(out / "tables" / f"{_table_name(key)}.pla", table_to_pla(tables[key]))
        run.write(out / "covers" / f"{_table_name(key)}.pla",
                  cover_to_pla(covers[key], tables[key].label))
    run.write(out / "netlist.json", json.dumps(netlist.to_dict()) + "\n")
    if "blif" in emit:
        run.write(out / "netlist.blif", emit_blif(netlist))
    if "verilog" in emit:
        run.write(out / "netlist.v", emit_verilog(netlist))
    if "pla" in emit:
        for fname, text in sorted(emit_pla_bundle(netlist).items()):
            run.write(out / "pla" / fname, text)
    run.write(out / "cost.json", json.dumps(cost(netlist).to_dict(), indent=2) + "\n")


def cmd_gen_mod(args) -> int:
    run = Run("gen-mod", _params(args))
    plan = plan_reduction(args.width, args.modulus)
    tables = mod_circuit_tables(plan)
    covers = minimize_tables(tables, args.mode, {})
    netlist = synth_mod_circuit(plan, covers)
    out = Path(args.out)
    _write_artifacts(run, out, plan.to_dict(), tables, covers, netlist, args.emit or ["blif"])
    run.finish(args.manifest or out / "manifest.json", out)
    print(json.dumps({"netlist": str(out / "netlist.json"), "stages": len(plan.stages),
                      **cost(netlist).to_dict()}))
    return EXIT_OK


def cmd_gen_mul(args) -> int:
    run = Run("gen-mul", _params(args))
    plan = plan_mul(args.width_a, args.width_b, args.modulus, args.chunk)
    tables = mul_circuit_tables(plan)
    covers = minimize_tables(tables, args.mode, {})
    netlist = synth_mul_circuit(plan, covers)
    out = Path(args.out)
    _write_artifacts(run, out, plan.to_dict(), tables, covers, netlist, args.emit or ["blif"])
    run.finish(args.manifest or out / "manifest.json", out)
    print(json.dumps({"netlist": str(out / "netlist.json"), **cost(netlist).to_dict()}))
    return EXIT_OK


def _load_circuit(run: Run, path: str):
    text = run.read(path)
    if text.lstrip().startswith("{"):
        return Netlist.from_dict(json.loads(text))
    return read_blif(text)


def default_seed() -> int:
    return int(os.environ.get("RNSFORGE_SEED", "0"))


def cmd_verify(args) -> int:
    run = Run("verify", _params(args))
    circuit = _load_circuit(run, args.netlist)
    p = args.modulus
    inputs = circuit.inputs
    if args.op == "mod":
        if len(inputs) != 1:
            raise ContractError(f"a modulo netlist has one input vector, found {len(inputs)}")
        oracle = lambda x: x % p
    else:
        if len(inputs) != 2:
            raise ContractError(f"a multiplier netlist has two input vectors, found {len(inputs)}")
        oracle = lambda a, b: a * b % p
    if args.exhaustive:
        verdict = check_exhaustive(circuit, oracle, args.width_cap)
    else:
        seed = default_seed() if args.seed is None else args.seed
        run.params["seed"] = seed
        verdict = check_random(circuit, oracle, args.trials or DEFAULT_TRIALS, seed)
    text = json.dumps(verdict.to_dict(), indent=2) + "\n"
    if args.out:
        run.write(Path(args.out), text)
    sys.stdout.write(text)
    run.finish(args.manifest)
    return EXIT_OK if verdict.equivalent else EXIT_VERIFY


def cmd_cost(args) -> int:
    run = Run("cost", _params(args))
    n = Netlist.from_dict(json.loads(run.read(args.netlist)))
    text = json.dumps(cost(n).to_dict(), indent=2) + "\n"
    if args.out:
        run.write(Path(args.out), text)
    sys.stdout.write(text)
    run.finish(args.manifest)
    return EXIT_OK


def _arg_text(value: str) -> str:
    return sys.stdin.read() if value == "-" else value


def cmd_rns_select(args) -> int:
    run = Run("rns select", _params(args))
    base = select_moduli(args.range_bits, args.max_bits)
    if args.out:
        run.write(Path(args.out), base.dumps())
    else:
        sys.stdout.write(base.dumps())
    run.finish(args.manifest)
    return EXIT_OK


def cmd_rns_encode(args) -> int:
    run = Run("rns encode", _params(args))
    base = RnsBase.loads(run.read(args.base))
    x = int(_arg_text(args.value).strip())
    plans = None
    if args.via_plans:
        plans = reduction_plans(base, max(1, x.bit_length()))
    res = encode(x, base, plans)
    print(residues_to_json(res) if args.format == "json" else residues_to_csv(res))
    run.finish(args.manifest)
    return EXIT_OK


def cmd_rns_decode(args) -> int:
    run = Run("rns decode", _params(args))
    base = RnsBase.loads(run.read(args.base))
    value, r = decode_polynomial(parse_residues(_arg_text(args.residues)), base)
    if args.format == "json":
        print(json.dumps({"value": str(value), "r": r}))
    else:
        print(value)
    run.finish(args.manifest)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="rnsforge", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"rnsforge {__version__}")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p):
        p.add_argument("--manifest", help="run manifest path (default: stderr, or OUT/manifest.json)")

    def gen_opts(p):
        p.add_argument("--out", required=True, help="output directory")
        p.add_argument("--emit", action="append", choices=["blif", "verilog", "pla"],
                       help="netlist format, repeatable (default blif)")
        p.add_argument("--mode", choices=["auto", "exact", "heuristic"], default="auto")
        common(p)

    p = sub.add_parser("gen-mod", help="x mod P circuit")
    p.add_argument("--width", type=int, required=True)
    p.add_argument("--modulus", type=int, required=True)
    gen_opts(p)
    p.set_defaults(func=cmd_gen_mod)

    p = sub.add_parser("gen-mul", help="a*b mod P circuit")
    p.add_argument("--width-a", type=int, required=True)
    p.add_argument("--width-b", type=int, required=True)
    p.add_argument("--modulus", type=int, required=True)
    p.add_argument("--chunk", type=int, default=3, help="chunk width: 2, 3 or 4")
    gen_opts(p)
    p.set_defaults(func=cmd_gen_mul)

    p = sub.add_parser("verify", help="check a BLIF or netlist JSON against the oracle")
    p.add_argument("--netlist", required=True)
    p.add_argument("--op", choices=["mod", "mul"], required=True)
    p.add_argument("--modulus", type=int, required=True)
    g = p.add_mutually_exclusive_group()
    g.add_argument("--exhaustive", action="store_true")
    g.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--width-cap", type=int, default=20)
    p.add_argument("--out", help="also write the verdict here")
    common(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("cost", help="cost report of a netlist JSON")
    p.add_argument("--netlist", required=True)
    p.add_argument("--out")
    common(p)
    p.set_defaults(func=cmd_cost)

    rns = sub.add_parser("rns", help="residue number system codec")
    rsub = rns.add_subparsers(dest="rns_command", required=True, parser_class=_Parser)
    p = rsub.add_parser("select", help="greedy co-prime base")
    p.add_argument("--range-bits", type=int, required=True)
    p.add_argument("--max-bits", type=int, required=True)
    p.add_argument("--out", help="base JSON path (default stdout)")
    common(p)
    p.set_defaults(func=cmd_rns_select)

    p = rsub.add_parser("encode", help="integer to residues")
    p.add_argument("--base", required=True)
    p.add_argument("value", help="decimal integer, or - for stdin")
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.add_argument("--via-plans", action="store_true", help="reduce through per-modulus plans")
    common(p)
    p.set_defaults(func=cmd_rns_encode)

    p = rsub.add_parser("decode", help="residues to integer")
    p.add_argument("--base", required=True)
    p.add_argument("residues", help="CSV line or JSON array, or - for stdin")
    p.add_argument("--format", choices=["plain", "json"], default="plain")
    common(p)
    p.set_defaults(func=cmd_rns_decode)
    return ap


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else EXIT_PARAM
    try:
        return args.func(args)
    except VerificationError as e:
        print(f"rnsforge: verification failed: {e}", file=sys.stderr)
        return EXIT_VERIFY
    except PlanningError as e:
        print(f"rnsforge: planning failed: {e}", file=sys.stderr)
        return EXIT_PLAN
    except (CapacityError, RnsForgeError, ValueError) as e:
        print(f"rnsforge: {e}", file=sys.stderr)
        return EXIT_PARAM
    except OSError as e:
        print(f"rnsforge: {e}", file=sys.stderr)
        return EXIT_PARAM


if __name__ == "__main__":
    sys.exit(main())
