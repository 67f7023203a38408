"""nttforge command line: params, mcm, generate, verify, report.

Exit codes: 0 pass, 1 verification mismatch, 2 invalid input,
3 internal invariant violation.
"""

from __future__ import annotations

import argparse
import os
import sys

from . import __version__
from .mcm import csd_total, format_graph, mcm_decompose, verify_graph
from .mcm.plan import PlanError
from .ring import FULL, INCOMPLETE, PRESETS, ParamError, derive_params, format_params, preset
from .rtl import IRError, PipelinePolicy, generate_design
from .rtl.report import structural_report
from .rtl.verilog import emit_verilog, file_name, parse_verilog, scan_text
from .sim import SimError, check_equivalence, corner_vectors, golden, measure_ii, write_vectors

EXIT_OK, EXIT_MISMATCH, EXIT_INPUT, EXIT_INTERNAL = 0, 1, 2, 3
OUT_ENV = "NTTFORGE_OUT"
CONFIG_KEYS = {
    "scheme": str, "q": int, "n": int, "variant": str, "seed": int, "trials": int, "out": str,
    "max_adder_depth": int, "register_inputs": int, "register_outputs": int, "ir": str,
}
DEFAULTS = {"variant": FULL, "seed": 0, "trials": 1000, "max_adder_depth": 2,
            "register_inputs": 1, "register_outputs": 1}


class InputError(ValueError):
    pass


def read_config(path: str) -> dict:
    """Flat ``key = value`` file; '#' starts a comment."""
    out = {}
    try:
        with open(path) as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise InputError(f"cannot read config {path}: {exc.strerror}") from None
    for k, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InputError(f"{path}:{k}: expected key = value")
        key, val = (x.strip() for x in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in CONFIG_KEYS:
            raise InputError(f"{path}:{k}: unknown key {key!r}")
        try:
            out[key] = CONFIG_KEYS[key](val)
        except ValueError:
            raise InputError(f"{path}:{k}: bad value for {key}: {val!r}") from None
    return out


def resolve(args) -> dict:
    """Merge defaults < config file < command-line flags."""
    cfg = dict(DEFAULTS)
    if getattr(args, "config", None):
        cfg.update(read_config(args.config))
    for key in CONFIG_KEYS:
        v = getattr(args, key, None)
        if v is not None:
            cfg[key] = v
    cfg["out"] = cfg.get("out") or os.environ.get(OUT_ENV) or "."
    return cfg


def ring_from(cfg: dict):
    if cfg.get("scheme"):
        if cfg.get("q") is not None or cfg.get("n") is not None:
            raise InputError("give either --scheme or --q/--n, not both")
        return preset(cfg["scheme"])
    if cfg.get("q") is None or cfg.get("n") is None:
        raise InputError("need --scheme or both --q and --n")
    return derive_params(cfg["q"], cfg["n"], cfg.get("variant", FULL))


def policy_from(cfg: dict) -> PipelinePolicy:
    d = cfg["max_adder_depth"]
    if d < 0:
        raise InputError("--max-adder-depth must be >= 0 (0 means unbounded)")
    return PipelinePolicy(d or None, bool(cfg["register_inputs"]), bool(cfg["register_outputs"]))


def atomic_write(path: str, text: str) -> None:
    d = os.path.dirname(path)
    if d:
        os.makedirs(d, exist_ok=True)
    tmp = f"{path}.tmp{os.getpid()}"
    with open(tmp, "w") as fh:
        fh.write(text)
    os.replace(tmp, path)


def config_lines(cfg: dict, keys) -> list[str]:
    return [f"config.{k} = {cfg[k]}" for k in keys if cfg.get(k) is not None]


# -- commands ----------------------------------------------------------------

def cmd_params(cfg) -> int:
    p = ring_from(cfg)
    text = format_params(p)
    path = os.path.join(cfg["out"], f"{p.label}_params.txt")
    atomic_write(path, text)
    print(text, end="")
    print(f"# written {path}")
    return EXIT_OK


def cmd_mcm(cfg, consts) -> int:
    if consts:
        if any(c < 1 for c in consts):
            raise InputError("constants must be positive")
        width = max(c.bit_length() for c in consts)
        g = mcm_decompose(consts, width)
        verify_graph(g, samples=10 ** 4)
        name = "_".join(str(c) for c in sorted(set(consts)))
        path = os.path.join(cfg["out"], f"mcm_{name}.txt")
        atomic_write(path, format_graph(g))
        print(format_graph(g), end="")
        print(f"cost = {g.cost}")
        print(f"csd_cost = {csd_total(consts)}")
        print(f"optimal = {'yes' if g.optimal else 'unknown'}")
        print(f"# written {path}")
        return EXIT_OK
    from .rtl.build import plan_butterflies
    p = ring_from(cfg)
    plans = plan_butterflies(p)
    pairs = {}
    for pl in plans.values():
        pairs.setdefault((pl.twiddle, pl.twiddle_inv), pl)
    opt = sum(pl.costs["mult1"] for pl in plans.values())
    csd = sum(pl.csd_costs["mult1"] for pl in plans.values())
    lines = [f"tool = nttforge {__version__}", f"scheme = {p.label}", f"positions = {len(plans)}",
             f"distinct_pairs = {len(pairs)}", f"csd_adders = {csd}", f"opt_adders = {opt}",
             f"distinct_csd_adders = {sum(pl.csd_costs['mult1'] for pl in pairs.values())}",
             f"distinct_opt_adders = {sum(pl.costs['mult1'] for pl in pairs.values())}",
             f"barrett_R = {p.R} cost {next(iter(plans.values())).costs['mult2']}",
             f"barrett_Q = {p.Q} cost {next(iter(plans.values())).costs['mult3']}"]
    gdir = os.path.join(cfg["out"], f"{p.label}_mcm")
    for (w, wi), pl in sorted(pairs.items()):
        lines.append(f"pair {w} {wi} opt {pl.costs['mult1']} csd {pl.csd_costs['mult1']}")
        atomic_write(os.path.join(gdir, f"pair_{w}_{wi}.txt"), format_graph(pl.mult1))
    text = "\n".join(lines) + "\n"
    path = os.path.join(cfg["out"], f"{p.label}_mcm.txt")
    atomic_write(path, text)
    print("\n".join(lines[:10]))
    print(f"# written {path} and {len(pairs)} graphs under {gdir}")
    return EXIT_OK


def _design(cfg):
    if cfg.get("ir"):
        try:
            with open(cfg["ir"]) as fh:
                text = fh.read()
        except OSError as exc:
            raise InputError(f"cannot read {cfg['ir']}: {exc.strerror}") from None
        try:
            ir = parse_verilog(text)
        except (IRError, ParamError) as exc:
            raise InputError(f"{cfg['ir']}: {exc}") from None
        return ir.params, ir
    p = ring_from(cfg)
    return p, generate_design(p, policy_from(cfg))


def cmd_generate(cfg) -> int:
    p = ring_from(cfg)
    ir = generate_design(p, policy_from(cfg))
    text = emit_verilog(ir)
    if scan_text(text)["multiplications"]:
        raise IRError("emitted Verilog contains a multiplication")
    vpath = os.path.join(cfg["out"], file_name(p))
    atomic_write(vpath, text)
    rep = structural_report(ir).text(_header(p, cfg))
    mpath = vpath[:-2] + ".metrics.txt"
    atomic_write(mpath, rep)
    print(rep, end="")
    print(f"# written {vpath} and {mpath}")
    return EXIT_OK


def _header(p, cfg) -> dict:
    h = {"scheme": p.label, "Q": p.Q, "N": p.N, "variant": p.variant}
    pol = policy_from(cfg)
    h.update(max_adder_depth=pol.max_adder_depth or 0, register_inputs=int(pol.register_inputs),
             register_outputs=int(pol.register_outputs))
    return h


def cmd_verify(cfg, dump_vectors: bool) -> int:
    p, ir = _design(cfg)
    rep = check_equivalence(ir, p, cfg["trials"], cfg["seed"])
    ii = measure_ii(ir, seed=cfg["seed"]) if rep.passed else None
    rep.extra["ii_back_to_back"] = ii
    rep.extra["source"] = os.path.basename(cfg["ir"]) if cfg.get("ir") else "generated"
    ok = rep.passed and ii == 1
    text = rep.text()
    if rep.passed and not ok:
        text = text.replace("result = PASS", "result = FAIL")
    stem = os.path.join(cfg["out"], f"{p.label}_ntt{p.N}")
    atomic_write(stem + ".verify.txt", text)
    if dump_vectors:
        vecs = corner_vectors(p)
        write_vectors(stem + ".fwd_in.hex", vecs, [f"{p.label} forward stimulus"])
        write_vectors(stem + ".fwd_out.hex", [golden(v, 0, p) for v in vecs], [f"{p.label} forward expected"])
    print(text, end="")
    return EXIT_OK if ok else EXIT_MISMATCH


def cmd_report(cfg) -> int:
    p, ir = _design(cfg)
    print(structural_report(ir).text(_header(p, cfg) if not cfg.get("ir") else {"scheme": p.label}), end="")
    return EXIT_OK


# -- argument parsing ----------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="nttforge", description="Multiplier-free NTT datapath generator")
    ap.add_argument("--version", action="version", version=f"nttforge {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(sp, design=True):
        sp.add_argument("--config", help="flat key = value file; flags win")
        sp.add_argument("--scheme", choices=sorted(PRESETS))
        sp.add_argument("--q", type=int, help="modulus Q")
        sp.add_argument("--n", type=int, help="ring length N")
        sp.add_argument("--variant", choices=[FULL, INCOMPLETE])
        sp.add_argument("--out", help=f"output directory (default ${OUT_ENV} or .)")
        if design:
            sp.add_argument("--max-adder-depth", type=int, dest="max_adder_depth",
                            help="adders between registers, 0 = unbounded (default 2)")
            sp.add_argument("--no-register-inputs", action="store_const", const=0, dest="register_inputs")
            sp.add_argument("--no-register-outputs", action="store_const", const=0, dest="register_outputs")

    common(sub.add_parser("params", help="derive and print ring constants"), design=False)
    sp = sub.add_parser("mcm", help="shift-add graphs for constants or a scheme's twiddles")
    common(sp, design=False)
    sp.add_argument("--const", type=int, action="append", dest="consts", metavar="C")
    common(sub.add_parser("generate", help="emit Verilog and metrics"))
    sp = sub.add_parser("verify", help="simulate against the golden model")
    common(sp)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--trials", type=int)
    sp.add_argument("--ir", help="verify an emitted Verilog file instead of a fresh design")
    sp.add_argument("--vectors", action="store_true", help="also write hex vector files")
    sp = sub.add_parser("report", help="print structural metrics")
    common(sp)
    sp.add_argument("--ir", help="report on an emitted Verilog file")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve(args)
        if cfg.get("trials") is not None and cfg["trials"] < 1:
            raise InputError("--trials must be at least 1")
        if args.command == "params":
            return cmd_params(cfg)
        if args.command == "mcm":
            return cmd_mcm(cfg, args.consts)
        if args.command == "generate":
            return cmd_generate(cfg)
        if args.command == "verify":
            return cmd_verify(cfg, args.vectors)
        return cmd_report(cfg)
    except (InputError, ParamError, PlanError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (IRError, SimError, AssertionError) as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
