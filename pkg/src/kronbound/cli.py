"""Command-line entry point.

Every subcommand prints a report of ``key: value`` lines (or JSON with
``--json``).  Exit status: 0 on success, 1 when a reproduction or
verification fails, 2 on usage errors.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import bounds as bd
from . import catalog as cat
from . import decomp as dc
from .errors import KronboundError, ReproductionMismatch
from .fileio import load_text, read_matrix, read_tensor, write_matrix, write_tensor
from .koszul import border_rank_lower_bound, power_border_rank_lower_bound
from .tensor import LinearMap, Tensor


@dataclass
class RunReport:
    command: str
    inputs: dict = field(default_factory=dict)
    results: dict = field(default_factory=dict)
    citations: list = field(default_factory=list)
    seeds: list = field(default_factory=list)
    status: str = "ok"
    wall_time: float = 0.0

    def body_lines(self) -> list:
        lines = [f"command: {self.command}"]
        lines += [f"input.{k}: {v}" for k, v in self.inputs.items()]
        lines += [f"result.{k}: {v}" for k, v in self.results.items()]
        lines += [f"citation: {c}" for c in self.citations]
        if self.seeds:
            lines.append("seeds: " + ",".join(str(s) for s in self.seeds))
        lines.append(f"status: {self.status}")
        return lines

    def text(self) -> str:
        return "\n".join(self.body_lines() + [f"wall_time: {self.wall_time:.3f}"]) + "\n"

    def to_json(self) -> str:
        data = {
            "command": self.command,
            "inputs": {k: _jsonable(v) for k, v in self.inputs.items()},
            "results": {k: _jsonable(v) for k, v in self.results.items()},
            "citations": self.citations,
            "seeds": self.seeds,
            "status": self.status,
            "wall_time": round(self.wall_time, 3),
        }
        return json.dumps(data, indent=2, sort_keys=False) + "\n"


def _jsonable(v):
    if isinstance(v, (bool, int, float, str)) or v is None:
        return v
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, np.integer):
        return int(v)
    return str(v)


# ---------------------------------------------------------------------------
# argument helpers


def _tensor_from_args(args) -> Tensor:
    name = args.tensor
    if Path(name).is_file():
        return read_tensor(load_text(name))
    params = {}
    if name in ("cw", "CW", "skewcw"):
        params["q"] = _need(args, "q", name)
    elif name == "matmult":
        params["n"] = _need(args, "n", name)
    elif name == "CGJ":
        params["m"] = _need(args, "m", name)
    elif name == "tight":
        params["index"] = _need(args, "index", name)
        if getattr(args, "mu", None) is not None:
            params["mu"] = _int_or_fraction(args.mu)
    return cat.build(name, **params)


def _need(args, flag, tensor):
    v = getattr(args, flag, None)
    if v is None:
        raise UsageError(f"{tensor} needs --{flag}")
    return v


def _int_or_fraction(text):
    from fractions import Fraction

    f = Fraction(text)
    return int(f) if f.denominator == 1 else f


class UsageError(Exception):
    pass


def _method(args) -> str:
    if getattr(args, "exact", False):
        return "exact"
    if getattr(args, "modular", False):
        return "modular"
    return "auto"


def _add_tensor_args(p, required=True):
    p.add_argument("--tensor", required=required, help="tensor file or catalog name")
    p.add_argument("--q", type=int)
    p.add_argument("--n", type=int)
    p.add_argument("--m", type=int)
    p.add_argument("--index", type=int)
    p.add_argument("--mu")


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol", type=float)
    g = p.add_mutually_exclusive_group()
    g.add_argument("--exact", action="store_true", help="exact rank only")
    g.add_argument("--modular", action="store_true", help="modular rank (certified lower bound)")
    p.add_argument("--json", action="store_true", help="print the report as JSON")
    p.add_argument("--out", help="directory for reports and emitted files")
    return p


# ---------------------------------------------------------------------------
# subcommands


def cmd_catalog(args, rep: RunReport):
    if args.action == "list":
        rep.results["tensors"] = ", ".join(cat.TENSOR_NAMES)
        rep.results["projections"] = ", ".join(cat.PROJECTION_NAMES)
        return
    if args.name is None:
        raise UsageError("catalog emit needs a tensor name")
    args.tensor = args.name
    T = _tensor_from_args(args)
    text = write_tensor(T)
    rep.inputs["name"] = args.name
    rep.results["dims"] = "x".join(map(str, T.dims))
    rep.results["nonzeros"] = T.nnz()
    return text


def _restriction(args, T: Tensor):
    """(LinearMap or None, Kronecker power it acts on)."""
    name = args.restriction
    if name is None:
        return None, 1
    if Path(name).is_file():
        P = read_matrix(load_text(name))
        cols = P.shape[1]
        N = round(np.log(cols) / np.log(T.dims[0]))
        if T.dims[0] ** N != cols:
            raise UsageError(f"restriction has {cols} columns, not a power of dim A = {T.dims[0]}")
        return LinearMap(P, label=name), N
    q = args.q if args.q is not None else T.dims[0] - 1
    power = {"phi2": 2, "phi3": 3}.get(name, args.power)
    return cat.build_projection(name, q, seed=args.seed, variant=args.variant, power=power), power


def cmd_lowerbound(args, rep: RunReport):
    T = _tensor_from_args(args)
    P, N = _restriction(args, T)
    rep.inputs.update(tensor=args.tensor, p=args.p, restriction=args.restriction or "none")
    if args.q is not None:
        rep.inputs["q"] = args.q
    if args.restriction == "generic5":
        rep.seeds.append(args.seed)
    method = _method(args)
    if N == 1:
        cert = border_rank_lower_bound(T, args.p, P, method)
    else:
        cert = power_border_rank_lower_bound(T, N, args.p, P, method)
        rep.inputs["power"] = N
    rep.results.update(cert.report())
    rep.citations.append("koszul-flattening-bound")


def cmd_schur_rank(args, rep: RunReport):
    from math import comb

    from .schur import block_rank_table, family_inputs, isotypic_block

    inp = family_inputs(args.family, args.q)
    rep.inputs.update(family=args.family, q=args.q)
    table = block_rank_table(inp, _method(args))
    for label, dims, rank, irr, method in table.entries:
        rep.results[f"block.{','.join(label)}"] = f"dims {dims[0]}x{dims[1]} rank {rank} irrep_dim {irr} method {method}"
    total = table.total_rank
    div = comb(2 * inp.p, inp.p)
    rep.results["total_rank"] = total
    rep.results["divisor"] = div
    rep.results["bound"] = -(-total // div)
    rep.citations.append("schur-reduction")
    if args.emit_blocks:
        out = Path(args.emit_blocks)
        out.mkdir(parents=True, exist_ok=True)
        done = set()
        for label, *_ in table.entries:
            key = tuple(sorted(label))
            if key in done:
                continue
            done.add(key)
            M = isotypic_block(inp, label)
            (out / f"block_{'_'.join(label)}.txt").write_text(write_matrix(M), encoding="utf-8")
        rep.results["emitted_blocks"] = len(done)


def cmd_box(args, rep: RunReport):
    from . import boxparam as bx

    if args.file:
        B = bx.read_boxtensor(load_text(args.file))
        rep.inputs["file"] = args.file
    else:
        B = {
            "cw": bx.box_cw,
            "skewcw": bx.box_skewcw,
            "square-flattening": lambda: bx.box_square_flattening(args.variant),
        }[args.family]()
        rep.inputs["family"] = args.family
    rep.inputs["q"] = args.q
    T = bx.box_instantiate(B, args.q)
    if not isinstance(T, Tensor):
        rep.results["value"] = T
        return None
    rep.results["dims"] = "x".join(map(str, T.dims))
    rep.results["nonzeros"] = T.nnz()
    return write_tensor(T)


def cmd_symmetry(args, rep: RunReport):
    from .symmetry import lie_algebra_dim, superadditivity_check

    T = _tensor_from_args(args)
    rep.inputs["tensor"] = args.tensor
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        res = lie_algebra_dim(T)
    rep.results.update(ambient_dim=res.ambient_dim, annihilator_dim=res.solution_dim, g_dim=res.g_dim, concise=res.concise)
    if caught:
        rep.results["warning"] = str(caught[0].message)
    if args.square:
        g1, g2, strict = superadditivity_check(T)
        rep.results.update(g_dim_square=g2, strictly_superadditive=strict)
    rep.citations.append("symmetry-lie-algebra")


def cmd_tight_check(args, rep: RunReport):
    from .symmetry import tightness_check

    T = _tensor_from_args(args)
    rep.inputs["tensor"] = args.tensor
    rep.seeds.append(args.seed)
    w = tightness_check(T, seed=args.seed)
    rep.results["tight"] = w.satisfied
    if w.satisfied:
        rep.results["weights_a"] = " ".join(map(str, w.a))
        rep.results["weights_b"] = " ".join(map(str, w.b))
        rep.results["weights_c"] = " ".join(map(str, w.c))
    else:
        axis, i, j = w.blocking_pair
        rep.results["blocking_pair"] = f"axis {'ABC'[axis]} indices {i},{j}"


BUILTIN_DECOMPS = ("published-waring18", "published-curve17", "monomial-waring")


def _decomposition_from_args(name):
    if name == "published-waring18":
        return dc.published_waring18()
    if name == "published-curve17":
        return dc.curve17()
    if name == "monomial-waring":
        return dc.monomial_waring()
    return dc.read_decomposition(load_text(name))


def cmd_verify_decomp(args, rep: RunReport):
    T = _tensor_from_args(args)
    D = _decomposition_from_args(args.decomp)
    rep.inputs.update(tensor=args.tensor, decomp=args.decomp)
    if isinstance(D, dc.WaringDecomposition):
        if D.domain == "RR":
            W = dc.Decomposition(tuple((w, w, w) for w in D.terms), "RR")
            ok, res = dc.verify_decomposition(T, W, args.tol or 1e-6)
            rep.results["residual"] = f"{res:.3e}"
        else:
            ok = dc.verify_waring(T, D)
            rep.results["exact"] = True
        rep.results["rank"] = D.rank
    elif isinstance(D, dc.CurveDecomposition):
        r = dc.curve_residuals(D, T)
        tol = args.tol or 1e-6
        for k, v in r.items():
            rep.results[f"residual_{k}"] = f"{v:.3e}"
        ok = all(v < tol for v in r.values())
        rep.results["rank"] = D.rank
    else:
        out = dc.verify_decomposition(T, D, args.tol)
        if isinstance(out, tuple):
            ok, res = out
            rep.results["residual"] = f"{res:.3e}"
        else:
            ok = out
        rep.results["rank"] = D.rank
    rep.results["verified"] = ok
    rep.status = "PASS" if ok else "FAIL"


def cmd_search_decomp(args, rep: RunReport):
    T = _tensor_from_args(args)
    if T.domain not in ("QQ", "RR"):
        raise UsageError("search works over the reals")
    cfg = dc.SearchConfig(max_iter=args.max_iter, restarts=args.restarts, seed=args.seed, target=args.tol, workers=args.workers)
    rep.inputs.update(tensor=args.tensor, rank=args.rank, restarts=args.restarts, max_iter=args.max_iter)
    rep.seeds.append(args.seed)
    res = dc.gauss_newton_search(T, args.rank, cfg)
    if args.sparsify:
        res, zeroed = dc.sparsify(T, res, cfg)
        rep.results["zeroed_parameters"] = zeroed
    rep.results["residual"] = f"{res.residual:.6e}"
    rep.results["best_restart"] = res.restart
    rep.results["iterations"] = res.iterations
    rep.citations.append("gauss-newton-search")
    return dc.write_decomposition(res.decomposition) if args.emit else None


def cmd_curve_equations(args, rep: RunReport):
    pattern = dc.curve17_pattern() if args.pattern == "published-curve17" else dc.read_decomposition(load_text(args.pattern))
    args.tensor = args.target
    T = _tensor_from_args(args)
    rep.inputs.update(pattern=args.pattern, target=args.target)
    system = dc.generate_curve_equations(pattern, T)
    rep.results.update(unknowns=len(system.unknowns), raw_equations=system.raw_count,
                       distinct_equations=system.distinct_count, linear_rank=system.linear_rank)
    for i, eq in enumerate(system.equations[: args.show]):
        rep.results[f"eq{i + 1}"] = eq.text()


def cmd_omega(args, rep: RunReport):
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        b = bd.omega_bound(args.q, args.k, _int_or_fraction(args.br), args.family)
    rep.inputs.update(q=args.q, k=args.k, br=args.br, family=args.family)
    rep.results["omega_bound"] = b.text()
    rep.results["meaningful"] = b.meaningful
    if caught:
        rep.results["warning"] = str(caught[0].message)
    rep.citations.append(bd.TAG_LASER)


def cmd_power_lower(args, rep: RunReport):
    rep.inputs.update(q=args.q, N=args.N)
    rep.results["border_rank_lower_bound"] = bd.cw_power_lower_bound(args.q, args.N)
    rep.results["previous_bound"] = bd.prior_power_bound(args.q, args.N)
    rep.citations.append(bd.TAG_POWER)


def cmd_bini(args, rep: RunReport):
    rep.inputs.update(n=args.n, br=args.br)
    rep.results["log_n_br"] = bd.report(bd.bini_omega(args.n, _int_or_fraction(args.br)))
    rep.results["note"] = "an upper bound on omega only when br bounds the border rank from above"
    rep.citations.append(bd.TAG_BINI)


def cmd_reproduce(args, rep: RunReport):
    from .reproduce import run

    rep.inputs["target"] = args.target
    if args.q is not None:
        rep.inputs["q"] = args.q
    rep.seeds.append(args.seed)
    r = run(args.target, q=args.q, seed=args.seed, method=_method(args))
    for c in r.checks:
        rep.results[c.name] = f"{'PASS' if c.ok else 'FAIL'} expected={c.expected} got={c.actual}"
    for k, v in r.info.items():
        rep.results[f"info.{k}"] = v
    rep.citations.extend(r.citations)
    rep.status = "PASS" if r.ok else "FAIL"
    if not r.ok:
        raise ReproductionMismatch(f"{args.target} differs from the expected values", r.diff())


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    from .reproduce import TARGETS

    common = _common()
    parser = argparse.ArgumentParser(prog="kronbound", description="Border-rank certificates and related computations.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("catalog", parents=[common], help="list or emit named tensors")
    p.add_argument("action", choices=("list", "emit"))
    p.add_argument("name", nargs="?")
    for flag in ("--q", "--n", "--m", "--index"):
        p.add_argument(flag, type=int)
    p.add_argument("--mu")
    p.set_defaults(func=cmd_catalog)

    p = sub.add_parser("lowerbound", parents=[common], help="Koszul flattening border-rank bound")
    _add_tensor_args(p)
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--restriction", help="matrix file or phi2|phi3|skewbad|generic5")
    p.add_argument("--variant", type=int, default=1, help="phi2 variant (1 or 2)")
    p.add_argument("--power", type=int, default=1, help="Kronecker power for generic5 and skewbad")
    p.set_defaults(func=cmd_lowerbound)

    p = sub.add_parser("schur-rank", parents=[common], help="isotypic block ranks")
    p.add_argument("--family", choices=("cw-square", "cw-cube"), required=True)
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--emit-blocks", metavar="DIR")
    p.set_defaults(func=cmd_schur_rank)

    p = sub.add_parser("box", parents=[common], help="box-parameterized tensors")
    p.add_argument("action", choices=("eval",))
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--file")
    g.add_argument("--family", choices=("cw", "skewcw", "square-flattening"))
    p.add_argument("--variant", type=int, default=1)
    p.add_argument("--q", type=int, required=True)
    p.set_defaults(func=cmd_box)

    p = sub.add_parser("symmetry", parents=[common], help="symmetry Lie algebra dimension")
    _add_tensor_args(p)
    p.add_argument("--square", action="store_true")
    p.set_defaults(func=cmd_symmetry)

    p = sub.add_parser("tight-check", parents=[common], help="tightness test")
    _add_tensor_args(p)
    p.set_defaults(func=cmd_tight_check)

    p = sub.add_parser("verify-decomp", parents=[common], help="verify a decomposition")
    _add_tensor_args(p)
    p.add_argument("--decomp", required=True, help=f"file or one of {', '.join(BUILTIN_DECOMPS)}")
    p.set_defaults(func=cmd_verify_decomp)

    p = sub.add_parser("search-decomp", parents=[common], help="Gauss-Newton decomposition search")
    _add_tensor_args(p)
    p.add_argument("--rank", type=int, required=True)
    p.add_argument("--restarts", type=int, default=10)
    p.add_argument("--max-iter", type=int, default=400)
    p.add_argument("--workers", type=int, default=1, help="threads running restarts")
    p.add_argument("--sparsify", action="store_true")
    p.add_argument("--emit", action="store_true", help="print the decomposition after the report")
    p.set_defaults(func=cmd_search_decomp)

    p = sub.add_parser("curve-equations", parents=[common], help="equations of a border-rank curve")
    p.add_argument("--pattern", required=True, help="pattern file or published-curve17")
    p.add_argument("--target", required=True)
    for flag in ("--q", "--n", "--m", "--index"):
        p.add_argument(flag, type=int)
    p.add_argument("--mu")
    p.add_argument("--show", type=int, default=3)
    p.set_defaults(func=cmd_curve_equations)

    p = sub.add_parser("omega", parents=[common], help="exponent bound from a CW border rank")
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--br", required=True)
    p.add_argument("--family", choices=("cw", "skewcw"), default="cw")
    p.set_defaults(func=cmd_omega)

    p = sub.add_parser("power-lower", parents=[common], help="lower bound for Kronecker powers of T_cw,q")
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--N", type=int, required=True)
    p.set_defaults(func=cmd_power_lower)

    p = sub.add_parser("bini", parents=[common], help="log_n of a matrix multiplication border rank")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--br", required=True)
    p.set_defaults(func=cmd_bini)

    p = sub.add_parser("reproduce", parents=[common], help="run a named reproduction suite")
    p.add_argument("target", choices=TARGETS)
    p.add_argument("--q", type=int)
    p.set_defaults(func=cmd_reproduce)
    return parser


def _emit(rep: RunReport, args, extra: str | None):
    body = rep.to_json() if args.json else rep.text()
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        stem = rep.command.replace(" ", "_")
        (out / f"{stem}.report").write_text(body, encoding="utf-8")
        if extra is not None:
            (out / f"{stem}.out").write_text(extra, encoding="utf-8")
    sys.stdout.write(body)
    if extra is not None and not args.out:
        sys.stdout.write(extra)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    rep = RunReport(args.command)
    t0 = time.perf_counter()
    code = 0
    extra = None
    try:
        extra = args.func(args, rep)
    except ReproductionMismatch as exc:
        rep.status = "FAIL"
        rep.results["mismatch"] = "; ".join(f"{k}: expected {e} got {a}" for k, (e, a) in exc.diff.items())
        code = 1
    except (UsageError, KronboundError, KeyError, ValueError) as exc:
        sys.stderr.write(f"kronbound {args.command}: {exc}\n")
        return 2
    if rep.status == "FAIL":
        code = 1
    rep.wall_time = time.perf_counter() - t0
    _emit(rep, args, extra)
    return code


if __name__ == "__main__":
    sys.exit(main())
