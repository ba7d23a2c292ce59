"""Command-line front end.

    charpoly sample     --ensemble gue --quantity k1 --N 4 --n 1 --mu 0.3 --delta 0.3 --samples 100000 --seed 42
    charpoly exact      --ensemble gue --N 4 --n 1 --mu 0.3 --delta 0.3
    charpoly asymptotic --ensemble gue --quantity k2 --N 200 --n 1 --mu 0 --delta 0.005
    charpoly verify identities --seed 7
    charpoly report --from results/*.json --out table.csv

Every numeric result is emitted as one JSON record (or a CSV row). Floats are
written with 17 significant digits, so records re-parse to identical values.
Exit status: 0 on success or a passing suite, 1 on a failed check or a
numerical failure, 2 on a usage error (including inconsistent parameters).
The seed comes from --seed, else the CHARPOLY_SEED environment variable, else 0.
Existing output files are only replaced when --force is given.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from dataclasses import dataclass, field

from . import __version__
from . import asymptotics as A
from . import exact_moments as em
from . import montecarlo as mc
from .core import GeneratingPoint, LogComplex, MomentEstimate, RngSeed, SpectralPoint
from .verification import SUITES, run_suite

ENSEMBLE_QUANTITIES = {
    "gue": ("k1", "k2", "positive", "k2_positive", "generating"),
    "chgue": ("chiral", "chiral_generating", "chiral_limit"),
}
DEFAULT_QUANTITY = {"gue": "k1", "chgue": "chiral"}

# physical parameters each quantity accepts; the first group is required
QUANTITY_PARAMS = {
    "k1": (("N", "n", "mu"), ("omega", "delta")),
    "k2": (("N", "n", "mu"), ("omega", "delta")),
    "positive": (("N", "n", "mu"), ("omega", "delta")),
    "k2_positive": (("N", "n", "mu"), ("omega", "delta")),
    "generating": (("N", "mu"), ("omega", "omega_f", "delta")),
    "chiral": (("N", "n", "m"), ()),
    "chiral_generating": (("N", "m_f", "m_b"), ()),
    "chiral_limit": (("n", "x"), ()),
}
ALL_PARAMS = ("N", "n", "mu", "omega", "omega_f", "delta", "m", "m_f", "m_b", "x")
INT_PARAMS = ("N", "n")

COMMAND_METHOD = {"sample": "mc", "exact": "quadrature", "asymptotic": "asymptotic"}
SUPPORTED = {
    "sample": ("k1", "k2", "positive", "generating", "chiral"),
    "exact": ("k1", "k2", "positive", "k2_positive", "generating", "chiral", "chiral_generating"),
    "asymptotic": ("k1", "k2", "generating", "chiral_limit"),
}
NODE_QUANTITIES = ("k1", "chiral")
REPORT_KEY = ("quantity", "N", "n", "mu", "omega", "delta", "method")


class UsageError(Exception):
    pass


# ---------------------------------------------------------------- JSON with full precision


def _num(x: float) -> str:
    if math.isnan(x):
        return "NaN"
    if math.isinf(x):
        return "Infinity" if x > 0 else "-Infinity"
    s = format(x, ".17g")
    return s if any(c in s for c in ".en") else s + ".0"


def dumps(obj, indent: int = 2, _level: int = 0) -> str:
    """JSON text in which every float carries 17 significant digits."""
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return _num(obj)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {dumps(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        return "[\n" + ",\n".join(pad + dumps(v, indent, _level + 1) for v in obj) + "\n" + end + "]"
    raise TypeError(f"cannot serialise {type(obj).__name__}")


# ---------------------------------------------------------------- requests and records


@dataclass
class RunRequest:
    command: str
    ensemble: str
    quantity: str
    params: dict
    samples: int | None = None
    seed: int | None = None
    estimator: str | None = None
    chunk_size: int | None = None
    nodes: int | None = None
    tolerance: float | None = None
    fmt: str = "json"
    out: str | None = None
    force: bool = False
    options: dict = field(default_factory=dict)

    def validate(self) -> None:
        if self.quantity not in ENSEMBLE_QUANTITIES[self.ensemble]:
            raise UsageError(f"quantity {self.quantity!r} does not belong to ensemble {self.ensemble!r}")
        if self.quantity not in SUPPORTED[self.command]:
            raise UsageError(f"{self.command} does not support quantity {self.quantity!r}; "
                             f"choose from {', '.join(SUPPORTED[self.command])}")
        required, optional = QUANTITY_PARAMS[self.quantity]
        missing = [p for p in required if self.params.get(p) is None]
        if missing:
            raise UsageError(f"{self.quantity} needs --{' --'.join(missing)}")
        extra = [p for p, v in self.params.items() if v is not None and p not in required + optional]
        if extra:
            raise UsageError(f"{self.quantity} does not take --{' --'.join(extra)}")
        if self.nodes is not None and self.quantity not in NODE_QUANTITIES:
            raise UsageError(f"--nodes applies to {', '.join(NODE_QUANTITIES)} only")
        if self.command != "sample" and (self.samples is not None or self.estimator is not None):
            raise UsageError("--samples/--estimator apply to the sample command only")

    def physical(self) -> dict:
        required, optional = QUANTITY_PARAMS[self.quantity]
        out = {}
        for p in required + optional:
            v = self.params.get(p)
            if v is None:
                v = 0.0
            out[p] = int(v) if p in INT_PARAMS else float(v)
        return out

    @classmethod
    def from_record(cls, rec: dict) -> "RunRequest":
        opts = dict(rec.get("options", {}))
        return cls(command=rec["command"], ensemble=rec["ensemble"], quantity=rec["quantity"],
                   params=dict(rec["params"]), samples=opts.get("samples"), seed=rec.get("seed"),
                   estimator=opts.get("estimator"), chunk_size=opts.get("chunk_size"), nodes=opts.get("nodes"),
                   tolerance=opts.get("tolerance"))

    def canonical(self) -> "RunRequest":
        """The request as it is stored in a record: physical params filled in, output fields reset."""
        return RunRequest(self.command, self.ensemble, self.quantity, self.physical(), self.samples,
                          self.seed if self.command == "sample" else None, self.estimator, self.chunk_size,
                          self.nodes, self.tolerance)


def result_record(req: RunRequest, est: MomentEstimate) -> dict:
    v = est.value
    z = v.to_complex() if v.log_mag < 709 else complex(math.nan, math.nan)
    options = {k: getattr(req, k) for k in ("samples", "estimator", "chunk_size", "nodes", "tolerance")
               if getattr(req, k) is not None}
    return {
        "command": req.command,
        "quantity": req.quantity,
        "ensemble": req.ensemble,
        "params": req.physical(),
        "options": options,
        "value": {"log_mag": float(v.log_mag), "phase": float(v.phase), "re": float(z.real), "im": float(z.imag)},
        "std_error": float(est.std_error),
        "method": est.method,
        "n_samples_or_nodes": int(est.n_samples),
        "converged": bool(est.converged),
        "est_rel_error": float(est.est_rel_error),
        "seed": req.seed if req.command == "sample" else None,
        "runtime_ms": float(est.runtime_ms),
        "tool_version": __version__,
    }


def estimate_from_record(rec: dict) -> MomentEstimate:
    v = rec["value"]
    return MomentEstimate(LogComplex(v["log_mag"], v["phase"]), rec["std_error"], rec["n_samples_or_nodes"],
                          rec["method"], rec["runtime_ms"], rec.get("converged", True), rec.get("est_rel_error", 0.0))


def strip_runtime(obj):
    """Drop runtime fields recursively (they are the only non-reproducible output)."""
    if isinstance(obj, dict):
        return {k: strip_runtime(v) for k, v in obj.items() if k != "runtime_ms"}
    if isinstance(obj, list):
        return [strip_runtime(v) for v in obj]
    return obj


# ---------------------------------------------------------------- evaluation


def _spectral(p: dict, positive: bool) -> SpectralPoint:
    if positive:
        return em.spectral_point(p["mu"], p["omega"], p["delta"])
    return SpectralPoint(p["mu"], p["omega"], p["delta"])


def evaluate(req: RunRequest) -> MomentEstimate:
    p = req.physical()
    q = req.quantity
    if req.command == "sample":
        kw = {"n_samples": req.samples or 100_000, "seed": RngSeed(req.seed or 0)}
        if req.estimator:
            kw["estimator"] = req.estimator
        if req.chunk_size:
            kw["chunk_size"] = req.chunk_size
        cfg = mc.McConfig(**kw)
        if q == "k1":
            return mc.mc_k1(p["N"], p["n"], _spectral(p, False), cfg)
        if q == "k2":
            return mc.mc_k2(p["N"], p["n"], _spectral(p, False), cfg)
        if q == "positive":
            return mc.mc_positive_moment(p["N"], p["n"], _spectral(p, True), cfg)
        if q == "generating":
            g = GeneratingPoint.local(p["mu"], p["omega"], p["omega_f"], p["delta"])
            return mc.mc_generating_function(p["N"], g, cfg)
        return mc.mc_chiral_moment(p["N"], p["n"], p["m"], cfg)
    if req.command == "exact":
        rtol = {"rtol": req.tolerance} if req.tolerance else {}
        if q in ("k1", "k2", "positive", "k2_positive"):
            mp = em.MomentParams(p["N"], p["n"], _spectral(p, q in ("positive", "k2_positive")), nodes=req.nodes, **rtol)
            fn = {"k1": em.k1_negative_exact, "k2": em.k2_negative_exact, "positive": em.k1_positive_exact,
                  "k2_positive": em.k2_positive_exact}[q]
            return fn(mp)
        if q == "generating":
            return em.generating_exact(p["N"], GeneratingPoint.local(p["mu"], p["omega"], p["omega_f"], p["delta"]))
        if q == "chiral":
            kw = dict(rtol)
            if req.nodes:
                kw["nodes"] = req.nodes
            return em.chiral_negative_exact(p["N"], p["n"], p["m"], **kw)
        return em.chiral_generating_exact(p["N"], p["m_f"], p["m_b"])
    if q == "k1":
        return A.k1_asymptotic(p["N"], p["n"], _spectral(p, False))
    if q == "k2":
        return A.k2_asymptotic(p["N"], p["n"], _spectral(p, False))
    if q == "chiral_limit":
        return A.chiral_limit_moment(p["n"], p["x"])
    z = A.generating_asymptotic(p["N"], p["mu"], p["omega"], p["omega_f"], p["delta"])
    return MomentEstimate(LogComplex.from_complex(z), 0.0, 0, "asymptotic")


# ---------------------------------------------------------------- output


def _flatten(rec: dict) -> dict:
    row = {"quantity": rec["quantity"], "ensemble": rec["ensemble"]}
    for p in ALL_PARAMS:
        row[p] = rec["params"].get(p)
    row["method"] = rec["method"]
    for k in ("re", "im", "log_mag", "phase"):
        row[k] = rec["value"][k]
    for k in ("std_error", "n_samples_or_nodes", "seed", "runtime_ms", "tool_version"):
        row[k] = rec.get(k)
    return row


def _csv_cell(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return _num(v)
    return v


def to_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    if not rows:
        return ""
    w = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: _csv_cell(v) for k, v in r.items()})
    return buf.getvalue()


def _emit(text: str, out: str | None, force: bool) -> None:
    if out is None:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")
        return
    if os.path.exists(out) and not force:
        raise UsageError(f"{out} exists; pass --force to replace it")
    with open(out, "w", encoding="utf-8") as fh:
        fh.write(text if text.endswith("\n") else text + "\n")


def _load_records(paths: list[str]) -> list[dict]:
    recs = []
    for path in paths:
        with open(path, encoding="utf-8") as fh:
            text = fh.read().strip()
        if not text:
            continue
        try:
            data = json.loads(text)
        except json.JSONDecodeError:
            data = [json.loads(line) for line in text.splitlines() if line.strip()]
        data = data if isinstance(data, list) else [data]
        for d in data:
            if not isinstance(d, dict) or "value" not in d or "quantity" not in d:
                raise UsageError(f"{path}: not a result record")
            recs.append(d)
    return recs


def _report_sort_key(row: dict):
    # None sorts before any value of the same column
    return tuple((row[k] is not None, row[k] if row[k] is not None else 0) for k in REPORT_KEY)


# ---------------------------------------------------------------- argument parsing


def _seed_default() -> int:
    env = os.environ.get("CHARPOLY_SEED")
    if env is None or env == "":
        return 0
    try:
        s = int(env)
    except ValueError:
        raise UsageError(f"CHARPOLY_SEED must be a decimal integer, got {env!r}") from None
    if not 0 <= s < 2 ** 64:
        raise UsageError("CHARPOLY_SEED must be a 64-bit unsigned integer")
    return s


def _u64(text: str) -> int:
    v = int(text)
    if not 0 <= v < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must be a 64-bit unsigned integer")
    return v


def _add_output(sp: argparse.ArgumentParser) -> None:
    sp.add_argument("--format", dest="fmt", choices=("json", "csv"), default="json")
    sp.add_argument("--out", help="output file (default: stdout)")
    sp.add_argument("--force", action="store_true", help="replace an existing output file")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="charpoly",
                                     description="Moments of characteristic polynomials of GUE and chiral GUE matrices.")
    parser.add_argument("--version", action="version", version=f"charpoly {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for cmd, helptext in (("sample", "Monte Carlo estimate"), ("exact", "finite-N quadrature"),
                          ("asymptotic", "large-N saddle-point value")):
        sp = sub.add_parser(cmd, help=helptext)
        sp.add_argument("--ensemble", choices=tuple(ENSEMBLE_QUANTITIES), default="gue")
        sp.add_argument("--quantity", choices=tuple(QUANTITY_PARAMS))
        for p in ALL_PARAMS:
            sp.add_argument(f"--{p.replace('_', '-')}", dest=p, type=int if p in INT_PARAMS else float)
        if cmd == "sample":
            sp.add_argument("--samples", type=int)
            sp.add_argument("--seed", type=_u64)
            sp.add_argument("--estimator", choices=mc.ESTIMATORS)
            sp.add_argument("--chunk-size", type=int)
        if cmd == "exact":
            sp.add_argument("--nodes", type=int, help="nodes per dimension (k1 and chiral)")
            sp.add_argument("--tolerance", type=float, help="relative tolerance of the node-doubling test")
        _add_output(sp)
    vp = sub.add_parser("verify", help="run a verification suite")
    vp.add_argument("suite", choices=SUITES + ("all",))
    vp.add_argument("--seed", type=_u64)
    vp.add_argument("--omit-runtime", action="store_true", help="leave runtime fields out of the report")
    _add_output(vp)
    rp = sub.add_parser("report", help="merge JSON result records into one CSV table")
    rp.add_argument("--from", dest="sources", nargs="+", required=True, metavar="FILE")
    rp.add_argument("--out")
    rp.add_argument("--force", action="store_true")
    return parser


def request_from_args(args: argparse.Namespace) -> RunRequest:
    quantity = args.quantity or DEFAULT_QUANTITY[args.ensemble]
    params = {p: getattr(args, p) for p in ALL_PARAMS if getattr(args, p) is not None}
    seed = None
    if args.command == "sample":
        seed = args.seed if args.seed is not None else _seed_default()
    req = RunRequest(args.command, args.ensemble, quantity, params,
                     samples=getattr(args, "samples", None), seed=seed,
                     estimator=getattr(args, "estimator", None), chunk_size=getattr(args, "chunk_size", None),
                     nodes=getattr(args, "nodes", None), tolerance=getattr(args, "tolerance", None),
                     fmt=args.fmt, out=args.out, force=args.force)
    req.validate()
    return req


def _run_estimate(args) -> int:
    req = request_from_args(args)
    if req.out and os.path.exists(req.out) and not req.force:
        raise UsageError(f"{req.out} exists; pass --force to replace it")
    try:
        est = evaluate(req)
    except (ValueError, TypeError) as exc:
        raise UsageError(str(exc)) from exc
    rec = result_record(req, est)
    text = dumps(rec) if req.fmt == "json" else to_csv([_flatten(rec)])
    _emit(text, req.out, req.force)
    return 0


def _run_verify(args) -> int:
    seed = args.seed if args.seed is not None else _seed_default()
    if args.out and os.path.exists(args.out) and not args.force:
        raise UsageError(f"{args.out} exists; pass --force to replace it")
    report = run_suite(args.suite, seed)
    if args.fmt == "json":
        text = dumps(report.as_dict(with_runtime=not args.omit_runtime))
    else:
        rows = []
        for r in report.as_dict(with_runtime=not args.omit_runtime)["records"]:
            row = {k: (dumps(v, indent=0).replace("\n", "") if isinstance(v, (dict, list)) else v)
                   for k, v in r.items()}
            rows.append(row)
        text = to_csv(rows)
    _emit(text, args.out, args.force)
    for crit, recs in sorted(report.by_criterion().items()):
        ok = all(r.passed for r in recs)
        print(f"criterion {crit}: {'PASS' if ok else 'FAIL'} ({sum(r.passed for r in recs)}/{len(recs)} checks)",
              file=sys.stderr)
    return 0 if report.passed else 1


def _run_report(args) -> int:
    recs = _load_records(args.sources)
    rows = sorted((_flatten(r) for r in recs), key=_report_sort_key)
    key_first = list(REPORT_KEY) + [k for k in (rows[0] if rows else {}) if k not in REPORT_KEY]
    rows = [{k: r[k] for k in key_first} for r in rows]
    _emit(to_csv(rows), args.out, args.force)
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if args.command == "verify":
            return _run_verify(args)
        if args.command == "report":
            return _run_report(args)
        return _run_estimate(args)
    except UsageError as exc:
        print(f"charpoly: error: {exc}", file=sys.stderr)
        return 2
    except ArithmeticError as exc:
        print(f"charpoly: numerical failure: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"charpoly: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
