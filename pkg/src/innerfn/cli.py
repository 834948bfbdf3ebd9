"""innerfn command-line front end.

Exit codes: 0 pass, 2 suite disagreement, 3 inconclusive, 1 usage or IO error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile

import numpy as np

from . import norms, verify, zeros
from .config import (
    SUITE_PARAMS,
    ConfigError,
    ExperimentConfig,
    function_from_config,
    load_config,
    parse_complex,
    parse_weight,
    run_config,
    validate_config,
)
from .inner import AtomicSingular, CertificationError, frostman_shift
from .weights import NonIntegrableWeightError, classify_weight, power_weight

EXIT_OK, EXIT_USAGE, EXIT_FAIL, EXIT_INCONCLUSIVE = 0, 1, 2, 3
STATUS_EXIT = {"pass": EXIT_OK, "fail": EXIT_FAIL, "inconclusive": EXIT_INCONCLUSIVE}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(EXIT_USAGE)


def write_atomic(path: str, text: str) -> None:
    """Write via a temporary file in the target directory, then rename."""
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".innerfn-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _dump(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def _emit(args, obj) -> None:
    text = _dump(obj)
    if getattr(args, "out", None):
        write_atomic(args.out, text)
    else:
        sys.stdout.write(text)


def _theta(args):
    spec = args.function
    if spec.lstrip().startswith("{"):
        spec = json.loads(spec)
    return function_from_config(spec, "--function")


# -- subcommands -----------------------------------------------------------------

def cmd_eval(args) -> int:
    theta = _theta(args)
    if args.a is not None:
        theta = frostman_shift(theta, parse_complex(args.a, "--a"))
    rows = []
    for s in args.z:
        z = parse_complex(s, "--z")
        res = theta.eval_derivative(z, args.tol) if args.derivative else theta.eval(z, args.tol)
        rows.append({"z": [z.real, z.imag], "value": [res.value.real, res.value.imag],
                     "error_bound": float(res.error_bound), "terms_used": int(res.terms_used)})
    _emit(args, {"schema_version": verify.SCHEMA_VERSION, "function": theta.to_config(),
                 "derivative": bool(args.derivative), "results": rows})
    return EXIT_OK


def _zeros_csv(zl) -> str:
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(["re", "im"])
    for z in zl.zeros:
        wr.writerow([repr(float(z.real)), repr(float(z.imag))])
    return buf.getvalue()


def cmd_zeros(args) -> int:
    a = parse_complex(args.a, "--a")
    if args.source == "atomic-frostman":
        zl = zeros.atomic_frostman_zeros(a, args.n)
    else:
        if not args.function:
            raise UsageError("numeric zero finding needs --function")
        zl = zeros.find_zeros_numeric(_theta(args), a, args.r_max, args.tol)
    if args.out and args.out.endswith(".json"):
        write_atomic(args.out, zeros.zeros_to_json(zl) + "\n")
    elif args.out:
        write_atomic(args.out, _zeros_csv(zl))
    else:
        sys.stdout.write(_zeros_csv(zl))
    if args.profile is not None:
        prof = zeros.dyadic_counts(zl, args.profile, a)
        sys.stderr.write(prof.to_json() + "\n")
    return EXIT_OK


def cmd_norm(args) -> int:
    theta = _theta(args)
    omega = parse_weight(args.weight, "--weight")
    f = norms.DerivativeOf(theta, args.order)
    q = args.q if args.q is not None else args.p
    if args.kind == "mixed":
        tv = norms.mixed_norm_truncated(f, norms.MixedNormParams(args.p, q, omega), args.m, args.kernel)
    elif args.kind == "hardy":
        tv = norms.hardy_means(f, args.p, args.m)
    elif args.kind == "besov":
        tv = norms.besov_norm_truncated(theta, args.p, q, args.alpha, args.m)
    else:
        tv = norms.level_set_integral(theta, args.C, args.p, None if args.unweighted else omega, args.m)
    out = {"schema_version": verify.SCHEMA_VERSION, "kind": args.kind, "function": theta.to_config(),
           "p": args.p, "q": q, "weight": omega.to_config(), "truncated": tv.to_dict(),
           "verdict": verify.classify(tv).to_dict()}
    _emit(args, out)
    if args.csv:
        write_atomic(args.csv, tv.to_csv())
    return EXIT_OK


def cmd_dyadic_sum(args) -> int:
    theta = _theta(args)
    omega = parse_weight(args.weight, "--weight")
    q = args.q if args.q is not None else args.p
    params = norms.MixedNormParams(args.p, q, omega)
    a = parse_complex(args.a, "--a")
    if args.kind == "disc":
        tv = norms.dyadic_sum_theorem1b(theta, params, args.delta, args.max_n, args.nodes)
    else:
        zl = zeros.frostman_zeros(theta, a, 1.0 - 2.0 ** -(args.max_n + 1))
        if args.kind == "single":
            tv = norms.single_point_sum(zeros.dyadic_counts(zl, args.max_n, a), params)
        else:
            tv = norms.zero_sum_theorem3(zl, args.p, omega, depth=args.max_n + 1)
    _emit(args, {"schema_version": verify.SCHEMA_VERSION, "kind": args.kind,
                 "function": theta.to_config(), "truncated": tv.to_dict(),
                 "verdict": verify.classify(tv).to_dict()})
    if args.csv:
        write_atomic(args.csv, tv.to_csv())
    return EXIT_OK


def cmd_weight_check(args) -> int:
    omega = parse_weight(args.weight, "--weight")
    rep = classify_weight(omega, tuple(args.p_list or ()), args.depth, args.K)
    _emit(args, {"schema_version": verify.SCHEMA_VERSION, "weight": omega.to_config(),
                 "report": rep.to_dict()})
    return EXIT_OK


def _report_and_exit(args, cfg: ExperimentConfig, result) -> int:
    report = {"config": cfg.to_dict(), "result": result.to_dict(),
              "schema_version": verify.SCHEMA_VERSION}
    out = cfg.outputs.get("json") or getattr(args, "out", None)
    if out:
        write_atomic(out, _dump(report))
    csv_path = cfg.outputs.get("csv") or getattr(args, "csv", None)
    if csv_path:
        write_atomic(csv_path, _blocks_csv(result))
    _summary(result)
    return STATUS_EXIT[result.status]


def _blocks_csv(result) -> str:
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(["series", "k", "block"])
    for name, tv in sorted(result.extra.items()):
        if isinstance(tv, dict) and "blocks" in tv:
            for k, b in enumerate(tv["blocks"]):
                wr.writerow([name, k, repr(float(b))])
    return buf.getvalue()


def _summary(result) -> None:
    print(f"suite {result.suite}  status {result.status}  hypotheses "
          f"{result.hypotheses.get('status', 'n/a')}")
    print(f"  {'condition':<22} {'verdict':<13} {'slope':>8}")
    for name, v in sorted(result.verdicts.items()):
        slope = "" if math.isnan(v.fitted_slope) else f"{v.fitted_slope:8.3f}"
        print(f"  {name:<22} {v.verdict:<13} {slope:>8}")
    if result.ratio is not None:
        r = result.ratio
        print(f"  ratio in [{r.ratio_min:.4g}, {r.ratio_max:.4g}]  drift {r.drift:.3f}  "
              f"window_ok {r.window_ok}")


def cmd_verify(args) -> int:
    params = {}
    for key in ("p", "q", "x", "C", "delta", "m"):
        v = getattr(args, key, None)
        if v is not None:
            params[key] = v
    if args.a is not None:
        a = parse_complex(args.a, "--a")
        params["a"] = [a.real, a.imag]
    weight = args.weight
    if args.alpha is not None:
        if args.suite == "besov":
            params["alpha"] = args.alpha
        else:
            weight = f"power:{args.alpha}"
    function = args.function
    if function.lstrip().startswith("{"):
        function = json.loads(function)
    raw = {"suite": args.suite, "function": function, "parameters": params, "seed": args.seed}
    if weight is not None:
        raw["weight"] = weight
    if args.config:
        with open(args.config) as fh:
            base = json.load(fh)
        base.setdefault("parameters", {}).update(params)
        base["suite"] = args.suite
        raw = base
    cfg = validate_config(raw)
    return _report_and_exit(args, cfg, run_config(cfg))


def cmd_run(args) -> int:
    cfg = load_config(args.config)
    return _report_and_exit(args, cfg, run_config(cfg))


def reproduce_example7(m: int = 16, n_zeros: int = 50000) -> dict:
    """Threshold table for exp((z+1)/(z-1)) at a = 1/e."""
    S = AtomicSingular()
    a = math.exp(-1)
    zl = zeros.atomic_frostman_zeros(a, 200)
    idx = zl.index
    resid = float(np.max(np.abs(S.value(zl.zeros) - a)))
    sel = np.abs(idx) >= 10
    law = zl.gaps[sel] * idx[sel].astype(float) ** 2
    rows = []
    big = zeros.atomic_frostman_zeros(a, n_zeros)
    for al in (0.25, 0.5, 0.75):
        v = verify.classify(norms.zero_power_sum(big, al))
        rows.append({"test": "sum (1-|z_n|)^alpha", "parameter": al,
                     "expected": "convergent" if al > 0.5 else "divergent", "verdict": v.verdict,
                     "slope": v.fitted_slope})
    fp = norms.DerivativeOf(S)
    for p in (0.75, 1.0, 1.5, 2.0):
        for al in (-0.75, -0.5, 0.0, 0.5, 1.0):
            if abs(al - (p - 1.5)) < 0.25:
                continue
            tv = norms.mixed_norm_truncated(fp, norms.MixedNormParams(p, p, power_weight(al)), m)
            v = verify.classify(tv)
            rows.append({"test": f"S' in A^{p:g}_alpha", "parameter": al,
                         "expected": "convergent" if al > p - 1.5 else "divergent",
                         "verdict": v.verdict, "slope": v.fitted_slope})
    for p in (0.6, 0.75, 0.9):
        v = verify.classify(norms.hardy_means(fp, p, m))
        rows.append({"test": "S' in H^p", "parameter": p, "expected": "divergent",
                     "verdict": v.verdict, "slope": v.fitted_slope})
    return {"schema_version": verify.SCHEMA_VERSION, "a": a,
            "max_residual_S_minus_a": resid,
            "moduli_law_window": [float(law.min()), float(law.max())],
            "table": rows,
            "all_match": all(r["verdict"] == r["expected"] for r in rows)}


def cmd_reproduce(args) -> int:
    if args.target != "example7":
        raise UsageError(f"unknown reproduction target {args.target!r}")
    res = reproduce_example7(args.m)
    print(f"max |S(z_n) - a| = {res['max_residual_S_minus_a']:.3e}")
    lo, hi = res["moduli_law_window"]
    print(f"(1-|z_n|) n^2 over 10 <= |n| <= 200 in [{lo:.5f}, {hi:.5f}]")
    print(f"{'test':<24} {'param':>7} {'expected':<12} {'verdict':<13} {'slope':>7}")
    for r in res["table"]:
        print(f"{r['test']:<24} {r['parameter']:>7g} {r['expected']:<12} {r['verdict']:<13} "
              f"{r['slope']:7.3f}")
    if args.out:
        write_atomic(args.out, _dump(res))
    if res["all_match"]:
        return EXIT_OK
    bad = [r for r in res["table"] if r["verdict"] != r["expected"]]
    return EXIT_INCONCLUSIVE if all(r["verdict"] == "inconclusive" for r in bad) else EXIT_FAIL


# -- parser -------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="innerfn", description="Derivatives of inner functions: norms, zeros and checks.")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    e = sub.add_parser("eval", help="evaluate an inner function (or its Frostman shift)")
    e.add_argument("--function", default="atomic")
    e.add_argument("--z", nargs="+", required=True)
    e.add_argument("--a", default=None)
    e.add_argument("--derivative", action="store_true")
    e.add_argument("--tol", type=float, default=1e-10)
    e.add_argument("--out")
    e.set_defaults(fn=cmd_eval)

    z = sub.add_parser("zeros", help="zeros of a Frostman shift")
    z.add_argument("source", choices=["atomic-frostman", "numeric"])
    z.add_argument("--a", required=True)
    z.add_argument("--n", type=int, default=100, help="exact zeros with |n| <= N")
    z.add_argument("--function", default=None)
    z.add_argument("--r-max", dest="r_max", type=float, default=1 - 2.0**-10)
    z.add_argument("--tol", type=float, default=1e-13)
    z.add_argument("--profile", type=int, default=None, help="print dyadic counts up to this n")
    z.add_argument("--out")
    z.set_defaults(fn=cmd_zeros)

    n = sub.add_parser("norm", help="truncated norm blocks and verdict")
    n.add_argument("--function", default="atomic")
    n.add_argument("--kind", choices=["mixed", "hardy", "besov", "level-set"], default="mixed")
    n.add_argument("--order", type=int, default=1, help="derivative order for mixed/hardy")
    n.add_argument("--p", type=float, required=True)
    n.add_argument("--q", type=float, default=None)
    n.add_argument("--alpha", type=float, default=0.2, help="Besov smoothness")
    n.add_argument("--C", type=float, default=0.5)
    n.add_argument("--unweighted", action="store_true", help="level set with omega_hat = 1")
    n.add_argument("--weight", default="power:0")
    n.add_argument("--kernel", choices=["weight", "tail"], default="weight")
    n.add_argument("--m", type=int, default=16)
    n.add_argument("--out")
    n.add_argument("--csv")
    n.set_defaults(fn=cmd_norm)

    d = sub.add_parser("dyadic-sum", help="dyadic zero-count sums")
    d.add_argument("--function", default="atomic")
    d.add_argument("--kind", choices=["disc", "single", "zero"], default="single")
    d.add_argument("--p", type=float, required=True)
    d.add_argument("--q", type=float, default=None)
    d.add_argument("--weight", default="power:0")
    d.add_argument("--a", default=str(math.exp(-1)))
    d.add_argument("--delta", type=float, default=0.5)
    d.add_argument("--nodes", type=int, default=64)
    d.add_argument("--max-n", dest="max_n", type=int, default=20)
    d.add_argument("--out")
    d.add_argument("--csv")
    d.set_defaults(fn=cmd_dyadic_sum)

    w = sub.add_parser("weight-check", help="doubling classes and exponents of a weight")
    w.add_argument("--weight", required=True)
    w.add_argument("--p-list", dest="p_list", type=float, nargs="*")
    w.add_argument("--depth", type=int, default=16)
    w.add_argument("--K", type=float, default=2.0)
    w.add_argument("--out")
    w.set_defaults(fn=cmd_weight_check)

    v = sub.add_parser("verify", help="run an equivalence suite")
    v.add_argument("suite", choices=sorted(SUITE_PARAMS))
    v.add_argument("--function", default="atomic")
    v.add_argument("--weight", default=None)
    v.add_argument("--config", default=None, help="JSON config; flags override its parameters")
    for key in ("p", "q", "x", "C", "delta"):
        v.add_argument(f"--{key}", type=float, default=None)
    v.add_argument("--alpha", type=float, default=None,
                   help="weight exponent (1-r)^alpha, or Besov smoothness for the besov suite")
    v.add_argument("--a", default=None)
    v.add_argument("--m", type=int, default=None)
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--out")
    v.add_argument("--csv")
    v.set_defaults(fn=cmd_verify)

    r = sub.add_parser("reproduce", help="end-to-end reproductions")
    r.add_argument("target", choices=["example7"])
    r.add_argument("--m", type=int, default=16)
    r.add_argument("--out")
    r.set_defaults(fn=cmd_reproduce)

    c = sub.add_parser("run", help="run a JSON experiment config")
    c.add_argument("config")
    c.set_defaults(fn=cmd_run)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as exc:
        sys.stderr.write(f"innerfn: config error at {exc}\n")
        return EXIT_USAGE
    except (UsageError, OSError, json.JSONDecodeError) as exc:
        sys.stderr.write(f"innerfn: {exc}\n")
        return EXIT_USAGE
    except (ValueError, CertificationError, NonIntegrableWeightError) as exc:
        sys.stderr.write(f"innerfn: {exc}\n")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
