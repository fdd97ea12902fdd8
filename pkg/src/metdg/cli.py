"""Command-line interface: one executable, one subcommand per analysis.

Exit codes: 0 success, 1 validation error, 2 capacity error, 3 refusal
because an analysis assumption does not hold.  Diagnostics go to stderr;
data goes to stdout or --out.  Every emitted document embeds the SHA-256 of
the canonicalized spec so results stay traceable to their input.
"""

from __future__ import annotations

import argparse
import hashlib
import io
import json
import os
import sys
import time
from fractions import Fraction

from . import __version__, exitchart, peeling, stability
from .ensemble import EnsembleSpec, load_spec
from .errors import AssumptionError, CapacityError, MetdgError, ValidationError
from .infofuncs import cn_info_table, vn_info_table


def _digest(spec: EnsembleSpec) -> str:
    return hashlib.sha256(spec.to_json().encode("utf-8")).hexdigest()


def _frac_str(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


def _report(subcommand: str, digest: str, parameters: dict, results: dict, t0: float) -> dict:
    return {
        "tool": "metdg",
        "version": __version__,
        "subcommand": subcommand,
        "spec_sha256": digest,
        "parameters": parameters,
        "results": results,
        "duration_s": time.perf_counter() - t0,
    }


def _emit(text: str, out_path: str | None) -> None:
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _emit_json(report: dict, out_path: str | None) -> None:
    _emit(json.dumps(report, sort_keys=True, indent=2) + "\n", out_path)


def _csv_header(subcommand: str, digest: str, parameters: dict) -> list[str]:
    params = " ".join(f"{k}={v}" for k, v in sorted(parameters.items()))
    return [
        f"# tool=metdg version={__version__} subcommand={subcommand}",
        f"# spec_sha256={digest}",
        f"# {params}" if params else "#",
    ]


def _cmd_validate(spec: EnsembleSpec, args, digest: str, t0: float) -> int:
    results = {
        "codeword_length": spec.codeword_length,
        "dimension": spec.dimension,
        "rate": {"value": float(spec.rate), "ratio": _frac_str(spec.rate)},
        "edge_counts": list(spec.edge_counts),
        "lambda": {
            vn.name: [float(f) for f in spec.vn_edge_fractions[i]]
            for i, vn in enumerate(spec.vn_types)
        },
        "lambda_exact": {
            vn.name: [_frac_str(f) for f in spec.vn_edge_fractions[i]]
            for i, vn in enumerate(spec.vn_types)
        },
        "rho": {
            cn.name: [float(f) for f in spec.cn_edge_fractions[i]]
            for i, cn in enumerate(spec.cn_types)
        },
        "rho_exact": {
            cn.name: [_frac_str(f) for f in spec.cn_edge_fractions[i]]
            for i, cn in enumerate(spec.cn_types)
        },
        "vn_min_distance": {vn.name: d for vn, d in zip(spec.vn_types, spec.vn_min_distance)},
        "cn_min_distance": {cn.name: d for cn, d in zip(spec.cn_types, spec.cn_min_distance)},
        "flags": {
            "unpunctured": spec.unpunctured,
            "min_distance_at_least_2": spec.min_distance_at_least_2,
            "stability_eligible": spec.stability_eligible,
        },
    }
    _emit_json(_report("validate", digest, {}, results, t0), args.out)
    return 0


def _cmd_inffunc(spec: EnsembleSpec, args, digest: str, t0: float) -> int:
    name = args.type
    for vn in spec.vn_types:
        if vn.name == name:
            table = vn_info_table(vn, spec.n_edge_types)
            axes = [f"edge_type_{l}" for l in range(1, spec.n_edge_types + 1)] + ["info_bits"]
            kind = "vn"
            break
    else:
        for cn in spec.cn_types:
            if cn.name == name:
                table = cn_info_table(cn, spec.n_edge_types)
                axes = [f"edge_type_{l}" for l in range(1, spec.n_edge_types + 1)]
                kind = "cn"
                break
        else:
            raise ValidationError(f"no VN or CN type named {name!r}")
    results = {
        "name": name,
        "kind": kind,
        "axes": axes,
        "shape": list(table.shape),
        "values": [int(v) for v in table.reshape(-1)],
    }
    _emit_json(_report("inffunc", digest, {"type": name}, results, t0), args.out)
    return 0


def _cmd_exit_chart(spec: EnsembleSpec, args, digest: str, t0: float) -> int:
    converged, trajectory = exitchart.run_to_fixed_point(
        spec, args.epsilon, max_iters=args.max_iters, tol=args.tol
    )
    params = {"epsilon": args.epsilon, "max_iters": args.max_iters, "tol": args.tol}
    if args.format == "json":
        results = {
            "converged": converged,
            "trajectory": [[float(v) for v in st.i_ev] for st in trajectory],
        }
        _emit_json(_report("exit-chart", digest, params, results, t0), args.out)
        return 0
    buf = io.StringIO()
    for line in _csv_header("exit-chart", digest, params):
        buf.write(line + "\n")
    cols = ",".join(f"I_EV_{l}" for l in range(1, spec.n_edge_types + 1))
    buf.write(f"iter,{cols}\n")
    for st in trajectory:
        buf.write(",".join([str(st.iteration)] + [repr(float(v)) for v in st.i_ev]) + "\n")
    _emit(buf.getvalue(), args.out)
    return 0


def _cmd_threshold(spec: EnsembleSpec, args, digest: str, t0: float) -> int:
    engine = exitchart.ExitEngine(spec)
    value, probes = engine.threshold(
        tol_eps=args.tol_eps, max_iters=args.max_iters, tol_fp=args.tol_fp
    )
    params = {"tol_eps": args.tol_eps, "max_iters": args.max_iters, "tol_fp": args.tol_fp}
    results = {"threshold": value, "tol": args.tol_eps, "iterations": probes}
    _emit_json(_report("threshold", digest, params, results, t0), args.out)
    return 0


def _cmd_stability(spec: EnsembleSpec, args, digest: str, t0: float) -> int:
    sm = stability.build_matrices(spec)
    results: dict = {
        "c": [[float(v) for v in row] for row in sm.c],
        "c_exact": [[_frac_str(v) for v in row] for row in sm.c],
        "p_coeffs": [[[float(v) for v in cell] for cell in row] for row in sm.p_coeffs],
        "p_coeffs_exact": [[[_frac_str(v) for v in cell] for cell in row] for row in sm.p_coeffs],
        "always_stable_by_disjoint_supports": stability.disjoint_support_check(spec),
    }
    params: dict = {}
    if args.epsilon is not None:
        params["epsilon"] = args.epsilon
        results["epsilon"] = args.epsilon
        results["sigma"] = sm.sigma(args.epsilon)
        results["verdict"] = stability.stability_verdict(spec, args.epsilon)
    if args.bound:
        bound = stability.stability_bound(spec, tol_eps=args.tol_eps)
        params["tol_eps"] = args.tol_eps
        results["bound"] = "unbounded" if bound is None else bound
    _emit_json(_report("stability", digest, params, results, t0), args.out)
    return 0


def _parse_eps_grid(text: str) -> list[float]:
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ValidationError("eps range must look like a:b:step")
        a, b, step = (float(p) for p in parts)
        if step <= 0:
            raise ValidationError("eps step must be positive")
        grid = []
        v = a
        while v <= b + 1e-12:
            grid.append(round(v, 12))
            v += step
        return grid
    return [float(p) for p in text.split(",")]


def _cmd_simulate(spec: EnsembleSpec, args, digest: str, t0: float) -> int:
    grid = _parse_eps_grid(args.eps)
    result = peeling.sweep(
        spec,
        scale=args.scale,
        eps_grid=grid,
        trials=args.trials,
        seed=args.seed,
        jobs=args.jobs,
    )
    params = {
        "scale": args.scale,
        "eps": args.eps,
        "trials": args.trials,
        "seed": args.seed,
        "rng": result.rng_name,
        "stability_prediction": "yes" if result.stability_prediction else "no",
    }
    if args.format == "json":
        _emit_json(_report("simulate", digest, params, {"rows": result.rows}, t0), args.out)
        return 0
    buf = io.StringIO()
    for line in _csv_header("simulate", digest, params):
        buf.write(line + "\n")
    buf.write("eps,ber,bler,ci_lo,ci_hi,trials\n")
    for row in result.rows:
        buf.write(
            ",".join(
                [
                    repr(row["eps"]),
                    repr(row["ber"]),
                    repr(row["bler"]),
                    repr(row["ci_lo"]),
                    repr(row["ci_hi"]),
                    str(row["trials"]),
                ]
            )
            + "\n"
        )
    _emit(buf.getvalue(), args.out)
    return 0


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("spec", help="path to the ensemble spec JSON file")
    common.add_argument("--out", default=None, help="write output to a file instead of stdout")
    common.add_argument("--format", choices=("json", "csv"), default=None)
    common.add_argument("--jobs", type=int, default=os.cpu_count() or 1)

    parser = argparse.ArgumentParser(prog="metdg", description=__doc__)
    parser.add_argument("--version", action="version", version=f"metdg {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("validate", parents=[common])

    p = sub.add_parser("inffunc", parents=[common])
    p.add_argument("--type", required=True, help="VN or CN type name to dump")

    p = sub.add_parser("exit-chart", parents=[common])
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--max-iters", type=int, default=20000)
    p.add_argument("--tol", type=float, default=1e-10)

    p = sub.add_parser("threshold", parents=[common])
    p.add_argument("--tol-eps", type=float, default=1e-6)
    p.add_argument("--max-iters", type=int, default=20000)
    p.add_argument("--tol-fp", type=float, default=1e-10)

    p = sub.add_parser("stability", parents=[common])
    p.add_argument("--epsilon", type=float, default=None)
    p.add_argument("--bound", action="store_true")
    p.add_argument("--tol-eps", type=float, default=1e-6)

    p = sub.add_parser("simulate", parents=[common])
    p.add_argument("--scale", type=int, required=True)
    p.add_argument("--eps", required=True, help="grid as a:b:step or comma-separated values")
    p.add_argument("--trials", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)

    return parser


_DEFAULT_FORMATS = {
    "validate": "json",
    "inffunc": "json",
    "exit-chart": "csv",
    "threshold": "json",
    "stability": "json",
    "simulate": "csv",
}

_HANDLERS = {
    "validate": _cmd_validate,
    "inffunc": _cmd_inffunc,
    "exit-chart": _cmd_exit_chart,
    "threshold": _cmd_threshold,
    "stability": _cmd_stability,
    "simulate": _cmd_simulate,
}


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    if args.format is None:
        args.format = _DEFAULT_FORMATS[args.command]
    t0 = time.perf_counter()
    try:
        if args.format == "csv" and args.command not in ("exit-chart", "simulate"):
            raise ValidationError(f"{args.command} has no CSV output")
        spec = load_spec(args.spec)
        digest = _digest(spec)
        return _HANDLERS[args.command](spec, args, digest, t0)
    except ValidationError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except CapacityError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except AssumptionError as e:
        print(f"refused: {e}", file=sys.stderr)
        return 3
    except FileNotFoundError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except MetdgError as e:
        print(f"internal error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
