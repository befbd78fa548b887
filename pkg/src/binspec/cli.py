"""Command-line entry point: ``binspec <command> [options]``.

Every command writes its outputs plus ``manifest.json`` (arguments, seed,
package versions, headline results) into ``--out``. Exit codes: 0 success,
2 invalid input, 1 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import os
import sys
from pathlib import Path

import numpy as np
import scipy

from binspec import __version__
from binspec import costmodel, indicator, qeep, rqeep, spectrum, timeseries
from binspec.errors import NumericalError, ValidationError

log = logging.getLogger("binspec")

CACHE_ENV = "BINSPEC_CACHE_DIR"


def _versions() -> dict:
    return {"binspec": __version__, "numpy": np.__version__, "scipy": scipy.__version__}


def _write_manifest(out: Path, command: str, args: argparse.Namespace, outputs, results=None):
    params = {k: v for k, v in vars(args).items() if k not in ("func", "out", "verbose", "command")}
    manifest = {
        "command": command,
        "arguments": params,
        "seed": getattr(args, "seed", None),
        "versions": _versions(),
        "outputs": [str(Path(o).name) for o in outputs],
        "results": results or {},
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def cached_alpha(eta: float) -> tuple[indicator.AlphaEstimate, bool]:
    """Decay-onset constant for the bump indicator, memoized on disk under
    ``$BINSPEC_CACHE_DIR/alpha.json`` when that variable is set."""
    cache_dir = os.environ.get(CACHE_ENV)
    key = repr(float(eta))
    cache_file = Path(cache_dir) / "alpha.json" if cache_dir else None
    table = {}
    if cache_file is not None and cache_file.exists():
        table = json.loads(cache_file.read_text())
        if key in table:
            return indicator.AlphaEstimate(**table[key]), True
    est = indicator.estimate_alpha(eta)
    if cache_file is not None:
        cache_file.parent.mkdir(parents=True, exist_ok=True)
        table[key] = {"alpha": est.alpha, "eta": est.eta, "t_min": est.t_min, "t_max": est.t_max}
        cache_file.write_text(json.dumps(table, indent=2, sort_keys=True) + "\n")
    return est, False


# ---------------------------------------------------------------------------
# commands


def cmd_spectrum(args) -> int:
    out = Path(args.out)
    if args.fh:
        h = spectrum.build_fermi_hubbard(
            args.L, args.u, args.v, spinful=not args.spinless,
            particle_sector=args.sector, ly=args.ly,
        )
        raw = spectrum.diagonalize(h)
    elif args.synthetic:
        raw = spectrum.synthetic_spectrum(args.synthetic, args.dim, args.seed, gap=tuple(args.gap))
    else:
        raise ValidationError("choose --fh or --synthetic")
    s = spectrum.rescale_to_promise(raw, args.bound)
    path = out / "spectrum.json"
    spectrum.save_spectrum(s, path)
    _write_manifest(out, "spectrum", args, [path],
                    {"dimension": s.dimension, "scale_factor": s.scale_factor})
    print(f"wrote {path} (dimension {s.dimension}, scale factor {s.scale_factor:g})")
    return 0


def cmd_qeep(args) -> int:
    out = Path(args.out)
    s = spectrum.load_spectrum(args.spectrum)
    results = {}
    if args.indicator == "somma":
        est, hit = cached_alpha(args.eta)
        ind = indicator.IndicatorFunction.somma(args.eta, est.alpha)
        T_bound = max(indicator.min_time_somma(args.eta, args.epsilon), est.alpha / args.eta)
        results["alpha"] = {"alpha": est.alpha, "t_min": est.t_min, "t_max": est.t_max, "cached": hit}
    else:
        ind = indicator.IndicatorFunction.cos2(args.eta)
        T_bound = indicator.min_time_cos2(args.eta, args.epsilon)
    T = args.T if args.T is not None else math.ceil(T_bound)
    if args.mode == "exact":
        g = timeseries.exact_series(s, T)
    else:
        g = timeseries.sampled_series(s, T, args.epsilon, args.confidence, args.seed)
        results["shots_per_point"] = g.shots_per_point
    q = qeep.estimate_q(g, ind, T, args.epsilon)
    p = qeep.exact_p(s, ind, args.epsilon)
    l1 = q.l1_distance(p)
    results.update(T=T, l1_error=l1, imag_residue=q.imag_residue)
    json_path, csv_path = out / "binned.json", out / "binned.csv"
    q.save(json_path)
    q.save_csv(csv_path)
    _write_manifest(out, "qeep", args, [json_path, csv_path], results)
    print(f"T={T} ||q-p||_1={l1:.6g} (target {args.epsilon:g})")
    return 0


def cmd_rqeep(args) -> int:
    out = Path(args.out)
    s = spectrum.load_spectrum(args.spectrum)
    delta = args.delta if args.delta is not None else args.delta_over_dim * s.dimension
    params = rqeep.RQeepParams(args.xi, delta, args.confidence, s.dimension)
    res = rqeep.run_rqeep(s, params, solver=args.solver, seed=args.seed,
                          indicator_kind=args.indicator, sampled=args.mode == "sampled")
    json_path, csv_path = out / "rqeep.json", out / "rqeep.csv"
    res.save(json_path)
    res.save_csv(csv_path)
    results = {"deviation": res.deviation, "delta": delta, "success": res.success,
               "eta": res.eta, "epsilon": res.epsilon, "envelope_gap": res.envelope_gap}
    _write_manifest(out, "rqeep", args, [json_path, csv_path], results)
    print(f"sum|y-n|={res.deviation:.6g} delta={delta:g} success={res.success}")
    return 0


def tbound_rows(etas, epsilons, n_coeffs=None):
    rows = []
    for eps in epsilons:
        for eta in etas:
            eta, eps = float(eta), float(eps)
            rows.append([
                eta, eps,
                indicator.min_time_somma(eta, eps),
                indicator.min_time_cos2(eta, eps),
                indicator.numeric_time_cos2(eta, eps, n_coeffs),
            ])
    return rows


def cmd_tbound(args) -> int:
    out = Path(args.out)
    etas = np.geomspace(args.eta_min, args.eta_max, args.n_eta)
    rows = tbound_rows(etas, args.epsilon, args.n_coeffs)
    path = out / "tbound.csv"
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(["eta", "epsilon", "T_somma", "T_cos2", "T_numeric"])
        wr.writerows([[repr(v) if isinstance(v, float) else v for v in r] for r in rows])
    _write_manifest(out, "tbound", args, [path], {"rows": len(rows)})
    print(f"wrote {path} ({len(rows)} rows)")
    return 0


def cmd_benchmark(args) -> int:
    out = Path(args.out)
    base = costmodel.CostScenario.load(args.scenario) if args.scenario else costmodel.CostScenario()
    path = out / "sweep.csv"
    rows = costmodel.figure_sweep(
        L_values=args.L, epsilon_values=args.epsilon, q_values=args.q,
        syntheses=args.synthesis, indicators=args.indicator,
        path=path, base=base, parallel=args.parallel,
    )
    _write_manifest(out, "benchmark", args, [path],
                    {"rows": len(rows), "scenario": base.to_dict()})
    print(f"wrote {path} ({len(rows)} rows)")
    return 0


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="binspec", description=__doc__.splitlines()[0])
    parser.add_argument("--out", default=".", help="output directory")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("spectrum", help="build and normalize a spectrum")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--fh", action="store_true", help="Fermi-Hubbard lattice")
    src.add_argument("--synthetic", choices=["gapped", "uniform", "clustered"])
    p.add_argument("--L", type=int, default=2)
    p.add_argument("--ly", type=int, default=None)
    p.add_argument("--u", type=float, default=1.0)
    p.add_argument("--v", type=float, default=1.0)
    p.add_argument("--spinless", action="store_true")
    p.add_argument("--sector", type=int, default=None)
    p.add_argument("--dim", type=int, default=64)
    p.add_argument("--gap", type=float, nargs=2, default=[-0.1, 0.1])
    p.add_argument("--bound", type=float, default=None,
                   help="scale factor (twice an a-priori norm bound)")
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("qeep", help="binned eigenvalue estimate")
    p.add_argument("--spectrum", required=True)
    p.add_argument("--indicator", choices=indicator.KINDS, default="cos2")
    p.add_argument("--eta", type=float, required=True)
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--mode", choices=["exact", "sampled"], default="exact")
    p.add_argument("--confidence", type=float, default=0.9)
    p.add_argument("--T", type=int, default=None, help="override the truncation time")
    p.set_defaults(func=cmd_qeep)

    p = sub.add_parser("rqeep", help="randomized interval counts")
    p.add_argument("--spectrum", required=True)
    p.add_argument("--xi", type=float, required=True)
    dev = p.add_mutually_exclusive_group(required=True)
    dev.add_argument("--delta", type=float)
    dev.add_argument("--delta-over-dim", type=float)
    p.add_argument("--confidence", type=float, default=0.5)
    p.add_argument("--solver", choices=["exact", "estimated"], default="exact")
    p.add_argument("--mode", choices=["exact", "sampled"], default="exact")
    p.add_argument("--indicator", choices=indicator.KINDS, default="cos2")
    p.set_defaults(func=cmd_rqeep)

    p = sub.add_parser("tbound", help="truncation-time bounds versus bin width")
    p.add_argument("--eta-min", type=float, default=1e-3)
    p.add_argument("--eta-max", type=float, default=0.5)
    p.add_argument("--n-eta", type=int, default=50)
    p.add_argument("--epsilon", type=float, nargs="+", default=[0.1, 0.05, 0.01])
    p.add_argument("--n-coeffs", type=int, default=None,
                   help="exactly summed coefficients (default: T_cos2 + 1e6)")
    p.set_defaults(func=cmd_tbound)

    p = sub.add_parser("benchmark", help="achievable bin width sweep")
    p.add_argument("--scenario", default=None, help="scenario JSON overriding defaults")
    p.add_argument("--L", type=int, nargs="+", default=[3, 5, 10])
    p.add_argument("--epsilon", type=float, nargs="+", default=[0.1, 0.05, 0.01])
    p.add_argument("--q", type=float, nargs="+", default=[1e-5, 1e-6, 1e-7, 1e-8, 1e-9])
    p.add_argument("--synthesis", nargs="+", default=["subcircuit", "standard"])
    p.add_argument("--indicator", nargs="+", default=list(indicator.KINDS))
    p.add_argument("--parallel", type=int, default=1)
    p.set_defaults(func=cmd_benchmark)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    Path(args.out).mkdir(parents=True, exist_ok=True)
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (NumericalError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
