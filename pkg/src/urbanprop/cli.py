"""Command-line interface.

Subcommands: eval, losprob, bpl, fit, fit-los, cluster, stats, drop,
catalog. Every run is deterministic given its flags plus a seed; when a
command needs randomness and no seed is supplied, one is generated and
echoed in the metadata (never silently).

Output convention: with --out, the data artifact goes to the file and a
metadata JSON (resolved configuration, seed, output paths) is printed to
stdout; without --out the data goes to stdout and the metadata to stderr.

Exit codes: 0 success, 2 validation/usage error, 3 numeric or
singular-fit error.
"""

from __future__ import annotations

import argparse
import io
import json
import sys

import numpy as np

from . import chanstats, clustering, fitting
from .core import (
    ScenarioId,
    SingularFitError,
    ValidationError,
    catalog_as_dict,
    catalog_lookup,
)
from .dropsim import DropConfig, run_drop
from .geometry import load_building_map
from .los import p_los_3gpp_uma, p_los_d1d2, p_los_nyu_squared
from .pathloss import AbgModel, CifModel, CiModel, abg_pl, ci_pl, cif_pl
from .penetration import BplClass, O2iConfig, bpl, o2i_loss

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NUMERIC = 3


def _fmt(value):
    """CSV cell formatting: shortest round-trip repr for floats."""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _format_rows(rows, fmt: str) -> str:
    """Render a list of {column: value} rows as CSV or JSON text."""
    if fmt == "json":
        return json.dumps(rows, indent=2) + "\n"
    buf = io.StringIO()
    if rows:
        cols = list(rows[0].keys())
        buf.write(",".join(cols) + "\n")
        for row in rows:
            buf.write(",".join(_fmt(row[c]) for c in cols) + "\n")
    return buf.getvalue()


def _emit(args, data_text: str, meta: dict) -> None:
    out = getattr(args, "out", None)
    meta_text = json.dumps(meta, indent=2)
    if out:
        with open(out, "w") as fh:
            fh.write(data_text)
        print(meta_text)
    else:
        sys.stdout.write(data_text)
        print(meta_text, file=sys.stderr)


def _distances(args) -> np.ndarray:
    if args.dist is not None and args.dist_range is not None:
        raise ValidationError("supply --dist or --dist-range, not both")
    if args.dist is not None:
        return np.array([args.dist])
    if args.dist_range is not None:
        lo, hi, count = args.dist_range
        n = int(count)
        if n < 2 or lo <= 0 or hi <= lo:
            raise ValidationError("--dist-range needs MIN > 0, MAX > MIN and COUNT >= 2")
        if getattr(args, "linear", False):
            return np.linspace(lo, hi, n)
        return np.geomspace(lo, hi, n)
    raise ValidationError("supply --dist or --dist-range")


def _new_seed() -> int:
    return int(np.random.SeedSequence().generate_state(1)[0])


# ---------------------------------------------------------------------------
# subcommand handlers
# ---------------------------------------------------------------------------


def _cmd_eval(args) -> int:
    explicit = [
        name for name in ("n", "b", "f0", "alpha", "beta", "gamma")
        if getattr(args, name) is not None
    ]
    if args.scenario and explicit:
        raise ValidationError(
            f"--scenario and explicit parameters (--{', --'.join(explicit)}) are exclusive"
        )
    if args.model == "ci":
        if args.scenario:
            params = catalog_lookup(args.scenario)
            model = CiModel(n=params.ci_n)
        elif args.n is not None:
            model = CiModel(n=args.n)
        else:
            raise ValidationError("CI evaluation needs --scenario or --n")
        pl = ci_pl(model, args.freq, _distances(args))
        resolved = {"n": model.n}
    elif args.model == "cif":
        if args.scenario:
            raise ValidationError(
                "the catalog carries no CIF parameters; supply --n, --b and --f0"
            )
        if args.n is None or args.b is None or args.f0 is None:
            raise ValidationError("CIF evaluation needs --n, --b and --f0")
        model = CifModel(n=args.n, b=args.b, f0_ghz=args.f0)
        pl = cif_pl(model, args.freq, _distances(args))
        resolved = {"n": model.n, "b": model.b, "f0_ghz": model.f0_ghz}
    else:  # abg
        if args.scenario:
            params = catalog_lookup(args.scenario)
            if params.abg is None:
                raise ValidationError(
                    f"scenario {params.scenario.value} has no ABG parameters "
                    "(none are published for LOS scenarios)"
                )
            model = AbgModel(params.abg.alpha, params.abg.beta, params.abg.gamma)
        elif args.alpha is not None and args.beta is not None and args.gamma is not None:
            model = AbgModel(args.alpha, args.beta, args.gamma)
        else:
            raise ValidationError("ABG evaluation needs --scenario or --alpha/--beta/--gamma")
        pl = abg_pl(model, args.freq, _distances(args))
        resolved = {"alpha": model.alpha, "beta": model.beta, "gamma": model.gamma}
    d = _distances(args)
    pl = np.atleast_1d(np.asarray(pl))
    rows = [{"dist_m": float(di), "pl_db": float(pi)} for di, pi in zip(d, pl)]
    meta = {
        "command": "eval",
        "model": args.model,
        "freq_ghz": args.freq,
        "params": resolved,
        "scenario": args.scenario,
        "rows": len(rows),
    }
    _emit(args, _format_rows(rows, args.format), meta)
    return EXIT_OK


def _cmd_losprob(args) -> int:
    d = _distances(args)
    if args.model == "3gpp-uma":
        p = p_los_3gpp_uma(d, args.height)
        resolved = {"d1": 18.0, "d2": 63.0, "ue_height_m": args.height}
    else:
        if args.scenario:
            if args.d1 is not None or args.d2 is not None:
                raise ValidationError("--scenario and --d1/--d2 are exclusive")
            los = catalog_lookup(args.scenario).los
        elif args.d1 is not None and args.d2 is not None:
            from .core import D1D2Params

            los = D1D2Params(d1=args.d1, d2=args.d2)
        else:
            raise ValidationError("supply --scenario or both --d1 and --d2")
        p = p_los_d1d2(los, d) if args.model == "d1d2" else p_los_nyu_squared(los, d)
        resolved = {"d1": los.d1, "d2": los.d2}
    p = np.atleast_1d(np.asarray(p))
    rows = [{"dist_m": float(di), "p_los": float(pi)} for di, pi in zip(d, p)]
    meta = {"command": "losprob", "model": args.model, "params": resolved, "rows": len(rows)}
    _emit(args, _format_rows(rows, args.format), meta)
    return EXIT_OK


def _cmd_bpl(args) -> int:
    cls = BplClass.from_string(args.building_class)
    if args.freq is not None and args.freq_range is not None:
        raise ValidationError("supply --freq or --freq-range, not both")
    if args.freq is not None:
        freqs = np.array([args.freq])
    elif args.freq_range is not None:
        lo, hi, count = args.freq_range
        if int(count) < 2 or lo <= 0 or hi <= lo:
            raise ValidationError("--freq-range needs MIN > 0, MAX > MIN and COUNT >= 2")
        freqs = np.geomspace(lo, hi, int(count))
    else:
        raise ValidationError("supply --freq or --freq-range")
    cfg = O2iConfig(incidence_surcharge_max_db=args.surcharge, depth_loss_per_m=args.rate)
    if args.depth > 0.0 or args.angle > 0.0:
        loss = np.atleast_1d(np.asarray(o2i_loss(cls, freqs, args.depth, args.angle, cfg)))
        column = "o2i_db"
    else:
        loss = np.atleast_1d(np.asarray(bpl(cls, freqs)))
        column = "bpl_db"
    rows = [{"freq_ghz": float(f), column: float(v)} for f, v in zip(freqs, loss)]
    meta = {
        "command": "bpl",
        "building_class": cls.label,
        "depth_m": args.depth,
        "incidence_deg": args.angle,
        "o2i_config": {
            "incidence_surcharge_max_db": cfg.incidence_surcharge_max_db,
            "depth_loss_per_m": cfg.depth_loss_per_m,
        },
        "rows": len(rows),
    }
    _emit(args, _format_rows(rows, args.format), meta)
    return EXIT_OK


def _cmd_fit(args) -> int:
    samples = fitting.load_pathloss_samples(args.input)
    fitter = {"ci": fitting.fit_ci, "cif": fitting.fit_cif, "abg": fitting.fit_abg}[args.model]
    report = fitter(samples)
    if args.residuals:
        with open(args.residuals, "w") as fh:
            fh.write("freq_ghz,dist_m,pl_db,residual_db\n")
            for s, r in zip(samples, report.residuals_db):
                fh.write(f"{_fmt(s.f_ghz)},{_fmt(s.d_m)},{_fmt(s.pl_db)},{_fmt(float(r))}\n")
    meta = {
        "command": "fit",
        "input": args.input,
        "model": args.model,
        "sample_count": report.sample_count,
        "residuals": args.residuals,
    }
    _emit(args, json.dumps(report.to_dict(), indent=2) + "\n", meta)
    return EXIT_OK


def _cmd_fit_los(args) -> int:
    samples = fitting.load_los_samples(args.input)
    if args.compare:
        rows = fitting.compare_los_models(
            samples, bin_width_m=args.bin_width, environment=args.environment
        )
        data = _format_rows(rows, args.format)
        meta = {
            "command": "fit-los",
            "mode": "compare",
            "input": args.input,
            "bin_width_m": args.bin_width,
            "environment": args.environment,
            "sample_count": len(samples),
        }
    else:
        model = args.model.replace("-", "_")
        report = fitting.fit_los_probability(samples, model=model, bin_width_m=args.bin_width)
        data = json.dumps(report.to_dict(), indent=2) + "\n"
        meta = {
            "command": "fit-los",
            "mode": "fit",
            "input": args.input,
            "model": args.model,
            "bin_width_m": args.bin_width,
            "sample_count": len(samples),
        }
    _emit(args, data, meta)
    return EXIT_OK


def _cmd_cluster(args) -> int:
    links = clustering.load_rays(args.input)
    seed = args.seed if args.seed is not None else _new_seed()
    cfg = clustering.ClusteringConfig(
        k_min=args.k_min,
        k_max=args.k_max,
        prune_p=args.prune_p,
        prune_s=args.prune_s,
        restarts=args.restarts,
        zeta=args.zeta,
        rng_seed=seed,
    )
    results = {}
    link_meta = {}
    for link_id, rays in links.items():
        res = clustering.cluster_multirestart(rays, cfg)
        results[link_id] = res.best
        link_meta[link_id] = {
            "n_rays": len(rays),
            "n_clusters": res.best.n_clusters,
            "best_restart": res.best_restart,
            "within_mcd_sum": res.best.within_mcd_sum(),
        }
    buf = io.StringIO()
    buf.write("link_id,ray_index,cluster,pruned\n")
    for link_id, cs in results.items():
        for i in range(len(cs.rays)):
            buf.write(f"{link_id},{i},{int(cs.assignments[i])},{int(cs.pruned[i])}\n")
    if args.stats_out:
        stats = {
            link_id: {
                str(j): rep.to_dict()
                for j, rep in chanstats.per_cluster_reports(cs).items()
            }
            for link_id, cs in results.items()
        }
        with open(args.stats_out, "w") as fh:
            json.dump(stats, fh, indent=2)
            fh.write("\n")
    meta = {
        "command": "cluster",
        "input": args.input,
        "seed": seed,
        "config": {
            "k_min": cfg.k_min,
            "k_max": cfg.k_max,
            "prune_p": cfg.prune_p,
            "prune_s": cfg.prune_s,
            "restarts": cfg.restarts,
            "zeta": cfg.zeta,
        },
        "links": link_meta,
        "stats_out": args.stats_out,
    }
    _emit(args, buf.getvalue(), meta)
    return EXIT_OK


def _load_assignments(path):
    """Read a cluster-assignment CSV back into {link_id: [(cluster, pruned)]}."""
    import csv as _csv

    table = {}
    with open(path, newline="") as fh:
        reader = _csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != [
            "link_id",
            "ray_index",
            "cluster",
            "pruned",
        ]:
            raise ValidationError(
                f"{path}: line 1: expected header link_id,ray_index,cluster,pruned"
            )
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            try:
                link, idx, cluster, pruned = row[0], int(row[1]), int(row[2]), int(row[3])
            except (ValueError, IndexError) as exc:
                raise ValidationError(f"{path}: line {lineno}: {exc}") from None
            table.setdefault(link, {})[idx] = (cluster, bool(pruned))
    return table


def _cmd_stats(args) -> int:
    links = clustering.load_rays(args.input)
    assignments = _load_assignments(args.assignments) if args.assignments else None
    out = {}
    for link_id, rays in links.items():
        entry = {"all_rays": chanstats.spread_report(rays).to_dict()}
        if assignments is not None:
            if link_id not in assignments:
                raise ValidationError(f"assignments file has no rows for link {link_id!r}")
            amap = assignments[link_id]
            clusters = {}
            for i in range(len(rays)):
                if i not in amap:
                    raise ValidationError(
                        f"assignments file is missing ray {i} of link {link_id!r}"
                    )
                cluster, pruned = amap[i]
                if not pruned:
                    clusters.setdefault(cluster, []).append(rays[i])
            entry["clusters"] = {
                str(j): chanstats.spread_report(members).to_dict()
                for j, members in sorted(clusters.items())
            }
        out[link_id] = entry
    meta = {
        "command": "stats",
        "input": args.input,
        "assignments": args.assignments,
        "links": len(out),
    }
    _emit(args, json.dumps(out, indent=2) + "\n", meta)
    return EXIT_OK


def _cmd_drop(args) -> int:
    with open(args.config) as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"config file {args.config}: invalid JSON ({exc})") from None
    seed_generated = False
    if args.seed is not None:
        raw["rng_seed"] = args.seed
    elif raw.get("rng_seed") is None:
        raw["rng_seed"] = _new_seed()
        seed_generated = True
    cfg = DropConfig.from_dict(raw)
    bmap = load_building_map(args.map) if args.map else None
    result = run_drop(cfg, bmap)
    summary = result.summary_dict()
    if args.out:
        csv_path = args.out + ".csv"
        json_path = args.out + ".json"
        result.to_csv(csv_path)
        with open(json_path, "w") as fh:
            json.dump(summary, fh, indent=2)
            fh.write("\n")
        meta = {
            "command": "drop",
            "seed": result.seed,
            "seed_generated": seed_generated,
            "config_hash": result.config_hash,
            "n_links": result.n_links,
            "outputs": [csv_path, json_path],
        }
        print(json.dumps(meta, indent=2))
    else:
        sys.stdout.write(result.to_csv_text())
        meta = {
            "command": "drop",
            "seed": result.seed,
            "seed_generated": seed_generated,
            "config_hash": result.config_hash,
            "n_links": result.n_links,
            "summary": summary,
        }
        print(json.dumps(meta, indent=2), file=sys.stderr)
    return EXIT_OK


def _cmd_catalog(args) -> int:
    records = catalog_as_dict()
    if args.format == "csv":
        rows = []
        for rec in records:
            rows.append(
                {
                    "scenario": rec["scenario"],
                    "ci_n": rec["ci"]["n"],
                    "ci_sigma_db": rec["ci"]["sigma_db"],
                    "abg_alpha": "" if rec["abg"] is None else rec["abg"]["alpha"],
                    "abg_beta": "" if rec["abg"] is None else rec["abg"]["beta"],
                    "abg_gamma": "" if rec["abg"] is None else rec["abg"]["gamma"],
                    "abg_sigma_db": "" if rec["abg"] is None else rec["abg"]["sigma_db"],
                    "los_d1": rec["los"]["d1"],
                    "los_d2": rec["los"]["d2"],
                }
            )
        data = _format_rows(rows, "csv")
    else:
        data = json.dumps(records, indent=2) + "\n"
    _emit(args, data, {"command": "catalog", "scenarios": len(records)})
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def _add_common(sub, fmt_default="csv"):
    sub.add_argument("--out", help="write the data artifact here instead of stdout")
    sub.add_argument(
        "--format", choices=("csv", "json"), default=fmt_default, help="data table format"
    )


def _add_dist_flags(sub):
    sub.add_argument("--dist", type=float, help="single 2D distance, m")
    sub.add_argument(
        "--dist-range",
        nargs=3,
        type=float,
        metavar=("MIN", "MAX", "COUNT"),
        help="distance sweep (log-spaced unless --linear)",
    )
    sub.add_argument("--linear", action="store_true", help="linear spacing for --dist-range")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="urbanprop",
        description="Outdoor channel-modeling toolkit: path loss, LOS probability, "
        "building penetration, model fitting, multipath clustering, link drops.",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)
    scenario_ids = [s.value for s in ScenarioId]

    p = subparsers.add_parser("eval", help="evaluate a path-loss model")
    p.add_argument("--model", choices=("ci", "cif", "abg"), required=True)
    p.add_argument("--scenario", choices=scenario_ids)
    p.add_argument("--freq", type=float, required=True, help="frequency, GHz")
    p.add_argument("--n", type=float, help="CI/CIF path-loss exponent")
    p.add_argument("--b", type=float, help="CIF frequency slope")
    p.add_argument("--f0", type=float, help="CIF centroid frequency, GHz")
    p.add_argument("--alpha", type=float, help="ABG distance slope")
    p.add_argument("--beta", type=float, help="ABG intercept, dB")
    p.add_argument("--gamma", type=float, help="ABG frequency slope")
    _add_dist_flags(p)
    _add_common(p)
    p.set_defaults(func=_cmd_eval)

    p = subparsers.add_parser("losprob", help="evaluate a LOS-probability model")
    p.add_argument("--model", choices=("d1d2", "nyu-squared", "3gpp-uma"), required=True)
    p.add_argument("--scenario", choices=scenario_ids)
    p.add_argument("--d1", type=float, help="model d1, m")
    p.add_argument("--d2", type=float, help="model d2, m")
    p.add_argument("--height", type=float, default=1.5, help="UE height for 3gpp-uma, m")
    _add_dist_flags(p)
    _add_common(p)
    p.set_defaults(func=_cmd_losprob)

    p = subparsers.add_parser("bpl", help="building penetration / O2I loss")
    p.add_argument(
        "--class", dest="building_class", choices=("low", "high"), required=True
    )
    p.add_argument("--freq", type=float, help="frequency, GHz")
    p.add_argument(
        "--freq-range", nargs=3, type=float, metavar=("MIN", "MAX", "COUNT"),
        help="frequency sweep, GHz (log-spaced)",
    )
    p.add_argument("--depth", type=float, default=0.0, help="indoor depth, m")
    p.add_argument("--angle", type=float, default=0.0, help="incidence angle from normal, deg")
    p.add_argument("--rate", type=float, default=0.5, help="indoor loss rate, dB/m")
    p.add_argument("--surcharge", type=float, default=20.0, help="max grazing surcharge, dB")
    _add_common(p)
    p.set_defaults(func=_cmd_bpl)

    p = subparsers.add_parser("fit", help="fit a path-loss model to sample CSV")
    p.add_argument("--input", required=True, help="CSV: freq_ghz,dist_m,pl_db,los[,weight]")
    p.add_argument("--model", choices=("ci", "cif", "abg"), required=True)
    p.add_argument("--residuals", help="also write per-sample residuals CSV here")
    _add_common(p, fmt_default="json")
    p.set_defaults(func=_cmd_fit)

    p = subparsers.add_parser("fit-los", help="fit LOS-probability parameters")
    p.add_argument("--input", required=True, help="CSV: dist_m,los")
    p.add_argument("--model", choices=("d1d2", "nyu-squared"), default="d1d2")
    p.add_argument("--bin-width", type=float, default=10.0, help="distance bin width, m")
    p.add_argument(
        "--compare", action="store_true",
        help="emit the three-row model comparison instead of a single fit",
    )
    p.add_argument("--environment", choices=("uma", "umi"), default="uma")
    _add_common(p)
    p.set_defaults(func=_cmd_fit_los)

    p = subparsers.add_parser("cluster", help="cluster multipath rays")
    p.add_argument("--input", required=True, help="ray CSV")
    p.add_argument("--k-min", type=int, default=2)
    p.add_argument("--k-max", type=int, default=10)
    p.add_argument("--restarts", type=int, default=50)
    p.add_argument("--prune-p", type=float, default=0.98)
    p.add_argument("--prune-s", type=float, default=0.95)
    p.add_argument("--zeta", type=float, default=1.0, help="MCD delay weight")
    p.add_argument("--seed", type=int, help="base seed (generated and echoed if absent)")
    p.add_argument("--stats-out", help="write per-cluster spread reports JSON here")
    _add_common(p)
    p.set_defaults(func=_cmd_cluster)

    p = subparsers.add_parser("stats", help="delay/angle spreads and XPR over ray CSVs")
    p.add_argument("--input", required=True, help="ray CSV")
    p.add_argument("--assignments", help="cluster assignment CSV for per-cluster reports")
    _add_common(p, fmt_default="json")
    p.set_defaults(func=_cmd_stats)

    p = subparsers.add_parser("drop", help="run a Monte-Carlo link drop")
    p.add_argument("--config", required=True, help="DropConfig JSON file")
    p.add_argument("--map", help="building map JSON (required for los_mode=map)")
    p.add_argument("--seed", type=int, help="override/resolve the seed")
    p.add_argument("--out", help="output prefix; writes <prefix>.csv and <prefix>.json")
    p.set_defaults(func=_cmd_drop)

    p = subparsers.add_parser("catalog", help="dump the built-in scenario catalog")
    _add_common(p, fmt_default="json")
    p.set_defaults(func=_cmd_catalog)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except SingularFitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except np.linalg.LinAlgError as exc:
        print(f"error: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
