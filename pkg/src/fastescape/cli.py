"""Command-line driver: verify, construct, render, dimension, info.

Every config key is also a flag (flag overrides file).  Exit codes:
0 pass, 1 check failure, 2 config error, 3 construction infeasible.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import dimension as dim
from . import dynamics, inequalities, islands
from .config import SCHEMA, RunConfig, load_config
from .errors import (
    ConfigError,
    ContinuationBroke,
    FastEscapeError,
    PackingImpossible,
    ThresholdViolation,
    TooFewIslands,
)
from .function import validate_sector
from .modulus import check_rhobig, find_thresholds
from .reporting import fmt_number, read_pgm, write_csv, write_manifest


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fastescape",
        description="Genus-zero sector-zero function toolkit: inequality sweeps, "
        "island construction, escape rasters, dimension bounds.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("verify", "run the inequality suite; exit 0 iff all requested checks pass"),
        ("construct", "trace islands and write their manifests"),
        ("render", "classify a pixel grid and write PGM rasters"),
        ("dimension", "nested-collection bound / box counting reports"),
        ("info", "print the configured function, frame, and constants"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", type=Path, help="key = value config file")
        for key in SCHEMA:
            p.add_argument(f"--{key}", dest=key, metavar="V")
    return parser


def _config_from_args(args) -> RunConfig:
    cfg = load_config(args.config) if args.config else RunConfig({})
    overrides = {
        key: getattr(args, key)
        for key in SCHEMA
        if getattr(args, key, None) is not None
    }
    if overrides:
        merged = dict(cfg.values)
        merged.update(overrides)
        cfg = RunConfig(merged)
    return cfg


def _out_dir(cfg: RunConfig) -> Path:
    out = Path(cfg["output.dir"])
    out.mkdir(parents=True, exist_ok=True)
    return out


def _thresholds(fn, frame, cfg):
    return find_thresholds(fn, frame, cfg.build_scan())


def cmd_verify(cfg: RunConfig) -> int:
    fn, frame = cfg.build_function(), cfg.build_frame()
    out = _out_dir(cfg)
    th = _thresholds(fn, frame, cfg)
    wanted = cfg["verify.checks"]
    checks = None if wanted == "all" else tuple(w.strip() for w in wanted.split(","))
    reports = inequalities.run_verify_suite(
        fn,
        frame,
        th.r1.value(),
        samples=cfg["verify.samples"],
        grid_factor=cfg["verify.grid_factor"],
        grid_ratio=cfg["verify.grid_ratio"],
        checks=checks,
        keep_tables=True,
    )
    manifest = {f"threshold.{k}": v for k, v in th.as_floats().items()}
    all_passed = True
    rows = []
    for cid, rep in sorted(reports.items()):
        all_passed &= rep.passed
        manifest[f"check.{cid}.margin"] = rep.min_margin
        manifest[f"check.{cid}.passed"] = rep.passed
        manifest[f"check.{cid}.samples"] = rep.n_samples
        rows.append((cid, rep.n_samples, rep.lhs, rep.rhs, rep.min_margin, rep.passed))
        if rep.table is not None:
            write_csv(
                out / f"check_{cid}.csv",
                ("sample", "re", "im", "lhs", "rhs", "margin"),
                ((i, *row) for i, row in enumerate(rep.table)),
            )
    for entry in check_rhobig(fn, frame, th):
        k = entry["k"]
        manifest[f"chain.rhobig.k{k}.certified"] = entry["certified"]
        if entry["certified"]:
            manifest[f"chain.rhobig.k{k}.ok"] = entry["ok"]
            all_passed &= entry["ok"]
    write_csv(out / "verify_summary.csv",
              ("check", "samples", "lhs", "rhs", "min_margin", "passed"), rows)
    manifest["all_passed"] = all_passed
    write_manifest(out / "verify_manifest.txt", manifest)
    print(f"verify: {'PASS' if all_passed else 'FAIL'} ({len(reports)} checks; see {out})")
    return 0 if all_passed else 1


def cmd_construct(cfg: RunConfig) -> int:
    fn, frame = cfg.build_function(), cfg.build_frame()
    out = _out_dir(cfg)
    th = find_thresholds(fn, frame, cfg.build_scan(), require_r2=False)
    r = cfg["islands.r"]
    records, pack = islands.construct_islands(
        fn,
        frame,
        r,
        nu=cfg["islands.nu"],
        c1=cfg["islands.c1"],
        mesh=cfg["islands.mesh"],
        max_islands=cfg["islands.max_count"],
        r1=th.r1.value(),
        r2=th.r2.value() if (th.r2 is not None and r < th.r2.value()) else None,
    )
    dist = islands.distortion_constant(fn, records)
    level = islands.measure_level(fn, frame, r, records, total_m=len(pack), C=dist.C)

    manifest = {
        "r": r,
        "nu": cfg["islands.nu"],
        "t": pack.t,
        "m_of_r": islands.m_of_r(fn, frame, r, cfg["islands.c1"], cfg["islands.nu"]),
        "packed": len(pack),
        "achieved_c1": pack.achieved_c1,
        "c2_formula": islands.c2_constant(frame, cfg["islands.nu"]),
        "distortion_C": dist.C,
        "koebe_max": dist.koebe_max,
        "koebe_passed": dist.koebe_passed,
        "level0.delta": level.delta,
        "level0.d": level.d,
        "islands": len(records),
    }
    for k, v in level.provenance:
        manifest[f"level0.{k}"] = v
    for i, rec in enumerate(records):
        manifest[f"island{i}.kappa"] = rec.kappa
        manifest[f"island{i}.b"] = rec.b
        manifest[f"island{i}.area"] = rec.area
        manifest[f"island{i}.c2_ratio"] = rec.c2_ratio
        manifest[f"island{i}.forward_residual"] = rec.forward_residual
        manifest[f"island{i}.winding"] = rec.winding
        write_csv(
            out / f"island{i}_vertices.csv",
            ("index", "re", "im", "target_re", "target_im"),
            (
                (n, v.real, v.imag, w.real, w.imag)
                for n, (v, w) in enumerate(zip(rec.vertices, rec.targets))
            ),
        )
    write_manifest(out / "construct_manifest.txt", manifest)
    print(f"construct: {len(records)} islands at r = {r:g} (see {out})")
    return 0


def cmd_render(cfg: RunConfig) -> int:
    fn, frame = cfg.build_function(), cfg.build_frame()
    out = _out_dir(cfg)
    th = _thresholds(fn, frame, cfg)
    rect = (cfg["render.x_min"], cfg["render.x_max"], cfg["render.y_min"], cfg["render.y_max"])
    grid = dynamics.render_grid(
        fn,
        frame,
        rect,
        (cfg["render.width"], cfg["render.height"]),
        th,
        dynamics.RenderConfig(
            n_max=cfg["render.n_max"],
            escape_radius=cfg["render.escape_radius"],
            tile=cfg["render.tile"],
        ),
    )
    dynamics.write_class_pgm(out / "classes.pgm", grid)
    dynamics.write_escape_pgm(out / "escape_time.pgm", grid, cfg["render.n_max"])
    counts = np.bincount(grid.codes.ravel(), minlength=4)
    write_manifest(
        out / "render_manifest.txt",
        {
            "rect": f"{rect[0]:g}:{rect[1]:g}:{rect[2]:g}:{rect[3]:g}",
            "width": cfg["render.width"],
            "height": cfg["render.height"],
            "n_max": cfg["render.n_max"],
            "count.A_certified": int(counts[0]),
            "count.escape_empirical": int(counts[1]),
            "count.bounded_window": int(counts[2]),
            "count.unknown": int(counts[3]),
        },
    )
    print(f"render: {cfg['render.width']}x{cfg['render.height']} raster (see {out})")
    return 0


def cmd_dimension(cfg: RunConfig) -> int:
    fn, frame = cfg.build_function(), cfg.build_frame()
    out = _out_dir(cfg)
    source = cfg["dimension.source"]
    if source == "levels":
        path = cfg["dimension.levels"]
        if not path:
            raise ConfigError("dimension.source = levels needs dimension.levels")
        rows = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        levels = [dim.NestingLevel(n=int(n), delta=float(d), d=float(dd)) for n, d, dd in rows]
    elif source == "model":
        th = _thresholds(fn, frame, cfg)
        c3 = cfg["dimension.c3"]
        if c3 <= 0.0:
            records, pack = islands.construct_islands(
                fn, frame, cfg["islands.r"],
                nu=cfg["islands.nu"], c1=cfg["islands.c1"],
                mesh=cfg["islands.mesh"], max_islands=cfg["islands.max_count"],
                r1=th.r1.value(),
            )
            dist = islands.distortion_constant(fn, records)
            level = islands.measure_level(
                fn, frame, cfg["islands.r"], records, total_m=len(pack), C=dist.C
            )
            c3 = dict(level.provenance)["c3_measured"]
        trend = dim.model_trend(
            fn, frame, cfg["islands.nu"], th.rho0.value(), th.R1,
            cfg["dimension.n_max"], c3,
        )
        levels = trend.levels
        report = dim.mcmullen_bound(levels, delta_prefix=trend.delta_prefix)
    elif source == "raster":
        path = cfg["dimension.raster"]
        if not path:
            raise ConfigError("dimension.source = raster needs dimension.raster")
        data = read_pgm(path)
        fit = dim.box_counting(raster=data <= 85)   # A-certified or empirical pixels
        write_csv(out / "box_counts.csv", ("eps", "count"), fit.table())
        write_manifest(
            out / "dimension_manifest.txt",
            {"box_dimension": fit.dimension, "residual": fit.residual,
             "scales": len(fit.scales)},
        )
        print(f"dimension: box-counting slope {fit.dimension:.4f} (see {out})")
        return 0
    else:
        raise ConfigError(f"unknown dimension.source {source!r}")

    if source == "levels":
        report = dim.mcmullen_bound(levels)
    write_csv(
        out / "dimension_levels.csv",
        ("n", "delta", "d", "ratio"),
        (
            (lv.n, lv.delta, lv.d, ratio)
            for lv, (_n, ratio) in zip(levels, report.ratios)
        ),
    )
    write_manifest(
        out / "dimension_manifest.txt",
        {
            "bound": report.bound,
            "levels": report.levels,
            "ratio_trend": ";".join(f"{r:.6g}" for r in report.trend),
        },
    )
    print(f"dimension: lower bound {report.bound:.6f} over {report.levels} levels (see {out})")
    return 0


def cmd_info(cfg: RunConfig) -> int:
    fn, frame = cfg.build_function(), cfg.build_frame()
    sector = validate_sector(fn, frame)
    a1 = fn.zeros.values(np.array([1]))[0]
    print(f"function: {fn.label} (c = {fmt_number(complex(fn.c))}, q = {fn.q})")
    print(f"  a_1 = {fmt_number(a1)}, sector holds from n = {sector.n0}")
    print(f"frame: theta2 = {frame.theta2:g}, psi = {frame.psi:g}, psi' = {frame.psi_prime:g}")
    print(f"  sigma = {frame.sigma:.10g}, half opening = {frame.half_opening:g}")
    nu = cfg["islands.nu"]
    print(f"constants at nu = {nu:g}: c2 = {islands.c2_constant(frame, nu):.6g}, "
          f"sigma^4/4 = {frame.sigma**4 / 4:.6g}, sigma^6/64 = {frame.sigma**6 / 64:.6g}")
    print("config:")
    print(cfg.canonical_text(), end="")
    return 0


_COMMANDS = {
    "verify": cmd_verify,
    "construct": cmd_construct,
    "render": cmd_render,
    "dimension": cmd_dimension,
    "info": cmd_info,
}


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = _config_from_args(args)
        return _COMMANDS[args.command](cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (TooFewIslands, PackingImpossible, ContinuationBroke, ThresholdViolation) as exc:
        print(f"construction infeasible: {exc}", file=sys.stderr)
        return 3
    except FastEscapeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
