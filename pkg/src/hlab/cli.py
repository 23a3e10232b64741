"""Command-line front end: ``hlab run|convergence|list|dump``."""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
import warnings
from pathlib import Path

import numpy as np

from . import checks as chk
from .clebsch import ClebschState
from .config import ConfigError, ScenarioConfig, load_config
from .grid import read_dump, write_dump
from .invariants import CSV_FLOAT, ConservationReport, order_check, write_report_csv
from .casimir import CasimirReport, write_casimir_csv
from .lagrangian import label_tracers, seed_tracers
from .noether import potential_vorticity
from .scenarios import SCENARIOS, make_scenario
from .simulation import run
from .solver import CFLWarning, NumericalAbort

log = logging.getLogger("hlab")

EXIT_OK, EXIT_CONFIG, EXIT_ABORT, EXIT_ORDER = 0, 1, 2, 3


def build_run(cfg: ScenarioConfig, names: list[str], n: int | None = None) -> list:
    """Evolve the configured scenario, carrying whatever the checks need."""
    grid = cfg.grid(n)
    eos = cfg.eos()
    fs = make_scenario(cfg.scenario, grid, cfg.seed, eos=eos, magnetic=cfg.magnetic, entropy=cfg.entropy)
    tracers = None
    if cfg.tracers or chk.needs_tracers(names):
        tc = seed_tracers(grid, cfg.tracers or 512, cfg.seed)
        tracers = label_tracers(tc, fs, q0=potential_vorticity(fs))
    dragged = chk.closure_objects(fs) if chk.needs_closure(names) else None
    steps, dt = cfg.steps, cfg.dt
    if n is not None and n != cfg.n:
        # keep dt proportional to dx when refining
        if steps is not None:
            steps = max(1, round(steps * n / cfg.n))
        elif dt is not None:
            dt = dt * cfg.n / n
    with warnings.catch_warnings():
        warnings.simplefilter("always", CFLWarning)
        return run(
            fs,
            eos,
            cfg.t_end,
            steps=steps,
            dt=dt,
            cfl=cfg.cfl,
            output_every=cfg.output_every,
            clebsch=ClebschState.zeros(grid),
            tracers=tracers,
            dragged=dragged,
        )


def write_tracer_csv(path: Path, snapshots: list) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        first = snapshots[0].tracers
        scalars = sorted(k for k, v in first.carried.items() if np.ndim(v) == 1)
        w.writerow(["t", "id", "x0", "y0", "z0", "x", "y", "z", "J", *scalars])
        for snap in snapshots:
            tc = snap.tracers
            J = tc.J
            for i in range(len(tc)):
                vals = [*tc.x0[i], *tc.x[i], J[i], *(tc.carried[k][i] for k in scalars)]
                w.writerow([CSV_FLOAT % snap.t, i] + [CSV_FLOAT % v for v in vals])


def write_checkpoint(folder: Path, snap) -> None:
    folder.mkdir(parents=True, exist_ok=True)
    for name, arr in snap.fluid.fields().items():
        write_dump(folder / f"{name}.hlab", snap.grid, arr)
    if snap.clebsch is not None:
        for name, arr in snap.clebsch.as_dict().items():
            write_dump(folder / f"{name}.hlab", snap.grid, arr)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    return obj


def cmd_run(cfg: ScenarioConfig) -> int:
    names = chk.expand_checks(cfg.checks)
    out = cfg.output_dir
    out.mkdir(parents=True, exist_ok=True)
    snaps = build_run(cfg, names)
    eos = cfg.eos()
    summary, reports, casimirs = {}, [], []
    for name in names:
        res = chk.evaluate(name, snaps, eos)
        summary[name] = res.summary
        if isinstance(res.report, ConservationReport):
            reports.append(res.report)
        elif isinstance(res.report, CasimirReport):
            casimirs.append(res.report)
    write_report_csv(out / "reports.csv", reports)
    write_casimir_csv(out / "casimir.csv", casimirs)
    if snaps[0].tracers is not None:
        write_tracer_csv(out / "tracers.csv", snaps)
    write_checkpoint(out / "checkpoint", snaps[-1])
    meta = {"scenario": cfg.scenario, "n": cfg.n, "dims": cfg.dims, "t_end": snaps[-1].t, "snapshots": len(snaps)}
    with open(out / "summary.json", "w") as fh:
        json.dump(_jsonable({"run": meta, "checks": summary}), fh, indent=2, sort_keys=True)
    for name in names:
        print(f"{name}: {json.dumps(_jsonable(summary[name]), sort_keys=True)}")
    return EXIT_OK


def cmd_convergence(cfg: ScenarioConfig, ns: list[int]) -> int:
    if len(ns) < 3:
        raise ConfigError("convergence needs at least three resolutions")
    names = chk.expand_checks(cfg.checks or ["operator:grad"])
    errors: dict[str, list[float]] = {n: [] for n in names}
    eos = cfg.eos()
    for n in ns:
        log.info("resolution n=%d", n)
        snaps = build_run(cfg, names, n)
        for name in names:
            errors[name].append(chk.evaluate(name, snaps, eos).error)
    fits = {}
    failed = []
    for name in names:
        threshold = 3.9 if name.startswith("operator:") else cfg.threshold
        fit = order_check(ns, errors[name], threshold)
        fits[name] = fit.as_dict()
        print(f"{name}: order {fit.order:.3f} (threshold {threshold}) {'ok' if fit.passed else 'FAIL'}")
        if not fit.passed:
            failed.append(name)
    cfg.output_dir.mkdir(parents=True, exist_ok=True)
    with open(cfg.output_dir / "orders.json", "w") as fh:
        json.dump(_jsonable(fits), fh, indent=2, sort_keys=True)
    if failed:
        print("order failure: " + ", ".join(failed), file=sys.stderr)
        return EXIT_ORDER
    return EXIT_OK


def cmd_list() -> int:
    for name, desc in SCENARIOS.items():
        print(f"scenario {name}: {desc}")
    for name, desc in chk.catalog().items():
        print(f"check {name}: {desc}")
    print("check casimir:all: every catalog Casimir")
    return EXIT_OK


def cmd_dump(path: Path) -> int:
    grid, arr = read_dump(path)
    print(f"grid dims={grid.dims} n={list(grid.n)} length={[round(L, 12) for L in grid.length]}")
    comps = [arr] if arr.ndim == grid.dims else list(arr)
    for i, c in enumerate(comps):
        print(f"component {i}: min={c.min():.16e} max={c.max():.16e} mean={c.mean():.16e}")
    return EXIT_OK


def _parse_ns(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad resolution list {text!r}") from None


def make_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hlab", description="Advected-invariant verification runs")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="evolve a scenario and write reports")
    r.add_argument("config", type=Path)
    c = sub.add_parser("convergence", help="fit residual orders over resolutions")
    c.add_argument("config", type=Path)
    c.add_argument("--n", type=_parse_ns, default=[24, 32, 48])
    sub.add_parser("list", help="print scenarios and checks")
    d = sub.add_parser("dump", help="print a checkpoint header and field stats")
    d.add_argument("checkpoint", type=Path)
    return p


def main(argv: list[str] | None = None) -> int:
    args = make_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        if args.command == "list":
            return cmd_list()
        if args.command == "dump":
            return cmd_dump(args.checkpoint)
        cfg = load_config(args.config)
        if args.command == "run":
            return cmd_run(cfg)
        return cmd_convergence(cfg, args.n)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalAbort as exc:
        print(f"numerical abort: {exc}", file=sys.stderr)
        return EXIT_ABORT
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
