"""Batch command-line driver.

Every command reads a JSON experiment file (``--config``), writes CSV/JSON
outputs plus ``manifest.json`` into ``--out``, and validates the files it
wrote before exiting.

Exit codes: 0 success, 2 invalid spec or parameters, 3 resource guard,
4 verification failure, 5 estimate dominated by censored samples.

CSV schemas (one observation per row):
  paths     <path>.csv      step, energy, is_saddle
            paths.csv       path, source, computed_max, printed_max, difference, length
  enumerate shapes.csv      N, area, winding, min_perimeter, minimizer_count, classes
  bruteforce histogram.csv  energy, count
            levels.csv      state, energy, stability_level
  simulate  samples.csv     replica, beta, steps, censored, gate_tag, saddle_max
  verify    acceptance.csv  criterion, passed, seconds, summary
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import platform
import sys
import time
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from .lattice import InvalidSpec, ModelSpec, Regime

EXIT_OK, EXIT_SPEC, EXIT_GUARD, EXIT_VERIFY, EXIT_CENSORED = 0, 2, 3, 4, 5
OUT_ENV = "HIDDEN_ISING_OUT"

SCHEMAS = {
    "path": ["step", "energy", "is_saddle"],
    "paths": ["path", "source", "computed_max", "printed_max", "difference", "length"],
    "shapes": ["N", "area", "winding", "min_perimeter", "minimizer_count", "classes"],
    "histogram": ["energy", "count"],
    "levels": ["state", "energy", "stability_level"],
    "samples": ["replica", "beta", "steps", "censored", "gate_tag", "saddle_max"],
    "acceptance": ["criterion", "passed", "seconds", "summary"],
}


class CliError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


@dataclass
class ExperimentConfig:
    spec: ModelSpec | None
    params: dict = field(default_factory=dict)
    seed: int | None = None

    @classmethod
    def load(cls, path: str | None, seed_flag: int | None, needs_spec: bool = True) -> "ExperimentConfig":
        data: dict = {}
        if path:
            try:
                data = json.loads(Path(path).read_text())
            except (OSError, json.JSONDecodeError) as exc:
                raise CliError(EXIT_SPEC, f"cannot read config {path}: {exc}") from exc
        spec = None
        if "spec" in data:
            try:
                spec = ModelSpec.from_dict(data["spec"])
            except (InvalidSpec, KeyError, TypeError, ValueError) as exc:
                raise CliError(EXIT_SPEC, f"invalid spec: {exc}") from exc
        elif needs_spec:
            raise CliError(EXIT_SPEC, "config has no 'spec' entry")
        seed = seed_flag if seed_flag is not None else data.get("seed")
        params = {k: v for k, v in data.items() if k not in ("spec", "seed")}
        for key, val in params.items():
            vals = val if isinstance(val, list) else [val]
            if any(isinstance(v, (int, float)) and not isinstance(v, bool) and v <= 0 for v in vals):
                raise CliError(EXIT_SPEC, f"parameter {key} must be positive")
        if seed is not None and (not isinstance(seed, int) or seed < 0 or seed >= 1 << 64):
            raise CliError(EXIT_SPEC, "seed must be an unsigned 64-bit integer")
        return cls(spec, params, seed)


# -- output helpers -----------------------------------------------------------------------------
class Outputs:
    def __init__(self, out_dir: Path):
        self.dir = out_dir
        self.dir.mkdir(parents=True, exist_ok=True)
        self.files: dict[str, str] = {}  # file name -> schema name or "json"

    def csv(self, name: str, schema: str, rows: list[dict]) -> None:
        with open(self.dir / name, "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=SCHEMAS[schema], lineterminator="\n")
            w.writeheader()
            for row in rows:
                w.writerow(row)
        self.files[name] = schema

    def json(self, name: str, obj) -> None:
        (self.dir / name).write_text(json.dumps(obj, indent=2, sort_keys=True, default=str) + "\n")
        self.files[name] = "json"

    def validate(self) -> None:
        for name, schema in self.files.items():
            path = self.dir / name
            if schema == "json":
                json.loads(path.read_text())
                continue
            with open(path, newline="") as fh:
                reader = csv.reader(fh)
                header = next(reader)
                if header != SCHEMAS[schema]:
                    raise RuntimeError(f"{name}: header {header} does not match schema {schema}")
                for row in reader:
                    if len(row) != len(header):
                        raise RuntimeError(f"{name}: row width {len(row)} != {len(header)}")


def _versions() -> dict:
    import numba
    import numpy
    import scipy

    from . import __version__

    return {
        "python": platform.python_version(),
        "numpy": numpy.__version__,
        "scipy": scipy.__version__,
        "numba": numba.__version__,
        "hidden_ising": __version__,
    }


def _write_manifest(out: Outputs, command: str, cfg: ExperimentConfig, started: float, status: int) -> None:
    manifest = {
        "command": command,
        "spec": cfg.spec.to_dict() if cfg.spec else None,
        "seed": cfg.seed,
        "params": cfg.params,
        "versions": _versions(),
        "wall_seconds": round(time.time() - started, 3),
        "timestamp": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
        "exit_code": status,
        "outputs": sorted(out.files),
    }
    (out.dir / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True, default=str) + "\n")


# -- commands ------------------------------------------------------------------------------------
def _states(configs) -> list[dict]:
    return [{"plus_count": c.plus_count, "energy": str(c.energy()), "rle": c.to_rle()} for c in configs]


def cmd_analyze(cfg: ExperimentConfig, out: Outputs, args) -> int:
    from .paths import gamma_star, gate_family
    from .recurrence_classifier import metastable_states, stable_states

    spec = cfg.spec
    if spec.regime is Regime.Unsupported:
        raise CliError(EXIT_SPEC, f"unsupported regime: {'; '.join(spec.assumption_violations()) or 'alpha in (n, m+1)'}")
    gs = gamma_star(spec)
    stable = stable_states(spec)
    meta = metastable_states(spec)
    report = {
        "spec": spec.to_dict(),
        "regime": spec.regime.value,
        "alpha_star": None if spec.alpha_star is None else str(spec.alpha_star),
        "stable": {"count": len(stable), "energy": str(min(c.energy() for c in stable)), "states": _states(stable)},
        "metastable": {"count": len(meta), "states": _states(meta)},
        "gamma_star": {
            "height": str(gs.height),
            "barrier_from": {k: str(v) for k, v in gs.barrier_from.items()},
            "path_barrier_from": {k: str(v) for k, v in gs.path_barrier_from.items()},
            "reference_paths": gs.reference_paths,
            "discrepancies": gs.discrepancies,
        },
        "gates": [
            {
                "start": row.start,
                "target": row.target,
                "families": [{"tag": f.tag, "size": len(f.configs), "note": f.note} for f in row.families],
            }
            for row in gate_family(spec)
        ],
    }
    out.json("analyze.json", report)
    return EXIT_OK


def cmd_paths(cfg: ExperimentConfig, out: Outputs, args) -> int:
    from .paths import PATH_NAMES, ASCII_ALIASES, build_reference_path, path_is_valid_for, printed_forms

    spec = cfg.spec
    ascii_of = {v: k for k, v in ASCII_ALIASES.items()}
    wanted = cfg.params.get("paths") or [p for p in PATH_NAMES if path_is_valid_for(spec, p)]
    printed = {}
    for f in printed_forms(spec):
        printed.setdefault(f.path, f)
    rows = []
    for name in wanted:
        path = build_reference_path(spec, name)
        path.validate()
        form = printed.get(path.name)
        out.csv(f"path_{ascii_of.get(path.name, path.name)}.csv", "path", path.to_csv_rows())
        rows.append(
            {
                "path": ascii_of.get(path.name, path.name),
                "source": form.source if form else "",
                "computed_max": str(path.max_elevation),
                "printed_max": str(form.value) if form else "",
                "difference": str(path.max_elevation - form.value) if form else "",
                "length": len(path),
            }
        )
    out.csv("paths.csv", "paths", rows)
    return EXIT_OK


def cmd_enumerate(cfg: ExperimentConfig, out: Outputs, args) -> int:
    from .polyomino import DEFAULT_AREA_CAP, MAX_ENUM_SIDE, ResourceGuard, enumerate_levels, minimal_perimeter_shapes

    sides = cfg.params.get("sides") or ([cfg.spec.N] if cfg.spec else [4, 6, 8])
    max_area = int(cfg.params.get("max_area", 12))
    cap = max_area if args.guard_override else DEFAULT_AREA_CAP
    if any(n > MAX_ENUM_SIDE for n in sides):
        raise CliError(EXIT_GUARD, f"torus side above {MAX_ENUM_SIDE} is not supported by the bit-mask enumerator")
    rows = []
    try:
        for N in sides:
            for area, masks in enumerate_levels(max_area, N, area_cap=cap):
                for wind in ([False, True] if area >= N else [False]):
                    res = minimal_perimeter_shapes(area, N, wind, masks=masks)
                    rows.append(res.summary_row())
    except ResourceGuard as exc:
        raise CliError(EXIT_GUARD, str(exc)) from exc
    out.csv("shapes.csv", "shapes", rows)
    return EXIT_OK


def cmd_bruteforce(cfg: ExperimentConfig, out: Outputs, args) -> int:
    from .landscape import DEFAULT_SITE_GUARD, GuardExceeded, Landscape, landscape_report

    spec = cfg.spec
    guard = 20 if args.guard_override else DEFAULT_SITE_GUARD
    try:
        land = Landscape(spec, guard=guard)
    except GuardExceeded as exc:
        raise CliError(EXIT_GUARD, str(exc)) from exc
    report = landscape_report(land)
    out.json("landscape.json", report.to_dict())
    out.csv("histogram.csv", "histogram", [{"energy": str(e), "count": c} for e, c in report.histogram()])
    rows = []
    for state in report.metastable_set[:1000] + report.stable_set:
        lvl = report.stability_level(state)
        rows.append({"state": state, "energy": str(report.energy(state)), "stability_level": str(lvl)})
    out.csv("levels.csv", "levels", rows)
    return EXIT_OK


def cmd_simulate(cfg: ExperimentConfig, out: Outputs, args) -> int:
    import math

    from .config import SpinConfiguration
    from .dynamics import hitting_samples, write_samples_csv
    from .paths import gamma_star, named_state, regime_transitions, sigma_a_family

    if cfg.seed is None:
        raise CliError(EXIT_SPEC, "simulate needs a seed (--seed or 'seed' in the config)")
    spec = cfg.spec
    betas = cfg.params.get("betas") or [cfg.params.get("beta", 1.0)]
    replicas = int(cfg.params.get("replicas", 100))
    start_name = cfg.params.get("start") or next(iter(regime_transitions(spec)))
    target_desc = regime_transitions(spec).get(start_name, ("sigmaA family", ""))[0]
    targets = sigma_a_family(spec) if target_desc == "sigmaA family" else [named_state(spec, target_desc)]
    start: SpinConfiguration = named_state(spec, start_name)
    barrier = float(gamma_star(spec).barrier_from.get(start_name, 0))
    cap_factor = float(cfg.params.get("cap_factor", 1.0))
    all_samples = []
    summary = []
    status = EXIT_OK
    for j, beta in enumerate(betas):
        cap = int(cfg.params.get("step_cap", cap_factor * math.exp(beta * (barrier + 1))))
        samples = hitting_samples(
            spec, start, targets, beta, replicas, seed=cfg.seed, step_cap=max(cap, 1), workers=args.workers,
            replica_offset=j * replicas,
        )
        censored = sum(s.censored for s in samples)
        done = [s.steps for s in samples if not s.censored]
        summary.append(
            {"beta": beta, "replicas": replicas, "censored": censored, "step_cap": cap,
             "mean_steps": (sum(done) / len(done)) if done else None}
        )
        if censored * 2 > replicas:
            status = EXIT_CENSORED
        all_samples.extend(samples)
    write_samples_csv(out.dir / "samples.csv", all_samples)
    out.files["samples.csv"] = "samples"
    out.json("simulate.json", {"start": start_name, "target": target_desc, "barrier": barrier, "per_beta": summary})
    return status


def cmd_verify(cfg: ExperimentConfig, out: Outputs, args) -> int:
    from .acceptance import CHECKS, run_all

    selected = cfg.params.get("criteria") or args.criteria or list(CHECKS)
    unknown = [c for c in selected if c not in CHECKS]
    if unknown:
        raise CliError(EXIT_SPEC, f"unknown criteria: {unknown}")
    results = run_all(selected)
    for r in results:
        print(r.line())
    out.csv(
        "acceptance.csv", "acceptance",
        [{"criterion": r.tag, "passed": int(r.passed), "seconds": f"{r.seconds:.2f}", "summary": r.summary} for r in results],
    )
    return EXIT_OK if all(r.passed for r in results) else EXIT_VERIFY


COMMANDS = {
    "analyze": (cmd_analyze, True),
    "paths": (cmd_paths, True),
    "enumerate": (cmd_enumerate, False),
    "bruteforce": (cmd_bruteforce, True),
    "simulate": (cmd_simulate, True),
    "verify": (cmd_verify, False),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hidden-ising", description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name, formatter_class=argparse.RawDescriptionHelpFormatter)
        p.add_argument("--config", help="JSON experiment file with a 'spec' object and command parameters")
        p.add_argument("--seed", type=int, help="unsigned 64-bit seed; overrides the config")
        p.add_argument("--workers", type=int, default=1, help="worker threads for replicas")
        p.add_argument("--out", help=f"output directory (default ${OUT_ENV} or ./out/<command>)")
        p.add_argument("--guard-override", action="store_true", help="raise resource guards one step")
        if name == "verify":
            p.add_argument("criteria", nargs="*", help="subset of A1..A9")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    handler, needs_spec = COMMANDS[args.command]
    started = time.time()
    out_dir = Path(args.out or os.environ.get(OUT_ENV) or Path("out") / args.command)
    out = Outputs(out_dir)
    cfg = ExperimentConfig(None)
    try:
        if args.workers < 1:
            raise CliError(EXIT_SPEC, "--workers must be positive")
        cfg = ExperimentConfig.load(args.config, args.seed, needs_spec=needs_spec)
        status = handler(cfg, out, args)
        out.validate()
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        status = exc.code
    _write_manifest(out, args.command, cfg, started, status)
    return status


if __name__ == "__main__":
    sys.exit(main())
