"""Command-line front end.

    qtransfer run --figure fig3 --out ./out
    qtransfer run --scenario custom --config A --initial w1 --delta 0.5
    qtransfer run --figure fig6 --sweep kappa=1:20:20 --jobs 4
    qtransfer run --config-file ./out/manifest.json

Exit status: 0 on success, 1 on usage errors, 2 on numeric or regime errors.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, fields
from pathlib import Path

import numpy as np

from . import __version__
from .dynamics import DEFAULT_T_MAX, DEFAULT_T_POINTS
from .hilbert import STATE_NAMES
from .model import CouplingConfig, SystemParams
from .scenarios import PRESETS, ScenarioSpec, preset, run_scenario

log = logging.getLogger("qtransfer")

PARAM_KEYS = ("g_a", "g_b", "delta", "kappa", "epsilon_phase", "Gamma", "gamma")


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    scenario: str = "custom"
    config: str | None = None
    initial: str | None = None
    g_a: float | None = None
    g_b: float | None = None
    delta: float | None = None
    kappa: float | None = None
    epsilon_phase: float | None = None
    Gamma: float | None = None
    gamma: float | None = None
    t_max: float | None = None
    t_points: int | None = None
    output: str = "."
    format: str = "csv"
    sweep: str | None = None
    jobs: int = 1
    g_scale: float = 1.0

    @classmethod
    def from_mapping(cls, data: dict) -> "RunConfig":
        if "tool" in data and "config" in data and isinstance(data["config"], dict):
            data = data["config"]  # a manifest
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise UsageError(f"unknown config keys: {', '.join(sorted(unknown))}")
        return cls(**data)

    def validate(self):
        if self.scenario != "custom" and self.scenario not in PRESETS:
            raise UsageError(f"unknown scenario {self.scenario!r}")
        if self.format not in ("csv", "json"):
            raise UsageError(f"format must be csv or json, got {self.format!r}")
        if self.t_points is not None and int(self.t_points) < 2:
            raise UsageError("t_points must be >= 2")
        if self.t_max is not None and not float(self.t_max) > 0:
            raise UsageError("t_max must be > 0")
        if int(self.jobs) < 1:
            raise UsageError("jobs must be >= 1")
        if not (math.isfinite(float(self.g_scale)) and float(self.g_scale) > 0):
            raise UsageError("g_scale must be > 0")
        for k in PARAM_KEYS + ("t_max",):
            v = getattr(self, k)
            if v is not None and not math.isfinite(float(v)):
                raise UsageError(f"{k} must be finite")
        if self.scenario == "custom":
            if self.config is None or self.initial is None:
                raise UsageError("custom scenarios need --config and --initial")
            if self.initial not in STATE_NAMES:
                raise UsageError(f"unknown initial state {self.initial!r}")
            try:
                CouplingConfig.parse(self.config)
            except ValueError as exc:
                raise UsageError(str(exc)) from None


def parse_sweep(text: str) -> tuple[str, np.ndarray]:
    try:
        key, rng = text.split("=", 1)
        start, stop, num = rng.split(":")
        values = np.linspace(float(start), float(stop), int(num))
    except ValueError:
        raise UsageError(f"sweep must look like key=start:stop:num, got {text!r}") from None
    key = key.strip().replace("-", "_")
    if key not in PARAM_KEYS:
        raise UsageError(f"cannot sweep {key!r}; choose one of {PARAM_KEYS}")
    if values.size < 1:
        raise UsageError("sweep needs at least one point")
    return key, values


def _override(params: SystemParams, cfg: RunConfig, extra: dict) -> SystemParams:
    changes = {k: float(getattr(cfg, k)) for k in PARAM_KEYS if k != "epsilon_phase" and getattr(cfg, k) is not None}
    phase = cfg.epsilon_phase
    changes.update({k: v for k, v in extra.items() if k != "epsilon_phase"})
    phase = extra.get("epsilon_phase", phase)
    if phase is not None:
        changes["epsilon"] = complex(np.exp(1j * float(phase)))
    return params.replace(**changes)


def resolve_spec(cfg: RunConfig, extra: dict | None = None) -> ScenarioSpec:
    """ScenarioSpec from a run configuration; explicit values override presets."""
    extra = extra or {}
    if cfg.scenario == "custom":
        spec = ScenarioSpec("custom", CouplingConfig.parse(cfg.config), cfg.initial)
    else:
        spec = preset(cfg.scenario)
        if cfg.initial is not None:
            spec = spec.replace(initial=cfg.initial)
    spec = spec.replace(
        params=_override(spec.params, cfg, extra),
        variants=tuple((lab, _override(p, cfg, extra)) for lab, p in spec.variants),
    )
    if cfg.t_max is not None:
        spec = spec.replace(t_max=float(cfg.t_max))
    if cfg.t_points is not None:
        spec = spec.replace(t_points=int(cfg.t_points))
    return spec


def _fmt(x) -> str:
    return format(float(x), ".17g")


def write_table(table: dict, path: Path, fmt: str, g_scale: float = 1.0):
    names = list(table)
    cols = [np.asarray(table[n], dtype=float) for n in names]
    t_cols = {i for i, n in enumerate(names) if n == "t"}
    cols = [c / g_scale if i in t_cols else c for i, c in enumerate(cols)]
    rows = np.stack(cols, axis=1)
    if fmt == "csv":
        with open(path, "w", newline="", encoding="ascii") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(names)
            for r in rows:
                w.writerow([_fmt(x) for x in r])
    else:
        records = [{n: (None if math.isnan(x) else float(x)) for n, x in zip(names, r)} for r in rows]
        with open(path, "w", encoding="ascii") as fh:
            json.dump(records, fh, indent=1)
            fh.write("\n")


def spec_record(spec: ScenarioSpec) -> dict:
    def params(p: SystemParams) -> dict:
        d = asdict(p)
        eps = d.pop("epsilon")
        d["epsilon_phase"] = float(np.angle(eps))
        return d

    rec = {
        "figure_id": spec.figure_id,
        "config": spec.config.value,
        "initial": spec.initial,
        "params": params(spec.params),
        "t_max": spec.t_max,
        "t_points": spec.t_points,
    }
    if spec.variants:
        rec["variants"] = {lab: params(p) for lab, p in spec.variants}
    return rec


def execute(cfg: RunConfig) -> list[Path]:
    """Run one configuration and write its outputs; returns written paths."""
    cfg.validate()
    out = Path(cfg.output)
    base = cfg.scenario
    ext = cfg.format
    jobs = []
    if cfg.sweep:
        key, values = parse_sweep(cfg.sweep)
        for i, v in enumerate(values):
            jobs.append((out / f"{base}_{key}_{i:03d}.{ext}", resolve_spec(cfg, {key: float(v)}), float(v)))
    else:
        jobs.append((out / f"{base}.{ext}", resolve_spec(cfg), None))

    created = not out.exists()
    out.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    try:
        def work(job):
            path, spec, _ = job
            write_table(run_scenario(spec), path, cfg.format, float(cfg.g_scale))
            return path

        with ThreadPoolExecutor(max_workers=int(cfg.jobs)) as pool:
            futures = [pool.submit(work, j) for j in jobs]
            errors = []
            for f in futures:
                try:
                    written.append(f.result())
                except Exception as exc:  # collected so every worker finishes first
                    errors.append(exc)
            if errors:
                raise errors[0]
        if cfg.sweep:
            key, _ = parse_sweep(cfg.sweep)
            index = out / f"{base}_sweep_index.json"
            entries = [{"index": i, key: v, "file": p.name} for i, (p, _, v) in enumerate(jobs)]
            index.write_text(json.dumps(entries, indent=1) + "\n", encoding="ascii")
            written.append(index)
        manifest = out / "manifest.json"
        manifest.write_text(
            json.dumps(
                {
                    "tool": "qtransfer",
                    "version": __version__,
                    "config": asdict(cfg),
                    "scenarios": [dict(spec_record(s), file=p.name) for p, s, _ in jobs],
                },
                indent=1,
            )
            + "\n",
            encoding="ascii",
        )
        written.append(manifest)
    except BaseException:
        for p in written + [j[0] for j in jobs]:
            p.unlink(missing_ok=True)
        if created and not any(out.iterdir()):
            out.rmdir()
        raise
    return written


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="qtransfer", description="State and entanglement transfer in two-atom, two-cavity systems.")
    parser.add_argument("--version", action="version", version=f"qtransfer {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    run = sub.add_parser("run", help="run a figure preset or a custom scenario", argument_default=argparse.SUPPRESS)
    what = run.add_mutually_exclusive_group()
    what.add_argument("--figure", dest="scenario", choices=sorted(PRESETS))
    what.add_argument("--scenario", dest="scenario", help="'custom' or a figure id")
    run.add_argument("--config-file", dest="config_file", help="JSON run configuration (a manifest also works)")
    run.add_argument("--config", help="coupling configuration: A (atom-mediated) or B (photon-mediated)")
    run.add_argument("--initial", help="initial state name")
    run.add_argument("--g-a", dest="g_a", type=float)
    run.add_argument("--g-b", dest="g_b", type=float)
    run.add_argument("--delta", type=float)
    run.add_argument("--kappa", type=float)
    run.add_argument("--epsilon-phase", dest="epsilon_phase", type=float, help="dipole phase k R_AB in radians")
    run.add_argument("--Gamma", dest="Gamma", type=float, help="atomic decay rate")
    run.add_argument("--gamma", dest="gamma", type=float, help="cavity leak rate")
    run.add_argument("--t-max", dest="t_max", type=float)
    run.add_argument("--t-points", dest="t_points", type=int)
    run.add_argument("--out", dest="output")
    run.add_argument("--format", choices=("csv", "json"))
    run.add_argument("--sweep", help="key=start:stop:num")
    run.add_argument("--jobs", type=int)
    run.add_argument("--g-scale", dest="g_scale", type=float, help="divide output time columns by this rate")
    run.add_argument("-v", "--verbose", action="store_true")
    return parser


def main(argv=None) -> int:
    try:
        args = vars(build_parser().parse_args(argv))
        args.pop("command")
        verbose = args.pop("verbose", False)
        logging.basicConfig(level=logging.INFO if verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
        data = {}
        if "config_file" in args:
            path = args.pop("config_file")
            try:
                data = json.loads(Path(path).read_text())
            except (OSError, json.JSONDecodeError) as exc:
                raise UsageError(f"cannot read config file {path}: {exc}") from None
            if not isinstance(data, dict):
                raise UsageError("config file must hold a JSON object")
        cfg = RunConfig.from_mapping(data)
        for k, v in args.items():
            setattr(cfg, k, v)
        written = execute(cfg)
    except UsageError as exc:
        print(f"qtransfer: error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"qtransfer: error: {' '.join(str(exc).split())}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"qtransfer: error: {exc}", file=sys.stderr)
        return 1
    for p in written:
        log.info("wrote %s", p)
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
