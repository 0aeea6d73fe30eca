"""``qlandscape`` command-line front end.

Exit codes: 0 success, 2 config or validation error, 3 data-file error.
Verdicts are part of the payload and never change the exit code.

Without ``--out`` the main result goes to stdout. With ``--out DIR`` the
files are written atomically into DIR and the JSON summary is printed.
"""
from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path
from typing import Optional

import numpy as np

from .config import TaskConfig, load_config, parse_number
from .dynamics import ControlGrid, bloch_path
from .errors import ConfigError, DataFileError, QLandscapeError
from .landscape import classify_critical_point
from .optimizer import multistart
from .reporting import csv_text, json_text, write_csv, write_json
from .theorems import check_all, theorem2_report

EXIT_OK, EXIT_CONFIG, EXIT_DATA = 0, 2, 3


def read_control(path, n: int) -> np.ndarray:
    """One control value per line; blank lines and ``#`` comments are skipped."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise DataFileError(f"cannot read control file {path}: {exc}") from None
    values = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            x = float(line)
        except ValueError:
            raise DataFileError(f"{path}:{lineno}: not a number: {line!r}") from None
        if not math.isfinite(x):
            raise DataFileError(f"{path}:{lineno}: non-finite value")
        values.append(x)
    if not values:
        raise DataFileError(f"control file {path} is empty")
    if len(values) != n:
        raise DataFileError(f"control file has {len(values)} values, grid needs n={n}")
    return np.array(values)


def _emit_csv(out: Optional[Path], name: str, header, rows, comments=()) -> Optional[str]:
    if out is None:
        return csv_text(header, rows, comments)
    write_csv(out / name, header, rows, comments)
    return None


def cmd_simulate(cfg: TaskConfig, control: Optional[str], out: Optional[Path]) -> str:
    task = cfg.task()
    f = np.zeros(cfg.n) if control is None else read_control(control, cfg.n)
    grid = ControlGrid(task.T, f)
    path = bloch_path(task, grid)
    J = 0.5 * (task.tr_a + path @ task.a)
    rows = [(t, *r, j) for t, r, j in zip(grid.nodes(), path, J)]
    header = ["t", "r_x", "r_y", "r_z", "J_running"]
    text = _emit_csv(out, "trajectory.csv", header, rows)
    if text is not None:
        return text
    return json_text({"command": "simulate", "n": cfg.n, "T": task.T,
                      "J_final": float(J[-1]), "files": ["trajectory.csv"]})


def cmd_classify(cfg: TaskConfig, out: Optional[Path]) -> str:
    rep = classify_critical_point(cfg.task(), n=cfg.n, tol=cfg.critical_tol)
    payload = rep.to_dict()
    if out is not None:
        write_json(out / "classify.json", payload)
        write_csv(out / "spectrum.csv", ["index", "eigenvalue"], enumerate(np.sort(rep.spectrum)))
    return json_text(payload)


def cmd_check_theorems(cfg: TaskConfig, out: Optional[Path]) -> str:
    reports = [r.to_dict() for r in check_all(cfg.task(), n=cfg.n, tol=cfg.critical_tol)]
    if out is not None:
        write_json(out / "theorems.json", reports)
    return json_text(reports)


def scan_rows(cfg: TaskConfig, t_min: float, t_max: float, steps: int) -> list[tuple]:
    if not (0 < t_min < t_max) or not math.isfinite(t_max):
        raise ConfigError(f"scan range needs 0 < T_min < T_max, got [{t_min}, {t_max}]")
    if steps < 2:
        raise ConfigError("scan needs steps >= 2")
    rows = []
    for T in np.linspace(t_min, t_max, steps):
        task = cfg.task(float(T))
        rep = classify_critical_point(task, n=cfg.n, tol=cfg.critical_tol)
        rows.append((float(T), rep.verdict, rep.min_eig, rep.max_eig, rep.J0, rep.J_global,
                     theorem2_report(task).holds))
    return rows


def cmd_scan_t(cfg: TaskConfig, t_min, t_max, steps, out: Optional[Path]) -> str:
    t_min = cfg.scan.get("t_min") if t_min is None else t_min
    t_max = cfg.scan.get("t_max") if t_max is None else t_max
    steps = cfg.scan.get("steps") if steps is None else steps
    if t_min is None or t_max is None or steps is None:
        raise ConfigError("scan-t needs --t-min, --t-max and --steps (or a [scan] section)")
    rows = scan_rows(cfg, float(t_min), float(t_max), int(steps))
    header = ["T", "verdict", "min_eig", "max_eig", "J0", "J_global", "theorem2_holds"]
    text = _emit_csv(out, "scan.csv", header, rows)
    if text is not None:
        return text
    return json_text({"command": "scan-t", "steps": len(rows), "files": ["scan.csv"]})


def cmd_optimize(cfg: TaskConfig, out: Optional[Path]) -> str:
    ocfg = cfg.optimizer_config()
    survey = multistart(cfg.task(), ocfg, cfg.n)
    payload = survey.to_dict()
    payload["config"] = {k: getattr(ocfg, k) for k in ocfg.__dataclass_fields__}
    payload["n"] = cfg.n
    if out is not None:
        write_json(out / "optimize.json", payload)
        rows = [(r.seed, i, J) for r in survey.runs for i, J in enumerate(r.J_trace)]
        write_csv(out / "traces.csv", ["seed", "iteration", "J"], rows)
    return json_text(payload)


def _number(text: str) -> float:
    try:
        return parse_number(text)
    except ConfigError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qlandscape", description="Control-landscape analysis of a driven qubit.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="FILE", help="INI-style task config")
    common.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                        help="override a config field, e.g. task.T=0.6*pi (repeatable)")
    common.add_argument("--out", metavar="DIR", help="write report files into this directory")
    sub = p.add_subparsers(dest="command", required=True)
    sim = sub.add_parser("simulate", parents=[common], help="Bloch trajectory CSV")
    sim.add_argument("--control", metavar="FILE", help="control values, one per line (default f=0)")
    sub.add_parser("classify", parents=[common], help="classify the zero control")
    sub.add_parser("check-theorems", parents=[common], help="theorem hypothesis reports")
    scan = sub.add_parser("scan-t", parents=[common], help="classification over a range of T")
    scan.add_argument("--t-min", type=_number, help="accepts expressions such as 0.05*pi")
    scan.add_argument("--t-max", type=_number)
    scan.add_argument("--steps", type=int)
    sub.add_parser("optimize", parents=[common], help="multistart gradient ascent survey")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    try:
        cfg = load_config(args.config, args.overrides)
        out = Path(args.out) if args.out else None
        if args.command == "simulate":
            text = cmd_simulate(cfg, args.control, out)
        elif args.command == "classify":
            text = cmd_classify(cfg, out)
        elif args.command == "check-theorems":
            text = cmd_check_theorems(cfg, out)
        elif args.command == "scan-t":
            text = cmd_scan_t(cfg, args.t_min, args.t_max, args.steps, out)
        else:
            text = cmd_optimize(cfg, out)
    except DataFileError as exc:
        print(f"qlandscape: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except QLandscapeError as exc:
        print(f"qlandscape: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    sys.stdout.write(text)
    return EXIT_OK


def run():
    sys.exit(main())


if __name__ == "__main__":
    run()
