"""
``ptlat <command> --config <path> [--out <dir>] [--threads N]``

Each command writes ``<command>.csv`` (per-point data) and ``<command>.json``
(summary plus the fully resolved config) into the output directory; ``plot``
turns an existing CSV into ``<stem>.svg``. Failures exit nonzero and leave a
machine-readable ``error.json``.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import check_pt, edge_weight, find_zero_modes, ipr, is_spectrum_real, majorana_form, max_imag, pt_deviation
from .config import ConfigError, RunConfig, load_config
from .eig import eigendecompose
from .model import ModelValidationError, build_hamiltonian
from .sweep import (
    AllPhi,
    AtFixedPhi,
    SweepPointError,
    Thresholds,
    critical_gamma,
    default_phi_grid,
    localization_scan,
    n_scan,
    phase_diagram,
    sweep_phi,
    transition_phis,
)

CSV_COLUMNS = {
    "spectrum": ["index", "re", "im", "residual", "ipr", "edge_weight"],
    "sweep-phi": ["phi", "index", "re", "im"],
    "critical-gamma": ["step", "gamma", "real"],
    "phase-diagram": ["phi", "gamma", "max_imag", "zero_modes"],
    "zero-modes": ["index", "re", "im", "ipr", "edge_weight"],
    "check-pt": ["N", "pt_symmetric", "deviation"],
    "majorana": ["first_species", "first_site", "second_species", "second_site", "coefficient", "sign"],
    "n-scan": ["N", "real", "max_imag"],
    "localization": ["V", "mean_ipr"],
}
COMMANDS = list(CSV_COLUMNS) + ["plot"]


class CommandError(RuntimeError):
    pass


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    return str(x)


def _write_csv(path: Path, columns: list[str], rows) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            w.writerow([_fmt(x) for x in row])


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (complex, np.complexfloating)):
        return {"re": _jsonable(x.real), "im": _jsonable(x.imag)}
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        return float(x) if math.isfinite(x) else None
    return x


def _write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(_jsonable(payload), indent=2, allow_nan=False) + "\n", encoding="utf-8")


def _thresholds(cfg: RunConfig) -> Thresholds:
    return Thresholds(cfg["eps_real"], cfg["eps_zero"], cfg["w_min"], cfg["fraction"])


def _sweep_grid(cfg: RunConfig) -> np.ndarray:
    return np.linspace(cfg["phi_min"], cfg["phi_max"], cfg["sweep_points"])


# --------------------------------------------------------------------------
# commands: each returns (csv rows, json result)


def _cmd_spectrum(cfg, threads):
    h = build_hamiltonian(cfg.spec)
    s = eigendecompose(h)
    rows = [
        (k + 1, e.real, e.imag, s.residuals[k], ipr(s.vector(k)), edge_weight(s.vector(k), cfg["fraction"]))
        for k, e in enumerate(s.eigenvalues)
    ]
    result = {
        "N": len(s),
        "max_imag": max_imag(s),
        "real": is_spectrum_real(s, cfg["eps_real"]),
        "max_residual": float(s.residuals.max()),
        "trace": complex(np.trace(h)),
        "eigenvalue_sum": complex(np.sum(s.eigenvalues)),
    }
    return rows, result


def _cmd_sweep_phi(cfg, threads):
    r = sweep_phi(cfg.spec, _sweep_grid(cfg), _thresholds(cfg), threads)
    rows = []
    for phi, rec in zip(r.grid, r.records):
        rows.extend((phi, k + 1, e.real, e.imag) for k, e in enumerate(rec.eigenvalues))
    tr = transition_phis(r)
    result = {
        "points": [
            {"phi": phi, "max_imag": rec.max_imag, "zero_modes": rec.zero_modes, "bulk_gap": rec.bulk_gap}
            for phi, rec in zip(r.grid, r.records)
        ],
        "all_real": bool(np.all(r.max_imag <= cfg["eps_real"])),
        "transitions": {"intervals": tr.intervals, "counts": tr.counts, "gapless": tr.gapless, "constant": tr.constant},
    }
    return rows, result


def _policy(cfg):
    if cfg["policy"] == "fixed_phi":
        return AtFixedPhi(cfg.spec.phi)
    return AllPhi(cfg["phi_points"])


def _cmd_critical_gamma(cfg, threads):
    r = critical_gamma(cfg.spec, _policy(cfg), cfg["gamma_max"], cfg["tol_bisect"], cfg["eps_real"], threads)
    rows = [(i + 1, g, ok) for i, (g, ok) in enumerate(r.trace)]
    result = {
        "gamma_c": r.gamma_c,
        "bracket": list(r.bracket),
        "tolerance": r.tolerance,
        "iterations": r.iterations,
        "status": r.status,
        **r.policy.describe(),
    }
    if r.status == "no_breaking":
        result["message"] = f"no breaking below gamma_max={cfg['gamma_max']}"
    return rows, result


def _cmd_phase_diagram(cfg, threads):
    gammas = np.linspace(cfg["gamma_min"], cfg["gamma_max"], cfg["gamma_points"])
    r = phase_diagram(cfg.spec, _sweep_grid(cfg), gammas, _thresholds(cfg), threads)
    rows = [(rec.point["phi"], rec.point["gamma"], rec.max_imag, rec.zero_modes) for rec in r.records]
    real = r.max_imag <= cfg["eps_real"]
    result = {"cells": int(real.size), "real_cells": int(real.sum()), "shape": list(r.shape)}
    return rows, result


def _cmd_zero_modes(cfg, threads):
    s = eigendecompose(build_hamiltonian(cfg.spec))
    rep = find_zero_modes(s, cfg["eps_zero"], cfg["w_min"], cfg["fraction"])
    rows = [(m.index + 1, m.energy.real, m.energy.imag, m.ipr, m.edge_weight) for m in rep.zero_modes]
    result = {
        "count": rep.count,
        "near_zero": rep.near_zero,
        "bulk_gap": rep.bulk_gap,
        "eps_zero": rep.eps_zero,
        "w_min": rep.w_min,
        "fraction": rep.fraction,
    }
    return rows, result


def _cmd_check_pt(cfg, threads):
    h = build_hamiltonian(cfg.spec)
    ok = check_pt(h)
    dev = pt_deviation(h)
    return [(cfg.spec.N, ok, dev)], {"pt_symmetric": ok, "deviation": dev, "eps": 1e-12 * float(np.linalg.norm(h))}


def _cmd_majorana(cfg, threads):
    try:
        m = majorana_form(cfg.spec)
    except ValueError as exc:
        raise CommandError(str(exc)) from None
    rows = [
        (t.first[0], t.first[1], t.second[0], t.second[1], t.coefficient.real, t.sign)
        for t in m.coupling_terms
    ]
    result = {
        "delta_plus": m.delta_plus,
        "delta_minus": m.delta_minus,
        "coupling_terms": [str(t) for t in m.coupling_terms],
        "touches_unpaired": m.touches_unpaired,
        "z2_nontrivial": m.z2_nontrivial,
    }
    return rows, result


def _cmd_n_scan(cfg, threads):
    if not cfg["n_values"]:
        raise ConfigError("n_values", "n-scan needs a nonempty list")
    entries = n_scan(
        cfg.spec, cfg["n_values"], cfg["gamma_probe"], default_phi_grid(cfg["phi_points"]), cfg["eps_real"], threads
    )
    rows = [(e.N, e.real, e.max_imag) for e in entries]
    return rows, {"real_N": [e.N for e in entries if e.real], "complex_N": [e.N for e in entries if not e.real]}


def _cmd_localization(cfg, threads):
    scan = localization_scan(cfg.spec, np.linspace(cfg["v_min"], cfg["v_max"], cfg["v_points"]), threads)
    rows = list(zip(scan.v_grid, scan.mean_ipr))
    result = {"transition_estimate": scan.transition if len(scan.v_grid) > 1 else None}
    return rows, result


_HANDLERS = {
    "spectrum": _cmd_spectrum,
    "sweep-phi": _cmd_sweep_phi,
    "critical-gamma": _cmd_critical_gamma,
    "phase-diagram": _cmd_phase_diagram,
    "zero-modes": _cmd_zero_modes,
    "check-pt": _cmd_check_pt,
    "majorana": _cmd_majorana,
    "n-scan": _cmd_n_scan,
    "localization": _cmd_localization,
}


def _plot(cfg: RunConfig, out: Path) -> dict:
    from .plot import render_csv

    if not cfg["input"]:
        raise ConfigError("input", "plot needs the path of a CSV written by another command")
    src = Path(cfg["input"])
    if not src.is_absolute() and not src.exists():
        src = out / src
    if not src.exists():
        raise CommandError(f"input CSV not found: {cfg['input']}")
    target = out / (src.stem + ".svg")
    render_csv(src, target, title=cfg["title"])
    return {"input": str(src), "output": str(target)}


def run(command: str, cfg: RunConfig, out: Path, threads: int | None = None) -> dict:
    """Execute one command and write its files; returns the JSON payload."""
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    if command == "plot":
        result = _plot(cfg, out)
    elif command in _HANDLERS:
        rows, result = _HANDLERS[command](cfg, threads)
        _write_csv(out / f"{command}.csv", CSV_COLUMNS[command], rows)
    else:
        raise CommandError(f"unknown command {command!r}")
    payload = {"config": cfg.echo(), "result": result, "version": __version__}
    _write_json(out / f"{command}.json", payload)
    return payload


def _epilog() -> str:
    lines = ["CSV columns (fixed order; indices are 1-based):"]
    lines += [f"  {cmd:<15} {','.join(cols)}" for cmd, cols in CSV_COLUMNS.items()]
    lines.append("Floats are written with 17 significant digits.")
    return "\n".join(lines)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="ptlat",
        description="Spectra, PT thresholds and edge states of non-Hermitian Aubry-Andre chains.",
        epilog=_epilog(),
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", required=True, help="TOML config, or a JSON summary written by a previous run")
    p.add_argument("--out", default=".", help="output directory (default: current directory)")
    p.add_argument("--threads", type=int, default=1, help="worker threads for sweeps (default: 1)")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    return p


def _fail(out: Path, kind: str, message: str, code: int, key: str | None = None) -> int:
    err = {"error": {"type": kind, "message": message}, "version": __version__}
    if key is not None:
        err["error"]["key"] = key
    text = json.dumps(err)
    print(text, file=sys.stderr)
    try:
        out.mkdir(parents=True, exist_ok=True)
        (out / "error.json").write_text(text + "\n", encoding="utf-8")
    except OSError:
        pass
    return code


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    out = Path(args.out)
    if args.threads < 1:
        return _fail(out, "usage", "--threads must be >= 1", 2)
    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        return _fail(out, "config", str(exc), 2, exc.key)
    except OSError as exc:
        return _fail(out, "config", f"cannot read config: {exc}", 2)
    try:
        run(args.command, cfg, out, args.threads)
    except ConfigError as exc:
        return _fail(out, "config", str(exc), 2, exc.key)
    except (CommandError, ModelValidationError, SweepPointError) as exc:
        return _fail(out, type(exc).__name__, str(exc), 1)
    except RuntimeError as exc:
        return _fail(out, type(exc).__name__, str(exc), 1)
    return 0


if __name__ == "__main__":
    sys.exit(main())
