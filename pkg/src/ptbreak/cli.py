"""Command line front end: ``ptbreak sweep|trace|oracle|perturb``.

Every command reads a JSON config (flags override it), validates it fully,
runs, and writes its outputs atomically together with ``manifest.json``.
Exit codes: 0 success, 2 configuration error, 3 numerical integrity failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from . import io as pio
from . import svg
from .ensembles import EnsembleSpec, SpectralNormalization, SymmetryClass, build_coupling, child_stream, sample_h
from .errors import IntegrityError, NumericalError, ParameterError, PTBreakError
from .experiments import (
    SweepConfig,
    default_mu_grid,
    default_t_grid,
    default_path,
    run_sweep,
    trace_levels,
)
from .hamiltonian import SymmetryVariant, build_effective, quantization_residual
from .perturbation import crossing_pairs, quasi_degenerate_mus, scales
from .spectral import eigenvalues

log = logging.getLogger("ptbreak")

EXIT_OK, EXIT_CONFIG, EXIT_INTEGRITY = 0, 2, 3

FULL_SCALE = {"M": 1000, "N": 50}


class ConfigError(ParameterError):
    pass


# -- configuration -------------------------------------------------------------

_COMMON = {
    "class": "orthogonal",
    "variant": "PT",
    "M": 200,
    "N": 20,
    "seed": 0,
    "mu_units": "mu0",
    "window_fraction": 0.25,
    "tolerance": 1e-8,
}

DEFAULTS = {
    "sweep": {
        **_COMMON,
        "realizations": 100,
        "mu_grid": None,
        "t_grid": None,
    },
    "trace": {
        **_COMMON,
        "M": 100,
        "N": 10,
        "path": None,
        "steps": 100,
    },
    "oracle": {
        "class": "orthogonal",
        "M": 60,
        "N": 8,
        "seed": 0,
        "instances": 10,
        "T": 0.7,
        "mu": 0.5,
        "mu_units": "mu0",
        "threshold": 1e-8,
        "off_spectrum_shift": 0.3,
        "off_spectrum_threshold": 1e-3,
        "corrupt_gamma": False,
    },
    "perturb": {
        "classes": ["orthogonal", "unitary"],
        "t_values": [0.01, 0.1, 1.0],
        "M": 200,
        "N": 20,
        "seed": 0,
        "realizations": 20,
        "window_fraction": 0.25,
    },
}


def load_config(command: str, path: str | None, overrides: dict) -> dict:
    """Merge defaults, the JSON document and flag overrides; reject unknown keys."""
    cfg = dict(DEFAULTS[command])
    if path is not None:
        try:
            doc = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        if not isinstance(doc, dict):
            raise ConfigError("config must be a JSON object")
        unknown = sorted(set(doc) - set(cfg))
        if unknown:
            raise ConfigError(f"unknown config key(s) for '{command}': {', '.join(unknown)}")
        cfg.update(doc)
    cfg.update({k: v for k, v in overrides.items() if v is not None and k in cfg})
    _validate(command, cfg)
    return cfg


def _require_int(cfg, key, lo=1):
    v = cfg[key]
    if isinstance(v, bool) or not isinstance(v, int) or v < lo:
        raise ConfigError(f"'{key}' must be an integer >= {lo}, got {v!r}")


def _validate(command, cfg):
    try:
        if "class" in cfg:
            cfg["class"] = SymmetryClass.parse(cfg["class"]).value
        if "variant" in cfg:
            cfg["variant"] = SymmetryVariant.parse(cfg["variant"]).value
        if "classes" in cfg:
            cfg["classes"] = [SymmetryClass.parse(c).value for c in cfg["classes"]]
    except ParameterError as exc:
        raise ConfigError(str(exc)) from exc
    for key in ("M", "N"):
        _require_int(cfg, key)
    if cfg["N"] > cfg["M"]:
        raise ConfigError(f"N={cfg['N']} exceeds M={cfg['M']}")
    _require_int(cfg, "seed", lo=0)
    if cfg["seed"] >= 2**64:
        raise ConfigError("seed must fit in 64 bits")
    if cfg.get("mu_units", "mu0") not in ("mu0", "delta"):
        raise ConfigError(f"mu_units must be 'mu0' or 'delta', got {cfg['mu_units']!r}")
    if command == "sweep":
        _require_int(cfg, "realizations")
        for key in ("mu_grid", "t_grid"):
            if cfg[key] is not None and (not isinstance(cfg[key], list) or not cfg[key]):
                raise ConfigError(f"'{key}' must be a non-empty list of numbers")
    if command == "trace":
        _require_int(cfg, "steps", lo=2)
        if cfg["path"] is not None:
            p = cfg["path"]
            if not isinstance(p, list) or len(p) < 2 or any(
                    not isinstance(w, list) or len(w) != 2 for w in p):
                raise ConfigError("'path' must be a list of at least two [T, mu] waypoints")
    if command == "oracle":
        _require_int(cfg, "instances")
        if not 0 <= cfg["T"] <= 1:
            raise ConfigError("'T' must lie in [0, 1]")
        if cfg["mu"] < 0:
            raise ConfigError("'mu' must be >= 0")
    if command == "perturb":
        _require_int(cfg, "realizations")
        if not cfg["t_values"] or any(not 0 < t <= 1 for t in cfg["t_values"]):
            raise ConfigError("'t_values' must be a non-empty list within (0, 1]")


def _mu_to_mu0_units(values, cfg) -> list:
    """Convert user ``mu`` values to units of ``mu0``."""
    if cfg.get("mu_units", "mu0") == "mu0":
        return [float(v) for v in values]
    # mu0 = sqrt(N) delta / 2 pi
    factor = 2 * math.pi / math.sqrt(cfg["N"])
    return [float(v) * factor for v in values]


# -- commands -----------------------------------------------------------------


def _finish(out: Path, command: str, cfg: dict, files: dict[str, bytes]) -> None:
    files = dict(files)
    man = pio.manifest(command, cfg, files, __version__)
    files["manifest.json"] = pio.json_bytes(man)
    for name, data in files.items():
        pio.write_atomic(out / name, data)


def cmd_sweep(cfg: dict, out: Path, scale: str = "mu0", emit_svg: bool = False) -> int:
    mu_grid = cfg["mu_grid"] if cfg["mu_grid"] is not None else default_mu_grid().tolist()
    t_grid = cfg["t_grid"] if cfg["t_grid"] is not None else default_t_grid().tolist()
    resolved = dict(cfg, mu_grid=[float(x) for x in mu_grid], t_grid=[float(t) for t in t_grid])
    try:
        config = SweepConfig(
            ensemble=EnsembleSpec(cfg["class"], cfg["M"], cfg["N"], cfg["seed"]),
            variant=cfg["variant"],
            mu_grid=_mu_to_mu0_units(mu_grid, cfg),
            t_grid=t_grid,
            realizations=cfg["realizations"],
            window_fraction=cfg["window_fraction"],
            tolerance=cfg["tolerance"],
            master_seed=cfg["seed"],
        )
    except ParameterError as exc:
        raise ConfigError(str(exc)) from exc

    result = run_sweep(config, progress=_progress("sweep"))
    N = config.ensemble.N
    rows = []
    for i, T in enumerate(config.t_grid):
        s = scales(N, T, result.delta0)
        for j, m in enumerate(config.mu_grid):
            cell = result.cells[i][j]
            rows.append([
                cfg["class"], cfg["variant"], T, m * result.mu0, m,
                m * result.mu0 / s.mu0prime, m * result.mu0 / s.muTprime,
                cell.f, cell.stderr, cell.n_levels_counted, cell.n_realizations,
            ])
    header = ["class", "variant", "T", "mu", "mu_over_mu0", "mu_over_mu0prime",
              "mu_over_muTprime", "f", "stderr", "n_levels", "n_realizations"]
    files = {"fractions.csv": pio.csv_bytes(header, rows)}
    if result.diagnostics:
        files["diagnostics.json"] = pio.json_bytes(result.diagnostics)
    if emit_svg:
        factors = [_scale_factor(scale, N, T) for T in config.t_grid]
        files["heatmap.svg"] = svg.heatmap(
            config.mu_grid, config.t_grid, result.f, factors, scale,
            {"class": cfg["class"], "variant": cfg["variant"], "M": cfg["M"], "N": N,
             "realizations": config.realizations},
        ).encode("utf-8")
    _finish(out, "sweep", dict(resolved, scale=scale, svg=emit_svg), files)
    return EXIT_INTEGRITY if result.diagnostics else EXIT_OK


def _scale_factor(scale, N, T):
    s = scales(N, T, 1.0)
    return {"mu0": 1.0, "mu0prime": s.mu0prime / s.mu0, "muTprime": s.muTprime / s.mu0}[scale]


def cmd_trace(cfg: dict, out: Path, emit_svg: bool = False) -> int:
    path = cfg["path"] if cfg["path"] is not None else [list(p) for p in default_path()]
    mus = _mu_to_mu0_units([p[1] for p in path], cfg)
    waypoints = [(float(p[0]), m) for p, m in zip(path, mus)]
    try:
        spec = EnsembleSpec(cfg["class"], cfg["M"], cfg["N"], cfg["seed"])
        trace = trace_levels(spec, cfg["variant"], waypoints, cfg["steps"],
                             tolerance=cfg["tolerance"], window_fraction=cfg["window_fraction"])
    except ParameterError as exc:
        raise ConfigError(str(exc)) from exc

    rows = []
    for s, (stage, T, m) in enumerate(trace.params):
        for q, z in enumerate(trace.trajectories[s]):
            rows.append([s, int(stage), T, m * trace.mu0, q, z.real, z.imag])
    files = {
        "trajectories.csv": pio.csv_bytes(
            ["step", "stage", "T", "mu", "level_id", "re_E", "im_E"], rows),
        "events.csv": pio.csv_bytes(
            ["parameter", "level_id_a", "level_id_b", "re_E"],
            [[e.parameter, e.level_a, e.level_b, e.energy] for e in trace.events]),
    }
    if emit_svg:
        n_stages = len(waypoints) - 1
        coord = _stage_coordinates(len(trace.params), cfg["steps"])
        labels = [_stage_label(a, b) for a, b in zip(waypoints[:-1], waypoints[1:])]
        files["flow.svg"] = svg.level_flow(
            coord, trace.trajectories, trace.real_mask(), trace.branch,
            trace.window_half_width, n_stages, labels,
            {"class": cfg["class"], "variant": cfg["variant"], "M": cfg["M"], "N": cfg["N"]},
        ).encode("utf-8")
    resolved = dict(cfg, path=[list(p) for p in path], svg=emit_svg)
    _finish(out, "trace", resolved, files)
    return EXIT_OK


def _stage_coordinates(n_points, steps):
    return np.array([k / steps for k in range(n_points)])


def _stage_label(a, b):
    if a[0] != b[0] and a[1] == b[1]:
        return f"T: {a[0]:g} → {b[0]:g} (μ = {a[1]:g} μ₀)"
    if a[0] == b[0]:
        return f"μ/μ₀: {a[1]:g} → {b[1]:g} (T = {a[0]:g})"
    return f"(T, μ/μ₀): {a} → {b}"


def cmd_oracle(cfg: dict, out: Path) -> int:
    M, N = cfg["M"], cfg["N"]
    norm = SpectralNormalization.for_dim(M)
    delta0 = norm.delta0
    mu0 = scales(N, 1.0, delta0).mu0
    mu = _mu_to_mu0_units([cfg["mu"]], cfg)[0] * mu0
    spec = EnsembleSpec(cfg["class"], M, N, cfg["seed"])
    report = []
    ok = True
    for k in range(cfg["instances"]):
        h = sample_h(spec, norm, child_stream(cfg["seed"], k))
        coupling = build_coupling(M, N, cfg["T"], delta0)
        used = coupling
        if cfg["corrupt_gamma"]:
            used = type(coupling)(v=coupling.v, gamma=coupling.gamma * 1.5 + 0.1 * coupling.v,
                                  T=coupling.T, open_channels=coupling.open_channels)
        heff = build_effective(h, used, mu, SymmetryVariant.PT)
        ev = eigenvalues(heff.matrix).eigenvalues
        on = [quantization_residual(E, h, coupling, mu) for E in ev]
        off_pts = _off_spectrum_points(ev, cfg["off_spectrum_shift"] * delta0)
        off = [quantization_residual(E, h, coupling, mu) for E in off_pts]
        inst_ok = max(on) < cfg["threshold"] and (not off or min(off) > cfg["off_spectrum_threshold"])
        ok &= inst_ok
        report.append({
            "instance": k,
            "n_eigenvalues": len(ev),
            "max_residual": max(on),
            "n_off_spectrum": len(off),
            "min_off_spectrum_residual": min(off) if off else None,
            "pass": inst_ok,
        })
    payload = {
        "threshold": cfg["threshold"],
        "off_spectrum_threshold": cfg["off_spectrum_threshold"],
        "max_residual": max(r["max_residual"] for r in report),
        "min_off_spectrum_residual": min(
            (r["min_off_spectrum_residual"] for r in report
             if r["min_off_spectrum_residual"] is not None), default=None),
        "pass": ok,
        "instances": report,
    }
    _finish(out, "oracle", dict(cfg), {"oracle.json": pio.json_bytes(payload)})
    return EXIT_OK if ok else EXIT_INTEGRITY


def _off_spectrum_points(ev: np.ndarray, shift: float) -> list:
    """``E + shift`` for every eigenvalue ``E``, kept when no eigenvalue lies closer than ``shift/3``."""
    pts = ev + shift
    d = np.min(np.abs(pts[:, None] - ev[None, :]), axis=1)
    return list(pts[d >= shift / 3])


def cmd_perturb(cfg: dict, out: Path) -> int:
    M, N = cfg["M"], cfg["N"]
    norm = SpectralNormalization.for_dim(M, window_fraction=cfg["window_fraction"])
    delta0, window = norm.delta0, norm.window_half_width
    rows = []
    for cls in cfg["classes"]:
        spec = EnsembleSpec(cls, M, N, cfg["seed"])
        hs = [sample_h(spec, norm, child_stream(cfg["seed"], r)) for r in range(cfg["realizations"])]
        for T in cfg["t_values"]:
            sc = scales(N, T, delta0)
            coupling = build_coupling(M, N, T, delta0)
            qd, muc, ov2 = [], [], []
            for h in hs:
                qd.extend(quasi_degenerate_mus(h, coupling, window)[1])
                for p in crossing_pairs(h, coupling, window):
                    muc.append(p.mu_critical)
                    ov2.append(abs(p.overlap) ** 2)
            qd = np.asarray(qd)
            rows.append([
                cls, T, M, N, cfg["realizations"], sc.mu0, sc.muT, sc.muTprime,
                qd.mean(), qd.std(ddof=1) / math.sqrt(qd.size) if qd.size > 1 else 0.0,
                qd.mean() / sc.muT, qd.mean() / sc.muTprime,
                float(np.median(muc)), float(np.median(muc)) / sc.mu0,
                float(np.mean(ov2)), float(np.mean(ov2)) * N, qd.size, len(muc),
            ])
    header = ["class", "T", "M", "N", "realizations", "mu0", "muT", "muTprime",
              "qd_mu_mean", "qd_mu_stderr", "qd_over_muT", "qd_over_muTprime",
              "crossing_muc_median", "crossing_muc_over_mu0", "overlap2_mean",
              "overlap2_times_N", "n_levels", "n_pairs"]
    _finish(out, "perturb", dict(cfg), {"scales.csv": pio.csv_bytes(header, rows)})
    return EXIT_OK


def _progress(label):
    last = [0.0]

    def report(done, total):
        now = time.monotonic()
        if now - last[0] > 5 or done == total:
            last[0] = now
            log.info("%s: %d/%d realizations", label, done, total)

    return report


# -- entry point --------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ptbreak", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"ptbreak {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("sweep", "trace", "oracle", "perturb"):
        p = sub.add_parser(name)
        p.add_argument("--config", help="JSON config file")
        p.add_argument("--out", default=f"ptbreak-{name}", help="output directory")
        p.add_argument("--seed", type=int, help="master seed (unsigned 64-bit)")
        p.add_argument("--paper-scale", action="store_true", help="use M=1000, N=50")
        p.add_argument("-v", "--verbose", action="store_true")
        if name in ("sweep", "trace", "oracle"):
            p.add_argument("--mu-units", choices=["mu0", "delta"],
                           help="units of mu inputs (default mu0)")
        if name in ("sweep", "trace"):
            p.add_argument("--svg", action="store_true", help="also emit an SVG plot")
        if name == "sweep":
            p.add_argument("--scale", choices=["mu0", "mu0prime", "muTprime"], default="mu0",
                           help="vertical axis scaling of the heatmap")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code not in (0, None) else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    overrides = {"seed": args.seed, "mu_units": getattr(args, "mu_units", None)}
    if args.paper_scale:
        overrides.update(FULL_SCALE)
    out = Path(args.out)
    t0 = time.perf_counter()
    try:
        cfg = load_config(args.command, args.config, overrides)
        if args.command == "sweep":
            code = cmd_sweep(cfg, out, args.scale, args.svg)
        elif args.command == "trace":
            code = cmd_trace(cfg, out, args.svg)
        elif args.command == "oracle":
            code = cmd_oracle(cfg, out)
        else:
            code = cmd_perturb(cfg, out)
    except ConfigError as exc:
        print(f"ptbreak: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (IntegrityError, NumericalError) as exc:
        print(f"ptbreak: numerical failure: {exc}", file=sys.stderr)
        return EXIT_INTEGRITY
    except PTBreakError as exc:
        print(f"ptbreak: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    print(f"ptbreak {args.command}: wrote {out} in {time.perf_counter() - t0:.1f} s (exit {code})",
          file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
