"""Command-line front end.

Exit codes: 0 when every checked gate passes, 1 when a mathematical gate fails,
2 for usage or configuration errors.  Reports are JSON with sorted keys and a
``schema`` field; tabular data goes to CSV files under ``--out``.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from .algebra import AlgebraSpec, ConfigError, b_matrix, det_polynomial, load_algebra, validate_condition
from .gabor import GaborLattice, constant_probe, density_check, make_window, parseval_defect, smooth_bumps
from .group import GammaWindow
from .presets import PRESETS, get_preset, preset_region
from .sampling import (
    SincFunction,
    build_phi,
    gram_matrix,
    probe_field,
    reconstruct,
    sample,
    sequence_orthogonality_check,
    wavelet_transform_many,
)
from .spectral import Region, check_congruence, make_grid, parse_region, partition_by_lattice, plancherel_measure
from .tiling import BudgetExhausted, PixelSet, check_lemma_bl, construct_tiling_set, verify_packing, verify_tiling

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

SCHEMA = 1
EXIT_OK, EXIT_GATE, EXIT_USAGE = 0, 1, 2

# canned settings for `example <name>`
EXAMPLES = {
    "heisenberg-main": {"preset": "heisenberg", "region": "E_cap_box [-0.9,0.9]", "mode": "main",
                        "res_lambda": 256, "res_space": 256, "res_pixel": 256, "trunc": 8},
    "heisenberg-steps": {"preset": "heisenberg", "mode": "steps",
                         "res_lambda": 256, "res_space": 256, "res_pixel": 256, "trunc": 8},
    "heisenberg-product": {"preset": "heisenberg_product", "mode": "steps",
                           "res_lambda": 32, "res_space": 32, "res_pixel": 32, "trunc": 4},
    "rotation-alpha": {"preset": "rotation_alpha", "mode": "measure", "res_lambda": 256},
}


@dataclass
class RunConfig:
    spec: AlgebraSpec
    source: str
    region: Region | None = None
    res_lambda: int = 64
    res_pixel: int = 64
    res_space: int = 64
    window_T: float = 2.0
    trunc: int = 4
    seed: int = 0
    out: Path | None = None
    tolerances: dict = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))

    def describe(self) -> dict:
        return {
            "algebra": self.source,
            "region": self.region.to_dict() if self.region else None,
            "res_lambda": self.res_lambda,
            "res_pixel": self.res_pixel,
            "res_space": self.res_space,
            "window_T": self.window_T,
            "trunc": self.trunc,
            "seed": self.seed,
        }


DEFAULT_TOLERANCES = {
    "measure": 1e-2,
    "congruence": 1e-9,
    "gram_diag": 0.02,
    "gram_offdiag": 0.05,
    "isometry": 0.05,
    "reconstruction": 0.05,
    "orthogonality": 0.02,
    "parseval": 0.02,
}


class UsageError(Exception):
    pass


def _common_parser(suppress: bool) -> argparse.ArgumentParser:
    # subcommands repeat the global flags; suppressed defaults keep values given
    # before the subcommand from being reset
    common = argparse.ArgumentParser(
        add_help=False, argument_default=argparse.SUPPRESS if suppress else None
    )
    g = common.add_argument_group("run configuration")
    g.add_argument("--config", type=Path, help="TOML or JSON run/algebra file")
    g.add_argument("--preset", choices=sorted(PRESETS), help="shipped algebra")
    g.add_argument("--region", help='band region, e.g. "E_cap_box [-0.9,0.9]" or "E_cap_disk 0.89"')
    g.add_argument("--res-lambda", type=int, help="λ-grid cells per axis over the region bounding box")
    g.add_argument("--res-pixel", type=int, help="pixels per unit length for tiling sets")
    g.add_argument("--res-space", type=int, help="spatial samples per unit length")
    g.add_argument("--window-T", type=float, help="spatial window half-width")
    g.add_argument("--trunc", type=int, help="truncation radius for Γ-windows and Gabor lattices")
    g.add_argument("--seed", type=int, help="seed for probe functions")
    g.add_argument("--out", type=Path, help="directory for JSON/CSV artifacts")
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common_parser(suppress=True)
    parser = argparse.ArgumentParser(
        prog="nilsampling", description=__doc__.splitlines()[0], parents=[_common_parser(suppress=False)]
    )
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("validate", parents=[common], help="check the nonvanishing determinant condition")
    sub.add_parser("detpoly", parents=[common], help="print det B(λ) as a polynomial")
    sub.add_parser("measure", parents=[common], help="Plancherel measure of the region")
    sub.add_parser("partition", parents=[common], help="split the region along the integer lattice")
    p = sub.add_parser("tile", parents=[common], help="construct and verify E(λ)")
    p.add_argument("--lambda", dest="lam", required=True, help="comma-separated λ")
    p.add_argument("--budget", type=int, default=4, help="largest integer shift tried per pixel")
    p = sub.add_parser("frame-check", parents=[common], help="Gabor Parseval defect at one λ")
    p.add_argument("--lambda", dest="lam", required=True, help="comma-separated λ")
    p.add_argument("--probes", type=int, default=3, help="number of seeded bump probes")
    sub.add_parser("build", parents=[common], help="build φ and report its norm")
    sub.add_parser("sample", parents=[common], help="sample a seeded probe on the Γ-window")
    sub.add_parser("reconstruct", parents=[common], help="reconstruct a probe from its samples")
    sub.add_parser("gram", parents=[common], help="Gram matrix of L(Γ)φ on a window")
    p = sub.add_parser("pipeline", parents=[common], help="full verification run")
    p.add_argument("--mode", choices=("main", "steps"), default="steps")
    p = sub.add_parser("example", parents=[common], help="run a canned example")
    p.add_argument("name", choices=sorted(EXAMPLES))
    return parser


def _read_document(path: Path) -> dict:
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    try:
        return json.loads(text) if text.lstrip().startswith("{") else tomllib.loads(text)
    except (json.JSONDecodeError, tomllib.TOMLDecodeError) as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from exc


def load_run_config(args: argparse.Namespace, overrides: dict | None = None) -> RunConfig:
    """Merge the config file, canned ``overrides`` and explicit flags (lowest to highest priority)."""
    doc: dict[str, Any] = {}
    if args.config is not None:
        doc = _read_document(args.config)
    values = {k: v for k, v in doc.items() if k not in ("algebra", "region", "brackets", "n", "d")}
    values.update({k: v for k, v in (overrides or {}).items() if k not in ("mode",)})
    for key in ("res_lambda", "res_pixel", "res_space", "window_T", "trunc", "seed", "out", "region", "preset"):
        flag = getattr(args, key, None)
        if flag is not None:
            values[key] = flag
    preset = values.get("preset", doc.get("preset"))
    if preset is not None:
        spec = get_preset(preset)
        source = f"preset:{preset}"
    elif "algebra" in doc or "brackets" in doc:
        spec = load_algebra(doc)
        source = str(args.config)
    else:
        raise UsageError("no algebra given: use --preset or a --config with an algebra table")
    region_value = values.get("region", doc.get("region"))
    if region_value is not None:
        region = parse_region(region_value, spec.center_dim)
    elif preset is not None:
        region = preset_region(preset)
    else:
        region = None
    if region is not None and region.dim != spec.center_dim:
        raise ConfigError(f"region has dimension {region.dim}, the center has {spec.center_dim}")
    cfg = RunConfig(spec=spec, source=source, region=region)
    for key in ("res_lambda", "res_pixel", "res_space", "trunc", "seed"):
        if key in values:
            setattr(cfg, key, int(values[key]))
    if "window_T" in values:
        cfg.window_T = float(values["window_T"])
    if values.get("out") is not None:
        cfg.out = Path(values["out"])
    cfg.tolerances.update(doc.get("tolerances", {}))
    for key in ("res_lambda", "res_pixel", "res_space"):
        if getattr(cfg, key) < 1:
            raise ConfigError(f"{key} must be positive")
    if cfg.trunc < 0 or cfg.window_T <= 0:
        raise ConfigError("trunc must be non-negative and window_T positive")
    if "res_space" not in values and cfg.res_space < cfg.res_pixel:
        cfg.res_space = cfg.res_pixel
    if cfg.res_space % cfg.res_pixel:
        raise ConfigError("res_space must be a multiple of res_pixel")
    return cfg


def _need_region(cfg: RunConfig) -> Region:
    if cfg.region is None:
        raise UsageError("this command needs a region (--region or a region table in the config)")
    return cfg.region


def _parse_lambda(text: str, k: int) -> np.ndarray:
    try:
        lam = np.array([float(v.replace("−", "-")) for v in text.split(",")])
    except ValueError as exc:
        raise UsageError(f"cannot parse λ from {text!r}") from exc
    if lam.shape != (k,):
        raise UsageError(f"λ needs {k} components")
    return lam


def _write(cfg: RunConfig, name: str, text: str) -> None:
    if cfg.out is None:
        return
    cfg.out.mkdir(parents=True, exist_ok=True)
    (cfg.out / name).write_text(text)


def _matrix_csv(mat: np.ndarray) -> str:
    lines = ["row,col,re,im"]
    for (i, j), v in np.ndenumerate(mat):
        lines.append(f"{i},{j},{v.real:.12g},{v.imag:.12g}")
    return "\n".join(lines) + "\n"


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        val = float(obj)
        return val if math.isfinite(val) else str(val)
    if isinstance(obj, Path):
        return str(obj)
    return obj


def _emit(cfg: RunConfig | None, report: dict, name: str = "report.json") -> None:
    report = dict(report)
    report["schema"] = SCHEMA
    text = json.dumps(_jsonable(report), sort_keys=True, indent=2, ensure_ascii=False) + "\n"
    sys.stdout.write(text)
    if cfg is not None:
        _write(cfg, name, text)


def _verdict(value: float, tolerance: float, **extra) -> dict:
    return {"value": float(value), "tolerance": float(tolerance), "pass": bool(value <= tolerance), **extra}


# individual commands ------------------------------------------------------


def cmd_validate(cfg: RunConfig) -> int:
    report = validate_condition(cfg.spec)
    _emit(cfg, {"command": "validate", "algebra": cfg.source, **report.to_dict()})
    return EXIT_OK if report.ok else EXIT_GATE


def cmd_detpoly(cfg: RunConfig) -> int:
    poly = det_polynomial(cfg.spec)
    _emit(cfg, {"command": "detpoly", "algebra": cfg.source, **poly.to_dict()})
    return EXIT_OK


def cmd_measure(cfg: RunConfig) -> int:
    region = _need_region(cfg)
    mu = plancherel_measure(cfg.spec, region, cfg.res_lambda)
    tol = cfg.tolerances["measure"]
    _emit(cfg, {
        "command": "measure",
        "config": cfg.describe(),
        "mu": mu,
        "resolution": cfg.res_lambda,
        "equals_one": _verdict(abs(mu - 1), tol),
    })
    return EXIT_OK


def cmd_partition(cfg: RunConfig) -> int:
    region = _need_region(cfg)
    part = partition_by_lattice(cfg.spec, region, cfg.res_lambda)
    defect = check_congruence(cfg.spec, region, part.offsets, cfg.res_lambda)
    _emit(cfg, {"command": "partition", "config": cfg.describe(), **part.to_dict(), "defect": defect})
    return EXIT_OK if defect <= cfg.tolerances["congruence"] else EXIT_GATE


def cmd_tile(cfg: RunConfig, lam_text: str, budget: int) -> int:
    lam = _parse_lambda(lam_text, cfg.spec.center_dim)
    B = b_matrix(cfg.spec, lam)
    try:
        E = construct_tiling_set(B, cfg.res_pixel, budget)
    except BudgetExhausted as exc:
        _emit(cfg, {"command": "tile", "lambda": lam.tolist(), "error": str(exc), "unresolved": exc.unresolved})
        return EXIT_GATE
    except ValueError as exc:
        _emit(cfg, {"command": "tile", "lambda": lam.tolist(), "error": str(exc)})
        return EXIT_GATE
    tiling = verify_tiling(E)
    packing = verify_packing(E, B)
    _write(cfg, "tiling.csv", E.to_csv())
    if E.d <= 2:
        _write(cfg, "tiling.pbm", E.to_pbm())
    _emit(cfg, {
        "command": "tile",
        "lambda": lam.tolist(),
        "det": float(abs(np.linalg.det(B))),
        "resolution": E.M,
        "pixels": len(E),
        "max_offset": int(np.abs(E.offsets).max()),
        "tiling": tiling.to_dict(),
        "packing": packing.to_dict(),
    })
    return EXIT_OK if tiling.passed and packing.passed else EXIT_GATE


def cmd_frame_check(cfg: RunConfig, lam_text: str, nprobes: int) -> int:
    spec = cfg.spec
    lam = _parse_lambda(lam_text, spec.center_dim)
    B = b_matrix(spec, lam)
    density = density_check(np.eye(spec.d), B)
    if not density.passed or density.volume == 0:
        _emit(cfg, {"command": "frame-check", "lambda": lam.tolist(), "density": density.to_dict()})
        return EXIT_GATE
    E = construct_tiling_set(B, cfg.res_pixel)
    u = make_window(B, E, cfg.window_T, cfg.res_space)
    probes = smooth_bumps(spec.d, cfg.window_T, cfg.res_space, nprobes, seed=cfg.seed)
    if spec.d == 1:
        probes = [constant_probe(E, cfg.window_T, cfg.res_space)] + probes
    radii = sorted({max(1, cfg.trunc // 4), max(1, cfg.trunc // 2), max(1, cfg.trunc)})
    defects = [parseval_defect(probes, u, GaborLattice.square(B, r)) for r in radii]
    tol = cfg.tolerances["parseval"]
    _write(cfg, "window.csv", u.to_csv())
    _emit(cfg, {
        "command": "frame-check",
        "lambda": lam.tolist(),
        "density": density.to_dict(),
        "window_norm2": u.norm2(),
        "det": float(abs(np.linalg.det(B))),
        "radii": radii,
        "defects": defects,
        "parseval": _verdict(defects[-1], tol, radius=radii[-1], resolution=cfg.res_space),
    })
    return EXIT_OK if defects[-1] <= tol else EXIT_GATE


def _tile_builder(cfg: RunConfig):
    """``λ ↦ E(λ)``: the unit cube when it already packs, a constructed set otherwise."""
    unit = PixelSet.unit_cube(cfg.spec.d, cfg.res_pixel)

    def tiles(lam):
        B = b_matrix(cfg.spec, lam)
        return unit if verify_packing(unit, B).passed else construct_tiling_set(B, cfg.res_pixel)

    return tiles


def _phi(cfg: RunConfig, grid):
    return build_phi(cfg.spec, grid, _tile_builder(cfg), T=cfg.window_T, M=cfg.res_space)


def cmd_build(cfg: RunConfig) -> int:
    grid = make_grid(cfg.spec, _need_region(cfg), cfg.res_lambda)
    phi = _phi(cfg, grid)
    _emit(cfg, {"command": "build", "config": cfg.describe(), "nodes": len(grid), "phi_norm2": phi.norm2(),
                "distinct_tiling_sets": len(phi.atoms)})
    return EXIT_OK


def _probe_setup(cfg: RunConfig):
    grid = make_grid(cfg.spec, _need_region(cfg), cfg.res_lambda)
    phi = _phi(cfg, grid)
    psi = probe_field(cfg.spec, grid, seed=cfg.seed, T=cfg.window_T, M=cfg.res_space)
    return grid, phi, psi


def cmd_sample(cfg: RunConfig) -> int:
    _, phi, psi = _probe_setup(cfg)
    samples = sample(psi, phi, GammaWindow.radius(cfg.trunc))
    _write(cfg, "samples.csv", samples.to_csv())
    norm = psi.norm2()
    defect = abs(samples.energy() - norm) / norm
    _emit(cfg, {"command": "sample", "config": cfg.describe(), "count": len(samples), "psi_norm2": norm,
                "sample_energy": samples.energy(),
                "isometry": _verdict(defect, cfg.tolerances["isometry"], radius=cfg.trunc)})
    return EXIT_OK


def reconstruction_points(cfg: RunConfig, count: int = 20) -> np.ndarray:
    """Seeded points in the central box, translation part on the spatial grid."""
    spec = cfg.spec
    rng = np.random.default_rng(cfg.seed + 1)
    free = rng.uniform(-1, 1, size=(count, spec.center_dim + spec.d))
    cells = rng.integers(-cfg.res_space, cfg.res_space, size=(count, spec.d)) / cfg.res_space
    return np.concatenate([free, cells], axis=1)


def _reconstruction_error(cfg: RunConfig, psi, phi, radius: int) -> float:
    pts = reconstruction_points(cfg)
    exact = wavelet_transform_many(psi, phi, pts)
    approx = reconstruct(sample(psi, phi, GammaWindow.radius(radius)), SincFunction(phi), pts)
    return float(np.linalg.norm(approx - exact) / np.linalg.norm(exact))


def cmd_reconstruct(cfg: RunConfig) -> int:
    _, phi, psi = _probe_setup(cfg)
    radii = list(range(1, cfg.trunc + 1))
    errors = [_reconstruction_error(cfg, psi, phi, r) for r in radii]
    _emit(cfg, {"command": "reconstruct", "config": cfg.describe(), "radii": radii, "errors": errors,
                "reconstruction": _verdict(errors[-1], cfg.tolerances["reconstruction"], radius=radii[-1])})
    return EXIT_OK


def _gram_report(cfg: RunConfig, phi, radius: int = 1) -> dict:
    G = gram_matrix(phi, GammaWindow.radius(radius))
    _write(cfg, "gram.csv", _matrix_csv(G))
    diag = np.diag(G)
    off = G - np.diag(diag)
    return {
        "size": len(G),
        "radius": radius,
        "diag_mean": float(np.mean(diag.real)),
        "diag_error": _verdict(float(np.max(np.abs(diag - 1))), cfg.tolerances["gram_diag"]),
        "offdiag": _verdict(float(np.max(np.abs(off))) if len(G) > 1 else 0.0, cfg.tolerances["gram_offdiag"]),
        "hermitian_error": float(np.max(np.abs(G - G.conj().T))),
    }


def cmd_gram(cfg: RunConfig) -> int:
    grid = make_grid(cfg.spec, _need_region(cfg), cfg.res_lambda)
    phi = _phi(cfg, grid)
    report = _gram_report(cfg, phi)
    _emit(cfg, {"command": "gram", "config": cfg.describe(), **report})
    return EXIT_OK if report["diag_error"]["pass"] and report["offdiag"]["pass"] else EXIT_GATE


def _lambda_samples(k: int, per_axis: int = 3) -> np.ndarray:
    axis = (np.arange(per_axis) + 0.5) / per_axis
    return np.stack([g.ravel() for g in np.meshgrid(*[axis] * k, indexing="ij")], axis=-1)


def cmd_pipeline(cfg: RunConfig, mode: str) -> int:
    spec = cfg.spec
    region = _need_region(cfg)
    stages: dict[str, Any] = {}
    bundle: dict[str, Any] = {"command": "pipeline", "mode": mode, "config": cfg.describe(), "stages": stages}

    def stop(stage: str) -> int:
        bundle["failed_stage"] = stage
        bundle["interpolation"] = "not-established"
        _emit(cfg, bundle, "verdict.json")
        return EXIT_GATE

    cond = validate_condition(spec)
    stages["condition"] = cond.to_dict()
    if not cond.ok:
        return stop("condition")
    mu = plancherel_measure(spec, region, cfg.res_lambda)
    tol_mu = cfg.tolerances["measure"]
    stages["measure"] = {"mu": mu, "resolution": cfg.res_lambda, "tolerance": tol_mu}
    if mode == "steps" and abs(mu - 1) > tol_mu:
        return stop("measure")
    if mode == "main" and mu > 1 + tol_mu:
        return stop("measure")

    grid = make_grid(spec, region, cfg.res_lambda)
    if mode == "steps":
        part = partition_by_lattice(spec, region, cfg.res_lambda)
        defect = check_congruence(spec, region, part.offsets, cfg.res_lambda)
        stages["partition"] = {**part.to_dict(), "congruence_defect": defect}
        if defect > cfg.tolerances["congruence"]:
            return stop("partition")

    phi = _phi(cfg, grid)
    stages["phi"] = {"norm2": phi.norm2(), "distinct_tiling_sets": len(phi.atoms), "nodes": len(grid)}

    tiles = _tile_builder(cfg)
    hypotheses_ok = True
    if mode == "steps":
        lam_samples = _lambda_samples(spec.center_dim)
        bl = check_lemma_bl(spec, part.offsets, tiles, lam_samples,
                            [tuple(np.array(m) - 1) for m in np.ndindex(*(3,) * spec.d)], samples_per_axis=64)
        stages["lemma_bl"] = bl.to_dict()
        probes = smooth_bumps(spec.d, cfg.window_T, cfg.res_space, 4, seed=cfg.seed, lo=0.05, hi=0.95)
        orth = sequence_orthogonality_check(spec, part.offsets, tiles, lam_samples[:2],
                                            [(probes[0], probes[1]), (probes[2], probes[3])], trunc=8)
        stages["orthogonality"] = {**orth.to_dict(), "tolerance": cfg.tolerances["orthogonality"],
                                   "pass": orth.vacuous or orth.value <= cfg.tolerances["orthogonality"]}
        hypotheses_ok = bl.passed or stages["orthogonality"]["pass"]

    gram = _gram_report(cfg, phi)
    stages["gram"] = gram
    psi = probe_field(spec, grid, seed=cfg.seed, T=cfg.window_T, M=cfg.res_space)
    samples = sample(psi, phi, GammaWindow.radius(cfg.trunc))
    _write(cfg, "samples.csv", samples.to_csv())
    norm = psi.norm2()
    iso = abs(samples.energy() - norm) / norm
    stages["isometry"] = _verdict(iso, cfg.tolerances["isometry"], radius=cfg.trunc, resolution=cfg.res_lambda)
    sampling_ok = stages["isometry"]["pass"]
    onb = gram["diag_error"]["pass"] and gram["offdiag"]["pass"]
    if mode == "steps":
        err = _reconstruction_error(cfg, psi, phi, cfg.trunc)
        stages["reconstruction"] = _verdict(err, cfg.tolerances["reconstruction"], radius=cfg.trunc, points=20)
        sampling_ok = sampling_ok and stages["reconstruction"]["pass"]
    bundle["sampling"] = "pass" if sampling_ok else "fail"
    if mode == "steps":
        bundle["interpolation"] = "pass" if (onb and hypotheses_ok and sampling_ok) else "fail"
    else:
        bundle["interpolation"] = "pass" if onb else "not-established"
    _emit(cfg, bundle, "verdict.json")
    if not sampling_ok:
        return EXIT_GATE
    if mode == "steps" and bundle["interpolation"] != "pass":
        return EXIT_GATE
    return EXIT_OK


def cmd_example(args: argparse.Namespace) -> int:
    settings = dict(EXAMPLES[args.name])
    mode = settings.pop("mode")
    cfg = load_run_config(args, settings)
    if mode == "measure":
        return cmd_measure(cfg)
    return cmd_pipeline(cfg, mode)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "example":
            return cmd_example(args)
        cfg = load_run_config(args)
        if args.command == "validate":
            return cmd_validate(cfg)
        if args.command == "detpoly":
            return cmd_detpoly(cfg)
        if args.command == "measure":
            return cmd_measure(cfg)
        if args.command == "partition":
            return cmd_partition(cfg)
        if args.command == "tile":
            return cmd_tile(cfg, args.lam, args.budget)
        if args.command == "frame-check":
            return cmd_frame_check(cfg, args.lam, args.probes)
        if args.command == "build":
            return cmd_build(cfg)
        if args.command == "sample":
            return cmd_sample(cfg)
        if args.command == "reconstruct":
            return cmd_reconstruct(cfg)
        if args.command == "gram":
            return cmd_gram(cfg)
        if args.command == "pipeline":
            return cmd_pipeline(cfg, args.mode)
    except (UsageError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    parser.error(f"unknown command {args.command}")
    return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
