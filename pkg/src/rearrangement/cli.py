"""Command-line front end.

Every subcommand writes plain CSV (curves) or JSON (configs, reports).
Exit codes: 0 success, 2 input error, 3 numerical failure, 4 infeasible band.
Failures also print a one-line JSON error record on stderr.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import platform
import sys
import time
from dataclasses import asdict, dataclass, field
from importlib import metadata
from pathlib import Path

import numpy as np
import scipy

from . import analytic
from .curves import DEFAULT_NET_SIZE, make_grid, read_curve_csv, write_curve_csv
from .errors import InfeasibleBandError, InputError, InsufficientReplicatesError, NumericalError
from .estimators import (
    N_FULL,
    DgpParams,
    Sample,
    abadie_structural_cdf,
    gen_sample,
    ivqr_fit,
    parse_taus,
    qr_curves,
)
from .experiment import error_ratio_experiment
from .functionals import SmoothingSpec, lorenz_curve, smooth
from .inference import bootstrap, monotone_intersect, monotonicity_test, uniform_band
from .isotonic import isotonize
from .rearrange import rearrange

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC, EXIT_BAND = 0, 2, 3, 4


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------


@dataclass
class RunConfig:
    """Settings for :func:`run_pipeline`; JSON round-trips losslessly."""

    seed: int = 0
    net_size: int = DEFAULT_NET_SIZE
    taus: str = "0.01:0.99:0.01"
    b: int = 500
    level: float = 0.9
    n: int = N_FULL
    mc_reps: int = 200
    mc_n: int = 2000
    dgp: DgpParams = field(default_factory=DgpParams)
    output_dir: str = "out"

    def __post_init__(self):
        if isinstance(self.dgp, dict):
            self.dgp = DgpParams.from_dict(self.dgp)
        checks = [
            (isinstance(self.seed, int) and self.seed >= 0, "seed must be a nonnegative integer"),
            (isinstance(self.net_size, int) and self.net_size >= 2, "net_size must be an integer >= 2"),
            (isinstance(self.b, int) and self.b >= 2, "b must be an integer >= 2"),
            (0.5 < self.level < 1.0, "level must lie in (0.5, 1)"),
            (isinstance(self.n, int) and self.n >= 10, "n must be an integer >= 10"),
            (isinstance(self.mc_reps, int) and self.mc_reps >= 1, "mc_reps must be a positive integer"),
            (isinstance(self.mc_n, int) and self.mc_n >= 10, "mc_n must be an integer >= 10"),
        ]
        for ok, msg in checks:
            if not ok:
                raise InputError(msg)
        parse_taus(self.taus)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["dgp"] = self.dgp.to_dict()
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        extra = set(d) - set(cls.__dataclass_fields__)
        if extra:
            raise InputError(f"unknown config fields: {sorted(extra)}")
        return cls(**d)

    @classmethod
    def from_json(cls, text: str) -> "RunConfig":
        try:
            return cls.from_dict(json.loads(text))
        except (json.JSONDecodeError, TypeError) as exc:
            raise InputError(f"bad config: {exc}") from exc

    @classmethod
    def load(cls, path) -> "RunConfig":
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise InputError(f"cannot read config {path}: {exc}") from exc
        return cls.from_json(text)


# ---------------------------------------------------------------------------
# output helpers
# ---------------------------------------------------------------------------


def _fmt(v) -> str:
    return repr(float(v)) if isinstance(v, (float, np.floating)) else str(v)


def write_columns(path, columns: dict) -> Path:
    """Write equal-length columns as CSV with round-trippable floats."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    names = list(columns)
    data = [np.asarray(columns[c]) for c in names]
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(names)
        for row in zip(*data):
            w.writerow([_fmt(v) for v in row])
    return path


def write_json(path, obj) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")
    return path


def sha256(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def versions() -> dict:
    try:
        pkg = metadata.version("rearrangement")
    except metadata.PackageNotFoundError:
        pkg = "unknown"
    return {
        "rearrangement": pkg,
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "python": platform.python_version(),
    }


def _cell_curves(curves: dict, prefix: str, out_dir: Path) -> list[Path]:
    written = []
    for x, c in sorted(curves.items()):
        written.append(
            write_columns(
                out_dir / f"{prefix}_x{x}.csv",
                {
                    "u": c.u_grid,
                    "original": c.values,
                    "rearranged": rearrange(c).values,
                    "isotonized": isotonize(c).values,
                },
            )
        )
    return written


def _band_files(ens: dict, level: float, prefix: str, out_dir: Path) -> list[Path]:
    written = []
    for x, e in sorted(ens.items()):
        band = uniform_band(e, level)
        rband = monotone_intersect(uniform_band(e.rearranged(), level))
        written.append(
            write_columns(
                out_dir / f"{prefix}_x{x}.csv",
                {
                    "u": e.u_grid,
                    "point": band.point.values,
                    "lower": band.lower.values,
                    "upper": band.upper.values,
                    "rearranged": rband.point.values,
                    "rearranged_lower": rband.lower.values,
                    "rearranged_upper": rband.upper.values,
                },
            )
        )
    return written


def _test_record(res) -> dict:
    return {
        "reject": res.reject,
        "max_violation": res.max_violation,
        "location": res.location,
        "cell": res.cell,
        "level": res.level,
    }


def _estimator(method: str, taus):
    if method == "ivqr":
        return lambda s: ivqr_fit(s, taus).curves()
    if method == "qr":
        return lambda s: qr_curves(s, taus)
    raise InputError(f"bands need a quantile method (qr or ivqr), got {method!r}")


# ---------------------------------------------------------------------------
# pipeline
# ---------------------------------------------------------------------------


def run_pipeline(config: RunConfig, out_dir=None) -> dict:
    """Simulate, estimate, monotonise, build bands, test and score.

    Returns the manifest, which is also written to ``manifest.json``.
    """
    t0 = time.perf_counter()
    out = Path(out_dir if out_dir is not None else config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    data_ss, boot_ss, mc_ss = np.random.SeedSequence(config.seed).spawn(3)
    taus = parse_taus(config.taus)
    files = []

    sample = gen_sample(config.dgp, config.n, data_ss)
    sample.to_csv(out / "sample.csv")
    files.append(out / "sample.csv")

    cdfs = abadie_structural_cdf(sample)
    for x in (0, 1):
        c = cdfs[x]
        files.append(
            write_columns(
                out / f"cdf_x{x}.csv",
                {
                    "y": cdfs.y_grid,
                    "original": c.values,
                    "rearranged": rearrange(c).values,
                    "isotonized": isotonize(c).values,
                },
            )
        )
    iv = ivqr_fit(sample, taus)
    files += _cell_curves(iv.curves(), "quantile", out)

    boot_seed = int(boot_ss.generate_state(1)[0])
    ens = bootstrap(sample, _estimator("ivqr", taus), config.b, boot_seed)
    files += _band_files(ens, config.level, "band", out)
    test = _test_record(monotonicity_test(ens, config.level))
    files.append(write_json(out / "monotonicity_test.json", test))

    mc_seed = int(mc_ss.generate_state(1)[0])
    mc = error_ratio_experiment(config.dgp, config.mc_n, config.mc_reps, mc_seed, config.net_size)
    mc.write_csv(out / "ratios.csv")
    files.append(out / "ratios.csv")
    write_json(out / "config.json", config.to_dict())
    files.append(out / "config.json")

    manifest = {
        "config": config.to_dict(),
        "seeds": {"root": config.seed, "bootstrap": boot_seed, "montecarlo": mc_seed},
        "versions": versions(),
        "wall_clock_seconds": time.perf_counter() - t0,
        "bootstrap_failed": {str(x): e.n_failed for x, e in ens.items()},
        "montecarlo_failed": mc.n_failed,
        "files": {p.name: sha256(p) for p in files},
    }
    write_json(out / "manifest.json", manifest)
    return manifest


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def _cmd_rearrange(args):
    write_curve_csv(rearrange(read_curve_csv(args.inp)), args.out)


def _cmd_isotonize(args):
    write_curve_csv(isotonize(read_curve_csv(args.inp)), args.out)


def _cmd_demo_sine(args):
    out = Path(args.out_dir)
    q = analytic.sine_curve()
    u = make_grid(args.net)
    q_star = np.array([analytic.rearranged_value(q, v) for v in u])
    write_columns(out / "sine_curve.csv", {"u": u, "Q": q(u), "Q_rearranged": q_star})
    # the correspondence y -> {u : Q(u) = y}, sampled along the curve
    uu = np.linspace(0.0, 1.0, 1001)
    write_columns(out / "sine_inverse.csv", {"y": q(uu), "u": uu})
    lo, hi = q.value_range()
    ys = np.linspace(lo, hi, 402)[1:-1]
    ys = np.array([y for y in ys if not analytic.is_critical_level(q, y)])
    write_columns(
        out / "sine_cdf.csv",
        {
            "y": ys,
            "F": [analytic.analytic_cdf(q, y) for y in ys],
            "density": [analytic.analytic_density(q, y) for y in ys],
        },
    )
    write_columns(
        out / "sine_sparsity.csv",
        {"u": u, "Q_rearranged": q_star, "sparsity": [analytic.sparsity(q, v) for v in u]},
    )
    write_json(
        out / "sine_critical.json",
        {
            "critical_points": q.critical_points().tolist(),
            "critical_values": q.critical_values().tolist(),
        },
    )


def _cmd_simulate(args, cfg):
    params = DgpParams.from_json(args.params) if args.params else cfg.dgp
    gen_sample(params, args.n if args.n is not None else cfg.n, args.seed).to_csv(args.out)


def _taus(args, cfg):
    if args.taus:
        return parse_taus(args.taus)
    if args.net is not None:
        return make_grid(args.net)
    return parse_taus(cfg.taus)


def _cmd_fit(args, cfg):
    sample = Sample.from_csv(args.inp)
    out = Path(args.out_dir)
    if args.method == "abadie":
        cdfs = abadie_structural_cdf(sample)
        for x in (0, 1):
            c = cdfs[x]
            write_columns(
                out / f"abadie_x{x}.csv",
                {
                    "y": cdfs.y_grid,
                    "original": c.values,
                    "rearranged": rearrange(c).values,
                    "isotonized": isotonize(c).values,
                },
            )
        return
    taus = _taus(args, cfg)
    curves = ivqr_fit(sample, taus).curves() if args.method == "ivqr" else qr_curves(sample, taus)
    _cell_curves(curves, args.method, out)


def _cmd_bands(args, cfg):
    sample = Sample.from_csv(args.inp)
    ens = bootstrap(sample, _estimator(args.method, _taus(args, cfg)), args.b, args.seed)
    _band_files(ens, args.level, f"band_{args.method}", Path(args.out_dir))


def _cmd_test_monotone(args, cfg):
    sample = Sample.from_csv(args.inp)
    ens = bootstrap(sample, _estimator(args.method, _taus(args, cfg)), args.b, args.seed)
    rec = _test_record(monotonicity_test(ens, args.level))
    if args.out:
        write_json(args.out, rec)
    print(json.dumps(rec, sort_keys=True))


def _cmd_montecarlo(args, cfg):
    net = args.net if args.net is not None else cfg.net_size
    res = error_ratio_experiment(cfg.dgp, args.n, args.reps, args.seed, net)
    res.write_csv(args.out)
    print(
        json.dumps(
            {
                "reps": res.reps,
                "failed": res.n_failed,
                "contraction_violations": res.contraction_violations(),
                "seconds": round(res.seconds, 3),
            }
        )
    )


def _parse_smooth(text: str) -> SmoothingSpec:
    key, _, val = text.partition("=")
    if key.strip() != "delta" or not val:
        raise InputError(f"--smooth expects delta=<value>, got {text!r}")
    try:
        return SmoothingSpec(float(val))
    except ValueError as exc:
        raise InputError(str(exc)) from exc


def _cmd_functionals(args):
    curve = read_curve_csv(args.curve)
    out = Path(args.out_dir)
    q_star = rearrange(curve)
    cols = {"u": curve.u_grid, "rearranged": q_star.values}
    if args.smooth:
        cols["smoothed"] = smooth(q_star, _parse_smooth(args.smooth)).values
    if args.lorenz:
        cols["lorenz"] = lorenz_curve(q_star).values
    write_columns(out / "functionals.csv", cols)


def _cmd_run(args, cfg):
    manifest = run_pipeline(cfg, args.out_dir or cfg.output_dir)
    print(json.dumps({"files": sorted(manifest["files"]), "seconds": round(manifest["wall_clock_seconds"], 3)}))


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON run configuration supplying defaults")
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--net", type=int, default=None, help="net size k (default 99)")

    boot = argparse.ArgumentParser(add_help=False)
    boot.add_argument("--b", type=int, default=None, help="bootstrap replicates (default 500)")
    boot.add_argument("--level", type=float, default=None, help="band level (default 0.9)")
    boot.add_argument("--method", choices=["ivqr", "qr"], default="ivqr")
    boot.add_argument("--taus", default=None)
    boot.add_argument("--in", dest="inp", required=True, help="sample CSV (y,x,z)")

    p = argparse.ArgumentParser(prog="rearrange", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("rearrange", parents=[common], help="sort a curve CSV")
    s.add_argument("--in", dest="inp", required=True)
    s.add_argument("--out", required=True)

    s = sub.add_parser("isotonize", parents=[common], help="isotonic projection of a curve CSV")
    s.add_argument("--in", dest="inp", required=True)
    s.add_argument("--out", required=True)

    s = sub.add_parser("demo-sine", parents=[common], help="analytic objects of the sine example")
    s.add_argument("--out-dir", required=True)

    s = sub.add_parser("simulate", parents=[common], help="draw a sample from the simulation design")
    s.add_argument("--params", help="JSON file with DGP parameters")
    s.add_argument("--n", type=int, default=None)
    s.add_argument("--out", required=True)

    s = sub.add_parser("fit", parents=[common], help="estimate structural curves from a sample")
    s.add_argument("--in", dest="inp", required=True)
    s.add_argument("--method", choices=["qr", "ivqr", "abadie"], default="ivqr")
    s.add_argument("--taus", default=None, help="start:stop:step or comma list")
    s.add_argument("--out-dir", required=True)

    s = sub.add_parser("bands", parents=[common, boot], help="bootstrap uniform bands")
    s.add_argument("--out-dir", required=True)

    s = sub.add_parser("test-monotone", parents=[common, boot], help="band-based monotonicity test")
    s.add_argument("--out", help="also write the JSON result here")

    s = sub.add_parser("montecarlo", parents=[common], help="error-ratio Monte Carlo table")
    s.add_argument("--reps", type=int, default=None)
    s.add_argument("--n", type=int, default=None)
    s.add_argument("--out", required=True)

    s = sub.add_parser("functionals", parents=[common], help="smoothed and Lorenz curves")
    s.add_argument("--curve", required=True)
    s.add_argument("--lorenz", action="store_true")
    s.add_argument("--smooth", help="delta=<bandwidth>")
    s.add_argument("--out-dir", required=True)

    s = sub.add_parser("run", parents=[common], help="full pipeline from a config")
    s.add_argument("--out-dir", default=None)
    return p


def _resolve(args) -> RunConfig:
    cfg = RunConfig.load(args.config) if args.config else RunConfig()
    if args.seed is None:
        args.seed = cfg.seed
    if getattr(args, "b", None) is None and hasattr(args, "b"):
        args.b = cfg.b
    if getattr(args, "level", None) is None and hasattr(args, "level"):
        args.level = cfg.level
    if getattr(args, "reps", None) is None and hasattr(args, "reps"):
        args.reps = cfg.mc_reps
    if args.command == "montecarlo" and args.n is None:
        args.n = cfg.mc_n
    if args.net is None and args.command == "demo-sine":
        args.net = cfg.net_size
    if args.command == "run":
        overrides = {"seed": args.seed}
        if args.net is not None:
            overrides["net_size"] = args.net
        cfg = RunConfig.from_dict({**cfg.to_dict(), **overrides})
    return cfg


COMMANDS = {
    "rearrange": lambda a, c: _cmd_rearrange(a),
    "isotonize": lambda a, c: _cmd_isotonize(a),
    "demo-sine": lambda a, c: _cmd_demo_sine(a),
    "simulate": _cmd_simulate,
    "fit": _cmd_fit,
    "bands": _cmd_bands,
    "test-monotone": _cmd_test_monotone,
    "montecarlo": _cmd_montecarlo,
    "functionals": lambda a, c: _cmd_functionals(a),
    "run": _cmd_run,
}


def exit_code(exc: BaseException) -> int:
    if isinstance(exc, InfeasibleBandError):
        return EXIT_BAND
    if isinstance(exc, InsufficientReplicatesError):
        return EXIT_INPUT  # a too-small --b is a usage problem
    if isinstance(exc, NumericalError):
        return EXIT_NUMERIC
    return EXIT_INPUT


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _resolve(args)
        COMMANDS[args.command](args, cfg)
    except (ValueError, OSError, NumericalError, InfeasibleBandError) as exc:
        code = exit_code(exc)
        record = {"error": type(exc).__name__, "message": str(exc), "exit_code": code, "command": args.command}
        print(json.dumps(record), file=sys.stderr)
        return code
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
