"""Command-line entry point.

    wiener-prelog sweep --beta 1 --snr-db 40,50,60,70,80 --seed 7 -o out.csv
    wiener-prelog point --snr-db 60
    wiener-prelog selfcheck

Configuration can also come from a JSON file (``--config``); flags
override file values.  A sweep writes a CSV plus a ``.json`` sidecar with
slope fits and the fully resolved configuration; feeding that sidecar back
through ``--config`` reproduces the run.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import math
import os
import sys
from dataclasses import dataclass
from pathlib import Path

from .phase_rate import AlphaPolicy
from .sweep import DEFAULT_SNR_DB, SweepConfig, fit_prelog, run_point, sweep_plan

OUTPUT_DIR_ENV = "WIENER_PRELOG_OUTPUT_DIR"

CSV_COLUMNS = (
    "snr_db", "snr", "L", "delta", "alpha",
    "amp_rate", "amp_stderr", "phase_rate", "phase_stderr", "total_rate",
    "ecos", "ecos_bound", "amp_analytic", "phase_analytic",
    "amp_asymptote", "phase_asymptote",
)
RATE_COLUMNS = frozenset({
    "amp_rate", "amp_stderr", "phase_rate", "phase_stderr", "total_rate",
    "amp_analytic", "phase_analytic", "amp_asymptote", "phase_asymptote",
})


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    beta: float = 1.0
    snr_db_list: tuple = DEFAULT_SNR_DB
    n_symbols: int = 2000
    replicates: int = 8
    seed: int = 0
    alpha_policy: str = "auto"
    oversampling: str = "schedule"
    output_path: str = "sweep.csv"
    format: str = "csv"
    units: str = "nats"
    workers: int = 1

    def sweep_config(self) -> SweepConfig:
        L = self.oversampling
        return SweepConfig(
            beta=self.beta,
            snr_db_list=tuple(self.snr_db_list),
            n_symbols=self.n_symbols,
            replicates=self.replicates,
            seed=self.seed,
            alpha_policy=AlphaPolicy.parse(self.alpha_policy),
            oversampling="schedule" if L == "schedule" else int(L.split(":", 1)[1]),
            workers=self.workers,
        )

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["snr_db_list"] = list(self.snr_db_list)
        return d


CONFIG_KEYS = tuple(f.name for f in dataclasses.fields(RunConfig))


def _default_output() -> str:
    return str(Path(os.environ.get(OUTPUT_DIR_ENV, ".")) / "sweep.csv")


def _parse_snr_list(value) -> tuple:
    if isinstance(value, str):
        parts = [p for p in value.replace(" ", "").split(",") if p]
    elif isinstance(value, (list, tuple)):
        parts = list(value)
    else:
        parts = [value]
    try:
        out = tuple(float(p) for p in parts)
    except (TypeError, ValueError):
        raise ConfigError(f"snr_db_list: cannot parse {value!r} as numbers") from None
    if not out:
        raise ConfigError("snr_db_list: need at least one SNR value")
    if not all(math.isfinite(s) for s in out):
        raise ConfigError("snr_db_list: values must be finite")
    return out


def _normalize_oversampling(value) -> str:
    if isinstance(value, int) and not isinstance(value, bool):
        value = f"fixed:{value}"
    value = str(value)
    if value == "schedule":
        return value
    if value.startswith("fixed:"):
        try:
            L = int(value.split(":", 1)[1])
        except ValueError:
            raise ConfigError(f"oversampling: malformed value {value!r}") from None
        if L < 1:
            raise ConfigError(f"oversampling: L must be >= 1, got {L}")
        return f"fixed:{L}"
    raise ConfigError(f"oversampling: expected 'schedule' or 'fixed:L', got {value!r}")


def _as_int(name, value, lo, hi=None):
    if isinstance(value, bool):
        raise ConfigError(f"{name}: expected an integer, got {value!r}")
    try:
        iv = int(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{name}: expected an integer, got {value!r}") from None
    if iv != value and not (isinstance(value, str) and str(iv) == value.strip()):
        raise ConfigError(f"{name}: expected an integer, got {value!r}")
    if iv < lo or (hi is not None and iv > hi):
        raise ConfigError(f"{name}: {iv} out of range")
    return iv


def _validate(raw: dict) -> RunConfig:
    unknown = sorted(set(raw) - set(CONFIG_KEYS))
    if unknown:
        raise ConfigError(f"unknown config key(s): {', '.join(unknown)}")
    d = dict(raw)
    try:
        beta = float(d["beta"])
    except (TypeError, ValueError):
        raise ConfigError(f"beta: expected a number, got {d['beta']!r}") from None
    if not (beta > 0 and math.isfinite(beta)):
        raise ConfigError(f"beta: must be > 0, got {beta}")
    d["beta"] = beta
    d["snr_db_list"] = _parse_snr_list(d["snr_db_list"])
    d["n_symbols"] = _as_int("n_symbols", d["n_symbols"], 2)
    d["replicates"] = _as_int("replicates", d["replicates"], 1)
    d["workers"] = _as_int("workers", d["workers"], 1)
    d["seed"] = _as_int("seed", d["seed"], 0, 2**64 - 1)
    try:
        d["alpha_policy"] = str(AlphaPolicy.parse(str(d["alpha_policy"])))
    except ValueError as exc:
        raise ConfigError(f"alpha_policy: {exc}") from None
    d["oversampling"] = _normalize_oversampling(d["oversampling"])
    if d["format"] not in ("csv", "json"):
        raise ConfigError(f"format: expected csv or json, got {d['format']!r}")
    if d["units"] not in ("nats", "bits"):
        raise ConfigError(f"units: expected nats or bits, got {d['units']!r}")
    d["output_path"] = str(d["output_path"])
    return RunConfig(**d)


def load_config_file(path) -> dict:
    """Read a JSON config; a sweep sidecar is accepted as well."""
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed config file {path}: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigError(f"malformed config file {path}: top level must be an object")
    if set(data) >= {"config", "fits"} and isinstance(data["config"], dict):
        data = data["config"]
    return data


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="wiener-prelog", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, snr_help):
        S = argparse.SUPPRESS
        p.add_argument("--config", default=None, help="JSON config file")
        p.add_argument("--beta", type=float, default=S, help="phase-noise linewidth parameter (>0)")
        p.add_argument("--snr-db", dest="snr_db_list", default=S, help=snr_help)
        p.add_argument("--n-symbols", dest="n_symbols", type=int, default=S, help="symbols per replicate")
        p.add_argument("--replicates", type=int, default=S)
        p.add_argument("--seed", type=int, default=S, help="master seed (unsigned 64-bit)")
        p.add_argument("--alpha", dest="alpha_policy", default=S, help="paper | auto | fixed:VALUE")
        p.add_argument("--oversampling", default=S, help="schedule | fixed:L")
        p.add_argument("-o", "--output", dest="output_path", default=S)
        p.add_argument("--format", choices=("csv", "json"), default=S)
        p.add_argument("--units", choices=("nats", "bits"), default=S)
        p.add_argument("--workers", type=int, default=S, help="threads per SNR point")

    add_common(sub.add_parser("sweep", help="run an SNR sweep and fit pre-log slopes"),
               "comma-separated SNR grid in dB")
    add_common(sub.add_parser("point", help="evaluate a single SNR point"), "SNR in dB")
    sub.add_parser("selfcheck", help="run the numerical self-check battery")
    return parser


def parse_config(argv=None):
    """Return ``(command, RunConfig or None)``."""
    args = vars(build_parser().parse_args(argv))
    command = args.pop("command")
    if command == "selfcheck":
        return command, None
    merged = dataclasses.asdict(RunConfig(output_path=_default_output()))
    path = args.pop("config", None)
    if path is not None:
        merged.update(load_config_file(path))
    merged.update(args)
    cfg = _validate(merged)
    if command == "point" and len(cfg.snr_db_list) != 1:
        raise ConfigError("point: give exactly one --snr-db value")
    return command, cfg


# --- emission --------------------------------------------------------------

def _fmt(value) -> str:
    if isinstance(value, int) and not isinstance(value, bool):
        return str(value)
    return format(float(value), ".12g")


def point_row(p) -> dict:
    return {
        "snr_db": p.snr_db,
        "snr": p.snr,
        "L": p.L,
        "delta": p.delta,
        "alpha": p.alpha_used,
        "amp_rate": p.amp_rate.mean_nats,
        "amp_stderr": p.amp_rate.stderr_nats,
        "phase_rate": p.phase_rate.mean_nats,
        "phase_stderr": p.phase_rate.stderr_nats,
        "total_rate": p.total_rate_nats,
        "ecos": p.ecos,
        "ecos_bound": p.ecos_bound,
        "amp_analytic": p.amp_analytic,
        "phase_analytic": p.phase_analytic_paper_alpha,
        "amp_asymptote": p.amp_asymptote,
        "phase_asymptote": p.phase_asymptote,
    }


def _convert(row: dict, units: str) -> dict:
    if units == "nats":
        return dict(row)
    return {
        (f"{k}_bits" if k in RATE_COLUMNS else k): (v / math.log(2) if k in RATE_COLUMNS else v)
        for k, v in row.items()
    }


def header(units: str = "nats") -> list[str]:
    return [f"{c}_bits" if units == "bits" and c in RATE_COLUMNS else c for c in CSV_COLUMNS]


def render_csv(points, units: str = "nats") -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header(units))
    for p in points:
        row = _convert(point_row(p), units)
        w.writerow([_fmt(v) for v in row.values()])
    return buf.getvalue()


def compute_fits(points, units: str = "nats") -> dict:
    if len(points) < 3:
        return {}
    scale = 1.0 if units == "nats" else 1.0 / math.log(2)
    fits = {}
    for name in ("amp", "phase", "total"):
        f = fit_prelog(points, name)
        fits[name] = {
            "slope": f.slope * scale,
            "intercept": f.intercept * scale,
            "stderr_slope": f.stderr_slope * scale,
            "halfwidth95": f.halfwidth95 * scale,
            "points_used": f.points_used,
        }
    return fits


def sidecar_path(output_path) -> Path:
    return Path(output_path).with_suffix(".json")


def _json_float(x):
    return None if isinstance(x, float) and not math.isfinite(x) else x


def emit(points, fits: dict, config: RunConfig, errors=None) -> list[Path]:
    """Write the CSV (or JSON) results and return the paths written."""
    out = Path(config.output_path)
    meta = {
        "units": config.units,
        "fits": fits,
        "config": config.to_dict(),
        "errors": errors or {},
    }
    try:
        if out.parent and not out.parent.exists():
            out.parent.mkdir(parents=True, exist_ok=True)
        if config.format == "json":
            rows = [{k: _json_float(v) for k, v in _convert(point_row(p), config.units).items()} for p in points]
            doc = {"rows": rows, **meta}
            out.write_text(json.dumps(doc, indent=2) + "\n")
            return [out]
        out.write_text(render_csv(points, config.units))
        side = sidecar_path(out)
        side.write_text(json.dumps(meta, indent=2) + "\n")
        return [out, side]
    except OSError as exc:
        raise OSError(f"cannot write results to {out}: {exc}") from exc


def _print_table(points, units):
    sys.stdout.write(render_csv(points, units))


def run(config: RunConfig):
    """Evaluate every point; return ``(points, errors)``."""
    sweep_cfg = config.sweep_config()
    points, errors = [], {}
    for index, snr_db in sweep_plan(sweep_cfg):
        try:
            points.append(run_point(sweep_cfg, snr_db, sweep_cfg.seed, index))
        except Exception as exc:  # noqa: BLE001 - reported per point
            errors[_fmt(snr_db)] = f"{type(exc).__name__}: {exc}"
    return points, errors


def main(argv=None) -> int:
    try:
        command, config = parse_config(argv)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    if command == "selfcheck":
        from .selfcheck import run_selfcheck

        ok = True
        for name, passed, detail in run_selfcheck():
            ok &= passed
            print(f"{'PASS' if passed else 'FAIL'}  {name}: {detail}")
        return 0 if ok else 1

    points, errors = run(config)
    for snr, msg in errors.items():
        print(f"error at {snr} dB: {msg}", file=sys.stderr)
    fits = compute_fits(points, config.units)
    try:
        paths = emit(points, fits, config, errors)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    _print_table(points, config.units)
    for name, f in fits.items():
        print(f"# {name} pre-log slope: {f['slope']:.4f} +/- {f['halfwidth95']:.4f} ({config.units}/ln SNR)")
    print(f"# wrote {', '.join(str(p) for p in paths)}")
    return 0 if not errors else 1


if __name__ == "__main__":
    sys.exit(main())
