"""Command-line front end: ``cpforce shift|sweep|regimes|validate``.

Runs are described by an INI-style config file::

    [atom]
    lambda0 = 780e-9        ; or omega0 = ... (rad/s), exactly one of the two
    alpha = 5.3e-39         ; static polarizability, F m^2
    state = ground          ; or excited

    [medium]
    eps = 2                 ; or "conductor"

    [thermal]
    T_s = 300               ; kelvin; or beta_s / beta_e in metres
    T_e = 77

    [geometry]
    z = 1e-6                ; single point, or
    ; z_min = 1e-8, z_max = 1e-4, count = 50, spacing = log

    [output]
    format = csv            ; or jsonl
    path = -                ; "-" is stdout

    [engine]
    tol = 1e-10
    margin = 10

Command-line flags override the file. Numbers are written with 17
significant digits so every emitted file parses back to the same floats.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import hashlib
import io
import json
import math
import os
import sys
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, replace
from functools import partial
from pathlib import Path

import numpy as np

from . import __version__
from . import asymptotics as asy
from . import engine
from . import validation
from .model import (
    AtomSpec,
    ComplexPermittivity,
    CPForceError,
    Geometry,
    InvalidInputError,
    PerfectConductor,
    RealConstant,
    ShiftUnit,
    ThermalConfig,
    parse_medium,
)

CSV_COLUMNS = (
    "z_m", "zbar", "regime", "dE_vac_J", "dE_eq_J", "dE_neq_J", "dE_total_J", "dE_total_unit",
    "F_total_N", "err_total_J", "asym_total_J", "formula_id", "status",
)
REGIME_COLUMNS = ("z_m", "zbar", "regime", "temperature", "distance", "margins", "note")
TEXT_COLUMNS = {"regime", "formula_id", "status", "temperature", "distance", "note"}
NO_INTERFACE = "warning: no interface"


class ConfigError(InvalidInputError):
    """Invalid run configuration; the message names the offending field."""


# --- configuration ----------------------------------------------------------------

@dataclass(frozen=True)
class RunConfig:
    alpha: float
    state: str = "ground"
    omega0: float | None = None
    lambda0: float | None = None
    medium: str = "2"
    t_s: float | None = None
    t_e: float | None = None
    beta_s: float | None = None
    beta_e: float | None = None
    z: float | None = None
    z_min: float | None = None
    z_max: float | None = None
    count: int = 1
    spacing: str = "log"
    fmt: str = "csv"
    out: str = "-"
    tol: float = engine.DEFAULT_TOL
    margin: float = asy.DEFAULT_MARGIN
    jobs: int = 1

    def atom(self) -> AtomSpec:
        if self.omega0 is not None:
            return AtomSpec(self.omega0, self.alpha, self.state)
        return AtomSpec.from_wavelength(self.lambda0, self.alpha, self.state)

    def thermal(self) -> ThermalConfig:
        if self.t_s is not None:
            return ThermalConfig.from_temperatures(self.t_s, self.t_e)
        return ThermalConfig(self.beta_s, self.beta_e)

    def grid(self) -> np.ndarray:
        if self.z is not None:
            return np.array([self.z])
        if self.count == 1:
            return np.array([self.z_min])
        if self.spacing == "log":
            return np.geomspace(self.z_min, self.z_max, self.count)
        return np.linspace(self.z_min, self.z_max, self.count)

    def cache_payload(self) -> dict:
        """Everything that affects the numbers or their formatting."""
        payload = asdict(self)
        for key in ("out", "jobs"):
            payload.pop(key)
        return payload


_FIELDS = {
    ("atom", "omega0"): ("omega0", float),
    ("atom", "lambda0"): ("lambda0", float),
    ("atom", "alpha"): ("alpha", float),
    ("atom", "state"): ("state", str),
    ("medium", "eps"): ("medium", str),
    ("thermal", "t_s"): ("t_s", float),
    ("thermal", "t_e"): ("t_e", float),
    ("thermal", "beta_s"): ("beta_s", float),
    ("thermal", "beta_e"): ("beta_e", float),
    ("geometry", "z"): ("z", float),
    ("geometry", "z_min"): ("z_min", float),
    ("geometry", "z_max"): ("z_max", float),
    ("geometry", "count"): ("count", int),
    ("geometry", "spacing"): ("spacing", str),
    ("output", "format"): ("fmt", str),
    ("output", "path"): ("out", str),
    ("engine", "tol"): ("tol", float),
    ("engine", "margin"): ("margin", float),
    ("engine", "jobs"): ("jobs", int),
}


def parse_config_text(text: str) -> dict:
    """Raw field values from INI text, keyed by RunConfig field name."""
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"config syntax: {exc}") from None
    values = {}
    for section in parser.sections():
        for key, raw in parser.items(section):
            spec = _FIELDS.get((section.lower(), key.lower()))
            if spec is None:
                raise ConfigError(f"{section}.{key}: unknown setting")
            name, kind = spec
            try:
                values[name] = kind(raw.strip())
            except ValueError:
                raise ConfigError(f"{section}.{key}: cannot read {raw!r} as {kind.__name__}") from None
    return values


def build_config(values: dict) -> RunConfig:
    """Validate raw values and assemble a RunConfig."""
    def given(*names: str) -> list[str]:
        return [n for n in names if values.get(n) is not None]

    if len(given("omega0", "lambda0")) != 1:
        raise ConfigError("atom: give exactly one of omega0, lambda0")
    if "alpha" not in values:
        raise ConfigError("atom.alpha: missing")
    temps, betas = given("t_s", "t_e"), given("beta_s", "beta_e")
    if bool(temps) == bool(betas):
        raise ConfigError("thermal: give either T_s and T_e, or beta_s and beta_e")
    if len(temps or betas) != 2:
        raise ConfigError(f"thermal: both reservoirs are needed, got only {(temps or betas)[0]}")
    has_grid = given("z_min", "z_max")
    if values.get("z") is not None and has_grid:
        raise ConfigError("geometry: give either z or a z_min/z_max grid, not both")
    if values.get("z") is None and not has_grid:
        raise ConfigError("geometry: missing z (or z_min/z_max/count)")
    count = values.get("count", 1)
    if count < 1:
        raise ConfigError(f"geometry.count: must be >= 1, got {count}")
    if has_grid and values.get("z_min") is None:
        raise ConfigError("geometry.z_min: missing")
    if has_grid and count > 1 and values.get("z_max") is None:
        raise ConfigError("geometry.z_max: missing")
    if values.get("spacing", "log") not in ("log", "linear"):
        raise ConfigError("geometry.spacing: must be log or linear")
    if values.get("fmt", "csv") not in ("csv", "jsonl"):
        raise ConfigError("output.format: must be csv or jsonl")
    if values.get("jobs", 1) < 1:
        raise ConfigError("engine.jobs: must be >= 1")
    cfg = RunConfig(**values)
    # let the model types check ranges and report the field
    checks = (("atom", cfg.atom), ("thermal", cfg.thermal), ("medium.eps", lambda: parse_medium(cfg.medium)),
              ("engine.tol", lambda: engine.EngineOptions(cfg.tol)))
    for label, check in checks:
        try:
            check()
        except (CPForceError, ValueError) as exc:
            raise ConfigError(f"{label}: {exc}") from None
    if not cfg.margin > 1.0:
        raise ConfigError(f"engine.margin: must exceed 1, got {cfg.margin}")
    for z in cfg.grid():
        if not (math.isfinite(z) and z > 0.0):
            raise ConfigError(f"geometry: distances must be finite and > 0, got {z}")
    return cfg


# --- evaluation ---------------------------------------------------------------------

def _empty_row(z: float, zbar: float, status: str) -> dict:
    row = {col: None for col in CSV_COLUMNS}
    row.update(z_m=z, zbar=zbar, status=status)
    return row


def evaluate_point(cfg: RunConfig, z: float) -> dict:
    """One output record; failures are reported in the status column."""
    atom, thermal = cfg.atom(), cfg.thermal()
    medium = parse_medium(cfg.medium)
    unit = ShiftUnit.for_atom(atom)
    zbar = z / atom.wavelength
    if isinstance(medium, ComplexPermittivity):
        return _empty_row(z, zbar, "error: shifts need a real permittivity or the conductor")
    if isinstance(medium, RealConstant) and medium.eps == 1.0:
        row = _empty_row(z, zbar, NO_INTERFACE)
        for col in ("dE_vac_J", "dE_eq_J", "dE_neq_J", "dE_total_J", "dE_total_unit", "F_total_N", "err_total_J"):
            row[col] = 0.0
        row["regime"] = "none"
        row.update(_unit_parts(None, unit))
        return row
    geom = Geometry(z)
    options = engine.EngineOptions(cfg.tol)
    try:
        shift = engine.total_shift(atom, medium, geom, thermal, options)
        force = engine.force(atom, medium, geom, thermal, options)
    except (CPForceError, ArithmeticError, ValueError) as exc:
        return _empty_row(z, zbar, f"error: {exc}")
    regime = asy.classify_regime(atom, geom, thermal, medium, cfg.margin)
    row = {
        "z_m": z,
        "zbar": zbar,
        "regime": regime.name,
        "dE_vac_J": shift.vac.value,
        "dE_eq_J": shift.eq.value,
        "dE_neq_J": shift.neq.value,
        "dE_total_J": shift.total,
        "dE_total_unit": unit.from_si(shift.total),
        "F_total_N": force.total,
        "err_total_J": shift.total_err,
        "asym_total_J": None,
        "formula_id": None,
        "status": _combine_status(shift.status, force.status),
    }
    if not regime.is_crossover:
        asym = asy.asymptotic_shift(atom, medium, geom, thermal, regime, cfg.margin)
        value = asym.value
        if asym.omits_contact_constant:
            # put the distance-independent term back so the column compares with dE_total_J
            eps = math.inf if isinstance(medium, PerfectConductor) else medium.eps
            s = atom.state.sign
            contact = engine.equilibrium_contact_term(thermal.beta_e / atom.wavelength, eps, s)
            contact += engine.nonequilibrium_contact_term(thermal.beta_s / atom.wavelength,
                                                          thermal.beta_e / atom.wavelength, eps, s)
            value += unit.to_si(contact)
        row["asym_total_J"] = value
        row["formula_id"] = asym.formula_id
    row.update(_unit_parts(shift, unit))
    row["regime_margins"] = dict(regime.margins)
    return row


def _unit_parts(shift, unit: ShiftUnit) -> dict:
    """Extra JSONL fields: parts in shift units and per-part errors."""
    if shift is None:
        zero = {f"dE_{p}_unit": 0.0 for p in ("vac", "eq", "neq")}
        zero.update({f"err_{p}_J": 0.0 for p in ("vac", "eq", "neq")})
        return zero
    out = {}
    for name in ("vac", "eq", "neq"):
        part = getattr(shift, name)
        out[f"dE_{name}_unit"] = unit.from_si(part.value)
        out[f"err_{name}_J"] = part.abs_err
    out["shift_unit_J"] = unit.scale
    return out


def _combine_status(*statuses: str) -> str:
    bad = [s for s in statuses if s != "ok"]
    return bad[0] if bad else "ok"


def regime_row(cfg: RunConfig, z: float) -> dict:
    atom, thermal = cfg.atom(), cfg.thermal()
    zbar = z / atom.wavelength
    try:
        label = asy.classify_regime(atom, Geometry(z), thermal, parse_medium(cfg.medium), cfg.margin)
    except CPForceError as exc:
        return {"z_m": z, "zbar": zbar, "regime": "none", "temperature": None, "distance": None,
                "margins": {}, "note": str(exc)}
    return {"z_m": z, "zbar": zbar, "regime": label.name, "temperature": label.temperature.value,
            "distance": label.distance.value, "margins": dict(label.margins), "note": label.note}


def evaluate_grid(cfg: RunConfig, func=evaluate_point) -> list[dict]:
    zs = [float(z) for z in cfg.grid()]
    if cfg.jobs == 1 or len(zs) == 1:
        return [func(cfg, z) for z in zs]
    with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
        return list(pool.map(partial(func, cfg), zs))


# --- serialization ------------------------------------------------------------------

def format_float(x: float) -> str:
    return format(x, ".17g")


def _json_value(v) -> str:
    if v is None:
        return "null"
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        if math.isnan(v):
            return "NaN"
        if math.isinf(v):
            return "Infinity" if v > 0 else "-Infinity"
        return format_float(v)
    if isinstance(v, int):
        return str(v)
    if isinstance(v, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {_json_value(val)}" for k, val in v.items()) + "}"
    return json.dumps(str(v))


def render(records: list[dict], fmt: str, columns: tuple[str, ...] = CSV_COLUMNS) -> str:
    buf = io.StringIO()
    if fmt == "jsonl":
        for rec in records:
            buf.write(_json_value(rec) + "\n")
        return buf.getvalue()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for rec in records:
        cells = []
        for col in columns:
            v = rec.get(col)
            if v is None:
                cells.append("")
            elif isinstance(v, float):
                cells.append(format_float(v))
            elif isinstance(v, dict):
                cells.append(_json_value(v))
            else:
                cells.append(str(v))
        writer.writerow(cells)
    return buf.getvalue()


def parse_output(text: str, fmt: str) -> list[dict]:
    """Inverse of :func:`render`."""
    if fmt == "jsonl":
        return [json.loads(line) for line in text.splitlines() if line.strip()]
    rows = []
    for raw in csv.DictReader(io.StringIO(text)):
        row = {}
        for col, cell in raw.items():
            if cell == "":
                row[col] = None
            elif col in TEXT_COLUMNS:
                row[col] = cell
            elif col == "margins":
                row[col] = json.loads(cell)
            else:
                row[col] = float(cell)
        rows.append(row)
    return rows


def project(records: list[dict], columns: tuple[str, ...]) -> list[dict]:
    """Records restricted to the columns a CSV file carries."""
    return [{col: rec.get(col) for col in columns} for rec in records]


# --- cache ----------------------------------------------------------------------------

def cache_dir() -> Path:
    env = os.environ.get("CPFORCE_CACHE_DIR")
    if env:
        return Path(env)
    base = os.environ.get("XDG_CACHE_HOME") or os.path.join(os.path.expanduser("~"), ".cache")
    return Path(base) / "cpforce"


def cache_key(command: str, cfg: RunConfig) -> str:
    payload = {"command": command, "version": __version__, "config": cfg.cache_payload()}
    blob = json.dumps(payload, sort_keys=True, default=str).encode()
    return hashlib.sha256(blob).hexdigest()


def atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=".tmp-")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def cached_render(command: str, cfg: RunConfig, produce, use_cache: bool = True) -> str:
    path = cache_dir() / f"{cache_key(command, cfg)}.{cfg.fmt}"
    if use_cache and path.exists():
        return path.read_text()
    text = produce()
    if use_cache:
        try:
            atomic_write(path, text)
        except OSError as exc:
            print(f"warning: cache not written ({exc})", file=sys.stderr)
    return text


def emit(text: str, out: str) -> None:
    if out == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
    else:
        atomic_write(Path(out), text)


# --- commands -------------------------------------------------------------------------

def _warn_no_interface(records: list[dict]) -> None:
    if any(r.get("status") == NO_INTERFACE for r in records):
        print("warning: no interface (eps = 1); all boundary-dependent shifts vanish", file=sys.stderr)


def cmd_shift(cfg: RunConfig, use_cache: bool = True) -> int:
    if len(cfg.grid()) != 1:
        raise ConfigError("geometry: the shift command takes a single z")
    return _run_records("shift", cfg, use_cache)


def cmd_sweep(cfg: RunConfig, use_cache: bool = True) -> int:
    return _run_records("sweep", cfg, use_cache)


def _run_records(command: str, cfg: RunConfig, use_cache: bool) -> int:
    holder: dict = {}

    def produce() -> str:
        holder["records"] = evaluate_grid(cfg)
        return render(holder["records"], cfg.fmt)

    text = cached_render(command, cfg, produce, use_cache)
    if "records" in holder:
        _warn_no_interface(holder["records"])
    elif NO_INTERFACE in text:
        print("warning: no interface (eps = 1); all boundary-dependent shifts vanish", file=sys.stderr)
    emit(text, cfg.out)
    return 0


def cmd_regimes(cfg: RunConfig) -> int:
    rows = evaluate_grid(cfg, regime_row)
    emit(render(rows, cfg.fmt, REGIME_COLUMNS), cfg.out)
    return 0


def cmd_validate(selection: list[str] | None, budget: float | None, out: str | None) -> int:
    results = validation.run_suite(selection, budget)
    for r in results:
        print(validation.summary_line(r))
    if out:
        buf = io.StringIO()
        validation.write_report(results, buf)
        emit(buf.getvalue(), out)
    return validation.exit_code(results)


# --- argument parsing -----------------------------------------------------------------

def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return value


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="INI run configuration")
    common.add_argument("--out", help="output path ('-' for stdout)")
    common.add_argument("--format", choices=("csv", "jsonl"), dest="fmt")
    common.add_argument("--jobs", type=_positive_int, help="worker processes for sweeps")
    common.add_argument("--tol", type=float, help="relative quadrature tolerance")
    common.add_argument("--margin", type=float, help="factor that counts as '<<' in regime tests")

    parser = argparse.ArgumentParser(prog="cpforce", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, text in (("shift", "evaluate one distance"), ("sweep", "evaluate a distance grid")):
        p = sub.add_parser(name, parents=[common], help=text)
        p.add_argument("--no-cache", action="store_true", help="neither read nor write the results cache")
    sub.add_parser("regimes", parents=[common], help="classify every grid point")
    v = sub.add_parser("validate", parents=[common], help="run the acceptance checks")
    v.add_argument("--select", help="comma-separated check ids (default: all)")
    v.add_argument("--budget", type=float, help="wall-clock budget in seconds")
    v.add_argument("--list", action="store_true", help="print the check ids and exit")
    return parser


def load_config(args: argparse.Namespace) -> RunConfig:
    if args.config is None:
        raise ConfigError("--config is required for this command")
    try:
        text = args.config.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from None
    values = parse_config_text(text)
    for name in ("out", "fmt", "jobs", "tol", "margin"):
        if getattr(args, name) is not None:
            values[name] = getattr(args, name)
    return build_config(values)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "validate":
        if args.list:
            print("\n".join(validation.CHECKS))
            return 0
        selection = None
        if args.select is not None:
            selection = [s.strip() for s in args.select.split(",") if s.strip()]
            unknown = [s for s in selection if s not in validation.CHECKS]
            if unknown:
                parser.error(f"unknown check id(s): {', '.join(unknown)}")
            if not selection:
                parser.error("--select needs at least one check id")
        if args.budget is not None and args.budget < 0:
            parser.error("--budget must be >= 0")
        return cmd_validate(selection, args.budget, args.out)
    try:
        cfg = load_config(args)
        if args.command == "shift":
            return cmd_shift(cfg, not args.no_cache)
        if args.command == "sweep":
            return cmd_sweep(cfg, not args.no_cache)
        return cmd_regimes(cfg)
    except ConfigError as exc:
        parser.error(str(exc))
    return 2


if __name__ == "__main__":
    sys.exit(main())
