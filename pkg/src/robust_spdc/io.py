"""Design-file persistence and CSV tables.

Design files are JSON with SI units spelled out in every field name.  The
canonical serialization (sorted keys, two-space indent, trailing newline)
is byte-stable under load/dump round trips.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from pathlib import Path

from .designer import DesignConstraints
from .errors import DesignFileError
from .robustness import RobustnessSpec, SweepTable
from .sensitivity import SensitivityCoefficients
from .su11 import Design, PumpPhysics, Segment, TrajectorySample

SCHEMA_VERSION = 1
CSV_DIGITS = 12


@dataclass(frozen=True)
class DesignFile:
    design: Design
    sensitivity: SensitivityCoefficients
    pump: PumpPhysics | None = None
    constraints: DesignConstraints | None = None
    schema_version: int = SCHEMA_VERSION


# -- encoding -----------------------------------------------------------------

def _design_dict(design: Design) -> dict:
    return {
        "name": design.name,
        "work_temperature_c": design.work_temperature,
        "segments": [
            {"omega_rad_per_m": s.omega, "delta_k_rad_per_m": s.delta_k, "length_m": s.length}
            for s in design.segments
        ],
        "metadata": design.metadata,
    }


def _sensitivity_dict(coeffs: SensitivityCoefficients) -> dict:
    return {
        "dk_dT_rad_per_m_per_c": coeffs.dk_dT,
        "dk_dlambda_rad_per_m_per_nm": coeffs.dk_dlambda,
        "dk_dtheta_rad_per_m_per_deg": coeffs.dk_dtheta,
    }


def _pump_dict(p: PumpPhysics) -> dict:
    return {
        "chi2_m_per_v": p.chi2,
        "n_signal": p.n_s,
        "n_idler": p.n_i,
        "n_pump": p.n_p,
        "omega_signal_rad_per_s": p.omega_s,
        "omega_idler_rad_per_s": p.omega_i,
        "omega_pump_rad_per_s": p.omega_p,
        "pump_amplitude": p.pump_amplitude,
    }


def constraints_dict(c: DesignConstraints) -> dict:
    f = c.flatness
    return {
        "min_domain_width_m": c.min_domain_width,
        "efficiency_floor": c.efficiency_floor,
        "max_total_length_m": c.max_total_length,
        "delta_k_material_rad_per_m": c.delta_k_material,
        "flatness": {
            "work_temperature_c": f.work_temperature,
            "half_window_c": f.half_window,
            "order": f.order,
            "threshold": f.flatness_threshold,
        },
    }


def dumps(doc: DesignFile) -> str:
    body = {
        "schema_version": doc.schema_version,
        "design": _design_dict(doc.design),
        "sensitivity": _sensitivity_dict(doc.sensitivity),
    }
    if doc.pump is not None:
        body["pump"] = _pump_dict(doc.pump)
    if doc.constraints is not None:
        body["constraints"] = constraints_dict(doc.constraints)
    return json.dumps(body, sort_keys=True, indent=2, allow_nan=False) + "\n"


def save(doc: DesignFile, path: str | Path) -> None:
    Path(path).write_text(dumps(doc), encoding="utf-8")


# -- decoding -----------------------------------------------------------------

class _Reader:
    """Typed field access that reports the JSON path of whatever is wrong."""

    def __init__(self, data, path: str):
        if not isinstance(data, dict):
            raise DesignFileError("expected an object", field=path or "<root>")
        self.data, self.path = data, path

    def _name(self, key):
        return f"{self.path}.{key}" if self.path else key

    def has(self, key):
        return self.data.get(key) is not None

    def sub(self, key):
        if key not in self.data:
            raise DesignFileError("missing", field=self._name(key))
        return _Reader(self.data[key], self._name(key))

    def number(self, key, default=..., optional=False):
        if key not in self.data or (optional and self.data[key] is None):
            if optional:
                return None
            if default is ...:
                raise DesignFileError("missing", field=self._name(key))
            return default
        v = self.data[key]
        if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
            raise DesignFileError(f"expected a finite number, got {v!r}", field=self._name(key))
        return float(v)

    def integer(self, key, default=...):
        v = self.number(key, default)
        if v != int(v):
            raise DesignFileError(f"expected an integer, got {v!r}", field=self._name(key))
        return int(v)

    def text(self, key, default=...):
        v = self.data.get(key, default)
        if v is ...:
            raise DesignFileError("missing", field=self._name(key))
        if not isinstance(v, str):
            raise DesignFileError(f"expected a string, got {v!r}", field=self._name(key))
        return v


def _parse_design(r: _Reader) -> Design:
    raw = r.data.get("segments")
    if not isinstance(raw, list) or not raw:
        raise DesignFileError("expected a non-empty list", field=r._name("segments"))
    segments = []
    for i, item in enumerate(raw):
        s = _Reader(item, f"{r.path}.segments[{i}]")
        try:
            segments.append(Segment(s.number("omega_rad_per_m"), s.number("delta_k_rad_per_m"),
                                    s.number("length_m")))
        except ValueError as exc:
            if isinstance(exc, DesignFileError):
                raise
            raise DesignFileError(str(exc), field=s.path) from None
    meta = r.data.get("metadata", {})
    if not isinstance(meta, dict):
        raise DesignFileError("expected an object", field=r._name("metadata"))
    return Design(tuple(segments), name=r.text("name", "design"),
                  work_temperature=r.number("work_temperature_c", 37.0), metadata=meta)


def _parse_sensitivity(r: _Reader) -> SensitivityCoefficients:
    return SensitivityCoefficients(
        dk_dT=r.number("dk_dT_rad_per_m_per_c", optional=True),
        dk_dlambda=r.number("dk_dlambda_rad_per_m_per_nm", optional=True),
        dk_dtheta=r.number("dk_dtheta_rad_per_m_per_deg", optional=True),
    )


def _parse_pump(r: _Reader) -> PumpPhysics:
    try:
        return PumpPhysics(r.number("chi2_m_per_v"), r.number("n_signal"), r.number("n_idler"), r.number("n_pump"),
                           r.number("omega_signal_rad_per_s"), r.number("omega_idler_rad_per_s"),
                           r.number("omega_pump_rad_per_s"), r.number("pump_amplitude", 1.0))
    except ValueError as exc:
        if isinstance(exc, DesignFileError):
            raise
        raise DesignFileError(str(exc), field=r.path) from None


def parse_constraints(data, path: str = "constraints") -> DesignConstraints:
    r = _Reader(data, path)
    default = DesignConstraints()
    spec = default.flatness
    if r.has("flatness"):
        f = r.sub("flatness")
        try:
            spec = RobustnessSpec(f.number("work_temperature_c", spec.work_temperature),
                                  f.number("half_window_c", spec.half_window),
                                  f.integer("order", spec.order),
                                  f.number("threshold", spec.flatness_threshold))
        except ValueError as exc:
            if isinstance(exc, DesignFileError):
                raise
            raise DesignFileError(str(exc), field=f.path) from None
    try:
        return DesignConstraints(
            min_domain_width=r.number("min_domain_width_m", optional=True),
            efficiency_floor=r.number("efficiency_floor", default.efficiency_floor),
            flatness=spec,
            max_total_length=r.number("max_total_length_m", default.max_total_length),
            delta_k_material=r.number("delta_k_material_rad_per_m", optional=True),
        )
    except ValueError as exc:
        if isinstance(exc, DesignFileError):
            raise
        raise DesignFileError(str(exc), field=path) from None


def loads(text: str) -> DesignFile:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DesignFileError(f"invalid JSON ({exc.msg} at line {exc.lineno})") from None
    r = _Reader(data, "")
    version = r.integer("schema_version")
    if version != SCHEMA_VERSION:
        raise DesignFileError(f"unsupported version {version}", field="schema_version")
    design = _parse_design(r.sub("design"))
    sensitivity = _parse_sensitivity(r.sub("sensitivity")) if r.has("sensitivity") else SensitivityCoefficients()
    pump = _parse_pump(r.sub("pump")) if r.has("pump") else None
    constraints = parse_constraints(r.data["constraints"]) if r.has("constraints") else None
    return DesignFile(design, sensitivity, pump, constraints, version)


def load(path: str | Path) -> DesignFile:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise DesignFileError(f"cannot read {path}: {exc}") from None
    return loads(text)


def load_constraints(path: str | Path) -> DesignConstraints:
    """Constraints from a bare constraints object or from a design file that carries one."""
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, UnicodeDecodeError) as exc:
        raise DesignFileError(f"cannot read {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise DesignFileError(f"invalid JSON ({exc.msg} at line {exc.lineno})") from None
    if isinstance(data, dict) and "constraints" in data:
        return parse_constraints(data["constraints"])
    return parse_constraints(data, path="")


# -- tables -------------------------------------------------------------------

def _fmt(v: float) -> str:
    return f"{v:.{CSV_DIGITS}g}"


def _write(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def trajectory_csv(samples: list[TrajectorySample]) -> str:
    peak = max(s.mu for s in samples)
    rows = [(s.z, s.mu, s.mu / peak if peak > 0 else 0.0, s.point.u, s.point.v, s.point.w) for s in samples]
    return _write(["z_m", "mu", "mu_normalized", "u", "v", "w"], rows)


def sweep_csv(table: SweepTable) -> str:
    return _write(["deviation", "mu", "mu_normalized"], zip(table.deviation, table.mu, table.mu_normalized))


def read_csv(text: str) -> dict[str, list[float]]:
    reader = csv.reader(io.StringIO(text))
    header = next(reader)
    cols = {h: [] for h in header}
    for row in reader:
        for h, v in zip(header, row):
            cols[h].append(float(v))
    return cols
