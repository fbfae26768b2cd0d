"""File formats: scenario configs, record files, result reports, CSV.

Everything is JSON with sorted keys and native float repr, which
round-trips IEEE doubles losslessly (well beyond the 12 significant
digits the solver tolerances require).  Unknown keys are rejected so a
typo in a config fails loudly instead of being ignored.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

import numpy as np

from .core import PAULIS, InvalidStateError, ParameterError
from .estimator import EstimationResult, ExperimentRecord, KAPPA_MAX_DEFAULT
from .protocol import (
    OMEGA_LABELS,
    CouplingTensor,
    LocalHamiltonians,
    ProtocolRun,
)

TOOL_VERSION = "0.1.0"


class ConfigError(ValueError):
    """Config or record file is structurally invalid."""


@dataclass(frozen=True)
class ScenarioOptions:
    seed: int = 0
    noise: float = 0.0
    dent_threshold: float = 1e-3
    grid: tuple[float, float, float] = (1e-3, 0.2, 1e-3)  # start, stop, step
    kappa_max: float = KAPPA_MAX_DEFAULT


@dataclass(frozen=True, eq=False)
class ScenarioConfig:
    coupling: CouplingTensor
    runs: tuple[ProtocolRun, ...]
    locals_: LocalHamiltonians = field(default_factory=LocalHamiltonians.zero)
    options: ScenarioOptions = field(default_factory=ScenarioOptions)


def _reject_unknown(mapping: dict, allowed: set[str], where: str) -> None:
    unknown = set(mapping) - allowed
    if unknown:
        raise ConfigError(f"unknown key(s) in {where}: {sorted(unknown)}")


def _vector(obj, where: str) -> np.ndarray:
    try:
        v = np.asarray(obj, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{where} is not a numeric 3-vector") from exc
    if v.shape != (3,):
        raise ConfigError(f"{where} must have exactly 3 components")
    return v


def parse_grid_spec(spec) -> tuple[float, float, float]:
    """Parse "MIN:MAX:STEP" (or a 3-sequence) into a validated triple."""
    if isinstance(spec, str):
        parts = spec.split(":")
        if len(parts) != 3:
            raise ConfigError(f"grid spec {spec!r} is not MIN:MAX:STEP")
        try:
            start, stop, step = (float(x) for x in parts)
        except ValueError as exc:
            raise ConfigError(f"grid spec {spec!r} has non-numeric parts") from exc
    else:
        try:
            start, stop, step = (float(x) for x in spec)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"grid spec {spec!r} is not a triple") from exc
    if not (0.0 < start < stop and step > 0.0):
        raise ConfigError(f"grid spec {spec!r} must satisfy 0 < MIN < MAX, STEP > 0")
    return start, stop, step


def grid_times(grid: tuple[float, float, float]) -> np.ndarray:
    start, stop, step = grid
    n = int(np.floor((stop - start) / step + 1e-9)) + 1
    return start + step * np.arange(n)


def parse_config(doc: dict) -> ScenarioConfig:
    if not isinstance(doc, dict):
        raise ConfigError("config root must be an object")
    _reject_unknown(doc, {"coupling_mhz", "local_fields", "runs", "options"}, "config")
    if "coupling_mhz" not in doc or "runs" not in doc:
        raise ConfigError("config requires 'coupling_mhz' and 'runs'")

    coupling_doc = doc["coupling_mhz"]
    if not isinstance(coupling_doc, dict):
        raise ConfigError("'coupling_mhz' must be an object of six components")
    _reject_unknown(coupling_doc, set(OMEGA_LABELS), "coupling_mhz")
    missing = set(OMEGA_LABELS) - set(coupling_doc)
    if missing:
        raise ConfigError(f"coupling_mhz missing component(s): {sorted(missing)}")
    coupling = CouplingTensor(
        np.array([float(coupling_doc[k]) for k in OMEGA_LABELS])
    )

    locals_doc = doc.get("local_fields", {})
    _reject_unknown(locals_doc, {"target", "probe"}, "local_fields")
    locals_ = LocalHamiltonians.from_fields(
        target=_vector(locals_doc.get("target", (0, 0, 0)), "local_fields.target"),
        probe=_vector(locals_doc.get("probe", (0, 0, 0)), "local_fields.probe"),
    )

    runs_doc = doc["runs"]
    if not isinstance(runs_doc, list) or not runs_doc:
        raise ConfigError("'runs' must be a non-empty list")
    runs = []
    for i, run_doc in enumerate(runs_doc):
        where = f"runs[{i}]"
        if not isinstance(run_doc, dict):
            raise ConfigError(f"{where} must be an object")
        _reject_unknown(run_doc, {"r_i", "p", "q", "dt"}, where)
        for key in ("r_i", "p", "q", "dt"):
            if key not in run_doc:
                raise ConfigError(f"{where} missing '{key}'")
        try:
            runs.append(
                ProtocolRun(
                    r_i=_vector(run_doc["r_i"], f"{where}.r_i"),
                    p=_vector(run_doc["p"], f"{where}.p"),
                    q_tilde=_vector(run_doc["q"], f"{where}.q"),
                    dt=float(run_doc["dt"]),
                )
            )
        except (InvalidStateError, ParameterError) as exc:
            # keep the exception type (invariant violation, not a parse
            # error) but name the offending run
            raise type(exc)(f"{where}: {exc}") from exc

    options_doc = doc.get("options", {})
    _reject_unknown(
        options_doc,
        {"seed", "noise", "dent_threshold", "grid", "kappa_max"},
        "options",
    )
    options = ScenarioOptions(
        seed=int(options_doc.get("seed", 0)),
        noise=float(options_doc.get("noise", 0.0)),
        dent_threshold=float(options_doc.get("dent_threshold", 1e-3)),
        grid=parse_grid_spec(options_doc.get("grid", (1e-3, 0.2, 1e-3))),
        kappa_max=float(options_doc.get("kappa_max", KAPPA_MAX_DEFAULT)),
    )
    return ScenarioConfig(coupling=coupling, runs=tuple(runs), locals_=locals_, options=options)


def load_config(path: str) -> ScenarioConfig:
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    return parse_config(doc)


def config_to_doc(config: ScenarioConfig) -> dict:
    return {
        "coupling_mhz": dict(zip(OMEGA_LABELS, config.coupling.values.tolist())),
        "local_fields": {
            "target": _field_of(config.locals_.h_target),
            "probe": _field_of(config.locals_.h_probe),
        },
        "runs": [
            {
                "r_i": run.r_i.tolist(),
                "p": run.p.tolist(),
                "q": run.q_tilde.tolist(),
                "dt": run.dt,
            }
            for run in config.runs
        ],
        "options": {
            "seed": config.options.seed,
            "noise": config.options.noise,
            "dent_threshold": config.options.dent_threshold,
            "grid": list(config.options.grid),
            "kappa_max": config.options.kappa_max,
        },
    }


def _field_of(h: np.ndarray) -> list[float]:
    # h = h0*I + f.sigma; only the traceless field part matters.
    return [float(np.trace(h @ PAULIS[a]).real / 2.0) for a in range(3)]


def dump_json(doc: dict) -> str:
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def save_config(config: ScenarioConfig, path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dump_json(config_to_doc(config)))


def records_to_doc(records, meta: dict | None = None) -> dict:
    doc = {
        "records": [
            {
                "r_i": rec.r_i.tolist(),
                "r_f": rec.r_f.tolist(),
                "p": rec.p.tolist(),
                "q": rec.q.tolist(),
                "dt": rec.dt,
                "expectation": rec.expectation,
            }
            for rec in records
        ]
    }
    if meta is not None:
        doc["meta"] = meta
    return doc


def parse_records(doc: dict) -> list[ExperimentRecord]:
    if not isinstance(doc, dict):
        raise ConfigError("record file root must be an object")
    _reject_unknown(doc, {"records", "meta"}, "record file")
    records_doc = doc.get("records")
    if not isinstance(records_doc, list):
        raise ConfigError("'records' must be a list")
    records = []
    for i, rec_doc in enumerate(records_doc):
        where = f"records[{i}]"
        if not isinstance(rec_doc, dict):
            raise ConfigError(f"{where} must be an object")
        _reject_unknown(
            rec_doc, {"r_i", "r_f", "p", "q", "dt", "expectation"}, where
        )
        for key in ("r_i", "r_f", "p", "q", "dt", "expectation"):
            if key not in rec_doc:
                raise ConfigError(f"{where} missing '{key}'")
        try:
            records.append(
                ExperimentRecord(
                    r_i=_vector(rec_doc["r_i"], f"{where}.r_i"),
                    r_f=_vector(rec_doc["r_f"], f"{where}.r_f"),
                    p=_vector(rec_doc["p"], f"{where}.p"),
                    q=_vector(rec_doc["q"], f"{where}.q"),
                    dt=float(rec_doc["dt"]),
                    expectation=float(rec_doc["expectation"]),
                )
            )
        except (InvalidStateError, ParameterError) as exc:
            raise type(exc)(f"{where}: {exc}") from exc
    return records


def load_records(path: str) -> list[ExperimentRecord]:
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    return parse_records(doc)


def load_records_meta(path: str) -> dict:
    """The 'meta' block of a record file, empty when absent."""
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    meta = doc.get("meta", {}) if isinstance(doc, dict) else {}
    return meta if isinstance(meta, dict) else {}


def save_records(records, path: str, meta: dict | None = None) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dump_json(records_to_doc(records, meta)))


def report_doc(
    result: EstimationResult,
    *,
    per_record_residuals,
    provenance: dict,
) -> dict:
    doc = {
        "coupling_mhz": dict(zip(OMEGA_LABELS, result.g_est.values.tolist())),
        "matrix_mhz": result.g_est.matrix.tolist(),
        "condition_number": result.condition_number,
        "residual_norm": result.residual_norm,
        "per_record_residuals": list(per_record_residuals),
        "provenance": provenance,
    }
    if result.error_stats is not None:
        doc["error_mean_mhz"] = result.error_stats[0]
        doc["error_std_mhz"] = result.error_stats[1]
    return doc


def sha256_of_file(path: str) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        digest.update(fh.read())
    return digest.hexdigest()


def curve_csv_lines(times, values, dent_flags) -> list[str]:
    """CSV rows: dt in us, Delta, dent flag; 12 significant digits."""
    lines = ["dt_us,delta,dent"]
    for t, v, flag in zip(times, values, dent_flags):
        lines.append(f"{t:.12g},{v:.12g},{int(flag)}")
    return lines
