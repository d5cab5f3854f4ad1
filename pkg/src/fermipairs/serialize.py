"""File formats: JSON and CSV schemas for counts, results, and manifests.

Complex matrices are serialized row-major as [re, im] pairs.  All writers
are deterministic: the same inputs produce byte-identical files.
"""

import csv
import json
from pathlib import Path

import numpy as np

from .experiment import AnalyzerSetting, CountsRecord, ExperimentConfig, SettingsPlanEntry
from .fermi_gas import DetectorProfile
from .tomography import TomographyResult, tomography_settings

COUNTS_FORMAT = "fermipairs.counts/1"
RESULT_FORMAT = "fermipairs.tomography/1"
MANIFEST_FORMAT = "fermipairs.manifest/1"

OUTCOME_KEYS = ("++", "+-", "-+", "--")  # row-major over (arm1 port, arm2 port)

__all__ = [
    "matrix_to_pairs",
    "matrix_from_pairs",
    "write_json",
    "read_json",
    "counts_record_to_dict",
    "counts_record_from_dict",
    "write_counts_csv",
    "read_counts_csv",
    "load_counts",
    "write_events_csv",
    "tomography_result_to_dict",
    "config_from_dict",
    "load_config",
    "build_manifest",
]


def matrix_to_pairs(m: np.ndarray) -> list:
    """Complex matrix as nested row-major lists of [re, im] pairs."""
    m = np.asarray(m, dtype=complex)
    return [[[float(z.real), float(z.imag)] for z in row] for row in m]


def matrix_from_pairs(data) -> np.ndarray:
    rows = [[complex(entry[0], entry[1]) for entry in row] for row in data]
    return np.array(rows, dtype=complex)


def write_json(path, payload: dict) -> None:
    Path(path).write_text(json.dumps(payload, indent=2) + "\n")


def read_json(path) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ValueError(f"{path}: not valid JSON ({exc})") from None


def _require(mapping: dict, key: str, where: str):
    if key not in mapping:
        raise ValueError(f"{where}: missing required field {key!r}")
    return mapping[key]


def counts_record_to_dict(record: CountsRecord, manifest: str = "") -> dict:
    payload = {
        "format": COUNTS_FORMAT,
        "settings": [s.to_dict() for s in record.settings],
        "joint_counts": [
            {
                "setting": k,
                **{
                    key: int(record.joint[k, idx // 2, idx % 2])
                    for idx, key in enumerate(OUTCOME_KEYS)
                },
            }
            for k in range(len(record.settings))
        ],
        "singles": {
            "arm1": {"plus": int(record.singles[0, 0]), "minus": int(record.singles[0, 1])},
            "arm2": {"plus": int(record.singles[1, 0]), "minus": int(record.singles[1, 1])},
        },
        "metadata": record.metadata,
    }
    if manifest:
        payload["manifest"] = manifest
    return payload


def _setting_from_dict(data: dict, where: str) -> AnalyzerSetting:
    return AnalyzerSetting(
        axis1=_require(data, "axis1", where),
        axis2=_require(data, "axis2", where),
        eta_plus=float(data.get("eta_plus", 1.0)),
        eta_minus=float(data.get("eta_minus", 1.0)),
        label=str(data.get("label", "")),
    )


def counts_record_from_dict(payload: dict) -> CountsRecord:
    where = "counts record"
    fmt = _require(payload, "format", where)
    if fmt != COUNTS_FORMAT:
        raise ValueError(f"{where}: unsupported format {fmt!r}")
    settings = tuple(
        _setting_from_dict(s, f"{where} setting {k}")
        for k, s in enumerate(_require(payload, "settings", where))
    )
    joint = np.zeros((len(settings), 2, 2), dtype=np.int64)
    for row in _require(payload, "joint_counts", where):
        k = int(_require(row, "setting", f"{where} joint_counts"))
        if not 0 <= k < len(settings):
            raise ValueError(f"{where}: joint_counts references unknown setting {k}")
        for idx, key in enumerate(OUTCOME_KEYS):
            joint[k, idx // 2, idx % 2] = int(_require(row, key, f"{where} joint_counts"))
    singles = np.zeros((2, 2), dtype=np.int64)
    singles_data = payload.get("singles", {})
    for arm_idx, arm_key in enumerate(("arm1", "arm2")):
        arm = singles_data.get(arm_key, {})
        singles[arm_idx, 0] = int(arm.get("plus", 0))
        singles[arm_idx, 1] = int(arm.get("minus", 0))
    return CountsRecord(
        settings=settings,
        joint=joint,
        singles=singles,
        metadata=payload.get("metadata", {}),
    )


_CSV_HEADER = [
    "setting", "label",
    "axis1_x", "axis1_y", "axis1_z",
    "axis2_x", "axis2_y", "axis2_z",
    "eta_plus", "eta_minus", "outcome", "count",
]


def write_counts_csv(path, record: CountsRecord, manifest: str = "") -> None:
    """Flat CSV: one row per setting and joint outcome, settings inlined."""
    with open(path, "w", newline="") as fh:
        if manifest:
            fh.write(f"# manifest: {manifest}\n")
        writer = csv.writer(fh)
        writer.writerow(_CSV_HEADER)
        for k, setting in enumerate(record.settings):
            for idx, key in enumerate(OUTCOME_KEYS):
                writer.writerow([
                    k, setting.label,
                    *(repr(float(c)) for c in setting.axis1),
                    *(repr(float(c)) for c in setting.axis2),
                    repr(setting.eta_plus), repr(setting.eta_minus),
                    key, int(record.joint[k, idx // 2, idx % 2]),
                ])


def read_counts_csv(path) -> CountsRecord:
    """Rebuild a counts record from the flat CSV (singles are not stored there)."""
    settings: dict = {}
    joint: dict = {}
    with open(path, newline="") as fh:
        rows = [line for line in fh if not line.startswith("#")]
    reader = csv.DictReader(rows)
    if reader.fieldnames is None or set(_CSV_HEADER) - set(reader.fieldnames):
        raise ValueError(f"{path}: not a counts CSV (header mismatch)")
    for row in reader:
        try:
            k = int(row["setting"])
            outcome = row["outcome"]
            count = int(row["count"])
            if k not in settings:
                settings[k] = AnalyzerSetting(
                    axis1=[float(row["axis1_x"]), float(row["axis1_y"]), float(row["axis1_z"])],
                    axis2=[float(row["axis2_x"]), float(row["axis2_y"]), float(row["axis2_z"])],
                    eta_plus=float(row["eta_plus"]),
                    eta_minus=float(row["eta_minus"]),
                    label=row["label"],
                )
            idx = OUTCOME_KEYS.index(outcome)
        except (TypeError, KeyError, ValueError) as exc:
            raise ValueError(f"{path}: malformed counts CSV row ({exc})") from None
        joint.setdefault(k, np.zeros((2, 2), dtype=np.int64))[idx // 2, idx % 2] = count
    if not settings:
        raise ValueError(f"{path}: counts CSV contains no rows")
    order = sorted(settings)
    if order != list(range(len(order))):
        raise ValueError(f"{path}: setting ids must be 0..{len(order) - 1}")
    return CountsRecord(
        settings=tuple(settings[k] for k in order),
        joint=np.stack([joint[k] for k in order]),
        singles=np.zeros((2, 2), dtype=np.int64),
        metadata={"kind": "csv-import", "source": str(path)},
    )


def load_counts(path) -> CountsRecord:
    """Read a counts record from a .json or .csv file."""
    path = Path(path)
    if path.suffix.lower() == ".csv":
        return read_counts_csv(path)
    return counts_record_from_dict(read_json(path))


def write_events_csv(path, events, manifest: str = "") -> None:
    with open(path, "w", newline="") as fh:
        if manifest:
            fh.write(f"# manifest: {manifest}\n")
        writer = csv.writer(fh)
        writer.writerow(["t", "kind", "outcome", "setting_id"])
        for ev in events:
            label = ("+" if ev.outcome[0] > 0 else "-") + ("+" if ev.outcome[1] > 0 else "-")
            writer.writerow([repr(ev.t), ev.kind, label, ev.setting_id])


def tomography_result_to_dict(result: TomographyResult, manifest: str = "") -> dict:
    payload = {
        "format": RESULT_FORMAT,
        "raw_coefficients": [[float(v) for v in row] for row in result.raw],
        "raw_errors": [[float(v) for v in row] for row in result.raw_errors],
        "reconciled_coefficients": [[float(v) for v in row] for row in result.reconciled],
        "errors": [[float(v) for v in row] for row in result.errors],
        "linear_state": matrix_to_pairs(result.linear_state),
        "min_eigenvalue": result.min_eigenvalue,
        "physical_state": matrix_to_pairs(result.physical_state),
    }
    if manifest:
        payload["manifest"] = manifest
    return payload


def config_from_dict(data: dict, where: str = "config") -> ExperimentConfig:
    """Build an ExperimentConfig from the flat key-value document.

    ``settings`` is either the string "tomography" (nine axis-pair
    settings, each with ``target_per_setting`` coincidences) or an
    explicit list of settings, each carrying its own target.
    """
    required = ("n_trapped", "hole_ratio", "collision_rate", "efficiency",
                "window", "duration")
    values = {key: _require(data, key, where) for key in required}
    settings_value = data.get("settings", "tomography")
    if settings_value == "tomography":
        target = int(data.get("target_per_setting", 3))
        plan = tuple(
            SettingsPlanEntry(setting=s, target=target) for s in tomography_settings()
        )
    elif isinstance(settings_value, list):
        plan = tuple(
            SettingsPlanEntry(
                setting=_setting_from_dict(entry, f"{where} settings[{k}]"),
                target=int(_require(entry, "target", f"{where} settings[{k}]")),
            )
            for k, entry in enumerate(settings_value)
        )
    else:
        raise ValueError(f"{where}: settings must be \"tomography\" or a list")
    return ExperimentConfig(
        n_trapped=int(values["n_trapped"]),
        hole_ratio=float(values["hole_ratio"]),
        collision_rate=float(values["collision_rate"]),
        efficiency=float(values["efficiency"]),
        window=float(values["window"]),
        duration=float(values["duration"]),
        settings_plan=plan,
        pair_separation=float(data.get("pair_separation", 0.0)),
        profile=DetectorProfile(float(data.get("sigma", 0.0))),
        true_pair_fraction=float(data.get("true_pair_fraction", 0.5)),
        seed=int(data.get("seed", 0)),
    ).validate()


def load_config(path) -> ExperimentConfig:
    return config_from_dict(read_json(path), where=str(path))


def build_manifest(subcommand: str, version: str, argv, resolved: dict, outputs) -> dict:
    return {
        "format": MANIFEST_FORMAT,
        "tool": "fermipairs",
        "version": version,
        "subcommand": subcommand,
        "argv": list(argv),
        "resolved": resolved,
        "outputs": list(outputs),
    }
