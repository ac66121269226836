"""Serialization, run manifests, and the write-once fixture store.

Output contract: CSV is RFC-4180 style (comma separated, header row, LF line
endings); JSON uses UTF-8 with sorted keys.  Rationals render as "p/q"
strings, doubles with 17 significant digits so emitted values roundtrip
exactly.  Payload files carry no timestamps; manifests do, so replaying a
manifest reproduces byte-identical payloads while the manifest itself may
differ in its clock fields.
"""

from __future__ import annotations

import csv
import datetime
import hashlib
import io
import json
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path

TOOL_VERSION = "0.1.0"


def render_value(v) -> str:
    if isinstance(v, Fraction):
        return str(v)
    if isinstance(v, float):
        return format(v, ".17g")
    if isinstance(v, bool):
        return "true" if v else "false"
    return str(v)


def csv_bytes(header, rows) -> bytes:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([render_value(v) for v in row])
    return buf.getvalue().encode("utf-8")


def emit_csv(path, header, rows) -> Path:
    path = Path(path)
    path.write_bytes(csv_bytes(header, rows))
    return path


def json_bytes(obj) -> bytes:
    return (json.dumps(jsonable(obj), sort_keys=True, indent=2) + "\n").encode("utf-8")


def emit_json(path, obj) -> Path:
    path = Path(path)
    path.write_bytes(json_bytes(obj))
    return path


def jsonable(obj):
    """Recursively convert report objects to JSON-safe structures."""
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, float):
        return float(format(obj, ".17g"))
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if hasattr(obj, "__dataclass_fields__"):
        return jsonable(asdict(obj))
    if hasattr(obj, "tolist"):
        return jsonable(obj.tolist())
    return obj


def sha256_hex(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


@dataclass
class RunManifest:
    """Record of one CLI invocation, sufficient to replay it."""

    subcommand: str
    argv: list
    params: dict
    seed: int | None
    version: str = TOOL_VERSION
    started: str = ""
    finished: str = ""
    outputs: dict = field(default_factory=dict)   # filename -> sha256 of bytes

    def start(self):
        self.started = datetime.datetime.now(datetime.timezone.utc).isoformat()

    def finish(self):
        self.finished = datetime.datetime.now(datetime.timezone.utc).isoformat()

    def add_output(self, path: Path, data: bytes):
        self.outputs[Path(path).name] = sha256_hex(data)

    def write(self, path) -> Path:
        return emit_json(path, asdict(self))

    @staticmethod
    def load(path) -> "RunManifest":
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
        return RunManifest(
            subcommand=raw["subcommand"],
            argv=list(raw["argv"]),
            params=dict(raw["params"]),
            seed=raw.get("seed"),
            version=raw.get("version", TOOL_VERSION),
            started=raw.get("started", ""),
            finished=raw.get("finished", ""),
            outputs=dict(raw.get("outputs", {})),
        )


class FixtureStore:
    """Write-once store of frozen oracle values.

    Each entry carries the value and a provenance note naming the oracle that
    produced it.  Overwriting requires force=True; routine runs must never
    silently regenerate a fixture.
    """

    def __init__(self, path):
        self.path = Path(path)
        self._data = {}
        if self.path.exists():
            self._data = json.loads(self.path.read_text(encoding="utf-8"))

    def __contains__(self, key):
        return key in self._data

    def get(self, key):
        entry = self._data.get(key)
        if entry is None:
            raise KeyError(f"no fixture {key!r} in {self.path}")
        return entry["value"]

    def note(self, key) -> str:
        return self._data[key]["note"]

    def record(self, key, value, note, force=False):
        if key in self._data and not force:
            raise ValueError(f"fixture {key!r} already frozen; pass force=True to overwrite")
        self._data[key] = {"value": jsonable(value), "note": note}
        self.path.write_bytes(json_bytes(self._data))

    def keys(self):
        return sorted(self._data)
