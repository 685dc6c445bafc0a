###############################################################################
# Output formatting: run-time strings, CSV artifacts and canonical hashing.
# OVERFITSIM project
# License: GPL v3
###############################################################################
import csv
import dataclasses
import enum
import hashlib
import json
import math
import os
from typing import Any, Iterable, Optional, Sequence

import numpy as np

UNDEFINED = "undefined"


def format_time(seconds):
    if seconds > 3600:
        return f"*\t {math.floor(seconds/3600):.0f} hours, {math.floor(seconds%3600/60):.0f} minutes, " \
               f"{seconds % 60:.0f} seconds to run"
    if seconds > 60:
        return f"*\t {math.floor(seconds/60):.0f} minutes, {seconds%60:.0f} seconds to run"

    return f"*\t {seconds:.1f} seconds to run"


def format_value(value) -> str:
    """Render one CSV cell. Floats use 17 significant digits so values survive a text round trip exactly."""
    if value is None:
        return UNDEFINED
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    return str(value)


def to_jsonable(obj: Any):
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: to_jsonable(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, enum.Enum):
        return obj.name
    if isinstance(obj, dict):
        return {str(key): to_jsonable(val) for key, val in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(item) for item in obj]
    if isinstance(obj, np.ndarray):
        return [to_jsonable(item) for item in obj.tolist()]
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        value = float(obj)
        if not math.isfinite(value):
            return str(value)
        return value
    return obj


def canonical_json(obj: Any) -> str:
    return json.dumps(to_jsonable(obj), sort_keys=True, separators=(",", ":"), ensure_ascii=True)


def config_hash(config: dict) -> str:
    return hashlib.sha256(canonical_json(config).encode("utf-8")).hexdigest()


def write_csv(path: str | os.PathLike, header: Sequence[str], rows: Iterable[Sequence],
              comments: Optional[dict] = None):
    with open(path, 'w', encoding="utf-8", newline="") as csv_file:
        for key, value in (comments or {}).items():
            csv_file.write(f"# {key}: {value}\n")
        table_writer = csv.writer(csv_file, lineterminator="\n")
        table_writer.writerow(header)
        for row in rows:
            table_writer.writerow([format_value(value) for value in row])
    return path


def write_json(path: str | os.PathLike, record: Any):
    with open(path, 'w', encoding="utf-8", newline="\n") as json_file:
        json.dump(to_jsonable(record), json_file, ensure_ascii=False, indent=4, sort_keys=True)
        json_file.write("\n")
    return path


def write_jsonl(path: str | os.PathLike, records: Iterable[Any]):
    with open(path, 'w', encoding="utf-8", newline="\n") as jsonl_file:
        for record in records:
            jsonl_file.write(json.dumps(to_jsonable(record), ensure_ascii=False, sort_keys=True) + "\n")
    return path
