"""Line-oriented alarm log files.

    # ftlsim alarm log v1
    # cycles=<n> master_seed=<seed> cycle_length_ns=<ns>
    cycle_index,seed,alarm_time_ns
    0,8311594093842612398,12873012
    0,8311594093842612398,48211873
    1,1220459338725190211,

One alarm per line; a cycle without alarms is a single line with an empty
time field so that every cycle has at least one record.
"""
from __future__ import annotations

from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import FtlsimError
from .optics_sim import NS, AlarmLog

MAGIC = "# ftlsim alarm log v1"
COLUMNS = "cycle_index,seed,alarm_time_ns"


class LogFormatError(FtlsimError, OSError):
    """An alarm log file is missing, truncated or malformed."""


def format_logs(logs: Sequence[AlarmLog], master_seed: int, cycle_length: float) -> str:
    lines = [
        MAGIC,
        f"# cycles={len(logs)} master_seed={master_seed} cycle_length_ns={round(cycle_length * NS)}",
        COLUMNS,
    ]
    for log in logs:
        prefix = f"{log.cycle_index},{log.seed},"
        if len(log) == 0:
            lines.append(prefix)
        else:
            lines.extend(prefix + str(ns) for ns in log.alarm_ns.tolist())
    return "\n".join(lines) + "\n"


def write_logs(path, logs: Sequence[AlarmLog], master_seed: int, cycle_length: float) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="\n") as fh:
        fh.write(format_logs(logs, master_seed, cycle_length))
    return path


def _header(lines: Iterable[str]) -> dict[str, str]:
    out = {}
    for line in lines:
        for item in line.lstrip("#").split():
            if "=" in item:
                k, v = item.split("=", 1)
                out[k] = v
    return out


def read_logs(path) -> list[AlarmLog]:
    path = Path(path)
    try:
        text = path.read_text()
    except FileNotFoundError:
        raise LogFormatError(f"{path}: alarm log not found") from None
    lines = text.splitlines()
    if not lines or lines[0] != MAGIC:
        raise LogFormatError(f"{path}: not an ftlsim alarm log")
    comments = [ln for ln in lines if ln.startswith("#")]
    meta = _header(comments)
    body = [ln for ln in lines if ln and not ln.startswith("#")]
    if not body or body[0] != COLUMNS:
        raise LogFormatError(f"{path}: missing column header")
    try:
        length = int(meta["cycle_length_ns"]) / NS
        expected = int(meta["cycles"])
    except (KeyError, ValueError):
        raise LogFormatError(f"{path}: malformed header") from None
    try:
        logs = _parse_records(body[1:], length)
    except ValueError as exc:
        raise LogFormatError(f"{path}: {exc}") from None
    if len(logs) != expected:
        raise LogFormatError(f"{path}: header announces {expected} cycles, found {len(logs)}")
    return logs


def _parse_records(records: list[str], length: float) -> list[AlarmLog]:
    logs: list[AlarmLog] = []
    current, seed, times = None, None, []
    for n, line in enumerate(records, start=1):
        parts = line.split(",")
        if len(parts) != 3:
            raise ValueError(f"record {n}: expected 3 fields")
        try:
            idx, sd = int(parts[0]), int(parts[1])
            ns = int(parts[2]) if parts[2] else None
        except ValueError:
            raise ValueError(f"record {n}: non-integer field") from None
        if idx != current:
            if current is not None:
                if idx < current:
                    raise ValueError(f"record {n}: cycle indices out of order")
                logs.append(AlarmLog(current, np.array(times, dtype=np.int64) / NS, seed, length))
            current, seed, times = idx, sd, []
        if ns is not None:
            times.append(ns)
    if current is not None:
        logs.append(AlarmLog(current, np.array(times, dtype=np.int64) / NS, seed, length))
    return logs
