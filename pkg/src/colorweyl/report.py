"""Serialisation of check reports as JSON or an aligned text table."""

from __future__ import annotations

import json
import platform

import numpy as np

from . import __version__
from .theorems import Report


def report_payload(report: Report) -> dict:
    return {
        "instance": report.instance,
        "checks": [c.to_dict() for c in report.checks],
        "rng_seed": report.rng_seed,
        "versions": {
            "colorweyl": __version__,
            "numpy": np.__version__,
            "python": platform.python_version(),
        },
    }


def _json_default(x):
    if isinstance(x, (np.integer,)):
        return int(x)
    return str(x)


def _dims_text(dims: dict) -> str:
    return " ".join(f"{k}={v}" for k, v in dims.items())


def emit_report(report: Report, fmt: str = "json") -> str:
    """JSON is byte-stable for a fixed input and seed (timings are left out)."""
    if fmt == "json":
        return json.dumps(report_payload(report), indent=2, sort_keys=True, default=_json_default) + "\n"
    if fmt != "table":
        raise ValueError(f"unknown report format {fmt!r}")
    inst = report.instance
    head = f"instance {inst.get('name', '?')} over {inst.get('field', '?')}, dim A = {inst.get('dim_A', '?')}"
    rows = [("check", "verdict", "seconds", "dims", "flags")]
    for c in report.checks:
        rows.append((c.id, c.verdict.status, f"{c.seconds:.2f}", _dims_text(c.dims), ",".join(sorted(c.flags)) or "-"))
    widths = [max(len(r[k]) for r in rows) for k in range(4)]
    lines = [head]
    for r in rows:
        lines.append("  ".join(r[k].ljust(widths[k]) for k in range(4)) + "  " + r[4])
    lines.append(f"exit code {report.exit_code}")
    return "\n".join(lines) + "\n"
