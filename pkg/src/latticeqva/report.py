"""Verification reports: deterministic, machine-parseable serialization.

Timing is collected but excluded from the default serialization so that two
runs over the same configuration produce byte-identical reports; pass
``timings=True`` to include wall-clock figures (breaking byte-identity).
"""

from __future__ import annotations

import json

REPORT_VERSION = 1


class Report:
    def __init__(self, config_name, checks):
        self.config_name = config_name
        self.checks = list(checks)

    def all_pass(self) -> bool:
        return all(c.status == "pass" for c in self.checks)

    def summary(self) -> str:
        npass = sum(1 for c in self.checks if c.status == "pass")
        return f"{npass}/{len(self.checks)} checks passed"


def emit_report(report: Report, fmt: str = "json", timings: bool = False) -> bytes:
    if fmt == "json":
        checks = []
        for c in report.checks:
            rec = {"suite": c.suite, "instance": c.instance, "status": c.status}
            if c.status != "pass":
                rec["expected"] = c.expected
                rec["actual"] = c.actual
                rec["location"] = c.location
            if timings:
                rec["ms"] = round(c.ms, 3)
            checks.append(rec)
        doc = {"version": REPORT_VERSION, "config": report.config_name, "checks": checks}
        return (json.dumps(doc, indent=2, sort_keys=False) + "\n").encode()
    if fmt == "text":
        lines = []
        for c in report.checks:
            mark = "PASS" if c.status == "pass" else "FAIL"
            line = f"{mark} {c.suite} :: {c.instance}"
            if timings:
                line += f" ({c.ms:.1f} ms)"
            lines.append(line)
            if c.status != "pass":
                lines.append(f"     expected {c.expected}")
                lines.append(f"     actual   {c.actual}")
                lines.append(f"     at       {c.location}")
        lines.append(report.summary())
        return ("\n".join(lines) + "\n").encode()
    raise ValueError(f"unknown report format {fmt!r}")
