import json
from dataclasses import dataclass, field
from typing import Optional

import pandas as pd

VERDICTS = ("pass", "fail", "error")


@dataclass
class CaseResult:
    id: int
    verdict: str
    witness: Optional[dict] = None

    def to_dict(self):
        data = {"id": self.id, "verdict": self.verdict}
        if self.witness is not None:
            data["witness"] = self.witness
        return data

    @classmethod
    def from_dict(cls, data):
        if data.get("verdict") not in VERDICTS:
            raise ValueError(f"Unknown verdict {data.get('verdict')!r}")
        return cls(int(data["id"]), data["verdict"], data.get("witness"))


@dataclass
class Report:
    suite: str
    config: dict
    cases: list
    elapsed_ms: float = 0.0
    expected_failure: bool = False
    info: dict = field(default_factory=dict)

    @property
    def passed_cases(self):
        return sum(1 for c in self.cases if c.verdict == "pass")

    @property
    def failed_cases(self):
        return [c for c in self.cases if c.verdict != "pass"]

    @property
    def ok(self):
        """Ordinary suites need every case to pass; expected-failure suites need a witness."""
        if self.expected_failure:
            return any(c.verdict == "fail" for c in self.cases)
        return bool(self.cases) and not self.failed_cases

    def to_dict(self):
        return {
            "suite": self.suite,
            "config": dict(self.config),
            "cases": [c.to_dict() for c in self.cases],
            "elapsed_ms": self.elapsed_ms,
            "expected_failure": self.expected_failure,
            "ok": self.ok,
            "info": self.info,
        }

    @classmethod
    def from_dict(cls, data):
        try:
            cases = [CaseResult.from_dict(c) for c in data["cases"]]
            return cls(data["suite"], data.get("config", {}), cases, data.get("elapsed_ms", 0.0),
                       data.get("expected_failure", False), data.get("info") or {})
        except (KeyError, TypeError) as e:
            raise ValueError(f"Malformed report: {e}") from e


# --- Tables ---

def case_table(report):
    """One row per case; lhs and rhs come from the witness, or the error text."""
    rows = []
    for case in report.cases:
        witness = case.witness or {}
        rows.append({
            "case": case.id,
            "verdict": case.verdict,
            "lhs": witness.get("lhs", ""),
            "rhs": witness.get("rhs", witness.get("error", "")),
        })
    return pd.DataFrame(rows, columns=["case", "verdict", "lhs", "rhs"])


def summary_table(reports):
    rows = [{
        "suite": r.suite,
        "cases": len(r.cases),
        "pass": r.passed_cases,
        "fail": sum(1 for c in r.cases if c.verdict == "fail"),
        "error": sum(1 for c in r.cases if c.verdict == "error"),
        "expected_failure": r.expected_failure,
        "status": "ok" if r.ok else "FAILED",
        "elapsed_ms": r.elapsed_ms,
    } for r in reports]
    return pd.DataFrame(rows, columns=["suite", "cases", "pass", "fail", "error", "expected_failure",
                                       "status", "elapsed_ms"])


# --- Rendering ---

def _text(report):
    status = "ok" if report.ok else "FAILED"
    kind = " (expected failure)" if report.expected_failure else ""
    lines = [f"Suite {report.suite}{kind}: {status}, {report.passed_cases}/{len(report.cases)} cases pass "
             f"in {report.elapsed_ms:.1f} ms"]
    shown = [c for c in report.cases if c.verdict != "pass"]
    if shown:
        table = case_table(report)
        lines.append(table[table["verdict"] != "pass"].to_string(index=False))
        first = shown[0].witness or {}
        if first.get("inputs"):
            lines.append("Witness (seed %s, case %s):" % (first.get("seed"), first.get("case")))
            lines.extend(f"  {name} = {value}" for name, value in first["inputs"].items())
    for key, value in report.info.items():
        lines.append(f"{key}: {json.dumps(value) if isinstance(value, dict) else value}")
    return "\n".join(lines)


def emit_report(report, fmt="text"):
    """Render one report, or a list of reports, as text or JSON."""
    reports = report if isinstance(report, list) else [report]
    if fmt == "json":
        payload = [r.to_dict() for r in reports]
        return json.dumps(payload if isinstance(report, list) else payload[0], indent=2)
    if fmt != "text":
        raise ValueError(f"Unknown report format {fmt!r}")
    body = "\n\n".join(_text(r) for r in reports)
    if len(reports) > 1:
        body += "\n\n" + summary_table(reports).to_string(index=False)
    return body


def parse_report(document):
    """Inverse of the JSON form of emit_report; a list document gives a list of reports."""
    data = json.loads(document)
    if isinstance(data, list):
        return [Report.from_dict(d) for d in data]
    return Report.from_dict(data)
