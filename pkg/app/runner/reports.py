from typing import Any, Dict, List, Optional, Sequence
from pathlib import Path
import json
import logging

import pandas as pd
from pydantic import BaseModel, Field

from app.config import settings

logger = logging.getLogger(__name__)


class CheckResult(BaseModel):
    name: str
    passed: bool
    value: Optional[float] = None
    tolerance: Optional[float] = None
    detail: str = ""


class SuiteResult(BaseModel):
    suite: str
    passed: bool
    checks: List[CheckResult] = Field(default_factory=list)
    error: Optional[str] = None

    @property
    def failures(self) -> List[CheckResult]:
        return [c for c in self.checks if not c.passed]


class RunReport(BaseModel):
    """Everything a run computed; wall-clock times are kept out of the JSON body."""
    instance: str
    digest: str
    command: str
    seed: int
    pressure: List[Dict[str, Any]] = Field(default_factory=list)
    variational: Optional[Dict[str, Any]] = None
    identity: List[Dict[str, Any]] = Field(default_factory=list)
    duality: Optional[Dict[str, Any]] = None
    checks: List[CheckResult] = Field(default_factory=list)
    suites: List[SuiteResult] = Field(default_factory=list)
    stages: Dict[str, float] = Field(default_factory=dict, exclude=True)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks) and all(s.passed for s in self.suites)

    def all_checks(self) -> List[CheckResult]:
        out = list(self.checks)
        for s in self.suites:
            out.extend(CheckResult(name=f"{s.suite}/{c.name}", **c.model_dump(exclude={"name"})) for c in s.checks)
        return out


def write_table(rows: Sequence[Dict[str, Any]], path: Path) -> Path:
    """CSV with 17 significant digits so reruns are byte-identical."""
    frame = pd.DataFrame(list(rows))
    frame.to_csv(path, index=False, float_format=settings.csv_float_format)
    logger.debug(f"Wrote {len(frame)} rows to {path}")
    return path


def write_json(payload: Any, path: Path) -> Path:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def _fmt(value: Optional[float]) -> str:
    return "-" if value is None else f"{value:.12g}"


def render_summary(report: RunReport) -> str:
    """Aligned plain-text summary of a report."""
    lines = [
        f"instance : {report.instance}",
        f"digest   : {report.digest}",
        f"command  : {report.command}",
        f"seed     : {report.seed}",
        f"status   : {'PASS' if report.passed else 'FAIL'}",
        "",
    ]
    if report.pressure:
        lines.append(f"{'n':>4} {'m':>3} {'log Z':>22} {'value':>22} {'running inf':>22}")
        for row in report.pressure:
            lines.append(
                f"{row['n']:>4} {row['refinement']:>3} {row['log_Z']:>22.15g} "
                f"{row['value']:>22.15g} {row['running_inf']:>22.15g}"
            )
        lines.append("")
    if report.variational:
        objective = report.variational.get("objective", {})
        lines.append(f"objective: [{_fmt(objective.get('lower'))}, {_fmt(objective.get('upper'))}]")
        lines.append(f"measure  : {objective.get('measure', '-')}")
        lines.append("")
    if report.duality:
        lines.append(f"{'potential':<24} {'pressure':>20} {'integral':>20} {'gap':>14}")
        for entry in report.duality.get("entries", []):
            lines.append(
                f"{entry['potential']:<24} {entry['pressure']:>20.12g} "
                f"{entry['integral']:>20.12g} {entry['gap']:>14.3g}"
            )
        lines.append("")

    checks = report.all_checks()
    if checks:
        width = max(len(c.name) for c in checks)
        for c in checks:
            status = "PASS" if c.passed else "FAIL"
            lines.append(f"{c.name:<{width}}  {status}  value={_fmt(c.value)}  tol={_fmt(c.tolerance)}  {c.detail}".rstrip())
    for s in report.suites:
        if s.error:
            lines.append(f"{s.suite}: ERROR {s.error}")
    return "\n".join(lines) + "\n"


def write_report(report: RunReport, out_dir: Path) -> Path:
    """report.json, summary.txt and timings.json into ``out_dir``."""
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "report.json").write_text(report.model_dump_json(indent=2) + "\n", encoding="utf-8")
    (out_dir / "summary.txt").write_text(render_summary(report), encoding="utf-8")
    write_json(report.stages, out_dir / "timings.json")
    logger.info(f"Report written to {out_dir} ({'PASS' if report.passed else 'FAIL'})")
    return out_dir / "report.json"


def load_report(path: Path) -> RunReport:
    if path.is_dir():
        path = path / "report.json"
    return RunReport.model_validate_json(path.read_text(encoding="utf-8"))
