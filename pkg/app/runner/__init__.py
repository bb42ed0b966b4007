"""
Instance loading, verification suites, reports and the run coordinator.
"""

from .instance import Instance, InstanceConfig, load_instance, parse_instance
from .reports import CheckResult, SuiteResult, RunReport, load_report, render_summary, write_report
from .suites import (
    BaseSuite,
    IdentitySuite,
    InequalitiesSuite,
    FolnerSuite,
    DualitySuite,
    OracleSuite,
    SuiteRunner,
    default_runner,
)
from .coordinator import RunCoordinator

__all__ = [
    "Instance",
    "InstanceConfig",
    "load_instance",
    "parse_instance",
    "CheckResult",
    "SuiteResult",
    "RunReport",
    "load_report",
    "render_summary",
    "write_report",
    "BaseSuite",
    "IdentitySuite",
    "InequalitiesSuite",
    "FolnerSuite",
    "DualitySuite",
    "OracleSuite",
    "SuiteRunner",
    "default_runner",
    "RunCoordinator",
]
