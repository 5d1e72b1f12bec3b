"""Pass/fail records emitted by the numerical verification routines."""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field


@dataclass
class Check:
    name: str
    passed: bool
    value: float = math.nan
    threshold: float = math.nan
    detail: str = ""

    def to_dict(self) -> dict:
        d = asdict(self)
        for key in ("value", "threshold"):
            if not math.isfinite(d[key]):
                d[key] = None
        d["passed"] = bool(d["passed"])
        return d


@dataclass
class ValidationReport:
    title: str
    checks: list[Check] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def add(self, name, passed, value=math.nan, threshold=math.nan, detail="") -> Check:
        c = Check(name, bool(passed), float(value), float(threshold), detail)
        self.checks.append(c)
        return c

    def to_dict(self) -> dict:
        return {
            "title": self.title,
            "passed": self.passed,
            "checks": [c.to_dict() for c in self.checks],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def format_table(self) -> str:
        width = max([len(c.name) for c in self.checks] + [10])
        lines = [self.title]
        for c in self.checks:
            flag = "PASS" if c.passed else "FAIL"
            lines.append(f"  [{flag}] {c.name:<{width}}  value={c.value:.4g}  limit={c.threshold:.4g}  {c.detail}")
        return "\n".join(lines)
