"""Check records and verification reports with deterministic text/CSV output."""

from __future__ import annotations

from dataclasses import dataclass, field

CSV_HEADER = "name,relation,bound,measured,se,tolerance,passed"


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


@dataclass(frozen=True)
class Check:
    """One verified inequality: measured `relation` bound within tolerance."""

    name: str
    relation: str  # "<=", ">=" or "info"
    bound: float
    measured: float
    se: float
    tolerance: float
    passed: bool

    def line(self) -> str:
        status = "pass" if self.passed else "FAIL"
        if self.relation == "info":
            return f"{status} {self.name}: value={_fmt(self.measured)} se={_fmt(self.se)}"
        return (
            f"{status} {self.name}: measured={_fmt(self.measured)} "
            f"{self.relation} bound={_fmt(self.bound)} "
            f"se={_fmt(self.se)} tol={_fmt(self.tolerance)}"
        )

    def csv_row(self) -> str:
        return ",".join(
            [
                self.name,
                self.relation,
                _fmt(self.bound),
                _fmt(self.measured),
                _fmt(self.se),
                _fmt(self.tolerance),
                "true" if self.passed else "false",
            ]
        )


@dataclass
class VerificationReport:
    """Ordered list of checks; passes iff every check passes."""

    title: str = ""
    checks: list[Check] = field(default_factory=list)

    def add(self, check: Check) -> Check:
        self.checks.append(check)
        return check

    def check_le(self, name, measured, bound, *, tol=0.0, se=0.0) -> Check:
        ok = bool(measured <= bound + tol)
        return self.add(Check(name, "<=", float(bound), float(measured), float(se), float(tol), ok))

    def check_ge(self, name, measured, bound, *, tol=0.0, se=0.0) -> Check:
        ok = bool(measured >= bound - tol)
        return self.add(Check(name, ">=", float(bound), float(measured), float(se), float(tol), ok))

    def add_info(self, name, value, *, se=0.0) -> Check:
        return self.add(Check(name, "info", float(value), float(value), float(se), 0.0, True))

    def extend(self, other: "VerificationReport", prefix: str = "") -> None:
        for c in other.checks:
            self.add(
                Check(prefix + c.name, c.relation, c.bound, c.measured, c.se, c.tolerance, c.passed)
            )

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def n_failed(self) -> int:
        return sum(not c.passed for c in self.checks)

    def to_text(self) -> str:
        head = [f"# {self.title}"] if self.title else []
        tail = [f"# {len(self.checks)} checks, {self.n_failed} failed"]
        return "\n".join(head + [c.line() for c in self.checks] + tail) + "\n"

    def to_csv(self) -> str:
        return "\n".join([CSV_HEADER] + [c.csv_row() for c in self.checks]) + "\n"

    def write(self, text_path, csv_path) -> None:
        with open(text_path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(self.to_text())
        with open(csv_path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(self.to_csv())

    def __str__(self) -> str:
        return self.to_text()
