"""Loading and validation of the four-scenario WEC layout/power dataset.

Each data row carries 49 comma-separated numeric fields: the 16 converter
positions interleaved as x1,y1,...,x16,y16 (32 fields), the 16 absorbed
powers, and the total farm power. Coordinates live on a 0..566 m square.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

N_WEC = 16
N_POSITION_FIELDS = 2 * N_WEC
N_FIELDS = N_POSITION_FIELDS + N_WEC + 1  # positions + powers + total
COORD_MIN = 0.0
COORD_MAX = 566.0

SCENARIOS = ("Sydney", "Adelaide", "Perth", "Tasmania")


class DatasetError(Exception):
    """Raised for unreadable, malformed, or empty dataset files."""


class ParseError(DatasetError):
    """Raised when a single row cannot be parsed."""

    def __init__(self, row_index: int, message: str):
        self.row_index = row_index
        super().__init__(f"row {row_index}: {message}")


def column_name(col: int) -> str:
    """Human-readable name for a 0-based column index (x1, y1, ..., power1, ..., total_power)."""
    if col < N_POSITION_FIELDS:
        wec = col // 2 + 1
        return f"{'x' if col % 2 == 0 else 'y'}{wec}"
    if col < N_POSITION_FIELDS + N_WEC:
        return f"power{col - N_POSITION_FIELDS + 1}"
    return "total_power"


@dataclass(frozen=True)
class WecLayout:
    """Ordered positions of the 16 converters, shape (16, 2), meters."""

    positions: np.ndarray

    def __post_init__(self):
        pos = np.asarray(self.positions, dtype=float)
        if pos.shape != (N_WEC, 2):
            raise ValueError(f"expected {N_WEC} (x, y) positions, got shape {pos.shape}")
        object.__setattr__(self, "positions", pos)

    def flat(self) -> np.ndarray:
        """Positions flattened back to x1,y1,...,x16,y16 order."""
        return self.positions.reshape(-1)


@dataclass(frozen=True)
class FarmRecord:
    """One dataset row: layout, per-WEC absorbed powers, and total farm power."""

    layout: WecLayout
    powers: np.ndarray
    total_power: float

    def __post_init__(self):
        powers = np.asarray(self.powers, dtype=float)
        if powers.shape != (N_WEC,):
            raise ValueError(f"expected {N_WEC} power values, got shape {powers.shape}")
        object.__setattr__(self, "powers", powers)
        object.__setattr__(self, "total_power", float(self.total_power))


@dataclass
class FarmDataset:
    """All records of one scenario, stored column-wise for fast vector math.

    ``positions`` is (N, 32) in file order, ``powers`` is (N, 16), and
    ``totals`` is (N,). ``record(i)`` materializes a row as a FarmRecord.
    """

    scenario: str
    positions: np.ndarray
    powers: np.ndarray
    totals: np.ndarray
    source_path: str = ""

    def __post_init__(self):
        if self.scenario not in SCENARIOS:
            raise ValueError(f"unknown scenario {self.scenario!r}; expected one of {SCENARIOS}")
        if len(self.totals) == 0:
            raise DatasetError("empty dataset")

    def __len__(self) -> int:
        return len(self.totals)

    def record(self, i: int) -> FarmRecord:
        return FarmRecord(
            layout=WecLayout(self.positions[i].reshape(N_WEC, 2)),
            powers=self.powers[i],
            total_power=self.totals[i],
        )

    @property
    def records(self) -> list[FarmRecord]:
        return [self.record(i) for i in range(len(self))]

    def layout_points(self) -> np.ndarray:
        """Positions reshaped to (N, 16, 2)."""
        return self.positions.reshape(len(self), N_WEC, 2)


@dataclass
class ValidationReport:
    """Range and power-sum consistency check results for one dataset."""

    record_count: int
    range_violations: list[tuple[int, str, float]] = field(default_factory=list)
    sum_mismatches: list[tuple[int, float]] = field(default_factory=list)

    @property
    def status(self) -> str:
        return "pass" if not self.range_violations and not self.sum_mismatches else "warn"

    def to_dict(self) -> dict:
        return {
            "record_count": self.record_count,
            "range_violations": [
                {"row": r, "column": c, "value": v} for r, c, v in self.range_violations
            ],
            "sum_mismatches": [
                {"row": r, "relative_error": e} for r, e in self.sum_mismatches
            ],
            "status": self.status,
        }

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)


def parse_record(line: str, row_index: int = 0) -> FarmRecord:
    """Parse one CSV data row into a FarmRecord.

    The row must carry exactly 49 numeric fields in the published order:
    x1,y1,...,x16,y16, power1..power16, total_power.
    """
    fields = line.strip().split(",")
    if len(fields) != N_FIELDS:
        raise ParseError(row_index, f"expected {N_FIELDS} fields, got {len(fields)}")
    values = np.empty(N_FIELDS)
    for col, token in enumerate(fields):
        try:
            values[col] = float(token)
        except ValueError:
            raise ParseError(
                row_index, f"non-numeric field {token!r} in column {column_name(col)}"
            ) from None
    return FarmRecord(
        layout=WecLayout(values[:N_POSITION_FIELDS].reshape(N_WEC, 2)),
        powers=values[N_POSITION_FIELDS : N_POSITION_FIELDS + N_WEC],
        total_power=values[-1],
    )


def format_record(record: FarmRecord) -> str:
    """Render a FarmRecord back to a CSV row at full round-trip precision."""
    values = [*record.layout.flat(), *record.powers, record.total_power]
    return ",".join(repr(float(v)) for v in values)


def _looks_like_header(line: str) -> bool:
    for token in line.strip().split(","):
        try:
            float(token)
        except ValueError:
            return True
    return False


def load_dataset(
    path: str | Path, scenario: str, header_policy: str = "auto"
) -> FarmDataset:
    """Load one scenario file into a FarmDataset.

    header_policy: ``auto`` skips a non-numeric first row, ``skip`` always
    drops the first row, ``none`` treats every row as data. Parse failures
    are aggregated (up to 20 rows reported) before raising.
    """
    if header_policy not in ("auto", "skip", "none"):
        raise ValueError(f"unknown header_policy {header_policy!r}")
    path = Path(path)
    if not path.is_file():
        raise DatasetError(f"dataset file not found: {path}")

    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln for ln in fh if ln.strip()]
    if lines:
        if header_policy == "skip" or (header_policy == "auto" and _looks_like_header(lines[0])):
            lines = lines[1:]
    if not lines:
        raise DatasetError(f"empty dataset: {path}")

    n = len(lines)
    data = np.empty((n, N_FIELDS))
    errors: list[str] = []
    for i, line in enumerate(lines):
        fields = line.strip().split(",")
        if len(fields) != N_FIELDS:
            errors.append(f"row {i}: expected {N_FIELDS} fields, got {len(fields)}")
        else:
            try:
                data[i] = [float(t) for t in fields]
            except ValueError:
                bad = next(t for t in fields if not _is_float(t))
                col = fields.index(bad)
                errors.append(f"row {i}: non-numeric field {bad!r} in column {column_name(col)}")
        if len(errors) >= 20:
            break
    if errors:
        raise DatasetError(
            f"{path}: {len(errors)} parse error(s) (first {min(len(errors), 20)} shown):\n  "
            + "\n  ".join(errors)
        )

    return FarmDataset(
        scenario=scenario,
        positions=data[:, :N_POSITION_FIELDS],
        powers=data[:, N_POSITION_FIELDS : N_POSITION_FIELDS + N_WEC],
        totals=data[:, -1],
        source_path=str(path),
    )


def _is_float(token: str) -> bool:
    try:
        float(token)
        return True
    except ValueError:
        return False


def validate_dataset(ds: FarmDataset, sum_tolerance: float = 1e-6) -> ValidationReport:
    """Check coordinate ranges and power-sum consistency; never mutates ds.

    Flags every coordinate outside [0, 566] m and every record whose total
    differs from the sum of per-WEC powers by more than ``sum_tolerance``
    relative. Violations are report content, not exceptions.
    """
    if sum_tolerance <= 0:
        raise ValueError("sum_tolerance must be positive")
    report = ValidationReport(record_count=len(ds))

    bad = (ds.positions < COORD_MIN) | (ds.positions > COORD_MAX)
    for row, col in zip(*np.nonzero(bad)):
        report.range_violations.append(
            (int(row), column_name(int(col)), float(ds.positions[row, col]))
        )

    sums = ds.powers.sum(axis=1)
    denom = np.where(ds.totals != 0, np.abs(ds.totals), 1.0)
    rel = np.abs(ds.totals - sums) / denom
    for row in np.nonzero(rel > sum_tolerance)[0]:
        report.sum_mismatches.append((int(row), float(rel[row])))

    return report


def total_power_series(ds: FarmDataset) -> np.ndarray:
    """Total farm power per record, watts."""
    return ds.totals


def generate_synthetic_dataset(
    scenario: str, n_records: int, seed: int = 0, noise: float = 0.02
) -> FarmDataset:
    """Build a synthetic dataset with the production schema for fixture use.

    Powers follow a smooth spacing-dependent response (wider layouts absorb
    more, saturating near the site scale) plus relative noise, so the
    distance/power correlation structure resembles the real farms without
    bundling the archive.
    """
    rng = np.random.default_rng(seed)
    pts = rng.uniform(COORD_MIN, COORD_MAX, size=(n_records, N_WEC, 2))
    diff = pts[:, :, None, :] - pts[:, None, :, :]
    dist = np.sqrt((diff**2).sum(axis=-1))
    per_wec_avg = dist.sum(axis=2) / (N_WEC - 1)

    base = 96_000.0  # isolated-converter power, watts
    interaction = 1.0 - np.exp(-per_wec_avg / 250.0)  # masking eases with spacing
    powers = base * interaction * (1.0 + noise * rng.standard_normal((n_records, N_WEC)))
    powers = np.maximum(powers, 0.0)
    totals = powers.sum(axis=1)
    return FarmDataset(
        scenario=scenario,
        positions=pts.reshape(n_records, N_POSITION_FIELDS),
        powers=powers,
        totals=totals,
        source_path=f"synthetic:{scenario}:{seed}",
    )


def write_dataset_csv(ds: FarmDataset, path: str | Path, header: bool = True) -> None:
    """Write a dataset back out in the published 49-column CSV layout."""
    path = Path(path)
    with open(path, "w", encoding="utf-8") as fh:
        if header:
            fh.write(",".join(column_name(c) for c in range(N_FIELDS)) + "\n")
        for i in range(len(ds)):
            fh.write(format_record(ds.record(i)) + "\n")
