"""Run log records and their CSV serialization.

Two schemas, both versioned via a leading comment line that readers skip:

per_iteration v1: iteration, agent_id, train_return, eval_score, epsilon
per_generation v1: generation, agent_id, raw_score, norm_score, lineage,
                   gamma_value, rank, role, v_range

Floats are written with repr() so every row parses back to its source
value exactly (NaN round-trips as nan).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

ITERATION_SCHEMA = "# lerl-csv per_iteration v1"
ITERATION_HEADER = ["iteration", "agent_id", "train_return", "eval_score", "epsilon"]
GENERATION_SCHEMA = "# lerl-csv per_generation v1"
GENERATION_HEADER = ["generation", "agent_id", "raw_score", "norm_score", "lineage",
                     "gamma_value", "rank", "role", "v_range"]

ITERATION_CSV = "per_iteration.csv"
GENERATION_CSV = "per_generation.csv"


@dataclass
class IterationRecord:
    iteration: int
    agent_id: int
    train_return: float
    eval_score: float
    epsilon: float

    def to_row(self) -> list[str]:
        return [str(self.iteration), str(self.agent_id), repr(self.train_return),
                repr(self.eval_score), repr(self.epsilon)]

    @classmethod
    def from_row(cls, row: list[str]) -> "IterationRecord":
        return cls(int(row[0]), int(row[1]), float(row[2]), float(row[3]),
                   float(row[4]))


@dataclass
class GenerationRecord:
    generation: int
    agent_id: int
    raw_score: float
    norm_score: float
    lineage: float
    gamma_value: float
    rank: int
    role: str
    v_range: float

    def to_row(self) -> list[str]:
        return [str(self.generation), str(self.agent_id), repr(self.raw_score),
                repr(self.norm_score), repr(self.lineage), repr(self.gamma_value),
                str(self.rank), self.role, repr(self.v_range)]

    @classmethod
    def from_row(cls, row: list[str]) -> "GenerationRecord":
        return cls(int(row[0]), int(row[1]), float(row[2]), float(row[3]),
                   float(row[4]), float(row[5]), int(row[6]), row[7], float(row[8]))


class CsvLog:
    """Append-oriented CSV writer that flushes after every batch so a
    crashed run leaves complete rows behind."""

    def __init__(self, path: str | Path, schema_line: str, header: list[str]):
        self.path = Path(path)
        self._handle = open(self.path, "w", newline="")
        self._writer = csv.writer(self._handle)
        self._handle.write(schema_line + "\n")
        self._writer.writerow(header)
        self._handle.flush()

    def append(self, records) -> None:
        for record in records:
            self._writer.writerow(record.to_row())
        self._handle.flush()

    def close(self) -> None:
        if not self._handle.closed:
            self._handle.close()


def _read_rows(path: str | Path, schema_line: str, header: list[str]) -> list[list[str]]:
    with open(path, newline="") as handle:
        first = handle.readline().rstrip("\n")
        if first != schema_line:
            raise ValueError(f"{path}: expected schema line {schema_line!r}, got {first!r}")
        reader = csv.reader(handle)
        got_header = next(reader)
        if got_header != header:
            raise ValueError(f"{path}: unexpected header {got_header}")
        return [row for row in reader if row]


def write_iteration_csv(path: str | Path, records: list[IterationRecord]) -> None:
    log = CsvLog(path, ITERATION_SCHEMA, ITERATION_HEADER)
    log.append(records)
    log.close()


def read_iteration_csv(path: str | Path) -> list[IterationRecord]:
    return [IterationRecord.from_row(row)
            for row in _read_rows(path, ITERATION_SCHEMA, ITERATION_HEADER)]


def write_generation_csv(path: str | Path, records: list[GenerationRecord]) -> None:
    log = CsvLog(path, GENERATION_SCHEMA, GENERATION_HEADER)
    log.append(records)
    log.close()


def read_generation_csv(path: str | Path) -> list[GenerationRecord]:
    return [GenerationRecord.from_row(row)
            for row in _read_rows(path, GENERATION_SCHEMA, GENERATION_HEADER)]
