"""
Per-session metrics rows, the moving average over the last sessions, and the append-only CSV
sink they are written to.
"""

import csv
from pathlib import Path

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from shop_sim.session import SessionTrajectory
from ssmdp_core.errors import InvalidArgumentError
from ssmdp_core.types import TerminalKind

CSV_HEADER = ("session", "transaction_amount", "terminal", "length", "moving_avg", "wall_ms")


class MetricsRow(BaseModel):
    model_config = ConfigDict(frozen=True)

    session: int = Field(ge=1, description="1-based index of the learning session.")
    transaction_amount: float = Field(ge=0.0, description="Deal price on a purchase, else 0.")
    terminal: TerminalKind
    length: int = Field(ge=1, description="Pages displayed in the session.")
    moving_avg: float = Field(description="Mean transaction amount over the trailing window.")
    wall_ms: int = Field(default=0, ge=0, description="Elapsed milliseconds, 0 unless wall-clock recording is on.")

    def as_csv(self) -> list[str]:
        return [
            str(self.session),
            repr(self.transaction_amount),
            self.terminal.value,
            str(self.length),
            repr(self.moving_avg),
            str(self.wall_ms),
        ]


class MovingAverage:
    """Trailing mean over the last `window` values, kept in a ring so it can be checkpointed."""

    def __init__(self, window: int):
        if window < 1:
            raise InvalidArgumentError("window must be at least 1")
        self.ring = np.zeros(window)
        self.count = np.zeros(1)

    @property
    def window(self) -> int:
        return self.ring.shape[0]

    def push(self, value: float) -> float:
        seen = int(self.count[0])
        self.ring[seen % self.window] = value
        self.count += 1.0
        return self.value

    @property
    def value(self) -> float:
        filled = min(int(self.count[0]), self.window)
        if filled == 0:
            return 0.0
        return float(np.mean(self.ring[:filled]))

    def state_arrays(self) -> dict[str, np.ndarray]:
        return {"ring": self.ring, "count": self.count}

    def load_state_arrays(self, arrays: dict[str, np.ndarray]) -> None:
        np.copyto(self.ring, arrays["ring"])
        np.copyto(self.count, arrays["count"])


def metrics_row(session: int, trajectory: SessionTrajectory, average: MovingAverage, wall_ms: int = 0) -> MetricsRow:
    """Record one session and fold its transaction amount into the moving average."""
    amount = trajectory.transaction_amount
    return MetricsRow(
        session=session,
        transaction_amount=amount,
        terminal=trajectory.terminal_kind,
        length=trajectory.final_step,
        moving_avg=average.push(amount),
        wall_ms=wall_ms,
    )


def moving_averages(amounts: np.ndarray, window: int) -> np.ndarray:
    """The moving-average column recomputed from the raw transaction amounts."""
    cumulative = np.concatenate(([0.0], np.cumsum(amounts)))
    ends = np.arange(1, amounts.shape[0] + 1)
    starts = np.maximum(ends - window, 0)
    return (cumulative[ends] - cumulative[starts]) / (ends - starts)


class CsvSink:
    """Appends rows to a metrics CSV, writing the header only when the file is new or empty."""

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        fresh = not self.path.exists() or self.path.stat().st_size == 0
        self._file = self.path.open("a", newline="", encoding="utf-8")
        self._writer = csv.writer(self._file, lineterminator="\n")
        if fresh:
            self._writer.writerow(CSV_HEADER)

    def write(self, row: MetricsRow) -> None:
        self._writer.writerow(row.as_csv())

    def close(self) -> None:
        self._file.close()

    def __enter__(self) -> "CsvSink":
        return self

    def __exit__(self, *exc) -> None:
        self.close()


def read_metrics(path: str | Path) -> list[MetricsRow]:
    with Path(path).open(newline="", encoding="utf-8") as handle:
        reader = csv.DictReader(handle)
        if tuple(reader.fieldnames or ()) != CSV_HEADER:
            raise InvalidArgumentError(f"{path} does not carry the metrics header")
        return [MetricsRow.model_validate(record) for record in reader]
