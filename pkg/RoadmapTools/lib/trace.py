"""
anytime traces: what a planner run found, when, and at what collision checking cost
"""
import csv
from dataclasses import dataclass, field
from time import perf_counter


TRACE_COLUMNS = ("event", "elapsed_s", "checks", "length", "batch", "alpha")

SOLUTION = "solution"
BATCH_DONE = "batch_done"
INFEASIBLE = "infeasible"


class Stopwatch:
    """
    monotonic clock started at construction; a disabled stopwatch always reads 0
    """

    def __init__(self, enabled=True):
        self.enabled = enabled
        self._t0 = perf_counter()

    def elapsed(self):
        return perf_counter() - self._t0 if self.enabled else 0.0


@dataclass
class TraceEvent:
    event: str
    elapsed_s: float
    checks: int
    length: float = None
    batch: int = None
    alpha: float = None
    path: tuple = field(default=None, repr=False)

    def row(self):
        return [
            self.event,
            f"{self.elapsed_s:.6f}",
            str(self.checks),
            "" if self.length is None else repr(self.length),
            "" if self.batch is None else str(self.batch),
            "" if self.alpha is None else f"{self.alpha:.4f}",
        ]


@dataclass
class AnytimeTrace:
    metadata: dict = field(default_factory=dict)
    events: list = field(default_factory=list)

    def record(self, event):
        if self.events and event.checks < self.events[-1].checks:
            raise ValueError(f"checks went backwards: {self.events[-1].checks} -> {event.checks}")
        if event.event == SOLUTION:
            best = self.best_length
            if best is not None and not event.length < best:
                raise ValueError(f"solution of length {event.length} does not improve on {best}")
        self.events.append(event)
        return event

    @property
    def solutions(self):
        return [e for e in self.events if e.event == SOLUTION]

    @property
    def best_length(self):
        solutions = self.solutions
        return solutions[-1].length if solutions else None

    @property
    def best_path(self):
        solutions = self.solutions
        return solutions[-1].path if solutions else None

    @property
    def infeasible(self):
        return any(e.event == INFEASIBLE for e in self.events)

    def write_csv(self, filename):
        with open(filename, "w", encoding="utf-8", newline="") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(TRACE_COLUMNS)
            for event in self.events:
                writer.writerow(event.row())

    @staticmethod
    def read_csv(filename):
        """
        returns the rows of a trace CSV as dicts of strings
        """
        with open(filename, "r", encoding="utf-8", newline="") as f:
            reader = csv.DictReader(f)
            if tuple(reader.fieldnames or ()) != TRACE_COLUMNS:
                raise ValueError(f"{filename} is not a trace file, header {reader.fieldnames}")
            return list(reader)
