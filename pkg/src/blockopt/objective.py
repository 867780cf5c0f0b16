"""Black-box objective wrapper: evaluation, trial records and cost accounting."""

from __future__ import annotations

import json
import logging
import math
import queue
import shlex
import subprocess
import threading
import time
from dataclasses import dataclass, field
from typing import Any, Callable, Mapping, Sequence

from .space import Assignment, SearchSpace

log = logging.getLogger(__name__)

OK, FAILED, TIMEOUT = "ok", "failed", "timeout"
BUDGET_MODES = ("seconds", "count")


class EvaluationError(RuntimeError):
    """The evaluator reported an error for one request."""


@dataclass(frozen=True)
class Trial:
    assignment: Assignment
    value: float
    cost: float
    fidelity: float = 1.0
    status: str = OK
    elapsed: float = 0.0
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.status == OK


@dataclass
class History:
    trials: list = field(default_factory=list)
    best_so_far: float | None = None

    def record(self, trial: Trial) -> "History":
        self.trials.append(trial)
        if trial.ok and (self.best_so_far is None or trial.value < self.best_so_far):
            self.best_so_far = trial.value
        return self

    def __len__(self) -> int:
        return len(self.trials)

    def ok_trials(self) -> list[Trial]:
        return [t for t in self.trials if t.ok]

    def ok_values(self) -> list[float]:
        return [t.value for t in self.trials if t.ok]

    @property
    def n_ok(self) -> int:
        return sum(1 for t in self.trials if t.ok)

    def best_trial(self) -> Trial | None:
        best = None
        for t in self.trials:
            if t.ok and (best is None or t.value < best.value):
                best = t
        return best

    def penalty(self) -> float:
        """Loss assigned to failed and timed-out trials."""
        vals = self.ok_values()
        if not vals:
            return 1.0
        worst, best = max(vals), min(vals)
        return worst + 0.1 * (worst - best)


@dataclass
class CostModel:
    alpha: float = 0.3
    ema_cost: float = 0.0
    n_obs: int = 0

    def __post_init__(self):
        if not 0 < self.alpha <= 1:
            raise ValueError("alpha must be in (0, 1]")

    def update(self, observed: float) -> "CostModel":
        if observed < 0:
            raise ValueError(f"negative cost {observed}")
        if self.n_obs == 0:
            self.ema_cost = float(observed)
        else:
            self.ema_cost = self.alpha * observed + (1 - self.alpha) * self.ema_cost
        self.n_obs += 1
        return self


@dataclass(frozen=True)
class ObjectiveSpec:
    """What to minimize.

    ``evaluator`` is either a callable ``(assignment, fidelity, dataset_ref) -> float``
    or a :class:`SubprocessEvaluator`.
    """

    space: SearchSpace
    evaluator: Any
    dataset_ref: Any = None
    timeout: float = 60.0
    budget_mode: str = "count"

    def __post_init__(self):
        if not self.timeout > 0:
            raise ValueError("timeout must be > 0")
        if self.budget_mode not in BUDGET_MODES:
            raise ValueError(f"budget_mode must be one of {BUDGET_MODES}")

    @classmethod
    def from_function(cls, space: SearchSpace, fn: Callable[[Assignment], float], **kw) -> "ObjectiveSpec":
        return cls(space, lambda a, fidelity, dataset: fn(a), **kw)


def _call_with_deadline(fn: Callable[[], float], timeout: float) -> float:
    box: dict = {}

    def target():
        try:
            box["value"] = fn()
        except BaseException as exc:  # noqa: BLE001 - evaluator faults are data
            box["error"] = exc

    th = threading.Thread(target=target, daemon=True)
    th.start()
    th.join(timeout)
    if th.is_alive():
        raise TimeoutError(f"evaluation exceeded {timeout}s")
    if "error" in box:
        raise box["error"]
    return box["value"]


def evaluate(spec: ObjectiveSpec, assignment: Mapping, fidelity: float = 1.0, penalty: float = 1.0) -> Trial:
    """Run one evaluation. Evaluator faults come back as failed/timeout trials."""
    spec.space.validate(assignment, full=True)
    if not 0 < fidelity <= 1:
        raise ValueError("fidelity must be in (0, 1]")
    a = dict(assignment)
    status, error = OK, None
    t0 = time.perf_counter()
    try:
        if isinstance(spec.evaluator, SubprocessEvaluator):
            value = spec.evaluator.request(a, fidelity, timeout=spec.timeout)
        else:
            value = _call_with_deadline(lambda: spec.evaluator(dict(a), fidelity, spec.dataset_ref), spec.timeout)
        value = float(value)
        if not math.isfinite(value):
            status, error = FAILED, f"non-finite value {value}"
    except TimeoutError as exc:
        status, error = TIMEOUT, str(exc)
    except Exception as exc:  # noqa: BLE001
        status, error = FAILED, f"{type(exc).__name__}: {exc}"
    elapsed = time.perf_counter() - t0
    if status != OK:
        log.debug("trial %s: %s", status, error)
        value = penalty
    cost = 1.0 if spec.budget_mode == "count" else elapsed
    return Trial(a, value, cost, fidelity=fidelity, status=status, elapsed=elapsed, error=error)


class SubprocessEvaluator:
    """Drives a child process over the line-delimited JSON protocol.

    Each request is ``{"id", "assignment", "fidelity"}``; the child answers with
    ``{"id", "value"}`` or ``{"id", "error"}``. The child is started lazily, gets
    the dataset path as its last argument, and is restarted after a crash or a
    timeout.
    """

    def __init__(self, command: str | Sequence[str], dataset: str | None = None):
        self.argv = shlex.split(command) if isinstance(command, str) else list(command)
        if dataset is not None:
            self.argv.append(str(dataset))
        self._proc: subprocess.Popen | None = None
        self._lines: queue.Queue | None = None
        self._next_id = 0
        self._lock = threading.Lock()
        self.spawns = 0

    def _spawn(self):
        self._proc = subprocess.Popen(
            self.argv, stdin=subprocess.PIPE, stdout=subprocess.PIPE, text=True, bufsize=1
        )
        self._lines = queue.Queue()
        self.spawns += 1

        def pump(stream, q):
            for line in stream:
                q.put(line)
            q.put(None)

        threading.Thread(target=pump, args=(self._proc.stdout, self._lines), daemon=True).start()

    def _kill(self):
        if self._proc is not None:
            if self._proc.poll() is None:
                self._proc.kill()
            self._proc.wait()
            for s in (self._proc.stdin, self._proc.stdout):
                try:
                    s.close()
                except OSError:
                    pass
        self._proc = None

    def request(self, assignment: Mapping, fidelity: float = 1.0, timeout: float | None = None) -> float:
        with self._lock:
            if self._proc is None or self._proc.poll() is not None:
                self._kill()
                self._spawn()
            rid = self._next_id
            self._next_id += 1
            msg = json.dumps({"id": rid, "assignment": dict(assignment), "fidelity": fidelity})
            try:
                self._proc.stdin.write(msg + "\n")
                self._proc.stdin.flush()
            except (BrokenPipeError, OSError) as exc:
                self._kill()
                raise EvaluationError(f"child not accepting requests: {exc}") from exc
            try:
                line = self._lines.get(timeout=timeout)
            except queue.Empty:
                # a late answer would desynchronise ids, so start fresh
                self._kill()
                raise TimeoutError(f"no response within {timeout}s") from None
            if line is None:
                self._kill()
                raise EvaluationError("child exited")
            try:
                resp = json.loads(line)
            except json.JSONDecodeError as exc:
                self._kill()
                raise EvaluationError(f"malformed response {line!r}") from exc
            if resp.get("id") != rid:
                self._kill()
                raise EvaluationError(f"response id {resp.get('id')} != request id {rid}")
            if "error" in resp:
                raise EvaluationError(str(resp["error"]))
            return float(resp["value"])

    def __call__(self, assignment, fidelity=1.0, dataset_ref=None):
        return self.request(assignment, fidelity)

    def close(self):
        with self._lock:
            if self._proc is not None and self._proc.poll() is None:
                try:
                    self._proc.stdin.close()
                    self._proc.wait(timeout=2)
                except (OSError, subprocess.TimeoutExpired):
                    pass
            self._kill()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()
