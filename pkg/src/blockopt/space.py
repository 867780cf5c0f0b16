"""Variables, domains, assignments and subgoal substitution.

An assignment is a plain ``dict`` mapping variable names to values. Values are
Python ``float`` for continuous variables, ``int`` for integer variables and
``str`` for categorical variables.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Iterable, Iterator, Mapping, Sequence

import numpy as np

Assignment = dict


class SpaceError(ValueError):
    """Raised for malformed spaces, assignments and subgoals."""


@dataclass(frozen=True)
class Continuous:
    lo: float
    hi: float
    log: bool = False
    # set on the lower pieces produced by split_numeric: [lo, hi)
    hi_open: bool = False

    kind = "continuous"

    def __post_init__(self):
        if not self.lo < self.hi:
            raise SpaceError(f"continuous domain needs lo < hi, got [{self.lo}, {self.hi}]")
        if self.log and self.lo <= 0:
            raise SpaceError("log-scaled domain needs lo > 0")

    def contains(self, value: Any) -> bool:
        if isinstance(value, (bool, str)) or not isinstance(value, (int, float, np.number)):
            return False
        if not math.isfinite(value) or value < self.lo:
            return False
        return value < self.hi if self.hi_open else value <= self.hi

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        if self.log:
            lo, hi = math.log10(self.lo), math.log10(self.hi)
            # rounding in 10**x can step outside the box
            return np.clip(10.0 ** rng.uniform(lo, hi, n), self.lo, np.nextafter(self.hi, -np.inf) if self.hi_open else self.hi)
        return rng.uniform(self.lo, self.hi, n)

    def default(self) -> float:
        if self.log:
            return float(10.0 ** ((math.log10(self.lo) + math.log10(self.hi)) / 2))
        return float((self.lo + self.hi) / 2)

    def grid(self, resolution: int) -> list:
        if resolution < 1:
            raise SpaceError("resolution must be >= 1")
        if resolution == 1:
            return [self.default()]
        hi = self.hi
        if self.log:
            pts = np.logspace(math.log10(self.lo), math.log10(hi), resolution)
            pts[0], pts[-1] = self.lo, hi
        else:
            pts = np.linspace(self.lo, hi, resolution)
        if self.hi_open:
            pts = pts[:-1]
        return [float(p) for p in pts]

    def to_dict(self) -> dict:
        d = {"type": "continuous", "bounds": [self.lo, self.hi], "log": self.log}
        if self.hi_open:
            d["hi_open"] = True
        return d


@dataclass(frozen=True)
class Integer:
    lo: int
    hi: int

    kind = "integer"

    def __post_init__(self):
        if not (isinstance(self.lo, (int, np.integer)) and isinstance(self.hi, (int, np.integer))):
            raise SpaceError("integer domain bounds must be integers")
        if not self.lo < self.hi:
            raise SpaceError(f"integer domain needs lo < hi, got [{self.lo}, {self.hi}]")
        object.__setattr__(self, "lo", int(self.lo))
        object.__setattr__(self, "hi", int(self.hi))

    def contains(self, value: Any) -> bool:
        if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
            return False
        return self.lo <= value <= self.hi

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        return rng.integers(self.lo, self.hi + 1, n)

    def default(self) -> int:
        return (self.lo + self.hi) // 2

    def grid(self, resolution: int) -> list:
        if resolution < 1:
            raise SpaceError("resolution must be >= 1")
        if resolution == 1:
            return [self.default()]
        pts = np.unique(np.round(np.linspace(self.lo, self.hi, resolution)).astype(int))
        return [int(p) for p in pts]

    def to_dict(self) -> dict:
        return {"type": "integer", "bounds": [self.lo, self.hi]}


@dataclass(frozen=True)
class Categorical:
    labels: tuple

    kind = "categorical"

    def __post_init__(self):
        labels = tuple(self.labels)
        if not labels:
            raise SpaceError("categorical domain needs at least one label")
        if len(set(labels)) != len(labels):
            raise SpaceError("categorical labels must be distinct")
        if not all(isinstance(x, str) for x in labels):
            raise SpaceError("categorical labels must be strings")
        object.__setattr__(self, "labels", labels)

    def contains(self, value: Any) -> bool:
        return isinstance(value, str) and value in self.labels

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        return rng.integers(0, len(self.labels), n)

    def default(self) -> str:
        return self.labels[0]

    def grid(self, resolution: int) -> list:
        return list(self.labels)

    def to_dict(self) -> dict:
        return {"type": "categorical", "labels": list(self.labels)}


Domain = Continuous | Integer | Categorical


def domain_from_dict(d: Mapping) -> Domain:
    kind = d.get("type")
    if kind == "continuous":
        lo, hi = d["bounds"]
        return Continuous(float(lo), float(hi), log=bool(d.get("log", False)), hi_open=bool(d.get("hi_open", False)))
    if kind == "integer":
        lo, hi = d["bounds"]
        if float(lo) != int(lo) or float(hi) != int(hi):
            raise SpaceError("integer bounds must be whole numbers")
        return Integer(int(lo), int(hi))
    if kind == "categorical":
        return Categorical(tuple(d["labels"]))
    raise SpaceError(f"unknown variable type {kind!r}")


@dataclass(frozen=True)
class Variable:
    name: str
    domain: Domain

    def __post_init__(self):
        if not isinstance(self.name, str) or not self.name:
            raise SpaceError("variable name must be a nonempty string")

    def to_dict(self) -> dict:
        return {"name": self.name, **self.domain.to_dict()}

    @classmethod
    def from_dict(cls, d: Mapping) -> "Variable":
        return cls(d["name"], domain_from_dict(d))


@dataclass(frozen=True)
class SearchSpace:
    """Ordered collection of variables. Declaration order is canonical."""

    variables: tuple = ()
    _index: dict = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        variables = tuple(self.variables)
        names = [v.name for v in variables]
        if len(set(names)) != len(names):
            raise SpaceError("variable names must be distinct")
        object.__setattr__(self, "variables", variables)
        object.__setattr__(self, "_index", {v.name: v for v in variables})

    def __len__(self) -> int:
        return len(self.variables)

    def __iter__(self) -> Iterator[Variable]:
        return iter(self.variables)

    def __contains__(self, name: str) -> bool:
        return name in self._index

    def __getitem__(self, name: str) -> Variable:
        try:
            return self._index[name]
        except KeyError:
            raise SpaceError(f"unknown variable {name!r}") from None

    @property
    def names(self) -> list[str]:
        return [v.name for v in self.variables]

    def subset(self, names: Iterable[str]) -> "SearchSpace":
        """Variables named in ``names``, kept in canonical order."""
        keep = set(names)
        for n in keep:
            self[n]
        return SearchSpace(tuple(v for v in self.variables if v.name in keep))

    def replace_domain(self, name: str, domain: Domain) -> "SearchSpace":
        self[name]
        return SearchSpace(tuple(Variable(v.name, domain) if v.name == name else v for v in self.variables))

    def validate(self, assignment: Mapping, full: bool = True) -> None:
        """Raise SpaceError unless every binding is in-domain (and, if ``full``, all variables are bound)."""
        for name, value in assignment.items():
            var = self[name]
            if not var.domain.contains(value):
                raise SpaceError(f"value {value!r} outside domain of {name!r}")
        if full:
            missing = [n for n in self.names if n not in assignment]
            if missing:
                raise SpaceError(f"assignment is partial, missing {missing}")

    def is_full(self, assignment: Mapping) -> bool:
        return set(assignment) == set(self.names)

    def defaults(self) -> Assignment:
        return {v.name: v.domain.default() for v in self.variables}

    def to_list(self) -> list[dict]:
        return [v.to_dict() for v in self.variables]

    @classmethod
    def from_list(cls, items: Sequence[Mapping]) -> "SearchSpace":
        return cls(tuple(Variable.from_dict(d) for d in items))


@dataclass(frozen=True)
class Subgoal:
    """Variables fixed to constants; the rest of the parent space stays free."""

    fixed_values: Mapping = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "fixed_values", dict(self.fixed_values))

    @property
    def fixed_vars(self) -> frozenset:
        return frozenset(self.fixed_values)

    def extend(self, values: Mapping) -> "Subgoal":
        return Subgoal(merge(self.fixed_values, values))

    def with_values(self, values: Mapping) -> "Subgoal":
        """Rebind already-fixed variables to new constants."""
        unknown = set(values) - self.fixed_vars
        if unknown:
            raise SpaceError(f"variables {sorted(unknown)} are not fixed by this subgoal")
        return Subgoal({**self.fixed_values, **values})


def substitute(space: SearchSpace, subgoal: Subgoal) -> SearchSpace:
    """The free part of ``space`` once the subgoal's constants are plugged in."""
    space.validate(subgoal.fixed_values, full=False)
    return SearchSpace(tuple(v for v in space if v.name not in subgoal.fixed_vars))


def merge(a: Mapping, b: Mapping) -> Assignment:
    overlap = set(a) & set(b)
    if overlap:
        raise SpaceError(f"assignments overlap on {sorted(overlap)}")
    return {**a, **b}


def _column_values(domain: Domain, raw: np.ndarray) -> list:
    if domain.kind == "categorical":
        return [domain.labels[i] for i in raw]
    if domain.kind == "integer":
        return [int(x) for x in raw]
    return [float(x) for x in raw]


def sample_columns(space: SearchSpace, rng: np.random.Generator, n: int) -> dict[str, np.ndarray]:
    """Raw per-variable draws (categorical as label indices), variables in canonical order."""
    return {v.name: v.domain.sample(rng, n) for v in space}


def sample_uniform(space: SearchSpace, rng: np.random.Generator, n: int) -> list[Assignment]:
    if n < 1:
        raise SpaceError("n must be >= 1")
    cols = sample_columns(space, rng, n)
    values = {v.name: _column_values(v.domain, cols[v.name]) for v in space}
    return [{name: values[name][i] for name in space.names} for i in range(n)]


def row_assignment(space: SearchSpace, cols: Mapping[str, np.ndarray], i: int) -> Assignment:
    out = {}
    for v in space:
        out[v.name] = _column_values(v.domain, cols[v.name][i : i + 1])[0]
    return out


def encode_columns(space: SearchSpace, cols: Mapping[str, np.ndarray]) -> np.ndarray:
    """Surrogate features from raw columns: log10 for log-scaled, one-hot for categorical."""
    parts = []
    for v in space:
        c = np.asarray(cols[v.name])
        if v.domain.kind == "categorical":
            parts.append(np.eye(len(v.domain.labels))[c.astype(int)])
        elif v.domain.kind == "continuous" and v.domain.log:
            parts.append(np.log10(c.astype(float))[:, None])
        else:
            parts.append(c.astype(float)[:, None])
    return np.hstack(parts) if parts else np.empty((0, 0))


def assignments_to_columns(space: SearchSpace, assignments: Sequence[Mapping]) -> dict[str, np.ndarray]:
    cols = {}
    for v in space:
        if v.domain.kind == "categorical":
            pos = {label: i for i, label in enumerate(v.domain.labels)}
            cols[v.name] = np.array([pos[a[v.name]] for a in assignments], dtype=int)
        else:
            cols[v.name] = np.array([a[v.name] for a in assignments], dtype=float)
    return cols


def encode(space: SearchSpace, assignments: Sequence[Mapping]) -> np.ndarray:
    return encode_columns(space, assignments_to_columns(space, assignments))


def split_numeric(var: Variable, cutpoints: Sequence[float]) -> list[Domain]:
    """Cut a numeric range into contiguous pieces [lo, c1), [c1, c2), ..., [ck, hi]."""
    dom = var.domain
    if dom.kind == "categorical":
        raise SpaceError(f"cannot split categorical variable {var.name!r}")
    cuts = list(cutpoints)
    if any(b <= a for a, b in zip(cuts, cuts[1:])):
        raise SpaceError("cutpoints must be strictly increasing")
    for c in cuts:
        if not dom.lo < c < dom.hi:
            raise SpaceError(f"cutpoint {c} outside ({dom.lo}, {dom.hi})")
    edges = [dom.lo, *cuts, dom.hi]
    pieces: list[Domain] = []
    for i, (a, b) in enumerate(zip(edges, edges[1:])):
        last = i == len(edges) - 2
        if dom.kind == "continuous":
            pieces.append(Continuous(a, b, log=dom.log, hi_open=not last or dom.hi_open))
        else:
            lo = math.ceil(a)
            hi = b if last else math.ceil(b) - 1
            if hi <= lo:
                raise SpaceError(f"piece [{a}, {b}) of {var.name!r} holds fewer than two integers")
            pieces.append(Integer(lo, int(hi)))
    return pieces
