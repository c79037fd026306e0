"""Choice datasets: tables of ``p_t(., A)`` indexed by deadline and menu.

The on-disk format is a JSON document::

    {"universe": ["a", "b", "c"],
     "deadlines": [1, 2],
     "ordered": true,
     "tables": [{"t": 0, "menu": ["a", "b"], "probs": {"a": 0.5, "b": 0.5}},
                {"t": 1, "menu": ["a", "b"], "counts": {"a": 31, "b": 69}}]}

``t = 0`` is the literal number 0. A table carries either ``probs`` or
``counts``; mixing the two kinds within one file is rejected.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping

import jsonschema
import numpy as np

from .core import ChoiceDistribution, SoftmaxParams, TimeGrid, canonical_menu, softmax_dist
from .errors import MissingDataError, SchemaError

_label = {"type": ["string", "integer"]}

DATASET_SCHEMA = {
    "type": "object",
    "required": ["universe", "deadlines", "tables"],
    "additionalProperties": False,
    "properties": {
        "universe": {"type": "array", "items": _label, "minItems": 2, "uniqueItems": True},
        "deadlines": {"type": "array", "items": {"type": "number", "exclusiveMinimum": 0},
                      "minItems": 1},
        "ordered": {"type": "boolean"},
        "tables": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["t", "menu"],
                "additionalProperties": False,
                "properties": {
                    "t": {"type": "number", "minimum": 0},
                    "menu": {"type": "array", "items": _label, "minItems": 1},
                    "probs": {"type": "object",
                              "additionalProperties": {"type": "number", "minimum": 0,
                                                       "maximum": 1}},
                    "counts": {"type": "object",
                               "additionalProperties": {"type": "integer", "minimum": 0}},
                },
                "oneOf": [{"required": ["probs"]}, {"required": ["counts"]}],
            },
        },
    },
}


def _pointer(path) -> str:
    return "/" + "/".join(str(p) for p in path) if path else ""


@dataclass(frozen=True)
class ChoiceDataset:
    """Choice probabilities ``p_t(a, A)`` for ``t`` in ``{0} U T``.

    ``tables`` maps ``(t, menu)`` to a :class:`ChoiceDistribution`, with
    ``menu`` in canonical universe order. Empirical datasets also carry
    ``counts`` with the same keys; their tables hold the frequencies.
    """

    universe: tuple
    grid: TimeGrid
    tables: Mapping
    counts: Mapping | None = field(default=None)

    def __post_init__(self):
        object.__setattr__(self, "universe", tuple(self.universe))
        if len(self.universe) < 2:
            raise ValueError("universe needs at least two alternatives")
        if len({str(x) for x in self.universe}) != len(self.universe):
            raise ValueError("universe labels must be distinct as strings")
        valid_t = set(self.grid.with_zero)
        for (t, menu), dist in self.tables.items():
            if t not in valid_t:
                raise ValueError(f"table at t={t!r} is off the grid")
            if canonical_menu(self.universe, menu) != menu or dist.labels != menu:
                raise ValueError(f"menu {menu!r} is not in canonical order")

    @property
    def kind(self) -> str:
        return "exact" if self.counts is None else "empirical"

    @property
    def deadlines(self) -> tuple:
        return self.grid.deadlines

    def table(self, t, menu: Iterable) -> ChoiceDistribution:
        key = (float(t), canonical_menu(self.universe, menu))
        try:
            return self.tables[key]
        except KeyError:
            raise MissingDataError(f"no table for t={key[0]!r}, menu={key[1]!r}") from None

    def has_table(self, t, menu) -> bool:
        return (float(t), canonical_menu(self.universe, menu)) in self.tables

    def binary_prob(self, t, a, b) -> float:
        """``p_t(a, {a, b})``."""
        return self.table(t, (a, b))[a]

    def menus(self, t) -> list[tuple]:
        t = float(t)
        return [menu for (s, menu) in self.tables if s == t]

    def sample_size(self, t, menu) -> int | None:
        if self.counts is None:
            return None
        return int(sum(self.counts[(float(t), canonical_menu(self.universe, menu))]))

    @property
    def min_sample_size(self) -> int | None:
        if self.counts is None:
            return None
        return min(int(sum(c)) for c in self.counts.values())

    @property
    def min_cell_count(self) -> int | None:
        """Smallest count in any cell of any table."""
        if self.counts is None:
            return None
        return min(min(c) for c in self.counts.values())

    def to_dict(self) -> dict:
        tables = []
        for (t, menu), dist in sorted(self.tables.items(), key=self._sort_key):
            entry = {"t": _num(t), "menu": list(menu)}
            if self.counts is None:
                entry["probs"] = {str(x): p for x, p in zip(menu, dist.probs)}
            else:
                entry["counts"] = {str(x): int(c) for x, c in zip(menu, self.counts[(t, menu)])}
            tables.append(entry)
        return {"universe": list(self.universe), "deadlines": [_num(t) for t in self.deadlines],
                "ordered": self.grid.ordered, "tables": tables}

    def _sort_key(self, item):
        (t, menu), _ = item
        order = {x: i for i, x in enumerate(self.universe)}
        return (t, len(menu), [order[x] for x in menu])


def _num(t: float):
    return int(t) if float(t).is_integer() else t


def dataset_from_dict(doc: Mapping) -> ChoiceDataset:
    """Validate a JSON document and build a :class:`ChoiceDataset`.

    Raises :class:`SchemaError` whose ``path`` is a JSON pointer to the
    offending field.
    """
    validator = jsonschema.Draft7Validator(DATASET_SCHEMA)
    errors = sorted(validator.iter_errors(doc), key=lambda e: list(e.absolute_path))
    if errors:
        err = errors[0]
        raise SchemaError(err.message, _pointer(err.absolute_path))

    universe = tuple(doc["universe"])
    by_str = {str(x): x for x in universe}
    grid = TimeGrid(tuple(doc["deadlines"]), ordered=doc.get("ordered", True))
    valid_t = set(grid.with_zero)
    kinds = {("probs" if "probs" in tb else "counts") for tb in doc["tables"]}
    if len(kinds) > 1:
        raise SchemaError("tables mix probs and counts", "/tables")

    tables, counts = {}, {}
    for i, tb in enumerate(doc["tables"]):
        where = f"/tables/{i}"
        t = float(tb["t"])
        if t not in valid_t:
            raise SchemaError(f"t={tb['t']!r} is neither 0 nor a listed deadline", where + "/t")
        try:
            menu = canonical_menu(universe, tb["menu"])
        except ValueError as exc:
            raise SchemaError(str(exc), where + "/menu") from None
        if (t, menu) in tables:
            raise SchemaError(f"duplicate table for t={tb['t']!r}, menu={list(menu)!r}", where)
        field_name = "probs" if "probs" in tb else "counts"
        raw = tb[field_name]
        unknown = [k for k in raw if k not in by_str or by_str[k] not in menu]
        if unknown:
            raise SchemaError(f"labels {unknown!r} are not menu members", f"{where}/{field_name}")
        values = [raw.get(str(x), 0) for x in menu]
        if field_name == "probs":
            total = math.fsum(values)
            if abs(total - 1.0) > 1e-9:
                raise SchemaError(f"table {i} probabilities sum to {total!r}, not 1",
                                  f"{where}/probs")
            tables[(t, menu)] = ChoiceDistribution(menu, values)
        else:
            n = sum(values)
            if n == 0:
                raise SchemaError(f"table {i} has no observations", f"{where}/counts")
            counts[(t, menu)] = tuple(int(c) for c in values)
            tables[(t, menu)] = ChoiceDistribution(menu, [c / n for c in values])
    return ChoiceDataset(universe, grid, tables, counts if counts else None)


def load_dataset(path) -> ChoiceDataset:
    """Read and validate a dataset JSON file."""
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise SchemaError(f"invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}")
    return dataset_from_dict(doc)


def save_dataset(d: ChoiceDataset, path) -> None:
    Path(path).write_text(json.dumps(d.to_dict(), indent=1) + "\n")


# ---------------------------------------------------------------------------
# constructors


def all_menus(universe, min_size: int = 2) -> list[tuple]:
    """Every subset of ``universe`` with at least ``min_size`` members."""
    universe = tuple(universe)
    return [m for k in range(min_size, len(universe) + 1)
            for m in itertools.combinations(universe, k)]


def binary_menus(universe) -> list[tuple]:
    return list(itertools.combinations(tuple(universe), 2))


def from_softmax(params: SoftmaxParams, menus: Iterable | None = None) -> ChoiceDataset:
    """Exact dataset of a softmax process on ``menus`` (default: all menus of size >= 2)."""
    universe = params.universe
    menus = all_menus(universe) if menus is None else [canonical_menu(universe, m) for m in menus]
    grid = params.grid
    tables = {(t, m): softmax_dist(params, t, m) for t in grid.with_zero for m in menus}
    return ChoiceDataset(universe, grid, tables)


def from_luce(values: Mapping, grid: TimeGrid, menus: Iterable | None = None) -> ChoiceDataset:
    """Exact dataset with a separate Luce value function per deadline.

    ``values`` maps each ``t`` in ``{0} U T`` to a ``label -> value`` mapping;
    ``p_t(a, A)`` is proportional to ``exp(values[t][a])``.
    """
    values = {float(t): v for t, v in values.items()}
    universe = tuple(values[0.0])
    menus = all_menus(universe) if menus is None else [canonical_menu(universe, m) for m in menus]
    tables = {}
    for t in grid.with_zero:
        v = values[t]
        for m in menus:
            x = np.array([v[a] for a in m], dtype=float)
            z = np.exp(x - x.max())
            tables[(t, m)] = ChoiceDistribution(m, z / z.sum())
    return ChoiceDataset(universe, grid, tables)


def sample_dataset(d: ChoiceDataset, n: int, rng: np.random.Generator) -> ChoiceDataset:
    """Empirical dataset with ``n`` multinomial draws from every table of ``d``."""
    tables, counts = {}, {}
    for key in sorted(d.tables, key=lambda k: (k[0], len(k[1]), str(k[1]))):
        dist = d.tables[key]
        c = rng.multinomial(n, dist.as_array())
        counts[key] = tuple(int(x) for x in c)
        tables[key] = ChoiceDistribution(dist.labels, c / n)
    return ChoiceDataset(d.universe, d.grid, tables, counts)
