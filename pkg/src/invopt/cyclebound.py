"""Linear constraints forcing every directed cycle to have length at least delta.

Two encodings are produced over the same per-arc length variables:

* the compact one, with a distance variable for every ordered node pair and
  ``m + m*n + n`` rows, and
* the reference one, with one row per simple directed cycle (exponential,
  guarded, used for cross-checking).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp

CYCLE_LIMIT = 100_000

SENSES = (">=", "<=", "==")


class CycleLimitError(RuntimeError):
    pass


@dataclass(frozen=True)
class Row:
    terms: tuple[tuple[int, float], ...]
    sense: str
    rhs: float
    tag: str = ""


class ConstraintSystem:
    """Sparse linear rows over named variables.

    Roles in use: ``weight``, ``length``, ``distance``, ``param`` and
    ``potential``.
    """

    def __init__(self):
        self.names: list[str] = []
        self.roles: list[str] = []
        self.rows: list[Row] = []
        self.meta: dict = {}

    def __len__(self):
        return len(self.rows)

    @property
    def n_vars(self) -> int:
        return len(self.names)

    def add_variable(self, name: str, role: str) -> int:
        self.names.append(name)
        self.roles.append(role)
        return len(self.names) - 1

    def variables(self, role: str) -> list[int]:
        return [i for i, r in enumerate(self.roles) if r == role]

    def add_row(self, terms: Iterable[tuple[int, float]], sense: str, rhs: float, tag: str = ""):
        if sense not in SENSES:
            raise ValueError(f"unknown sense {sense!r}")
        merged: dict[int, float] = {}
        for var, coef in terms:
            if not 0 <= var < self.n_vars:
                raise IndexError(f"row references undeclared variable {var}")
            merged[var] = merged.get(var, 0.0) + float(coef)
        packed = tuple((v, c) for v, c in sorted(merged.items()) if c != 0.0)
        if not packed:
            raise ValueError("empty constraint row")
        self.rows.append(Row(packed, sense, float(rhs), tag))

    def count(self, tag: str | None = None) -> int:
        if tag is None:
            return len(self.rows)
        return sum(1 for r in self.rows if r.tag == tag)

    def matrix(self):
        """``(A, lo, hi)`` with ``lo <= A x <= hi``."""
        indptr = [0]
        indices: list[int] = []
        data: list[float] = []
        lo = np.empty(len(self.rows))
        hi = np.empty(len(self.rows))
        for i, row in enumerate(self.rows):
            for v, c in row.terms:
                indices.append(v)
                data.append(c)
            indptr.append(len(indices))
            lo[i] = row.rhs if row.sense in (">=", "==") else -np.inf
            hi[i] = row.rhs if row.sense in ("<=", "==") else np.inf
        A = sp.csr_matrix((data, indices, indptr), shape=(len(self.rows), self.n_vars))
        return A, lo, hi

    def slacks(self, x) -> np.ndarray:
        """Signed slack per row; negative means violated."""
        x = np.asarray(x, dtype=float)
        out = np.empty(len(self.rows))
        for i, row in enumerate(self.rows):
            ax = sum(c * x[v] for v, c in row.terms)
            if row.sense == ">=":
                out[i] = ax - row.rhs
            elif row.sense == "<=":
                out[i] = row.rhs - ax
            else:
                out[i] = -abs(ax - row.rhs)
        return out

    def max_violation(self, x) -> float:
        if not self.rows:
            return 0.0
        return float(max(0.0, -self.slacks(x).min()))

    def worst_slack(self, x) -> dict[str, float]:
        """Minimum signed slack per row tag."""
        out: dict[str, float] = {}
        for row, s in zip(self.rows, self.slacks(x)):
            out[row.tag] = min(out.get(row.tag, np.inf), float(s))
        return out

    def dump(self) -> str:
        lines = []
        for row in self.rows:
            body = " ".join(f"{c:+g}*{self.names[v]}" for v, c in row.terms)
            lines.append(f"{body} {row.sense} {row.rhs:g}")
        return "\n".join(lines) + ("\n" if lines else "")


@dataclass(frozen=True)
class Length:
    """Arc length term: ``const + sum(coef * x[var])``, or a free variable."""

    terms: tuple[tuple[int, float], ...] = ()
    const: float = 0.0
    free: bool = False

    @classmethod
    def ref(cls, var: int, sign: float = 1.0) -> "Length":
        return cls(terms=((var, float(sign)),))

    @classmethod
    def linear(cls, terms: Iterable[tuple[int, float]], const: float = 0.0) -> "Length":
        return cls(terms=tuple((int(v), float(c)) for v, c in terms), const=float(const))

    @classmethod
    def fixed(cls, value: float) -> "Length":
        return cls(const=float(value))

    @classmethod
    def unbound(cls) -> "Length":
        return cls(free=True)

    def value(self, x) -> float:
        if self.free:
            raise ValueError("free length has no symbolic value")
        return self.const + sum(c * float(x[v]) for v, c in self.terms)


@dataclass
class SymbolicDigraph:
    node_count: int
    arcs: list[tuple[int, int]]
    lengths: list[Length]
    labels: list = field(default_factory=list)  # optional provenance per arc

    def __post_init__(self):
        if len(self.arcs) != len(self.lengths):
            raise ValueError("one length term per arc is required")
        for t, h in self.arcs:
            if not (0 <= t < self.node_count and 0 <= h < self.node_count):
                raise ValueError("arc endpoint outside the node range")

    @property
    def arc_count(self) -> int:
        return len(self.arcs)

    def numeric_lengths(self, x) -> np.ndarray:
        return np.array([ln.value(x) for ln in self.lengths], dtype=float)


def _bind_lengths(g: SymbolicDigraph, system: ConstraintSystem) -> list[int]:
    l_vars = []
    for e, ln in enumerate(g.lengths):
        lv = system.add_variable(f"l[{e}]", "length")
        l_vars.append(lv)
        if ln.free:
            continue
        system.add_row([(lv, 1.0)] + [(v, -c) for v, c in ln.terms], "==", ln.const, "binding")
    return l_vars


def r2_constraints(g: SymbolicDigraph, delta: float,
                   system: ConstraintSystem | None = None) -> ConstraintSystem:
    """Compact cycle bound over distance variables ``d[x,y]``.

    Rows: ``d[x,y] <= l_e`` per arc ``e=(x,y)``; ``d[x,z] <= d[x,y] + l_e``
    for every node ``x`` and arc ``e=(y,z)``; ``d[x,x] >= delta`` per node.
    Distances of nodes on no cycle are left free.
    """
    if delta < 0:
        raise ValueError("delta must be non-negative")
    system = ConstraintSystem() if system is None else system
    n = g.node_count
    l_vars = _bind_lengths(g, system)
    d = [[system.add_variable(f"d[{x},{y}]", "distance") for y in range(n)] for x in range(n)]
    for e, (x, y) in enumerate(g.arcs):
        system.add_row([(d[x][y], 1.0), (l_vars[e], -1.0)], "<=", 0.0, "edge")
    for x in range(n):
        for e, (y, z) in enumerate(g.arcs):
            system.add_row([(d[x][z], 1.0), (d[x][y], -1.0), (l_vars[e], -1.0)],
                           "<=", 0.0, "triangle")
    for x in range(n):
        system.add_row([(d[x][x], 1.0)], ">=", delta, "cycle")
    system.meta.setdefault("cyclebound", []).append(
        {"l": l_vars, "d": d, "nodes": n, "arcs": g.arc_count})
    return system


def simple_cycles(node_count: int, arcs: Sequence[tuple[int, int]],
                  limit: int = CYCLE_LIMIT) -> list[tuple[int, ...]]:
    """Simple directed cycles as tuples of arc ids.

    Each cycle is found once, from its least-indexed node, by depth-first
    search restricted to larger nodes.  Parallel arcs give distinct cycles.
    """
    out_arcs: list[list[int]] = [[] for _ in range(node_count)]
    for a, (t, _) in enumerate(arcs):
        out_arcs[t].append(a)
    found: list[tuple[int, ...]] = []
    for s in range(node_count):
        on_path = [False] * node_count
        on_path[s] = True
        path: list[int] = []
        stack = [(s, iter(out_arcs[s]))]
        while stack:
            node, it = stack[-1]
            advanced = False
            for a in it:
                h = arcs[a][1]
                if h == s:
                    found.append(tuple(path + [a]))
                    if len(found) > limit:
                        raise CycleLimitError(f"more than {limit} simple cycles")
                elif h > s and not on_path[h]:
                    on_path[h] = True
                    path.append(a)
                    stack.append((h, iter(out_arcs[h])))
                    advanced = True
                    break
            if not advanced:
                stack.pop()
                if path and node != s:
                    path.pop()
                    on_path[node] = False
    return found


def r1_constraints_enumerated(g: SymbolicDigraph, delta: float,
                              system: ConstraintSystem | None = None,
                              limit: int = CYCLE_LIMIT) -> ConstraintSystem:
    """One row ``sum of l_e over C >= delta`` per simple directed cycle ``C``."""
    if delta < 0:
        raise ValueError("delta must be non-negative")
    cycles = simple_cycles(g.node_count, g.arcs, limit)
    system = ConstraintSystem() if system is None else system
    l_vars = _bind_lengths(g, system)
    for cyc in cycles:
        system.add_row([(l_vars[a], 1.0) for a in cyc], ">=", delta, "cycle")
    system.meta.setdefault("cyclebound", []).append(
        {"l": l_vars, "cycles": cycles, "nodes": g.node_count, "arcs": g.arc_count})
    return system


def shortest_walk_distances(node_count: int, arcs: Sequence[tuple[int, int]],
                            lengths: Sequence[float]) -> np.ndarray:
    """``D[x,z]`` = least length of a walk from x to z with at least one arc.

    Uses at most ``n`` relaxation rounds, so with negative cycles the value is
    the best over walks of bounded length.  ``inf`` marks unreachable pairs.
    """
    n = node_count
    D = np.full((n, n), np.inf)
    for (x, y), ln in zip(arcs, lengths):
        D[x, y] = min(D[x, y], ln)
    for _ in range(n):
        changed = False
        for x in range(n):
            for (y, z), ln in zip(arcs, lengths):
                cand = D[x, y] + ln
                if cand < D[x, z]:
                    D[x, z] = cand
                    changed = True
        if not changed:
            break
    return D
