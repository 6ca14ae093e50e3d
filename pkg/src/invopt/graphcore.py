"""Instance containers, validation and the JSON document formats.

An instance is one of the supported problem kinds together with its
structure (a digraph, a bipartite graph or matroid descriptors), one weight
per ground element, the designated solution and the margin.  Arc and edge
order defines element ids.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Any, Mapping, Sequence

import numpy as np

KINDS = (
    "matroid",
    "matroid-intersection",
    "arborescence",
    "st-path",
    "perfect-matching",
    "min-cost-flow",
    "sp-tree",
)

# kinds whose designated solution should have *maximum* weight by default
MAX_KINDS = {"matroid", "matroid-intersection", "arborescence", "perfect-matching"}


class InstanceError(ValueError):
    """Raised for malformed or structurally invalid instance documents."""


@dataclass(frozen=True)
class Digraph:
    node_count: int
    arcs: tuple[tuple[int, int], ...]  # arc id -> (tail, head)

    def __post_init__(self):
        if self.node_count < 0:
            raise InstanceError("node_count must be non-negative")
        for i, (t, h) in enumerate(self.arcs):
            if not (0 <= t < self.node_count and 0 <= h < self.node_count):
                raise InstanceError(f"arc {i} = ({t}, {h}) references a missing node")

    @property
    def arc_count(self) -> int:
        return len(self.arcs)

    def tail(self, a: int) -> int:
        return self.arcs[a][0]

    def head(self, a: int) -> int:
        return self.arcs[a][1]

    def out_arcs(self) -> list[list[int]]:
        out = [[] for _ in range(self.node_count)]
        for a, (t, _) in enumerate(self.arcs):
            out[t].append(a)
        return out

    def in_arcs(self) -> list[list[int]]:
        inc = [[] for _ in range(self.node_count)]
        for a, (_, h) in enumerate(self.arcs):
            inc[h].append(a)
        return inc


@dataclass(frozen=True)
class BipartiteGraph:
    left_count: int
    right_count: int
    edges: tuple[tuple[int, int], ...]  # edge id -> (left, right)

    def __post_init__(self):
        seen = set()
        for i, (x, y) in enumerate(self.edges):
            if not (0 <= x < self.left_count and 0 <= y < self.right_count):
                raise InstanceError(f"edge {i} = ({x}, {y}) references a missing vertex")
            if (x, y) in seen:
                raise InstanceError(f"duplicate bipartite edge ({x}, {y})")
            seen.add((x, y))

    @property
    def edge_count(self) -> int:
        return len(self.edges)


@dataclass(frozen=True)
class MatroidSpec:
    """Serializable description of one of the concrete matroids."""

    type: str  # "graphic" | "partition" | "uniform"
    size: int
    graph: Digraph | None = None
    classes: tuple[tuple[int, ...], ...] = ()
    limits: tuple[int, ...] = ()
    rank: int = 0

    def build(self):
        from . import matroid

        if self.type == "graphic":
            return matroid.GraphicMatroid(self.graph.node_count, self.graph.arcs)
        if self.type == "partition":
            return matroid.PartitionMatroid(self.size, self.classes, self.limits)
        if self.type == "uniform":
            return matroid.UniformMatroid(self.size, self.rank)
        raise InstanceError(f"unknown matroid type {self.type!r}")

    def to_json(self) -> dict:
        if self.type == "graphic":
            return {"type": "graphic", "nodes": self.graph.node_count,
                    "edges": [list(a) for a in self.graph.arcs]}
        if self.type == "partition":
            return {"type": "partition", "classes": [list(c) for c in self.classes],
                    "limits": list(self.limits)}
        return {"type": "uniform", "rank": self.rank}


@dataclass(frozen=True)
class Instance:
    kind: str
    weights: np.ndarray
    designated: frozenset[int]
    delta: float
    digraph: Digraph | None = None
    bipartite: BipartiteGraph | None = None
    matroids: tuple[MatroidSpec, ...] = ()
    capacities: np.ndarray | None = None
    flow: np.ndarray | None = None
    root: int | None = None
    source: int | None = None
    sink: int | None = None
    sense: str = "max"
    extra: Mapping[str, Any] = field(default_factory=dict)

    @property
    def size(self) -> int:
        return len(self.weights)

    @property
    def maximize(self) -> bool:
        return self.sense == "max"

    def with_weights(self, weights) -> "Instance":
        w = np.asarray(weights, dtype=float)
        if w.shape != self.weights.shape:
            raise InstanceError("weight vector length does not match the instance")
        return _replace(self, weights=w)

    def with_delta(self, delta: float) -> "Instance":
        return validate(_replace(self, delta=float(delta)))


def _replace(inst: Instance, **changes) -> Instance:
    from dataclasses import replace

    return replace(inst, **changes)


# -- parsing -----------------------------------------------------------------

def _req(doc: Mapping, key: str, kind: str):
    if key not in doc:
        raise InstanceError(f"{kind} instance requires {key!r}")
    return doc[key]


def _int(value, what: str) -> int:
    if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
        if isinstance(value, float) and value.is_integer():
            return int(value)
        raise InstanceError(f"{what} must be an integer, got {value!r}")
    return int(value)


def _digraph(doc) -> Digraph:
    if not isinstance(doc, Mapping):
        raise InstanceError("digraph payload must be an object")
    n = _int(doc.get("nodes", -1), "digraph.nodes")
    arcs = tuple((_int(a[0], "arc tail"), _int(a[1], "arc head")) for a in doc.get("arcs", ()))
    return Digraph(n, arcs)


def _matroid_spec(doc, size: int) -> MatroidSpec:
    kind = doc.get("type")
    if kind == "graphic":
        g = Digraph(_int(doc["nodes"], "nodes"),
                    tuple((_int(u, "u"), _int(v, "v")) for u, v in doc["edges"]))
        if g.arc_count != size:
            raise InstanceError("graphic matroid edge count must equal the weight count")
        return MatroidSpec("graphic", size, graph=g)
    if kind == "partition":
        classes = tuple(tuple(_int(e, "class element") for e in c) for c in doc["classes"])
        limits = tuple(_int(k, "limit") for k in doc["limits"])
        if len(classes) != len(limits):
            raise InstanceError("partition matroid needs one limit per class")
        flat = [e for c in classes for e in c]
        if len(flat) != len(set(flat)):
            raise InstanceError("partition classes must be disjoint")
        if any(not 0 <= e < size for e in flat):
            raise InstanceError("partition class references a missing element")
        if any(k < 0 for k in limits):
            raise InstanceError("partition limits must be non-negative")
        return MatroidSpec("partition", size, classes=classes, limits=limits)
    if kind == "uniform":
        return MatroidSpec("uniform", size, rank=_int(doc["rank"], "rank"))
    raise InstanceError(f"unknown matroid type {kind!r}")


def instance_from_dict(doc: Mapping) -> Instance:
    if not isinstance(doc, Mapping):
        raise InstanceError("instance document must be a JSON object")
    kind = _req(doc, "kind", "every")
    if kind not in KINDS:
        raise InstanceError(f"unknown kind {kind!r}")
    try:
        weights = np.asarray(_req(doc, "weights", kind), dtype=float)
        delta = float(_req(doc, "delta", kind))
    except (TypeError, ValueError) as exc:
        raise InstanceError(str(exc)) from None
    if weights.ndim != 1:
        raise InstanceError("weights must be a flat array")
    designated = frozenset(_int(e, "designated id") for e in doc.get("designated", ()))
    sense = doc.get("sense", "max" if kind in MAX_KINDS else "min")
    if sense not in ("max", "min"):
        raise InstanceError("sense must be 'max' or 'min'")

    kw: dict[str, Any] = {}
    size = len(weights)
    if kind == "matroid":
        if "matroid" in doc:
            kw["matroids"] = (_matroid_spec(doc["matroid"], size),)
        elif "digraph" in doc:
            g = _digraph(doc["digraph"])
            kw["matroids"] = (MatroidSpec("graphic", size, graph=g),)
            kw["digraph"] = g
        elif "partition" in doc:
            kw["matroids"] = (_matroid_spec({"type": "partition", **doc["partition"]}, size),)
        elif "uniform" in doc:
            kw["matroids"] = (_matroid_spec({"type": "uniform", **doc["uniform"]}, size),)
        else:
            raise InstanceError("matroid instance requires a matroid payload")
    elif kind == "matroid-intersection":
        specs = _req(doc, "matroids", kind)
        if len(specs) != 2:
            raise InstanceError("matroid-intersection needs exactly two matroids")
        kw["matroids"] = tuple(_matroid_spec(s, size) for s in specs)
    elif kind in ("arborescence", "sp-tree"):
        kw["digraph"] = _digraph(_req(doc, "digraph", kind))
        kw["root"] = _int(_req(doc, "root", kind), "root")
    elif kind == "st-path":
        kw["digraph"] = _digraph(_req(doc, "digraph", kind))
        kw["source"] = _int(_req(doc, "source", kind), "source")
        kw["sink"] = _int(_req(doc, "sink", kind), "sink")
    elif kind == "perfect-matching":
        b = _req(doc, "bipartite", kind)
        kw["bipartite"] = BipartiteGraph(
            _int(b["left"], "left"), _int(b["right"], "right"),
            tuple((_int(x, "left id"), _int(y, "right id")) for x, y in b["edges"]))
    elif kind == "min-cost-flow":
        kw["digraph"] = _digraph(_req(doc, "digraph", kind))
        kw["capacities"] = np.asarray(_req(doc, "capacities", kind), dtype=float)
        kw["flow"] = np.asarray(_req(doc, "flow", kind), dtype=float)
        kw["source"] = _int(_req(doc, "source", kind), "source")
        kw["sink"] = _int(_req(doc, "sink", kind), "sink")
    return validate(Instance(kind=kind, weights=weights, designated=designated,
                             delta=delta, sense=sense, **kw))


def validate(inst: Instance) -> Instance:
    """Structural checks shared by every kind; returns the instance unchanged."""
    if not math.isfinite(inst.delta) or inst.delta < 0:
        raise InstanceError(f"delta must be finite and non-negative, got {inst.delta}")
    if not np.all(np.isfinite(inst.weights)):
        raise InstanceError("weights must be finite")
    if any(not 0 <= e < inst.size for e in inst.designated):
        raise InstanceError("designated solution references a missing element")
    k = inst.kind
    if k in ("arborescence", "sp-tree", "st-path", "min-cost-flow") or (
            k == "matroid" and inst.digraph is not None):
        if inst.digraph.arc_count != inst.size:
            raise InstanceError("one weight per arc is required")
    if k in ("arborescence", "sp-tree") and not 0 <= inst.root < inst.digraph.node_count:
        raise InstanceError("root is not a node of the digraph")
    if k in ("st-path", "min-cost-flow"):
        n = inst.digraph.node_count
        if not (0 <= inst.source < n and 0 <= inst.sink < n) or inst.source == inst.sink:
            raise InstanceError("source and sink must be distinct nodes")
    if k == "perfect-matching" and inst.bipartite.edge_count != inst.size:
        raise InstanceError("one weight per bipartite edge is required")
    if k == "min-cost-flow":
        for name in ("capacities", "flow"):
            arr = getattr(inst, name)
            if arr is None or arr.shape != inst.weights.shape:
                label = "capacity" if name == "capacities" else "flow"
                raise InstanceError(f"min-cost-flow needs one {label} value per arc")
            if not np.all(np.isfinite(arr)):
                raise InstanceError(f"{name} must be finite")
        if np.any(inst.capacities < 0):
            raise InstanceError("capacities must be non-negative")
    if k == "sp-tree" and np.any(inst.weights < 0):
        raise InstanceError("sp-tree weights must be non-negative")
    if k == "st-path" and np.any(inst.weights < 0):
        raise InstanceError("st-path weights must be non-negative")
    if k not in MAX_KINDS and inst.sense != "min":
        raise InstanceError(f"{k} instances are minimization problems")
    _check_designated(inst)
    return inst


def _check_designated(inst: Instance) -> None:
    """Re-check that the designated solution is feasible for its kind."""
    from .inv_flowpath import FlowInstance, build_residual, check_out_tree
    from .inv_matching import check_perfect_matching
    from .inv_matroid import StructureError, check_arborescence, path_arcs_in_order
    from .matroid import MatroidError, is_basis

    k, d = inst.kind, inst.designated
    try:
        if k == "matroid":
            if not is_basis(inst.matroids[0].build(), d):
                raise StructureError("designated set is not a basis")
        elif k == "matroid-intersection":
            if not all(is_basis(s.build(), d) for s in inst.matroids):
                raise StructureError("designated set is not a common basis")
        elif k == "arborescence":
            check_arborescence(inst.digraph, d, inst.root)
        elif k == "sp-tree":
            check_out_tree(inst.digraph, d, inst.root)
        elif k == "st-path":
            path_arcs_in_order(inst.digraph, d, inst.source, inst.sink)
        elif k == "perfect-matching":
            check_perfect_matching(inst.bipartite, d)
        elif k == "min-cost-flow":
            build_residual(FlowInstance(inst.digraph, inst.capacities, inst.flow,
                                        inst.source, inst.sink))
    except (StructureError, MatroidError) as exc:
        raise InstanceError(str(exc)) from None


def load_instance(data: bytes | str) -> Instance:
    try:
        doc = json.loads(data)
    except json.JSONDecodeError as exc:
        raise InstanceError(f"malformed instance document: {exc}") from None
    return instance_from_dict(doc)


def instance_to_dict(inst: Instance) -> dict:
    doc: dict[str, Any] = {
        "kind": inst.kind,
        "delta": inst.delta,
        "weights": [float(x) for x in inst.weights],
        "designated": sorted(inst.designated),
        "sense": inst.sense,
    }
    if inst.digraph is not None:
        doc["digraph"] = {"nodes": inst.digraph.node_count,
                          "arcs": [list(a) for a in inst.digraph.arcs]}
    if inst.kind == "matroid" and inst.digraph is None:
        doc["matroid"] = inst.matroids[0].to_json()
    if inst.kind == "matroid-intersection":
        doc["matroids"] = [m.to_json() for m in inst.matroids]
    if inst.bipartite is not None:
        b = inst.bipartite
        doc["bipartite"] = {"left": b.left_count, "right": b.right_count,
                            "edges": [list(e) for e in b.edges]}
    if inst.capacities is not None:
        doc["capacities"] = [float(x) for x in inst.capacities]
        doc["flow"] = [float(x) for x in inst.flow]
    for key in ("root", "source", "sink"):
        if getattr(inst, key) is not None:
            doc[key] = getattr(inst, key)
    return doc


def save_instance(inst: Instance) -> bytes:
    return dumps(instance_to_dict(inst))


def save_solution(inst: Instance, result) -> bytes:
    """Serialize a solve result for ``inst``.

    ``result`` is a :class:`~invopt.qpsolve.QpSolution` produced by one of
    the inverse solvers.  Weights are only written for optimal solves.
    """
    doc: dict[str, Any] = {
        "kind": inst.kind,
        "delta": inst.delta,
        "status": result.status,
        "original_weights": [float(x) for x in inst.weights],
    }
    if result.status == "optimal" and result.weights is not None:
        doc["weights"] = [float(x) for x in result.weights]
        doc["objective"] = float(np.sum((np.asarray(result.weights) - inst.weights) ** 2))
        doc["primal_residual"] = float(result.primal_residual)
        doc["dual_residual"] = float(result.dual_residual)
        doc["worst_slack"] = {k: float(v) for k, v in sorted(result.worst_slack.items())}
    return dumps(doc)


def parse_solution(data: bytes | str) -> dict:
    return json.loads(data)


# -- deterministic JSON writer with 17 significant digits -------------------

def _encode(obj, indent: int | None, level: int) -> str:
    if indent is None:  # single line
        if isinstance(obj, Mapping):
            return "{" + ", ".join(f"{json.dumps(str(k))}: {_encode(v, None, 0)}"
                                   for k, v in sorted(obj.items())) + "}"
        if isinstance(obj, (list, tuple, np.ndarray)):
            return "[" + ", ".join(_encode(v, None, 0) for v in obj) + "]"
        return _encode(obj, 0, 0)
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x):
            return "NaN"
        if math.isinf(x):
            return "Infinity" if x > 0 else "-Infinity"
        s = format(x, ".17g")
        if not any(c in s for c in ".en"):
            s += ".0"
        return s
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, Mapping):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_encode(v, indent, level + 1)}"
                 for k, v in sorted(obj.items())]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        seq = list(obj)
        if not seq:
            return "[]"
        if all(not isinstance(v, (Mapping, list, tuple, np.ndarray)) for v in seq):
            return "[" + ", ".join(_encode(v, indent, level + 1) for v in seq) + "]"
        items = [pad + _encode(v, indent, level + 1) for v in seq]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(doc, indent: int | None = 2) -> bytes:
    """Serialize ``doc`` deterministically; floats carry 17 significant digits.

    ``indent=None`` writes a single line (for JSON-lines streams).
    """
    return (_encode(doc, indent, 0) + "\n").encode("utf-8")


def designated_sorted(inst: Instance) -> list[int]:
    return sorted(inst.designated)


def as_weight_vector(values: Sequence[float], size: int) -> np.ndarray:
    w = np.asarray(values, dtype=float)
    if w.shape != (size,):
        raise InstanceError(f"expected {size} weights, got {w.shape}")
    if not np.all(np.isfinite(w)):
        raise InstanceError("weights must be finite")
    return w
