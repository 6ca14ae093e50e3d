"""Online structured learning by repeated inverse optimization.

Weights are linear in features, ``w(e) = theta . f_e``.  Each round predicts
with the current ``theta``, measures the loss against the truth, and moves
``theta`` as little as possible (in L2) so that the truth wins by a margin
equal to that loss.  The constraint system of the edge-space inverse problem
is reused with every weight variable replaced by its feature expansion.
"""
from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from . import qpsolve
from .cyclebound import ConstraintSystem, Row
from .forward import NoStructureError, best_structure
from .graphcore import Instance, InstanceError, dumps, instance_from_dict
from .solvers import formulation, orientation

log = logging.getLogger(__name__)

LEARNABLE_KINDS = ("matroid", "arborescence", "perfect-matching")


@dataclass(frozen=True)
class FeaturizedExample:
    """A structure (weights unused), per-element features and the true solution.

    The truth is stored as the instance's designated solution.
    """

    instance: Instance
    features: np.ndarray  # (elements, F)

    def __post_init__(self):
        f = np.asarray(self.features, dtype=float)
        if f.ndim != 2 or f.shape[0] != self.instance.size:
            raise InstanceError("features must be one row per element")
        if not np.all(np.isfinite(f)):
            raise InstanceError("features must be finite")
        object.__setattr__(self, "features", f)
        if self.instance.kind not in LEARNABLE_KINDS:
            raise InstanceError(f"kind {self.instance.kind!r} is not supported for learning")

    @property
    def truth(self) -> frozenset[int]:
        return self.instance.designated

    @property
    def dim(self) -> int:
        return self.features.shape[1]

    def phi(self, structure: Iterable[int]) -> np.ndarray:
        return self.features[sorted(structure)].sum(axis=0)


@dataclass
class Model:
    theta: np.ndarray

    def __post_init__(self):
        self.theta = np.asarray(self.theta, dtype=float)
        if not np.all(np.isfinite(self.theta)):
            raise ValueError("model parameters must be finite")

    @classmethod
    def zeros(cls, dim: int) -> "Model":
        return cls(np.zeros(dim))


@dataclass
class RoundRecord:
    round: int
    prediction: list[int]
    loss: float
    hinge: float
    update_objective: float
    status: str
    flagged: bool = False
    replay: int = 0

    def to_json(self) -> dict:
        return {"round": self.round, "prediction": self.prediction, "loss": self.loss,
                "hinge": self.hinge, "update_objective": self.update_objective,
                "status": self.status, "flagged": self.flagged, "pass": self.replay}


def induced_weights(model: Model, ex: FeaturizedExample) -> np.ndarray:
    if model.theta.shape != (ex.dim,):
        raise ValueError(f"model has {model.theta.shape[0]} parameters, features have {ex.dim}")
    return ex.features @ model.theta


def predict(model: Model, ex: FeaturizedExample) -> frozenset[int]:
    return best_structure(ex.instance, induced_weights(model, ex))


def hamming_loss(y_true: Iterable[int], y_hat: Iterable[int]) -> float:
    return float(len(set(y_true) ^ set(y_hat)))


def zeroone_loss(y_true: Iterable[int], y_hat: Iterable[int]) -> float:
    return 0.0 if set(y_true) == set(y_hat) else 1.0


LOSSES: dict[str, Callable] = {"hamming": hamming_loss, "zeroone": zeroone_loss}


def lift_constraints(edge_system: ConstraintSystem, features,
                     weight_vars: Sequence[int] | None = None) -> ConstraintSystem:
    """Replace each weight variable ``w[e]`` by ``sum_k features[e, k] * theta[k]``.

    Parameters come first (role ``param``); other variables keep their order
    after them.  Row count and tags are unchanged.
    """
    feats = np.asarray(features, dtype=float)
    if weight_vars is None:
        weight_vars = edge_system.variables("weight")
    if len(weight_vars) != feats.shape[0]:
        raise ValueError("one feature row per weight variable is required")
    out = ConstraintSystem()
    theta = [out.add_variable(f"theta[{k}]", "param") for k in range(feats.shape[1])]
    element_of = {v: e for e, v in enumerate(weight_vars)}
    remap = {}
    for v, (name, role) in enumerate(zip(edge_system.names, edge_system.roles)):
        if v not in element_of:
            remap[v] = out.add_variable(name, role)
    for row in edge_system.rows:
        acc: dict[int, float] = {}
        for v, c in row.terms:
            if v in element_of:
                for k, fk in enumerate(feats[element_of[v]]):
                    if fk != 0.0:
                        acc[theta[k]] = acc.get(theta[k], 0.0) + c * fk
            else:
                acc[remap[v]] = acc.get(remap[v], 0.0) + c
        terms = tuple((v, c) for v, c in sorted(acc.items()) if c != 0.0)
        # a row can vanish if the features of its elements cancel; keep it so
        # an unsatisfiable one still makes the update infeasible
        out.rows.append(Row(terms, row.sense, row.rhs, row.tag))
    out.meta = dict(edge_system.meta)
    out.meta["theta"] = theta
    return out


def _edge_formulation(ex: FeaturizedExample, delta: float):
    inst = ex.instance.with_delta(delta)
    return formulation(inst), orientation(inst)


def solve_update(model: Model, ex: FeaturizedExample, delta_t: float,
                 settings: qpsolve.SolverSettings | None = None):
    """``(new_model, solution)``; the model is unchanged unless the solve is optimal."""
    if delta_t < 0:
        raise ValueError("delta_t must be non-negative")
    form, sign = _edge_formulation(ex, delta_t)
    lifted = lift_constraints(form.system, sign * ex.features,
                              [v for v in form.weight_vars if v is not None])
    theta_vars = lifted.meta["theta"]
    sol = qpsolve.solve(qpsolve.QpProblem(lifted, list(zip(theta_vars, model.theta))), settings)
    if not sol.ok:
        log.warning("update infeasible or unsolved (%s); model left unchanged", sol.status)
        return model, sol
    return Model(np.array([sol.x[v] for v in theta_vars])), sol


def update(model: Model, ex: FeaturizedExample, delta_t: float,
           settings: qpsolve.SolverSettings | None = None) -> Model:
    return solve_update(model, ex, delta_t, settings)[0]


def _scores(model: Model, ex: FeaturizedExample) -> np.ndarray:
    """Induced weights oriented so that larger is better."""
    w = induced_weights(model, ex)
    return w if ex.instance.maximize else -w


def best_competitor_score(model: Model, ex: FeaturizedExample) -> float:
    """Highest score of a feasible structure other than the truth (``-inf`` if none).

    Any other structure of the same size misses some element of the truth,
    so it suffices to forbid each truth element in turn.
    """
    raw = induced_weights(model, ex)
    score = _scores(model, ex)
    best = -np.inf
    for e in sorted(ex.truth):
        try:
            s = best_structure(ex.instance, raw, forbidden=[e])
        except NoStructureError:
            continue
        best = max(best, float(score[list(s)].sum()))
    return best


def hinge_loss(model: Model, ex: FeaturizedExample, delta: float) -> float:
    """``max(0, delta - (score(truth) - best competitor score))``."""
    gap = float(_scores(model, ex)[list(ex.truth)].sum()) - best_competitor_score(model, ex)
    return max(0.0, delta - gap)


def train_online(examples: Sequence[FeaturizedExample], loss: str | Callable = "hamming",
                 passes: int = 1, stop_when_clean: bool = False,
                 settings: qpsolve.SolverSettings | None = None):
    """Run the predict / loss / update loop; returns ``(model, records)``.

    ``passes > 1`` replays the stream; with ``stop_when_clean`` the run ends
    after the first pass in which every prediction was correct.
    """
    if not examples:
        return Model.zeros(0), []
    loss_fn = LOSSES[loss] if isinstance(loss, str) else loss
    dim = examples[0].dim
    if any(ex.dim != dim for ex in examples):
        raise ValueError("all examples must share the feature dimension")
    model = Model.zeros(dim)
    records: list[RoundRecord] = []
    t = 0
    for p in range(passes):
        clean = True
        for ex in examples:
            t += 1
            y_hat = predict(model, ex)
            delta_t = float(loss_fn(ex.truth, y_hat))
            hinge = hinge_loss(model, ex, delta_t)
            if delta_t == 0:
                records.append(RoundRecord(t, sorted(y_hat), 0.0, hinge, 0.0, "skipped", replay=p))
                continue
            clean = False
            new, sol = solve_update(model, ex, delta_t, settings)
            step = float(np.sum((new.theta - model.theta) ** 2))
            records.append(RoundRecord(t, sorted(y_hat), delta_t, hinge, step, sol.status,
                                       flagged=not sol.ok, replay=p))
            model = new
        if clean and stop_when_clean:
            break
    return model, records


def hinge_bound(max_loss: float, radius: float, theta_norm: float, margin: float) -> float:
    """``8 A (R |theta*| / delta*)^2`` for loss bound A, feature radius R and margin delta*."""
    return 8.0 * max_loss * (radius * theta_norm / margin) ** 2


# -- JSON-lines formats ----------------------------------------------------------

def example_from_dict(doc) -> FeaturizedExample:
    if "features" not in doc or "truth" not in doc:
        raise InstanceError("training examples need 'features' and 'truth'")
    feats = np.asarray(doc["features"], dtype=float)
    body = {k: v for k, v in doc.items() if k not in ("features", "truth")}
    body.setdefault("weights", [0.0] * len(feats))
    body.setdefault("delta", 0.0)
    body["designated"] = doc["truth"]
    return FeaturizedExample(instance_from_dict(body), feats)


def example_to_dict(ex: FeaturizedExample) -> dict:
    from .graphcore import instance_to_dict

    doc = instance_to_dict(ex.instance)
    for key in ("weights", "delta", "designated"):
        doc.pop(key, None)
    doc["truth"] = sorted(ex.truth)
    doc["features"] = [list(map(float, row)) for row in ex.features]
    return doc


def read_stream(text: str) -> list[FeaturizedExample]:
    out = []
    for n, line in enumerate(text.splitlines(), 1):
        if not line.strip():
            continue
        try:
            doc = json.loads(line)
        except json.JSONDecodeError as exc:
            raise InstanceError(f"line {n}: {exc}") from None
        out.append(example_from_dict(doc))
    return out


def write_stream(examples: Iterable[FeaturizedExample]) -> bytes:
    return b"".join(dumps(example_to_dict(ex), indent=None) for ex in examples)


def write_log(records: Iterable[RoundRecord]) -> bytes:
    return b"".join(dumps(r.to_json(), indent=None) for r in records)
