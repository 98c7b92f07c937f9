"""Loss-guided model selection over a typed model space.

Nodes are fitted in breadth-first order; each fit starts from the best of the
parameters pushed forward along incoming monos, the same parameters lifted
evenly over the fibers of the richer model, a fiber-wise prior built from the
data, and mixtures of these.
"""
from __future__ import annotations

import csv
import json
import logging
from collections import deque
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np
from scipy.optimize import least_squares, minimize

from .cset import CSet, CSetMorphism
from .diagram import TypedDiagram
from .fincat import FinCat
from .petri import NonFiniteState, NotMono, ParamSet, Trajectory, params_pushforward, simulate

log = logging.getLogger(__name__)

OPTIMIZERS = ("nelder-mead", "finite-difference-gradient-descent")
# positive stand-in for zero-valued parameters when moving to log space
LOG_FLOOR = 1e-4


class NoRoot(ValueError):
    pass


@dataclass(frozen=True)
class ObservableMap:
    """Which observable each species of a net counts towards."""
    names: tuple[str, ...]

    @classmethod
    def from_morphism(cls, f: CSetMorphism) -> "ObservableMap":
        target = f.cod.names("S")
        return cls(tuple(target[s] for s in f["S"]))

    @classmethod
    def from_labels(cls, net: CSet) -> "ObservableMap":
        return cls(net.names("S"))

    def matrix(self, columns: Sequence[str]) -> np.ndarray:
        """(species x columns) 0/1 matrix; species outside `columns` are dropped."""
        m = np.zeros((len(self.names), len(columns)))
        for s, name in enumerate(self.names):
            if name in columns:
                m[s, list(columns).index(name)] = 1.0
        return m

    def aggregate(self, traj: Trajectory, columns: Sequence[str]) -> np.ndarray:
        if len(traj.names) != len(self.names):
            raise ValueError("observable map does not match the trajectory's species")
        return traj.states @ self.matrix(columns)


def loss(y: Trajectory, yhat: Trajectory, obs: ObservableMap) -> float:
    """Sum over samples and data columns of squared error; columns with no species predict zero."""
    if len(y.times) != len(yhat.times) or not np.allclose(y.times, yhat.times, rtol=0, atol=1e-9):
        raise ValueError("prediction and data are sampled at different times")
    diff = obs.aggregate(yhat, y.names) - y.states
    return float(np.sum(diff * diff))


def loss_lower(yhat: Trajectory, obs: ObservableMap, observable: str = "I") -> float:
    """Peak aggregated infected fraction. Not monotone along monos."""
    if observable not in obs.names:
        raise ValueError(f"no species is observed as {observable}")
    return float(np.max(obs.aggregate(yhat, [observable])))


def bfs_order(shape: FinCat) -> list[int]:
    """Breadth-first from every in-degree-0 node; ties by node index."""
    n = len(shape.objects)
    indeg = [0] * n
    succ: list[set[int]] = [set() for _ in range(n)]
    for g in shape.generators:
        indeg[g.tgt] += 1
        succ[g.src].add(g.tgt)
    roots = [i for i in range(n) if indeg[i] == 0]
    seen, order = set(roots), []
    queue = deque(roots)
    while queue:
        i = queue.popleft()
        order.append(i)
        for j in sorted(succ[i]):
            if j not in seen:
                seen.add(j)
                queue.append(j)
    if len(order) < n:
        missing = [shape.objects[i] for i in range(n) if i not in seen]
        raise NoRoot(f"nodes not reachable from any root: {missing}")
    return order


@dataclass
class FitConfig:
    optimizer: str = "finite-difference-gradient-descent"
    max_evals: int = 2000
    restarts: int = 3
    seed: int = 0
    dt: float = 0.01
    t0: float = 0.0
    reference: str | None = "(SIRD)_2"
    default_rate: float = 0.1
    restart_scale: float = 0.5

    def __post_init__(self):
        if self.optimizer not in OPTIMIZERS:
            raise ValueError(f"optimizer must be one of {OPTIMIZERS}")
        if self.max_evals < 1 or self.restarts < 0 or not self.dt > 0:
            raise ValueError("budgets must be positive")

    @classmethod
    def from_json(cls, data: dict) -> "FitConfig":
        unknown = set(data) - set(cls.__dataclass_fields__)
        if unknown:
            raise ValueError(f"unknown fit options: {sorted(unknown)}")
        return cls(**data)


@dataclass
class Fit:
    params: ParamSet
    loss: float
    init_loss: float
    evals: int


class Objective:
    def __init__(self, net: CSet, obs: ObservableMap, data: Trajectory, cfg: FitConfig):
        self.net, self.obs, self.data, self.cfg = net, obs, data, cfg
        self.M = obs.matrix(data.names)
        self.t1 = float(data.times[-1])
        self.evals = 0

    def predict(self, p: ParamSet) -> Trajectory:
        return simulate(self.net, p, self.cfg.t0, self.t1, self.cfg.dt, t_eval=self.data.times)

    def residuals(self, p: ParamSet) -> np.ndarray | None:
        self.evals += 1
        try:
            traj = self.predict(p)
        except NonFiniteState:
            return None
        return (traj.states @ self.M - self.data.states).ravel()

    def __call__(self, p: ParamSet) -> float:
        r = self.residuals(p)
        return np.inf if r is None else float(r @ r)


def _to_log(p: ParamSet) -> np.ndarray:
    return np.log(np.maximum(p.vector(), LOG_FLOOR))


def fit_node(net: CSet, obs: ObservableMap, data: Trajectory, init: ParamSet | Sequence[ParamSet],
             cfg: FitConfig | None = None, rng: np.random.Generator | None = None) -> Fit:
    """Minimize the loss over log-parameters; never returns anything worse than the best start."""
    cfg = cfg or FitConfig()
    rng = rng if rng is not None else np.random.default_rng(cfg.seed)
    starts = [init] if isinstance(init, ParamSet) else list(init)
    for p in starts:
        p.check(net)
    f = Objective(net, obs, data, cfg)
    scored = sorted(((f(p), k) for k, p in enumerate(starts)), key=lambda t: t)
    init_loss, first = scored[0]
    best_p, best = starts[first], init_loss

    x_best = _to_log(best_p)
    seeds = [x_best] + [_to_log(starts[k]) for _, k in scored[1:]]
    for run in range(cfg.restarts + 1):
        if run < len(seeds):
            x0 = seeds[run]
        else:
            x0 = x_best + rng.normal(0.0, cfg.restart_scale, size=x_best.shape)
        x, val = _optimize(f, net, x0, cfg)
        log.debug("run %d: loss %.6g", run, val)
        if val < best:
            best, best_p, x_best = val, ParamSet.from_vector(net, np.exp(x)), x
    return Fit(best_p, best, init_loss, f.evals)


def _optimize(f: Objective, net: CSet, x0: np.ndarray, cfg: FitConfig) -> tuple[np.ndarray, float]:
    def params(x):
        with np.errstate(over="ignore"):
            v = np.exp(x)
        return ParamSet.from_vector(net, v) if np.all(np.isfinite(v)) else None

    def value(x):
        p = params(x)
        return np.inf if p is None else f(p)

    if cfg.optimizer == "nelder-mead":
        simplex = np.vstack([x0] + [x0 + 0.5 * e for e in np.eye(len(x0))])
        res = minimize(value, x0, method="Nelder-Mead",
                       options={"maxfev": cfg.max_evals, "initial_simplex": simplex,
                                "adaptive": True, "xatol": 1e-6, "fatol": 1e-12})
        return res.x, float(res.fun)

    size = f.data.states.size

    def resid(x):
        p = params(x)
        r = None if p is None else f.residuals(p)
        return np.full(size, 1e3) if r is None else r

    # each finite-difference Jacobian costs len(x0) extra simulations, which max_nfev does not count
    res = least_squares(resid, x0, method="trf", max_nfev=max(1, cfg.max_evals // (len(x0) + 1)))
    return res.x, value(res.x)


def prior_params(obs: ObservableMap, net: CSet, data: Trajectory, rate: float) -> ParamSet:
    """Split each observable's first sample evenly over the species that count towards it."""
    first = dict(zip(data.names, data.states[0]))
    counts = {name: obs.names.count(name) for name in set(obs.names)}
    conc = [max(first.get(name, 0.0), 0.0) / counts[name] for name in obs.names]
    return ParamSet(conc, np.full(net.n("T"), rate))


def _signatures(net: CSet, obs: ObservableMap) -> list[tuple]:
    """Per transition: the sorted observables of its inputs and of its outputs."""
    ins = [[] for _ in range(net.n("T"))]
    outs = [[] for _ in range(net.n("T"))]
    for s, t in zip(net.act("is"), net.act("it")):
        ins[t].append(obs.names[s])
    for s, t in zip(net.act("os"), net.act("ot")):
        outs[t].append(obs.names[s])
    return [(tuple(sorted(i)), tuple(sorted(o))) for i, o in zip(ins, outs)]


def lift_params(src: CSet, src_obs: ObservableMap, p: ParamSet, tgt: CSet, tgt_obs: ObservableMap) -> ParamSet:
    """Carry a fit to a finer net by spreading each observable evenly over its fiber.

    Rates are matched by observable signature and rescaled so the aggregated
    mass-action flux is unchanged; for a stratification with symmetric strata the
    aggregated trajectory is reproduced exactly. Unmatched transitions get rate 0.
    """
    total: dict[str, float] = {}
    for name, c in zip(src_obs.names, p.concentrations):
        total[name] = total.get(name, 0.0) + c
    src_fiber = {n: src_obs.names.count(n) for n in set(src_obs.names)}
    tgt_fiber = {n: tgt_obs.names.count(n) for n in set(tgt_obs.names)}
    conc = [total.get(n, 0.0) / tgt_fiber[n] for n in tgt_obs.names]

    src_sig, tgt_sig = _signatures(src, src_obs), _signatures(tgt, tgt_obs)
    by_sig: dict[tuple, list[float]] = {}
    for sig, r in zip(src_sig, p.rates):
        by_sig.setdefault(sig, []).append(r)
    rates = []
    for sig in tgt_sig:
        if sig not in by_sig or any(n not in src_fiber for n in sig[0]):
            rates.append(0.0)
            continue
        copies = tgt_sig.count(sig) / len(by_sig[sig])
        scale = np.prod([tgt_fiber[n] / src_fiber[n] for n in sig[0]]) / copies
        rates.append(float(np.mean(by_sig[sig])) * scale)
    return ParamSet(conc, rates)


def _fill(p: ParamSet, prior: ParamSet) -> ParamSet:
    """Zero entries of a pushed-forward guess replaced by the prior's values."""
    conc = np.where(p.concentrations > 0, p.concentrations, prior.concentrations)
    rates = np.where(p.rates > 0, p.rates, prior.rates)
    return ParamSet(conc, rates)


@dataclass
class NodeFit:
    node: str
    order: int
    raw_loss: float
    normalized_loss: float
    init_loss: float
    warm_start: str
    evals: int
    concentrations: dict[str, float]
    rates: dict[str, float]


@dataclass
class AuditEntry:
    edge: str
    src: str
    tgt: str
    src_loss: float
    tgt_loss: float
    note: str = "loss increased along a mono: optimizer artifact"


@dataclass
class FitReport:
    reference: str
    nodes: list[NodeFit]
    audit: list[AuditEntry] = field(default_factory=list)

    def node(self, name: str) -> NodeFit:
        return next(n for n in self.nodes if n.node == name)

    def to_json(self) -> str:
        return json.dumps({"reference": self.reference, "nodes": [asdict(n) for n in self.nodes],
                           "audit": [asdict(a) for a in self.audit]}, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "FitReport":
        data = json.loads(text)
        return cls(data["reference"], [NodeFit(**n) for n in data["nodes"]],
                   [AuditEntry(**a) for a in data["audit"]])

    def write_loss_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["node", "raw_loss", "normalized_loss", "order"])
            for n in sorted(self.nodes, key=lambda n: n.order):
                w.writerow([n.node, repr(n.raw_loss), repr(n.normalized_loss), n.order])


def node_params(space: TypedDiagram, fit: NodeFit) -> ParamSet:
    net = space.diagram[fit.node]
    return ParamSet.from_dict(net, fit.concentrations, fit.rates)


def observables(space: TypedDiagram) -> list[ObservableMap]:
    return [ObservableMap(space.observables_at(i)) for i in range(len(space.diagram.ob))]


def select(space: TypedDiagram, data: Trajectory, cfg: FitConfig | None = None) -> FitReport:
    """Fit every node in breadth-first order, warm-starting along incoming morphisms."""
    cfg = cfg or FitConfig()
    D = space.diagram
    shape = D.shape
    obs = observables(space)
    order = bfs_order(shape)
    fitted: dict[int, Fit] = {}
    notes: dict[int, str] = {}
    for rank, i in enumerate(order):
        net = D.ob[i]
        prior = prior_params(obs[i], net, data, cfg.default_rate)
        cands, names = [], []
        for g, gen in enumerate(shape.generators):
            if gen.tgt != i or gen.src not in fitted:
                continue
            try:
                pushed = params_pushforward(D.hom[g], fitted[gen.src].params)
            except NotMono:
                continue
            lifted = lift_params(D.ob[gen.src], obs[gen.src], fitted[gen.src].params, net, obs[i])
            cands += [pushed, lifted, _fill(pushed, prior),
                      ParamSet(prior.concentrations, _fill(pushed, prior).rates)]
            names += [f"pushforward:{gen.name}", f"lift:{gen.name}", f"pushforward+prior:{gen.name}",
                      f"prior+rates:{gen.name}"]
        cands.append(prior)
        names.append("prior")
        rng = np.random.default_rng([cfg.seed, rank])
        f0 = Objective(net, obs[i], data, cfg)
        start = min(range(len(cands)), key=lambda k: (f0(cands[k]), k))
        ordered = [cands[start]] + [c for k, c in enumerate(cands) if k != start]
        fitted[i] = fit_node(net, obs[i], data, ordered, cfg, rng)
        notes[i] = names[start]
        log.info("fitted %s (%d/%d): loss %.6g from %s", shape.objects[i], rank + 1, len(order),
                 fitted[i].loss, names[start])

    ref = cfg.reference if cfg.reference in shape.objects else shape.objects[order[-1]]
    ref_loss = fitted[shape.ob(ref)].loss
    nodes = []
    for rank, i in enumerate(order):
        fit = fitted[i]
        d = fit.params.to_dict(D.ob[i])
        if ref_loss > 0:
            normalized = fit.loss / ref_loss
        else:
            normalized = 1.0 if fit.loss == 0 else float("inf")
        nodes.append(NodeFit(shape.objects[i], rank, fit.loss, normalized,
                             fit.init_loss, notes[i], fit.evals, d["concentrations"], d["rates"]))
    audit = [
        AuditEntry(gen.name, shape.objects[gen.src], shape.objects[gen.tgt],
                   fitted[gen.src].loss, fitted[gen.tgt].loss)
        for gen in shape.generators if fitted[gen.tgt].loss > fitted[gen.src].loss
    ]
    return FitReport(ref, nodes, audit)


def synthetic_data(space: TypedDiagram, node: str, params: ParamSet, t0: float = 0.0, t1: float = 50.0,
                   samples: int = 50, noise: float = 0.01, rng: np.random.Generator | None = None,
                   dt: float = 0.01) -> Trajectory:
    """Simulate one node, sample evenly on (t0, t1] and add Gaussian noise to its observables."""
    if samples < 1 or not t1 > t0 or noise < 0:
        raise ValueError("need samples >= 1, t1 > t0 and noise >= 0")
    i = space.diagram.shape.ob(node)
    net = space.diagram.ob[i]
    times = np.linspace(t0, t1, samples + 1)[1:]
    traj = simulate(net, params, t0, t1, dt, t_eval=times)
    obs = ObservableMap(space.observables_at(i))
    columns = list(dict.fromkeys(obs.names))
    states = obs.aggregate(traj, columns)
    if noise > 0:
        rng = rng if rng is not None else np.random.default_rng(0)
        states = states + rng.normal(0.0, noise, size=states.shape)
    return Trajectory(times, states, tuple(columns))


def fitted_trajectory(space: TypedDiagram, fit: NodeFit, data: Trajectory, cfg: FitConfig | None = None) -> Trajectory:
    """Best-fit prediction aggregated onto the data's columns."""
    cfg = cfg or FitConfig()
    i = space.diagram.shape.ob(fit.node)
    net = space.diagram.ob[i]
    obs = ObservableMap(space.observables_at(i))
    traj = simulate(net, node_params(space, fit), cfg.t0, float(data.times[-1]), cfg.dt, t_eval=data.times)
    return Trajectory(traj.times, obs.aggregate(traj, data.names), data.names)
