"""Whole-grain Petri nets as C-sets, with mass-action ODE semantics.

A net has species S, transitions T, input arcs I and output arcs O, with
maps is, it (input arc -> species, transition) and os, ot likewise.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np
from numba import njit

from .cset import SCHEMAS, CSet, CSetMorphism, is_mono
from .fincat import FinCat, Generator

PETRI = FinCat(
    ("S", "T", "I", "O"),
    (Generator("is", 2, 0), Generator("it", 2, 1), Generator("os", 3, 0), Generator("ot", 3, 1)),
)
SCHEMAS["Petri"] = PETRI

DEFAULT_DT = 0.01


class NonFiniteState(ArithmeticError):
    pass


class NotMono(ValueError):
    pass


def petri_net(species: Sequence[str], transitions: Mapping[str, tuple[Sequence[str], Sequence[str]]]) -> CSet:
    """Build a labelled net from species names and {transition: (inputs, outputs)}.

    >>> sir = petri_net("SIR", {"inf": ("SI", "II"), "rec": ("I", "R")})
    >>> sir.parts
    (3, 2, 3, 3)
    """
    species = list(species)
    sidx = {s: i for i, s in enumerate(species)}
    is_, it, os_, ot = [], [], [], []
    for t, (ins, outs) in enumerate(transitions.values()):
        for s in ins:
            is_.append(sidx[s])
            it.append(t)
        for s in outs:
            os_.append(sidx[s])
            ot.append(t)
    return CSet.build(
        PETRI,
        {"S": len(species), "T": len(transitions), "I": len(is_), "O": len(os_)},
        {"is": is_, "it": it, "os": os_, "ot": ot},
        {"S": species, "T": list(transitions)},
    )


def stoichiometry(net: CSet) -> tuple[np.ndarray, np.ndarray]:
    """Input and output multiplicity matrices, each of shape (|T|, |S|)."""
    ns, nt = net.n("S"), net.n("T")
    inp = np.zeros((nt, ns), dtype=np.int64)
    out = np.zeros((nt, ns), dtype=np.int64)
    for s, t in zip(net.act("is"), net.act("it")):
        inp[t, s] += 1
    for s, t in zip(net.act("os"), net.act("ot")):
        out[t, s] += 1
    return inp, out


@dataclass
class ParamSet:
    """Initial concentrations per species and mass-action rate per transition."""
    concentrations: np.ndarray
    rates: np.ndarray

    def __post_init__(self):
        self.concentrations = np.array(self.concentrations, dtype=float)
        self.rates = np.array(self.rates, dtype=float)
        for name in ("concentrations", "rates"):
            v = getattr(self, name)
            if v.ndim != 1 or not np.all(np.isfinite(v)) or np.any(v < 0):
                raise ValueError(f"{name} must be a finite nonnegative vector")

    def check(self, net: CSet) -> None:
        if len(self.concentrations) != net.n("S") or len(self.rates) != net.n("T"):
            raise ValueError(
                f"parameters ({len(self.concentrations)}, {len(self.rates)}) do not match "
                f"net with {net.n('S')} species and {net.n('T')} transitions")

    @classmethod
    def from_dict(cls, net: CSet, concentrations: Mapping[str, float], rates: Mapping[str, float]) -> "ParamSet":
        """Look values up by species/transition label; anything unnamed is zero."""
        return cls([concentrations.get(s, 0.0) for s in net.names("S")],
                   [rates.get(t, 0.0) for t in net.names("T")])

    def to_dict(self, net: CSet) -> dict:
        return {
            "concentrations": dict(zip(net.names("S"), self.concentrations.tolist())),
            "rates": dict(zip(net.names("T"), self.rates.tolist())),
        }

    def vector(self) -> np.ndarray:
        return np.concatenate([self.concentrations, self.rates])

    @classmethod
    def from_vector(cls, net: CSet, v: np.ndarray) -> "ParamSet":
        ns = net.n("S")
        return cls(v[:ns], v[ns:])


@dataclass
class Trajectory:
    times: np.ndarray
    states: np.ndarray  # (len(times), n_species)
    names: tuple[str, ...]

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.states = np.asarray(self.states, dtype=float)
        if self.states.shape != (len(self.times), len(self.names)):
            raise ValueError("trajectory dimensions are inconsistent")
        if len(self.times) > 1 and np.any(np.diff(self.times) <= 0):
            raise ValueError("trajectory times must be strictly increasing")

    def column(self, name: str) -> np.ndarray:
        return self.states[:, self.names.index(name)]

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t", *self.names])
            for t, row in zip(self.times, self.states):
                w.writerow([repr(float(t)), *(repr(float(v)) for v in row)])

    @classmethod
    def from_csv(cls, path) -> "Trajectory":
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        if not rows or rows[0][0] != "t":
            raise ValueError(f"{path}: expected a header starting with 't'")
        try:
            data = np.array([[float(v) for v in r] for r in rows[1:] if r], dtype=float)
        except ValueError as exc:
            raise ValueError(f"{path}: {exc}") from None
        if data.ndim != 2 or data.shape[1] != len(rows[0]):
            raise ValueError(f"{path}: ragged rows")
        return cls(data[:, 0], data[:, 1:], tuple(rows[0][1:]))


def mass_action_vectorfield(net: CSet, p: ParamSet):
    """dx_s = sum_t rate_t (out[t,s] - in[t,s]) prod_s' x_s'^in[t,s']."""
    p.check(net)
    inp, out = stoichiometry(net)
    stoich = (out - inp).astype(float)
    rates = p.rates.copy()

    def field(x):
        x = np.asarray(x, dtype=float)
        if x.shape != (inp.shape[1],):
            raise ValueError("state has the wrong dimension")
        flux = rates * np.prod(x[None, :] ** inp, axis=1)
        return flux @ stoich

    return field


@njit(cache=True)
def _field(inp, stoich, rates, x, dx):
    nt, ns = inp.shape
    for s in range(ns):
        dx[s] = 0.0
    for t in range(nt):
        f = rates[t]
        if f == 0.0:
            continue
        for s in range(ns):
            for _ in range(inp[t, s]):
                f *= x[s]
        if f == 0.0:
            continue
        for s in range(ns):
            if stoich[t, s] != 0.0:
                dx[s] += f * stoich[t, s]


@njit(cache=True)
def _rk4(inp, stoich, rates, x0, t0, times, dt):
    ns = x0.shape[0]
    out = np.empty((times.shape[0], ns))
    x = x0.copy()
    k1 = np.empty(ns)
    k2 = np.empty(ns)
    k3 = np.empty(ns)
    k4 = np.empty(ns)
    tmp = np.empty(ns)
    t = t0
    for i in range(times.shape[0]):
        span = times[i] - t
        nsteps = int(math.ceil(span / dt - 1e-9)) if span > 0 else 0
        for k in range(nsteps):
            h = dt if k < nsteps - 1 else span - (nsteps - 1) * dt
            _field(inp, stoich, rates, x, k1)
            for s in range(ns):
                tmp[s] = x[s] + 0.5 * h * k1[s]
            _field(inp, stoich, rates, tmp, k2)
            for s in range(ns):
                tmp[s] = x[s] + 0.5 * h * k2[s]
            _field(inp, stoich, rates, tmp, k3)
            for s in range(ns):
                tmp[s] = x[s] + h * k3[s]
            _field(inp, stoich, rates, tmp, k4)
            for s in range(ns):
                x[s] += h / 6.0 * (k1[s] + 2.0 * k2[s] + 2.0 * k3[s] + k4[s])
            if not np.all(np.isfinite(x)):
                out[i:, :] = np.nan
                return out
        t = times[i]
        out[i, :] = x
    return out


def simulate(net: CSet, p: ParamSet, t0: float, t1: float, dt: float = DEFAULT_DT,
             t_eval: Sequence[float] | None = None) -> Trajectory:
    """Fixed-step RK4 from t0 to t1; the last step of each output interval is shortened to land on it.

    Without `t_eval` the output grid is t0, t0+dt, ..., t1.
    """
    if not t1 > t0 or not dt > 0:
        raise ValueError("need t1 > t0 and dt > 0")
    p.check(net)
    if t_eval is None:
        n = int(math.ceil((t1 - t0) / dt - 1e-9))
        times = np.array([t0 + k * dt for k in range(n)] + [t1])
    else:
        times = np.asarray(t_eval, dtype=float)
        if np.any(times < t0) or np.any(times > t1) or np.any(np.diff(times) <= 0):
            raise ValueError("t_eval must be increasing and inside [t0, t1]")
    inp, out = stoichiometry(net)
    states = _rk4(inp, (out - inp).astype(float), p.rates, p.concentrations, float(t0), times, float(dt))
    if not np.all(np.isfinite(states)):
        raise NonFiniteState("state became non-finite during integration")
    return Trajectory(times, states, net.names("S"))


def params_pushforward(f: CSetMorphism, p: ParamSet) -> ParamSet:
    """Carry parameters along a mono; species and transitions outside the image get zero."""
    if not is_mono(f):
        raise NotMono("parameters can only be pushed forward along monomorphisms")
    p.check(f.dom)
    conc = np.zeros(f.cod.n("S"))
    rates = np.zeros(f.cod.n("T"))
    conc[list(f["S"])] = p.concentrations
    rates[list(f["T"])] = p.rates
    return ParamSet(conc, rates)


def prior_product(marginals: Sequence[Sequence[float]], species_tuples: Sequence[Sequence[int]],
                  total: float = 1.0) -> np.ndarray:
    """Initial-concentration guess for a product net from independent per-factor fractions.

    `species_tuples[s]` gives the factor species that product species s projects to.
    """
    margs = [np.asarray(m, dtype=float) for m in marginals]
    for m in margs:
        if m.sum() > 1 + 1e-9 or np.any(m < 0):
            raise ValueError("each marginal must be nonnegative and sum to at most 1")
    conc = []
    for tup in species_tuples:
        if len(tup) != len(margs):
            raise ValueError("species tuple length does not match the number of marginals")
        val = total
        for m, k in zip(margs, tup):
            if not 0 <= k < len(m):
                raise ValueError("species tuple index out of range for its marginal")
            val *= m[k]
        conc.append(val)
    return np.array(conc)
