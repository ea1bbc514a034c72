"""Replicated simulation driver: specs in, reproducible records out.

A RunSpec pins the model, its parameters (as exact strings), the horizon,
the replica count, and a 64-bit master seed. Replica r runs on the stream
keyed (master_seed, r), so records are reproducible bit for bit and replicas
may be farmed out in any order. Observables are evaluated exactly on the
final state of each replica; their means over replicas are exact rationals.
"""

import hashlib
import json
import math
from dataclasses import dataclass
from typing import Mapping, Sequence, Tuple, Union

from ..exactcore import ZERO, as_exact, exact_str
from ..weights import ModelParams
from ._backend import BACKEND_NAME, PhiloxStream
from .configs import ParticleConfig, height, q_correlation_observable
from .continuous import run_asep, run_q_boson, run_q_tasep
from .quadrant import QuadrantSampler
from .steps import LRowCache, PhiCache, step_fused, step_q_hahn, step_x_circ, step_x_plus
from ..weights import FusedSpin

__all__ = ["MODELS", "RunSpec", "TrajectoryRecord", "run", "validate_runspec"]

MODELS = (
    "Xcirc",
    "Xplus",
    "fused_Xcirc",
    "fused_Xplus",
    "qHahn_circ",
    "qHahn_plus",
    "qHahn_inf",
    "qTASEP",
    "qBoson",
    "sixVertexQuadrant",
    "ASEP",
)

_CONTINUOUS = ("qTASEP", "qBoson", "ASEP")


@dataclass(frozen=True)
class RunSpec:
    """Everything needed to reproduce a simulation, in canonical form."""

    model: str
    params: Tuple[Tuple[str, str], ...]
    horizon: Union[int, float]
    replicas: int
    master_seed: int
    observe: Tuple[str, ...] = ()

    @classmethod
    def make(cls, model, params: Mapping, horizon, replicas, master_seed, observe=()):
        """Normalize a parameter mapping: numeric values become exact
        strings, anything else is kept verbatim."""
        normalized = []
        for key in sorted(params):
            value = params[key]
            try:
                text = exact_str(as_exact(value))
            except (TypeError, ValueError):
                text = str(value)
            normalized.append((str(key), text))
        if isinstance(horizon, float) and float(horizon).is_integer():
            horizon = int(horizon)
        return cls(
            model=str(model),
            params=tuple(normalized),
            horizon=horizon,
            replicas=int(replicas),
            master_seed=int(master_seed),
            observe=tuple(str(o) for o in observe),
        )

    def param_map(self):
        return dict(self.params)

    def canonical(self):
        return {
            "model": self.model,
            "params": [list(p) for p in self.params],
            "horizon": self.horizon,
            "replicas": self.replicas,
            "master_seed": self.master_seed,
            "observe": list(self.observe),
        }

    def spec_hash(self):
        payload = json.dumps(self.canonical(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(payload.encode()).hexdigest()


@dataclass(frozen=True)
class TrajectoryRecord:
    spec_hash: str
    backend: str
    master_seed: int
    replicas: int
    replica_seeds: Tuple[Tuple[int, int], ...]
    finals: Tuple[str, ...]
    observations: Tuple[Tuple[str, Tuple[str, ...], str], ...]

    def to_json(self):
        payload = {
            "spec_hash": self.spec_hash,
            "backend": self.backend,
            "master_seed": self.master_seed,
            "replicas": self.replicas,
            "replica_seeds": [list(s) for s in self.replica_seeds],
            "finals": list(self.finals),
            "observations": [
                {"name": name, "values": list(vals), "mean": mean}
                for name, vals, mean in self.observations
            ],
        }
        return json.dumps(payload, sort_keys=True, separators=(",", ":"))

    def observation_mean(self, name):
        for obs_name, _values, mean in self.observations:
            if obs_name == name:
                return as_exact(mean)
        raise KeyError(name)


def _need(params, key, model):
    if key not in params:
        raise ValueError(f"model {model} needs parameter '{key}'")
    return params[key]


def _exact(params, key, model):
    return as_exact(_need(params, key, model))


def _integer(params, key, model, least=0):
    value = int(str(_need(params, key, model)))
    if value < least:
        raise ValueError(f"parameter '{key}' must be at least {least}")
    return value


def _model_params(params, model):
    q = _exact(params, "q", model)
    if "s" in params:
        return ModelParams.from_qs(q, as_exact(params["s"]))
    if "s_sq" in params:
        return ModelParams.from_q_ssq(q, as_exact(params["s_sq"]))
    raise ValueError(f"model {model} needs parameter 's' or 's_sq'")


def _probe_rows(cache, h_max):
    # touching a few rows up front surfaces regime violations before any
    # randomness is spent
    for m in range(4):
        for h in range(h_max + 1):
            cache.row(m, h)


def _encode_config(config):
    body = ",".join(f"{site}:{count}" for site, count in sorted(config.to_dict().items()))
    if config.reservoir_site is not None:
        return f"res@{config.reservoir_site};{body}"
    return body


def _encode_positions(positions):
    return ",".join(str(p) for p in positions)


class _Runner:
    """Validated, cache-carrying executor for one RunSpec."""

    def __init__(self, spec: RunSpec):
        if spec.model not in MODELS:
            raise ValueError(f"unknown model '{spec.model}'")
        if spec.replicas < 1:
            raise ValueError("need at least one replica")
        if not 0 <= spec.master_seed < 1 << 64:
            raise ValueError("master_seed must fit in 64 bits")
        if spec.model in _CONTINUOUS:
            if float(spec.horizon) < 0:
                raise ValueError("the horizon must be nonnegative")
        else:
            if int(spec.horizon) != spec.horizon or spec.horizon < 0:
                raise ValueError("discrete models need a nonnegative integer horizon")
        self.spec = spec
        self.params = spec.param_map()
        self.state_kind = "config"
        model = spec.model
        if model == "Xcirc":
            self.mp = _model_params(self.params, model)
            self.v = _exact(self.params, "v", model)
            self.m0 = _integer(self.params, "m", model, least=0)
            self.cache = LRowCache(self.mp, self.v)
            _probe_rows(self.cache, 1)
            self.cache.travel_probability()
        elif model == "Xplus":
            self.mp = _model_params(self.params, model)
            self.u = _exact(self.params, "u", model)
            self.cache = LRowCache(self.mp, self.u)
            _probe_rows(self.cache, 1)
            self.cache.travel_probability()
        elif model in ("fused_Xcirc", "fused_Xplus"):
            self.mp = _model_params(self.params, model)
            self.u = _exact(self.params, "u" if model == "fused_Xplus" else "v", model)
            self.J = _integer(self.params, "J", model, least=1)
            self.route = self.params.get("route", "direct")
            if self.route not in ("direct", "substeps"):
                raise ValueError("route must be 'direct' or 'substeps'")
            self.m0 = _integer(self.params, "m", model) if model == "fused_Xcirc" else 0
            if self.route == "direct":
                self.cache = LRowCache(
                    self.mp, self.u, FusedSpin.from_J(self.mp.q, self.J)
                )
                _probe_rows(self.cache, self.J)
            else:
                self.cache = [
                    LRowCache(self.mp, self.u * self.mp.q**r) for r in range(self.J)
                ]
                for sub in self.cache:
                    _probe_rows(sub, 1)
                    sub.travel_probability()
        elif model in ("qHahn_circ", "qHahn_plus", "qHahn_inf"):
            self.q = _exact(self.params, "q", model)
            self.s_sq = _exact(self.params, "s_sq", model)
            self.qJ = _exact(self.params, "qJ", model)
            self.variant = model.split("_")[1]
            self.cache = PhiCache(self.q, self.qJ * self.s_sq, self.s_sq)
            for m in range(5):
                self.cache.table(m)
            if self.variant == "inf":
                self.cache.table("inf")
            self.m0 = (
                _integer(self.params, "m", model) if self.variant == "circ" else 0
            )
        elif model == "sixVertexQuadrant":
            self.sampler = QuadrantSampler(
                _exact(self.params, "b1", model), _exact(self.params, "b2", model)
            )
            self.width = _integer(self.params, "width", model, least=1)
            self.state_kind = "quadrant"
        elif model in ("qTASEP", "ASEP"):
            self.q = _exact(self.params, "q", model)
            if model == "qTASEP" and not 0 < self.q < 1:
                raise ValueError("the asymmetry parameter must satisfy 0 < q < 1")
            if model == "ASEP" and not 0 <= self.q <= 1:
                raise ValueError("the asymmetry parameter must satisfy 0 <= q <= 1")
            self.n = _integer(self.params, "n", model, least=1)
            self.state_kind = "positions"
        elif model == "qBoson":
            self.q = _exact(self.params, "q", model)
            if not 0 < self.q < 1:
                raise ValueError("the asymmetry parameter must satisfy 0 < q < 1")

        self.evaluators = [self._evaluator(name) for name in spec.observe]

    # -- initial states ----------------------------------------------------

    def _initial(self):
        model = self.spec.model
        if model in ("Xcirc", "fused_Xcirc", "qHahn_circ"):
            return ParticleConfig({0: self.m0} if self.m0 else {})
        if model in ("Xplus", "fused_Xplus", "qHahn_plus"):
            return ParticleConfig({})
        if model == "qHahn_inf":
            return ParticleConfig({}, reservoir_site=1)
        raise AssertionError

    # -- one replica --------------------------------------------------------

    def replica(self, stream):
        model = self.spec.model
        steps = int(self.spec.horizon) if model not in _CONTINUOUS else None
        if model == "Xcirc":
            config = self._initial()
            for _ in range(steps):
                config = step_x_circ(self.mp, self.v, config, stream, self.cache)
            return config
        if model == "Xplus":
            config = self._initial()
            for _ in range(steps):
                config = step_x_plus(self.mp, self.u, config, stream, self.cache)
            return config
        if model in ("fused_Xcirc", "fused_Xplus"):
            mode = "circ" if model == "fused_Xcirc" else "plus"
            config = self._initial()
            for _ in range(steps):
                config = step_fused(
                    self.mp, self.u, self.J, mode, config, stream,
                    route=self.route, cache=self.cache,
                )
            return config
        if model in ("qHahn_circ", "qHahn_plus", "qHahn_inf"):
            config = self._initial()
            for _ in range(steps):
                config = step_q_hahn(
                    self.q, self.s_sq, self.qJ, self.variant, config, stream,
                    cache=self.cache,
                )
            return config
        if model == "sixVertexQuadrant":
            row = bytes(self.width)
            exited = 0
            for _ in range(steps):
                row, out = self.sampler.step(row, stream)
                exited += out
            return row, exited
        if model == "qTASEP":
            return run_q_tasep(self.q, self.n, float(self.spec.horizon), stream)
        if model == "ASEP":
            return run_asep(self.q, self.n, float(self.spec.horizon), stream)
        if model == "qBoson":
            return run_q_boson(self.q, float(self.spec.horizon), stream)
        raise AssertionError

    # -- state encoding and observables --------------------------------------

    def encode(self, state):
        if self.state_kind == "config":
            return _encode_config(state)
        if self.state_kind == "positions":
            return _encode_positions(state)
        row, exited = state
        return f"exited={exited};row=" + "".join(str(b) for b in row)

    def _height_of(self, state, x):
        if self.state_kind == "quadrant":
            row, exited = state
            return sum(b for b in row[max(x - 1, 0):]) + exited
        return height(state, x)

    def _evaluator(self, name):
        kind, _, rest = name.partition(":")
        args = tuple(int(tok) for tok in rest.split(",") if tok.strip() != "")
        if kind == "height":
            if len(args) != 1:
                raise ValueError("height observable needs exactly one site")
            x = args[0]
            return lambda state: as_exact(self._height_of(state, x))
        if kind == "qmoment":
            if not args:
                raise ValueError("qmoment observable needs at least one site")
            q = getattr(self, "q", None) or getattr(self, "mp", None) and self.mp.q
            if q is None:
                raise ValueError(
                    f"model {self.spec.model} has no q parameter for qmoment"
                )

            def qmoment(state):
                out = as_exact(1)
                for x in args:
                    h = self._height_of(state, x)
                    if h == math.inf:
                        return ZERO
                    out *= q**h
                return out

            return qmoment
        if kind == "qcorr":
            q = getattr(self, "q", None) or getattr(self, "mp", None) and self.mp.q
            if q is None or self.state_kind != "config":
                raise ValueError(
                    "qcorr needs a lattice model with a q parameter"
                )
            theta = args
            return lambda state: q_correlation_observable(q, state.signature(), theta)
        raise ValueError(f"unknown observable '{name}'")


def validate_runspec(spec: RunSpec):
    """Raise early (bad model, missing parameters, regime violations)."""
    _Runner(spec)


def run(spec: RunSpec) -> TrajectoryRecord:
    runner = _Runner(spec)
    finals = []
    columns = [[] for _ in spec.observe]
    for r in range(spec.replicas):
        stream = PhiloxStream(spec.master_seed, r)
        state = runner.replica(stream)
        finals.append(runner.encode(state))
        for column, evaluator in zip(columns, runner.evaluators):
            column.append(evaluator(state))
    observations = tuple(
        (
            name,
            tuple(exact_str(v) for v in column),
            exact_str(sum(column, ZERO) / spec.replicas),
        )
        for name, column in zip(spec.observe, columns)
    )
    return TrajectoryRecord(
        spec_hash=spec.spec_hash(),
        backend=BACKEND_NAME,
        master_seed=spec.master_seed,
        replicas=spec.replicas,
        replica_seeds=tuple((spec.master_seed, r) for r in range(spec.replicas)),
        finals=tuple(finals),
        observations=observations,
    )
