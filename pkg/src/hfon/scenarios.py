"""Scenario descriptions: built-in experiments, JSON scenario files, seeded initials.

A scenario file is a JSON object with a schema_version field; unknown or
missing keys are configuration errors that name the offending key.  Built-in
scenarios cover the flat 156-follower group, its 3- and 4-level hierarchy
counterparts, and the 200-agent falling-threshold run.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ConfigurationError
from .engine import LeaderReference, LocalReference, TrajectoryRecord, run_bcfon
from .hierarchy import TdState, build_uniform_hierarchy, run_td
from .leader import BlfgConfig, run_blfg
from .opinions import NetworkState
from .phases import Phase, PhaseSchedule, run_bu

SCHEMA_VERSION = 1

_KINDS = ("blfg", "bcfon", "topdown", "bottomup")
_SCHEMES = {"local": LocalReference(), "leader": LeaderReference()}


def ramp_initials(n: int, low: float = 5.0, high: float = 25.0) -> np.ndarray:
    """Evenly spaced centers from low to high; a single agent sits at low."""
    if not (isinstance(n, int) and n >= 1):
        raise ConfigurationError("ramp needs an integer agent count >= 1")
    if n == 1:
        return np.array([float(low)])
    return low + (high - low) * np.arange(n, dtype=np.float64) / (n - 1)


def seeded_initials(n: int, seed: int, low: float = 5.0, high: float = 25.0):
    """Random initial (centers, sigmas): centers uniform on [low, high], sigmas on (0, 1).

    Fixed draw order (all centers, then all sigmas, ascending id) from a
    64-bit-seeded PCG64 generator; exact-zero sigma draws are rejected and
    redrawn so sigmas stay strictly positive.
    """
    if not (isinstance(n, int) and n >= 1):
        raise ConfigurationError("need an integer agent count >= 1")
    rng = np.random.default_rng(seed)
    centers = rng.uniform(low, high, n)
    return centers, _positive_uniform_sigmas(rng, n)


def _positive_uniform_sigmas(rng: np.random.Generator, n: int) -> np.ndarray:
    sigmas = rng.uniform(0.0, 1.0, n)
    while True:
        zero = np.nonzero(sigmas == 0.0)[0]
        if zero.size == 0:
            return sigmas
        sigmas[zero] = rng.uniform(0.0, 1.0, zero.size)


@dataclass(frozen=True)
class InitialSpec:
    """How to build initial opinions: ramp or seeded-uniform centers, fixed or seeded sigmas."""

    centers: str  # "ramp" | "uniform"
    low: float
    high: float
    sigma: float | str  # constant value, or "uniform" for draws on (0, 1)

    def __post_init__(self):
        if self.centers not in ("ramp", "uniform"):
            raise ConfigurationError("initial centers must be 'ramp' or 'uniform'")
        if not (np.isfinite(self.low) and np.isfinite(self.high) and self.low <= self.high):
            raise ConfigurationError("initial range must satisfy low <= high")
        if isinstance(self.sigma, str):
            if self.sigma != "uniform":
                raise ConfigurationError("initial sigma must be a number or 'uniform'")
        elif not (np.isfinite(self.sigma) and self.sigma >= 0.0):
            raise ConfigurationError("initial sigma must be non-negative")

    @property
    def needs_seed(self) -> bool:
        return self.centers == "uniform" or self.sigma == "uniform"

    def build(self, n: int, seed: int | None):
        if not self.needs_seed:
            return ramp_initials(n, self.low, self.high), np.full(n, float(self.sigma))
        if seed is None:
            raise ConfigurationError("this scenario draws random initials and needs a seed")
        rng = np.random.default_rng(seed)
        if self.centers == "uniform":
            centers = rng.uniform(self.low, self.high, n)
        else:
            centers = ramp_initials(n, self.low, self.high)
        if self.sigma == "uniform":
            sigmas = _positive_uniform_sigmas(rng, n)
        else:
            sigmas = np.full(n, float(self.sigma))
        return centers, sigmas


@dataclass(frozen=True)
class ScenarioConfig:
    """A fully validated scenario, ready to execute."""

    name: str
    kind: str
    initial: InitialSpec
    b: float
    steps: int | None = None
    n: int | None = None
    d: float | None = None
    scheme: str | None = None
    leader: float | None = None
    group_sizes: tuple[int, ...] | None = None
    phases: tuple[Phase, ...] | None = None
    seed: int | None = None

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ConfigurationError(f"unknown scenario kind {self.kind!r}")
        if self.b is None:
            raise ConfigurationError("scenario requires key 'b'")
        need = {
            "blfg": ("n", "d", "scheme", "leader", "steps"),
            "bcfon": ("n", "d", "steps"),
            "topdown": ("group_sizes", "d", "scheme", "leader", "steps"),
            "bottomup": ("n", "phases"),
        }[self.kind]
        for key in need:
            if getattr(self, key) is None:
                raise ConfigurationError(f"scenario kind {self.kind!r} requires key {key!r}")
        if self.scheme is not None and self.scheme not in _SCHEMES:
            raise ConfigurationError("scheme must be 'local' or 'leader'")
        if self.kind == "bcfon" and self.scheme not in (None, "local"):
            raise ConfigurationError("flat runs support only the local scheme")
        if self.steps is not None and not (isinstance(self.steps, int) and self.steps >= 0):
            raise ConfigurationError("steps must be an integer >= 0")
        if self.d is not None and not (0.0 <= self.d <= 1.0):
            raise ConfigurationError("threshold d must lie in [0, 1]")
        if not (np.isfinite(self.b) and self.b > 0.0):
            raise ConfigurationError("uncertainty gain b must be positive")

    def echo(self) -> dict:
        """Scenario as a JSON-ready dict with a fixed key order."""
        out: dict = {"schema_version": SCHEMA_VERSION, "name": self.name, "kind": self.kind}
        for key in ("n", "group_sizes", "steps", "d", "b", "scheme", "leader"):
            value = getattr(self, key)
            if value is not None:
                out[key] = list(value) if isinstance(value, tuple) else value
        if self.phases is not None:
            out["phases"] = [{"d": p.d, "steps": p.steps} for p in self.phases]
        out["initial"] = {
            "centers": self.initial.centers,
            "low": self.initial.low,
            "high": self.initial.high,
            "sigma": self.initial.sigma,
        }
        if self.seed is not None:
            out["seed"] = self.seed
        return out


@dataclass
class ScenarioRun:
    """A finished run: the scenario, the seed actually used, and the trajectory."""

    config: ScenarioConfig
    seed: int | None
    record: TrajectoryRecord
    initial: NetworkState
    td_state: TdState | None = None  # hierarchical runs keep their tree layout


def execute_scenario(config: ScenarioConfig, seed: int | None = None) -> ScenarioRun:
    """Build the initial population and run the scenario to completion."""
    seed = config.seed if seed is None else seed
    if config.kind == "topdown":
        spec = build_uniform_hierarchy(config.group_sizes, config.leader)
        centers = np.empty(spec.n_agents)
        sigmas = np.empty(spec.n_agents)
        # every group starts from its own copy of the initial profile
        for level, group in spec.groups():
            sl = spec.group_slice(level, group)
            c, s = config.initial.build(spec.group_sizes[level - 1], seed)
            centers[sl] = c
            sigmas[sl] = s
        td = TdState(spec, NetworkState(centers, sigmas, config.d, config.b))
        record = run_td(td, config.steps, _SCHEMES[config.scheme])
        return ScenarioRun(config, seed, record, td.state, td_state=td)

    n = config.n
    centers, sigmas = config.initial.build(n, seed)
    if config.kind == "blfg":
        state = NetworkState(centers, sigmas, config.d, config.b)
        group = BlfgConfig(n=n, d=config.d, b=config.b, scheme=_SCHEMES[config.scheme], leader=config.leader)
        record = run_blfg(state, group, config.steps)
        return ScenarioRun(config, seed, record, state)
    if config.kind == "bcfon":
        state = NetworkState(centers, sigmas, config.d, config.b)
        record = run_bcfon(state, config.steps, LocalReference())
        return ScenarioRun(config, seed, record, state)
    # bottomup
    schedule = PhaseSchedule(phases=config.phases, b=config.b)
    state = NetworkState(centers, sigmas, config.phases[0].d, config.b)
    record = run_bu(state, schedule)
    return ScenarioRun(config, seed, record, state)


def _example1(scheme: str) -> ScenarioConfig:
    return ScenarioConfig(
        name=f"example1-{scheme}",
        kind="blfg",
        n=156,
        steps=1500,
        d=0.6,
        b=0.01,
        scheme=scheme,
        leader=10.0,
        initial=InitialSpec(centers="ramp", low=5.0, high=25.0, sigma=1.0),
    )


def _example2(sizes: tuple[int, ...], tag: str, scheme: str) -> ScenarioConfig:
    return ScenarioConfig(
        name=f"example2-{tag}-{scheme}",
        kind="topdown",
        group_sizes=sizes,
        steps=800,
        d=0.6,
        b=0.01,
        scheme=scheme,
        leader=10.0,
        initial=InitialSpec(centers="ramp", low=5.0, high=25.0, sigma=1.0),
    )


def _example3() -> ScenarioConfig:
    return ScenarioConfig(
        name="example3",
        kind="bottomup",
        n=200,
        b=0.5,
        phases=tuple(Phase(d=d, steps=40) for d in (0.95, 0.7, 0.45, 0.2, 0.05)),
        initial=InitialSpec(centers="uniform", low=5.0, high=25.0, sigma="uniform"),
        seed=42,
    )


def builtin_scenarios() -> dict[str, ScenarioConfig]:
    return {
        "example1-local": _example1("local"),
        "example1-leader": _example1("leader"),
        "example2-3level-local": _example2((12, 12), "3level", "local"),
        "example2-3level-leader": _example2((12, 12), "3level", "leader"),
        "example2-4level-local": _example2((5, 5, 5), "4level", "local"),
        "example2-4level-leader": _example2((5, 5, 5), "4level", "leader"),
        "example3": _example3(),
    }


_TOP_KEYS = {
    "schema_version",
    "name",
    "kind",
    "n",
    "steps",
    "d",
    "b",
    "scheme",
    "leader",
    "group_sizes",
    "phases",
    "initial",
    "seed",
}
_INITIAL_KEYS = {"centers", "low", "high", "sigma"}


def _scenario_from_dict(doc: dict, fallback_name: str) -> ScenarioConfig:
    if not isinstance(doc, dict):
        raise ConfigurationError("scenario document must be a JSON object")
    unknown = set(doc) - _TOP_KEYS
    if unknown:
        raise ConfigurationError(f"unknown scenario key {sorted(unknown)[0]!r}")
    version = doc.get("schema_version")
    if version != SCHEMA_VERSION:
        raise ConfigurationError(
            f"key 'schema_version' must be {SCHEMA_VERSION}, got {version!r}"
        )
    if "kind" not in doc:
        raise ConfigurationError("scenario is missing key 'kind'")
    if "initial" not in doc:
        raise ConfigurationError("scenario is missing key 'initial'")
    init_doc = doc["initial"]
    if not isinstance(init_doc, dict):
        raise ConfigurationError("key 'initial' must be an object")
    unknown = set(init_doc) - _INITIAL_KEYS
    if unknown:
        raise ConfigurationError(f"unknown initial key {sorted(unknown)[0]!r}")
    for key in _INITIAL_KEYS:
        if key not in init_doc:
            raise ConfigurationError(f"initial is missing key {key!r}")
    phases = None
    if doc.get("phases") is not None:
        if not isinstance(doc["phases"], list) or not doc["phases"]:
            raise ConfigurationError("key 'phases' must be a non-empty list")
        rows = []
        for row in doc["phases"]:
            if not isinstance(row, dict) or set(row) != {"d", "steps"}:
                raise ConfigurationError("each phase needs exactly the keys 'd' and 'steps'")
            rows.append(Phase(d=float(row["d"]), steps=int(row["steps"])))
        phases = tuple(rows)
    group_sizes = None
    if doc.get("group_sizes") is not None:
        if not isinstance(doc["group_sizes"], list):
            raise ConfigurationError("key 'group_sizes' must be a list of integers")
        group_sizes = tuple(int(s) for s in doc["group_sizes"])
    try:
        return ScenarioConfig(
            name=str(doc.get("name", fallback_name)),
            kind=doc["kind"],
            initial=InitialSpec(
                centers=init_doc["centers"],
                low=float(init_doc["low"]),
                high=float(init_doc["high"]),
                sigma=init_doc["sigma"] if isinstance(init_doc["sigma"], str) else float(init_doc["sigma"]),
            ),
            b=float(doc["b"]) if "b" in doc else None,
            steps=int(doc["steps"]) if doc.get("steps") is not None else None,
            n=int(doc["n"]) if doc.get("n") is not None else None,
            d=float(doc["d"]) if doc.get("d") is not None else None,
            scheme=doc.get("scheme"),
            leader=float(doc["leader"]) if doc.get("leader") is not None else None,
            group_sizes=group_sizes,
            phases=phases,
            seed=int(doc["seed"]) if doc.get("seed") is not None else None,
        )
    except TypeError as exc:
        raise ConfigurationError(f"malformed scenario: {exc}") from exc


def parse_scenario(source: str | Path) -> ScenarioConfig:
    """Resolve a built-in scenario name or load and validate a JSON scenario file."""
    builtins = builtin_scenarios()
    if isinstance(source, str) and source in builtins:
        return builtins[source]
    path = Path(source)
    if not path.is_file():
        raise ConfigurationError(
            f"{source!r} is neither a built-in scenario ({', '.join(sorted(builtins))}) "
            "nor an existing scenario file"
        )
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"scenario file {path} is not valid JSON: {exc}") from exc
    return _scenario_from_dict(doc, fallback_name=path.stem)
