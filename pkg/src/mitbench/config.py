"""Benchmark configuration files (YAML).

A minimal file needs ``grid``, ``class`` and ``noise``; everything else has a
default. Unknown keys are rejected, and every error names the offending key
(or the line and column for syntax errors).

Example::

    grid: {widths: [2, 3, 4], depths: [2, 3, 4]}
    class: {kind: random_su4, mirrored: false}
    noise: {mode: local, p1: 0.001, p2: 0.01}
    methods: [none, zne, cdr]
    budgets: {mitigated: 500000, unmitigated: 100000, scale: 1.0}
    seed: 7
"""

from dataclasses import dataclass, field

import yaml

from .benchmark import CIRCUIT_KINDS, METHODS, CircuitClass
from .circuit import IBM_7Q_COUPLING, KINDS, NATIVE_IBM, PauliString, Target
from .errors import ConfigError, MitbenchError
from .mitigation import CdrConfig, FitSpec
from .mitigation.folding import FOLDING_MODES
from .simulator import DEVICES, MAX_DM_QUBITS, NoiseModel, ThermalRelaxation, device_noise_model

EVALUATIONS = ("sampled", "infinite_shot")
TOP_KEYS = (
    "grid", "class", "circuits_per_cell", "observable", "noise", "target", "methods", "zne",
    "cdr", "budgets", "filter_range", "seed", "evaluation", "max_attempts",
)
MAX_SEED = (1 << 64) - 1


@dataclass(frozen=True)
class ZneSettings:
    lambdas: tuple = (1, 3, 5, 7, 9)
    folding: str = "circuit"
    fit: FitSpec = FitSpec("exponential")


@dataclass(frozen=True)
class BenchmarkConfig:
    """Fully resolved benchmark configuration."""

    grid: tuple
    circuit_class: CircuitClass
    noise: NoiseModel
    circuits_per_cell: int = 10
    observable: str = "global_z"
    target: Target = field(default_factory=lambda: Target(IBM_7Q_COUPLING, NATIVE_IBM))
    target_name: str = "ibm_7q"
    methods: tuple = METHODS
    zne: ZneSettings = ZneSettings()
    cdr: CdrConfig = CdrConfig()
    mitigated: int = 500_000
    unmitigated: int = 100_000
    budget_scale: float = 1.0
    filter_range: tuple = (0.4, 0.6)
    seed: int = 0
    evaluation: str = "sampled"
    max_attempts: int = None
    noise_spec: dict = field(default=None, compare=False)

    @property
    def budget_mitigated(self):
        return max(1, int(round(self.mitigated * self.budget_scale)))

    @property
    def budget_unmitigated(self):
        return max(1, int(round(self.unmitigated * self.budget_scale)))

    def with_seed(self, seed):
        return _replace(self, seed=_seed(seed, "seed"))

    def to_dict(self):
        """Resolved configuration as plain data; ``from_dict`` of this gives an equal config."""
        widths = list(dict.fromkeys(n for n, _ in self.grid))
        depths = list(dict.fromkeys(d for _, d in self.grid))
        if list(self.grid) == [(n, d) for n in widths for d in depths]:
            grid = {"widths": widths, "depths": depths}
        else:
            grid = [[n, d] for n, d in self.grid]
        if self.target_name in ("ibm_7q", "all_to_all"):
            coupling = self.target_name
        else:
            coupling = [list(e) for e in sorted(self.target.coupling)]
        fit = self.zne.fit
        return {
            "grid": grid,
            "class": {"kind": self.circuit_class.kind, "mirrored": self.circuit_class.mirrored},
            "circuits_per_cell": self.circuits_per_cell,
            "observable": self.observable,
            "noise": self.noise_spec if self.noise_spec is not None else _noise_to_dict(self.noise),
            "target": {"coupling": coupling, "native_gates": sorted(self.target.native_gates)},
            "methods": list(self.methods),
            "zne": {
                "lambdas": list(self.zne.lambdas),
                "folding": self.zne.folding,
                "fit": fit.model if fit.order is None else f"{fit.model}({fit.order})",
                "offset": fit.offset,
            },
            "cdr": {
                "n_non_clifford": self.cdr.n_non_clifford,
                "n_pairs": self.cdr.n_pairs,
                "n_training": self.cdr.n_training,
                "fit_direction": self.cdr.fit_direction,
                "conditioning_tol": self.cdr.conditioning_tol,
                "max_attempts": self.cdr.max_attempts,
            },
            "budgets": {"mitigated": self.mitigated, "unmitigated": self.unmitigated,
                        "scale": self.budget_scale},
            "filter_range": list(self.filter_range),
            "seed": self.seed,
            "evaluation": self.evaluation,
            "max_attempts": self.max_attempts,
        }


def _replace(cfg, **kw):
    from dataclasses import replace

    return replace(cfg, **kw)


def _noise_to_dict(nm):
    d = {"mode": nm.mode, "p1": nm.p1, "p2": nm.p2}
    if nm.thermal is not None:
        th = nm.thermal
        d["thermal"] = {"t1": _plain(th.t1), "t2": _plain(th.t2), "dur1": th.dur1, "dur2": th.dur2}
    if nm.readout is not None:
        d["readout"] = [[[m[0], m[1]], [m[2], m[3]]] for m in nm.readout]
    return d


def _plain(v):
    return list(v) if isinstance(v, tuple) else v


def _fail(msg, key):
    raise ConfigError(f"{key}: {msg}", key=key)


def _check_keys(d, allowed, where):
    if not isinstance(d, dict):
        _fail("expected a mapping", where)
    for k in d:
        if k not in allowed:
            path = f"{where}.{k}" if where else str(k)
            raise ConfigError(f"unknown key {k!r} in {where or 'config'}; allowed: {', '.join(allowed)}",
                              key=path)


def _int(v, key, lo=None):
    if isinstance(v, bool) or not isinstance(v, int):
        _fail(f"expected an integer, got {v!r}", key)
    if lo is not None and v < lo:
        _fail(f"must be >= {lo}", key)
    return v


def _num(v, key):
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        _fail(f"expected a number, got {v!r}", key)
    return float(v)


def _seed(v, key):
    v = _int(v, key, 0)
    if v > MAX_SEED:
        _fail("seed must fit in 64 bits", key)
    return v


def _parse_grid(g):
    if isinstance(g, dict):
        _check_keys(g, ("widths", "depths"), "grid")
        if "widths" not in g or "depths" not in g:
            _fail("needs both widths and depths", "grid")
        ws = [_int(w, "grid.widths", 2) for w in g["widths"]]
        ds = [_int(d, "grid.depths", 1) for d in g["depths"]]
        pairs = [(w, d) for w in ws for d in ds]
    elif isinstance(g, list):
        pairs = []
        for item in g:
            if not isinstance(item, (list, tuple)) or len(item) != 2:
                _fail(f"entries must be [n, d] pairs, got {item!r}", "grid")
            pairs.append((_int(item[0], "grid", 2), _int(item[1], "grid", 1)))
    else:
        _fail("expected {widths, depths} or a list of [n, d] pairs", "grid")
    if not pairs:
        _fail("grid is empty", "grid")
    if len(set(pairs)) != len(pairs):
        _fail("duplicate cells", "grid")
    return tuple(pairs)


def _parse_class(c):
    if isinstance(c, str):
        c = {"kind": c}
    _check_keys(c, ("kind", "mirrored"), "class")
    kind = c.get("kind")
    if kind not in CIRCUIT_KINDS:
        _fail(f"kind must be one of {CIRCUIT_KINDS}, got {kind!r}", "class.kind")
    mirrored = c.get("mirrored", False)
    if not isinstance(mirrored, bool):
        _fail("expected true or false", "class.mirrored")
    return CircuitClass(kind, mirrored)


def _parse_noise(n):
    if isinstance(n, str):
        n = {"device": n} if n in DEVICES else {"mode": n}
    _check_keys(n, ("mode", "p1", "p2", "thermal", "readout", "device"), "noise")
    if "device" in n:
        if set(n) != {"device"}:
            _fail("device cannot be combined with other noise keys", "noise.device")
        if n["device"] not in DEVICES:
            _fail(f"unknown device {n['device']!r}; choose from {sorted(DEVICES)}", "noise.device")
        return device_noise_model(n["device"])
    mode = n.get("mode", "local")
    p1 = _num(n.get("p1", 0.0), "noise.p1")
    p2 = _num(n.get("p2", 0.0), "noise.p2")
    thermal = None
    if n.get("thermal") is not None:
        th = n["thermal"]
        _check_keys(th, ("t1", "t2", "dur1", "dur2"), "noise.thermal")
        if "t1" not in th or "t2" not in th:
            _fail("needs t1 and t2", "noise.thermal")
        try:
            thermal = ThermalRelaxation(th["t1"], th["t2"], _num(th.get("dur1", 0.035), "noise.thermal.dur1"),
                                        _num(th.get("dur2", 0.3), "noise.thermal.dur2"))
        except (MitbenchError, TypeError, ValueError) as exc:
            _fail(str(exc), "noise.thermal")
    readout = n.get("readout")
    if isinstance(readout, (int, float)) and not isinstance(readout, bool):
        f = float(readout)
        readout = [[1 - f, f], [f, 1 - f]]
    try:
        return NoiseModel(mode, p1, p2, thermal, readout)
    except (MitbenchError, TypeError, ValueError) as exc:
        _fail(str(exc), "noise")


def _parse_target(t):
    if t is None:
        return Target(IBM_7Q_COUPLING, NATIVE_IBM), "ibm_7q"
    if isinstance(t, str):
        t = {"coupling": t}
    _check_keys(t, ("coupling", "native_gates"), "target")
    coupling = t.get("coupling", "ibm_7q")
    natives = t.get("native_gates", sorted(NATIVE_IBM))
    if not isinstance(natives, list) or any(g not in KINDS for g in natives):
        _fail(f"native_gates must be a list drawn from {KINDS}", "target.native_gates")
    if coupling == "ibm_7q":
        edges, name = IBM_7Q_COUPLING, "ibm_7q"
    elif coupling in ("all_to_all", None, []):
        edges, name = frozenset(), "all_to_all"
    elif isinstance(coupling, list):
        try:
            edges = frozenset((int(a), int(b)) for a, b in coupling)
        except (TypeError, ValueError):
            _fail("coupling must be a list of [a, b] pairs", "target.coupling")
        name = "custom"
    else:
        _fail("coupling must be ibm_7q, all_to_all or a list of pairs", "target.coupling")
    try:
        target = Target(edges, frozenset(natives))
    except MitbenchError as exc:
        _fail(str(exc), "target")
    if not target.is_universal:
        _fail("native gates must include CX, Rz and SX or H", "target.native_gates")
    return target, name


def _parse_zne(z):
    z = z or {}
    _check_keys(z, ("lambdas", "folding", "fit", "offset"), "zne")
    lambdas = tuple(_int(x, "zne.lambdas", 1) for x in z.get("lambdas", [1, 3, 5, 7, 9]))
    if not lambdas or lambdas[0] != 1 or any(x % 2 == 0 for x in lambdas) or list(lambdas) != sorted(set(lambdas)):
        _fail("must be strictly increasing odd integers starting at 1", "zne.lambdas")
    folding = z.get("folding", "circuit")
    if folding not in FOLDING_MODES:
        _fail(f"must be one of {FOLDING_MODES}", "zne.folding")
    offset = z.get("offset", False)
    if not isinstance(offset, bool):
        _fail("expected true or false", "zne.offset")
    try:
        fit = FitSpec.parse(z.get("fit", "exponential"), offset)
    except MitbenchError as exc:
        _fail(str(exc), "zne.fit")
    if len(lambdas) < fit.n_params(len(lambdas)):
        _fail(f"{fit} needs at least {fit.n_params(len(lambdas))} noise scales", "zne.lambdas")
    return ZneSettings(lambdas, folding, fit)


def _parse_cdr(c):
    c = c or {}
    _check_keys(c, ("n_non_clifford", "n_pairs", "n_training", "fit_direction", "conditioning_tol",
                    "max_attempts"), "cdr")
    try:
        return CdrConfig(
            _int(c.get("n_non_clifford", 10), "cdr.n_non_clifford", 0),
            _int(c.get("n_pairs", 1), "cdr.n_pairs", 1),
            _int(c.get("n_training", 20), "cdr.n_training", 2),
            c.get("fit_direction", "ideal_from_noisy"),
            _num(c.get("conditioning_tol", 1e-6), "cdr.conditioning_tol"),
            0,
            _int(c.get("max_attempts", 5), "cdr.max_attempts", 1),
        )
    except MitbenchError as exc:
        if isinstance(exc, ConfigError):
            raise
        _fail(str(exc), "cdr")


def from_dict(raw):
    """Validate a parsed configuration tree and resolve defaults."""
    if raw is None:
        raw = {}
    _check_keys(raw, TOP_KEYS, "")
    for req in ("grid", "class", "noise"):
        if req not in raw:
            _fail("required key is missing", req)
    grid = _parse_grid(raw["grid"])
    cls = _parse_class(raw["class"])
    noise = _parse_noise(raw["noise"])
    target, target_name = _parse_target(raw.get("target"))
    cpc = _int(raw.get("circuits_per_cell", 10), "circuits_per_cell", 1)
    observable = raw.get("observable", "global_z")
    if observable != "global_z":
        try:
            p = PauliString(str(observable))
        except MitbenchError as exc:
            _fail(str(exc), "observable")
        if p.is_identity:
            _fail("observable must not be the identity", "observable")
        if any(n != len(p) for n, _ in grid):
            _fail("a Pauli-string observable must match every grid width", "observable")
        observable = p.letters
    methods = raw.get("methods", list(METHODS))
    if not isinstance(methods, list) or not methods or any(m not in METHODS for m in methods):
        _fail(f"must be a non-empty list drawn from {METHODS}", "methods")
    if len(set(methods)) != len(methods):
        _fail("duplicate methods", "methods")
    methods = tuple(m for m in METHODS if m in methods)
    b = raw.get("budgets") or {}
    _check_keys(b, ("mitigated", "unmitigated", "scale"), "budgets")
    mitigated = _int(b.get("mitigated", 500_000), "budgets.mitigated", 1)
    unmitigated = _int(b.get("unmitigated", 100_000), "budgets.unmitigated", 1)
    scale = _num(b.get("scale", 1.0), "budgets.scale")
    if scale <= 0:
        _fail("must be positive", "budgets.scale")
    fr = raw.get("filter_range", [0.4, 0.6])
    if not isinstance(fr, list) or len(fr) != 2:
        _fail("expected [lo, hi]", "filter_range")
    lo, hi = _num(fr[0], "filter_range"), _num(fr[1], "filter_range")
    if not 0 <= lo <= hi <= 1:
        _fail("need 0 <= lo <= hi <= 1", "filter_range")
    seed = _seed(raw.get("seed", 0), "seed")
    evaluation = raw.get("evaluation", "sampled")
    if evaluation not in EVALUATIONS:
        _fail(f"must be one of {EVALUATIONS}", "evaluation")
    max_attempts = raw.get("max_attempts")
    if max_attempts is not None:
        max_attempts = _int(max_attempts, "max_attempts", 1)
    zne_s = _parse_zne(raw.get("zne"))
    cdr_s = _parse_cdr(raw.get("cdr"))
    max_n = max(n for n, _ in grid)
    if noise.mode != "ideal" and max_n > MAX_DM_QUBITS:
        _fail(f"width {max_n} exceeds the noisy-simulation limit of {MAX_DM_QUBITS} qubits", "grid")
    if max_n > 10:
        _fail(f"width {max_n} exceeds the simulation limit of 10 qubits", "grid")
    if not target.all_to_all and max_n > len(target.physical_qubits):
        _fail(f"width {max_n} exceeds the {len(target.physical_qubits)} qubits of the target", "grid")
    if cls.mirrored and any(d % 2 for _, d in grid):
        _fail("mirrored circuits need even depths", "grid")
    noise_spec = raw["noise"] if isinstance(raw["noise"], dict) and "device" in raw["noise"] else None
    if isinstance(raw["noise"], str) and raw["noise"] in DEVICES:
        noise_spec = {"device": raw["noise"]}
    return BenchmarkConfig(
        grid=grid, circuit_class=cls, noise=noise, circuits_per_cell=cpc, observable=observable,
        target=target, target_name=target_name, methods=methods, zne=zne_s, cdr=cdr_s,
        mitigated=mitigated, unmitigated=unmitigated, budget_scale=scale, filter_range=(lo, hi),
        seed=seed, evaluation=evaluation, max_attempts=max_attempts, noise_spec=noise_spec,
    )


def loads(text):
    """Parse YAML text into a :class:`BenchmarkConfig`."""
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        line = mark.line + 1 if mark is not None else None
        col = mark.column + 1 if mark is not None else None
        where = f" at line {line}, column {col}" if mark is not None else ""
        raise ConfigError(f"YAML parse error{where}: {getattr(exc, 'problem', exc)}", line=line,
                          column=col) from exc
    try:
        return from_dict(raw)
    except ConfigError as exc:
        mark = _locate(text, exc.key)
        if mark is None or exc.line is not None:
            raise
        raise ConfigError(f"line {mark.line + 1}: {exc}", key=exc.key, line=mark.line + 1,
                          column=mark.column + 1) from None


def _locate(text, key):
    """Source mark of the (possibly dotted) ``key``, or None."""
    if not key:
        return None
    try:
        node = yaml.compose(text)
    except yaml.YAMLError:
        return None
    mark = None
    for part in key.split("."):
        if not isinstance(node, yaml.MappingNode):
            break
        for k, v in node.value:
            if k.value == part:
                mark, node = k.start_mark, v
                break
        else:
            break
    return mark


def load_config(path):
    with open(path, encoding="utf-8") as fh:
        return loads(fh.read())


def dumps(cfg):
    return yaml.safe_dump(cfg.to_dict(), sort_keys=False, default_flow_style=None)


def save_config(cfg, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(cfg))
