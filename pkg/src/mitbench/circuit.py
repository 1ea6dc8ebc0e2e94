"""Gate-level circuits, Pauli observables and device targets.

Qubit ordering is big-endian throughout: qubit 0 is the most significant bit
of a computational-basis index and the leftmost character of a bitstring or
Pauli string. Global phase is never tracked.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInputError, ResourceError

TWO_PI = 2.0 * math.pi
UNITARY_TOL = 1e-10
MAX_UNITARY_QUBITS = 10

ONE_QUBIT_KINDS = ("X", "SX", "SXdg", "H", "S", "Sdg", "Z", "T", "Tdg", "Rz")
TWO_QUBIT_KINDS = ("CX", "SWAP", "U2q")
KINDS = ONE_QUBIT_KINDS + TWO_QUBIT_KINDS

_S2 = 1.0 / math.sqrt(2.0)
_FIXED = {
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "SX": 0.5 * np.array([[1 + 1j, 1 - 1j], [1 - 1j, 1 + 1j]]),
    "SXdg": 0.5 * np.array([[1 - 1j, 1 + 1j], [1 + 1j, 1 - 1j]]),
    "H": np.array([[_S2, _S2], [_S2, -_S2]], dtype=complex),
    "S": np.diag([1, 1j]),
    "Sdg": np.diag([1, -1j]),
    "Z": np.diag([1.0 + 0j, -1.0]),
    "T": np.diag([1, np.exp(0.25j * math.pi)]),
    "Tdg": np.diag([1, np.exp(-0.25j * math.pi)]),
    "CX": np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex),
    "SWAP": np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex),
}
for _m in _FIXED.values():
    _m.setflags(write=False)

_INVERSE_KIND = {
    "X": "X", "Z": "Z", "H": "H", "CX": "CX", "SWAP": "SWAP",
    "S": "Sdg", "Sdg": "S", "T": "Tdg", "Tdg": "T", "SX": "SXdg", "SXdg": "SX",
}

PAULI_MATRICES = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.diag([1.0 + 0j, -1.0]),
}


def canonical_angle(theta):
    """Map ``theta`` into [0, 2π)."""
    a = math.fmod(float(theta), TWO_PI)
    if a < 0.0:
        a += TWO_PI
    if a >= TWO_PI or a == 0.0:
        a = 0.0
    return a


def rz_matrix(theta):
    return np.diag([np.exp(-0.5j * theta), np.exp(0.5j * theta)])


def is_unitary(u, tol=UNITARY_TOL):
    u = np.asarray(u)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        return False
    return float(np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0])))) <= tol


def equal_up_to_phase(a, b, tol=1e-10):
    """True when ``|tr(A†B)|/dim`` is within ``tol`` of 1."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        return False
    overlap = abs(np.trace(a.conj().T @ b)) / a.shape[0]
    return abs(1.0 - overlap) <= tol


@dataclass(frozen=True)
class Gate:
    """A primitive gate.

    Attributes:
        kind: gate name from :data:`KINDS`.
        qubits: target qubits; for CX the first entry is the control.
        angle: rotation angle for ``Rz``, canonicalized to [0, 2π).
        matrix: row-major tuple of 16 complex entries for ``U2q``.
    """

    kind: str
    qubits: tuple
    angle: float = None
    matrix: tuple = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidInputError(f"unknown gate kind {self.kind!r}")
        qubits = tuple(int(q) for q in self.qubits)
        arity = 1 if self.kind in ONE_QUBIT_KINDS else 2
        if len(qubits) != arity:
            raise InvalidInputError(f"{self.kind} acts on {arity} qubit(s), got {qubits}")
        if len(set(qubits)) != len(qubits) or min(qubits) < 0:
            raise InvalidInputError(f"invalid qubit indices {qubits}")
        object.__setattr__(self, "qubits", qubits)
        if self.kind == "Rz":
            if self.angle is None:
                raise InvalidInputError("Rz requires an angle")
            object.__setattr__(self, "angle", canonical_angle(self.angle))
        elif self.angle is not None:
            raise InvalidInputError(f"{self.kind} takes no angle")
        if self.kind == "U2q":
            if self.matrix is None:
                raise InvalidInputError("U2q requires a matrix")
            m = np.asarray(self.matrix, dtype=complex).reshape(-1)
            if m.size != 16 or not is_unitary(m.reshape(4, 4)):
                raise InvalidInputError("U2q matrix must be a 4x4 unitary")
            object.__setattr__(self, "matrix", tuple(complex(x) for x in m))
        elif self.matrix is not None:
            raise InvalidInputError(f"{self.kind} takes no matrix")

    @classmethod
    def rz(cls, q, theta):
        return cls("Rz", (q,), angle=theta)

    @classmethod
    def u2q(cls, q0, q1, u):
        return cls("U2q", (q0, q1), matrix=tuple(np.asarray(u, dtype=complex).reshape(-1)))

    @property
    def n_qubits(self):
        return len(self.qubits)

    def to_matrix(self):
        """Dense matrix on the gate's own qubits, in the order given by ``qubits``."""
        if self.kind == "Rz":
            return rz_matrix(self.angle)
        if self.kind == "U2q":
            return np.array(self.matrix, dtype=complex).reshape(4, 4)
        return _FIXED[self.kind]

    def inverse(self):
        if self.kind == "Rz":
            return Gate("Rz", self.qubits, angle=-self.angle)
        if self.kind == "U2q":
            u = np.array(self.matrix, dtype=complex).reshape(4, 4)
            return Gate.u2q(*self.qubits, u.conj().T)
        return Gate(_INVERSE_KIND[self.kind], self.qubits)

    def is_clifford(self, tol=1e-9):
        """Clifford test used by CDR; ``U2q`` is always treated as non-Clifford."""
        if self.kind in ("T", "Tdg", "U2q"):
            return False
        if self.kind == "Rz":
            k = self.angle / (0.5 * math.pi)
            return abs(k - round(k)) <= tol
        return True

    def relabel(self, mapping):
        return Gate(self.kind, tuple(mapping[q] for q in self.qubits), self.angle, self.matrix)


@dataclass(frozen=True)
class Circuit:
    """An ordered gate list on ``n_qubits`` qubits.

    ``meta`` holds bookkeeping such as compiled layouts; it takes no part in
    equality.
    """

    n_qubits: int
    gates: tuple = ()
    measured: bool = False
    meta: dict = field(default_factory=dict, compare=False, hash=False)

    def __post_init__(self):
        if int(self.n_qubits) < 1:
            raise InvalidInputError("a circuit needs at least one qubit")
        object.__setattr__(self, "n_qubits", int(self.n_qubits))
        gates = tuple(self.gates)
        for g in gates:
            if not isinstance(g, Gate):
                raise InvalidInputError(f"not a Gate: {g!r}")
            if max(g.qubits) >= self.n_qubits:
                raise InvalidInputError(f"gate {g.kind}{g.qubits} outside {self.n_qubits}-qubit circuit")
        object.__setattr__(self, "gates", gates)
        object.__setattr__(self, "measured", bool(self.measured))

    def __len__(self):
        return len(self.gates)

    def __iter__(self):
        return iter(self.gates)

    def __add__(self, other):
        return self.compose(other)

    def compose(self, other):
        """Append ``other``'s gates; the result is measured if ``other`` is."""
        if self.measured:
            raise InvalidInputError("cannot append gates after measurement")
        if other.n_qubits != self.n_qubits:
            raise InvalidInputError("circuit widths differ")
        return Circuit(self.n_qubits, self.gates + other.gates, other.measured)

    def with_gates(self, gates):
        return Circuit(self.n_qubits, tuple(gates), self.measured, dict(self.meta))

    def with_measurement(self, measured=True):
        return Circuit(self.n_qubits, self.gates, measured, dict(self.meta))

    def count(self, kind=None):
        if kind is None:
            return len(self.gates)
        return sum(1 for g in self.gates if g.kind == kind)

    @property
    def n_two_qubit(self):
        return sum(1 for g in self.gates if g.n_qubits == 2)

    @property
    def n_one_qubit(self):
        return sum(1 for g in self.gates if g.n_qubits == 1)


@dataclass(frozen=True)
class PauliString:
    """Tensor product of single-qubit Paulis, qubit 0 first."""

    letters: str

    def __post_init__(self):
        letters = "".join(self.letters) if not isinstance(self.letters, str) else self.letters
        letters = letters.upper()
        if not letters:
            raise InvalidInputError("Pauli string must be non-empty")
        bad = set(letters) - set("IXYZ")
        if bad:
            raise InvalidInputError(f"invalid Pauli letters {sorted(bad)}")
        object.__setattr__(self, "letters", letters)

    def __len__(self):
        return len(self.letters)

    def __str__(self):
        return self.letters

    @property
    def support(self):
        return tuple(i for i, c in enumerate(self.letters) if c != "I")

    @property
    def is_identity(self):
        return not self.support

    def to_matrix(self):
        out = np.ones((1, 1), dtype=complex)
        for c in self.letters:
            out = np.kron(out, PAULI_MATRICES[c])
        return out


class PauliOperator:
    """Real linear combination of Pauli strings of a common width."""

    def __init__(self, terms):
        if isinstance(terms, (PauliString, str)):
            terms = {terms: 1.0}
        items = terms.items() if isinstance(terms, dict) else terms
        merged = {}
        for p, c in items:
            p = p if isinstance(p, PauliString) else PauliString(p)
            if p in merged:
                raise InvalidInputError(f"duplicate Pauli string {p}")
            c = float(c)
            if not math.isfinite(c):
                raise InvalidInputError("Pauli coefficients must be finite")
            merged[p] = c
        if not merged:
            raise InvalidInputError("operator needs at least one term")
        widths = {len(p) for p in merged}
        if len(widths) != 1:
            raise InvalidInputError("all Pauli strings must share one width")
        self._terms = tuple(sorted(merged.items(), key=lambda kv: kv[0].letters))
        self.width = widths.pop()

    @classmethod
    def z_all(cls, n):
        """The product observable Z⊗...⊗Z."""
        return cls({"Z" * n: 1.0})

    @property
    def terms(self):
        return dict(self._terms)

    def items(self):
        return self._terms

    @property
    def norm1(self):
        return sum(abs(c) for _, c in self._terms)

    def permuted(self, perm):
        """Operator whose logical qubit ``i`` sits on position ``perm[i]``."""
        out = {}
        for p, c in self._terms:
            letters = ["I"] * self.width
            for i, ch in enumerate(p.letters):
                letters[perm[i]] = ch
            out["".join(letters)] = c
        return PauliOperator(out)

    def to_matrix(self):
        return sum(c * p.to_matrix() for p, c in self._terms)

    def __eq__(self, other):
        return isinstance(other, PauliOperator) and self._terms == other._terms

    def __hash__(self):
        return hash(self._terms)

    def __repr__(self):
        body = " + ".join(f"{c:g}*{p}" for p, c in self._terms)
        return f"PauliOperator({body})"


@dataclass(frozen=True)
class Target:
    """Device constraints: coupling graph and native gate kinds.

    An empty ``coupling`` means all-to-all connectivity.
    """

    coupling: frozenset = frozenset()
    native_gates: frozenset = frozenset(("CX", "Rz", "SX", "X"))

    def __post_init__(self):
        edges = set()
        for a, b in self.coupling:
            a, b = int(a), int(b)
            if a == b or a < 0 or b < 0:
                raise InvalidInputError(f"invalid coupling edge ({a}, {b})")
            edges.add((min(a, b), max(a, b)))
        object.__setattr__(self, "coupling", frozenset(edges))
        natives = frozenset(self.native_gates)
        unknown = natives - set(KINDS)
        if unknown:
            raise InvalidInputError(f"unknown native gate kinds {sorted(unknown)}")
        object.__setattr__(self, "native_gates", natives)
        if edges and not _connected(self.physical_qubits, edges):
            raise InvalidInputError("coupling graph must be connected")

    @property
    def all_to_all(self):
        return not self.coupling

    @property
    def physical_qubits(self):
        return tuple(sorted({q for e in self.coupling for q in e}))

    @property
    def is_universal(self):
        g = self.native_gates
        return "CX" in g and "Rz" in g and bool(g & {"SX", "H"})

    def neighbours(self, q):
        return sorted({b if a == q else a for a, b in self.coupling if q in (a, b)})

    def coupled(self, a, b):
        return self.all_to_all or (min(a, b), max(a, b)) in self.coupling


def _connected(nodes, edges):
    if not nodes:
        return True
    adj = {q: set() for q in nodes}
    for a, b in edges:
        adj[a].add(b)
        adj[b].add(a)
    seen = {nodes[0]}
    stack = [nodes[0]]
    while stack:
        for nb in adj[stack.pop()]:
            if nb not in seen:
                seen.add(nb)
                stack.append(nb)
    return len(seen) == len(nodes)


NATIVE_IBM = frozenset(("CX", "Rz", "SX", "X"))
# 7-qubit heavy-hex layout shared by ibm_lagos and ibmq_casablanca.
IBM_7Q_COUPLING = frozenset({(0, 1), (1, 2), (1, 3), (3, 5), (4, 5), (5, 6)})


def ibm_7q_target():
    return Target(IBM_7Q_COUPLING, NATIVE_IBM)


def embed(u, qubits, n):
    """Full 2ⁿ×2ⁿ matrix of ``u`` acting on ``qubits``."""
    from .kernels import sv_apply

    return sv_apply(np.eye(2**n, dtype=complex), np.asarray(u, dtype=complex), tuple(qubits), n)


def unitary_of(c):
    """Dense unitary of an un-measured circuit with at most 10 qubits."""
    from . import _kernels_py

    if c.measured:
        raise InvalidInputError("unitary_of needs an un-measured circuit")
    if c.n_qubits > MAX_UNITARY_QUBITS:
        raise ResourceError(f"unitary_of supports at most {MAX_UNITARY_QUBITS} qubits")
    u = np.eye(2**c.n_qubits, dtype=complex)
    for g in c.gates:
        u = _kernels_py.sv_apply(u, g.to_matrix(), g.qubits, c.n_qubits)
    return u


def invert(c):
    """Circuit implementing the inverse unitary of ``c``."""
    if c.measured:
        raise InvalidInputError("cannot invert a measured circuit")
    return Circuit(c.n_qubits, tuple(g.inverse() for g in reversed(c.gates)))


def mirror(c):
    """``c`` followed by its inverse."""
    return c.compose(invert(c))


def _basis_in(q, letter):
    if letter == "X":
        return [Gate("H", (q,))]
    if letter == "Y":
        return [Gate("Sdg", (q,)), Gate("H", (q,))]
    return []


def _basis_out(q, letter):
    if letter == "X":
        return [Gate("H", (q,))]
    if letter == "Y":
        return [Gate("H", (q,)), Gate("S", (q,))]
    return []


def build_pauli_gadget(p, angle):
    """Circuit for exp(i·angle·P) built from basis changes, a CX ladder and one Rz.

    Args:
        p: Pauli string (or its letters); its length sets the circuit width.
        angle: rotation angle in radians.

    Returns:
        Circuit on ``len(p)`` qubits. An all-identity string yields an empty circuit.
    """
    if isinstance(p, str) and not p:
        raise InvalidInputError("Pauli string must be non-empty")
    p = p if isinstance(p, PauliString) else PauliString(p)
    n = len(p)
    support = p.support
    if not support:
        return Circuit(n)
    gates = []
    for q in support:
        gates += _basis_in(q, p.letters[q])
    ladder = [Gate("CX", (a, b)) for a, b in zip(support, support[1:])]
    gates += ladder
    gates.append(Gate.rz(support[-1], -2.0 * angle))
    gates += ladder[::-1]
    for q in support:
        gates += _basis_out(q, p.letters[q])
    return Circuit(n, tuple(gates))


def measurement_circuit(c, p):
    """Append the basis change that maps Pauli ``p`` to Z and mark the circuit measured.

    ``meta["basis_gates"]`` records how many trailing gates form the basis
    change; the simulator executes those without noise.
    """
    p = p if isinstance(p, PauliString) else PauliString(p)
    if len(p) != c.n_qubits:
        raise InvalidInputError("Pauli width does not match circuit")
    extra = []
    for q in p.support:
        extra += _basis_in(q, p.letters[q])
    meta = dict(c.meta, basis_gates=len(extra), basis=p.letters)
    return Circuit(c.n_qubits, c.gates + tuple(extra), True, meta)


# Text serialization ---------------------------------------------------------

def dumps(c):
    """Serialize ``c`` to the line-oriented text format.

    Header ``qubits N measured {0|1}``, then one gate per line
    ``KIND q... [angle|mK]``, then one ``matrix mK`` line per U2q holding 16
    row-major ``re,im`` pairs. Floats use ``repr`` so parsing is bit-exact.
    """
    lines = [f"qubits {c.n_qubits} measured {int(c.measured)}"]
    matrices = []
    for g in c.gates:
        parts = [g.kind] + [str(q) for q in g.qubits]
        if g.kind == "Rz":
            parts.append(repr(g.angle))
        elif g.kind == "U2q":
            parts.append(f"m{len(matrices)}")
            matrices.append(g.matrix)
        lines.append(" ".join(parts))
    for i, m in enumerate(matrices):
        entries = " ".join(f"{z.real!r},{z.imag!r}" for z in m)
        lines.append(f"matrix m{i} {entries}")
    return "\n".join(lines) + "\n"


def loads(text):
    """Parse the format written by :func:`dumps`."""
    try:
        return _loads(text)
    except (IndexError, KeyError, TypeError) as exc:
        raise InvalidInputError(f"malformed circuit text: {exc}") from exc
    except ValueError as exc:
        if isinstance(exc, InvalidInputError):
            raise
        raise InvalidInputError(f"malformed circuit text: {exc}") from exc


def _loads(text):
    rows = [ln.strip() for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    if not rows:
        raise InvalidInputError("empty circuit text")
    head = rows[0].split()
    if len(head) != 4 or head[0] != "qubits" or head[2] != "measured" or head[3] not in ("0", "1"):
        raise InvalidInputError(f"bad header line: {rows[0]!r}")
    n = int(head[1])
    matrices = {}
    gate_rows = []
    for ln in rows[1:]:
        tok = ln.split()
        if tok[0] == "matrix":
            if len(tok) != 18:
                raise InvalidInputError(f"matrix line needs 16 entries: {ln!r}")
            vals = []
            for pair in tok[2:]:
                re_, im_ = pair.split(",")
                vals.append(complex(float(re_), float(im_)))
            matrices[tok[1]] = tuple(vals)
        else:
            gate_rows.append(tok)
    gates = []
    for tok in gate_rows:
        kind = tok[0]
        if kind not in KINDS:
            raise InvalidInputError(f"unknown gate kind {kind!r}")
        arity = 1 if kind in ONE_QUBIT_KINDS else 2
        qubits = tuple(int(x) for x in tok[1:1 + arity])
        rest = tok[1 + arity:]
        if kind == "Rz":
            gates.append(Gate("Rz", qubits, angle=float(rest[0])))
        elif kind == "U2q":
            if not rest or rest[0] not in matrices:
                raise InvalidInputError(f"missing matrix for U2q line {' '.join(tok)!r}")
            gates.append(Gate("U2q", qubits, matrix=matrices[rest[0]]))
        else:
            if rest:
                raise InvalidInputError(f"unexpected tokens {rest}")
            gates.append(Gate(kind, qubits))
    return Circuit(n, tuple(gates), head[3] == "1")
