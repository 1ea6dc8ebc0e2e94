"""Two-qubit synthesis and compilation to a constrained target.

The two-qubit decomposition follows the usual magic-basis (KAK) route:
``U = (A1⊗A0)·exp(i(a·XX + b·YY + c·ZZ))·(B1⊗B0)`` up to phase, with the
interaction factor realised by 0, 1, 2 or 3 CX gates depending on how many of
``a, b, c`` are non-trivial.
"""

import math
from collections import deque

import numpy as np

from .circuit import (
    Circuit,
    Gate,
    InvalidInputError,
    PAULI_MATRICES,
    is_unitary,
)

_X = PAULI_MATRICES["X"]
_Y = PAULI_MATRICES["Y"]
_Z = PAULI_MATRICES["Z"]
_I2 = np.eye(2, dtype=complex)
_H = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)
_CX = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)

MAGIC = np.array(
    [[1, 1j, 0, 0], [0, 0, 1j, 1], [0, 0, 1j, -1], [1, -1j, 0, 0]], dtype=complex
) / math.sqrt(2)
MAGIC_DAG = MAGIC.conj().T

# Eigenvalues of XX, YY, ZZ in the magic basis (each diagonal there).
_XX_D = np.real(np.diag(MAGIC_DAG @ np.kron(_X, _X) @ MAGIC))
_YY_D = np.real(np.diag(MAGIC_DAG @ np.kron(_Y, _Y) @ MAGIC))
_ZZ_D = np.real(np.diag(MAGIC_DAG @ np.kron(_Z, _Z) @ MAGIC))
_COORD_SYSTEM = np.column_stack([np.ones(4), _XX_D, _YY_D, _ZZ_D])

_ZERO_TOL = 1e-9


def rx(t):
    c, s = math.cos(t / 2), math.sin(t / 2)
    return np.array([[c, -1j * s], [-1j * s, c]])


def ry(t):
    c, s = math.cos(t / 2), math.sin(t / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


def rz(t):
    return np.diag([np.exp(-0.5j * t), np.exp(0.5j * t)])


def interaction(a, b, c):
    """exp(i(a·XX + b·YY + c·ZZ)) as a dense 4×4 matrix."""
    lam = np.exp(1j * (a * _XX_D + b * _YY_D + c * _ZZ_D))
    return MAGIC @ np.diag(lam) @ MAGIC_DAG


def _to_su(u):
    d = u.shape[0]
    det = np.linalg.det(u)
    return u / det ** (1.0 / d)


def _kron_factor(k):
    """Split a 4×4 ``k ≈ A⊗B`` into 2×2 unitaries (phase arbitrary)."""
    r = k.reshape(2, 2, 2, 2).transpose(0, 2, 1, 3).reshape(4, 4)
    uu, s, vh = np.linalg.svd(r)
    a = (math.sqrt(s[0]) * uu[:, 0]).reshape(2, 2)
    b = (math.sqrt(s[0]) * vh[0, :]).reshape(2, 2)
    a = _to_su(a)
    b = _to_su(b)
    return a, b


def _real_orthogonal_diagonalize(m):
    """Real orthogonal ``P`` with ``Pᵀ M P`` diagonal for a complex symmetric unitary ``M``."""
    re, im = m.real, m.imag
    for t in np.linspace(0.1, 1.4, 14):
        _, p = np.linalg.eigh(math.cos(t) * re + math.sin(t) * im)
        d = p.T @ m @ p
        if np.max(np.abs(d - np.diag(np.diag(d)))) < 1e-10:
            return p
    raise InvalidInputError("failed to diagonalise the magic-basis Gram matrix")


def kak(u):
    """Magic-basis decomposition of a two-qubit unitary.

    Returns:
        ``(a1, a0, (a, b, c), b1, b0)`` with
        ``u ≅ kron(a1, a0) @ interaction(a, b, c) @ kron(b1, b0)`` up to global phase.
    """
    u = np.asarray(u, dtype=complex)
    if u.shape != (4, 4) or not is_unitary(u):
        raise InvalidInputError("decompose_su4 needs a 4x4 unitary")
    up = MAGIC_DAG @ _to_su(u) @ MAGIC
    p = _real_orthogonal_diagonalize(up.T @ up)
    if np.linalg.det(p) < 0:
        p[:, 0] *= -1
    d = np.diag(p.T @ up.T @ up @ p)
    theta = np.angle(d) / 2.0
    q = up @ p @ np.diag(np.exp(-1j * theta))
    q = q.real
    if np.linalg.det(q) < 0:
        theta[0] += math.pi
        q[:, 0] *= -1
    _, a, b, c = np.linalg.solve(_COORD_SYSTEM, theta)
    k1 = MAGIC @ q @ MAGIC_DAG
    k2 = MAGIC @ p.T @ MAGIC_DAG
    a1, a0 = _kron_factor(k1)
    b1, b0 = _kron_factor(k2)
    return a1, a0, (float(a), float(b), float(c)), b1, b0


# A small program representation: ("u", q, 2x2) or ("cx", control, target).

def _interaction_program(coords):
    """Program implementing ``interaction(*coords)`` up to phase, with locals folded in."""
    red = []
    fix0, fix1 = _I2, _I2
    for axis, x in zip((_X, _Y, _Z), coords):
        k = round(x / (math.pi / 2))
        r = x - k * math.pi / 2
        if k % 2:
            fix0 = fix0 @ axis
            fix1 = fix1 @ axis
        red.append(r)
    active = [i for i, r in enumerate(red) if abs(r) > _ZERO_TOL]
    prog = []
    if not active:
        pass
    elif len(active) == 1:
        (i,) = active
        x = red[i]
        # map the active axis onto ZZ with a local basis change V⊗V
        v = (_H, rx(math.pi / 2), _I2)[i]
        prog.append(("u", 0, v))
        prog.append(("u", 1, v))
        if abs(abs(x) - math.pi / 4) <= _ZERO_TOL:
            s = rz(-math.pi / 2) if x > 0 else rz(math.pi / 2)
            # exp(±iπ/4·ZZ) ≅ CZ·(S∓⊗S∓) and CZ = (I⊗H)·CX·(I⊗H)
            prog += [("u", 0, s), ("u", 1, s), ("u", 1, _H), ("cx", 0, 1), ("u", 1, _H)]
        else:
            prog += [("cx", 0, 1), ("u", 1, rz(-2 * x)), ("cx", 0, 1)]
        prog.append(("u", 0, v.conj().T))
        prog.append(("u", 1, v.conj().T))
    elif len(active) == 2:
        # map the pair onto (XX, ZZ) and use CX·(Rx⊗Rz)·CX
        pair = tuple(active)
        v = {(0, 2): _I2, (0, 1): rx(math.pi / 2), (1, 2): rz(math.pi / 2)}[pair]
        s, t = red[pair[0]], red[pair[1]]
        prog.append(("u", 0, v))
        prog.append(("u", 1, v))
        prog += [("cx", 0, 1), ("u", 0, rx(-2 * s)), ("u", 1, rz(-2 * t)), ("cx", 0, 1)]
        prog.append(("u", 0, v.conj().T))
        prog.append(("u", 1, v.conj().T))
    else:
        a, b, c = red
        prog += [
            ("u", 1, rz(math.pi / 2)),
            ("cx", 1, 0),
            ("u", 0, rz(math.pi / 2 - 2 * c)),
            ("u", 1, ry(math.pi / 2 - 2 * a)),
            ("cx", 0, 1),
            ("u", 1, ry(2 * b - math.pi / 2)),
            ("cx", 1, 0),
            ("u", 0, rz(-math.pi / 2)),
        ]
    # the stripped multiples of π/2 are local Paulis; they commute with the rest
    prog.append(("u", 0, fix0))
    prog.append(("u", 1, fix1))
    return prog, len([op for op in prog if op[0] == "cx"])


def _program_matrix(prog):
    m = np.eye(4, dtype=complex)
    for op in prog:
        if op[0] == "u":
            g = np.kron(op[2], _I2) if op[1] == 0 else np.kron(_I2, op[2])
        else:
            g = _CX if op[1] == 0 else np.kron(_H, _H) @ _CX @ np.kron(_H, _H)
        m = g @ m
    return m


def euler_rz_sx(u, q):
    """Gates ``Rz·SX·Rz·SX·Rz`` (fewer when possible) equal to 2×2 ``u`` up to phase.

    Zero-angle Rz gates are dropped.
    """
    u = _to_su(np.asarray(u, dtype=complex))
    # ZYZ: u ≅ Rz(phi)·Ry(theta)·Rz(lam)
    theta = 2.0 * math.atan2(abs(u[1, 0]), abs(u[0, 0]))
    if abs(u[1, 0]) < 1e-12:
        phi_plus_lam = 2.0 * np.angle(u[1, 1])
        seq = [Gate.rz(q, phi_plus_lam)]
    elif abs(u[0, 0]) < 1e-12:
        phi_minus_lam = 2.0 * np.angle(u[1, 0])
        # Ry(π) = SX·SX up to Rz(π) conjugation; keep the generic form
        seq = _u3_gates(q, math.pi, phi_minus_lam, 0.0)
    else:
        s = np.angle(u[1, 1])
        d = np.angle(u[1, 0])
        seq = _u3_gates(q, theta, s + d, s - d)
    return [g for g in seq if not (g.kind == "Rz" and g.angle == 0.0)]


def _u3_gates(q, theta, phi, lam):
    # U3(θ,φ,λ) ≅ Rz(φ+π)·SX·Rz(θ+π)·SX·Rz(λ)
    return [
        Gate.rz(q, lam),
        Gate("SX", (q,)),
        Gate.rz(q, theta + math.pi),
        Gate("SX", (q,)),
        Gate.rz(q, phi + math.pi),
    ]


def decompose_su4(u):
    """Circuit over {CX, Rz, SX} implementing a two-qubit unitary with at most 3 CX.

    Args:
        u: 4×4 unitary; row/column index ``2·q0 + q1``.

    Returns:
        Two-qubit :class:`Circuit` equal to ``u`` up to global phase.
    """
    a1, a0, coords, b1, b0 = kak(u)
    core, _ = _interaction_program(coords)
    prog = [("u", 0, b1), ("u", 1, b0)] + core + [("u", 0, a1), ("u", 1, a0)]
    gates = []
    pending = {0: _I2, 1: _I2}

    def flush(qq):
        gates.extend(euler_rz_sx(pending[qq], qq))
        pending[qq] = _I2

    for op in prog:
        if op[0] == "u":
            pending[op[1]] = op[2] @ pending[op[1]]
        else:
            flush(0)
            flush(1)
            gates.append(Gate("CX", (op[1], op[2])))
    flush(0)
    flush(1)
    return Circuit(2, tuple(gates))


# Compilation ----------------------------------------------------------------

_FIXED_REBASE = {
    "H": ((math.pi / 2, "SX", math.pi / 2)),
    "S": (math.pi / 2,),
    "Sdg": (3 * math.pi / 2,),
    "Z": (math.pi,),
    "T": (math.pi / 4,),
    "Tdg": (-math.pi / 4,),
    "SXdg": (math.pi, "SX", math.pi),
    "X": ("SX", "SX"),
}


def _rebase_1q(g, natives):
    if g.kind in natives:
        return [g]
    q = g.qubits[0]
    if g.kind == "SX":
        # SX ≅ H·S·H when only H is available
        return [Gate("H", (q,)), Gate.rz(q, math.pi / 2), Gate("H", (q,))]
    if g.kind == "Rz":
        raise InvalidInputError("target lacks Rz")
    out = []
    for step in _FIXED_REBASE[g.kind]:
        if step == "SX":
            out += _rebase_1q(Gate("SX", (q,)), natives)
        else:
            out.append(Gate.rz(q, step))
    return out


def _rebase(g, natives):
    if g.kind in natives:
        return [g]
    if g.n_qubits == 1:
        return _rebase_1q(g, natives)
    a, b = g.qubits
    if g.kind == "SWAP":
        seq = [Gate("CX", (a, b)), Gate("CX", (b, a)), Gate("CX", (a, b))]
    elif g.kind == "U2q":
        sub = decompose_su4(np.array(g.matrix).reshape(4, 4))
        seq = [h.relabel({0: a, 1: b}) for h in sub.gates]
    else:
        raise InvalidInputError(f"cannot rebase {g.kind}")
    out = []
    for h in seq:
        out += _rebase(h, natives)
    return out


def select_qubits(target, n):
    """First ``n`` physical qubits reached by BFS from the lowest-index qubit."""
    phys = target.physical_qubits
    if n > len(phys):
        raise InvalidInputError(f"circuit needs {n} qubits, target has {len(phys)}")
    seen = [phys[0]]
    queue = deque([phys[0]])
    while queue and len(seen) < n:
        for nb in target.neighbours(queue.popleft()):
            if nb not in seen:
                seen.append(nb)
                queue.append(nb)
    return tuple(seen[:n])


def _shortest_path(adj, src, dst):
    prev = {src: None}
    queue = deque([src])
    while queue:
        cur = queue.popleft()
        if cur == dst:
            break
        for nb in sorted(adj[cur]):
            if nb not in prev:
                prev[nb] = cur
                queue.append(nb)
    path = [dst]
    while prev[path[-1]] is not None:
        path.append(prev[path[-1]])
    return path[::-1]


def route(c, target):
    """Insert SWAPs so every two-qubit gate acts on coupled qubits.

    Returns a circuit over slots ``0..n-1`` where slot ``i`` is physical qubit
    ``meta["physical_qubits"][i]``. ``meta["final_layout"][q]`` is the slot
    holding logical qubit ``q`` at the end.
    """
    n = c.n_qubits
    if target.all_to_all:
        ident = tuple(range(n))
        return Circuit(n, c.gates, c.measured,
                       {"physical_qubits": ident, "initial_layout": ident, "final_layout": ident})
    phys = select_qubits(target, n)
    index = {p: i for i, p in enumerate(phys)}
    adj = {i: set() for i in range(n)}
    for a, b in target.coupling:
        if a in index and b in index:
            adj[index[a]].add(index[b])
            adj[index[b]].add(index[a])
    slot_of = list(range(n))  # logical -> slot
    logical_at = list(range(n))  # slot -> logical
    out = []
    for g in c.gates:
        if g.n_qubits == 1:
            out.append(g.relabel({g.qubits[0]: slot_of[g.qubits[0]]}))
            continue
        la, lb = g.qubits
        path = _shortest_path(adj, slot_of[la], slot_of[lb])
        for s, t in zip(path[:-2], path[1:-1]):
            out.append(Gate("SWAP", (s, t)))
            ls, lt = logical_at[s], logical_at[t]
            logical_at[s], logical_at[t] = lt, ls
            slot_of[ls], slot_of[lt] = t, s
        out.append(g.relabel({la: slot_of[la], lb: slot_of[lb]}))
    meta = {
        "physical_qubits": phys,
        "initial_layout": tuple(range(n)),
        "final_layout": tuple(slot_of),
    }
    return Circuit(n, tuple(out), c.measured, meta)


def compile_circuit(c, target):
    """Route and rebase ``c`` onto ``target``.

    No cross-gate simplification is performed, so mirrored structure survives.
    The final logical-to-slot permutation is in ``meta["final_layout"]``.
    """
    if not target.is_universal:
        raise InvalidInputError("target gate set is not universal (needs CX, Rz and SX or H)")
    routed = route(c, target)
    gates = []
    for g in routed.gates:
        gates += _rebase(g, target.native_gates)
    return Circuit(c.n_qubits, tuple(gates), c.measured, dict(routed.meta))


compile = compile_circuit  # noqa: A001  public name used by the CLI and docs


def cx_count(c):
    return c.count("CX")
