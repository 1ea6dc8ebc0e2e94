"""Digital noise amplification by unitary folding.

A fold replaces ``U`` with ``U(U†U)^k``. Three placements are supported:

``circuit``
    The whole circuit is folded ``k = (λ−1)/2`` times.
``odd_gate``
    Every gate ``G`` becomes ``G(G†G)^k``.
``random_gate``
    ``k·d`` gate folds are spread over the ``d`` gates uniformly at random, so
    the mean per-gate scale ``(1/d)·Σ(2αⱼ+1)`` equals ``λ`` exactly.
"""

from ..circuit import Circuit, InvalidInputError
from ..rng import make_rng

FOLDING_MODES = ("circuit", "random_gate", "odd_gate")


def check_scale(lam):
    if isinstance(lam, bool) or int(lam) != lam or lam < 1 or int(lam) % 2 == 0:
        raise InvalidInputError(f"noise scale must be an odd positive integer, got {lam!r}")
    return int(lam)


def fold(c, lam, mode="circuit", seed=0):
    """Return ``c`` with its noise amplified by the odd factor ``lam``.

    Args:
        c: circuit to fold; a terminal measurement is kept at the end.
        lam: odd positive integer noise scale.
        mode: one of :data:`FOLDING_MODES`.
        seed: seed for ``random_gate`` placement; ignored otherwise.

    Returns:
        A circuit with the same unitary as ``c``.
    """
    lam = check_scale(lam)
    if mode not in FOLDING_MODES:
        raise InvalidInputError(f"unknown folding mode {mode!r}")
    k = (lam - 1) // 2
    gates = c.gates
    if k == 0 or not gates:
        return c
    if mode == "circuit":
        inv = tuple(g.inverse() for g in reversed(gates))
        out = gates + (inv + gates) * k
    else:
        if mode == "odd_gate":
            alphas = [k] * len(gates)
        else:
            rng = make_rng(seed, "fold", lam)
            alphas = rng.multinomial(k * len(gates), [1.0 / len(gates)] * len(gates)).tolist()
        out = []
        for g, a in zip(gates, alphas):
            out.append(g)
            if a:
                out.extend((g.inverse(), g) * a)
        out = tuple(out)
    meta = {k: v for k, v in c.meta.items() if k not in ("basis_gates", "basis")}
    meta["fold"] = {"scale": lam, "mode": mode}
    return Circuit(c.n_qubits, out, c.measured, meta)
