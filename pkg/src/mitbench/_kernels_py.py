"""Pure-NumPy implementations of the simulator kernels.

Every function mirrors the signature of its counterpart in the compiled
``_kernels`` extension. State arrays are complex128 and use big-endian qubit
order: qubit 0 is the most significant bit of a basis index. Density-matrix
functions update ``rho`` in place and also return it.
"""

import numpy as np


def _apply_axes(t, u, axes):
    k = len(axes)
    ut = u.reshape((2,) * (2 * k))
    out = np.tensordot(ut, t, axes=(list(range(k, 2 * k)), list(axes)))
    return np.moveaxis(out, list(range(k)), list(axes))


def sv_apply(psi, u, qubits, n):
    """Return ``u`` applied to ``qubits`` of a statevector (or a stack of columns)."""
    t = psi.reshape((2,) * n + psi.shape[1:])
    return np.ascontiguousarray(_apply_axes(t, u, qubits)).reshape(psi.shape)


def dm_apply_unitary(rho, u, qubits, n):
    t = rho.reshape((2,) * (2 * n))
    t = _apply_axes(t, u, qubits)
    t = _apply_axes(t, u.conj(), [n + q for q in qubits])
    rho[...] = t.reshape(rho.shape)
    return rho


def _front(rho, qubits, n):
    t = rho.reshape((2,) * (2 * n))
    src = list(qubits) + [n + q for q in qubits]
    return np.moveaxis(t, src, list(range(len(src))))


def dm_depolarize(rho, p, qubits, n):
    """Replace the reduced state on ``qubits`` by the maximally mixed one with probability ``p``."""
    t = _front(rho, qubits, n)
    if len(qubits) == 1:
        sigma = t[0, 0] + t[1, 1]
        t *= 1.0 - p
        t[0, 0] += 0.5 * p * sigma
        t[1, 1] += 0.5 * p * sigma
    else:
        sigma = t[0, 0, 0, 0] + t[0, 1, 0, 1] + t[1, 0, 1, 0] + t[1, 1, 1, 1]
        t *= 1.0 - p
        for x in (0, 1):
            for y in (0, 1):
                t[x, y, x, y] += 0.25 * p * sigma
    return rho


def dm_thermal(rho, q, n, p_ad, coherence):
    """Amplitude damping with probability ``p_ad``; off-diagonals scaled by ``coherence``."""
    t = _front(rho, (q,), n)
    t[0, 0] += p_ad * t[1, 1]
    t[1, 1] *= 1.0 - p_ad
    t[0, 1] *= coherence
    t[1, 0] *= coherence
    return rho
