"""Batch slot kernels.

Two interchangeable implementations of the same per-trial computation:

* ``_slot_counts_numba``: a nogil ``@njit`` loop over trials.
* ``_slot_counts_numpy``: vectorized over trials in chunks.

Set ``QCRTOMO_DISABLE_NUMBA=1`` (or leave numba uninstalled) to force the
numpy path. Both return the same integer counts for the same inputs.

Counts layout (length ``N_COUNTS``)::

    0 fulfilled primary   1 fulfilled backup   2 failed root loss
    3 failed leaf loss    4 failed parity
    5 fulfilled pairs served by ``first``      6 ... served by ``second``
"""

from __future__ import annotations

import os

import numpy as np

from .rng import GAMMA, MASK64, MIX1, MIX2

N_COUNTS = 7
NUMPY_CHUNK = 1 << 18

_U_GAMMA = np.uint64(GAMMA)
_U_MIX1 = np.uint64(MIX1)
_U_MIX2 = np.uint64(MIX2)
_S11 = np.uint64(11)
_S27 = np.uint64(27)
_S30 = np.uint64(30)
_S31 = np.uint64(31)
_UNIT = 1.0 / (1 << 53)


def _env_disabled() -> bool:
    return os.environ.get("QCRTOMO_DISABLE_NUMBA", "").strip().lower() in {"1", "true", "yes", "on"}


try:
    if _env_disabled():
        raise ImportError("numba disabled by QCRTOMO_DISABLE_NUMBA")
    from numba import njit

    HAVE_NUMBA = True
except ImportError:
    HAVE_NUMBA = False

BACKENDS = ("numba", "numpy") if HAVE_NUMBA else ("numpy",)
DEFAULT_BACKEND = BACKENDS[0]


def _slot_counts_python(survival, fidelity, root, first, second, p_first, use_backup, seed_key, start, stop):
    """Reference loop. Compiled by numba when available; never used uncompiled."""
    counts = np.zeros(N_COUNTS, dtype=np.int64)
    choice_index = np.uint64(2 * survival.shape[0] + 1)
    present = np.zeros(3, dtype=np.bool_)
    flipped = np.zeros(3, dtype=np.bool_)
    for t in range(start, stop):
        tk = seed_key + np.uint64(t + 1) * _U_GAMMA
        tk = (tk ^ (tk >> _S30)) * _U_MIX1
        tk = (tk ^ (tk >> _S27)) * _U_MIX2
        tk = tk ^ (tk >> _S31)

        z = tk + choice_index * _U_GAMMA
        z = (z ^ (z >> _S30)) * _U_MIX1
        z = (z ^ (z >> _S27)) * _U_MIX2
        z = z ^ (z >> _S31)
        if np.float64(z >> _S11) * _UNIT < p_first:
            primary, backup = first, second
        else:
            primary, backup = second, first
        if not use_backup:
            backup = -1

        present[:] = False
        flipped[:] = False
        nodes = (root, primary, backup)
        for slot in range(3):
            node = nodes[slot]
            if node < 0:
                continue
            z = tk + np.uint64(2 * node + 1) * _U_GAMMA
            z = (z ^ (z >> _S30)) * _U_MIX1
            z = (z ^ (z >> _S27)) * _U_MIX2
            z = z ^ (z >> _S31)
            u_loss = np.float64(z >> _S11) * _UNIT
            z = tk + np.uint64(2 * node + 2) * _U_GAMMA
            z = (z ^ (z >> _S30)) * _U_MIX1
            z = (z ^ (z >> _S27)) * _U_MIX2
            z = z ^ (z >> _S31)
            u_flip = np.float64(z >> _S11) * _UNIT
            if u_loss < survival[node]:
                present[slot] = True
                flipped[slot] = u_flip >= fidelity[node]

        if not present[0]:
            counts[2] += 1
            continue
        if present[1]:
            served, outcome = primary, 0
            ok = flipped[0] == flipped[1]
        elif backup >= 0 and present[2]:
            served, outcome = backup, 1
            ok = flipped[0] == flipped[2]
        else:
            counts[3] += 1
            continue
        if ok:
            counts[outcome] += 1
            counts[5 if served == first else 6] += 1
        else:
            counts[4] += 1
    return counts


if HAVE_NUMBA:
    _slot_counts_numba = njit(nogil=True, cache=True)(_slot_counts_python)
else:  # pragma: no cover - exercised only without numba
    _slot_counts_numba = None


def _mix_array(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> _S30)) * _U_MIX1
    z = (z ^ (z >> _S27)) * _U_MIX2
    return z ^ (z >> _S31)


def _unit_array(tk: np.ndarray, index: int) -> np.ndarray:
    z = _mix_array(tk + np.uint64(((index + 1) * GAMMA) & MASK64))
    return (z >> _S11).astype(np.float64) * _UNIT


def _slot_counts_numpy(survival, fidelity, root, first, second, p_first, use_backup, seed_key, start, stop):
    counts = np.zeros(N_COUNTS, dtype=np.int64)
    n = survival.shape[0]
    for lo in range(start, stop, NUMPY_CHUNK):
        hi = min(lo + NUMPY_CHUNK, stop)
        t = np.arange(lo + 1, hi + 1, dtype=np.uint64)
        tk = _mix_array(seed_key + t * _U_GAMMA)

        pick_first = _unit_array(tk, 2 * n) < p_first
        primary = np.where(pick_first, first, second)
        backup = np.where(pick_first, second, first)

        def link(node):
            u_loss = _unit_array(tk, 2 * node)
            u_flip = _unit_array(tk, 2 * node + 1)
            present = u_loss < survival[node]
            return present, present & (u_flip >= fidelity[node])

        root_present, root_flip = link(root)
        first_present, first_flip = link(first)
        second_present, second_flip = link(second)
        prim_present = np.where(pick_first, first_present, second_present)
        prim_flip = np.where(pick_first, first_flip, second_flip)
        back_present = np.where(pick_first, second_present, first_present) & use_backup
        back_flip = np.where(pick_first, second_flip, first_flip)

        use_prim = root_present & prim_present
        use_back = root_present & ~prim_present & back_present
        ok_prim = use_prim & (root_flip == prim_flip)
        ok_back = use_back & (root_flip == back_flip)
        served = np.where(ok_prim, primary, np.where(ok_back, backup, -1))

        counts[0] += int(ok_prim.sum())
        counts[1] += int(ok_back.sum())
        counts[2] += int((~root_present).sum())
        counts[3] += int((root_present & ~prim_present & ~back_present).sum())
        counts[4] += int((use_prim & ~ok_prim).sum() + (use_back & ~ok_back).sum())
        counts[5] += int((served == first).sum())
        counts[6] += int((served == second).sum())
    return counts


def slot_counts(
    survival: np.ndarray,
    fidelity: np.ndarray,
    root: int,
    first: int,
    second: int,
    p_first: float,
    use_backup: bool,
    seed_key: int,
    start: int,
    stop: int,
    backend: str | None = None,
) -> np.ndarray:
    """Outcome counts for trials ``start .. stop-1``.

    Node arguments are 0-based channel indices and must all be distinct.
    Without a backup, pass any other leaf as ``second`` together with
    ``p_first=1`` and ``use_backup=False``.
    """
    backend = backend or DEFAULT_BACKEND
    if backend not in BACKENDS:
        raise ValueError(f"unknown or unavailable backend {backend!r}; choose from {BACKENDS}")
    survival = np.ascontiguousarray(survival, dtype=np.float64)
    fidelity = np.ascontiguousarray(fidelity, dtype=np.float64)
    kernel = _slot_counts_numba if backend == "numba" else _slot_counts_numpy
    return kernel(
        survival,
        fidelity,
        int(root),
        int(first),
        int(second),
        float(p_first),
        bool(use_backup),
        np.uint64(seed_key),
        int(start),
        int(stop),
    )
