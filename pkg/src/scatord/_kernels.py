"""Array kernels for finite ultrametric spaces.

Every kernel works on an integer rank matrix: distinct positive distances are
ranked from the largest (1) downwards, and the diagonal gets ``levels + 1``.
The ultrametric inequality and the ball partitions only depend on the order of
distances, so ranks keep the computation exact.

Compiled with numba when available; set ``SCATORD_DISABLE_NUMBA=1`` to force the
plain numpy versions.
"""

from __future__ import annotations

import os

import numpy as np

DISABLED = os.environ.get("SCATORD_DISABLE_NUMBA", "").strip() not in ("", "0")

try:
    if DISABLED:
        raise ImportError
    from numba import njit
    HAVE_NUMBA = True
except ImportError:                      # pragma: no cover - depends on the environment
    HAVE_NUMBA = False


# ---------------------------------------------------------------- numpy

def _violations_np(R: np.ndarray) -> np.ndarray:
    # the ultrametric inequality on ranks reads R[x, z] >= min(R[x, y], R[y, z])
    bound = np.minimum(R[:, :, None], R[None, :, :])      # (x, y, z)
    bad = R[:, None, :] < bound
    return np.argwhere(bad).astype(np.int64)


def _labels_np(R: np.ndarray, levels: int) -> np.ndarray:
    n = R.shape[0]
    out = np.empty((levels, n), dtype=np.int64)
    for lv in range(1, levels + 1):
        inside = R > lv                                    # ball of radius 2^-lv around each row
        out[lv - 1] = np.argmax(inside, axis=0)            # first member of the ball of each column
    return out


def _interval_np(labels: np.ndarray, pos: np.ndarray) -> int:
    bad = 0
    for row in labels:
        for lab in np.unique(row):
            p = pos[row == lab]
            if p.max() - p.min() + 1 != p.size:
                bad += 1
    return bad


def _order_np(labels: np.ndarray, pos: np.ndarray) -> int:
    """Pairs whose order disagrees with the first level at which their blocks differ."""
    levels, n = labels.shape
    diff = labels[:, :, None] != labels[:, None, :]       # (level, x, y)
    first = np.argmax(diff, axis=0)
    anydiff = diff.any(axis=0)
    cols = np.arange(n)
    lx = labels[first, cols[:, None]]
    ly = labels[first, cols[None, :]]
    # blocks at a level are ordered by their first members inside the same parent
    want = lx < ly
    got = pos[:, None] < pos[None, :]
    mask = anydiff & ~np.eye(n, dtype=bool)
    return int(np.count_nonzero((want != got) & mask)) + int(np.count_nonzero(~anydiff & ~np.eye(n, dtype=bool)))


# ---------------------------------------------------------------- numba

if HAVE_NUMBA:
    @njit(cache=True)
    def _violations_nb(R):
        n = R.shape[0]
        cnt = 0
        for x in range(n):
            for y in range(n):
                for z in range(n):
                    if R[x, z] < min(R[x, y], R[y, z]):
                        cnt += 1
        out = np.empty((cnt, 3), dtype=np.int64)
        k = 0
        for x in range(n):
            for y in range(n):
                for z in range(n):
                    if R[x, z] < min(R[x, y], R[y, z]):
                        out[k, 0] = x
                        out[k, 1] = y
                        out[k, 2] = z
                        k += 1
        return out

    @njit(cache=True)
    def _labels_nb(R, levels):
        n = R.shape[0]
        out = np.empty((levels, n), dtype=np.int64)
        for lv in range(1, levels + 1):
            for x in range(n):
                for a in range(n):
                    if R[a, x] > lv:
                        out[lv - 1, x] = a
                        break
        return out

    @njit(cache=True)
    def _interval_nb(labels, pos):
        levels, n = labels.shape
        bad = 0
        lo = np.empty(n, dtype=np.int64)
        hi = np.empty(n, dtype=np.int64)
        cnt = np.empty(n, dtype=np.int64)
        for lv in range(levels):
            lo[:] = n
            hi[:] = -1
            cnt[:] = 0
            for x in range(n):
                b = labels[lv, x]
                lo[b] = min(lo[b], pos[x])
                hi[b] = max(hi[b], pos[x])
                cnt[b] += 1
            for b in range(n):
                if cnt[b] and hi[b] - lo[b] + 1 != cnt[b]:
                    bad += 1
        return bad

    @njit(cache=True)
    def _order_nb(labels, pos):
        levels, n = labels.shape
        bad = 0
        for x in range(n):
            for y in range(n):
                if x == y:
                    continue
                decided = False
                for lv in range(levels):
                    a = labels[lv, x]
                    b = labels[lv, y]
                    if a != b:
                        if (a < b) != (pos[x] < pos[y]):
                            bad += 1
                        decided = True
                        break
                if not decided:
                    bad += 1
        return bad


def triangle_violations(R: np.ndarray, use_numba: bool | None = None) -> np.ndarray:
    if _pick(use_numba):
        return _violations_nb(R)
    return _violations_np(R)


def level_labels(R: np.ndarray, levels: int, use_numba: bool | None = None) -> np.ndarray:
    if _pick(use_numba):
        return _labels_nb(R, levels)
    return _labels_np(R, levels)


def interval_failures(labels: np.ndarray, pos: np.ndarray, use_numba: bool | None = None) -> int:
    if _pick(use_numba):
        return _interval_nb(labels, pos)
    return _interval_np(labels, pos)


def order_failures(labels: np.ndarray, pos: np.ndarray, use_numba: bool | None = None) -> int:
    if _pick(use_numba):
        return _order_nb(labels, pos)
    return _order_np(labels, pos)


def _pick(use_numba: bool | None) -> bool:
    if use_numba is None:
        return HAVE_NUMBA
    if use_numba and not HAVE_NUMBA:
        raise RuntimeError("numba is disabled or not installed")
    return use_numba
