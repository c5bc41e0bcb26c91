"""Path-enumeration kernel: tolerance-pruned DFS over a CSR road graph.

This is the package's hot loop (worst case grows with the factorial of the
node count), so it is compiled with numba when available. Set the
environment variable CANMATCH_NUMBA=0 before import to force the pure
Python fallback; both backends run the identical function body, so results
are bit-for-bit the same.
"""

from __future__ import annotations

import os

import numpy as np

ENV_FLAG = "CANMATCH_NUMBA"


def _enumerate_impl(indptr, nbrs, lens, wr, sigma, max_count, allow_reuse, out):
    """Enumerate node paths whose edge lengths match wr within sigma.

    Iterative DFS from every start node. A neighbor extends the path at
    depth d only when its edge length w satisfies |w - wr[d]| <= sigma*w.
    Complete paths (len(wr)+1 nodes) are written flat into out. Returns
    (count, truncated); enumeration stops as soon as max_count paths are
    recorded, keeping a deterministic prefix.
    """
    n = indptr.shape[0] - 1
    q = wr.shape[0] + 1
    visited = np.zeros(n, dtype=np.bool_)
    path = np.empty(q, dtype=np.int64)
    cursor = np.empty(q, dtype=np.int64)
    count = 0
    for s in range(n):
        path[0] = s
        visited[s] = True
        cursor[0] = indptr[s]
        d = 0
        while d >= 0:
            u = path[d]
            i = cursor[d]
            if i < indptr[u + 1]:
                cursor[d] = i + 1
                v = nbrs[i]
                if (not allow_reuse) and visited[v]:
                    continue
                w = lens[i]
                diff = w - wr[d]
                if diff < 0.0:
                    diff = -diff
                if diff > sigma * w:
                    continue
                if d == q - 2:
                    if count >= max_count:
                        return count, True
                    base = count * q
                    for j in range(q - 1):
                        out[base + j] = path[j]
                    out[base + q - 1] = v
                    count += 1
                else:
                    d += 1
                    path[d] = v
                    visited[v] = True
                    cursor[d] = indptr[v]
            else:
                visited[u] = False
                d -= 1
    return count, False


def _pick_backend():
    if os.environ.get(ENV_FLAG, "1").lower() in ("0", "false", "no"):
        return _enumerate_impl, "python"
    try:
        from numba import njit
    except ImportError:
        return _enumerate_impl, "python"
    return njit(cache=True, nogil=True)(_enumerate_impl), "numba"


_active, _backend_name = _pick_backend()

# pure build kept importable for the benchmark regardless of backend
enumerate_matches_python = _enumerate_impl
enumerate_matches = _active


def backend() -> str:
    """Which implementation is live: 'numba' or 'python'."""
    return _backend_name
