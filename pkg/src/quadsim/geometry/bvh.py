"""BVH construction: median split over primitive centroids, leaf size <= 4.

The tree is stored in flat arrays for the numba traversal kernels:
node_count[i] > 0 marks a leaf owning prim_order[node_first[i] :
node_first[i] + node_count[i]]; node_count[i] == 0 marks an internal node
whose children are node_first[i] and node_first[i] + 1.
"""

from __future__ import annotations

import numpy as np

LEAF_SIZE = 4


def build_bvh(prim_lo: np.ndarray, prim_hi: np.ndarray):
    n = len(prim_lo)
    centroids = 0.5 * (prim_lo + prim_hi)

    node_lo, node_hi, node_first, node_count = [], [], [], []

    def new_node():
        node_lo.append(None)
        node_hi.append(None)
        node_first.append(0)
        node_count.append(0)
        return len(node_lo) - 1

    order = np.arange(n, dtype=np.int64)
    out_order = np.empty(n, dtype=np.int64)
    cursor = 0

    # explicit stack of (node index, slice into `order`)
    root = new_node()
    stack = [(root, 0, n)]
    while stack:
        node, lo_i, hi_i = stack.pop()
        idx = order[lo_i:hi_i]
        node_lo[node] = prim_lo[idx].min(axis=0)
        node_hi[node] = prim_hi[idx].max(axis=0)
        count = hi_i - lo_i
        if count <= LEAF_SIZE:
            node_first[node] = cursor
            node_count[node] = count
            out_order[cursor : cursor + count] = idx
            cursor += count
            continue
        cen = centroids[idx]
        spread = cen.max(axis=0) - cen.min(axis=0)
        axis = int(np.argmax(spread))
        # stable sort keeps construction deterministic across runs
        local = np.argsort(cen[:, axis], kind="stable")
        order[lo_i:hi_i] = idx[local]
        mid = lo_i + count // 2
        left = new_node()
        right = new_node()
        assert right == left + 1
        node_first[node] = left
        node_count[node] = 0
        # push right first so the left child is processed (and laid out) first
        stack.append((right, mid, hi_i))
        stack.append((left, lo_i, mid))

    return (
        np.ascontiguousarray(np.stack(node_lo)),
        np.ascontiguousarray(np.stack(node_hi)),
        np.asarray(node_first, dtype=np.int64),
        np.asarray(node_count, dtype=np.int64),
        out_order,
    )
