"""Density-based clustering of reduced embeddings into topics.

Full hierarchical density clustering: core distances, mutual-reachability
minimum spanning tree (exact, lazy Prim), single-linkage hierarchy,
condensed tree at min_cluster_size, excess-of-mass cluster selection,
per-point membership strengths, and post-hoc soft topic memberships from
condensed-tree exemplars.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from stont.reduce import ReducedMatrix, exact_knn


@dataclass
class CondensedTree:
    """Rows (parent, child, lam, size): child is a point (< n) or a cluster."""

    parent: np.ndarray
    child: np.ndarray
    lam: np.ndarray
    size: np.ndarray
    root: int


@dataclass
class ClusterAssignment:
    ids: list
    labels: np.ndarray           # cluster number >= 0, or -1 outlier
    strengths: np.ndarray        # membership strength in assigned cluster
    cluster_count: int
    outlier_fraction: float
    exemplars: dict = field(default_factory=dict)   # number -> point coords
    condensed: CondensedTree | None = None
    cluster_sizes: dict = field(default_factory=dict)


# ---------------------------------------------------------------------------
# mutual-reachability MST


def core_distances(points: np.ndarray, min_samples: int) -> np.ndarray:
    """Distance to the min_samples-th nearest neighbor, the point itself
    counting as its own first neighbor (so min_samples=1 gives 0)."""
    n = points.shape[0]
    if min_samples < 1:
        raise ValueError("min_samples must be >= 1")
    if min_samples == 1:
        return np.zeros(n)
    _, dist = exact_knn(points, min_samples - 1)
    return dist[:, -1]


def mutual_reachability_mst(points: np.ndarray, core: np.ndarray):
    """Exact MST of the mutual-reachability graph by lazy Prim.

    d_mr(a, b) = max(core(a), core(b), d(a, b)). Returns edges sorted by
    (weight, smaller index, larger index).
    """
    x = np.asarray(points, dtype=np.float64)
    n = x.shape[0]
    in_tree = np.zeros(n, dtype=bool)
    best = np.full(n, np.inf)
    best_from = np.full(n, -1, dtype=np.int64)
    current = 0
    in_tree[0] = True
    edges = []
    sq = (x * x).sum(axis=1)
    for _ in range(n - 1):
        d2 = sq[current] + sq - 2.0 * (x @ x[current])
        np.maximum(d2, 0.0, out=d2)
        d_mr = np.maximum(np.sqrt(d2), np.maximum(core[current], core))
        improve = d_mr < best
        best[improve] = d_mr[improve]
        best_from[improve] = current
        best[current] = np.inf
        masked = np.where(in_tree, np.inf, best)
        nxt = int(np.argmin(masked))
        u, v = int(best_from[nxt]), nxt
        edges.append((min(u, v), max(u, v), float(best[nxt])))
        in_tree[nxt] = True
        current = nxt
    edges.sort(key=lambda e: (e[2], e[0], e[1]))
    return edges


# ---------------------------------------------------------------------------
# single-linkage hierarchy and condensed tree


class _UnionFind:
    def __init__(self, n):
        self.parent = list(range(2 * n - 1))
        self.size = [1] * n + [0] * (n - 1)
        self.next_label = n

    def find(self, x):
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a, b):
        label = self.next_label
        self.next_label += 1
        self.parent[a] = label
        self.parent[b] = label
        self.size[label] = self.size[a] + self.size[b]
        return label


def single_linkage(edges, n: int) -> np.ndarray:
    """Merge table: row i = (left node, right node, distance, size)."""
    uf = _UnionFind(n)
    merges = np.zeros((n - 1, 4))
    for i, (u, v, w) in enumerate(edges):
        ru, rv = uf.find(u), uf.find(v)
        label = uf.union(ru, rv)
        merges[i] = (ru, rv, w, uf.size[label])
    return merges


def condense_tree(merges: np.ndarray, n: int, min_cluster_size: int) -> CondensedTree:
    """Collapse the single-linkage dendrogram into density clusters.

    A split spawns new clusters only when both sides hold at least
    min_cluster_size points; smaller sides fall out of their parent
    cluster at that level's lambda = 1/distance.
    """
    root = 2 * n - 2
    children = {}  # dendrogram node -> (left, right, distance)
    for i in range(n - 1):
        children[n + i] = (int(merges[i, 0]), int(merges[i, 1]), merges[i, 2])

    def leaves(node):
        stack, out = [node], []
        while stack:
            cur = stack.pop()
            if cur < n:
                out.append(cur)
            else:
                left, right, _ = children[cur]
                stack.append(left)
                stack.append(right)
        return out

    rows_parent, rows_child, rows_lam, rows_size = [], [], [], []
    relabel = {root: n}
    next_cluster = n + 1
    stack = [root]
    while stack:
        node = stack.pop()
        cluster = relabel[node]
        # walk down chains where one side is too small
        todo = [node]
        while todo:
            cur = todo.pop()
            if cur < n:
                # singleton falling out of a chain at its merge lambda is
                # handled where the chain was split; a bare point here only
                # happens for n == 1
                continue
            left, right, dist = children[cur]
            lam = 1.0 / dist if dist > 0.0 else np.inf
            left_size = 1 if left < n else int(merges[left - n, 3])
            right_size = 1 if right < n else int(merges[right - n, 3])
            if left_size >= min_cluster_size and right_size >= min_cluster_size:
                for side in (left, right):
                    relabel[side] = next_cluster
                    rows_parent.append(cluster)
                    rows_child.append(next_cluster)
                    rows_lam.append(lam)
                    rows_size.append(left_size if side is left else right_size)
                    next_cluster += 1
                    stack.append(side)
            elif left_size < min_cluster_size and right_size < min_cluster_size:
                for side in (left, right):
                    for point in leaves(side):
                        rows_parent.append(cluster)
                        rows_child.append(point)
                        rows_lam.append(lam)
                        rows_size.append(1)
            else:
                small, big = (left, right) if left_size < min_cluster_size else (right, left)
                for point in leaves(small):
                    rows_parent.append(cluster)
                    rows_child.append(point)
                    rows_lam.append(lam)
                    rows_size.append(1)
                todo.append(big)
    return CondensedTree(
        parent=np.array(rows_parent, dtype=np.int64),
        child=np.array(rows_child, dtype=np.int64),
        lam=np.array(rows_lam),
        size=np.array(rows_size, dtype=np.int64),
        root=n,
    )


def cluster_stability(tree: CondensedTree) -> dict:
    """Excess of mass per condensed cluster: sum over members of
    (lambda at which the member leaves) - (lambda at cluster birth)."""
    births = {tree.root: 0.0}
    for p, c, lam in zip(tree.parent, tree.child, tree.lam):
        if c >= tree.root:
            births[int(c)] = lam
    stability = {int(c): 0.0 for c in births}
    for p, lam, size in zip(tree.parent, tree.lam, tree.size):
        p = int(p)
        birth = births[p]
        lam_capped = lam if np.isfinite(lam) else birth
        stability[p] += (lam_capped - birth) * size if np.isfinite(lam) else 0.0
    # infinite lambdas (duplicate points) contribute nothing finite; treat
    # them as the largest finite lambda in the cluster instead
    finite_max = {}
    for p, lam in zip(tree.parent, tree.lam):
        if np.isfinite(lam):
            finite_max[int(p)] = max(finite_max.get(int(p), 0.0), lam)
    for p, lam, size in zip(tree.parent, tree.lam, tree.size):
        p = int(p)
        if not np.isfinite(lam):
            stability[p] += (finite_max.get(p, births[p]) - births[p]) * size
    return stability


def select_eom(tree: CondensedTree, stability: dict) -> list:
    """Excess-of-mass selection; the root is never selected."""
    cluster_children = {c: [] for c in stability}
    for p, c in zip(tree.parent, tree.child):
        if c >= tree.root:
            cluster_children[int(p)].append(int(c))
    chosen = {}
    best = {}

    for node in sorted(stability, reverse=True):  # children before parents
        kids = cluster_children[node]
        subtree = sum(best[k] for k in kids)
        take_self = node != tree.root and (not kids or stability[node] >= subtree)
        if take_self:
            chosen[node] = [node]
            best[node] = stability[node]
        else:
            chosen[node] = [c for k in kids for c in chosen[k]]
            best[node] = subtree
    return sorted(chosen[tree.root])


def hdbscan(points: ReducedMatrix, config) -> ClusterAssignment:
    """Cluster reduced coordinates; outliers get label -1.

    Cluster numbers are assigned by decreasing cluster size, 0-based, ties
    broken by the smallest member row id.
    """
    cfg = config.hdbscan
    x = np.asarray(points.data, dtype=np.float64)
    n = x.shape[0]
    if not np.isfinite(x).all():
        raise ValueError("non-finite input coordinates")
    if n < cfg.min_cluster_size:
        raise ValueError(
            f"{n} points cannot form clusters of size >= {cfg.min_cluster_size}"
        )

    core = core_distances(x, cfg.min_samples)
    edges = mutual_reachability_mst(x, core)
    merges = single_linkage(edges, n)
    tree = condense_tree(merges, n, cfg.min_cluster_size)
    stability = cluster_stability(tree)
    selected = select_eom(tree, stability)

    # map each selected cluster to the condensed subtree it owns
    cluster_children = {c: [] for c in stability}
    for p, c in zip(tree.parent, tree.child):
        if c >= tree.root:
            cluster_children[int(p)].append(int(c))

    def subtree(node):
        out, stack = [], [node]
        while stack:
            cur = stack.pop()
            out.append(cur)
            stack.extend(cluster_children[cur])
        return out

    point_rows = tree.child < tree.root
    point_parent = tree.parent[point_rows]
    point_id = tree.child[point_rows]
    point_lam = tree.lam[point_rows]

    labels = np.full(n, -1, dtype=np.int64)
    lam_of_point = np.zeros(n)
    owner = {}  # condensed cluster -> selected cluster
    for sel in selected:
        for node in subtree(sel):
            owner[node] = sel
    for parent, pid, lam in zip(point_parent, point_id, point_lam):
        sel = owner.get(int(parent))
        if sel is not None:
            labels[pid] = sel
            lam_of_point[pid] = lam

    # strengths: lambda_point / max finite lambda within the cluster
    strengths = np.zeros(n)
    for sel in selected:
        members = labels == sel
        lams = lam_of_point[members]
        finite = lams[np.isfinite(lams)]
        lam_max = finite.max() if finite.size else np.inf
        vals = np.where(np.isfinite(lams), lams / lam_max if lam_max > 0 else 1.0, 1.0)
        strengths[members] = np.clip(vals, 0.0, 1.0)

    # renumber by decreasing size, ties by smallest member row id
    order = []
    for sel in selected:
        members = np.where(labels == sel)[0]
        smallest = min(points.ids[m] for m in members)
        order.append((-len(members), smallest, sel))
    order.sort()
    number_of = {sel: i for i, (_, _, sel) in enumerate(order)}
    final = np.full(n, -1, dtype=np.int64)
    for sel, num in number_of.items():
        final[labels == sel] = num

    # exemplars: per selected cluster, leaf condensed nodes' max-lambda points
    exemplars = {}
    sizes = {}
    for sel in selected:
        nodes = subtree(sel)
        leaf_nodes = [nd for nd in nodes if not cluster_children[nd]]
        pts = []
        for leaf in leaf_nodes:
            mask = point_parent == leaf
            if not mask.any():
                continue
            lams = point_lam[mask]
            pids = point_id[mask]
            finite = lams[np.isfinite(lams)]
            peak = finite.max() if finite.size else np.inf
            keep = lams >= peak
            pts.extend(int(p) for p in pids[keep])
        exemplars[number_of[sel]] = x[sorted(pts)]
        sizes[number_of[sel]] = int((final == number_of[sel]).sum())

    outlier_fraction = float((final == -1).sum()) / n
    return ClusterAssignment(
        ids=list(points.ids),
        labels=final,
        strengths=strengths,
        cluster_count=len(selected),
        outlier_fraction=outlier_fraction,
        exemplars=exemplars,
        condensed=tree,
        cluster_sizes=sizes,
    )


def soft_memberships(points: ReducedMatrix, assignment: ClusterAssignment,
                     top_k: int, floor: float = 0.0) -> dict:
    """Soft topic probabilities for every document, outliers included.

    Distance to each cluster's exemplar set, softmax over negative
    distances (temperature 1), entries below ``floor`` dropped, truncated
    to ``top_k`` and renormalized. For non-outlier documents the assigned
    cluster is guaranteed to carry the maximum probability.
    """
    if top_k < 1:
        raise ValueError("top_k must be >= 1")
    x = np.asarray(points.data, dtype=np.float64)
    numbers = sorted(assignment.exemplars)
    if not numbers:
        return {pid: [] for pid in points.ids}
    dists = np.empty((x.shape[0], len(numbers)))
    for col, num in enumerate(numbers):
        ex = assignment.exemplars[num]
        d2 = ((x[:, None, :] - ex[None, :, :]) ** 2).sum(axis=2)
        dists[:, col] = np.sqrt(d2.min(axis=1))

    table = {}
    for i, pid in enumerate(points.ids):
        z = -dists[i]
        z = z - z.max()
        probs = np.exp(z)
        probs /= probs.sum()
        label = int(assignment.labels[i])
        if label != -1:
            col = numbers.index(label)
            top = int(np.argmax(probs))
            if top != col:
                probs[col], probs[top] = probs[top], probs[col]
        entries = sorted(
            zip(numbers, probs), key=lambda t: (-t[1], t[0])
        )
        kept = [(num, p) for num, p in entries if p >= floor]
        if not kept:
            kept = entries[:1]
        if label != -1 and label not in [num for num, _ in kept]:
            kept.append((label, dict(entries)[label]))
            kept.sort(key=lambda t: (-t[1], t[0]))
        kept = kept[:top_k]
        total = sum(p for _, p in kept)
        table[pid] = [(num, p / total) for num, p in kept]
    return table
