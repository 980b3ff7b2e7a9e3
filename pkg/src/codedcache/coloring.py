"""Injective arc colorings: closed-form partition rules, generic colorers and verifiers.

Two arcs ``(x1, y1)`` and ``(x2, y2)`` may share a color only when their
tails differ, their heads differ, and neither ``(x1, y2)`` nor ``(x2, y1)``
is an arc. That is exactly what turning the coloring into a PDA requires.
"""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .core import ArcColoring, ClassKey, Digraph, group_by_value, off_diagonal_pairs, support
from .digraphs import HammingFamilyParams, _check_guardrail, build_unitary_cayley_digraph, factorize

log = logging.getLogger(__name__)

__all__ = [
    "InjectivityReport",
    "MergeClass",
    "StrongEdgeReport",
    "cayley_strong_color",
    "exact_min_injective_color",
    "find_injective_coloring",
    "greedy_injective_color",
    "greedy_vertex_color",
    "merged_color_binary",
    "partition_color",
    "support",
    "verify_injective",
    "verify_strong_edge",
]


@dataclass
class Violation:
    arc1: tuple[int, int]
    arc2: tuple[int, int]
    reason: str  # sameRow | sameColumn | crossArcExists


@dataclass
class InjectivityReport:
    violations: list[Violation] = field(default_factory=list)
    truncated: bool = False

    @property
    def passed(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.passed


@dataclass(frozen=True)
class MergeClass:
    """Head patterns ``t`` whose partition classes (for one ``e``) share a color."""

    e: tuple[int, ...]
    member_ts: tuple[tuple[int, ...], ...]


def _mixed_index(digits: np.ndarray, radices: Sequence[int]) -> np.ndarray:
    out = np.zeros(digits.shape[0], dtype=np.int64)
    for j, r in enumerate(radices):
        out = out * r + digits[:, j]
    return out


def _hamming_arcs_by_e(params: HammingFamilyParams):
    """Yield ``(e, tails, heads, head_digits)`` for every difference vector in canonical order."""
    spec = params.spec
    digits = spec.digits()
    radices = np.array(spec.radices, dtype=np.int64)
    place = np.array(spec.place_values, dtype=np.int64)
    tails = np.arange(spec.vertex_count, dtype=np.int64)
    for e in params.difference_vectors:
        ydig = (digits - np.array(e)) % radices
        yield e, tails, ydig @ place, ydig


def partition_color(params: HammingFamilyParams, allow_large: bool = False) -> ArcColoring:
    """One color per nonempty class ``{(x, y) : x - y = e, y restricted to supp(e) = t}``.

    Colors follow the lexicographic order of ``(e, t)``.
    """
    _check_guardrail(params.K, allow_large)
    radices = params.spec.radices
    all_t, all_h, all_c, labels = [], [], [], []
    offset = 0
    for e, tails, heads, ydig in _hamming_arcs_by_e(params):
        supp = support(e)
        sub_radices = [radices[j] for j in supp]
        t_index = _mixed_index(ydig[:, list(supp)], sub_radices)
        n_t = math.prod(sub_radices)
        all_t.append(tails)
        all_h.append(heads)
        all_c.append(offset + t_index)
        labels.extend(ClassKey(e, t) for t in itertools.product(*(range(r) for r in sub_radices)))
        offset += n_t
    return ArcColoring(
        np.concatenate(all_t),
        np.concatenate(all_h),
        np.concatenate(all_c),
        offset,
        labels=tuple(labels),
        method="partition",
    )


def greedy_vertex_color(adjacency: Sequence[Iterable[int]]) -> list[list[int]]:
    """First-fit coloring of vertices ``0..n-1`` in index order; returns color classes.

    Uses at most ``1 + max degree`` colors.
    """
    n = len(adjacency)
    color = [-1] * n
    for v in range(n):
        taken = {color[u] for u in adjacency[v] if color[u] >= 0}
        c = 0
        while c in taken:
            c += 1
        color[v] = c
    classes: list[list[int]] = [[] for _ in range(max(color, default=-1) + 1)]
    for v, c in enumerate(color):
        classes[c].append(v)
    return classes


def binary_merge_groups(n0: int, w: int) -> list[tuple[tuple[int, ...], ...]]:
    """Groups of t-vectors in ``{0,1}^w`` with pairwise distance at least ``n0 - w + 1``."""
    ts = list(itertools.product((0, 1), repeat=w))
    if n0 == 2 * w - 1:
        # complement pairing; t with leading 0 is the representative
        half = len(ts) // 2
        return [(ts[i], tuple(1 - b for b in ts[i])) for i in range(half)]
    radius = n0 - w
    adjacency = [
        [j for j, u in enumerate(ts) if j != i and sum(a != b for a, b in zip(t, u)) <= radius]
        for i, t in enumerate(ts)
    ]
    return [tuple(ts[v] for v in cls) for cls in greedy_vertex_color(adjacency)]


def merged_color_binary(n0: int, w: int) -> ArcColoring:
    """Binary single-block coloring where compatible ``t`` classes of each ``e`` share a color.

    Requires ``w < n0 <= 2w - 1``. For ``n0 = 2w - 1`` classes pair up with
    their complements; otherwise the t-vectors are grouped by first-fit
    coloring of the graph joining patterns at distance ``<= n0 - w``.
    """
    if not (w < n0 <= 2 * w - 1):
        raise ValueError(f"binary merging needs w < n0 <= 2w-1, got n0={n0}, w={w}")
    params = HammingFamilyParams.single_block(n0, w, 2)
    groups = binary_merge_groups(n0, w)
    group_of = np.empty(2**w, dtype=np.int64)
    for gi, members in enumerate(groups):
        for t in members:
            group_of[int("".join(map(str, t)), 2)] = gi
    all_t, all_h, all_c, labels = [], [], [], []
    for k, (e, tails, heads, ydig) in enumerate(_hamming_arcs_by_e(params)):
        supp = list(support(e))
        t_index = _mixed_index(ydig[:, supp], [2] * w)
        all_t.append(tails)
        all_h.append(heads)
        all_c.append(k * len(groups) + group_of[t_index])
        labels.extend(MergeClass(e, members) for members in groups)
    return ArcColoring(
        np.concatenate(all_t),
        np.concatenate(all_h),
        np.concatenate(all_c),
        len(params.difference_vectors) * len(groups),
        labels=tuple(labels),
        method="merged-binary",
    )


def conflict_lists(d: Digraph) -> list[set[int]]:
    """For each arc (canonical order), the arcs that must receive a different color."""
    arcs = d.arcs()
    index = {a: i for i, a in enumerate(arcs)}
    out_n = d.out_neighbors()
    in_n = d.in_neighbors()
    conflicts: list[set[int]] = [set() for _ in arcs]
    for i, (x, y) in enumerate(arcs):
        c = conflicts[i]
        c.update(index[(x, z)] for z in out_n[x])
        c.update(index[(z, y)] for z in in_n[y])
        # (x2, y2) with (x, y2) an arc
        for y2 in out_n[x]:
            c.update(index[(x2, y2)] for x2 in in_n[y2])
        # (x2, y2) with (x2, y) an arc
        for x2 in in_n[y]:
            c.update(index[(x2, y2)] for y2 in out_n[x2])
        c.discard(i)
    return conflicts


def greedy_injective_color(d: Digraph) -> ArcColoring:
    """Lowest feasible color per arc, arcs taken in ``(tail, head)`` order."""
    conflicts = conflict_lists(d)
    colors = [-1] * len(conflicts)
    for i, nbrs in enumerate(conflicts):
        taken = {colors[j] for j in nbrs if colors[j] >= 0}
        c = 0
        while c in taken:
            c += 1
        colors[i] = c
    return ArcColoring(d.tails, d.heads, colors, max(colors, default=-1) + 1, method="greedy")


MAX_EXACT_ARCS = 40


def _color_with(conflicts: list[set[int]], k: int) -> list[int] | None:
    """DSATUR-ordered backtracking: a proper k-coloring of the conflict graph, or None."""
    n = len(conflicts)
    colors = [-1] * n
    degree = [len(c) for c in conflicts]

    def pick() -> int:
        best, best_key = -1, None
        for v in range(n):
            if colors[v] >= 0:
                continue
            sat = len({colors[u] for u in conflicts[v] if colors[u] >= 0})
            key = (sat, degree[v])
            if best_key is None or key > best_key:
                best, best_key = v, key
        return best

    def solve(used: int, remaining: int) -> bool:
        if remaining == 0:
            return True
        v = pick()
        taken = {colors[u] for u in conflicts[v] if colors[u] >= 0}
        # a fresh color is interchangeable with any other fresh one
        for c in range(min(used + 1, k)):
            if c in taken:
                continue
            colors[v] = c
            if solve(max(used, c + 1), remaining - 1):
                return True
        colors[v] = -1
        return False

    return colors if solve(0, n) else None


def find_injective_coloring(d: Digraph, k: int) -> ArcColoring | None:
    """An injective coloring with at most ``k`` colors, or None when none exists."""
    if d.arc_count > MAX_EXACT_ARCS:
        raise ValueError(f"exact search limited to {MAX_EXACT_ARCS} arcs, digraph has {d.arc_count}")
    if d.arc_count == 0:
        return ArcColoring(d.tails, d.heads, [], 0, method="exact")
    colors = _color_with(conflict_lists(d), k)
    if colors is None:
        return None
    return ArcColoring(d.tails, d.heads, colors, max(colors) + 1, method="exact")


def exact_min_injective_color(d: Digraph, max_colors: int) -> int | None:
    """Injective chromatic index of ``d`` if it is at most ``max_colors``, else None."""
    if d.arc_count > MAX_EXACT_ARCS:
        raise ValueError(f"exact search limited to {MAX_EXACT_ARCS} arcs, digraph has {d.arc_count}")
    if d.arc_count == 0:
        return 0
    conflicts = conflict_lists(d)
    for k in range(1, max_colors + 1):
        if _color_with(conflicts, k) is not None:
            return k
    return None


def verify_injective(d: Digraph, c: ArcColoring, max_violations: int | None = 1000) -> InjectivityReport:
    """Check every same-colored arc pair against the shared-row/column and cross-arc rules."""
    colors = c.aligned_to(d)
    report = InjectivityReport()
    tails, heads = d.tails, d.heads
    for g, members in sorted(group_by_value(colors).items()):
        if g < 2:
            continue
        ii, jj = off_diagonal_pairs(g)
        chunk = max(1, 2_000_000 // (g * g))
        # ordered pairs; row/column clashes are reported once per unordered pair
        for start in range(0, members.shape[0], chunk):
            block = members[start : start + chunk]
            a = block[:, ii].reshape(-1)
            b = block[:, jj].reshape(-1)
            lower = np.tile(ii < jj, block.shape[0])
            same_row = (tails[a] == tails[b]) & lower
            same_col = (heads[a] == heads[b]) & lower
            cross = d.has_arcs(tails[a], heads[b])
            for mask, reason in ((same_row, "sameRow"), (same_col, "sameColumn"), (cross, "crossArcExists")):
                for k in np.nonzero(mask)[0]:
                    report.violations.append(
                        Violation(
                            (int(tails[a[k]]), int(heads[a[k]])),
                            (int(tails[b[k]]), int(heads[b[k]])),
                            reason,
                        )
                    )
                    if max_violations is not None and len(report.violations) >= max_violations:
                        report.truncated = True
                        return report
    return report


@dataclass
class StrongEdgeReport:
    violations: list[tuple[tuple[int, int], tuple[int, int], str]] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.passed


def verify_strong_edge(edges, colors=None, max_violations: int | None = 1000) -> StrongEdgeReport:
    """Same-colored edges must be vertex-disjoint and joined by no edge.

    Accepts ``{(u, v): color}`` or an ``(E, 2)`` edge array with aligned colors.
    """
    if colors is None:
        items = list(edges.items())
        edges = [e for e, _ in items]
        colors = [c for _, c in items]
    E = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    colors = np.asarray(colors, dtype=np.int64)
    lo, hi = E.min(axis=1), E.max(axis=1)
    n = int(E.max()) + 1 if E.size else 0
    keys = np.unique(lo * n + hi)

    def adjacent(a, b):
        k = np.minimum(a, b) * n + np.maximum(a, b)
        i = np.minimum(np.searchsorted(keys, k), keys.size - 1)
        return keys[i] == k

    report = StrongEdgeReport()
    for g, members in sorted(group_by_value(colors).items()):
        if g < 2:
            continue
        ii, jj = np.triu_indices(g, 1)
        a1, b1 = lo[members[:, ii]], hi[members[:, ii]]
        a2, b2 = lo[members[:, jj]], hi[members[:, jj]]
        shared = (a1 == a2) | (a1 == b2) | (b1 == a2) | (b1 == b2)
        joined = adjacent(a1, a2) | adjacent(a1, b2) | adjacent(b1, a2) | adjacent(b1, b2)
        for mask, reason in ((shared, "sharedEndpoint"), (joined & ~shared, "joinedByEdge")):
            for r, c in zip(*np.nonzero(mask)):
                report.violations.append(
                    ((int(a1[r, c]), int(b1[r, c])), (int(a2[r, c]), int(b2[r, c])), reason)
                )
                if max_violations is not None and len(report.violations) >= max_violations:
                    return report
    return report


def cayley_edges(n: int) -> np.ndarray:
    """Edges ``(i, j)``, ``i < j``, of the unitary Cayley graph on ``Z_n``."""
    units = np.array([s for s in range(1, n) if math.gcd(s, n) == 1], dtype=np.int64)
    i = np.repeat(np.arange(n, dtype=np.int64), units.size)
    j = (i + np.tile(units, n)) % n
    keep = i < j
    return np.stack([i[keep], j[keep]], axis=1)


def residue_pair_labels(n: int, edges: np.ndarray) -> np.ndarray:
    """Integer code of the tuple of unordered residue pairs ``{i mod q, j mod q}`` per prime power q."""
    code = np.zeros(edges.shape[0], dtype=np.int64)
    for p, e in factorize(n):
        q = p**e
        a, b = edges[:, 0] % q, edges[:, 1] % q
        code = code * (q * q) + np.minimum(a, b) * q + np.maximum(a, b)
    return code


def cayley_strong_color(n: int) -> ArcColoring:
    """Strong edge coloring of the unitary Cayley graph, lifted to both arc directions.

    Each edge ``{i, j}`` is labeled by its unordered residue pairs modulo each
    prime-power factor of ``n``. The labeling is accepted only if the strong
    edge verifier passes; otherwise the digraph is colored greedily.
    """
    edges = cayley_edges(n)
    keys, colors = np.unique(residue_pair_labels(n, edges), return_inverse=True)
    if verify_strong_edge(edges, colors, max_violations=1).passed:
        return ArcColoring(
            np.r_[edges[:, 0], edges[:, 1]],
            np.r_[edges[:, 1], edges[:, 0]],
            np.r_[colors, colors],
            int(keys.size),
            labels=tuple(int(k) for k in keys),
            method="cayley-crt",
        )
    log.warning("residue-pair coloring failed verification for n=%d; falling back to greedy", n)
    d, _ = build_unitary_cayley_digraph(n)
    fallback = greedy_injective_color(d)
    fallback.method = "cayley-greedy-fallback"
    return fallback
