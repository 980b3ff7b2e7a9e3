"""Shared value types: mixed-radix vertex labels, digraphs, arc colorings and PDAs."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

STAR = -1

# Constructions refuse more vertices than this unless explicitly overridden.
MAX_VERTICES = 2**20


@dataclass(frozen=True)
class RadixSpec:
    """Blocks of coordinates; block ``b`` holds ``length`` digits in ``Z_radix``.

    Block 0 is the most significant block and, inside a block, the first
    digit is the most significant one.
    """

    blocks: tuple[tuple[int, int], ...]

    def __post_init__(self):
        blocks = tuple((int(p), int(n)) for p, n in self.blocks)
        object.__setattr__(self, "blocks", blocks)
        if not blocks:
            raise ValueError("a radix spec needs at least one block")
        for p, n in blocks:
            if p < 2:
                raise ValueError(f"radix {p} must be at least 2")
            if n < 1:
                raise ValueError(f"block length {n} must be at least 1")
        radices = [p for p, _ in blocks]
        if len(set(radices)) != len(radices):
            raise ValueError(f"radices must be pairwise distinct, got {radices}")

    @classmethod
    def parse(cls, text: str) -> "RadixSpec":
        """Parse the ``p:n,p:n`` flag grammar, e.g. ``2:2,3:1``."""
        blocks = []
        for chunk in text.split(","):
            chunk = chunk.strip()
            if not chunk:
                continue
            try:
                p, n = chunk.split(":")
                blocks.append((int(p), int(n)))
            except ValueError:
                raise ValueError(f"bad radix block {chunk!r}; expected p:n") from None
        return cls(tuple(blocks))

    def __str__(self) -> str:
        return ",".join(f"{p}:{n}" for p, n in self.blocks)

    @property
    def m(self) -> int:
        return len(self.blocks)

    @property
    def length(self) -> int:
        return sum(n for _, n in self.blocks)

    @cached_property
    def radices(self) -> tuple[int, ...]:
        """Radix of every coordinate, block-aligned."""
        return tuple(p for p, n in self.blocks for _ in range(n))

    @cached_property
    def block_of(self) -> tuple[int, ...]:
        return tuple(b for b, (_, n) in enumerate(self.blocks) for _ in range(n))

    @property
    def vertex_count(self) -> int:
        out = 1
        for p, n in self.blocks:
            out *= p**n
        return out

    @cached_property
    def place_values(self) -> tuple[int, ...]:
        values = []
        acc = 1
        for r in reversed(self.radices):
            values.append(acc)
            acc *= r
        return tuple(reversed(values))

    def digits(self) -> np.ndarray:
        """All vertices as a ``(K, L)`` digit table in index order."""
        K = self.vertex_count
        idx = np.arange(K, dtype=np.int64)
        out = np.empty((K, self.length), dtype=np.int64)
        for j, (r, pv) in enumerate(zip(self.radices, self.place_values)):
            out[:, j] = (idx // pv) % r
        return out


Vertex = tuple[int, ...]


def index_to_vertex(spec: RadixSpec, index: int) -> Vertex:
    if not 0 <= index < spec.vertex_count:
        raise IndexError(f"vertex index {index} out of range [0, {spec.vertex_count})")
    coords = []
    for r, pv in zip(spec.radices, spec.place_values):
        coords.append((index // pv) % r)
    return tuple(coords)


def vertex_to_index(spec: RadixSpec, vertex: Sequence[int]) -> int:
    _check_vertex(spec, vertex)
    return sum(int(x) * pv for x, pv in zip(vertex, spec.place_values))


def _check_vertex(spec: RadixSpec, vertex: Sequence[int]) -> None:
    if len(vertex) != spec.length:
        raise ValueError(f"vertex {tuple(vertex)} has length {len(vertex)}, expected {spec.length}")
    for j, (x, r) in enumerate(zip(vertex, spec.radices)):
        if not 0 <= x < r:
            raise ValueError(f"coordinate {j} of {tuple(vertex)} not in Z_{r}")


def hamming_distance(x: Sequence[int], y: Sequence[int]) -> int:
    if len(x) != len(y):
        raise ValueError(f"length mismatch: {len(x)} vs {len(y)}")
    return sum(1 for a, b in zip(x, y) if a != b)


def block_subtract(spec: RadixSpec, x: Sequence[int], y: Sequence[int]) -> Vertex:
    """Coordinate-wise ``x - y`` reduced modulo the radix of each coordinate's block."""
    _check_vertex(spec, x)
    _check_vertex(spec, y)
    return tuple((a - b) % r for a, b, r in zip(x, y, spec.radices))


def support(e: Sequence[int]) -> tuple[int, ...]:
    """Ascending positions where ``e`` is nonzero."""
    return tuple(j for j, v in enumerate(e) if v != 0)


@dataclass(frozen=True, order=True)
class ClassKey:
    """Key ``(e, t)`` of one partition class: difference vector and head restricted to its support."""

    e: tuple[int, ...]
    t: tuple[int, ...]

    @property
    def support(self) -> tuple[int, ...]:
        return support(self.e)


class Digraph:
    """Simple digraph on vertices ``0..K-1``.

    Arcs are kept as two parallel arrays sorted by ``(tail, head)``; membership
    queries go through the sorted ``tail * K + head`` keys.
    """

    def __init__(self, vertex_count: int, tails, heads, spec: RadixSpec | None = None):
        K = int(vertex_count)
        tails = np.asarray(tails, dtype=np.int64).reshape(-1)
        heads = np.asarray(heads, dtype=np.int64).reshape(-1)
        if tails.shape != heads.shape:
            raise ValueError("tails and heads must have equal length")
        if tails.size and (tails.min() < 0 or heads.min() < 0 or tails.max() >= K or heads.max() >= K):
            raise ValueError("arc endpoint out of range")
        keys = np.unique(tails * K + heads)
        self.vertex_count = K
        self.keys = keys
        self.tails = keys // K if K else keys
        self.heads = keys % K if K else keys
        self.spec = spec
        self.tails.flags.writeable = False
        self.heads.flags.writeable = False
        self.keys.flags.writeable = False

    @classmethod
    def from_arcs(cls, vertex_count: int, arcs: Iterable[tuple[int, int]], spec=None) -> "Digraph":
        arcs = list(arcs)
        tails = [a for a, _ in arcs]
        heads = [b for _, b in arcs]
        return cls(vertex_count, tails, heads, spec=spec)

    @property
    def arc_count(self) -> int:
        return int(self.keys.size)

    def __len__(self) -> int:
        return self.arc_count

    def arcs(self) -> list[tuple[int, int]]:
        return list(zip(self.tails.tolist(), self.heads.tolist()))

    def has_arc(self, u: int, v: int) -> bool:
        if not (0 <= u < self.vertex_count and 0 <= v < self.vertex_count):
            return False
        key = u * self.vertex_count + v
        i = np.searchsorted(self.keys, key)
        return bool(i < self.keys.size and self.keys[i] == key)

    def has_arcs(self, us, vs) -> np.ndarray:
        """Vectorized membership test for arcs ``(us[i], vs[i])``."""
        keys = np.asarray(us, dtype=np.int64) * self.vertex_count + np.asarray(vs, dtype=np.int64)
        if self.keys.size == 0:
            return np.zeros(keys.shape, dtype=bool)
        i = np.searchsorted(self.keys, keys)
        i = np.minimum(i, self.keys.size - 1)
        return self.keys[i] == keys

    def arc_indices(self, us, vs) -> np.ndarray:
        """Positions of the given arcs in the canonical arc order; -1 where absent."""
        keys = np.asarray(us, dtype=np.int64) * self.vertex_count + np.asarray(vs, dtype=np.int64)
        i = np.searchsorted(self.keys, keys)
        i_c = np.minimum(i, max(self.keys.size - 1, 0))
        hit = (self.keys[i_c] == keys) if self.keys.size else np.zeros(keys.shape, bool)
        return np.where(hit, i_c, -1)

    def out_degrees(self) -> np.ndarray:
        return np.bincount(self.tails, minlength=self.vertex_count)

    def in_degrees(self) -> np.ndarray:
        return np.bincount(self.heads, minlength=self.vertex_count)

    def out_neighbors(self) -> list[list[int]]:
        nbrs: list[list[int]] = [[] for _ in range(self.vertex_count)]
        for u, v in self.arcs():
            nbrs[u].append(v)
        return nbrs

    def in_neighbors(self) -> list[list[int]]:
        nbrs: list[list[int]] = [[] for _ in range(self.vertex_count)]
        for u, v in self.arcs():
            nbrs[v].append(u)
        return nbrs

    def label(self, v: int):
        """Human-facing vertex label: the mixed-radix vector when a spec is attached."""
        if self.spec is None:
            return v
        return index_to_vertex(self.spec, v)

    def __repr__(self) -> str:
        return f"Digraph(K={self.vertex_count}, arcs={self.arc_count})"


@dataclass(eq=False)
class ArcColoring:
    """Colors ``0..S-1`` assigned to arcs given as parallel ``tails``/``heads`` arrays.

    ``labels[s]`` optionally describes color ``s`` (a ClassKey, a MergeClass,
    a tuple of residue pairs, ...).
    """

    tails: np.ndarray
    heads: np.ndarray
    colors: np.ndarray
    color_count: int
    labels: tuple | None = None
    method: str = ""

    def __post_init__(self):
        self.tails = np.asarray(self.tails, dtype=np.int64)
        self.heads = np.asarray(self.heads, dtype=np.int64)
        self.colors = np.asarray(self.colors, dtype=np.int64)
        if not (self.tails.shape == self.heads.shape == self.colors.shape):
            raise ValueError("tails, heads and colors must align")
        if self.colors.size:
            if self.colors.min() < 0 or self.colors.max() >= self.color_count:
                raise ValueError(f"colors must lie in [0, {self.color_count - 1}]")
        used = np.unique(self.colors).size
        if used != self.color_count:
            raise ValueError(f"{self.color_count} colors declared but {used} used")
        if self.labels is not None and len(self.labels) != self.color_count:
            raise ValueError("one label per color required")

    @classmethod
    def from_mapping(cls, mapping: dict[tuple[int, int], int], method: str = "") -> "ArcColoring":
        """Build from ``{(tail, head): color}``; colors are renumbered densely in first-use order."""
        items = sorted(mapping.items())
        renum: dict[int, int] = {}
        for _, c in items:
            renum.setdefault(c, len(renum))
        return cls(
            tails=[a for (a, _), _ in items],
            heads=[b for (_, b), _ in items],
            colors=[renum[c] for _, c in items],
            color_count=len(renum),
            method=method,
        )

    @property
    def S(self) -> int:
        return self.color_count

    def as_dict(self) -> dict[tuple[int, int], int]:
        return {(int(a), int(b)): int(c) for a, b, c in zip(self.tails, self.heads, self.colors)}

    def color_of(self, tail: int, head: int) -> int:
        hit = np.nonzero((self.tails == tail) & (self.heads == head))[0]
        if hit.size == 0:
            raise KeyError((tail, head))
        return int(self.colors[hit[0]])

    def classes(self) -> list[list[tuple[int, int]]]:
        out: list[list[tuple[int, int]]] = [[] for _ in range(self.color_count)]
        for a, b, c in zip(self.tails.tolist(), self.heads.tolist(), self.colors.tolist()):
            out[c].append((a, b))
        return out

    def aligned_to(self, d: Digraph) -> np.ndarray:
        """Colors reordered into ``d``'s canonical arc order; raises on any arc mismatch."""
        if self.colors.size != d.arc_count:
            raise ValueError(f"coloring covers {self.colors.size} arcs, digraph has {d.arc_count}")
        pos = d.arc_indices(self.tails, self.heads)
        if (pos < 0).any():
            i = int(np.nonzero(pos < 0)[0][0])
            raise ValueError(f"colored pair ({self.tails[i]}, {self.heads[i]}) is not an arc")
        out = np.full(d.arc_count, -1, dtype=np.int64)
        out[pos] = self.colors
        if (out < 0).any():
            raise ValueError("coloring repeats an arc")
        return out


def group_by_value(values: np.ndarray) -> dict[int, np.ndarray]:
    """Group positions of equal non-negative values.

    Returns ``{size: M}`` where each row of ``M`` lists the positions holding
    one value, for every value that occurs exactly ``size`` times.
    """
    values = np.asarray(values).reshape(-1)
    pos = np.nonzero(values >= 0)[0]
    if pos.size == 0:
        return {}
    order = pos[np.argsort(values[pos], kind="stable")]
    sorted_vals = values[order]
    starts = np.flatnonzero(np.r_[True, sorted_vals[1:] != sorted_vals[:-1]])
    sizes = np.diff(np.r_[starts, sorted_vals.size])
    groups: dict[int, np.ndarray] = {}
    for g in np.unique(sizes):
        st = starts[sizes == g]
        groups[int(g)] = order[st[:, None] + np.arange(g)[None, :]]
    return groups


def off_diagonal_pairs(g: int) -> tuple[np.ndarray, np.ndarray]:
    ii, jj = np.nonzero(~np.eye(g, dtype=bool))
    return ii, jj


PAIR_BUDGET = 1 << 22


def pair_blocks(members: np.ndarray, ii: np.ndarray, jj: np.ndarray, budget: int = PAIR_BUDGET):
    """Yield ``(members_block, ii, jj)`` covering every group row and pair, at most ``budget`` pairs each."""
    per = max(1, budget // max(1, ii.size))
    width = max(1, budget)
    for r0 in range(0, members.shape[0], per):
        block = members[r0 : r0 + per]
        for p0 in range(0, ii.size, width):
            yield block, ii[p0 : p0 + width], jj[p0 : p0 + width]


class PdaArray:
    """An ``F x K`` array over ``{*} U [0, S-1]``; stars are stored as ``STAR`` (-1)."""

    def __init__(self, cells, S: int | None = None, Z: int | None = None):
        cells = np.array(cells, dtype=np.int64)
        if cells.ndim != 2:
            raise ValueError("PDA cells must form a 2-D grid")
        self.cells = cells
        self.cells.flags.writeable = False
        if S is None:
            S = int(cells.max()) + 1 if (cells >= 0).any() else 0
        if Z is None:
            Z = int((cells[:, 0] == STAR).sum()) if cells.shape[1] else 0
        self.S = int(S)
        self.Z = int(Z)

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence], S=None, Z=None) -> "PdaArray":
        """Rows may mix ints with ``'*'`` / ``None`` for stars."""
        grid = [[STAR if (c == "*" or c is None) else int(c) for c in row] for row in rows]
        return cls(grid, S=S, Z=Z)

    @property
    def F(self) -> int:
        return self.cells.shape[0]

    @property
    def K(self) -> int:
        return self.cells.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.cells.shape

    def is_star(self) -> np.ndarray:
        return self.cells == STAR

    def params(self) -> "SchemeParams":
        return SchemeParams(self.K, self.F, self.Z, self.S)

    @cached_property
    def value_groups(self) -> dict[int, np.ndarray]:
        """Flat cell indices of each integer, grouped by occurrence count."""
        return group_by_value(self.cells.reshape(-1))

    def with_cells(self, cells, S=None, Z=None) -> "PdaArray":
        return PdaArray(cells, S=self.S if S is None else S, Z=self.Z if Z is None else Z)

    def rows(self) -> list[list]:
        return [["*" if c == STAR else int(c) for c in row] for row in self.cells.tolist()]

    def __eq__(self, other) -> bool:
        if not isinstance(other, PdaArray):
            return NotImplemented
        return (self.S, self.Z) == (other.S, other.Z) and np.array_equal(self.cells, other.cells)

    def __repr__(self) -> str:
        return f"PdaArray(K={self.K}, F={self.F}, Z={self.Z}, S={self.S})"


@dataclass(frozen=True)
class SchemeParams:
    K: int
    F: int
    Z: int
    S: int

    def __post_init__(self):
        if not 0 < self.Z < self.F:
            raise ValueError(f"need 0 < Z < F, got Z={self.Z}, F={self.F}")
        if self.S < 1 or self.K < 1:
            raise ValueError("K and S must be positive")

    @property
    def memory_ratio(self) -> Fraction:
        return Fraction(self.Z, self.F)

    @property
    def rate(self) -> Fraction:
        return Fraction(self.S, self.F)

    def as_tuple(self) -> tuple[int, int, int, int]:
        return (self.K, self.F, self.Z, self.S)


@dataclass
class Witness:
    """Generic failure witness carried by audit/verification reports."""

    kind: str
    where: tuple
    detail: str = ""


@dataclass
class AuditReport:
    passed: bool
    loop_free: bool
    reverse_closed: bool
    regular: bool
    degree: int | None
    witnesses: list[Witness] = field(default_factory=list)

    def __bool__(self) -> bool:
        return self.passed
