"""Placement delivery arrays: construction from colored digraphs, verification, text I/O."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from math import comb

import numpy as np

from .coloring import verify_injective
from .core import STAR, ArcColoring, Digraph, PdaArray, off_diagonal_pairs, pair_blocks
from .digraphs import audit_digraph

# Dense F x K arrays above this many cells are refused unless overridden.
MAX_CELLS = 1 << 26


class PdaError(ValueError):
    pass


def pda_from_coloring(d: Digraph, c: ArcColoring, allow_large: bool = False) -> PdaArray:
    """Square array with the arc color at ``(tail, head)`` and a star wherever there is no arc."""
    K = d.vertex_count
    if K * K > MAX_CELLS and not allow_large:
        raise PdaError(f"a {K}x{K} array exceeds the {MAX_CELLS}-cell guardrail")
    audit = audit_digraph(d)
    if not audit.passed:
        raise PdaError(f"digraph is not a reverse-closed loop-free regular digraph: {audit.witnesses[0].detail}")
    report = verify_injective(d, c, max_violations=1)
    if not report.passed:
        v = report.violations[0]
        raise PdaError(f"coloring is not injective: {v.arc1} and {v.arc2} ({v.reason})")
    cells = np.full((K, K), STAR, dtype=np.int64)
    cells[d.tails, d.heads] = c.aligned_to(d)
    return PdaArray(cells, S=c.color_count, Z=K - (audit.degree or 0))


@dataclass
class PdaFailure:
    condition: str  # C1 | C2 | C3a | C3b | alphabet
    witness: tuple
    detail: str


@dataclass
class PdaReport:
    K: int
    F: int
    Z: int
    S: int
    failures: list[PdaFailure] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures

    def __bool__(self) -> bool:
        return self.passed

    def failed(self, condition: str) -> list[PdaFailure]:
        return [f for f in self.failures if f.condition == condition]

    def summary(self) -> str:
        if self.passed:
            return f"PASS ({self.K},{self.F},{self.Z},{self.S}) PDA"
        f = self.failures[0]
        return f"FAIL {f.condition}: {f.detail}"


def verify_pda(p: PdaArray, max_failures: int = 100) -> PdaReport:
    """Check C1 (stars per column), C2 (all integers used) and C3 (same-integer 2x2 rule)."""
    cells = p.cells
    F, K = cells.shape
    report = PdaReport(K, F, p.Z, p.S)

    def add(cond, witness, detail) -> bool:
        report.failures.append(PdaFailure(cond, witness, detail))
        return len(report.failures) >= max_failures

    bad = np.argwhere((cells < STAR) | (cells >= p.S))
    for r, c in bad[:max_failures]:
        if add("alphabet", ((int(r), int(c)),), f"cell ({r},{c}) = {cells[r, c]} not in [0,{p.S - 1}] or *"):
            return report

    stars = (cells == STAR).sum(axis=0)
    for col in np.nonzero(stars != p.Z)[0]:
        if add("C1", (int(col),), f"column {col} has {stars[col]} stars, expected {p.Z}"):
            return report

    present = np.zeros(max(p.S, 0), dtype=bool)
    vals = cells[(cells >= 0) & (cells < p.S)]
    present[vals] = True
    for s in np.nonzero(~present)[0]:
        if add("C2", (int(s),), f"integer {s} never appears"):
            return report

    for g, members in sorted(p.value_groups.items()):
        if g < 2:
            continue
        ii, jj = off_diagonal_pairs(g)
        lower = ii < jj
        for block, bi, bj in pair_blocks(members, ii[lower], jj[lower]):
            rows, cols = block // K, block % K
            r1, r2 = rows[:, bi], rows[:, bj]
            c1, c2 = cols[:, bi], cols[:, bj]
            clash = (r1 == r2) | (c1 == c2)
            for n, k in zip(*np.nonzero(clash)):
                a, b = (int(r1[n, k]), int(c1[n, k])), (int(r2[n, k]), int(c2[n, k]))
                where = "row" if a[0] == b[0] else "column"
                if add("C3a", (a, b), f"integer {cells[a]} repeats in {where}: cells {a} and {b}"):
                    return report
            cross = (cells[r1, c2] != STAR) | (cells[r2, c1] != STAR)
            for n, k in zip(*np.nonzero(cross & ~clash)):
                a, b = (int(r1[n, k]), int(c1[n, k])), (int(r2[n, k]), int(c2[n, k]))
                if add("C3b", (a, b), f"cells {a} and {b} hold {cells[a]} but a cross cell is not *"):
                    return report
    return report


def mn_pda(K: int, t: int) -> PdaArray:
    """Subset-indexed baseline: rows are t-subsets, ``(T, k)`` holds the rank of ``T | {k}``."""
    if not 1 <= t < K:
        raise ValueError(f"MN array needs 1 <= t < K, got K={K}, t={t}")
    rows = list(itertools.combinations(range(K), t))
    rank = {s: i for i, s in enumerate(itertools.combinations(range(K), t + 1))}
    cells = np.full((len(rows), K), STAR, dtype=np.int64)
    for i, T in enumerate(rows):
        for k in range(K):
            if k not in T:
                cells[i, k] = rank[tuple(sorted(T + (k,)))]
    return PdaArray(cells, S=comb(K, t + 1), Z=comb(K - 1, t - 1))


def useful_star_mask(p: PdaArray) -> np.ndarray:
    """True at every star that is a cross cell of some same-integer pair."""
    F, K = p.shape
    useful = np.zeros((F, K), dtype=bool)
    for g, members in p.value_groups.items():
        if g < 2:
            continue
        for block, ii, jj in pair_blocks(members, *off_diagonal_pairs(g)):
            rows, cols = block // K, block % K
            useful[rows[:, ii], cols[:, jj]] = True
    return useful & p.is_star()


@dataclass
class UselessStarReport:
    per_column: tuple[int, ...]
    mask: np.ndarray  # True at useless stars

    @property
    def uniform(self) -> bool:
        return len(set(self.per_column)) <= 1

    @property
    def z_prime(self) -> int | None:
        return self.per_column[0] if self.uniform and self.per_column else None


def useless_stars(p: PdaArray) -> UselessStarReport:
    """Stars that belong to no same-integer 2x2 subarray, counted per column."""
    report = verify_pda(p, max_failures=1)
    if not report.passed:
        raise PdaError(f"not a valid PDA: {report.summary()}")
    mask = p.is_star() & ~useful_star_mask(p)
    return UselessStarReport(tuple(int(x) for x in mask.sum(axis=0)), mask)


def drop_useless_stars(p: PdaArray, report: UselessStarReport) -> np.ndarray:
    """Cells with useless stars blanked to -2; used to re-check C3 on what remains."""
    cells = p.cells.copy()
    cells[report.mask] = -2
    return cells


def c3_holds(cells: np.ndarray) -> bool:
    """C3 alone on a raw grid where any negative value is a non-integer."""
    F, K = cells.shape
    tmp = PdaArray(np.where(cells < 0, STAR, cells))
    for g, members in tmp.value_groups.items():
        if g < 2:
            continue
        for block, ii, jj in pair_blocks(members, *off_diagonal_pairs(g)):
            rows, cols = block // K, block % K
            if (rows[:, ii] == rows[:, jj]).any() or (cols[:, ii] == cols[:, jj]).any():
                return False
            if (cells[rows[:, ii], cols[:, jj]] != STAR).any():
                return False
    return True


def equivalent(p: PdaArray, q: PdaArray) -> bool:
    """Whether ``q`` is ``p`` with rows permuted, columns permuted and integers relabeled.

    Brute force over column permutations with row matching by backtracking;
    meant for small arrays such as printed examples.
    """
    if p.shape != q.shape or p.S != q.S or p.Z != q.Z:
        return False
    F, K = p.shape
    if K > 8:
        raise ValueError("equivalence search limited to K <= 8")
    P, Q = p.cells.tolist(), q.cells.tolist()

    def match_rows(perm, i, used, fwd, bwd) -> bool:
        if i == F:
            return True
        for r in range(F):
            if r in used:
                continue
            f2, b2, ok = dict(fwd), dict(bwd), True
            for k in range(K):
                a, b = P[i][k], Q[r][perm[k]]
                if (a == STAR) != (b == STAR):
                    ok = False
                    break
                if a == STAR:
                    continue
                if f2.setdefault(a, b) != b or b2.setdefault(b, a) != a:
                    ok = False
                    break
            if ok and match_rows(perm, i + 1, used | {r}, f2, b2):
                return True
        return False

    return any(match_rows(perm, 0, frozenset(), {}, {}) for perm in itertools.permutations(range(K)))


class PdaParseError(ValueError):
    def __init__(self, message: str, line: int, column: int = 0):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


def format_pda(p: PdaArray) -> str:
    lines = [f"PDA K={p.K} F={p.F} Z={p.Z} S={p.S}"]
    for row in p.cells.tolist():
        lines.append(" ".join("*" if c == STAR else str(c) for c in row))
    return "\n".join(lines) + "\n"


def parse_pda(text: str) -> PdaArray:
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise PdaParseError("empty input", 1)
    head = lines[0].split()
    if len(head) != 5 or head[0] != "PDA":
        raise PdaParseError("header must be 'PDA K=<K> F=<F> Z=<Z> S=<S>'", 1)
    values = {}
    for pos, (tok, name) in enumerate(zip(head[1:], "KFZS"), start=2):
        key, _, num = tok.partition("=")
        if key != name or not num.isdigit():
            raise PdaParseError(f"expected {name}=<int>, got {tok!r}", 1, pos)
        values[name] = int(num)
    K, F = values["K"], values["F"]
    if len(lines) - 1 != F:
        raise PdaParseError(f"header declares F={F} rows but {len(lines) - 1} follow", len(lines))
    cells = np.empty((F, K), dtype=np.int64)
    for i, line in enumerate(lines[1:]):
        toks = line.split(" ")
        if len(toks) != K:
            raise PdaParseError(f"expected {K} tokens, got {len(toks)}", i + 2)
        for j, tok in enumerate(toks):
            if tok == "*":
                cells[i, j] = STAR
            elif tok.isdigit():
                cells[i, j] = int(tok)
            else:
                raise PdaParseError(f"bad token {tok!r}", i + 2, j + 1)
    return PdaArray(cells, S=values["S"], Z=values["Z"])
