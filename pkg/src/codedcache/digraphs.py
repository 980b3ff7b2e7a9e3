"""Mixed-radix Hamming digraphs and unitary Cayley digraphs, plus the regularity audit."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .core import MAX_VERTICES, AuditReport, Digraph, RadixSpec, Witness


class GuardrailError(ValueError):
    """Raised when a construction would exceed the vertex-count guardrail."""


def _check_guardrail(K: int, allow_large: bool) -> None:
    if K > MAX_VERTICES and not allow_large:
        raise GuardrailError(
            f"K={K} exceeds the {MAX_VERTICES}-vertex guardrail; pass allow_large to override"
        )


@dataclass(frozen=True)
class HammingFamilyParams:
    spec: RadixSpec
    w: int

    def __post_init__(self):
        if not 1 <= self.w < self.spec.length:
            raise ValueError(f"w must satisfy 1 <= w < L={self.spec.length}, got w={self.w}")

    @classmethod
    def single_block(cls, n0: int, w: int, p0: int) -> "HammingFamilyParams":
        return cls(RadixSpec(((p0, n0),)), w)

    @property
    def K(self) -> int:
        return self.spec.vertex_count

    @cached_property
    def difference_vectors(self) -> tuple[tuple[int, ...], ...]:
        """Every vector with exactly ``w`` nonzero block-wise residues, lexicographically sorted."""
        radices = self.spec.radices
        out = []
        for supp in itertools.combinations(range(len(radices)), self.w):
            for vals in itertools.product(*(range(1, radices[j]) for j in supp)):
                e = [0] * len(radices)
                for j, v in zip(supp, vals):
                    e[j] = v
                out.append(tuple(e))
        out.sort()
        return tuple(out)


def elementary_symmetric(values, k: int) -> int:
    """Sum over all k-subsets of the product of their elements (exact integers)."""
    acc = [1] + [0] * k
    for v in values:
        for i in range(k, 0, -1):
            acc[i] += acc[i - 1] * v
    return acc[k]


def hamming_degree(spec: RadixSpec, w: int) -> int:
    """Number of vectors at Hamming distance exactly ``w`` from any fixed vector."""
    return elementary_symmetric([r - 1 for r in spec.radices], w)


def build_hamming_digraph(params: HammingFamilyParams, allow_large: bool = False) -> Digraph:
    """Arcs join every ordered pair of mixed-radix vectors at Hamming distance ``w``."""
    spec = params.spec
    K = spec.vertex_count
    _check_guardrail(K, allow_large)
    digits = spec.digits()
    radices = np.array(spec.radices, dtype=np.int64)
    place = np.array(spec.place_values, dtype=np.int64)
    tails = np.arange(K, dtype=np.int64)
    heads = []
    for e in params.difference_vectors:
        heads.append(((digits - np.array(e)) % radices) @ place)
    heads_arr = np.concatenate(heads) if heads else np.empty(0, np.int64)
    tails_arr = np.tile(tails, len(heads))
    return Digraph(K, tails_arr, heads_arr, spec=spec)


def factorize(n: int) -> tuple[tuple[int, int], ...]:
    """Prime factorization by trial division, as ascending ``(prime, exponent)`` pairs."""
    if n < 1:
        raise ValueError("n must be positive")
    out = []
    p = 2
    while p * p <= n:
        if n % p == 0:
            e = 0
            while n % p == 0:
                n //= p
                e += 1
            out.append((p, e))
        p += 1 if p == 2 else 2
    if n > 1:
        out.append((n, 1))
    return tuple(out)


@dataclass(frozen=True)
class CayleyParams:
    n: int
    factorization: tuple[tuple[int, int], ...]

    @classmethod
    def of(cls, n: int) -> "CayleyParams":
        if n < 3:
            raise ValueError(f"unitary Cayley digraph needs n >= 3, got {n}")
        return cls(n, factorize(n))

    @property
    def m(self) -> int:
        return len(self.factorization)

    @property
    def moduli(self) -> tuple[int, ...]:
        return tuple(p**e for p, e in self.factorization)

    @property
    def totient(self) -> int:
        out = self.n
        for p, _ in self.factorization:
            out = out // p * (p - 1)
        return out


def build_unitary_cayley_digraph(n: int, allow_large: bool = False) -> tuple[Digraph, CayleyParams]:
    """Vertices ``Z_n``; ``i -> j`` whenever ``gcd(i - j, n) = 1`` (both directions present)."""
    params = CayleyParams.of(n)
    _check_guardrail(n, allow_large)
    units = np.array([s for s in range(1, n) if math.gcd(s, n) == 1], dtype=np.int64)
    tails = np.repeat(np.arange(n, dtype=np.int64), units.size)
    heads = (tails + np.tile(units, n)) % n
    return Digraph(n, tails, heads), params


def audit_digraph(d: Digraph) -> AuditReport:
    """Check loop-freeness, reverse closure and in/out regularity, with witnesses."""
    witnesses: list[Witness] = []
    loops = np.nonzero(d.tails == d.heads)[0]
    loop_free = loops.size == 0
    if not loop_free:
        v = int(d.tails[loops[0]])
        witnesses.append(Witness("self-loop", (v, v), f"arc ({v}, {v}) is a loop"))

    has_rev = d.has_arcs(d.heads, d.tails)
    reverse_closed = bool(has_rev.all())
    if not reverse_closed:
        i = int(np.nonzero(~has_rev)[0][0])
        u, v = int(d.tails[i]), int(d.heads[i])
        witnesses.append(Witness("missing-reverse", (u, v), f"arc ({u}, {v}) present but ({v}, {u}) absent"))

    outd, ind = d.out_degrees(), d.in_degrees()
    degree = None
    regular = True
    if d.vertex_count:
        r = int(outd[0])
        bad = np.nonzero((outd != r) | (ind != r))[0]
        if bad.size:
            regular = False
            v = int(bad[0])
            witnesses.append(
                Witness("irregular", (v,), f"vertex {v} has out={outd[v]}, in={ind[v]}, expected {r}")
            )
        else:
            degree = r
    passed = loop_free and reverse_closed and regular
    return AuditReport(passed, loop_free, reverse_closed, regular, degree, witnesses)
