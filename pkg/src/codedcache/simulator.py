"""End-to-end caching simulation: placement, XOR multicast delivery, per-user decoding.

Packets are arrays of ``B`` 16-bit symbols. Caches are represented by an
``F x K`` availability mask over a shared file store: user ``k`` may read
packet ``j`` of any file only when ``mask[j, k]`` is set. Decoding a
delivered packet XORs out exactly the interference the user can read, so a
broken array shows up as a structured failure rather than a crash.

Several demand vectors ("trials") are simulated at once along an extra axis.
"""

from __future__ import annotations

import hashlib
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .core import STAR, PdaArray
from .mds import MdsCodec
from .pda import UselessStarReport, useless_stars

log = logging.getLogger(__name__)

SYMBOL_BYTES = 2
DEFAULT_B = 64
DEFAULT_SEED = 20240601

# Upper bound on symbols materialized at once while decoding.
WORK_BUDGET = 1 << 26


@dataclass(frozen=True)
class FileStore:
    """``N`` files of ``F`` packets, each packet ``B`` symbols: array shape ``(N, F, B)``."""

    packets: np.ndarray

    def __post_init__(self):
        if self.packets.ndim != 3:
            raise ValueError("file store must have shape (N, F, B)")

    @classmethod
    def random(cls, N: int, F: int, B: int, rng: np.random.Generator) -> "FileStore":
        if min(N, F, B) < 1:
            raise ValueError(f"N, F and B must be positive, got N={N}, F={F}, B={B}")
        return cls(rng.integers(0, 1 << 16, size=(N, F, B), dtype=np.uint16))

    @property
    def N(self) -> int:
        return self.packets.shape[0]

    @property
    def F(self) -> int:
        return self.packets.shape[1]

    @property
    def B(self) -> int:
        return self.packets.shape[2]

    def file(self, n: int) -> np.ndarray:
        return self.packets[n]


@dataclass(frozen=True)
class DemandVector:
    d: tuple[int, ...]
    N: int

    def __post_init__(self):
        for k, n in enumerate(self.d):
            if not 0 <= n < self.N:
                raise ValueError(f"user {k} demands file {n}, outside [0, {self.N - 1}]")

    @classmethod
    def random(cls, K: int, N: int, rng: np.random.Generator) -> "DemandVector":
        return cls(tuple(int(x) for x in rng.integers(0, N, size=K)), N)

    @property
    def K(self) -> int:
        return len(self.d)

    def as_array(self) -> np.ndarray:
        return np.array(self.d, dtype=np.int64)


def _demand_matrix(demands, K: int, N: int) -> np.ndarray:
    D = np.atleast_2d(np.asarray(demands, dtype=np.int64))
    if D.ndim != 2 or D.shape[1] != K:
        raise ValueError(f"each demand vector needs {K} entries, got shape {D.shape}")
    if D.size and (D.min() < 0 or D.max() >= N):
        bad = D[(D < 0) | (D >= N)][0]
        raise ValueError(f"demand {bad} outside [0, {N - 1}]")
    return D


@dataclass
class Caches:
    mask: np.ndarray  # (F, K) bool
    store: FileStore

    def has(self, k: int, j: int) -> bool:
        return bool(self.mask[j, k])

    def packet_indices(self, k: int) -> np.ndarray:
        return np.nonzero(self.mask[:, k])[0]

    def count(self, k: int) -> int:
        """Packets held by user ``k`` across all files."""
        return int(self.mask[:, k].sum()) * self.store.N

    def contents(self, k: int) -> dict[tuple[int, int], np.ndarray]:
        return {(n, int(j)): self.store.packets[n, j] for n in range(self.store.N) for j in self.packet_indices(k)}


def _check_shapes(p: PdaArray, store: FileStore) -> None:
    if store.F != p.F:
        raise ValueError(f"array has F={p.F} rows but files have {store.F} packets")


def place_uncoded(p: PdaArray, store: FileStore) -> Caches:
    """User ``k`` caches packet ``j`` of every file exactly when cell ``(j, k)`` is a star."""
    _check_shapes(p, store)
    return Caches(p.is_star(), store)


def _class_chunks(p: PdaArray, width: int):
    """Yield ``(slots, rows, cols)`` for blocks of same-integer classes, bounded in size."""
    K = p.K
    for g, members in sorted(p.value_groups.items()):
        step = max(1, WORK_BUDGET // max(1, g * max(g, width)))
        for s in range(0, members.shape[0], step):
            m = members[s : s + step]
            yield p.cells.reshape(-1)[m[:, 0]], m // K, m % K


def _offsets(D: np.ndarray, F: int) -> np.ndarray:
    """Row of each user's demanded file in the flattened store: ``(K, R)``."""
    return np.ascontiguousarray(D.T) * F


def _requested(packets: np.ndarray, offsets: np.ndarray, rows: np.ndarray, cols: np.ndarray) -> np.ndarray:
    """Packets requested at the given cells: ``(c, g, R, B)``."""
    N, F, B = packets.shape
    idx = offsets[cols]
    idx += rows[:, :, None]
    return np.take(packets.reshape(N * F, B), idx, axis=0)


def _deliver_batch(p: PdaArray, packets: np.ndarray, D: np.ndarray) -> np.ndarray:
    """Multicast payloads ``(S, R, B)``: slot ``s`` XORs the requested packet at every cell holding ``s``."""
    R, B = D.shape[0], packets.shape[2]
    out = np.zeros((p.S, R, B), dtype=packets.dtype)
    off = _offsets(D, packets.shape[1])
    for slots, rows, cols in _class_chunks(p, R * B):
        out[slots] = np.bitwise_xor.reduce(_requested(packets, off, rows, cols), axis=1)
    return out


def deliver(p: PdaArray, store: FileStore, d) -> list[np.ndarray]:
    """The ``S`` multicast payloads for one demand vector, in slot order."""
    _check_shapes(p, store)
    D = _demand_matrix(d.d if isinstance(d, DemandVector) else d, p.K, store.N)
    if D.shape[0] != 1:
        raise ValueError("deliver takes a single demand vector")
    return list(_deliver_batch(p, store.packets, D)[:, 0])


@dataclass(frozen=True)
class DecodeFailure:
    user: int
    slot: int | None
    packet: int
    trial: int = 0
    reason: str = ""


def _recover_chunks(
    p: PdaArray,
    mask: np.ndarray,
    packets: np.ndarray,
    payloads: np.ndarray,
    D: np.ndarray,
    failures: list[DecodeFailure],
    trial_offset: int = 0,
):
    """Yield ``(rows, cols, recovered, requested)`` per block of classes, each ``(c, g, R, B)``.

    User ``k`` recovering cell ``(j, k)`` of slot ``s`` XORs the payload with
    the other requested packets of slot ``s`` that it holds in cache. Each
    term it cannot read is left in place and logged as a failure.
    """
    R, B = D.shape[0], packets.shape[2]
    off = _offsets(D, packets.shape[1])
    for slots, rows, cols in _class_chunks(p, R * B):
        req = _requested(packets, off, rows, cols)
        g = rows.shape[1]
        other = _xor_of_others(req)
        # user of member i must hold the packet of member i2
        held = mask[rows[:, None, :], cols[:, :, None]]
        held[:, np.arange(g), np.arange(g)] = True
        c, i, i2 = np.nonzero(~held)
        if c.size:
            np.bitwise_xor.at(other, (c, i), req[c, i2])
            for cc, ii in sorted(set(zip(c.tolist(), i.tolist()))):
                for r in range(R):
                    failures.append(
                        DecodeFailure(
                            int(cols[cc, ii]), int(slots[cc]), int(rows[cc, ii]), trial_offset + r, "missing-interference"
                        )
                    )
        yield rows, cols, payloads[slots][:, None] ^ other, req


def _xor_of_others(req: np.ndarray) -> np.ndarray:
    """``out[:, i]`` = XOR of ``req[:, i2]`` over ``i2 != i``, via prefix and suffix sums."""
    g = req.shape[1]
    out = np.zeros_like(req)
    acc = np.zeros_like(req[:, 0])
    for i in range(1, g):
        acc ^= req[:, i - 1]
        out[:, i] = acc
    acc[...] = 0
    for i in range(g - 2, -1, -1):
        acc ^= req[:, i + 1]
        out[:, i] ^= acc
    return out


def _recover_dense(p, mask, packets, payloads, D, failures, trial_offset=0) -> np.ndarray:
    """Recovered non-star packets as ``(F, K, R, B)``, zero at stars."""
    out = np.zeros((p.F, p.K, D.shape[0], packets.shape[2]), dtype=packets.dtype)
    for rows, cols, rec, _ in _recover_chunks(p, mask, packets, payloads, D, failures, trial_offset):
        out[rows, cols] = rec
    return out


def _slot_of(p: PdaArray, j: int, k: int) -> int | None:
    v = int(p.cells[j, k])
    return None if v == STAR else v


@dataclass
class DecodeResult:
    files: list[np.ndarray]  # per user, (F, B)
    failures: list[DecodeFailure] = field(default_factory=list)

    @property
    def ok(self) -> list[bool]:
        bad = {f.user for f in self.failures}
        return [k not in bad for k in range(len(self.files))]


def decode_all(p: PdaArray, caches: Caches, payloads: Sequence[np.ndarray], d) -> DecodeResult:
    """Each user rebuilds its demanded file from cache plus the multicasts."""
    store = caches.store
    D = _demand_matrix(d.d if isinstance(d, DemandVector) else d, p.K, store.N)
    if len(payloads) != p.S:
        raise ValueError(f"expected {p.S} payloads, got {len(payloads)}")
    pay = np.stack([np.asarray(x, dtype=store.packets.dtype) for x in payloads])[:, None]
    failures: list[DecodeFailure] = []
    rec = _recover_dense(p, caches.mask, store.packets, pay, D, failures)
    star = p.is_star()
    files = []
    for k in range(p.K):
        want = store.packets[D[0, k]]
        got = np.where(caches.mask[:, k, None], want, rec[:, k, 0])
        files.append(got)
        for j in np.nonzero(star[:, k] & ~caches.mask[:, k])[0]:
            failures.append(DecodeFailure(k, None, int(j), 0, "not-cached"))
        for j in np.nonzero((got != want).any(axis=1))[0]:
            failures.append(DecodeFailure(k, _slot_of(p, j, k), int(j), 0, "mismatch"))
    return DecodeResult(files, failures)


@dataclass
class SimulationReport:
    K: int
    F: int
    Z: int
    S: int
    z_prime: int
    subpacketization: int
    transmissions: int
    bytes: int
    per_user_cache_packets: tuple[int, ...]
    decode_ok: tuple[bool, ...]
    seed: int | None
    trials: int
    files: int = 1
    family: str = "-"
    users_per_slot: tuple[int, ...] = ()
    failures: list[DecodeFailure] = field(default_factory=list)
    digest: str = ""  # sha256 of every multicast payload, for bit-level comparison

    @property
    def measured_rate(self) -> Fraction:
        return Fraction(self.transmissions, self.subpacketization)

    @property
    def memory_ratio(self) -> Fraction:
        return Fraction(max(self.per_user_cache_packets, default=0), self.subpacketization * self.files)

    @property
    def all_decoded(self) -> bool:
        return all(self.decode_ok)

    def lines(self) -> list[str]:
        pairs = [
            ("family", self.family),
            ("K", self.K),
            ("F", self.F),
            ("Z", self.Z),
            ("S", self.S),
            ("Zprime", self.z_prime),
            ("memory_ratio", self.memory_ratio),
            ("rate", self.measured_rate),
            ("transmissions", self.transmissions),
            ("bytes", self.bytes),
            ("decode_ok", "true" if self.all_decoded else "false"),
            ("seed", self.seed),
            ("trials", self.trials),
        ]
        return [f"{k}={v}" for k, v in pairs]

    def format(self) -> str:
        return "\n".join(self.lines()) + "\n"


def _resolve_demands(rng: np.random.Generator, K: int, N: int, demands, trials: int) -> np.ndarray:
    if demands is not None:
        return _demand_matrix(demands.d if isinstance(demands, DemandVector) else demands, K, N)
    if trials < 1:
        raise ValueError("trials must be positive")
    return rng.integers(0, N, size=(trials, K))


def run_uncoded(
    p: PdaArray,
    N: int,
    B: int = DEFAULT_B,
    demands=None,
    seed: int | None = DEFAULT_SEED,
    trials: int = 1,
    family: str = "-",
) -> SimulationReport:
    """Place, deliver and decode with uncoded packets.

    ``demands`` is one demand vector or a ``(R, K)`` matrix; when omitted,
    ``trials`` vectors are drawn from the seeded generator after the files.
    """
    rng = np.random.default_rng(seed)
    store = FileStore.random(N, p.F, B, rng)
    D = _resolve_demands(rng, p.K, N, demands, trials)
    caches = place_uncoded(p, store)
    failures: list[DecodeFailure] = []
    payloads = _deliver_batch(p, store.packets, D)
    digest = hashlib.sha256(np.ascontiguousarray(np.moveaxis(payloads, 1, 0)).tobytes())
    for rows, cols, rec, want in _recover_chunks(p, caches.mask, store.packets, payloads, D, failures):
        c, i, r = np.nonzero((rec != want).any(axis=3))
        for cc, ii, rr in zip(c.tolist(), i.tolist(), r.tolist()):
            j, k = int(rows[cc, ii]), int(cols[cc, ii])
            failures.append(DecodeFailure(k, _slot_of(p, j, k), j, rr, "mismatch"))
    return _report(p, caches.mask, N, B, D, seed, family, 0, p.F, failures, digest.hexdigest())


def _report(p, mask, N, B, D, seed, family, z_prime, sub, failures, digest) -> SimulationReport:
    bad = {f.user for f in failures}
    sizes = np.bincount(p.cells[p.cells >= 0], minlength=p.S)
    return SimulationReport(
        K=p.K,
        F=p.F,
        Z=p.Z,
        S=p.S,
        z_prime=z_prime,
        subpacketization=sub,
        transmissions=p.S,
        bytes=p.S * B * SYMBOL_BYTES,
        per_user_cache_packets=tuple(int(x) * N for x in mask.sum(axis=0)),
        decode_ok=tuple(k not in bad for k in range(p.K)),
        seed=seed,
        trials=int(D.shape[0]),
        files=N,
        family=family,
        users_per_slot=tuple(int(x) for x in sizes[: p.S]),
        failures=failures,
        digest=digest,
    )


def _decode_checked(codec: MdsCodec, idx, coded, cached, recovered, files, info, memo: dict | None = None):
    """Decode one user's file in every trial; yield ``(trial, packet)`` for each wrong packet.

    The first ``cached.size`` coded packets come from the user's cache and
    the rest are ``recovered`` from delivery, shaped ``(m, R, B)``. Cache
    reads depend only on the demanded file, so one representative trial per
    file is decoded and the others are compared with it on the delivered
    part; any column that differs is decoded on its own. ``memo`` keeps the
    representatives (and their wrong ``(packet, symbol)`` pairs) across calls.
    """
    m, R, B = recovered.shape
    k = codec.k
    memo = {} if memo is None else memo
    uniq, first, group = np.unique(files, return_index=True, return_inverse=True)
    group = group.reshape(-1)
    new = [i for i, u in enumerate(uniq.tolist()) if u not in memo]
    ref = np.stack([memo[u][0] if u in memo else recovered[:, first[i]] for i, u in enumerate(uniq.tolist())], axis=1)
    odd_r, odd_b = np.nonzero((recovered != ref[:, group]).any(axis=0))

    new_files = uniq[new]
    rep = np.concatenate([np.moveaxis(coded[new_files][:, cached], 0, 1), ref[:, new]])
    extra = np.concatenate([coded[files[odd_r], cached[:, None], odd_b], recovered[:, odd_r, odd_b]])
    cols = np.concatenate([rep.reshape(k, -1), extra], axis=1)
    solved = codec.decode_indices(idx, cols) if cols.shape[1] else cols
    rep_bad = solved[:, : len(new) * B].reshape(k, len(new), B) != np.moveaxis(info[new_files], 0, 1)
    for i, u in enumerate(new_files.tolist()):
        j, b = np.nonzero(rep_bad[:, i])
        memo[u] = (ref[:, new[i]].copy(), list(zip(j.tolist(), b.tolist())))

    odd = set(zip(odd_r.tolist(), odd_b.tolist()))
    for i, u in enumerate(uniq.tolist()):
        # trials that reused this representative column inherit its errors
        for j, b in memo[u][1]:
            for r in np.nonzero(group == i)[0].tolist():
                if (r, b) not in odd:
                    yield r, j
    if odd_r.size:
        wrong = solved[:, len(new) * B :] != info[files[odd_r], :, odd_b].T
        for j, c in zip(*np.nonzero(wrong)):
            yield int(odd_r[c]), int(j)


def run_coded_placement(
    p: PdaArray,
    report: UselessStarReport | None,
    N: int,
    B: int = DEFAULT_B,
    demands=None,
    seed: int | None = DEFAULT_SEED,
    trials: int = 1,
    family: str = "-",
) -> SimulationReport:
    """Drop useless stars and cache MDS-coded packets at the useful ones.

    Each file has ``F - Z'`` information packets, encoded into ``F`` coded
    packets indexed like the array rows. User ``k`` caches coded packet
    ``j`` iff ``(j, k)`` is a useful star; delivery is unchanged. After
    delivery each user holds ``F - Z'`` distinct coded packets of its file
    and inverts the code.
    """
    if report is None:
        report = useless_stars(p)
    per_col = np.array(report.per_column, dtype=np.int64)
    z_prime = int(per_col.max()) if per_col.size else 0
    if not report.uniform:
        log.warning("useless stars vary across columns %s; using the maximum %d", sorted(set(report.per_column)), z_prime)
    info_len = p.F - z_prime
    codec = MdsCodec(p.F, info_len)

    rng = np.random.default_rng(seed)
    info = FileStore.random(N, info_len, B, rng)
    D = _resolve_demands(rng, p.K, N, demands, trials)
    flat = np.moveaxis(info.packets, 1, 0).reshape(info_len, N * B)
    coded = np.moveaxis(codec.encode(flat).reshape(p.F, N, B), 0, 1).astype(np.uint16)
    mask = p.is_star() & ~report.mask
    star = p.is_star()
    cached_rows = [np.flatnonzero(col) for col in np.ascontiguousarray(mask.T)]

    # recovered packets stored per non-star cell, column-major, so each user's rows are contiguous
    keys = np.flatnonzero(~star.T)
    bounds = np.searchsorted(keys, np.arange(p.K + 1) * p.F)
    failures: list[DecodeFailure] = []
    digest = hashlib.sha256()
    step = max(1, WORK_BUDGET // max(1, keys.size * B))
    # decoded representatives carried between trial chunks while they fit the budget
    keep = D.shape[0] > step and keys.size * N * B <= WORK_BUDGET
    memos = [{} if keep else None for _ in range(p.K)]
    for t0 in range(0, D.shape[0], step):
        Dc = D[t0 : t0 + step]
        R = Dc.shape[0]
        payloads = _deliver_batch(p, coded, Dc)
        digest.update(np.ascontiguousarray(np.moveaxis(payloads, 1, 0)).tobytes())
        rec = np.zeros((keys.size, R, B), dtype=coded.dtype)
        for rows, cols, got, _ in _recover_chunks(p, mask, coded, payloads, Dc, failures, t0):
            rec[np.searchsorted(keys, cols * p.F + rows)] = got
        for k in range(p.K):
            cached = cached_rows[k]
            idx = np.r_[cached, keys[bounds[k] : bounds[k + 1]] - k * p.F]
            if idx.size < info_len:
                failures.append(DecodeFailure(k, None, -1, t0, f"only {idx.size} of {info_len} coded packets"))
                continue
            # any info_len distinct coded packets determine the file
            idx, take = idx[:info_len], min(cached.size, info_len)
            part = rec[bounds[k] : bounds[k] + info_len - take]
            checked = _decode_checked(codec, idx, coded, cached[:take], part, Dc[:, k], info.packets, memos[k])
            seen = set()
            for r, j in checked:
                if (r, j) not in seen:
                    seen.add((r, j))
                    failures.append(DecodeFailure(k, None, j, t0 + r, "mds-mismatch"))
    return _report(p, mask, N, B, D, seed, family, z_prime, info_len, failures, digest.hexdigest())
