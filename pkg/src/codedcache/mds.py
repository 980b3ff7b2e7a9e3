"""GF(2^16) arithmetic and a systematic Reed-Solomon erasure codec.

Field elements are integers in ``[0, 65535]``; addition is XOR, so a
multicast XOR of coded packets is also a field sum. Multiplication goes
through log/antilog tables built from the primitive polynomial
``x^16 + x^12 + x^3 + x + 1`` with generator ``x`` (= 2).

The codec evaluates the degree ``< k`` polynomial through the ``k``
information symbols. Evaluation points are ``0, 1, g, g^2, ..., g^(F-2)``,
so codeword position ``i < k`` carries information symbol ``i`` verbatim.
"""

from __future__ import annotations

from collections import OrderedDict
from typing import Mapping

import numpy as np

DEGREE = 16
ORDER = 1 << DEGREE  # field size q
GROUP = ORDER - 1  # multiplicative group order
MODULUS = 0x1100B
GENERATOR = 2


def _build_tables() -> tuple[np.ndarray, np.ndarray]:
    exp = np.zeros(2 * GROUP, dtype=np.int64)
    log = np.zeros(ORDER, dtype=np.int64)
    x = 1
    for i in range(GROUP):
        exp[i] = x
        log[x] = i
        x <<= 1
        if x & ORDER:
            x ^= MODULUS
    if x != 1 or len(set(exp[:GROUP].tolist())) != GROUP:
        raise RuntimeError("field modulus is not primitive")
    exp[GROUP:] = exp[:GROUP]
    return exp, log


EXP, LOG = _build_tables()
EXP.flags.writeable = False
LOG.flags.writeable = False

# Compact tables for bulk products: the log of 0 points into a zero-filled tail,
# so coefficient + log(symbol) needs no masking.
_ZERO_LOG = 2 * GROUP
_EXPZ = np.concatenate([EXP, np.zeros(GROUP + 1, dtype=np.int64)]).astype(np.uint16)
_LOGZ = LOG.astype(np.int32)
_LOGZ[0] = _ZERO_LOG
_LOG32 = LOG.astype(np.int32)
_NEGLOG = (GROUP - _LOG32).astype(np.int32)


def _xor_fold(a: np.ndarray) -> np.ndarray:
    """XOR-reduce a 2-D array along its last axis by repeated halving; overwrites ``a``."""
    n = a.shape[1]
    while n > 1:
        h = n // 2
        a[:, :h] ^= a[:, n - h : n]
        n -= h
    return a[:, 0] if a.shape[1] else np.zeros(a.shape[0], dtype=a.dtype)


def field_add(a: int, b: int) -> int:
    return a ^ b


def field_mul(a: int, b: int) -> int:
    if a == 0 or b == 0:
        return 0
    return int(EXP[LOG[a] + LOG[b]])


def field_inv(a: int) -> int:
    if a == 0:
        raise ZeroDivisionError("0 has no inverse in GF(2^16)")
    return int(EXP[(GROUP - LOG[a]) % GROUP])


def field_pow(a: int, e: int) -> int:
    if e == 0:
        return 1
    if a == 0:
        return 0
    return int(EXP[(LOG[a] * e) % GROUP])


def mul_arrays(a, b) -> np.ndarray:
    """Elementwise product of broadcastable symbol arrays."""
    a = np.asarray(a, dtype=np.int64)
    b = np.asarray(b, dtype=np.int64)
    out = EXP[LOG[a] + LOG[b]]
    return np.where((a == 0) | (b == 0), 0, out)


def slow_mul(a: int, b: int) -> int:
    """Carry-less multiply and reduce bit by bit; table-free reference."""
    out = 0
    while b:
        if b & 1:
            out ^= a
        b >>= 1
        a <<= 1
        if a & ORDER:
            a ^= MODULUS
    return out


def gf_solve(matrix, rhs) -> np.ndarray:
    """Solve ``matrix @ x = rhs`` over the field by Gauss-Jordan elimination.

    ``rhs`` may be a vector or a matrix of right-hand sides. Raises
    ``np.linalg.LinAlgError`` if the matrix is singular.
    """
    A = np.array(matrix, dtype=np.int64)
    B = np.array(rhs, dtype=np.int64)
    vec = B.ndim == 1
    if vec:
        B = B[:, None]
    n = A.shape[0]
    if A.shape != (n, n) or B.shape[0] != n:
        raise ValueError("square system expected")
    for col in range(n):
        piv = np.nonzero(A[col:, col])[0]
        if piv.size == 0:
            raise np.linalg.LinAlgError("singular matrix over GF(2^16)")
        p = col + int(piv[0])
        if p != col:
            A[[col, p]] = A[[p, col]]
            B[[col, p]] = B[[p, col]]
        inv = field_inv(int(A[col, col]))
        A[col] = mul_arrays(A[col], inv)
        B[col] = mul_arrays(B[col], inv)
        others = np.nonzero(A[:, col])[0]
        others = others[others != col]
        if others.size:
            f = A[others, col][:, None]
            A[others] ^= mul_arrays(f, A[col][None, :])
            B[others] ^= mul_arrays(f, B[col][None, :])
    return B[:, 0] if vec else B


def gf_rank(matrix) -> int:
    A = np.array(matrix, dtype=np.int64)
    rows, cols = A.shape
    rank = 0
    for col in range(cols):
        if rank == rows:
            break
        piv = np.nonzero(A[rank:, col])[0]
        if piv.size == 0:
            continue
        p = rank + int(piv[0])
        A[[rank, p]] = A[[p, rank]]
        A[rank] = mul_arrays(A[rank], field_inv(int(A[rank, col])))
        below = np.arange(rows) != rank
        f = A[below, col][:, None]
        A[below] ^= mul_arrays(f, A[rank][None, :])
        rank += 1
    return rank


class MdsCodec:
    """Systematic ``[F, k]`` Reed-Solomon code over GF(2^16).

    Any ``k`` of the ``F`` coded symbols determine the ``k`` information
    symbols. Symbols may carry a trailing payload axis: ``encode`` maps a
    ``(k, ...)`` array to ``(F, ...)``.
    """

    def __init__(self, total: int, info: int, cache_bytes: int = 1 << 28):
        if not 1 <= info <= total:
            raise ValueError(f"need 1 <= k <= F, got F={total}, k={info}")
        if total > ORDER:
            raise ValueError(f"F={total} exceeds the {ORDER} available evaluation points")
        self.F = total
        self.k = info
        points = np.zeros(total, dtype=np.int64)
        points[1:] = EXP[: total - 1]
        self.points = points
        self._cache: OrderedDict = OrderedDict()
        self._cache_bytes = cache_bytes
        self._cached = 0
        self._full_log: np.ndarray | None = None

    def __repr__(self) -> str:
        return f"MdsCodec(F={self.F}, k={self.k})"

    @property
    def full_log(self) -> np.ndarray:
        """``sum_{j != i} log(x_i - x_j)`` for every evaluation point ``x_i``."""
        if self._full_log is None:
            x = self.points
            out = np.empty(self.F, dtype=np.int64)
            step = max(1, 4_000_000 // self.F)
            for s in range(0, self.F, step):
                blk = x[s : s + step, None] ^ x[None, :]
                lg = LOG[blk]
                lg[blk == 0] = 0  # the j == i term
                out[s : s + step] = lg.sum(axis=1)
            self._full_log = out % GROUP
        return self._full_log

    def _coefficients(self, known: np.ndarray, targets: np.ndarray) -> np.ndarray:
        """Log-domain Lagrange weights: value at ``targets[t]`` = sum_i y_i * C[t, i]."""
        key = (known.tobytes(), targets.tobytes())
        hit = self._cache.get(key)
        if hit is not None:
            self._cache.move_to_end(key)
            return hit
        x = self.points
        xk, xt = x[known], x[targets]
        lg = _LOG32[xt[:, None] ^ xk[None, :]]  # log(x_t - x_i); targets never coincide with known points
        if 2 * known.size <= self.F:
            # direct products over the known points
            diff = _LOG32[xk[:, None] ^ xk[None, :]]
            diff[np.arange(known.size), np.arange(known.size)] = 0
            w = diff.sum(axis=1, dtype=np.int64)
            num = lg.sum(axis=1, dtype=np.int64)
        else:
            # full products divided by the terms from the unknown points
            unknown = np.setdiff1d(np.arange(self.F), known, assume_unique=True)
            xu = x[unknown]
            full = self.full_log
            w = full[known] - _LOG32[xk[:, None] ^ xu[None, :]].sum(axis=1, dtype=np.int64)
            others = xt[:, None] ^ xu[None, :]
            lu = _LOG32[others]
            lu[others == 0] = 0  # j == t
            num = full[targets] - lu.sum(axis=1, dtype=np.int64)
        coeff = (num % GROUP).astype(np.int32)[:, None] - lg
        coeff -= (w % GROUP).astype(np.int32)[None, :]
        coeff %= GROUP
        self._cache[key] = coeff
        self._cached += coeff.nbytes
        while self._cached > self._cache_bytes and len(self._cache) > 1:
            _, old = self._cache.popitem(last=False)
            self._cached -= old.nbytes
        return coeff

    @staticmethod
    def _apply(coeff: np.ndarray, values: np.ndarray) -> np.ndarray:
        """XOR-sum of log-domain coefficient times symbol, over the known axis."""
        flat = values.reshape(values.shape[0], -1)
        out = np.zeros((coeff.shape[0], flat.shape[1]), dtype=np.uint16)
        if coeff.size:
            lv = _LOGZ[flat]
            c32 = coeff.astype(np.int32, copy=False)
            for col in range(flat.shape[1]):
                out[:, col] = _xor_fold(_EXPZ[c32 + lv[:, col]])
        return out.astype(np.int64).reshape((coeff.shape[0],) + values.shape[1:])

    def encode(self, info) -> np.ndarray:
        info = np.asarray(info, dtype=np.int64)
        if info.shape[0] != self.k:
            raise ValueError(f"expected {self.k} information symbols, got {info.shape[0]}")
        if info.size and (info.min() < 0 or info.max() >= ORDER):
            raise ValueError("symbols must lie in [0, 65535]")
        out = np.empty((self.F,) + info.shape[1:], dtype=np.int64)
        out[: self.k] = info
        if self.F > self.k:
            coeff = self._coefficients(np.arange(self.k), np.arange(self.k, self.F))
            out[self.k :] = self._apply(coeff, info)
        return out

    def decode(self, received: Mapping[int, object]) -> np.ndarray:
        """Recover the information symbols from exactly ``k`` distinct coded positions."""
        idx = [int(i) for i in received]
        values = np.asarray([received[i] for i in idx], dtype=np.int64)
        return self.decode_indices(idx, values)

    def decode_indices(self, indices, values) -> np.ndarray:
        """Array form of ``decode``: ``values[i]`` is the coded symbol at ``indices[i]``."""
        idx = np.asarray(indices, dtype=np.int64).reshape(-1)
        if np.unique(idx).size != idx.size:
            raise ValueError("repeated codeword index")
        if idx.size < self.k:
            raise ValueError(f"need {self.k} coded symbols, got {idx.size}")
        if idx.size > self.k:
            raise ValueError(f"expected exactly {self.k} coded symbols, got {idx.size}")
        if idx.min() < 0 or idx.max() >= self.F:
            raise ValueError("codeword index out of range")
        order = np.argsort(idx)
        known = idx[order]
        values = np.asarray(values, dtype=np.int64)[order]
        out = np.empty((self.k,) + values.shape[1:], dtype=np.int64)
        sys_known = known[known < self.k]
        out[sys_known] = values[: sys_known.size]
        missing = np.setdiff1d(np.arange(self.k), sys_known, assume_unique=True)
        if missing.size:
            out[missing] = self._interpolate(known, missing, values)
        return out

    def _node_logs(self, known: np.ndarray, targets: np.ndarray):
        """``-log(x_t - x_i)`` as an (m, k) matrix plus the log numerators and known weights."""
        x = self.points
        xk, xt = x[known], x[targets]
        neg = _NEGLOG[xt[:, None] ^ xk[None, :]]  # in [1, GROUP]
        if 2 * known.size <= self.F:
            diff = _LOG32[xk[:, None] ^ xk[None, :]]
            diff[np.arange(known.size), np.arange(known.size)] = 0
            w = diff.sum(axis=1, dtype=np.int64)
            num = known.size * GROUP - neg.sum(axis=1, dtype=np.int64)
        else:
            unknown = np.setdiff1d(np.arange(self.F), known, assume_unique=True)
            xu = x[unknown]
            full = self.full_log
            w = full[known] - _LOG32[xk[:, None] ^ xu[None, :]].sum(axis=1, dtype=np.int64)
            others = xt[:, None] ^ xu[None, :]
            lu = _LOG32[others]
            lu[others == 0] = 0  # j == t
            num = full[targets] - lu.sum(axis=1, dtype=np.int64)
        return neg, num % GROUP, w % GROUP

    def _interpolate(self, known: np.ndarray, targets: np.ndarray, values: np.ndarray) -> np.ndarray:
        """Values at ``targets`` of the polynomial through ``(known, values)``.

        Same barycentric weights as ``_coefficients`` but the per-target
        numerator is applied after the XOR sum, so no (m, k) weight matrix
        is ever reduced modulo the group order.
        """
        neg, num, w = self._node_logs(known, targets)
        flat = values.reshape(values.shape[0], -1)
        lv = _LOGZ[flat]
        # y_i / w_i in the log domain; zero symbols map past the table's periodic part
        scaled = np.where(lv == _ZERO_LOG, 2 * GROUP, (lv - w[:, None]) % GROUP).astype(np.int32)
        out = np.empty((targets.size, flat.shape[1]), dtype=np.int64)
        for col in range(flat.shape[1]):
            acc = _xor_fold(_EXPZ[neg + scaled[:, col]])
            out[:, col] = mul_arrays(acc, EXP[num])
        return out.reshape((targets.size,) + values.shape[1:])

    def generator_matrix(self) -> np.ndarray:
        """``k x F`` matrix G with codeword = info @ G; identity in the first k columns."""
        eye = np.eye(self.k, dtype=np.int64)
        return self.encode(eye).T


def mds_encode(codec: MdsCodec, info) -> np.ndarray:
    return codec.encode(info)


def mds_decode(codec: MdsCodec, received: Mapping[int, object]) -> np.ndarray:
    return codec.decode(received)
