"""Closed-form parameters of every scheme family, with optional construction and measurement."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import comb

from .coloring import cayley_strong_color, merged_color_binary, partition_color
from .core import PdaArray, RadixSpec, SchemeParams
from .digraphs import (
    CayleyParams,
    HammingFamilyParams,
    build_hamming_digraph,
    build_unitary_cayley_digraph,
    elementary_symmetric,
)
from .pda import mn_pda, pda_from_coloring, useless_stars, verify_pda

FAMILIES = ("theorem4", "theorem5", "corollary2", "corollary3", "corollary4", "theorem6", "mn")
CODED = ("theorem6", "corollary4")

# Families are built and measured automatically up to this many users.
CONSTRUCT_LIMIT = 4096


class FamilyError(ValueError):
    pass


@dataclass
class FamilyReport:
    family: str
    inputs: dict
    params: SchemeParams
    z_prime: int | None = None
    measured: SchemeParams | None = None
    notes: list[str] = field(default_factory=list)

    @property
    def memory_ratio(self) -> Fraction:
        return self.params.memory_ratio

    @property
    def rate(self) -> Fraction:
        return self.params.rate

    @property
    def mn_text(self) -> str:
        return f"{float(self.memory_ratio):.2f}"

    @property
    def r_text(self) -> str:
        return f"{float(self.rate):.1f}"

    def lines(self) -> list[str]:
        p = self.params
        args = " ".join(f"{k}={v}" for k, v in self.inputs.items())
        out = [
            f"family={self.family} {args}",
            f"K={p.K} F={p.F} Z={p.Z} S={p.S}",
            f"M/N={p.memory_ratio} ({self.mn_text}) R={p.rate} ({self.r_text})",
        ]
        if self.z_prime is not None:
            out.append(f"Zprime={self.z_prime}")
        if self.measured is not None:
            m = self.measured
            out.append(f"measured K={m.K} F={m.F} Z={m.Z} S={m.S}")
        out.extend(f"note: {n}" for n in self.notes)
        return out


def _hamming(inputs: dict) -> HammingFamilyParams:
    if "spec" in inputs:
        spec = inputs["spec"]
        if isinstance(spec, str):
            spec = RadixSpec.parse(spec)
    else:
        spec = RadixSpec(((inputs["p0"], inputs["n0"]),))
    return HammingFamilyParams(spec, inputs["w"])


def _validate(family: str, inputs: dict) -> None:
    def need(cond: bool, msg: str):
        if not cond:
            raise FamilyError(f"{family} requires {msg}")

    if family not in FAMILIES:
        raise FamilyError(f"unknown family {family!r}; choose from {', '.join(FAMILIES)}")
    if family == "theorem4":
        need(inputs.get("n", 0) >= 3, "n >= 3")
    elif family == "mn":
        need(inputs.get("k", 0) >= 2, "k >= 2")
        need(1 <= inputs.get("t", 0) < inputs["k"], "1 <= t < k")
    elif family in ("corollary2", "corollary4"):
        need(inputs.get("p0", 0) >= 2, "p0 >= 2")
        need(inputs.get("w", 0) >= 1, "w >= 1")
        need(inputs["w"] < inputs.get("n0", 0), "w < n0")
    elif family == "corollary3":
        need(inputs.get("w", 0) >= 1, "w >= 1")
        need(inputs["w"] < inputs.get("n0", 0), "w < n0")
        need(inputs["n0"] <= 2 * inputs["w"] - 1, "n0 <= 2w-1")
    else:  # theorem5 / theorem6
        need("spec" in inputs, "a radix spec")
        try:
            _hamming(inputs)
        except ValueError as exc:
            raise FamilyError(f"{family} requires valid parameters: {exc}") from None


def closed_form(family: str, **inputs) -> tuple[SchemeParams, int | None]:
    """``(K, F, Z, S)`` from the family's formulas, and the per-column useless-star count if coded."""
    _validate(family, inputs)
    if family == "theorem4":
        cp = CayleyParams.of(inputs["n"])
        n, psi = cp.n, cp.totient
        return SchemeParams(n, n, n - psi, n * psi // 2**cp.m), None
    if family == "mn":
        k, t = inputs["k"], inputs["t"]
        return SchemeParams(k, comb(k, t), comb(k - 1, t - 1), comb(k, t + 1)), None
    if family == "corollary3":
        n0, w = inputs["n0"], inputs["w"]
        K = 2**n0
        if n0 == 2 * w - 1:
            S = comb(n0, w) * 2 ** (w - 1)
        else:
            S = comb(n0, w) * (1 + sum(comb(w, i) for i in range(1, n0 - w + 1)))
        return SchemeParams(K, K, K - comb(n0, w), S), None
    if family in ("corollary2", "corollary4"):
        n0, w, p0 = inputs["n0"], inputs["w"], inputs["p0"]
        K = p0**n0
        degree = comb(n0, w) * (p0 - 1) ** w
        S = comb(n0, w) * p0**w * (p0 - 1) ** w
        if family == "corollary2":
            return SchemeParams(K, K, K - degree, S), None
        zp = sum(comb(n0, i) * (p0 - 1) ** i for i in range(w))
        return SchemeParams(K, K - zp, K - degree - zp, S), zp
    # theorem5 / theorem6 over an arbitrary radix spec
    hp = _hamming(inputs)
    K = hp.K
    minus_one = [r - 1 for r in hp.spec.radices]
    degree = elementary_symmetric(minus_one, hp.w)
    S = elementary_symmetric([(r - 1) * r for r in hp.spec.radices], hp.w)
    if family == "theorem5":
        return SchemeParams(K, K, K - degree, S), None
    zp = sum(elementary_symmetric(minus_one, i) for i in range(hp.w))
    return SchemeParams(K, K - zp, K - degree - zp, S), zp


def build_family_pda(family: str, allow_large: bool = False, **inputs) -> PdaArray:
    """Construct the (uncoded) PDA underlying a family instance."""
    _validate(family, inputs)
    if family == "mn":
        return mn_pda(inputs["k"], inputs["t"])
    if family == "theorem4":
        d, _ = build_unitary_cayley_digraph(inputs["n"], allow_large=allow_large)
        return pda_from_coloring(d, cayley_strong_color(inputs["n"]), allow_large=allow_large)
    if family == "corollary3":
        hp = HammingFamilyParams.single_block(inputs["n0"], inputs["w"], 2)
        d = build_hamming_digraph(hp, allow_large=allow_large)
        return pda_from_coloring(d, merged_color_binary(inputs["n0"], inputs["w"]), allow_large=allow_large)
    hp = _hamming(inputs)
    d = build_hamming_digraph(hp, allow_large=allow_large)
    return pda_from_coloring(d, partition_color(hp, allow_large=allow_large), allow_large=allow_large)


def family_params(family: str, construct: bool | None = None, allow_large: bool = False, **inputs) -> FamilyReport:
    """Closed-form parameters, optionally cross-checked against a constructed PDA.

    ``construct=None`` builds whenever ``K`` is within ``CONSTRUCT_LIMIT``.
    For the corollary-3 family the formula is an upper bound on ``S`` and
    the measured value may be smaller; every other family must match exactly.
    """
    params, zp = closed_form(family, **inputs)
    report = FamilyReport(family, dict(inputs), params, z_prime=zp)
    if family == "theorem4":
        cp = CayleyParams.of(inputs["n"])
        report.notes.append(f"psi(n)={cp.totient} m={cp.m}")
    if construct is None:
        construct = params.K <= CONSTRUCT_LIMIT
    if not construct:
        report.notes.append("closed form only; construction skipped")
        return report
    pda = build_family_pda(family, allow_large=allow_large, **inputs)
    check = verify_pda(pda)
    if not check.passed:
        raise FamilyError(f"constructed {family} array failed verification: {check.summary()}")
    if family in CODED:
        stars = useless_stars(pda)
        if not stars.uniform:
            raise FamilyError(f"useless stars are not uniform across columns: {sorted(set(stars.per_column))}")
        z = stars.z_prime
        measured = SchemeParams(pda.K, pda.F - z, pda.Z - z, pda.S)
    else:
        measured = pda.params()
    report.measured = measured
    if family == "corollary3":
        if measured.S > params.S or measured.as_tuple()[:3] != params.as_tuple()[:3]:
            raise FamilyError(f"corollary3 construction {measured} exceeds the bound {params}")
        if measured.S < params.S:
            report.notes.append(f"greedy merging used {measured.S} colors, below the bound {params.S}")
    elif measured != params:
        raise FamilyError(f"measured {measured} differs from closed form {params}")
    return report
