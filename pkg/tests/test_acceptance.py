"""Acceptance suite: one group of tests per numbered criterion.

Each test carries ``@pytest.mark.criterion(n)``; the conftest hook prints a
PASS/FAIL line per criterion at the end of the run. Published table values
below are transcribed by hand and compared at the displayed precision.
"""

import itertools
import os
import time
from fractions import Fraction

import numpy as np
import pytest

from codedcache.cli import main
from codedcache.coloring import (
    cayley_edges,
    cayley_strong_color,
    exact_min_injective_color,
    find_injective_coloring,
    merged_color_binary,
    partition_color,
    verify_injective,
    verify_strong_edge,
)
from codedcache.core import PdaArray, RadixSpec, index_to_vertex
from codedcache.digraphs import HammingFamilyParams, build_hamming_digraph
from codedcache.families import build_family_pda, closed_form, family_params
from codedcache.mds import MdsCodec
from codedcache.pda import equivalent, mn_pda, parse_pda, pda_from_coloring, useless_stars, verify_pda
from codedcache.simulator import decode_all, deliver, place_uncoded, run_coded_placement, run_uncoded, FileStore
from codedcache.tables import table_rows

import oracles
from reference_data import EXAMPLE1_ROWS, EXAMPLE4_CLASSES

EX4_SPEC = RadixSpec(((2, 2), (3, 1)))


def _timed(fn):
    t = time.perf_counter()
    out = fn()
    return out, time.perf_counter() - t


# --- criterion 1: smallest Hamming example ---------------------------------


def _build_example1_via_cli(tmp_path, capsys):
    path = tmp_path / "c2.pda"
    code = main(["build", "--family", "corollary2", "--n0", "2", "--w", "1", "--p0", "2", "--out", str(path)])
    capsys.readouterr()
    assert code == 0
    return parse_pda(path.read_text())


@pytest.mark.criterion(1)
def test_criterion1_build_and_simulate(tmp_path, capsys):
    def work():
        p = _build_example1_via_cli(tmp_path, capsys)
        return p, verify_pda(p), run_uncoded(p, 4, demands=(0, 1, 2, 3))

    (p, report, sim), elapsed = _timed(work)
    assert report.passed and p.params().as_tuple() == (4, 4, 2, 4)
    assert oracles.pda_conditions(p.rows(), p.S, p.Z) == set()
    assert sim.transmissions == 4 and sim.users_per_slot == (2, 2, 2, 2)
    assert sim.measured_rate == 1 and sim.all_decoded
    assert elapsed < 1.0


@pytest.mark.criterion(1)
def test_criterion1_equals_published_array(tmp_path, capsys):
    p = _build_example1_via_cli(tmp_path, capsys)
    published = PdaArray.from_rows(EXAMPLE1_ROWS)
    # useless-star counts are invariant under row/column permutation and relabelling,
    # so report them to make a mismatch self-explaining
    ours, theirs = useless_stars(p).z_prime, useless_stars(published).z_prime
    assert equivalent(p, published), f"not equivalent: Z'={ours} for the built array vs Z'={theirs} published"


# --- criterion 2: two-block example ----------------------------------------


@pytest.mark.criterion(2)
def test_criterion2_example_classes():
    def work():
        params = HammingFamilyParams(EX4_SPEC, 1)
        d = build_hamming_digraph(params)
        c = partition_color(params)
        p = pda_from_coloring(d, c)
        classes = {
            (key.e, key.t): {(index_to_vertex(EX4_SPEC, a), index_to_vertex(EX4_SPEC, b)) for a, b in arcs}
            for key, arcs in zip(c.labels, c.classes())
        }
        return p, verify_pda(p), classes

    (p, report, classes), elapsed = _timed(work)
    assert report.passed and p.params().as_tuple() == (12, 12, 8, 10)
    assert len(classes) == 10
    assert classes == EXAMPLE4_CLASSES
    assert elapsed < 1.0


# --- criterion 3: merged binary coloring -----------------------------------


@pytest.mark.criterion(3)
def test_criterion3_merged_binary():
    def work():
        c = merged_color_binary(3, 2)
        d = build_hamming_digraph(HammingFamilyParams.single_block(3, 2, 2))
        return c, d, verify_injective(d, c), exact_min_injective_color(d, 6), find_injective_coloring(d, 5)

    (c, d, report, exact, five), elapsed = _timed(work)
    assert d.vertex_count == 8 and c.S == 6 and report.passed
    assert oracles.injective_ok(set(d.arcs()), c.as_dict())
    print(f"exact search: minimum={exact}, 5-color coloring found={five is not None}")
    assert exact == 6 and five is None
    assert elapsed < 120.0


# --- criterion 4: unitary Cayley rows --------------------------------------

TABLE_II = {63: ("0.43", "9.0"), 105: ("0.54", "6.0"), 465: ("0.48", "30.0"), 1953: ("0.45", "135.0")}
_c4_elapsed: list[float] = []


@pytest.mark.criterion(4)
@pytest.mark.parametrize("n", sorted(TABLE_II))
def test_criterion4_table_rows(n):
    r, elapsed = _timed(lambda: family_params("theorem4", n=n))
    _c4_elapsed.append(elapsed)
    assert (r.params.K, r.params.F) == (n, n)
    assert (r.mn_text, r.r_text) == TABLE_II[n]
    assert f"{float(r.memory_ratio):.2f}" == TABLE_II[n][0]


@pytest.mark.criterion(4)
@pytest.mark.parametrize("n", [5, 6, 10, 15, 21, 105])
def test_criterion4_strong_colorings(n):
    def work():
        c = cayley_strong_color(n)
        edges = cayley_edges(n)
        lookup = c.as_dict()
        colors = np.array([lookup[(int(a), int(b))] for a, b in edges])
        return c, edges, colors, verify_strong_edge(edges, colors)

    (c, edges, colors, report), elapsed = _timed(work)
    _c4_elapsed.append(elapsed)
    expected = n * oracles.totient(n) // 2 ** oracles.distinct_primes(n)
    assert c.S == expected == len(set(colors.tolist()))
    assert report.passed
    if n <= 21:
        assert oracles.strong_edge_ok({frozenset((int(a), int(b))): int(k) for (a, b), k in zip(edges, colors)})
    assert sum(_c4_elapsed) < 60.0


# --- criterion 5: binary Hamming rows --------------------------------------


@pytest.mark.criterion(5)
def test_criterion5_rows():
    t = time.perf_counter()
    for (n0, w), (K, mn, rate) in {(15, 8): (32768, "0.80", "25.1"), (16, 9): (65536, "0.83", "87.6")}.items():
        r = family_params("corollary3", n0=n0, w=w, construct=False)
        assert (r.params.K, r.mn_text, r.r_text) == (K, mn, rate)
    rows = {row.parameters: row for row in table_rows("III") if not row.quoted}
    assert rows[(13, 7)].discrepant and rows[(13, 7)].rate == "13.4"
    assert rows[(23, 15)].discrepant and "1333.77" in rows[(23, 15)].note
    assert time.perf_counter() - t < 1.0


# --- criterion 6: q-ary Hamming rows with useless stars --------------------

TABLE_IV = {
    (7, 6, 6): (187500, 0.42, 27216.0),
    (8, 7, 6): (1015625, 0.38, 172270.0),
    (8, 6, 4): (44469, 0.54, 1880.1),
    (6, 4, 5): (14080, 0.73, 170.5),
}


@pytest.mark.criterion(6)
@pytest.mark.parametrize("row", sorted(TABLE_IV), ids=lambda r: "%d-%d-%d" % r)
def test_criterion6_rows(row):
    n0, w, p0 = row
    F, mn, rate = TABLE_IV[row]
    (params, zp), elapsed = _timed(lambda: closed_form("corollary4", n0=n0, w=w, p0=p0))
    assert params.F == F
    assert params.K == p0**n0 and zp == params.K - F
    assert round(float(params.memory_ratio), 1) == round(mn, 1)
    got = float(params.rate)
    assert abs(got - rate) <= 0.05, f"R={got:.4f} vs published {rate}"
    assert elapsed < 1.0


# --- criterion 7: construction grid ----------------------------------------


def _grid():
    for p0 in (2, 3, 5):
        for n0 in range(1, 7):
            if p0**n0 > 4096:
                break
            for w in range(1, n0):
                yield ((p0, n0),), w
    for (p, a), (q, b) in itertools.combinations([(2, 1), (3, 1), (5, 1)], 2):
        for n1 in range(1, 11):
            for n2 in range(1, 11):
                if p**n1 * q**n2 > 1296:
                    continue
                for w in (1, 2):
                    if w < n1 + n2:
                        yield ((p, n1), (q, n2)), w


@pytest.mark.criterion(7)
def test_criterion7_grid():
    t = time.perf_counter()
    count = 0
    for blocks, w in _grid():
        spec = RadixSpec(blocks)
        params = HammingFamilyParams(spec, w)
        d = build_hamming_digraph(params)
        c = partition_color(params)
        assert verify_injective(d, c).passed, (blocks, w)
        p = pda_from_coloring(d, c)
        assert verify_pda(p).passed, (blocks, w)
        if len(blocks) == 1:
            expected, _ = closed_form("corollary2", n0=blocks[0][1], w=w, p0=blocks[0][0])
        else:
            expected, _ = closed_form("theorem5", spec=spec, w=w)
        assert p.params() == expected, (blocks, w)
        if p.K <= 36:
            assert oracles.pda_conditions(p.rows(), p.S, p.Z) == set()
        sim = run_uncoded(p, 3, B=2, trials=100, seed=count)
        assert sim.all_decoded and sim.transmissions == p.S, (blocks, w)
        count += 1
    elapsed = time.perf_counter() - t
    print(f"grid instances={count} elapsed={elapsed:.1f}s")
    assert count > 50
    assert elapsed < 600.0


# --- criterion 8: coded placement ------------------------------------------

C8_BUDGET = 300.0
_c8_elapsed: list[float] = []


def _coded_checks(r, F, Z, S, zp):
    assert r.z_prime == zp
    assert r.subpacketization == F - zp
    assert r.memory_ratio == Fraction(Z - zp, F - zp)
    assert r.measured_rate == Fraction(S, F - zp)
    assert r.transmissions == S
    assert r.all_decoded and not r.failures


@pytest.mark.criterion(8)
def test_criterion8_example3():
    def work():
        p = pda_from_coloring(build_hamming_digraph(HammingFamilyParams(EX4_SPEC, 1)), partition_color(HammingFamilyParams(EX4_SPEC, 1)))
        return run_coded_placement(p, None, 12, trials=100, seed=8)

    r, elapsed = _timed(work)
    _c8_elapsed.append(elapsed)
    _coded_checks(r, 12, 8, 10, 1)
    assert (r.subpacketization, r.memory_ratio, r.measured_rate) == (11, Fraction(7, 11), Fraction(10, 11))


@pytest.mark.criterion(8)
@pytest.mark.parametrize("K, t", [(5, 2), (6, 3), (8, 2)])
def test_criterion8_mn_bit_identical(K, t):
    def work():
        p = mn_pda(K, t)
        return run_uncoded(p, 4, B=16, trials=100, seed=K), run_coded_placement(p, None, 4, B=16, trials=100, seed=K)

    (a, b), elapsed = _timed(work)
    _c8_elapsed.append(elapsed)
    assert b.z_prime == 0
    assert a.digest == b.digest and a.format() == b.format() and b.all_decoded


def _corollary4_instances():
    """Every corollary4 instance with K <= 4096, cheapest estimated decode first."""
    out = []
    for p0 in range(2, 65):
        for n0 in range(2, 13):
            if p0**n0 > 4096:
                break
            for w in range(1, n0):
                params, zp = closed_form("corollary4", n0=n0, w=w, p0=p0)
                k = params.F
                out.append((zp * k * k + params.K**2, n0, w, p0))
    return [inst[1:] for inst in sorted(out)]


@pytest.mark.criterion(8)
def test_criterion8_corollary4_grid():
    """All instances are attempted in cost order inside the shared time budget.

    Set CODEDCACHE_FULL_GRID=1 to keep going past the budget so every
    instance is checked for correctness; the runtime bound still applies.
    """
    full = os.environ.get("CODEDCACHE_FULL_GRID") == "1"
    instances = _corollary4_instances()
    t = time.perf_counter()
    done = []
    for n0, w, p0 in instances:
        spent = sum(_c8_elapsed) + time.perf_counter() - t
        if spent > C8_BUDGET and not full:
            break
        s = time.perf_counter()
        params, zp = closed_form("corollary4", n0=n0, w=w, p0=p0)
        p = build_family_pda("corollary4", n0=n0, w=w, p0=p0)
        assert (p.K, p.F - zp, p.Z - zp, p.S) == params.as_tuple()
        r = run_coded_placement(p, None, 4, B=1, trials=100, seed=n0 * 100 + w * 10 + p0)
        _coded_checks(r, p.F, p.Z, p.S, zp)
        done.append((n0, w, p0))
        if full:
            print(f"({n0},{w},{p0}) K={p.K} Z'={zp} ok in {time.perf_counter() - s:.1f}s", flush=True)
    total = sum(_c8_elapsed) + time.perf_counter() - t
    missing = [inst for inst in instances if inst not in done]
    print(f"corollary4 instances decoded={len(done)}/{len(instances)} criterion time={total:.1f}s")
    assert not missing, f"{len(missing)} instances not reached within {C8_BUDGET:.0f}s, e.g. {missing[:5]}"
    assert total < C8_BUDGET


# --- criterion 9: MDS codec ------------------------------------------------


@pytest.mark.criterion(9)
def test_criterion9_mds():
    t = time.perf_counter()
    rng = np.random.default_rng(9)
    subsets = 0
    for F in range(1, 13):
        for k in range(1, F + 1):
            codec = MdsCodec(F, k)
            info = rng.integers(0, 65536, (k, 2))
            word = codec.encode(info)
            for keep in itertools.combinations(range(F), k):
                keep = list(keep)
                assert np.array_equal(codec.decode_indices(keep, word[keep]), info), (F, k, keep)
                subsets += 1
    assert subsets == sum(2**F - 1 for F in range(1, 13))
    sizes = np.unique(np.geomspace(13, 4096, 40).astype(int))
    codecs = {}
    for trial in range(1000):
        F = int(sizes[trial % sizes.size])
        k = int(rng.integers(1, F + 1))
        codec = codecs.setdefault((F, k), MdsCodec(F, k))
        info = rng.integers(0, 65536, k)
        keep = rng.choice(F, size=k, replace=False)
        word = codec.encode(info)
        assert np.array_equal(codec.decode_indices(keep, word[keep]), info), (F, k)
    assert sizes.max() == 4096
    assert time.perf_counter() - t < 120.0


# --- criterion 10: targeted mutations of the published array ---------------


def _mutated(r, c, value):
    rows = [row[:] for row in EXAMPLE1_ROWS]
    rows[r][c] = value
    return rows


@pytest.mark.criterion(10)
def test_criterion10_c1():
    rows = _mutated(0, 0, oracles.STAR)
    report = verify_pda(PdaArray.from_rows(rows, S=4, Z=2))
    assert [f.witness for f in report.failed("C1")] == [(0,)]
    assert "C1" in oracles.pda_conditions(rows, 4, 2)


@pytest.mark.criterion(10)
def test_criterion10_c2():
    report = verify_pda(PdaArray.from_rows(EXAMPLE1_ROWS, S=5, Z=2))
    assert [f.witness for f in report.failed("C2")] == [(4,)]
    assert "C2" in oracles.pda_conditions(EXAMPLE1_ROWS, 5, 2)


@pytest.mark.criterion(10)
def test_criterion10_c3_and_decode_failure():
    rows = _mutated(0, 0, 3)
    p = PdaArray.from_rows(rows, S=4, Z=2)
    report = verify_pda(p)
    assert report.failed("C3a")[0].witness == ((0, 0), (0, 3))
    assert "C3" in oracles.pda_conditions(rows, 4, 2)
    d = (0, 1, 2, 3)
    store = FileStore.random(4, 4, 8, np.random.default_rng(10))
    res = decode_all(p, place_uncoded(p, store), deliver(p, store, d), d)
    assert res.ok == [False, True, True, False]
    assert {(f.user, f.slot) for f in res.failures} == {(0, 3), (3, 3)}
    sim = run_uncoded(p, 4, demands=d)
    assert not sim.all_decoded and sim.failures
