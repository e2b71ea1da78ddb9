"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line."""
from __future__ import annotations

import random
from collections import Counter

import pytest

from chemlambda.canon import is_isomorphic
from chemlambda.engine import Limits, Priority, Status, reduce, replay
from chemlambda.knots import curl_is_bit, curl_molecule
from chemlambda.lam import (alpha_eq, decode, encode, gen_random_term, parse_lambda,
                            reference_beta_reduce)
from chemlambda.molecule import (disjoint_union, extract, glue, is_opaque, parse_mol, split_components,
                                 validate)
from chemlambda.moves import FORWARD, MoveKind, apply_move, apply_move_ex, find_sites, sites_overlap
from chemlambda.patterns import (GG, TERMS, Behavior, build_gun, build_multiplier_from_distributor2,
                                 build_propagator, check_multiplier, check_propagator,
                                 fixed_point_witness, k_distributor, named, node_molecule, run_gun,
                                 y_gun, y_reduction, y_reduction_trace)

from helpers import SITE_SEEDS, brute_isomorphic, expected_counts, host, random_molecule, renumbered

RULE_KINDS = [k for k in MoveKind if k is not MoveKind.COMB]


@pytest.fixture
def report(capsys):
    def _report(number: int, title: str, ok: bool, detail: str = "") -> None:
        with capsys.disabled():
            print(f"\ncriterion {number:2d} [{'PASS' if ok else 'FAIL'}] {title}" + (f": {detail}" if detail else ""))
        assert ok, f"criterion {number} failed: {detail}"
    return _report


def graph_normal_form(expr: str):
    t = parse_lambda(expr)
    final, trace = reduce(encode(t), Priority(), Limits(max_steps=1000, max_nodes=1000))
    return t, final, trace


# 1 -------------------------------------------------------------------------------------------

def test_criterion_01_bckw_soundness(report):
    cases = {
        "B": ("x (y z)", "x y z"),
        "C": ("x z y", "x y z"),
        "K": ("x", "x y"),
        "W": ("x y y", "x y"),
    }
    details, ok = [], True
    for name, (expected, args) in cases.items():
        term = parse_lambda(f"({TERMS[name]}) {args}")
        final, trace = reduce(encode(term), Priority(), Limits(1000, 1000))
        got = decode(final)
        oracle, halted = reference_beta_reduce(term, 100)
        good = (trace.status is Status.NORMAL_FORM and got is not None and halted
                and alpha_eq(got, oracle) and alpha_eq(got, parse_lambda(expected)))
        ok &= good
        details.append(f"{name} {args} -> {got}")
    report(1, "BCKW soundness", ok, "; ".join(details))


# 2 -------------------------------------------------------------------------------------------

def test_criterion_02_self_multiplication(report):
    lengths, ok = {}, True
    for name in "BCKW":
        cert = check_multiplier(named(name), depth=30)
        ok &= cert is not None and cert.depth <= 30 and cert.verify()
        lengths[name] = None if cert is None else len(cert)
    k = named("K").molecule
    final, _ = check_multiplier(named("K"), depth=30).replay()
    parts = split_components(final)
    two_ks = len(parts) == 2 and all(is_isomorphic(p, k) for p in parts)
    exits = sorted(l for p in parts for l in p.free) == ["o1", "o2"]
    report(2, "self-multiplication", ok and two_ks and exits,
           f"certificate lengths {lengths}; K replay gives {len(parts)} copies of K")


# 3 -------------------------------------------------------------------------------------------

def test_criterion_03_identities(report):
    f = r"\x y.y (y x)"
    g = r"\x y z.(y x) (y z)"
    cases = [(f"({f}) a b", "b (b a)"), (f"({g}) x y z", "(y x) (y z)")]
    ok, details = True, []
    for expr, expected in cases:
        _, final, trace = graph_normal_form(expr)
        got = decode(final)
        good = trace.status is Status.NORMAL_FORM and got is not None and alpha_eq(got, parse_lambda(expected))
        ok &= good
        details.append(f"{got}")
    report(3, "lambda identities (Fa)b and ((Gx)y)z", ok, "; ".join(details))


# 4 -------------------------------------------------------------------------------------------

def test_criterion_04_fixed_point_law(report):
    initial = encode(parse_lambda(GG.replace("y", "F")), opaque={"F": "o"})
    final, trace, _ = fixed_point_witness()
    assert validate(final) == []
    # locate F -> FO -> A(fun) whose output is the root
    (f,) = [n for n, k in final.nodes.items() if is_opaque(k)]
    fo, _ = final.link[(f, 0)]
    app, port = final.link["root"]
    structure = (final.nodes[fo] == "FO" and final.nodes[app] == "A" and port == 2
                 and final.link[(app, 0)] in ((fo, 1), (fo, 2)))
    copy_ok = False
    if structure:
        def name_cut(src, dst, src_inside):
            return ("_x", "gg_in") if src_inside else ("gg_root", "_y")
        _, rest = extract(final, [f, fo, app], name_cut)
        # the argument of A is the rest; feed it from F to compare with the start
        regrown = glue(parse_mol("OPAQUE:o:F s"), rest.relabel({"gg_in": "s", "gg_root": "root"}))
        copy_ok = set(rest.free) == {"gg_in", "gg_root"} and is_isomorphic(regrown, initial, labeled=True)
    forever = reduce(initial, Priority(), Limits(max_steps=300, max_nodes=10 ** 9))[1]
    report(4, "fixed-point law GG = F(GG)", structure and copy_ok and forever.status is Status.STEP_LIMIT,
           f"{len(trace)} bounded moves give F applied to a copy of GG; "
           f"unbounded priority run: {forever.status.value} after {len(forever)} steps")


# 5 -------------------------------------------------------------------------------------------

def test_criterion_05_y_reduction(report):
    r = y_reduction()
    trace = y_reduction_trace()
    names = trace.moves()
    bit_prop = check_propagator(named("BIT"), depth=12).move_names()
    shape = names[:4] == ["beta", "beta", "dist-l", "dist-a"] and names[4:-1] == bit_prop and names[-1] == "fanin"
    replayed = is_isomorphic(replay(r.start, trace), r.final, labeled=True)
    report(5, "Y A reduces to A(Y A)", shape and r.matches() and r.moves_touching_opaque() == 0 and replayed,
           f"{', '.join(names)}; moves touching A: {r.moves_touching_opaque()}")


# 6 -------------------------------------------------------------------------------------------

def test_criterion_06_y_is_a_gun(report):
    residual, emitted = run_gun(named("Y"), 3)
    fo = [Counter(p.nodes.values())["FO"] for p in emitted]
    same = is_isomorphic(residual, y_gun().molecule, labeled=True)
    report(6, "Y is a gun", fo == [1, 1, 1] and same, f"fanouts per emission {fo}; residual isomorphic: {same}")


# 7 -------------------------------------------------------------------------------------------

def test_criterion_07_bit_is_a_propagator(report):
    cert = check_propagator(named("BIT"), depth=30)
    ok = cert is not None
    if ok:
        final, _ = cert.replay()
        goal = parse_mol("FO in in_1 in_2\nFO in_1 a1 b1\nA a1 b1 o1\nFO in_2 a2 b2\nA a2 b2 o2")
        ok = is_isomorphic(final, goal, labeled=True)
    report(7, "the bit is a propagator", ok, f"{len(cert) if cert else '-'} moves: {cert.move_names() if cert else ''}")


# 8 -------------------------------------------------------------------------------------------

def test_criterion_08_compositions(report):
    details, ok = [], True
    p = build_propagator(named("K"), node_molecule("A"))
    cert = check_propagator(p, depth=30)
    ok &= cert is not None and cert.verify()
    details.append(f"multiplier K + distributor A -> propagator ({len(cert) if cert else '-'} moves)")
    for d in (node_molecule("L"), k_distributor()):
        m = build_multiplier_from_distributor2(d)
        cert = check_multiplier(m, depth=30)
        ok &= cert is not None and cert.verify()
        details.append(f"{m.name} multiplier ({len(cert) if cert else '-'} moves)")
    for g in (build_gun(named("BIT"), Behavior.PROPAGATOR), build_gun(node_molecule("A"), Behavior.DISTRIBUTOR_1)):
        residual, emitted = run_gun(g, 3)
        similar = (len(emitted) == 3 and is_isomorphic(residual, g.molecule, labeled=True)
                   and all(is_isomorphic(e, emitted[0], labeled=True) for e in emitted))
        ok &= similar
        details.append(f"{g.name} self-similar over 3 cycles: {similar}")
    report(8, "compositions", ok, "; ".join(details))


# 9 -------------------------------------------------------------------------------------------

def test_criterion_09_curl_is_bit(report):
    cert = curl_is_bit("A")
    ok = cert is not None and cert.move_names() == ["cocomm"]
    if ok:
        final, _ = cert.replay()
        ok = is_isomorphic(cert.harness, curl_molecule("A"), labeled=True) and \
            is_isomorphic(final, named("BIT").molecule, labeled=True)
    report(9, "a curl is a bit", ok, "one cocomm move" if ok else "")


# 10 ------------------------------------------------------------------------------------------

def _reversibility() -> str:
    for kind in RULE_KINDS:
        rng = random.Random(f"acc-{kind.value}")
        done = 0
        while done < 200:
            m = host(rng, SITE_SEEDS[kind.value])
            sites = find_sites(m, kind, FORWARD)
            if not sites:
                continue
            out, back = apply_move_ex(m, rng.choice(sites))
            assert is_isomorphic(apply_move(out, back), m, labeled=True), kind
            done += 1
    return f"reversibility {len(RULE_KINDS)}x200"


def _commutation() -> str:
    rng = random.Random("acc-commute")
    seeds = list(SITE_SEEDS.values())
    done = 0
    while done < 200:
        m = host(rng, rng.choice(seeds))
        m = disjoint_union(m, parse_mol(rng.choice(seeds)))
        sites = [s for k in RULE_KINDS for s in find_sites(m, k, FORWARD)]
        pairs = [(a, b) for i, a in enumerate(sites) for b in sites[i + 1:] if not sites_overlap(a, b)]
        if not pairs:
            continue
        s1, s2 = rng.choice(pairs)
        assert is_isomorphic(apply_move(apply_move(m, s1), s2), apply_move(apply_move(m, s2), s1), labeled=True)
        done += 1
    return "commutation 200 pairs"


def _round_trip() -> str:
    for seed in range(500):
        t = gen_random_term(seed, 1 + seed % 25, free_budget=seed % 3)
        m = encode(t)
        assert dict(Counter(m.nodes.values())) == expected_counts(t), str(t)
        back = decode(m)
        assert back is not None and alpha_eq(back, t), str(t)
    return "round trip + node counts 500 terms"


def _differential() -> str:
    stats = Counter()
    for seed in range(500):
        t = gen_random_term(seed, 1 + seed % 20)
        nf, halted = reference_beta_reduce(t, 50)
        if not halted:
            stats["oracle-open"] += 1
            continue
        final, trace = reduce(encode(t), Priority(), Limits(max_steps=300, max_nodes=300))
        if trace.status is not Status.NORMAL_FORM:
            stats["limit"] += 1
            continue
        got = decode(final)
        if got is None:
            stats["undecodable"] += 1
            continue
        assert alpha_eq(got, nf), f"{t}: graph {got}, oracle {nf}"
        stats["match"] += 1
    assert stats["match"] >= 250
    return "differential " + ", ".join(f"{k} {v}" for k, v in sorted(stats.items()))


def _canonical_vs_brute() -> str:
    rng = random.Random("acc-canon")
    pool = []
    while len(pool) < 100:
        m = random_molecule(rng, rng.randint(1, 6))
        pool.append(m)
        pool.append(renumbered(m, rng))
    pool = pool[:100]
    positives = 0
    for i in range(len(pool)):
        for j in range(i + 1, len(pool)):
            brute = brute_isomorphic(pool[i], pool[j])
            assert is_isomorphic(pool[i], pool[j]) == brute
            positives += brute
    return f"canonical form vs brute force 4950 pairs ({positives} isomorphic)"


def test_criterion_10_property_suites(report):
    parts = [_reversibility(), _commutation(), _round_trip(), _differential(), _canonical_vs_brute()]
    report(10, "property suites", True, "; ".join(parts))
