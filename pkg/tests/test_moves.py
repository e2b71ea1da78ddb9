from __future__ import annotations

import random

import pytest

from chemlambda.canon import is_isomorphic
from chemlambda.lam import decode, parse_lambda
from chemlambda.molecule import connect, disjoint_union, parse_mol, serialize_mol, validate
from chemlambda.moves import (FORWARD, REVERSE, MoveKind, Site, StaleSiteError, apply_move,
                              apply_move_ex, find_sites, site_matches, sites_overlap)

from helpers import SITE_SEEDS, host

K = "L a x r\nL x y a\nT y"
RULE_KINDS = [k for k in MoveKind if k is not MoveKind.COMB]


def after(text, kind, index=0, direction=FORWARD):
    m = parse_mol(text)
    return apply_move(m, find_sites(m, kind, direction)[index])


# -- find_sites ---------------------------------------------------------------

def test_beta_site_on_identity_applied():
    m = parse_mol("L e e c\nA c z r")
    sites = find_sites(m, MoveKind.BETA)
    assert len(sites) == 1
    lam, app = sites[0].nodes
    assert m.nodes[lam] == "L" and m.nodes[app] == "A"
    assert m.link[(lam, 2)] == (app, 0)


def test_no_beta_in_k():
    assert find_sites(parse_mol(K), MoveKind.BETA) == []


def test_fanin_site():
    assert len(find_sites(parse_mol("FI a b c\nFO c d e"), MoveKind.FANIN)) == 1


def test_sites_are_deterministic_under_renaming():
    a = parse_mol("L e e c\nA c z r\nL f f g\nA g w s")
    b = parse_mol("L f f g\nA g w s\nL e e c\nA c z r")
    fa = [tuple(a.nodes[n] for n in s.nodes) for s in find_sites(a, MoveKind.BETA)]
    fb = [tuple(b.nodes[n] for n in s.nodes) for s in find_sites(b, MoveKind.BETA)]
    assert fa == fb and len(fa) == 2


def test_mirror_prune_fo_matches_both_outputs():
    assert len(find_sites(parse_mol("FO a b c\nT c"), MoveKind.PRUNE_FO)) == 1
    assert len(find_sites(parse_mol("FO a b c\nT b"), MoveKind.PRUNE_FO)) == 1
    assert is_isomorphic(after("FO a b c\nT b", MoveKind.PRUNE_FO), parse_mol("ARROW a c"), labeled=True)


def test_comb_sites_only_on_raw_arrows():
    raw = parse_mol("ARROW a b\nA b c d", normalize=False)
    sites = find_sites(raw, MoveKind.COMB)
    assert len(sites) == 1
    assert is_isomorphic(apply_move(raw, sites[0]), parse_mol("A a c d"), labeled=True)
    assert find_sites(parse_mol("A a c d"), MoveKind.COMB) == []


# -- rewrite tables -------------------------------------------------------------

def test_beta_on_identity_applied_gives_wire():
    out = after("L e e c\nA c z r", MoveKind.BETA)
    assert serialize_mol(out) == "ARROW z r"
    assert decode(out, "r") == parse_lambda("z")


def test_fanin_is_crossed():
    out = after("FI a b c\nFO c d e", MoveKind.FANIN)
    assert is_isomorphic(out, parse_mol("ARROW a e\nARROW b d"), labeled=True)


def test_dist_a_shape():
    out = after("A f a c\nFO c d e", MoveKind.DIST_A)
    want = parse_mol("FO f f1 f2\nFO a a1 a2\nA f1 a1 d\nA f2 a2 e")
    assert is_isomorphic(out, want, labeled=True)


def test_dist_l_shape():
    out = after("L b v c\nFO c d e", MoveKind.DIST_L)
    want = parse_mol("FO b b1 b2\nL b1 v1 d\nL b2 v2 e\nFI v2 v1 v")
    assert is_isomorphic(out, want, labeled=True)


def test_coassoc_shape():
    out = after("FO a x d\nFO x b c", MoveKind.COASSOC)
    assert is_isomorphic(out, parse_mol("FO a b y\nFO y c d"), labeled=True)


def test_cocomm_is_an_involution():
    m = parse_mol("FO a b c")
    once = after("FO a b c", MoveKind.COCOMM)
    assert is_isomorphic(once, parse_mol("FO a c b"), labeled=True)
    assert not is_isomorphic(once, m, labeled=True)
    twice = apply_move(once, find_sites(once, MoveKind.COCOMM)[0])
    assert is_isomorphic(twice, m, labeled=True)


def test_prune_a_shape():
    assert is_isomorphic(after("A f a c\nT c", MoveKind.PRUNE_A), parse_mol("T f\nT a"), labeled=True)


def test_prune_l_needs_both_terminations():
    assert is_isomorphic(after("L b v c\nT c\nT v", MoveKind.PRUNE_L), parse_mol("T b"), labeled=True)
    assert find_sites(parse_mol("L b v c\nT c"), MoveKind.PRUNE_L) == []


def test_fanin_then_reverse_restores():
    m = parse_mol("FI a b c\nFO c d e")
    out, back = apply_move_ex(m, find_sites(m, MoveKind.FANIN)[0])
    assert back.direction is REVERSE
    assert is_isomorphic(apply_move(out, back), m, labeled=True)


def test_reverse_beta_on_a_wire_recreates_the_redex():
    m = parse_mol("ARROW z r")
    sites = find_sites(m, MoveKind.BETA, REVERSE)
    assert sites
    outs = [apply_move(m, s) for s in sites]
    assert any(is_isomorphic(o, parse_mol("L e e c\nA c z r"), labeled=True) for o in outs)


@pytest.mark.parametrize("kind, delta", [
    ("beta", -2), ("fanin", -2), ("dist-a", 2), ("dist-l", 2), ("coassoc", 0),
    ("cocomm", 0), ("prune-fo", -2), ("prune-a", 0), ("prune-l", -2),
])
def test_node_count_locality(kind, delta):
    m = parse_mol(SITE_SEEDS[kind])
    out = after(SITE_SEEDS[kind], MoveKind(kind))
    assert len(out.nodes) - len(m.nodes) == delta
    assert "ARROW" not in out.nodes.values()


# -- errors ---------------------------------------------------------------------

def test_stale_site():
    m = parse_mol("L e e c\nA c z r")
    site = find_sites(m, MoveKind.BETA)[0]
    out = apply_move(m, site)
    assert not site_matches(out, site)
    with pytest.raises(StaleSiteError):
        apply_move(out, site)


def test_direction_must_agree_with_site():
    m = parse_mol("FO a b c")
    site = find_sites(m, MoveKind.COCOMM)[0]
    with pytest.raises(ValueError):
        apply_move(m, site, REVERSE)
    assert is_isomorphic(apply_move(m, site, FORWARD), parse_mol("FO a c b"), labeled=True)


def test_fingerprint_round_trip():
    m = parse_mol("ARROW z r\nFO a b c")
    for kind in RULE_KINDS:
        for d in (FORWARD, REVERSE):
            for s in find_sites(m, kind, d):
                back = Site.from_fingerprint(kind, d, s.fingerprint())
                assert back == s and site_matches(m, back)


# -- overlap ----------------------------------------------------------------------

def test_same_site_overlaps_itself():
    s = find_sites(parse_mol("L e e c\nA c z r"), MoveKind.BETA)[0]
    assert sites_overlap(s, s)


def test_sites_in_disjoint_components_do_not_overlap():
    m = parse_mol("L e e c\nA c z r\nL f f g\nA g w s")
    s1, s2 = find_sites(m, MoveKind.BETA)
    assert not sites_overlap(s1, s2)


def test_beta_and_dist_sharing_an_application_node_overlap():
    m = parse_mol("L b v c\nA c a r\nFO r d e")
    beta = find_sites(m, MoveKind.BETA)[0]
    dist = find_sites(m, MoveKind.DIST_A)[0]
    assert set(beta.nodes) & set(dist.nodes)
    assert sites_overlap(beta, dist)


def test_sites_joined_by_one_edge_overlap():
    # the FO's output feeds the second redex's L node: shared edge, no shared node
    m = parse_mol("FO i x o\nT x\nL o v c\nA c v r")
    prune = find_sites(m, MoveKind.PRUNE_FO)[0]
    beta = find_sites(m, MoveKind.BETA)[0]
    assert not set(prune.nodes) & set(beta.nodes)
    assert sites_overlap(prune, beta)


# -- properties -------------------------------------------------------------------

@pytest.mark.parametrize("kind", [k.value for k in RULE_KINDS])
def test_reversibility_200_sites(kind):
    rng = random.Random(kind)
    done = tries = 0
    while done < 200:
        tries += 1
        assert tries < 2000
        m = host(rng, SITE_SEEDS[kind])
        sites = find_sites(m, MoveKind(kind), FORWARD)
        if not sites:
            continue
        s = rng.choice(sites)
        out, back = apply_move_ex(m, s)
        assert validate(out) == []
        assert site_matches(out, back)
        restored = apply_move(out, back)
        assert is_isomorphic(restored, m, labeled=True)
        done += 1


@pytest.mark.parametrize("kind", [k.value for k in RULE_KINDS])
def test_reverse_then_forward_restores(kind):
    rng = random.Random("rev" + kind)
    done = tries = 0
    while done < 40:
        tries += 1
        assert tries < 2000
        m = host(rng, SITE_SEEDS[kind])
        m = apply_move(m, rng.choice(find_sites(m, MoveKind(kind))))
        sites = find_sites(m, MoveKind(kind), REVERSE)
        if not sites:
            continue
        s = rng.choice(sites)
        out, back = apply_move_ex(m, s)
        assert validate(out) == []
        assert is_isomorphic(apply_move(out, back), m, labeled=True)
        done += 1


def test_commutation_200_pairs():
    rng = random.Random(7)
    seeds = list(SITE_SEEDS.values())
    kinds = RULE_KINDS
    done = tries = 0
    while done < 200:
        tries += 1
        assert tries < 5000
        m = host(rng, rng.choice(seeds))
        m = disjoint_union(m, parse_mol(rng.choice(seeds)))
        outs, ins = m.free_out(), m.free_in()
        if outs and ins and rng.random() < 0.5:
            m = connect(m, rng.choice(outs), rng.choice(ins))
        sites = [s for k in kinds for s in find_sites(m, k, FORWARD)]
        pairs = [(a, b) for i, a in enumerate(sites) for b in sites[i + 1:] if not sites_overlap(a, b)]
        if not pairs:
            continue
        s1, s2 = rng.choice(pairs)
        m12 = apply_move(apply_move(m, s1), s2)
        m21 = apply_move(apply_move(m, s2), s1)
        assert validate(m12) == []
        assert is_isomorphic(m12, m21, labeled=True)
        done += 1


def test_moves_leave_the_rest_untouched():
    rng = random.Random(5)
    for _ in range(50):
        m = host(rng, SITE_SEEDS["dist-a"])
        s = find_sites(m, MoveKind.DIST_A)[0]
        out = apply_move(m, s)
        for nid, kind in m.nodes.items():
            if nid not in s.nodes:
                assert out.nodes[nid] == kind
