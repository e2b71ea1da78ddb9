"""Shared generators and independent oracles for the test-suite."""
from __future__ import annotations

import random
from itertools import permutations
from typing import List, Sequence

from collections import Counter

from chemlambda.lam import App, Lam, Var, count
from chemlambda.molecule import Molecule, arity, connect, disjoint_union, parse_mol, signature

KINDS = ("L", "A", "FO", "FI", "T")


def random_molecule(rng: random.Random, n_nodes: int, kinds: Sequence[str] = KINDS,
                    loops: int = 0, free_wires: int = 0) -> Molecule:
    """Random valid molecule: nodes of the given kinds, out-ports paired with
    in-ports at random, leftovers become free ends."""
    m = Molecule()
    for _ in range(n_nodes):
        m._new_node(rng.choice(kinds))
    outs, ins = [], []
    for nid, kind in m.nodes.items():
        for p, pol in enumerate(signature(kind)):
            (outs if pol == "o" else ins).append((nid, p))
    rng.shuffle(outs)
    rng.shuffle(ins)
    k = min(len(outs), len(ins))
    k = rng.randint(max(0, k - 2), k) if k else 0
    for a, b in zip(outs[:k], ins[:k]):
        m._join(a, b)
    counter = 0
    for end in outs[k:]:
        label = f"x{counter}"
        counter += 1
        m.free[label] = "out"
        m._join(end, label)
    for end in ins[k:]:
        label = f"x{counter}"
        counter += 1
        m.free[label] = "in"
        m._join(end, label)
    for _ in range(free_wires):
        a, b = f"x{counter}", f"x{counter + 1}"
        counter += 2
        m.free[a], m.free[b] = "in", "out"
        m._join(a, b)
    m.loops = loops
    return m


def renumbered(m: Molecule, rng: random.Random, rename_labels: bool = True) -> Molecule:
    """Same molecule with node ids shuffled (and free labels renamed)."""
    ids = list(m.nodes)
    new_ids = rng.sample(range(100, 100 + 3 * len(ids) + 1), len(ids))
    nmap = dict(zip(ids, new_ids))
    labels = list(m.free)
    lmap = {l: (f"r{i}" if rename_labels else l) for i, l in enumerate(rng.sample(labels, len(labels)))}

    def tr(end):
        return lmap[end] if isinstance(end, str) else (nmap[end[0]], end[1])

    out = Molecule()
    for nid, kind in m.nodes.items():
        out.nodes[nmap[nid]] = kind
    for l, pol in m.free.items():
        out.free[lmap[l]] = pol
    for a, b in m.link.items():
        out.link[tr(a)] = tr(b)
    out.loops = m.loops
    out.next_id = max(out.nodes, default=-1) + 1
    return out


def brute_isomorphic(m1: Molecule, m2: Molecule, labeled: bool = False) -> bool:
    """Isomorphism by trying every kind-preserving node bijection."""
    if m1.loops != m2.loops or len(m1.nodes) != len(m2.nodes) or len(m1.free) != len(m2.free):
        return False
    if sorted(m1.free.values()) != sorted(m2.free.values()):
        return False

    def wires(m):
        out = []
        for l, pol in m.free.items():
            other = m.link[l]
            if pol == "in" and isinstance(other, str):
                out.append((l, other) if labeled else ("", ""))
        return sorted(out)

    if wires(m1) != wires(m2):
        return False
    n1, n2 = sorted(m1.nodes), sorted(m2.nodes)
    if sorted(m1.nodes.values()) != sorted(m2.nodes.values()):
        return False
    for perm in permutations(n2):
        f = dict(zip(n1, perm))
        if any(m1.nodes[a] != m2.nodes[b] for a, b in f.items()):
            continue
        ok = True
        for a in n1:
            for p in range(arity(m1.nodes[a])):
                x, y = m1.link[(a, p)], m2.link[(f[a], p)]
                if isinstance(x, str) or isinstance(y, str):
                    if not (isinstance(x, str) and isinstance(y, str)):
                        ok = False
                    elif labeled and x != y:
                        ok = False
                    elif m1.free[x] != m2.free[y]:
                        ok = False
                elif (f[x[0]], x[1]) != y:
                    ok = False
                if not ok:
                    break
            if not ok:
                break
        if ok:
            return True
    return False


# Molecules rich in reaction sites: each is a seed for random local edits.
SITE_SEEDS = {
    "beta": "L e e c\nA c z r",
    "fanin": "FI a b c\nFO c d e",
    "dist-a": "A f a c\nFO c d e",
    "dist-l": "L b v c\nFO c d e",
    "coassoc": "FO a x d\nFO x b c",
    "cocomm": "FO a b c",
    "prune-fo": "FO a b c\nT c",
    "prune-a": "A f a c\nT c",
    "prune-l": "L b v c\nT c\nT v",
}


def host(rng: random.Random, seed_text: str) -> Molecule:
    """A seed pattern inside random surroundings."""
    m = disjoint_union(parse_mol(seed_text), random_molecule(rng, rng.randint(0, 6)))
    for _ in range(rng.randint(0, 4)):
        outs, ins = m.free_out(), m.free_in()
        if not outs or not ins:
            break
        m = connect(m, rng.choice(outs), rng.choice(ins))
    return m


def binder_uses(t, env=None, acc=None) -> List[int]:
    """Use count per binder occurrence, computed on the term."""
    acc = [] if acc is None else acc
    env = {} if env is None else env
    if isinstance(t, Var):
        if t.name in env:
            acc[env[t.name]] += 1
    elif isinstance(t, App):
        binder_uses(t.fun, env, acc)
        binder_uses(t.arg, env, acc)
    else:
        acc.append(0)
        binder_uses(t.body, {**env, t.var: len(acc) - 1}, acc)
    return acc


def free_uses(t, bound=frozenset()) -> Counter:
    if isinstance(t, Var):
        return Counter() if t.name in bound else Counter([t.name])
    if isinstance(t, App):
        return free_uses(t.fun, bound) + free_uses(t.arg, bound)
    return free_uses(t.body, bound | {t.var})


def expected_counts(t) -> dict:
    """Node counts encode(t) must have, read off the term (zero counts dropped)."""
    uses = binder_uses(t)
    fo = sum(max(k - 1, 0) for k in uses) + sum(k - 1 for k in free_uses(t).values())
    counts = {"A": count(t, App), "L": count(t, Lam), "T": uses.count(0), "FO": fo}
    return {k: v for k, v in counts.items() if v}
