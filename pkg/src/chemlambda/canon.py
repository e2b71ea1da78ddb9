"""Canonical codes and isomorphism for molecules.

Ports are ordered, so once one node of a connected component is fixed the
rest of the component is numbered deterministically by a port-ordered
breadth-first walk.  Colour refinement (seeded by node kind and the colours
seen through each port) narrows down the candidate start nodes; every
candidate in the smallest colour class is tried and the lexicographically
least walk code wins.  This is exact: an isomorphism that maps one start node
to another extends uniquely along ports.
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

from .molecule import Molecule, arity, components

# Code tokens are 3-tuples with a leading integer tag so that tuples of
# mixed content always compare.
_KIND, _NODE, _FREE = -1, 0, 1


@dataclass(frozen=True)
class Labeling:
    code: tuple
    order: Tuple[int, ...]        # node ids in canonical order
    free_order: Tuple[str, ...]   # free labels in canonical order

    @property
    def rank(self) -> Dict[int, int]:
        return {nid: i for i, nid in enumerate(self.order)}


def _refine(m: Molecule, nodes: List[int], labeled: bool) -> Dict[int, int]:
    def free_token(label):
        return (_FREE, m.free[label] + (":" + label if labeled else ""), 0)

    color = {}
    sigs = {n: (m.nodes[n],) for n in nodes}
    palette = {s: i for i, s in enumerate(sorted(set(sigs.values())))}
    color = {n: palette[sigs[n]] for n in nodes}
    n_colors = len(palette)
    for _ in range(len(nodes)):
        sigs = {}
        for n in nodes:
            row = [color[n]]
            for p in range(arity(m.nodes[n])):
                other = m.link[(n, p)]
                if isinstance(other, str):
                    row.append(free_token(other))
                else:
                    row.append((_NODE, color[other[0]], other[1]))
            sigs[n] = tuple(row)
        palette = {s: i for i, s in enumerate(sorted(set(sigs.values())))}
        color = {n: palette[sigs[n]] for n in nodes}
        if len(palette) == n_colors:
            break
        n_colors = len(palette)
    return color


def _walk(m: Molecule, start: int, labeled: bool):
    num = {start: 0}
    order = [start]
    frees = []
    code = []
    i = 0
    while i < len(order):
        u = order[i]
        i += 1
        kind = m.nodes[u]
        code.append((_KIND, kind, 0))
        for p in range(arity(kind)):
            other = m.link[(u, p)]
            if isinstance(other, str):
                frees.append(other)
                code.append((_FREE, other if labeled else "", 0))
            else:
                v = other[0]
                if v not in num:
                    num[v] = len(order)
                    order.append(v)
                code.append((_NODE, num[v], other[1]))
    return tuple(code), order, frees


def _component_code(m: Molecule, nodes: List[int], labeled: bool):
    color = _refine(m, nodes, labeled)
    classes: Dict[int, List[int]] = {}
    for n in nodes:
        classes.setdefault(color[n], []).append(n)
    # smallest class, ties by colour value (colours are isomorphism invariant)
    best_class = min(classes.items(), key=lambda kv: (len(kv[1]), kv[0]))[1]
    best = None
    for start in sorted(best_class):
        walk = _walk(m, start, labeled)
        if best is None or walk[0] < best[0]:
            best = walk
    return best


def canonical_labeling(m: Molecule, labeled: bool = False) -> Labeling:
    """Canonical code plus the node and free-end order realising it.

    With ``labeled`` the free-end names are part of the code; otherwise
    only the shape counts.
    """
    key = ("labeling", labeled)
    cached = m._cache.get(key)
    if cached is not None:
        return cached
    comps = []
    wires = []
    for nodes, labels in components(m):
        if nodes:
            code, order, frees = _component_code(m, nodes, labeled)
            comps.append((code, nodes[0], order, frees))
        else:
            src = labels[0] if m.free[labels[0]] == "in" else labels[1]
            dst = m.link[src]
            wires.append(((src, dst) if labeled else ("", ""), (src, dst)))
    comps.sort(key=lambda c: (c[0], c[1]))
    wires.sort()
    code = (tuple(c[0] for c in comps), tuple(w[0] for w in wires), m.loops)
    order = tuple(n for c in comps for n in c[2])
    free_order = tuple(f for c in comps for f in c[3]) + tuple(x for w in wires for x in w[1])
    result = Labeling(code, order, free_order)
    m._cache[key] = result
    return result


def canonical_form(m: Molecule, labeled: bool = False) -> bytes:
    """Byte string equal for two molecules exactly when they are isomorphic."""
    key = ("form", labeled)
    cached = m._cache.get(key)
    if cached is None:
        cached = repr(canonical_labeling(m, labeled).code).encode()
        m._cache[key] = cached
    return cached


def code_digest(m: Molecule, labeled: bool = False) -> str:
    """Short hex fingerprint of the canonical code (SHA-256)."""
    return hashlib.sha256(canonical_form(m, labeled)).hexdigest()


def is_isomorphic(m1: Molecule, m2: Molecule, labeled: bool = False) -> bool:
    if (len(m1.nodes), len(m1.free), m1.loops) != (len(m2.nodes), len(m2.free), m2.loops):
        return False
    return canonical_form(m1, labeled) == canonical_form(m2, labeled)


def isomorphism(m1: Molecule, m2: Molecule, labeled: bool = True) -> Optional[Dict[int, int]]:
    """A node map from ``m1`` onto ``m2`` preserving kinds and port links, or None."""
    l1 = canonical_labeling(m1, labeled)
    l2 = canonical_labeling(m2, labeled)
    if l1.code != l2.code:
        return None
    return dict(zip(l1.order, l2.order))
