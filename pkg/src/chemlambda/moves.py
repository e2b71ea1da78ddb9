"""Local, reversible chemlambda moves.

Every move is a rule ``lhs -> rhs`` between two tiny port patterns plus a
boundary table saying which outer port of the left pattern becomes which
outer port of the right one.  Applying a rule forward replaces a matched
left pattern by a fresh copy of the right pattern; applying it in reverse
does the opposite.  Rules whose right side is made of bare wires (beta,
FAN-IN, FO pruning) produce ARROW elements which are fused immediately, so
their reverse sites are *wire placements*: which wire (or loop) each arrow
is re-inserted on.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from itertools import permutations
from typing import Dict, FrozenSet, List, Optional, Sequence, Tuple

from .molecule import End, Molecule, MoleculeError, arity, comb, is_source


class MoveKind(str, Enum):
    BETA = "beta"
    FANIN = "fanin"
    DIST_A = "dist-a"
    DIST_L = "dist-l"
    COASSOC = "coassoc"
    COCOMM = "cocomm"
    PRUNE_FO = "prune-fo"
    PRUNE_A = "prune-a"
    PRUNE_L = "prune-l"
    COMB = "comb"


class Direction(str, Enum):
    FORWARD = "forward"
    REVERSE = "reverse"

    @property
    def opposite(self) -> "Direction":
        return Direction.REVERSE if self is Direction.FORWARD else Direction.FORWARD


FORWARD = Direction.FORWARD
REVERSE = Direction.REVERSE


class StaleSiteError(ValueError):
    """The reaction site no longer matches the molecule."""


Port = Tuple[int, int]          # (pattern node index, port)
Link = Tuple[Port, Port]


@dataclass(frozen=True)
class Pattern:
    kinds: Tuple[str, ...]
    links: Tuple[Link, ...] = ()

    @property
    def wires_only(self) -> bool:
        return bool(self.kinds) and all(k == "ARROW" for k in self.kinds)


@dataclass(frozen=True)
class Rule:
    kind: MoveKind
    lhs: Pattern
    rhs: Pattern
    boundary: Tuple[Tuple[Port, Port], ...]   # (lhs port, rhs port)


def _rule(kind, lhs, lhs_links, rhs, rhs_links, boundary):
    return Rule(kind, Pattern(tuple(lhs), tuple(lhs_links)),
                Pattern(tuple(rhs), tuple(rhs_links)), tuple(boundary))


# Rewrite tables.  Port numbers follow the signatures in molecule.py:
# L(body_in, var_out, root_out)  A(fun_in, arg_in, out)  FO(in, out1, out2)
# FI(in1, in2, out)  T(in)  ARROW(in, out).
RULES: Dict[MoveKind, Tuple[Rule, ...]] = {
    # L(b,v,c) A(c,a,r)  =>  b->r, a->v
    MoveKind.BETA: (_rule(
        MoveKind.BETA, ["L", "A"], [((0, 2), (1, 0))], ["ARROW", "ARROW"], [],
        [((0, 0), (0, 0)), ((1, 2), (0, 1)), ((1, 1), (1, 0)), ((0, 1), (1, 1))]),),
    # FI(a1,a2,c) FO(c,d,e)  =>  a1->e, a2->d
    MoveKind.FANIN: (_rule(
        MoveKind.FANIN, ["FI", "FO"], [((0, 2), (1, 0))], ["ARROW", "ARROW"], [],
        [((0, 0), (0, 0)), ((1, 2), (0, 1)), ((0, 1), (1, 0)), ((1, 1), (1, 1))]),),
    # A(f,a,c) FO(c,d,e)  =>  FO(f,f1,f2) FO(a,a1,a2) A(f1,a1,d) A(f2,a2,e)
    MoveKind.DIST_A: (_rule(
        MoveKind.DIST_A, ["A", "FO"], [((0, 2), (1, 0))],
        ["FO", "FO", "A", "A"],
        [((0, 1), (2, 0)), ((0, 2), (3, 0)), ((1, 1), (2, 1)), ((1, 2), (3, 1))],
        [((0, 0), (0, 0)), ((0, 1), (1, 0)), ((1, 1), (2, 2)), ((1, 2), (3, 2))]),),
    # L(b,v,c) FO(c,d,e)  =>  FO(b,b1,b2) L(b1,v1,d) L(b2,v2,e) FI(v2,v1,v)
    MoveKind.DIST_L: (_rule(
        MoveKind.DIST_L, ["L", "FO"], [((0, 2), (1, 0))],
        ["FO", "L", "L", "FI"],
        [((0, 1), (1, 0)), ((0, 2), (2, 0)), ((2, 1), (3, 0)), ((1, 1), (3, 1))],
        [((0, 0), (0, 0)), ((0, 1), (3, 2)), ((1, 1), (1, 2)), ((1, 2), (2, 2))]),),
    # FO(a,x,d) FO(x,b,c)  =>  FO(a,b,y) FO(y,c,d)
    MoveKind.COASSOC: (_rule(
        MoveKind.COASSOC, ["FO", "FO"], [((0, 1), (1, 0))],
        ["FO", "FO"], [((0, 2), (1, 0))],
        [((0, 0), (0, 0)), ((1, 1), (0, 1)), ((1, 2), (1, 1)), ((0, 2), (1, 2))]),),
    # FO(a,b,c)  =>  FO(a,c,b)
    MoveKind.COCOMM: (_rule(
        MoveKind.COCOMM, ["FO"], [], ["FO"], [],
        [((0, 0), (0, 0)), ((0, 1), (0, 2)), ((0, 2), (0, 1))]),),
    # FO(a,b,c) T(c)  =>  a->b, and the mirror image with T on out1
    MoveKind.PRUNE_FO: (
        _rule(MoveKind.PRUNE_FO, ["FO", "T"], [((0, 2), (1, 0))], ["ARROW"], [],
              [((0, 0), (0, 0)), ((0, 1), (0, 1))]),
        _rule(MoveKind.PRUNE_FO, ["FO", "T"], [((0, 1), (1, 0))], ["ARROW"], [],
              [((0, 0), (0, 0)), ((0, 2), (0, 1))]),
    ),
    # A(f,a,c) T(c)  =>  T(f) T(a)
    MoveKind.PRUNE_A: (_rule(
        MoveKind.PRUNE_A, ["A", "T"], [((0, 2), (1, 0))], ["T", "T"], [],
        [((0, 0), (0, 0)), ((0, 1), (1, 0))]),),
    # L(b,v,c) T(c) T(v)  =>  T(b)
    MoveKind.PRUNE_L: (_rule(
        MoveKind.PRUNE_L, ["L", "T", "T"], [((0, 2), (1, 0)), ((0, 1), (2, 0))], ["T"], [],
        [((0, 0), (0, 0))]),),
}

# Loop placements are written as small integers, wires by their source end.
Wire = object


@dataclass(frozen=True)
class Site:
    """A reaction site: where one enzyme acts, and in which direction.

    ``nodes`` lists the matched pattern nodes in pattern order.  For reverse
    sites of wire rules, ``wires`` gives for each arrow of the pattern the
    wire it sits on (a source end, or an ``int`` naming a loop) and its
    position along that wire counted from the source.
    """
    kind: MoveKind
    direction: Direction
    nodes: Tuple[int, ...] = ()
    variant: int = 0
    wires: Tuple[Tuple[Wire, int], ...] = ()
    edges: FrozenSet = field(default=frozenset(), compare=False, repr=False)

    def fingerprint(self) -> str:
        parts = ["n" + ",".join(map(str, self.nodes)) if self.nodes else "n-"]
        if self.variant:
            parts.append(f"v{self.variant}")
        if self.wires:
            parts.append("w" + ",".join(f"{_wire_str(w)}^{pos}" for w, pos in self.wires))
        return "|".join(parts)

    @classmethod
    def from_fingerprint(cls, kind, direction, text: str) -> "Site":
        kind, direction = MoveKind(kind), Direction(direction)
        nodes, variant, wires = (), 0, ()
        for part in text.split("|"):
            if part.startswith("n"):
                nodes = () if part == "n-" else tuple(int(x) for x in part[1:].split(","))
            elif part.startswith("v"):
                variant = int(part[1:])
            elif part.startswith("w"):
                items = []
                for item in part[1:].split(","):
                    w, pos = item.rsplit("^", 1)
                    items.append((_wire_parse(w), int(pos)))
                wires = tuple(items)
            else:
                raise ValueError(f"bad site fingerprint {text!r}")
        return cls(kind, direction, nodes, variant, wires)

    def with_edges(self, m: Molecule) -> "Site":
        return Site(self.kind, self.direction, self.nodes, self.variant, self.wires,
                    _site_edges(m, self))


MoveInstance = Site


def _wire_str(w) -> str:
    if isinstance(w, int):
        return f"~{w}"
    if isinstance(w, str):
        return f"@{w}"
    return f"{w[0]}.{w[1]}"


def _wire_parse(text: str):
    if text.startswith("~"):
        return int(text[1:])
    if text.startswith("@"):
        return text[1:]
    a, b = text.split(".")
    return (int(a), int(b))


def _edge_key(m: Molecule, end: End):
    """Identify an edge by its source end."""
    return end if is_source(m, end) else m.link[end]


def _site_edges(m: Molecule, site: Site) -> FrozenSet:
    keys = set()
    for nid in site.nodes:
        if nid in m.nodes:
            for p in range(arity(m.nodes[nid])):
                keys.add(("e", _edge_key(m, (nid, p))))
    for w, _pos in site.wires:
        keys.add(("loop", w) if isinstance(w, int) else ("e", w))
    return frozenset(keys)


# ---------------------------------------------------------------------------
# Pattern matching


def _by_kind(m: Molecule) -> Dict[str, List[int]]:
    cached = m._cache.get("by_kind")
    if cached is None:
        cached = {}
        for nid in sorted(m.nodes):
            cached.setdefault(m.nodes[nid], []).append(nid)
        m._cache["by_kind"] = cached
    return cached


def _match_order(p: Pattern):
    adj: Dict[int, List[Tuple[int, int, int]]] = {i: [] for i in range(len(p.kinds))}
    for (i, a), (j, b) in p.links:
        adj[i].append((a, j, b))
        adj[j].append((b, i, a))
    order, seen = [], set()
    for root in range(len(p.kinds)):
        if root in seen:
            continue
        seen.add(root)
        queue = [root]
        while queue:
            i = queue.pop(0)
            order.append(i)
            for _, j, _ in adj[i]:
                if j not in seen:
                    seen.add(j)
                    queue.append(j)
    return order, adj


def _matches(m: Molecule, p: Pattern) -> List[Tuple[int, ...]]:
    order, adj = _match_order(p)
    by_kind = _by_kind(m)
    n = len(p.kinds)
    found = []
    assign: Dict[int, int] = {}

    def ok(i: int, nid: int) -> bool:
        if m.nodes[nid] != p.kinds[i] or nid in assign.values():
            return False
        for a, j, b in adj[i]:
            if j in assign and m.link.get((nid, a)) != (assign[j], b):
                return False
        return True

    def extend(k: int) -> None:
        if k == n:
            found.append(tuple(assign[i] for i in range(n)))
            return
        i = order[k]
        anchor = next(((a, j, b) for a, j, b in adj[i] if j in assign), None)
        if anchor is not None:
            a, j, b = anchor
            other = m.link.get((assign[j], b))
            cands = [] if other is None or isinstance(other, str) or other[1] != a else [other[0]]
        else:
            cands = by_kind.get(p.kinds[i], [])
        for nid in cands:
            if ok(i, nid):
                assign[i] = nid
                extend(k + 1)
                del assign[i]

    extend(0)
    return found


def _pattern_holds(m: Molecule, p: Pattern, nodes: Sequence[int]) -> bool:
    if len(nodes) != len(p.kinds) or len(set(nodes)) != len(nodes):
        return False
    for nid, kind in zip(nodes, p.kinds):
        if m.nodes.get(nid) != kind:
            return False
    for (i, a), (j, b) in p.links:
        if m.link.get((nodes[i], a)) != (nodes[j], b):
            return False
    return True


def _wire_sources(m: Molecule) -> List[End]:
    return [src for src, _ in m.edges()]


def _placements(m: Molecule, n_arrows: int) -> List[Tuple[Tuple[Wire, int], ...]]:
    wires = _wire_sources(m)
    out: List[Tuple[Tuple[Wire, int], ...]] = []
    if n_arrows == 1:
        out.extend(((w, 0),) for w in wires)
        if m.loops:
            out.append(((0, 0),))
        return out
    for w1, w2 in permutations(wires, 2):
        out.append(((w1, 0), (w2, 0)))
    for w in wires:
        out.append(((w, 0), (w, 1)))
        out.append(((w, 1), (w, 0)))
    if m.loops:
        out.append(((0, 0), (0, 1)))
        for w in wires:
            out.append(((w, 0), (0, 0)))
            out.append(((0, 0), (w, 0)))
    if m.loops >= 2:
        out.append(((0, 0), (1, 0)))
    return out


def _placement_valid(m: Molecule, wires) -> bool:
    loops_needed = {w for w, _ in wires if isinstance(w, int)}
    if loops_needed and max(loops_needed) >= m.loops:
        return False
    if loops_needed and loops_needed != set(range(len(loops_needed))):
        return False
    for w, _ in wires:
        if isinstance(w, int):
            continue
        if isinstance(w, str):
            if m.free.get(w) != "in" or w not in m.link:
                return False
        elif w[0] not in m.nodes or not 0 <= w[1] < arity(m.nodes[w[0]]) or not is_source(m, w):
            return False
    by_wire: Dict[object, List[int]] = {}
    for w, pos in wires:
        by_wire.setdefault(w, []).append(pos)
    return all(sorted(v) == list(range(len(v))) for v in by_wire.values())


# ---------------------------------------------------------------------------
# Site enumeration


def _site_sort_key(m: Molecule):
    from .canon import canonical_labeling
    lab = canonical_labeling(m, labeled=True)
    rank = lab.rank
    frank = {f: i for i, f in enumerate(lab.free_order)}

    def wkey(w):
        if isinstance(w, int):
            return (2, w, 0)
        if isinstance(w, str):
            return (1, frank.get(w, -1), 0)
        return (0, rank[w[0]], w[1])

    def key(site: Site):
        return (tuple(rank[n] for n in site.nodes), site.variant,
                tuple((wkey(w), pos) for w, pos in site.wires))
    return key


def find_sites(m: Molecule, kind: MoveKind, direction: Direction = FORWARD,
               ordered: bool = True) -> List[Site]:
    """All reaction sites of ``kind`` in ``m``.

    Forward sites match the left pattern, reverse sites the right one.  The
    list is sorted by canonical node order when ``ordered`` (the default),
    else by node id.
    """
    kind, direction = MoveKind(kind), Direction(direction)
    sites: List[Site] = []
    if kind is MoveKind.COMB:
        if direction is FORWARD:
            sites = [Site(kind, direction, (nid,)) for nid in _by_kind(m).get("ARROW", [])]
        else:
            sites = [Site(kind, direction, (), 0, p) for p in _placements(m, 1)]
    else:
        for variant, rule in enumerate(RULES[kind]):
            pattern = rule.lhs if direction is FORWARD else rule.rhs
            if pattern.wires_only:
                for p in _placements(m, len(pattern.kinds)):
                    sites.append(Site(kind, direction, (), variant, p))
            else:
                for nodes in _matches(m, pattern):
                    sites.append(Site(kind, direction, nodes, variant))
    if ordered and len(sites) > 1:
        sites.sort(key=_site_sort_key(m))
    return [s.with_edges(m) for s in sites]


def site_matches(m: Molecule, site: Site) -> bool:
    if site.kind is MoveKind.COMB:
        if site.direction is FORWARD:
            return len(site.nodes) == 1 and m.nodes.get(site.nodes[0]) == "ARROW"
        return len(site.wires) == 1 and _placement_valid(m, site.wires)
    rules = RULES[site.kind]
    if not 0 <= site.variant < len(rules):
        return False
    rule = rules[site.variant]
    pattern = rule.lhs if site.direction is FORWARD else rule.rhs
    if pattern.wires_only:
        return len(site.wires) == len(pattern.kinds) and not site.nodes and _placement_valid(m, site.wires)
    return not site.wires and _pattern_holds(m, pattern, site.nodes)


# ---------------------------------------------------------------------------
# Rewriting


def _expand(m: Molecule, wires) -> Tuple[Molecule, List[int]]:
    """Insert ARROW elements per placement; returns arrow ids in pattern order."""
    out = m.copy()
    ids = [out._new_node("ARROW") for _ in wires]
    by_wire: Dict[object, List[Tuple[int, int]]] = {}
    for k, (w, pos) in enumerate(wires):
        by_wire.setdefault(w, []).append((pos, ids[k]))
    loops_used = 0
    for w in sorted(by_wire, key=repr):
        chain = [nid for _, nid in sorted(by_wire[w])]
        for a, b in zip(chain, chain[1:]):
            out._join((a, 1), (b, 0))
        if isinstance(w, int):
            loops_used += 1
            out._join((chain[-1], 1), (chain[0], 0))
        else:
            target = m.link[w]
            out._join(w, (chain[0], 0))
            out._join((chain[-1], 1), target)
    out.loops -= loops_used
    return out, ids


def _replace(m: Molecule, old: Sequence[int], new_pattern: Pattern,
             boundary: Sequence[Tuple[Port, Port]]) -> Tuple[Molecule, List[int]]:
    out = m.copy()
    new_ids = [out._new_node(k) for k in new_pattern.kinds]
    pmap = {(old[i], a): (new_ids[j], b) for (i, a), (j, b) in boundary}
    joins = []
    for old_port, new_port in pmap.items():
        partner = m.link[old_port]
        if not isinstance(partner, str) and partner[0] in old and partner not in pmap:
            raise MoleculeError("boundary port linked to pattern interior")
        joins.append((new_port, pmap.get(partner, partner)))
    for nid in old:
        out._remove_node(nid)
    for a, b in joins:
        out._join(a, b)
    for (i, a), (j, b) in new_pattern.links:
        out._join((new_ids[i], a), (new_ids[j], b))
    return out, new_ids


def _arrow_placement(m: Molecule, arrow_ids: Sequence[int]) -> Tuple[Tuple[Wire, int], ...]:
    """Where each arrow ends up once arrows are fused (inverse of ``_expand``)."""
    wanted = set(arrow_ids)
    result: Dict[int, Tuple[Wire, int]] = {}
    loop_index: Dict[int, int] = {}
    for nid in arrow_ids:
        if nid in result:
            continue
        cur, pos, cycle = nid, 0, False
        seen = {nid}
        while True:
            src = m.link[(cur, 0)]
            if not isinstance(src, str) and m.nodes[src[0]] == "ARROW":
                cur = src[0]
                if cur == nid:
                    cycle = True
                    break
                if cur in seen:
                    break
                seen.add(cur)
                if cur in wanted:
                    pos += 1
                continue
            break
        if cycle:
            members = []
            cur = nid
            while True:
                if cur in wanted:
                    members.append(cur)
                cur = m.link[(cur, 1)][0]
                if cur == nid:
                    break
            idx = loop_index.setdefault(nid, len(set(loop_index.values())))
            for k, a in enumerate(members):
                loop_index[a] = idx
                result[a] = (idx, k)
        else:
            result[nid] = (src, pos)
    return tuple(result[nid] for nid in arrow_ids)


def apply_move_ex(m: Molecule, site: Site) -> Tuple[Molecule, Site]:
    """Apply ``site`` and also return the site of the inverse move in the result."""
    if not site_matches(m, site):
        raise StaleSiteError(f"{site.kind.value} {site.direction.value} site {site.fingerprint()} does not match")
    if site.kind is MoveKind.COMB:
        return _apply_comb(m, site)
    rule = RULES[site.kind][site.variant]
    if site.direction is FORWARD:
        src, dst = rule.lhs, rule.rhs
        boundary = rule.boundary
        old, work = site.nodes, m
    else:
        src, dst = rule.rhs, rule.lhs
        boundary = tuple((b, a) for a, b in rule.boundary)
        if src.wires_only:
            work, old = _expand(m, site.wires)
        else:
            work, old = m, site.nodes
    out, new_ids = _replace(work, old, dst, boundary)
    back = site.direction.opposite
    if dst.wires_only:
        created = Site(site.kind, back, (), site.variant, _arrow_placement(out, new_ids))
        out = comb(out)
    else:
        out = comb(out)
        created = Site(site.kind, back, tuple(new_ids), site.variant)
    return out, created.with_edges(out)


def _apply_comb(m: Molecule, site: Site) -> Tuple[Molecule, Site]:
    if site.direction is FORWARD:
        nid = site.nodes[0]
        placement = _arrow_placement(m, [nid])
        out = m.copy()
        src, dst = out.link[(nid, 0)], out.link[(nid, 1)]
        out._remove_node(nid)
        if src == (nid, 1):
            out.loops += 1
        else:
            out._join(src, dst)
        return out, Site(MoveKind.COMB, REVERSE, (), 0, placement).with_edges(out)
    out, ids = _expand(m, site.wires)
    return out, Site(MoveKind.COMB, FORWARD, (ids[0],)).with_edges(out)


def apply_move(m: Molecule, site: Site, direction: Optional[Direction] = None) -> Molecule:
    """Apply one move at ``site``; arrows are fused afterwards.

    Sites carry their direction (forward sites match the left pattern,
    reverse ones the right); ``direction``, when given, must agree.
    """
    if direction is not None and Direction(direction) is not site.direction:
        raise ValueError(f"site is a {site.direction.value} site, not {Direction(direction).value}")
    return apply_move_ex(m, site)[0]


def sites_overlap(s1: Site, s2: Site) -> bool:
    """True when two sites share a node, an incident edge, or a loop."""
    if set(s1.nodes) & set(s2.nodes):
        return True
    return bool(s1.edges & s2.edges)


ALL_KINDS = tuple(MoveKind)
