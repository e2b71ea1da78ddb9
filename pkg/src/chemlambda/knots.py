"""Tangle diagrams translated into molecules.

A real crossing becomes a pair of nodes.  Convention A uses a fanout and an
application node, FO(over_in, over_out, t) A(t, under_in, under_out);
convention B a lambda and an application node, L(over_in, under_out, t)
A(t, under_in, over_out).  Virtual crossings are transparent.

Tangle text format, one item per line (``#`` comments)::

    STRAND s: p0 p1 ... pk     oriented strand through points p0..pk
                               (closed when pk == p0)
    X over under sign          real crossing; the strand through point
                               ``over`` passes over the one through ``under``
    V a b                      virtual crossing of the points a and b
    NODE <mol line>            an extra node; its edge names are glued to
                               open strand ends with the same name

Open strand ends become free ends named after their points: the first point
is an input, the last an exit.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from .canon import is_isomorphic
from .engine import ALL_MOVES, search_reach
from .molecule import Molecule, MoleculeError, comb, glue, parse_mol, validate
from .moves import MoveKind, find_sites, apply_move_ex

CONVENTIONS = ("A", "B")

# Which corner each strand end occupies, for strands running upwards.
CORNERS = {
    +1: {"over_in": "SW", "over_out": "NE", "under_in": "SE", "under_out": "NW"},
    -1: {"over_in": "SE", "over_out": "NW", "under_in": "SW", "under_out": "NE"},
}
CORNER_ORDER = ("NW", "NE", "SW", "SE")

# Fragment text per convention, written with the strand-end names.
FRAGMENTS = {
    "A": "FO over_in over_out t\nA t under_in under_out",
    "B": "L over_in under_out t\nA t under_in over_out",
}


class TangleError(ValueError):
    def __init__(self, message: str, crossing: Optional[int] = None):
        prefix = f"crossing {crossing}: " if crossing is not None else ""
        super().__init__(prefix + message)
        self.crossing = crossing


@dataclass(frozen=True)
class Crossing:
    over: str
    under: str
    sign: int = 1          # +1, -1; 0 for a virtual crossing

    @property
    def virtual(self) -> bool:
        return self.sign == 0


@dataclass
class TangleDiagram:
    strands: Dict[str, Tuple[str, ...]] = field(default_factory=dict)
    crossings: List[Crossing] = field(default_factory=list)
    nodes: List[str] = field(default_factory=list)   # extra mol lines

    def closed(self, name: str) -> bool:
        pts = self.strands[name]
        return len(pts) > 1 and pts[0] == pts[-1]

    def dumps(self) -> str:
        lines = [f"STRAND {n}: {' '.join(p)}" for n, p in self.strands.items()]
        for c in self.crossings:
            if c.virtual:
                lines.append(f"V {c.over} {c.under}")
            else:
                lines.append(f"X {c.over} {c.under} {'+' if c.sign > 0 else '-'}")
        lines += [f"NODE {line}" for line in self.nodes]
        return "\n".join(lines) + "\n"


def parse_tangle(text: str) -> TangleDiagram:
    d = TangleDiagram()
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        head, _, rest = line.partition(" ")
        if head == "STRAND":
            name, sep, pts = rest.partition(":")
            if not sep or not pts.split():
                raise TangleError(f"line {lineno}: expected 'STRAND name: points'")
            d.strands[name.strip()] = tuple(pts.split())
        elif head == "X":
            parts = rest.split()
            if len(parts) != 3 or parts[2] not in ("+", "-", "+1", "-1"):
                raise TangleError(f"line {lineno}: expected 'X over under sign'")
            d.crossings.append(Crossing(parts[0], parts[1], 1 if parts[2].startswith("+") else -1))
        elif head == "V":
            parts = rest.split()
            if len(parts) != 2:
                raise TangleError(f"line {lineno}: expected 'V a b'")
            d.crossings.append(Crossing(parts[0], parts[1], 0))
        elif head == "NODE":
            d.nodes.append(rest)
        else:
            raise TangleError(f"line {lineno}: unknown item {head!r}")
    return d


def crossing_fragment(convention: str = "A", sign: int = 1) -> Molecule:
    """The two-node fragment of one crossing, free ends named NW, NE, SW, SE."""
    if convention not in FRAGMENTS:
        raise ValueError(f"unknown convention {convention!r}")
    corners = CORNERS[1 if sign >= 0 else -1]
    return parse_mol(FRAGMENTS[convention]).relabel(corners)


def _locate(d: TangleDiagram) -> Dict[str, Tuple[str, int]]:
    where: Dict[str, Tuple[str, int]] = {}
    for name, pts in d.strands.items():
        body = pts[:-1] if d.closed(name) else pts
        for i, p in enumerate(body):
            if p in where:
                raise TangleError(f"point {p!r} appears twice")
            where[p] = (name, i)
    return where


def tangle_to_molecule(d: TangleDiagram, convention: str = "A") -> Molecule:
    """Replace real crossings by fragments, drop virtual ones, join strand arcs."""
    if convention not in FRAGMENTS:
        raise ValueError(f"unknown convention {convention!r}")
    where = _locate(d)
    role: Dict[str, Tuple[int, str]] = {}
    transparent = set()
    for ci, c in enumerate(d.crossings):
        for p in (c.over, c.under):
            if p not in where:
                raise TangleError(f"point {p!r} is not on a strand", ci)
            if p in role or p in transparent:
                raise TangleError(f"point {p!r} used by two crossings", ci)
        if c.over == c.under:
            raise TangleError("a strand point cannot cross itself", ci)
        for p, side in ((c.over, "over"), (c.under, "under")):
            if c.virtual:
                transparent.add(p)
            else:
                role[p] = (ci, side)
    for name, pts in d.strands.items():
        if not d.closed(name):
            for end in (pts[0], pts[-1]):
                if end in role or end in transparent:
                    raise TangleError(f"open end {end!r} of strand {name!r} sits on a crossing",
                                      role.get(end, (None,))[0])

    parts: List[Molecule] = []
    for ci, c in enumerate(d.crossings):
        if not c.virtual:
            parts.append(parse_mol(FRAGMENTS[convention]).relabel({
                "over_in": f"{c.over}<", "over_out": f"{c.over}>",
                "under_in": f"{c.under}<", "under_out": f"{c.under}>",
            }))
    loops = 0
    for name, pts in d.strands.items():
        closed = d.closed(name)
        body = list(pts[:-1] if closed else pts)
        if not closed and len(body) < 2:
            raise TangleError(f"strand {name!r} needs two points")
        kept = [p for i, p in enumerate(body)
                if p in role or (not closed and i in (0, len(body) - 1))]
        if closed and not kept:
            loops += 1
            continue
        arcs = list(zip(kept, kept[1:]))
        if closed:
            arcs.append((kept[-1], kept[0]))
        for a, b in arcs:
            src = f"{a}>" if a in role else a
            dst = f"{b}<" if b in role else b
            parts.append(parse_mol(f"ARROW {src} {dst}", normalize=False))
    if d.nodes:
        parts.append(parse_mol("\n".join(d.nodes), normalize=False))
    try:
        m = glue(*parts) if parts else Molecule()
    except MoleculeError as exc:
        raise TangleError(str(exc)) from None
    m.loops += loops
    m = comb(m)
    problems = validate(m)
    if problems:
        raise TangleError("; ".join(problems))
    return m


def curl() -> TangleDiagram:
    """One strand looping once over itself: in -> c1 (over) -> c2 (under) -> out."""
    return parse_tangle("STRAND s: in c1 c2 out\nX c1 c2 +")


def curl_molecule(convention: str = "A") -> Molecule:
    return tangle_to_molecule(curl(), convention)


def curl_is_bit(convention: str = "A", molecule: Optional[Molecule] = None, depth: Optional[int] = None):
    """Certificate that the curl turns into the bit; None if no sequence within ``depth``.

    Convention A needs one CO-COMM move (the default depth is 1).  ``molecule``
    replaces the curl, e.g. to check something that already is a bit.
    """
    from .patterns import Behavior, BehaviorCertificate, named

    bit = named("BIT").molecule
    start = curl_molecule(convention) if molecule is None else molecule
    depth = (1 if convention == "A" else 2) if depth is None else depth
    result = search_reach(start, lambda m: is_isomorphic(m, bit, labeled=True), ALL_MOVES, depth)
    if result is None:
        return None
    return BehaviorCertificate(Behavior.BIT, f"curl({convention})", result.moves, depth, start, bit)


def count_curls(m: Molecule) -> int:
    """Number of FO(x, s, t) A(t, s, y) subpatterns."""
    n = 0
    for nid, kind in m.nodes.items():
        if kind != "FO":
            continue
        s, t = m.link[(nid, 1)], m.link[(nid, 2)]
        if isinstance(s, str) or isinstance(t, str):
            continue
        if m.nodes[t[0]] == "A" and t == (t[0], 0) and s == (t[0], 1):
            n += 1
    return n


def uncurl(m: Molecule) -> Molecule:
    """Apply CO-COMM at every curl, turning each into a bit."""
    while True:
        for site in find_sites(m, MoveKind.COCOMM):
            nid = site.nodes[0]
            s, t = m.link[(nid, 1)], m.link[(nid, 2)]
            if (not isinstance(t, str) and not isinstance(s, str) and m.nodes[t[0]] == "A"
                    and t[1] == 0 and s == (t[0], 1)):
                m = apply_move_ex(m, site)[0]
                break
        else:
            return m


_FIXPOINT = """\
# G = \\x.F(xx), twice, each (xx) drawn as a curl
STRAND g1: x1 c1 d1 b1
X c1 d1 +
STRAND g2: x2 c2 d2 b2
X c2 d2 +
NODE L h1 x1 r1
NODE A f1 b1 h1
NODE L h2 x2 r2
NODE A f2 b2 h2
NODE A r1 r2 root
NODE OPAQUE:o:F f
NODE FO f f1 f2
"""

_Y = """\
# Y = \\y.(\\x.y(xx))(\\x.y(xx)) with curls for (xx); the two uses of y
# cross the left copy's root arc virtually
STRAND g1: x1 c1 d1 b1
X c1 d1 +
STRAND g2: x2 c2 d2 b2
X c2 d2 +
STRAND y2: u2 v2 w2
STRAND r1: s1 t1 q1
V v2 t1
NODE L h1 x1 s1
NODE A y1 b1 h1
NODE L h2 x2 r2
NODE A w2 b2 h2
NODE A q1 r2 body
NODE FO yv y1 u2
NODE L body yv root
"""


def topological_combinator(which: str) -> Molecule:
    """FIXPOINT (GG, G = λx.F(xx), F opaque) or Y, drawn with curls."""
    return tangle_to_molecule(topological_tangle(which), "A")


def topological_tangle(which: str) -> TangleDiagram:
    key = which.upper()
    if key == "FIXPOINT":
        return parse_tangle(_FIXPOINT)
    if key == "Y":
        return parse_tangle(_Y)
    raise KeyError(which)
