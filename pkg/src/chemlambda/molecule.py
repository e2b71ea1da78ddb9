"""Molecules: trivalent port graphs built from L, A, FO, FI, T nodes, arrows and loops.

A molecule is stored as a symmetric port map.  Every port of every node is
linked to exactly one *end*: either another node port ``(node_id, port)`` or
a free end, which is a string label.  Free ends carry a polarity: an ``"in"``
free end is the source of its edge (it feeds the molecule), an ``"out"`` free
end is the target of its edge (an exit arrow).

Edges always run from an out-port to an in-port.  Loops (closed arrows with no
node on them) are only counted.

Molecules are values.  Every public operation returns a new molecule.
"""
from __future__ import annotations

import re
from enum import Enum
from typing import Dict, Iterable, Iterator, List, Tuple, Union

NodePort = Tuple[int, int]
End = Union[NodePort, str]


class MoleculeError(ValueError):
    """Malformed molecule text or an illegal structural operation."""


class NodeKind(str, Enum):
    L = "L"
    A = "A"
    FO = "FO"
    FI = "FI"
    T = "T"
    ARROW = "ARROW"


# Port signatures.  This table is the single place where port orientation is
# fixed; everything else reads polarities from here.
#   L  = (body_in, var_out, root_out)
#   A  = (fun_in, arg_in, out)
#   FO = (in, out1, out2)
#   FI = (in1, in2, out)
SIGNATURES: Dict[str, str] = {
    "L": "ioo",
    "A": "iio",
    "FO": "ioo",
    "FI": "iio",
    "T": "i",
    "ARROW": "io",
}

PORT_NAMES: Dict[str, Tuple[str, ...]] = {
    "L": ("body_in", "var_out", "root_out"),
    "A": ("fun_in", "arg_in", "out"),
    "FO": ("in", "out1", "out2"),
    "FI": ("in1", "in2", "out"),
    "T": ("in",),
    "ARROW": ("in", "out"),
}

_OPAQUE_RE = re.compile(r"^OPAQUE:([io]+)(?::([A-Za-z0-9_.'\-]+))?$")


def opaque_kind(polarities: str, name: str = "") -> str:
    """Kind string of an opaque node ("other molecule") with the given port polarities."""
    if not polarities or set(polarities) - {"i", "o"}:
        raise MoleculeError(f"bad opaque polarity string {polarities!r}")
    return f"OPAQUE:{polarities}:{name}" if name else f"OPAQUE:{polarities}"


def is_opaque(kind: str) -> bool:
    return kind.startswith("OPAQUE:")


def signature(kind: str) -> str:
    sig = SIGNATURES.get(kind)
    if sig is not None:
        return sig
    match = _OPAQUE_RE.match(kind)
    if match is None:
        raise MoleculeError(f"unknown node kind {kind!r}")
    return match.group(1)


def arity(kind: str) -> int:
    return len(signature(kind))


def is_source(m: "Molecule", end: End) -> bool:
    """True when ``end`` is the tail of its edge (an out-port or an input free end)."""
    if isinstance(end, str):
        return m.free[end] == "in"
    nid, port = end
    return signature(m.nodes[nid])[port] == "o"


class Molecule:
    """A chemlambda molecule.

    ``nodes`` maps node id to kind, ``link`` is the symmetric port map,
    ``free`` maps free-end labels to ``"in"``/``"out"``, ``loops`` counts
    closed arrows.  Treat instances as immutable.
    """

    __slots__ = ("nodes", "link", "free", "loops", "next_id", "_cache")

    def __init__(self, nodes=None, link=None, free=None, loops=0, next_id=None):
        self.nodes: Dict[int, str] = dict(nodes or {})
        self.link: Dict[End, End] = dict(link or {})
        self.free: Dict[str, str] = dict(free or {})
        self.loops: int = loops
        if next_id is None:
            next_id = max(self.nodes, default=-1) + 1
        self.next_id: int = next_id
        self._cache: dict = {}

    # -- construction helpers (private mutation, used while building values)

    def copy(self) -> "Molecule":
        return Molecule(self.nodes, self.link, self.free, self.loops, self.next_id)

    def _new_node(self, kind: str) -> int:
        signature(kind)
        nid = self.next_id
        self.next_id += 1
        self.nodes[nid] = kind
        return nid

    def _join(self, a: End, b: End) -> None:
        self.link[a] = b
        self.link[b] = a

    def _fresh_label(self, stem: str) -> str:
        if stem not in self.free:
            return stem
        i = 1
        while f"{stem}{i}" in self.free:
            i += 1
        return f"{stem}{i}"

    def _remove_node(self, nid: int) -> None:
        for p in range(arity(self.nodes[nid])):
            self.link.pop((nid, p), None)
        del self.nodes[nid]

    # -- queries

    def __len__(self) -> int:
        return len(self.nodes)

    def __repr__(self) -> str:
        return f"Molecule({len(self.nodes)} nodes, {len(self.free)} free ends, {self.loops} loops)"

    def __eq__(self, other):
        if not isinstance(other, Molecule):
            return NotImplemented
        return (self.nodes == other.nodes and self.link == other.link
                and self.free == other.free and self.loops == other.loops)

    def __hash__(self):
        return hash((len(self.nodes), len(self.free), self.loops))

    def ports(self, nid: int) -> List[End]:
        """Partners of each port of node ``nid``, in port order."""
        return [self.link[(nid, p)] for p in range(arity(self.nodes[nid]))]

    def kind_count(self, kind: str) -> int:
        return sum(1 for k in self.nodes.values() if k == kind)

    def free_in(self) -> List[str]:
        return sorted(k for k, v in self.free.items() if v == "in")

    def free_out(self) -> List[str]:
        return sorted(k for k, v in self.free.items() if v == "out")

    def edges(self) -> Iterator[Tuple[End, End]]:
        """All edges as ``(source_end, target_end)`` pairs, loops excluded."""
        for end, other in self.link.items():
            if is_source(self, end):
                yield end, other

    def edge_count(self) -> int:
        return sum(1 for _ in self.edges())

    @property
    def empty(self) -> bool:
        return not self.nodes and not self.free and not self.loops

    def relabel(self, mapping: Dict[str, str]) -> "Molecule":
        """Rename free ends.  Labels absent from ``mapping`` keep their name."""
        new_names = [mapping.get(k, k) for k in self.free]
        if len(set(new_names)) != len(new_names):
            raise MoleculeError("relabeling would merge free ends")
        out = Molecule(self.nodes, {}, {}, self.loops, self.next_id)
        for k, v in self.free.items():
            out.free[mapping.get(k, k)] = v
        for a, b in self.link.items():
            a2 = mapping.get(a, a) if isinstance(a, str) else a
            b2 = mapping.get(b, b) if isinstance(b, str) else b
            out.link[a2] = b2
        return out


# ---------------------------------------------------------------------------
# Text format


def parse_mol(text: str, normalize: bool = True) -> Molecule:
    """Parse the line based mol format.

    Each line is ``KIND e1 ... ek`` or ``LOOP``; ``#`` starts a comment.  An
    edge name used twice joins an out-port to an in-port, a name used once
    becomes a free end carrying that name.  ``ARROW`` elements are fused into
    plain edges unless ``normalize`` is false.
    """
    m = Molecule()
    uses: Dict[str, List[Tuple[NodePort, str]]] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        kind, *names = line.split()
        if kind == "LOOP":
            if names:
                raise MoleculeError(f"line {lineno}: LOOP takes no edges")
            m.loops += 1
            continue
        try:
            sig = signature(kind)
        except MoleculeError:
            raise MoleculeError(f"line {lineno}: unknown node kind {kind!r}") from None
        if len(names) != len(sig):
            raise MoleculeError(
                f"line {lineno}: {kind} takes {len(sig)} edges, got {len(names)}")
        nid = m._new_node(kind)
        for port, name in enumerate(names):
            uses.setdefault(name, []).append(((nid, port), sig[port]))
    for name, occ in uses.items():
        if len(occ) > 2:
            raise MoleculeError(f"edge {name!r} used {len(occ)} times")
        if len(occ) == 1:
            port, pol = occ[0]
            m.free[name] = "in" if pol == "i" else "out"
            m._join(port, name)
        else:
            (p1, pol1), (p2, pol2) = occ
            if pol1 == pol2:
                which = "in" if pol1 == "i" else "out"
                raise MoleculeError(f"edge {name!r} joins two {which}-ports")
            m._join(p1, p2)
    if normalize:
        m = comb(m)
    return m


def serialize_mol(m: Molecule) -> str:
    """Render ``m`` in the mol format; internal edges get generated names."""
    names: Dict[End, str] = {}
    taken = set(m.free)
    counter = 0
    lines = []

    def name_of(end: End) -> str:
        nonlocal counter
        if isinstance(end, str):
            return end
        if end in names:
            return names[end]
        partner = m.link[end]
        if isinstance(partner, str):
            return partner
        while f"e{counter}" in taken:
            counter += 1
        label = f"e{counter}"
        counter += 1
        names[end] = names[partner] = label
        return label

    for nid in sorted(m.nodes):
        kind = m.nodes[nid]
        lines.append(" ".join([kind] + [name_of((nid, p)) for p in range(arity(kind))]))
    for label in sorted(m.free):
        other = m.link[label]
        if isinstance(other, str) and m.free[label] == "in":
            lines.append(f"ARROW {label} {other}")
    lines.extend("LOOP" for _ in range(m.loops))
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# Validation


def validate(m: Molecule) -> List[str]:
    """List every structural invariant that ``m`` violates (empty when valid)."""
    problems = []
    for nid, kind in m.nodes.items():
        try:
            sig = signature(kind)
        except MoleculeError as exc:
            problems.append(f"node {nid}: {exc}")
            continue
        for port in range(len(sig)):
            if (nid, port) not in m.link:
                problems.append(f"dangling port: node {nid} ({kind}) port {port}")
    for end, other in m.link.items():
        for e in (end, other):
            if isinstance(e, str):
                if e not in m.free:
                    problems.append(f"unknown free end {e!r}")
            elif e[0] not in m.nodes or not 0 <= e[1] < arity(m.nodes[e[0]]):
                problems.append(f"link to nonexistent port {e}")
        if m.link.get(other) != end:
            problems.append(f"asymmetric link {end} -> {other}")
        if end == other:
            problems.append(f"self link at {end}")
    for label in m.free:
        if label not in m.link:
            problems.append(f"free end {label!r} is not attached")
    if problems:
        return problems
    seen = set()
    for end, other in m.link.items():
        key = frozenset((end, other))
        if key in seen:
            continue
        seen.add(key)
        if is_source(m, end) == is_source(m, other):
            which = "out" if is_source(m, end) else "in"
            problems.append(f"polarity violation: {end} - {other} joins two {which}-ends")
    if m.loops < 0:
        problems.append("negative loop count")
    return problems


def is_valid(m: Molecule) -> bool:
    return not validate(m)


# ---------------------------------------------------------------------------
# Arrow fusion


def comb(m: Molecule) -> Molecule:
    """Fuse every ARROW element into the wire it sits on (closed chains become loops)."""
    arrows = [nid for nid, k in m.nodes.items() if k == "ARROW"]
    if not arrows:
        return m
    out = m.copy()
    for nid in arrows:
        _fuse_arrow(out, nid)
    return out


def _fuse_arrow(m: Molecule, nid: int) -> None:
    src = m.link[(nid, 0)]
    dst = m.link[(nid, 1)]
    m._remove_node(nid)
    if src == (nid, 1):
        m.loops += 1
    else:
        m._join(src, dst)


# ---------------------------------------------------------------------------
# Composition


def union_with_maps(m1: Molecule, m2: Molecule, suffix: str = "'"):
    """Disjoint union, also returning the node-id and label renamings applied to ``m2``."""
    out = m1.copy()
    node_map = {}
    for nid in sorted(m2.nodes):
        node_map[nid] = out._new_node(m2.nodes[nid])
    label_map = {}
    for label in sorted(m2.free):
        new = label
        while new in out.free or new in label_map.values() or (new != label and new in m2.free):
            new += suffix
        label_map[label] = new
    for label, pol in m2.free.items():
        out.free[label_map[label]] = pol

    def tr(end):
        return label_map[end] if isinstance(end, str) else (node_map[end[0]], end[1])

    for a, b in m2.link.items():
        out.link[tr(a)] = tr(b)
    out.loops += m2.loops
    return out, node_map, label_map


def disjoint_union(m1: Molecule, m2: Molecule) -> Molecule:
    """Place two molecules side by side.  Clashing free labels of ``m2`` get primes."""
    return union_with_maps(m1, m2)[0]


def glue(*parts: Molecule) -> Molecule:
    """Union of ``parts`` in which a label that is an exit in one part and an
    input in another becomes a single edge.  Other clashes are errors."""
    out = Molecule()
    joins = []
    for part in parts:
        out, _nodes, labels = union_with_maps(out, part, suffix="~")
        for old, new in labels.items():
            if old != new:
                joins.append((old, new))
    for old, new in joins:
        pols = (out.free.get(old), out.free.get(new))
        if pols == ("out", "in"):
            out = connect(out, old, new)
        elif pols == ("in", "out"):
            out = connect(out, new, old)
        else:
            raise MoleculeError(f"label {old!r} cannot be glued")
    return out


def connect(m: Molecule, out_label: str, in_label: str) -> Molecule:
    """Join free exit ``out_label`` to free input ``in_label`` with one edge."""
    for label, want in ((out_label, "out"), (in_label, "in")):
        if label not in m.free:
            raise MoleculeError(f"no free end named {label!r}")
        if m.free[label] != want:
            raise MoleculeError(f"free end {label!r} is an {m.free[label]}-end, expected {want}")
    out = m.copy()
    src = out.link.pop(out_label)
    dst = out.link.pop(in_label)
    del out.free[out_label], out.free[in_label]
    if src == in_label:
        out.loops += 1
    else:
        out._join(src, dst)
    return out


def cut(m: Molecule, source: End, out_label: str, in_label: str) -> Molecule:
    """Split the edge leaving ``source`` into an exit ``out_label`` and an input ``in_label``."""
    out = m.copy()
    target = out.link[source]
    for label in (out_label, in_label):
        if label in out.free:
            raise MoleculeError(f"label {label!r} already in use")
    out.free[out_label] = "out"
    out.free[in_label] = "in"
    out._join(source, out_label)
    out._join(in_label, target)
    return out


def components(m: Molecule) -> List[Tuple[List[int], List[str]]]:
    """Connected components as (node ids, free labels); node-free wires included."""
    seen_nodes, seen_free = set(), set()
    result = []

    def walk(start: End):
        nodes, labels = [], []
        stack = [start]
        while stack:
            end = stack.pop()
            if isinstance(end, str):
                if end in seen_free:
                    continue
                seen_free.add(end)
                labels.append(end)
                stack.append(m.link[end])
            else:
                nid = end[0]
                if nid in seen_nodes:
                    continue
                seen_nodes.add(nid)
                nodes.append(nid)
                stack.extend(m.link[(nid, p)] for p in range(arity(m.nodes[nid])))
        return sorted(nodes), sorted(labels)

    for nid in sorted(m.nodes):
        if nid not in seen_nodes:
            result.append(walk((nid, 0)))
    for label in sorted(m.free):
        if label not in seen_free:
            result.append(walk(label))
    return result


def submolecule(m: Molecule, nodes: Iterable[int], labels: Iterable[str] = (), loops: int = 0) -> Molecule:
    """The molecule made of the given nodes and free ends; must be closed under links."""
    out = Molecule(next_id=m.next_id)
    for nid in nodes:
        out.nodes[nid] = m.nodes[nid]
        for p in range(arity(m.nodes[nid])):
            out.link[(nid, p)] = m.link[(nid, p)]
    for label in labels:
        out.free[label] = m.free[label]
        out.link[label] = m.link[label]
    out.loops = loops
    for end, other in out.link.items():
        if (other not in out.link) if isinstance(other, str) else other[0] not in out.nodes:
            raise MoleculeError("submolecule is not closed under links")
    return out


def split_components(m: Molecule) -> List[Molecule]:
    """Connected components; each loop is its own component."""
    parts = [submolecule(m, nodes, labels) for nodes, labels in components(m)]
    parts.extend(Molecule(loops=1) for _ in range(m.loops))
    return parts


def extract(m: Molecule, inside: Iterable[int], name_cut) -> Tuple[Molecule, Molecule]:
    """Split ``m`` into the part on node set ``inside`` and the rest.

    Every edge crossing the boundary is cut.  ``name_cut(source, target,
    source_inside)`` returns ``(exit_label, input_label)`` for the two new
    free ends.  Free ends follow the node they are attached to.
    """
    inside = set(inside)
    work = m.copy()
    crossing = []
    for src, dst in m.edges():
        if isinstance(src, str) or isinstance(dst, str):
            continue
        s_in = src[0] in inside
        d_in = dst[0] in inside
        if s_in != d_in:
            crossing.append((src, dst, s_in))
    for src, dst, s_in in crossing:
        out_label, in_label = name_cut(src, dst, s_in)
        work = cut(work, src, out_label, in_label)
    inside_labels, rest_labels = [], []
    for label in work.free:
        partner = work.link[label]
        if isinstance(partner, str):
            rest_labels.append(label)
        elif partner[0] in inside:
            inside_labels.append(label)
        else:
            rest_labels.append(label)
    rest = [n for n in work.nodes if n not in inside]
    return (submolecule(work, sorted(inside), inside_labels),
            submolecule(work, rest, rest_labels, work.loops))


# ---------------------------------------------------------------------------
# DOT export


def to_dot(m: Molecule, name: str = "molecule") -> str:
    """Graphviz rendering.  Node numbering follows the canonical order, so
    isomorphic molecules with the same free labels render identically."""
    from .canon import canonical_labeling

    lab = canonical_labeling(m, labeled=True)
    index = {nid: i for i, nid in enumerate(lab.order)}
    lines = [f"digraph {name} {{", "  rankdir=LR;"]
    for nid in lab.order:
        kind = m.nodes[nid]
        shown = kind.split(":")[-1] if is_opaque(kind) else kind
        shape = "box" if is_opaque(kind) else "ellipse"
        lines.append(f'  n{index[nid]} [label="{shown}", shape={shape}];')
    for label in lab.free_order:
        lines.append(f'  "free:{label}" [label="{label}", shape=point, xlabel="{label}"];')

    def ref(end):
        return f'"free:{end}"' if isinstance(end, str) else f"n{index[end[0]]}"

    edge_lines = []
    for src, dst in m.edges():
        attrs = []
        if not isinstance(src, str):
            attrs.append(f'taillabel="{src[1]}"')
        if not isinstance(dst, str):
            attrs.append(f'headlabel="{dst[1]}"')
        edge_lines.append(f"  {ref(src)} -> {ref(dst)} [{', '.join(attrs)}];")
    lines.extend(sorted(edge_lines, key=_dot_sort_key(index)))
    for i in range(m.loops):
        lines.append(f'  loop{i} [label="", shape=circle, width=0.2];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def _dot_sort_key(index):
    def key(line: str):
        nums = [int(x) for x in re.findall(r"\bn(\d+)\b", line)]
        return (nums, line)
    return key
