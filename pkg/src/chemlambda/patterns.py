"""Named molecules and behavioural checks: multipliers, propagators,
distributors, guns, the bit and the Y combinator."""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from itertools import permutations
from typing import Dict, List, Optional, Tuple

from .canon import canonical_form, is_isomorphic, isomorphism
from .engine import (Limits, Priority, Trace, as_move, reduce, replay, run_script,
                     search_reach)
from .lam import App, Var, encode, parse_lambda
from .molecule import (Molecule, MoleculeError, connect, extract, glue, is_opaque,
                       parse_mol)
from .moves import FORWARD, REVERSE, MoveKind, Site

TERMS = {
    "B": r"\x y z.x (y z)",
    "C": r"\x y z.x z y",
    "K": r"\x y.x",
    "W": r"\x y.x y y",
    "I": r"\x.x",
    "Y": r"\y.(\x.y (x x)) (\x.y (x x))",
}


@dataclass(frozen=True)
class NamedMolecule:
    """A molecule with a designated exit arrow and designated inputs."""
    name: str
    molecule: Molecule
    exit: str = "root"
    inputs: Tuple[str, ...] = ()

    def __post_init__(self):
        if self.molecule.free.get(self.exit) != "out":
            raise MoleculeError(f"{self.name}: exit {self.exit!r} is not a free exit")
        for label in self.inputs:
            if self.molecule.free.get(label) != "in":
                raise MoleculeError(f"{self.name}: input {label!r} is not a free input")

    @property
    def extra_outputs(self) -> Tuple[str, ...]:
        return tuple(sorted(l for l, p in self.molecule.free.items() if p == "out" and l != self.exit))

    @property
    def extra_inputs(self) -> Tuple[str, ...]:
        return tuple(sorted(l for l, p in self.molecule.free.items() if p == "in" and l not in self.inputs))


def named(name: str) -> NamedMolecule:
    """B, C, K, W, I, Y (encoded from their terms) or BIT, the (xx) fragment."""
    key = name.upper()
    if key in TERMS:
        return NamedMolecule(key, encode(parse_lambda(TERMS[key])))
    if key == "BIT":
        return NamedMolecule("BIT", parse_mol("FO in v1 v2\nA v1 v2 out"), "out", ("in",))
    raise KeyError(f"unknown molecule {name!r}")


NAMES = tuple(TERMS) + ("BIT",)


def node_molecule(kind: str) -> NamedMolecule:
    """A single A, L or FI node with its natural designations."""
    if kind == "A":
        return NamedMolecule("A", parse_mol("A f a out"), "out", ("f", "a"))
    if kind == "L":
        return NamedMolecule("L", parse_mol("L b v out"), "out", ("b",))
    if kind == "FI":
        return NamedMolecule("FI", parse_mol("FI a b out"), "out", ("a", "b"))
    raise KeyError(kind)


def k_distributor() -> NamedMolecule:
    """K with its outer variable cut loose: a distributor of the second kind."""
    return NamedMolecule("Kd", parse_mol("L a v root\nL in y a\nT y"), "root", ("in",))


# ---------------------------------------------------------------------------
# Behaviours and certificates


class Behavior(str, Enum):
    MULTIPLIER = "multiplier"
    PROPAGATOR = "propagator"
    DISTRIBUTOR_1 = "distributor1"
    DISTRIBUTOR_2 = "distributor2"
    GUN = "gun"
    BIT = "bit"          # rewrites into the bit (curls)


# moves used when looking for multiplication / distribution sequences
COPY_MOVES = (
    (MoveKind.DIST_L, FORWARD), (MoveKind.DIST_A, FORWARD), (MoveKind.FANIN, FORWARD),
    (MoveKind.COCOMM, FORWARD), (MoveKind.COASSOC, FORWARD), (MoveKind.COASSOC, REVERSE),
    (MoveKind.PRUNE_FO, REVERSE),
)

GUN_MOVES = (
    (MoveKind.BETA, FORWARD), (MoveKind.DIST_L, FORWARD), (MoveKind.DIST_A, FORWARD),
    (MoveKind.FANIN, FORWARD), (MoveKind.COCOMM, FORWARD), (MoveKind.COASSOC, FORWARD),
    (MoveKind.COASSOC, REVERSE),
)


def _copy_filter(m: Molecule, site: Site) -> bool:
    # a reverse FO prune is only useful for duplicating a termination node
    if site.kind is MoveKind.PRUNE_FO and site.direction is REVERSE:
        wire = site.wires[0][0]
        if isinstance(wire, int):
            return False
        dst = m.link[wire]
        return not isinstance(dst, str) and m.nodes[dst[0]] == "T"
    return True


@dataclass(frozen=True)
class BehaviorCertificate:
    """A witnessing move sequence, with the harness it starts from and the goal it reaches."""
    behavior: Behavior
    subject: str
    moves: Tuple[Tuple[MoveKind, object, int], ...]
    depth: int
    harness: Molecule = field(repr=False)
    goal: Molecule = field(repr=False)

    def __len__(self):
        return len(self.moves)

    def replay(self) -> Tuple[Molecule, Trace]:
        return run_script(self.harness, self.moves)

    def verify(self) -> bool:
        final, _ = self.replay()
        return is_isomorphic(final, self.goal, labeled=True)

    def move_names(self) -> List[str]:
        return [k.value + ("-" if d is REVERSE else "") for k, d, _ in self.moves]


def _fo(label: str, a: str, b: str) -> Molecule:
    return parse_mol(f"FO {label} {a} {b}")


def _harness(nm: NamedMolecule) -> Molecule:
    """Exit arrow into a fanout with outputs o1, o2."""
    return glue(nm.molecule, parse_mol(f"FO {nm.exit} o1 o2"))


def _copy(nm: NamedMolecule, k: int) -> Molecule:
    mapping = {nm.exit: f"o{k}"}
    for label in nm.inputs + nm.extra_outputs:
        mapping[label] = f"{label}_{k}"
    return nm.molecule.relabel(mapping)


def _distribution_goal(nm: NamedMolecule, merge_outputs: bool) -> Molecule:
    parts = [_copy(nm, 1), _copy(nm, 2)]
    parts += [_fo(i, f"{i}_1", f"{i}_2") for i in nm.inputs]
    if merge_outputs:
        parts += [parse_mol(f"FI {o}_2 {o}_1 {o}") for o in nm.extra_outputs]
    return glue(*parts)


def multiplier_goal(nm: NamedMolecule) -> Molecule:
    """Two copies of the molecule, exits o1 and o2."""
    return glue(_copy(nm, 1), _copy(nm, 2))


def propagator_goal(nm: NamedMolecule) -> Molecule:
    """A fanout on the input, then one copy on each branch."""
    return _distribution_goal(nm, False)


@lru_cache(maxsize=256)
def _cached_search(start_code: bytes, goal_code: bytes, depth: int, start: Molecule,
                   allowed: tuple, filtered: bool, max_nodes: Optional[int]) -> Optional[tuple]:
    result = search_reach(start, lambda x: canonical_form(x, labeled=True) == goal_code,
                          allowed, depth, max_nodes=max_nodes,
                          site_filter=_copy_filter if filtered else None)
    return None if result is None else result.moves


def find_sequence(start: Molecule, goal: Molecule, depth: int, allowed=COPY_MOVES,
                  filtered: bool = True, max_nodes: Optional[int] = None) -> Optional[tuple]:
    """Shortest move list taking ``start`` to a molecule labeled-isomorphic to ``goal``."""
    return _cached_search(canonical_form(start, labeled=True), canonical_form(goal, labeled=True),
                          depth, start, tuple(as_move(a) for a in allowed), filtered, max_nodes)


def _certify(behavior: Behavior, nm: NamedMolecule, harness: Molecule, goal: Molecule,
             depth: int, max_nodes: Optional[int] = None) -> Optional[BehaviorCertificate]:
    if max_nodes is None:
        max_nodes = max(4 * len(harness.nodes), len(goal.nodes) + 4)
    if len(goal.nodes) > max_nodes:
        return None
    moves = find_sequence(harness, goal, depth, max_nodes=max_nodes)
    if moves is None:
        return None
    return BehaviorCertificate(behavior, nm.name, moves, depth, harness, goal)


def check_multiplier(nm: NamedMolecule, depth: int = 30,
                     max_nodes: Optional[int] = None) -> Optional[BehaviorCertificate]:
    """Search for a sequence turning (molecule, exit into a fanout) into two copies."""
    if nm.inputs or nm.extra_inputs or nm.extra_outputs:
        raise ValueError(f"{nm.name}: a multiplier must have the exit as its only free end")
    return _certify(Behavior.MULTIPLIER, nm, _harness(nm), multiplier_goal(nm), depth, max_nodes)


def check_propagator(nm: NamedMolecule, depth: int = 30,
                     max_nodes: Optional[int] = None) -> Optional[BehaviorCertificate]:
    """Search for a sequence pushing the fanout on the exit back through to the input."""
    if len(nm.inputs) != 1 or nm.extra_inputs or nm.extra_outputs:
        raise ValueError(f"{nm.name}: a propagator needs exactly one input, one exit and no other free ends")
    return _certify(Behavior.PROPAGATOR, nm, _harness(nm), propagator_goal(nm), depth, max_nodes)


def check_distributor(nm: NamedMolecule, kind: int, depth: int = 30,
                      max_nodes: Optional[int] = None) -> Optional[BehaviorCertificate]:
    """Kind 1 distributes like an A node under DIST_A (every input fanned
    out); kind 2 like an L node under DIST_L (inputs fanned out, the other
    exits of the two copies merged by fanins)."""
    if kind not in (1, 2):
        raise ValueError("distributor kind is 1 or 2")
    if nm.extra_inputs:
        raise ValueError(f"{nm.name}: undesignated free inputs {nm.extra_inputs}")
    if kind == 1 and nm.extra_outputs:
        return None
    if kind == 2 and not nm.extra_outputs:
        return None
    behavior = Behavior.DISTRIBUTOR_1 if kind == 1 else Behavior.DISTRIBUTOR_2
    return _certify(behavior, nm, _harness(nm), _distribution_goal(nm, kind == 2), depth, max_nodes)


class UncertifiedError(ValueError):
    """The input molecule lacks the behaviour a construction needs."""


def build_multiplier_from_distributor2(d: NamedMolecule, depth: int = 12) -> NamedMolecule:
    """Feed the distributor's extra exit back into its input."""
    if len(d.inputs) != 1 or len(d.extra_outputs) != 1:
        raise UncertifiedError(f"{d.name}: need one input and one extra exit")
    if check_distributor(d, 2, depth) is None:
        raise UncertifiedError(f"{d.name} is not a distributor of the second kind")
    return NamedMolecule(f"M({d.name})", connect(d.molecule, d.extra_outputs[0], d.inputs[0]), d.exit)


def build_propagator(mult: NamedMolecule, dist: NamedMolecule, depth: int = 12) -> NamedMolecule:
    """A distributor of the first kind with its second input fed by a multiplier."""
    if len(dist.inputs) != 2:
        raise UncertifiedError(f"{dist.name}: need exactly two inputs")
    if check_multiplier(mult, depth) is None:
        raise UncertifiedError(f"{mult.name} is not a multiplier")
    if check_distributor(dist, 1, depth) is None:
        raise UncertifiedError(f"{dist.name} is not a distributor of the first kind")
    m = glue(mult.molecule.relabel({mult.exit: dist.inputs[1]}), dist.molecule)
    return NamedMolecule(f"P({mult.name},{dist.name})", m, dist.exit, (dist.inputs[0],))


# ---------------------------------------------------------------------------
# Guns


@dataclass
class Gun:
    """A molecule that returns to itself after emitting ``emission``.

    ``molecule`` carries its free labels; ``rename`` says how those labels
    are renamed so that gluing the renamed gun to ``emission`` (matching
    labels become edges) gives the molecule expected after one cycle.
    """
    name: str
    molecule: Molecule
    emission: Molecule
    rename: Dict[str, str]
    script: Optional[tuple] = None
    depth: int = 16

    def cycle_target(self) -> Tuple[Molecule, List[int]]:
        residual = self.molecule.relabel(self.rename)
        target = glue(residual, self.emission)
        # glue numbers the residual's nodes first, in id order
        inside = sorted(target.nodes)[len(residual.nodes):]
        return target, inside

    def cycle_script(self) -> tuple:
        if self.script is None:
            target, _ = self.cycle_target()
            moves = find_sequence(self.molecule, target, self.depth, GUN_MOVES, filtered=False,
                                  max_nodes=len(target.nodes) + 8)
            if moves is None:
                raise GunError(0, f"{self.name}: no cycle found within depth {self.depth}")
            self.script = moves
        return self.script


class GunError(RuntimeError):
    def __init__(self, cycle: int, message: str):
        super().__init__(message)
        self.cycle = cycle


def build_gun(p: NamedMolecule, source: Behavior = Behavior.PROPAGATOR, depth: int = 12) -> Gun:
    """Close a propagator (or a distributor of the first kind) on a fanout.

    The exit goes into FO(x, emit); ``x`` feeds back into the (first)
    input and ``emit`` is the single emission edge.
    """
    source = Behavior(source)
    if source is Behavior.PROPAGATOR:
        if len(p.inputs) != 1 or check_propagator(p, depth) is None:
            raise UncertifiedError(f"{p.name} is not a propagator")
    elif source is Behavior.DISTRIBUTOR_1:
        if not p.inputs or check_distributor(p, 1, depth) is None:
            raise UncertifiedError(f"{p.name} is not a distributor of the first kind")
    else:
        raise ValueError("guns are built from propagators or distributors of the first kind")
    feed, rest = p.inputs[0], p.inputs[1:]
    loop = glue(p.molecule.relabel({feed: "_fb", p.exit: "_ex"}), _fo("_ex", "_fb", "emit"))
    parts = [p.molecule.relabel({feed: "q", p.exit: "emit", **{i: f"{i}_use" for i in rest}})]
    parts += [_fo(i, f"{i}_keep", f"{i}_use") for i in rest]
    rename = {"emit": "q", **{i: f"{i}_keep" for i in rest}}
    return Gun(f"gun({p.name})", loop, glue(*parts), rename)


def _restore_labels(part: Molecule, template: Molecule) -> Optional[Molecule]:
    """Rename ``part``'s unknown labels so it becomes labeled-isomorphic to ``template``."""
    missing = sorted(set(template.free) - set(part.free))
    extra = sorted(set(part.free) - set(template.free))
    if len(missing) != len(extra):
        return None
    for perm in permutations(missing):
        mapping = dict(zip(extra, perm))
        if any(part.free[a] != template.free[b] for a, b in mapping.items()):
            continue
        candidate = part.relabel(mapping)
        if is_isomorphic(candidate, template, labeled=True):
            return candidate
    return None


def gun_cycle(g: Gun, m: Molecule, cycle: int = 1) -> Tuple[Molecule, Molecule, Trace]:
    """Run one cycle from ``m`` (labeled-isomorphic to the gun) and cut off the emission."""
    try:
        after, trace = run_script(m, g.cycle_script())
    except ValueError as exc:
        raise GunError(cycle, f"cycle {cycle}: {exc}") from None
    target, inside_t = g.cycle_target()
    iso = isomorphism(target, after, labeled=True)
    if iso is None:
        raise GunError(cycle, f"cycle {cycle}: the gun did not re-form")
    counter = iter(range(10 ** 6))

    def name_cut(src, dst, src_inside):
        i = next(counter)
        return f"_cut{i}o", f"_cut{i}i"

    emitted, residual = extract(after, [iso[n] for n in inside_t], name_cut)
    residual = _restore_labels(residual, g.molecule)
    emitted = _restore_labels(emitted, g.emission)
    if residual is None or emitted is None:
        raise GunError(cycle, f"cycle {cycle}: emission does not separate cleanly")
    return residual, emitted, trace


def run_gun(g, cycles: int) -> Tuple[Molecule, List[Molecule]]:
    """Fire ``cycles`` times; returns the residual and the emitted pieces in order."""
    if isinstance(g, NamedMolecule):
        if g.name != "Y":
            raise ValueError("only Y is a gun by name; build others with build_gun")
        g = y_gun()
    m, emitted = g.molecule, []
    for k in range(1, cycles + 1):
        m, piece, _ = gun_cycle(g, m, k)
        emitted.append(piece)
    return m, emitted


# ---------------------------------------------------------------------------
# The Y combinator

GG = r"(\x.y (x x)) (\x.y (x x))"

# Found by search_reach with GUN_MOVES (see tests): beta, DIST_L, DIST_A on the
# application of y, the bit's propagation (DIST_A and a fanout shuffle), FANIN.
Y_CYCLE = (
    ("beta", "forward", 0), ("dist-l", "forward", 0), ("dist-a", "forward", 0),
    ("dist-a", "forward", 0), ("cocomm", "forward", 2), ("coassoc", "reverse", 1),
    ("coassoc", "forward", 0), ("cocomm", "forward", 3), ("coassoc", "forward", 1),
    ("fanin", "forward", 0),
)


def _script(entries) -> tuple:
    return tuple((MoveKind(k), as_move((k, d))[1], i) for k, d, i in entries)


def y_applied(arg: str = "a", opaque: Optional[str] = None) -> Molecule:
    """encode(Y arg); with ``opaque`` the argument is an opaque node of those polarities."""
    term = App(parse_lambda(TERMS["Y"]), Var(arg))
    return encode(term, opaque={arg: opaque} if opaque else None)


def gg(arg: str = "a") -> Molecule:
    """encode((λx.arg(xx))(λx.arg(xx))) with ``arg`` a free input."""
    return encode(parse_lambda(GG.replace("y", arg)))


def fixed_point_target(head: Molecule, source: str) -> Molecule:
    """``head`` supplies ``source``; it is fanned out into F applied to a copy of GG."""
    return glue(head, _fo(source, "_u", "_z"), parse_mol("A _u _w root"),
                gg("_z").relabel({"root": "_w"}))


def y_gun() -> Gun:
    """Y applied to a free input, after its first beta move: a gun shooting fanouts.

    Each cycle emits FO(a, u, z) and A(u, w, root): one fanout on the
    argument and the application node carrying the previous output.
    """
    start = gg("a")
    emission = parse_mol("FO a u z\nA u w root")
    return Gun("Y", start, emission, {"a": "z", "root": "w"}, _script(Y_CYCLE))


@dataclass
class YReduction:
    start: Molecule        # encode(Y A) with A opaque
    after_first_beta: Molecule
    final: Molecule
    target: Molecule
    trace: Trace
    opaque: int            # node id of A

    def matches(self) -> bool:
        return is_isomorphic(self.final, self.target, labeled=True)

    def moves_touching_opaque(self) -> int:
        return sum(1 for s in self.trace.sites if self.opaque in s.nodes)


Y_REDUCTION = (("beta", "forward", 0),) + Y_CYCLE


def y_reduction(polarities: str = "io") -> YReduction:
    """Reduce Y A, A an opaque molecule, to A(Y A) by the scripted sequence."""
    start = y_applied("A", polarities)
    opaque = next(n for n, k in start.nodes.items() if is_opaque(k))
    final, trace = run_script(start, _script(Y_REDUCTION))
    after_beta = replay(start, trace.sites[:1])
    head_text = " ".join(f"A.{p}" if p != polarities.index("o") else "_src" for p in range(len(polarities)))
    head = parse_mol(f"OPAQUE:{polarities}:A {head_text}")
    target = fixed_point_target(head, "_src")
    return YReduction(start, after_beta, final, target, trace, opaque)


def y_reduction_trace(polarities: str = "io") -> Trace:
    return y_reduction(polarities).trace


def fixed_point_witness(max_steps: int = 50) -> Tuple[Molecule, Trace, Molecule]:
    """Bounded reduction of encode(GG), F opaque, to F applied to a copy of encode(GG).

    One gun cycle of the Y molecule is the witness; returns (final, trace, target).
    """
    start = encode(parse_lambda(GG.replace("y", "F")), opaque={"F": "o"})
    final, trace = run_script(start, _script(Y_CYCLE)[:max_steps])
    target = fixed_point_target(parse_mol("OPAQUE:o:F _src"), "_src")
    return final, trace, target


def gg_runs_forever(max_steps: int = 500) -> Trace:
    """PRIORITY reduction of encode(GG) with F opaque; the trace status shows the limit hit."""
    start = encode(parse_lambda(GG.replace("y", "F")), opaque={"F": "o"})
    return reduce(start, Priority(), Limits(max_steps=max_steps, max_nodes=10 ** 7))[1]


# ---------------------------------------------------------------------------
# CLI / demo support


def behavior_check(nm: NamedMolecule, behavior: str, depth: int = 30) -> Optional[BehaviorCertificate]:
    b = Behavior(behavior)
    if b is Behavior.MULTIPLIER:
        return check_multiplier(nm, depth)
    if b is Behavior.PROPAGATOR:
        return check_propagator(nm, depth)
    if b is Behavior.DISTRIBUTOR_1:
        return check_distributor(nm, 1, depth)
    if b is Behavior.DISTRIBUTOR_2:
        return check_distributor(nm, 2, depth)
    raise ValueError("use run_gun for guns")
