"""Driving moves: strategies, limits, traces, replay and reachability search."""
from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

from .canon import canonical_form, code_digest
from .molecule import Molecule
from .moves import (FORWARD, REVERSE, Direction, MoveKind, Site, StaleSiteError,
                    apply_move_ex, find_sites, site_matches)

Move = Tuple[MoveKind, Direction]

DEFAULT_PRIORITY: Tuple[Move, ...] = tuple(
    (MoveKind(k), FORWARD)
    for k in ("beta", "fanin", "dist-a", "dist-l", "prune-fo", "prune-a", "prune-l", "coassoc")
)

# everything except COMB, both directions: the search default
ALL_MOVES: Tuple[Move, ...] = tuple(
    (k, d) for k in MoveKind if k is not MoveKind.COMB for d in (FORWARD, REVERSE)
)


def as_move(spec) -> Move:
    """Accept ``(kind, dir)`` pairs or strings like ``"beta"`` / ``"coassoc-"``."""
    if isinstance(spec, str):
        if spec.endswith("-") and spec[:-1] in MoveKind._value2member_map_:
            return MoveKind(spec[:-1]), REVERSE
        return MoveKind(spec), FORWARD
    kind, direction = spec
    return MoveKind(kind), Direction(direction)


class Status(str, Enum):
    NORMAL_FORM = "NORMAL_FORM"
    STEP_LIMIT = "STEP_LIMIT"
    SIZE_LIMIT = "SIZE_LIMIT"


@dataclass(frozen=True)
class Limits:
    max_steps: int = 10_000
    max_nodes: int = 100_000

    def __post_init__(self):
        if self.max_steps < 0 or self.max_nodes < 0:
            raise ValueError("limits must be non-negative")


# ---------------------------------------------------------------------------
# Strategies


@dataclass
class Priority:
    """First site of the first move kind (in ``order``) that has one."""
    order: Tuple[Move, ...] = DEFAULT_PRIORITY

    def __post_init__(self):
        self.order = tuple(as_move(x) for x in self.order)

    def choose(self, m: Molecule) -> Optional[Site]:
        for kind, direction in self.order:
            sites = find_sites(m, kind, direction)
            if sites:
                return sites[0]
        return None


@dataclass
class Random:
    """Uniform choice over all sites of the allowed kinds, from a seeded stream."""
    seed: int = 0
    allowed: Tuple[Move, ...] = DEFAULT_PRIORITY
    _rng: random.Random = field(init=False, repr=False)

    def __post_init__(self):
        self.allowed = tuple(as_move(x) for x in self.allowed)
        self._rng = random.Random(self.seed)

    def choose(self, m: Molecule) -> Optional[Site]:
        sites = [s for kind, d in self.allowed for s in find_sites(m, kind, d)]
        if not sites:
            return None
        return sites[self._rng.randrange(len(sites))]


@dataclass
class Scripted:
    """An explicit list of moves; each entry is a Site, or ``(kind, dir, index)``
    picking the ``index``-th site in canonical order at that point."""
    moves: List = field(default_factory=list)
    _pos: int = field(default=0, init=False, repr=False)

    def choose(self, m: Molecule) -> Optional[Site]:
        if self._pos >= len(self.moves):
            return None
        entry = self.moves[self._pos]
        self._pos += 1
        site = resolve(m, entry)
        if site is None:
            raise ScriptError(self._pos, entry)
        return site


Strategy = object  # any object with ``choose(m) -> Optional[Site]``


class ScriptError(ValueError):
    def __init__(self, index: int, entry):
        super().__init__(f"scripted step {index} does not match: {entry!r}")
        self.index = index


class ReplayError(ValueError):
    def __init__(self, index: int, message: str):
        super().__init__(f"replay failed at step {index}: {message}")
        self.index = index


def resolve(m: Molecule, entry) -> Optional[Site]:
    """Turn a script entry into a site of ``m`` (None when it does not match)."""
    if isinstance(entry, Site):
        return entry if site_matches(m, entry) else None
    kind, direction, index = entry
    sites = find_sites(m, MoveKind(kind), Direction(direction))
    return sites[index] if 0 <= index < len(sites) else None


# ---------------------------------------------------------------------------
# Traces


@dataclass(frozen=True)
class TraceStep:
    index: int
    site: Site
    nodes: int
    code: str   # hex digest of the canonical code after the step


@dataclass
class Trace:
    steps: List[TraceStep] = field(default_factory=list)
    status: Status = Status.NORMAL_FORM

    def __len__(self):
        return len(self.steps)

    @property
    def sites(self) -> List[Site]:
        return [s.site for s in self.steps]

    def moves(self) -> List[str]:
        return [move_name(s.site) for s in self.steps]

    def dumps(self) -> str:
        lines = [f"{s.index} {s.site.kind.value} {s.site.direction.value} "
                 f"{s.site.fingerprint()} {s.nodes} {s.code}" for s in self.steps]
        lines.append(f"STATUS {self.status.value}")
        return "\n".join(lines) + "\n"

    @classmethod
    def loads(cls, text: str) -> "Trace":
        steps, status = [], Status.NORMAL_FORM
        for raw in text.splitlines():
            parts = raw.split()
            if not parts:
                continue
            if parts[0] == "STATUS":
                status = Status(parts[1])
                continue
            idx, kind, direction, fp, nodes, code = parts
            steps.append(TraceStep(int(idx), Site.from_fingerprint(kind, direction, fp), int(nodes), code))
        return cls(steps, status)


def move_name(site: Site) -> str:
    return site.kind.value + ("-" if site.direction is REVERSE else "")


def _record(trace: Trace, site: Site, m: Molecule) -> None:
    trace.steps.append(TraceStep(len(trace.steps) + 1, site, len(m.nodes), code_digest(m)))


# ---------------------------------------------------------------------------
# Running


def step(m: Molecule, strategy=None) -> Optional[Tuple[Site, Molecule]]:
    """One strategy step: the chosen site and the resulting molecule, or None."""
    strategy = Priority() if strategy is None else strategy
    site = strategy.choose(m)
    if site is None:
        return None
    return site, apply_move_ex(m, site)[0]


def reduce(m: Molecule, strategy=None, limits: Limits = Limits(),
           observer: Optional[Callable[[int, Site, Molecule], None]] = None) -> Tuple[Molecule, Trace]:
    """Iterate ``step`` until no site applies or a limit is reached.

    A scripted strategy applies exactly its sequence and raises
    ``ScriptError`` (with the 1-based step index) on the first mismatch.
    """
    strategy = Priority() if strategy is None else strategy
    trace = Trace()
    if len(m.nodes) > limits.max_nodes:
        trace.status = Status.SIZE_LIMIT
        return m, trace
    while True:
        site = strategy.choose(m)
        if site is None:
            trace.status = Status.NORMAL_FORM
            return m, trace
        if len(trace.steps) >= limits.max_steps:
            trace.status = Status.STEP_LIMIT
            return m, trace
        m = apply_move_ex(m, site)[0]
        _record(trace, site, m)
        if observer is not None:
            observer(len(trace.steps), site, m)
        if len(m.nodes) > limits.max_nodes:
            trace.status = Status.SIZE_LIMIT
            return m, trace


def replay(m: Molecule, trace) -> Molecule:
    """Re-apply a trace (or a list of sites), checking recorded codes when present."""
    steps = trace.steps if isinstance(trace, Trace) else trace
    for i, entry in enumerate(steps, 1):
        site = entry.site if isinstance(entry, TraceStep) else entry
        if not isinstance(site, Site):
            site = resolve(m, site)
            if site is None:
                raise ReplayError(i, f"no site for {entry!r}")
        try:
            m = apply_move_ex(m, site)[0]
        except StaleSiteError as exc:
            raise ReplayError(i, str(exc)) from None
        if isinstance(entry, TraceStep) and code_digest(m) != entry.code:
            raise ReplayError(i, "canonical code differs from the recorded one")
    return m


def run_script(m: Molecule, moves: Sequence) -> Tuple[Molecule, Trace]:
    """Apply a scripted move list exactly; errors name the failing step."""
    return reduce(m, Scripted(list(moves)), Limits(max_steps=len(moves) + 1, max_nodes=10 ** 9))


# ---------------------------------------------------------------------------
# Search


@dataclass(frozen=True)
class SearchResult:
    moves: Tuple[Tuple[MoveKind, Direction, int], ...]   # replayable via ``resolve``
    sites: Tuple[Site, ...]
    final: Molecule
    explored: int

    def __len__(self):
        return len(self.moves)


def search_reach(m: Molecule, goal: Callable[[Molecule], bool], allowed: Iterable = ALL_MOVES,
                 depth: int = 30, max_nodes: Optional[int] = None, memo: bool = True,
                 site_filter: Optional[Callable[[Molecule, Site], bool]] = None,
                 max_states: int = 200_000) -> Optional[SearchResult]:
    """Breadth-first search for a shortest move sequence reaching ``goal``.

    States are deduplicated by labeled canonical code (free-end names are
    part of the state, since goals usually refer to them).  States with more
    than ``max_nodes`` nodes (default four times the start) are not
    expanded.  The result records each move as ``(kind, dir, index)``, the
    index being the site's position in canonical order, so it replays on any
    molecule isomorphic to ``m`` with the same free labels.
    """
    allowed = tuple(as_move(a) for a in allowed)
    cap = max_nodes if max_nodes is not None else max(4 * len(m.nodes), 4)
    if goal(m):
        return SearchResult((), (), m, 1)
    seen = {canonical_form(m, labeled=True)} if memo else None
    frontier = deque([(m, (), ())])
    explored = 1
    for _level in range(depth):
        nxt = deque()
        while frontier:
            cur, path, sites = frontier.popleft()
            for kind, direction in allowed:
                for i, site in enumerate(find_sites(cur, kind, direction)):
                    if site_filter is not None and not site_filter(cur, site):
                        continue
                    new = apply_move_ex(cur, site)[0]
                    if len(new.nodes) > cap:
                        continue
                    if memo:
                        key = canonical_form(new, labeled=True)
                        if key in seen:
                            continue
                        seen.add(key)
                    explored += 1
                    npath = path + ((kind, direction, i),)
                    nsites = sites + (site,)
                    if goal(new):
                        return SearchResult(npath, nsites, new, explored)
                    nxt.append((new, npath, nsites))
                    if explored > max_states:
                        return None
        if not nxt:
            return None
        frontier = nxt
    return None


def reachable_codes(m: Molecule, allowed: Iterable = ALL_MOVES, depth: int = 3,
                    max_nodes: Optional[int] = None, memo: bool = True) -> Dict[bytes, int]:
    """Map of every labeled canonical code reachable within ``depth`` to its distance."""
    allowed = tuple(as_move(a) for a in allowed)
    cap = max_nodes if max_nodes is not None else max(4 * len(m.nodes), 4)
    dist = {canonical_form(m, labeled=True): 0}
    frontier = [m]
    for level in range(1, depth + 1):
        nxt = []
        for cur in frontier:
            for kind, direction in allowed:
                for site in find_sites(cur, kind, direction, ordered=False):
                    new = apply_move_ex(cur, site)[0]
                    if len(new.nodes) > cap:
                        continue
                    key = canonical_form(new, labeled=True)
                    if key not in dist:
                        dist[key] = level
                        nxt.append(new)
                    elif not memo:
                        nxt.append(new)
        frontier = nxt
    return dist
