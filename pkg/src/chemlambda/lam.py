"""Untyped lambda calculus: syntax, the molecule encoding, decoding, and a
normal-order reference evaluator used as the oracle for graph reduction."""
from __future__ import annotations

import random
import re
from dataclasses import dataclass
from typing import Dict, List, Mapping, Optional, Set, Tuple, Union

from .molecule import Molecule, opaque_kind


@dataclass(frozen=True)
class Var:
    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class App:
    fun: "Term"
    arg: "Term"

    def __str__(self):
        left = f"({self.fun})" if isinstance(self.fun, Lam) else str(self.fun)
        right = f"({self.arg})" if not isinstance(self.arg, Var) else str(self.arg)
        return f"{left} {right}"


@dataclass(frozen=True)
class Lam:
    var: str
    body: "Term"

    def __str__(self):
        names, body = [self.var], self.body
        while isinstance(body, Lam):
            names.append(body.var)
            body = body.body
        return "\\" + " ".join(names) + "." + str(body)


Term = Union[Var, App, Lam]


class LambdaSyntaxError(ValueError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.position = position


# ---------------------------------------------------------------------------
# Parsing

_TOKEN = re.compile(r"\s*(?:(?P<lam>\\|λ)|(?P<dot>\.)|(?P<lp>\()|(?P<rp>\))|(?P<name>[A-Za-z0-9_']+))")


def _tokenize(text: str) -> List[Tuple[str, str, int]]:
    tokens, pos = [], 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if m is None:
            raise LambdaSyntaxError(f"unexpected character {text[pos].strip() or text[pos]!r}",
                                    pos + len(text[pos:]) - len(text[pos:].lstrip()))
        kind = m.lastgroup
        tokens.append((kind, m.group(kind), m.start(kind)))
        pos = m.end()
    tokens.append(("eof", "", len(text)))
    return tokens


def parse_lambda(text: str) -> Term:
    """Parse ``\\x y.M`` / ``λx.M`` syntax; application is left associative."""
    tokens = _tokenize(text)
    i = 0

    def peek():
        return tokens[i][0]

    def expect(kind):
        nonlocal i
        tok = tokens[i]
        if tok[0] != kind:
            raise LambdaSyntaxError(f"expected {kind}, found {tok[1] or 'end of input'!r}", tok[2])
        i += 1
        return tok

    def term():
        if peek() == "lam":
            expect("lam")
            names = [expect("name")[1]]
            while peek() == "name":
                names.append(expect("name")[1])
            expect("dot")
            body = term()
            for name in reversed(names):
                body = Lam(name, body)
            return body
        return app()

    def app():
        result = atom()
        while peek() in ("name", "lp", "lam"):
            if peek() == "lam":
                result = App(result, term())
                break
            result = App(result, atom())
        return result

    def atom():
        if peek() == "name":
            return Var(expect("name")[1])
        if peek() == "lp":
            expect("lp")
            inner = term()
            expect("rp")
            return inner
        tok = tokens[i]
        raise LambdaSyntaxError(f"unexpected {tok[1] or 'end of input'!r}", tok[2])

    result = term()
    if peek() != "eof":
        tok = tokens[i]
        raise LambdaSyntaxError(f"trailing input {tok[1]!r}", tok[2])
    return result


# ---------------------------------------------------------------------------
# Term utilities


def free_vars(t: Term) -> Set[str]:
    if isinstance(t, Var):
        return {t.name}
    if isinstance(t, App):
        return free_vars(t.fun) | free_vars(t.arg)
    return free_vars(t.body) - {t.var}


def size(t: Term) -> int:
    """Number of applications plus abstractions."""
    if isinstance(t, Var):
        return 0
    if isinstance(t, App):
        return 1 + size(t.fun) + size(t.arg)
    return 1 + size(t.body)


def count(t: Term, cls) -> int:
    if isinstance(t, Var):
        return int(cls is Var)
    own = int(isinstance(t, cls))
    if isinstance(t, App):
        return own + count(t.fun, cls) + count(t.arg, cls)
    return own + count(t.body, cls)


def to_debruijn(t: Term, env: Tuple[str, ...] = ()):
    if isinstance(t, Var):
        for i, name in enumerate(reversed(env)):
            if name == t.name:
                return ("b", i)
        return ("f", t.name)
    if isinstance(t, App):
        return ("a", to_debruijn(t.fun, env), to_debruijn(t.arg, env))
    return ("l", to_debruijn(t.body, env + (t.var,)))


def alpha_eq(t1: Term, t2: Term) -> bool:
    """Equality up to renaming of bound variables; free variables compare by name."""
    return to_debruijn(t1) == to_debruijn(t2)


def _fresh(base: str, avoid: Set[str]) -> str:
    stem = base.rstrip("0123456789'") or "v"
    i = 0
    while f"{stem}{i}" in avoid:
        i += 1
    return f"{stem}{i}"


def substitute(t: Term, name: str, value: Term) -> Term:
    """Capture-avoiding ``t[name := value]``."""
    if isinstance(t, Var):
        return value if t.name == name else t
    if isinstance(t, App):
        return App(substitute(t.fun, name, value), substitute(t.arg, name, value))
    if t.var == name:
        return t
    fv = free_vars(value)
    if t.var in fv and name in free_vars(t.body):
        new = _fresh(t.var, fv | free_vars(t.body) | {name})
        return Lam(new, substitute(substitute(t.body, t.var, Var(new)), name, value))
    return Lam(t.var, substitute(t.body, name, value))


def _step_normal(t: Term) -> Optional[Term]:
    """One leftmost-outermost beta step, or None in normal form."""
    if isinstance(t, App):
        if isinstance(t.fun, Lam):
            return substitute(t.fun.body, t.fun.var, t.arg)
        fun = _step_normal(t.fun)
        if fun is not None:
            return App(fun, t.arg)
        arg = _step_normal(t.arg)
        return None if arg is None else App(t.fun, arg)
    if isinstance(t, Lam):
        body = _step_normal(t.body)
        return None if body is None else Lam(t.var, body)
    return None


def reference_beta_reduce(t: Term, max_steps: int) -> Tuple[Term, bool]:
    """Normal-order reduction for at most ``max_steps`` steps.

    Returns the last term and whether it is a normal form.
    """
    for _ in range(max_steps):
        nxt = _step_normal(t)
        if nxt is None:
            return t, True
        t = nxt
    return t, _step_normal(t) is None


def reduction_sequence(t: Term, steps: int) -> List[Term]:
    out = [t]
    for _ in range(steps):
        nxt = _step_normal(out[-1])
        if nxt is None:
            break
        out.append(nxt)
    return out


def gen_random_term(seed: int, size: int, free_budget: int = 0) -> Term:
    """Random term with exactly ``size`` applications plus abstractions.

    Deterministic in ``seed``; closed when ``free_budget`` is 0.
    """
    if size < 1:
        raise ValueError("size must be at least 1")
    rng = random.Random(seed)
    free = [f"f{i}" for i in range(free_budget)]
    counter = [0]

    def gen(n: int, scope: List[str]) -> Term:
        available = scope + free
        if n == 0:
            return Var(rng.choice(available))
        if not available or rng.random() < 0.4:
            name = f"v{counter[0]}"
            counter[0] += 1
            return Lam(name, gen(n - 1, scope + [name]))
        left = rng.randint(0, n - 1)
        return App(gen(left, scope), gen(n - 1 - left, scope))

    return gen(size, [])


# ---------------------------------------------------------------------------
# Encoding


def encode(t: Term, opaque: Optional[Mapping[str, str]] = None, root: str = "root") -> Molecule:
    """Translate a term into a molecule.

    Applications become A nodes, abstractions L nodes.  A bound variable
    used ``k`` times is fanned out by a chain of ``k-1`` FO nodes (each FO
    feeds one occurrence from out1 and the rest of the chain from out2); an
    unused one ends in a T node.  Free variables become input free ends
    named after the variable, unless listed in ``opaque``: those become
    opaque nodes with the given port polarities whose first out-port
    supplies the value.  The term's value leaves on the free exit ``root``.
    """
    opaque = dict(opaque or {})
    m = Molecule()
    m.free[root] = "out"
    free_uses: Dict[str, List] = {}

    def wire_uses(source, uses) -> None:
        if not uses:
            t_node = m._new_node("T")
            m._join(source, (t_node, 0))
            return
        for use in uses[:-1]:
            fo = m._new_node("FO")
            m._join(source, (fo, 0))
            m._join((fo, 1), use)
            source = (fo, 2)
        m._join(source, uses[-1])

    def build(term: Term, target, scope: Dict[str, list]) -> None:
        if isinstance(term, Var):
            if term.name in scope:
                scope[term.name].append(target)
            else:
                free_uses.setdefault(term.name, []).append(target)
        elif isinstance(term, App):
            a = m._new_node("A")
            m._join((a, 2), target)
            build(term.fun, (a, 0), scope)
            build(term.arg, (a, 1), scope)
        else:
            lam = m._new_node("L")
            m._join((lam, 2), target)
            uses: list = []
            inner = dict(scope)
            inner[term.var] = uses
            build(term.body, (lam, 0), inner)
            wire_uses((lam, 1), uses)

    build(t, root, {})
    for name in sorted(free_uses):
        uses = free_uses[name]
        if name in opaque:
            pols = opaque[name]
            node = m._new_node(opaque_kind(pols, name))
            out_port = pols.index("o")
            for p, pol in enumerate(pols):
                if p == out_port:
                    continue
                label = f"{name}.{p}"
                m.free[label] = "in" if pol == "i" else "out"
                m._join((node, p), label)
            wire_uses((node, out_port), uses)
        else:
            if name in m.free:
                raise ValueError(f"free variable {name!r} clashes with the root label")
            m.free[name] = "in"
            wire_uses(name, uses)
    return m


# ---------------------------------------------------------------------------
# Decoding


class _Undecodable(Exception):
    pass


def decode(m: Molecule, root: Optional[str] = None, strict: bool = True) -> Optional[Term]:
    """Read a term back from a molecule, or return None outside the encoding's image.

    The term is read backwards from the root exit.  FI and opaque nodes,
    cycles and variables used outside their binder are rejected.  In strict
    mode every node must be accounted for: L/A nodes are read exactly once,
    FO nodes only fan out variables, and the only other nodes allowed are T
    nodes terminating a binder or a free input (a discarded argument).
    Non-strict mode reads shared subterms as copies and ignores garbage.
    """
    if root is None:
        exits = m.free_out()
        if "root" in exits:
            root = "root"
        elif len(exits) == 1:
            root = exits[0]
        else:
            return None
    if m.free.get(root) != "out":
        return None
    avoid = set(m.free)
    names: Dict[int, str] = {}
    visits: Dict[int, int] = {}
    counter = [0]

    def binder_name(nid: int) -> str:
        if nid not in names:
            while f"x{counter[0]}" in avoid:
                counter[0] += 1
            names[nid] = f"x{counter[0]}"
            counter[0] += 1
        return names[nid]

    def var_source(end, path) -> Tuple[str, object]:
        # follow FO chains upwards to the variable's origin
        seen = set()
        while not isinstance(end, str) and m.nodes[end[0]] == "FO" and end[1] in (1, 2):
            if end[0] in seen:
                raise _Undecodable
            seen.add(end[0])
            visits[end[0]] = visits.get(end[0], 0) + 1
            end = m.link[(end[0], 0)]
        return end

    def read(end, scope: Tuple[int, ...], path: frozenset) -> Term:
        if len(path) > 10000:
            raise _Undecodable
        end = var_source(end, path)
        if isinstance(end, str):
            return Var(end)
        nid, port = end
        kind = m.nodes[nid]
        if kind == "L" and port == 1:
            if nid not in scope:
                raise _Undecodable
            return Var(binder_name(nid))
        if nid in path:
            raise _Undecodable
        visits[nid] = visits.get(nid, 0) + 1
        if kind == "L" and port == 2:
            name = binder_name(nid)
            return Lam(name, read(m.link[(nid, 0)], scope + (nid,), path | {nid}))
        if kind == "A" and port == 2:
            inner = path | {nid}
            return App(read(m.link[(nid, 0)], scope, inner), read(m.link[(nid, 1)], scope, inner))
        if kind == "FO":
            # a shared non-variable subterm: read it as a copy
            if strict:
                raise _Undecodable
            return read(m.link[(nid, 0)], scope, path | {nid})
        raise _Undecodable

    try:
        term = read(m.link[root], (), frozenset())
    except (_Undecodable, RecursionError):
        return None
    if strict:
        for nid, kind in m.nodes.items():
            if kind in ("L", "A"):
                if visits.get(nid, 0) != 1:
                    return None
            elif kind == "FO":
                if nid not in visits:
                    return None
                for p in (1, 2):
                    other = m.link[(nid, p)]
                    if not isinstance(other, str) and m.nodes[other[0]] == "T":
                        return None
            elif kind == "T":
                src = m.link[(nid, 0)]
                if not isinstance(src, str) and not (m.nodes[src[0]] == "L" and src[1] == 1):
                    return None
            else:
                return None
        if m.loops:
            return None
        if len([x for x in m.free if m.free[x] == "out"]) != 1:
            return None
    return term
