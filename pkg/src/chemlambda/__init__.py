"""Chemlambda: molecules as trivalent port graphs, rewritten by local reversible moves."""
from __future__ import annotations

from .canon import canonical_form, canonical_labeling, code_digest, is_isomorphic, isomorphism
from .engine import (ALL_MOVES, DEFAULT_PRIORITY, Limits, Priority, Random, ReplayError, Scripted,
                     ScriptError, SearchResult, Status, Trace, TraceStep, reduce, replay, run_script,
                     search_reach, step)
from .lam import (App, Lam, LambdaSyntaxError, Var, alpha_eq, decode, encode, gen_random_term,
                  parse_lambda, reference_beta_reduce)
from .molecule import (Molecule, MoleculeError, NodeKind, components, connect, disjoint_union, glue,
                       is_valid, opaque_kind, parse_mol, serialize_mol, split_components, to_dot,
                       validate)
from .moves import (FORWARD, REVERSE, Direction, MoveInstance, MoveKind, Site, StaleSiteError,
                    apply_move, apply_move_ex, find_sites, sites_overlap)

__all__ = [
    "ALL_MOVES", "App", "DEFAULT_PRIORITY", "Direction", "FORWARD", "Lam", "LambdaSyntaxError",
    "Limits", "Molecule", "MoleculeError", "MoveInstance", "MoveKind", "NodeKind", "Priority",
    "REVERSE", "Random", "ReplayError", "ScriptError", "Scripted", "SearchResult", "Site",
    "StaleSiteError", "Status", "Trace", "TraceStep", "Var", "alpha_eq", "apply_move",
    "apply_move_ex", "canonical_form", "canonical_labeling", "code_digest", "components", "connect",
    "decode", "disjoint_union", "encode", "find_sites", "gen_random_term", "glue", "is_isomorphic",
    "is_valid", "isomorphism", "opaque_kind", "parse_lambda", "parse_mol", "reduce",
    "reference_beta_reduce", "replay", "run_script", "search_reach", "serialize_mol",
    "sites_overlap", "split_components", "step", "to_dot", "validate",
]
