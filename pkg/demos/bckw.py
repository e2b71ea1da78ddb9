"""B, C, K and W applied to free variables, reduced as graphs and read back as terms."""
from __future__ import annotations

from chemlambda.engine import Limits, Priority, reduce
from chemlambda.lam import alpha_eq, decode, encode, parse_lambda, reference_beta_reduce
from chemlambda.patterns import TERMS

CASES = [("B", "x y z"), ("C", "x y z"), ("K", "x y"), ("W", "x y")]


def main() -> None:
    for name, args in CASES:
        term = parse_lambda(f"({TERMS[name]}) {args}")
        final, trace = reduce(encode(term), Priority(), Limits(1000, 1000))
        graph = decode(final)
        oracle, _ = reference_beta_reduce(term, 100)
        print(f"{name} {args:6s} -> {graph}   ({len(trace)} moves, oracle agrees: {alpha_eq(graph, oracle)})")


if __name__ == "__main__":
    main()
