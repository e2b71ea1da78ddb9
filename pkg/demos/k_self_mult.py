"""K self-multiplies: feed its exit into a fanout and search for two copies."""
from __future__ import annotations

from chemlambda.canon import is_isomorphic
from chemlambda.molecule import serialize_mol, split_components
from chemlambda.patterns import check_multiplier, named


def main() -> None:
    k = named("K")
    print("K as a molecule:\n" + serialize_mol(k.molecule))
    cert = check_multiplier(k, depth=12)
    print(f"\ncertificate ({len(cert)} moves): {' '.join(cert.move_names())}")
    final, _ = cert.replay()
    parts = split_components(final)
    print(f"after replay: {len(parts)} components")
    for p in parts:
        print(f"  copy of K: {is_isomorphic(p, k.molecule)}  exit {sorted(p.free)}")


if __name__ == "__main__":
    main()
