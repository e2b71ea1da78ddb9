"""A one-crossing curl translates into a molecule that is the bit after one move."""
from __future__ import annotations

from chemlambda.knots import count_curls, curl, curl_is_bit, curl_molecule, topological_combinator, uncurl
from chemlambda.molecule import serialize_mol
from chemlambda.patterns import named


def main() -> None:
    print("tangle:\n" + curl().dumps())
    print("\nmolecule under convention A:\n" + serialize_mol(curl_molecule("A")))
    cert = curl_is_bit("A")
    print(f"\nmoves to the bit: {cert.move_names()}")
    print("bit:\n" + serialize_mol(named("BIT").molecule))
    print(f"\nconvention B within two moves: {curl_is_bit('B', depth=2)}")

    y = topological_combinator("Y")
    print(f"\ntopological Y has {count_curls(y)} curls; uncurled it is the Y molecule again:")
    print(serialize_mol(uncurl(y)))


if __name__ == "__main__":
    main()
