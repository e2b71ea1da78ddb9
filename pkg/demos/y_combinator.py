"""Y applied to an opaque molecule A, then Y left alone as a gun."""
from __future__ import annotations

from collections import Counter

from chemlambda.canon import is_isomorphic
from chemlambda.patterns import named, run_gun, y_gun, y_reduction


def main() -> None:
    r = y_reduction()
    print("Y A, with A opaque, reduces by:")
    for i, name in enumerate(r.trace.moves(), 1):
        print(f"  {i:2d}. {name}")
    print(f"ends in the A(Y A) pattern: {r.matches()}")
    print(f"moves that touched A: {r.moves_touching_opaque()}")

    residual, emitted = run_gun(named("Y"), 4)
    print("\nY as a gun, 4 cycles:")
    for i, piece in enumerate(emitted, 1):
        print(f"  emission {i}: {dict(sorted(Counter(piece.nodes.values()).items()))}")
    print(f"back where it started: {is_isomorphic(residual, y_gun().molecule, labeled=True)}")


if __name__ == "__main__":
    main()
