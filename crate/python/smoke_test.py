"""Smoke test for the Python extension.

Build and run from the repository root:

    cargo build --release -p arboreal-py --features extension-module
    cp target/release/libarboreal_py.so python/arboreal.so
    python3 python/smoke_test.py
"""

import json
import pathlib
import sys

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parent))

import arboreal  # noqa: E402

FIXTURES = pathlib.Path(__file__).resolve().parent.parent / "crates" / "core" / "fixtures"


def load(name):
    return arboreal.Structure.read(str(FIXTURES / f"{name}.json"))


def main():
    fix1, fix2, fix3, fix4 = (load(n) for n in ("fix1", "fix2", "fix3", "fix4"))
    assert fix1.point == "a0" and len(fix1) == len(fix1.universe)

    assert arboreal.check("cltr", fix1, fix2, 3) == (True, None)
    holds, witness = arboreal.check("cltr", fix3, fix4)
    assert not holds and witness.endswith("!"), witness
    assert not arboreal.bisimilar(fix1, fix2, 2)
    assert arboreal.bisimilar(fix1, fix2, 1)

    assert arboreal.distinguish("bot", fix3, fix4) == "(dia a (deadlock))"
    assert arboreal.distinguish("graded", fix2, fix1, 1) == "(gdia >= 2 a tt)"
    assert arboreal.distinguish("bot", fix3, fix3) is None

    assert arboreal.eval_formula("(deadlock)", load("terminal"))
    forest = json.loads(arboreal.unravel("ML", fix4, 2))
    assert forest["point"] == "root"
    graft = arboreal.Structure.from_json(arboreal.unravel("GRAFT", load("loop"), 1))
    assert len(graft) == 2

    ok, report = arboreal.verify("prop85", size=3, k=2, samples=10, seed=7)
    assert ok and report.startswith("SUITE prop85 SAMPLES 10 AGREE 10 FAIL 0"), report

    try:
        arboreal.eval_formula("(dia a", fix1)
    except ValueError as e:
        assert "offset 6" in str(e)
    else:
        raise AssertionError("syntax error not raised")

    print("python smoke test passed")


if __name__ == "__main__":
    main()
