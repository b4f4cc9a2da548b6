"""Smoke test for the rnlab Python extension.

Build and install it first, for example with
``pip install maturin && maturin develop -m crates/python/Cargo.toml``.
"""

import json
import math

import rnlab


def main():
    tree = rnlab.Graph.binary_tree(10, math.log(2))
    assert tree.vertex_count() == 2**10 - 1
    assert abs(sum(tree.probabilities()) - 1.0) < 1e-12

    counts = rnlab.sample(tree, 2, 1, 2000, 7)
    assert sum(counts.values()) == 2000
    assert counts == rnlab.sample(tree, 2, 1, 2000, 7)

    stats = json.loads(rnlab.stats(tree, 1, 1))
    assert abs(sum(e["weight"] for e in stats["entries"]) - 1.0) < 1e-12

    d, witness = rnlab.distance(rnlab.Graph.cycle(5), "forest")
    assert abs(d - 0.4) < 1e-12 and len(witness) == 1

    verdict = json.loads(rnlab.test_property(rnlab.Graph.cycle(6), "forest", 0.2, 2.0, 5))
    assert verdict["verdict"] == "REJECT"
    verdict = json.loads(rnlab.test_property(tree, "forest", 0.2, seed=5))
    assert verdict["verdict"] == "ACCEPT"

    value, members = rnlab.estimate_independence(rnlab.Graph.path(200), 0.1)
    assert abs(value - 0.5) < 0.05 and members
    assert abs(rnlab.estimate_matching_number(rnlab.Graph.grid(8, 8), 0.1) - 0.5) < 0.05

    again = rnlab.Graph.from_json(tree.to_json())
    assert again.edges() == tree.edges()

    try:
        rnlab.Graph.cycle(2)
    except ValueError:
        pass
    else:
        raise AssertionError("cycle(2) should fail")

    report = rnlab.scenario(json.dumps({"scenario": "entropy_sweep", "params": {"depths": [25, 50]}}))
    rows = [json.loads(line) for line in report.splitlines()]
    assert len(rows) == 2 and rows[-1]["edge_entropy"] > rows[0]["edge_entropy"]

    print("smoke test passed:", tree)


if __name__ == "__main__":
    main()
