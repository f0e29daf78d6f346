#!/usr/bin/env python3
"""Regenerates the synthetic ingestion fixtures under tests/fixtures."""
import random
from pathlib import Path

out = Path(__file__).resolve().parent.parent / "tests" / "fixtures"
rng = random.Random(20240601)


def metabolic(path, labels, n_edges, extra_lines):
    edges = set()
    for a, b in zip(labels, labels[1:]):  # spanning path: every label appears
        edges.add(frozenset((a, b)))
    while len(edges) < n_edges:
        a, b = rng.sample(labels, 2)
        edges.add(frozenset((a, b)))
    lines = [" ".join(sorted(e)) for e in edges]
    rng.shuffle(lines)
    # Duplicates in reverse orientation and self-loops must not change the graph.
    dups = [" ".join(reversed(l.split())) for l in rng.sample(lines, extra_lines)]
    loops = [f"{x} {x}" for x in rng.sample(labels, 5)]
    body = lines + dups + loops
    rng.shuffle(body)
    path.write_text("# co-occurrence edge list\n" + "\n".join(body) + "\n")


shared = [f"M{i:04d}" for i in range(251)]
metabolic(out / "metabolic_a.txt", shared, 1800, 40)
metabolic(out / "metabolic_b.txt", shared + [f"X{i:03d}" for i in range(30)], 2000, 10)

with open(out / "temporal.txt", "w") as f:
    loops = set(rng.sample(range(10000), 37))
    for k in range(10000):
        u = rng.randint(1, 300)
        v = u if k in loops else rng.choice([x for x in range(1, 301) if x != u])
        f.write(f"{u} {v} {rng.randint(0, 803 * 86400)}\n")
