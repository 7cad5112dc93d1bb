"""The four dataset generators, one sample record each.

Every generator takes a pluggable skill distribution, computes the answer
with an exact oracle, and emits JSON-lines records with a manifest carrying
the realized skill histogram.
"""

import tempfile
from pathlib import Path

from skillcomp.distributions import dist_from_spec
from skillcomp.rng import make_rng
from skillcomp.tasks import (
    gen_arithmetic,
    gen_gsm,
    gen_multihop_qa,
    gen_relation_graph,
    gen_state_tracking,
    write_dataset,
)

rng = make_rng(0, "demo")

print("=== multi-step arithmetic (operands are skills, shuffled zipf ranks)")
dist = dist_from_spec({"kind": "zipf", "d": 50, "alpha": 1.0, "ordering": {"random": 7}})
rec = gen_arithmetic(dist, 1, rng)[0]
print("prompt:", rec["prompt"].replace("\n", "\\n"))
print("label :", repr(rec["meta"]["label"]))

print("\n=== state tracking over the 120 permutations (4 hops)")
dist = dist_from_spec({"kind": "zipf", "d": 120, "alpha": 1.5, "ordering": {"random": 7}})
rec = gen_state_tracking(4, dist, 1, rng)[0]
print("input :", rec["prompt"])
print("target:", rec["answer"])

print("\n=== multi-hop QA over a relation graph (relations are skills)")
graph = gen_relation_graph(20, 20, make_rng(0, "graph"))
dist = dist_from_spec({"kind": "zipf", "d": 20, "alpha": 1.0, "ordering": {"random": 7}})
rec = gen_multihop_qa(graph, 3, dist, 1, rng, include_facts=True)[0]
for fact in rec["meta"]["facts"]:
    print("fact  :", fact)
print("prompt:", rec["prompt"].replace("\n", "\\n"))
print("answer:", rec["answer"])

print("\n=== grade-school math over a dependency DAG (numbers are skills, mod 211)")
dist = dist_from_spec({"kind": "zipf", "d": 211, "alpha": 1.0, "ordering": {"random": 7}})
rec = gen_gsm(dist, 1, rng, modulus=211)[0]
print("problem :", rec["prompt"])
print("solution:", rec["meta"]["solution"])

with tempfile.TemporaryDirectory() as tmp:
    path = Path(tmp) / "gsm.jsonl"
    manifest = write_dataset(gen_gsm(dist, 200, make_rng(0, "ds"), modulus=211), path,
                             config={"task": "gsm", "modulus": 211}, seed=0)
    print("\nwrote", manifest["num_records"], "records;",
          "distinct number skills drawn:", len(manifest["skill_histogram"]),
          "; sha256:", manifest["sha256"][:16], "...")
