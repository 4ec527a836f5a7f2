"""Build a cultural taxonomy from a concept graph and tag co-occurrences.

A synthetic world stands in for the encyclopedia category graph, the
lexical database and a photo collection. We walk the stages one by one and
watch how the term set and its silhouette change.

Run: ``python docs/examples/01_taxonomy_pipeline.py``
"""

import tempfile

from culturank import lexsim, pipeline, synth
from culturank import taxonomy as tx

world = synth.taxonomy_world(seed=0)
paths = world.write(tempfile.mkdtemp(prefix="culturank-world-"))
print(f"concept graph: {len(world.titles)} pages; records: {len(world.records)}")

# The default co-occurrence threshold of 2000 suits tens of millions of
# photos. The synthetic world is tiny, so pick the cut-off from a sweep.
build = pipeline.build_taxonomy((paths["edges"], paths["titles"]), paths["lexgraph"],
                                world.records, paths["decisions"], paths["labels"],
                                stoplist=paths["stoplist"], threshold=40, workers=2)
g = lexsim.LexGraph.load(paths["lexgraph"])
depth = build.reports["depth"]
print(f"lexical graph depth (diameter of the largest component): {depth}")

print("\nthreshold  retained  mean pair similarity")
for row in tx.threshold_sweep(build.pairs, g, depth, 10, 90, 20):
    mean = "n/a" if row.mean is None else f"{row.mean:.3f}"
    print(f"{row.threshold:9d}  {row.n:8d}  {mean}")

print("\nstage  terms  median silhouette")
for stage in ("wiki", "aug", "val"):
    assignment = build.stage_assignments(stage)
    rep = tx.silhouette(assignment, g, depth)
    print(f"{stage:5s}  {len(assignment):5d}  {rep.median:+.3f}")

dropped = build.reports["clean"]["dropped"]
print(f"\ncrowd cleaning dropped {len(dropped)} terms, e.g. {sorted(dropped)[:5]}")

# Final taxonomy: every surviving term attached to one subcategory.
tax = build.taxonomy
print(f"final taxonomy: {len(tax.terms)} terms in {len(tax.categories)} categories")
