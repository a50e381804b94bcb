"""Compare two communities with every similarity measure."""
import numpy as np

from commtrack import Community, Snapshot, inclusion, jaccard, make_layer, modec, modified_jaccard
from commtrack import mutual, transition_vectors

# a triangle at t1 and a community at t2 that keeps two of its nodes
a = Community((1, 0), frozenset({1, 2, 3}))
b = Community((2, 0), frozenset({2, 3, 4, 5}))
tri = Snapshot(1, frozenset({1, 2, 3}), frozenset({(1, 2), (1, 3), (2, 3)}))

print("jaccard          ", jaccard(a, b))
print("modec (k=0.3)    ", modec(a, b, 0.3))
print("modec (k=0.6)    ", modec(a, b, 0.6))
print("modified jaccard ", modified_jaccard(a, b))
print("inclusion a in b ", round(inclusion(a, b, tri), 4))

# transition vectors count shared nodes with every community, self included
layers = [make_layer(1, [{1, 2, 3}]), make_layer(2, [{1, 2}, {3}])]
tv = transition_vectors(layers)
for cid in tv:
    print("vector", cid, np.round(tv[cid].components, 3))

print("mutual (1,0)~(2,0)", round(mutual(tv[(1, 0)], tv[(2, 0)]), 4))
print("mutual hand example", round(mutual(np.array([0.5, 0.5, 0]), np.array([0.5, 0.25, 0.25]), 0.5), 4))
