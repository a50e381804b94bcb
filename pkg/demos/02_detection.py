"""Detect overlapping (CPM) and disjoint (modularity) communities on one graph."""
from commtrack import detect_cpm, detect_modularity, from_edge_lists
from commtrack.detection import modularity


def clique(nodes):
    return [(u, v) for i, u in enumerate(nodes) for v in nodes[i + 1:]]


# two 5-cliques sharing node "e", plus a loose tail
edges = clique(list("abcde")) + clique(list("efghi")) + [("i", "j"), ("j", "k")]
net = from_edge_lists([edges, edges])
snap = net.snapshot(1)

cpm = detect_cpm(snap, k=4)
print("CPM k=4, overlapping:", cpm.overlapping)
for c in cpm:
    print("  ", c.id, sorted(net.tokens[n] for n in c.members))

mod = detect_modularity(snap)
print("modularity, Q =", round(modularity(snap, [c.members for c in mod]), 4))
for c in mod:
    print("  ", c.id, sorted(net.tokens[n] for n in c.members))
