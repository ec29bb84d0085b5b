"""Stand-in for a multilevel partitioner: ``fake_partitioner.py GRAPH L [--short]``.

Reads the adjacency interchange format, labels connected components by BFS
(folded into ``L`` parts) and writes ``GRAPH.part.L``. ``--short`` drops
the last label to exercise error handling.
"""
import sys
from collections import deque


def main(argv):
    path, parts = argv[1], int(argv[2])
    with open(path) as fh:
        n, m = map(int, fh.readline().split())
        adj = [[int(t) - 1 for t in fh.readline().split()] for _ in range(n)]
    if sum(len(a) for a in adj) != 2 * m:
        print("edge count mismatch", file=sys.stderr)
        return 3
    label = [-1] * n
    comp = 0
    for s in range(n):
        if label[s] >= 0:
            continue
        label[s] = comp
        queue = deque([s])
        while queue:
            u = queue.popleft()
            for v in adj[u]:
                if label[v] < 0:
                    label[v] = comp
                    queue.append(v)
        comp += 1
    if "--short" in argv:
        label = label[:-1]
    with open(f"{path}.part.{parts}", "w") as fh:
        fh.writelines(f"{x % parts}\n" for x in label)
    return 0


if __name__ == "__main__":
    sys.exit(main(sys.argv))
