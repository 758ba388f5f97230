"""Pure-Python Edmonds-Karp; fallback for the compiled ``_flow_core``."""

from collections import deque


def edmonds_karp(node_count, tails, heads, caps, source, sink):
    m = len(tails)
    to = [0] * (2 * m)
    cap = [0] * (2 * m)
    adj = [[] for _ in range(node_count)]
    for k in range(m):
        u, v = tails[k], heads[k]
        to[2 * k] = v
        cap[2 * k] = caps[k]
        to[2 * k + 1] = u
        adj[u].append(2 * k)
        adj[v].append(2 * k + 1)

    flow = 0
    while True:
        # pred[v] = arc used to reach v; -2 marks the source, -1 unvisited
        pred = [-1] * node_count
        pred[source] = -2
        queue = deque([source])
        while queue and pred[sink] == -1:
            u = queue.popleft()
            for a in adj[u]:
                w = to[a]
                if cap[a] > 0 and pred[w] == -1:
                    pred[w] = a
                    queue.append(w)
        if pred[sink] == -1:
            return flow
        bottleneck = None
        v = sink
        while v != source:
            a = pred[v]
            if bottleneck is None or cap[a] < bottleneck:
                bottleneck = cap[a]
            v = to[a ^ 1]
        v = sink
        while v != source:
            a = pred[v]
            cap[a] -= bottleneck
            cap[a ^ 1] += bottleneck
            v = to[a ^ 1]
        flow += bottleneck
