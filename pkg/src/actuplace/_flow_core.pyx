# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled Edmonds-Karp max-flow kernel.

Same algorithm and arc ordering as ``_flow_py.edmonds_karp``; the two must
return identical values on every input.
"""

from libc.stdlib cimport malloc, free


def edmonds_karp(int node_count, tails, heads, caps, int source, int sink):
    cdef Py_ssize_t m = len(tails)
    cdef Py_ssize_t k, a, i
    cdef int u, v, w, head, tail_q
    cdef long long bottleneck, flow = 0

    cdef int *to = <int *> malloc(2 * m * sizeof(int) + 1)
    cdef long long *cap = <long long *> malloc(2 * m * sizeof(long long) + 1)
    cdef int *start = <int *> malloc((node_count + 1) * sizeof(int))
    cdef int *fill = <int *> malloc((node_count + 1) * sizeof(int))
    cdef int *arcs = <int *> malloc(2 * m * sizeof(int) + 1)
    cdef int *pred = <int *> malloc(node_count * sizeof(int))
    cdef int *queue = <int *> malloc(node_count * sizeof(int))
    if not (to and cap and start and fill and arcs and pred and queue):
        free(to); free(cap); free(start); free(fill); free(arcs); free(pred); free(queue)
        raise MemoryError()

    try:
        for i in range(node_count + 1):
            start[i] = 0
        for k in range(m):
            u = tails[k]
            v = heads[k]
            to[2 * k] = v
            cap[2 * k] = caps[k]
            to[2 * k + 1] = u
            cap[2 * k + 1] = 0
            start[u + 1] += 1
            start[v + 1] += 1
        for i in range(node_count):
            start[i + 1] += start[i]
            fill[i] = start[i]
        # CSR adjacency in the same per-node order as the Python fallback
        for k in range(m):
            u = to[2 * k + 1]
            v = to[2 * k]
            arcs[fill[u]] = 2 * k
            fill[u] += 1
            arcs[fill[v]] = 2 * k + 1
            fill[v] += 1

        while True:
            for i in range(node_count):
                pred[i] = -1
            pred[source] = -2
            head = 0
            tail_q = 0
            queue[tail_q] = source
            tail_q += 1
            while head < tail_q and pred[sink] == -1:
                u = queue[head]
                head += 1
                for i in range(start[u], start[u + 1]):
                    a = arcs[i]
                    w = to[a]
                    if cap[a] > 0 and pred[w] == -1:
                        pred[w] = <int> a
                        queue[tail_q] = w
                        tail_q += 1
            if pred[sink] == -1:
                break
            v = sink
            bottleneck = -1
            while v != source:
                a = pred[v]
                if bottleneck < 0 or cap[a] < bottleneck:
                    bottleneck = cap[a]
                v = to[a ^ 1]
            v = sink
            while v != source:
                a = pred[v]
                cap[a] -= bottleneck
                cap[a ^ 1] += bottleneck
                v = to[a ^ 1]
            flow += bottleneck
    finally:
        free(to); free(cap); free(start); free(fill); free(arcs); free(pred); free(queue)
    return flow
