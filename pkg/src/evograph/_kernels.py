"""Compiled inner loops for the simulator and the mean-field iteration.

The simulator consumes one row of ``2*m + 1`` uniforms per time-step:
``u[0]`` selects the substep and ``u[1:]`` drive the endpoint/deletion
choices. :func:`evograph.process.advance` is the readable reference for the
same consumption pattern; the two must produce identical edge arrays.
"""
import numba
import numpy as np

VERTEX, EDGES, DELETE, NOOP = 0, 1, 2, 3


@numba.njit(cache=True, inline="always")
def _pick(u, n):
    i = np.int64(u * n)
    return n - 1 if i >= n else i


@numba.njit(nogil=True, cache=True)
def simulate_steps(ends, degree, st, draws, alpha1, alpha, m, cold_m, kinds):
    """Advance the multigraph by ``draws.shape[0]`` time-steps in place.

    ``ends`` stores edge ``i`` as ``(ends[2i], ends[2i+1])``; ``st`` holds
    ``(step, n_vertices, n_edges)``. Uniform-edge-then-uniform-endpoint is a
    single index into ``ends[:2e]``, and because new edges are appended past
    ``2e`` every draw within a step sees the start-of-step degrees.
    """
    for row in range(draws.shape[0]):
        u = draws[row]
        v = st[1]
        e = st[2]
        if u[0] < alpha1:
            x = v
            if e > 0:
                two_e = 2 * e
                for i in range(m):
                    w = ends[_pick(u[1 + i], two_e)]
                    ends[2 * (e + i)] = x
                    ends[2 * (e + i) + 1] = w
                    degree[w] += 1
                degree[x] = m
                st[2] = e + m
            else:
                tgt = _pick(u[1], v)
                for i in range(cold_m):
                    ends[2 * (e + i)] = x
                    ends[2 * (e + i) + 1] = tgt
                    degree[tgt] += 1
                degree[x] = cold_m
                st[2] = e + cold_m
            st[1] = v + 1
            kinds[VERTEX] += 1
        elif u[0] < alpha:
            if e > 0:
                two_e = 2 * e
                for i in range(m):
                    a = ends[_pick(u[1 + 2 * i], two_e)]
                    b = ends[_pick(u[2 + 2 * i], two_e)]
                    ends[2 * (e + i)] = a
                    ends[2 * (e + i) + 1] = b
                    degree[a] += 1
                    degree[b] += 1
                st[2] = e + m
                kinds[EDGES] += 1
            else:
                kinds[NOOP] += 1
        else:
            n_del = m if m < e else e
            for i in range(n_del):
                j = _pick(u[1 + i], e)
                degree[ends[2 * j]] -= 1
                degree[ends[2 * j + 1]] -= 1
                last = e - 1
                ends[2 * j] = ends[2 * last]
                ends[2 * j + 1] = ends[2 * last + 1]
                e -= 1
            st[2] = e
            kinds[DELETE] += 1
        st[0] += 1


@numba.njit(nogil=True, cache=True)
def mean_field_evolve(D, A0, A1, A2, B0, B1, B2, alpha1, m, t0, T):
    """Iterate the expected-count recurrence in place; return the minimum seen."""
    K = D.shape[0] - 1
    c2 = np.empty(K + 1)
    c1 = np.empty(K + 1)
    c0 = np.empty(K + 1)
    for k in range(K + 1):
        c2[k] = A2 * (k + 1) + B2
        c1[k] = A1 * k + B1 + 1.0
        c0[k] = A0 * (k - 1) + B0
    new = np.empty(K + 1)
    low = 0.0
    for t in range(t0, T):
        inv = 1.0 / t
        for k in range(K + 1):
            acc = c1[k] * D[k]
            if k < K:
                acc += c2[k] * D[k + 1]
            if k > 0:
                acc += c0[k] * D[k - 1]
            new[k] = D[k] + acc * inv
        if m <= K:
            new[m] += alpha1
        for k in range(K + 1):
            D[k] = new[k]
            if new[k] < low:
                low = new[k]
    return low
