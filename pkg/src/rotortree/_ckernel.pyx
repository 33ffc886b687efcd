# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled rotor-walk kernel; same contract as ``_pykernel.advance``."""

cdef enum:
    SINK = 1
    EXPANDED = 2
    VISITED = 4

RETURNED = 0
ABSORBED = 1
NEED_EXPAND = 2
BUDGET = 3


def advance(long long[::1] parent, long long[::1] first_child, long long[::1] nchild,
            long long[::1] rotor, long long[::1] level, unsigned char[::1] flags,
            long long[::1] n_count, long long[::1] m_count, bint track,
            Py_ssize_t pos, long long max_steps, bint from_root):
    cdef long long steps = 0
    cdef long long newly = 0
    cdef long long max_level = 0
    cdef long long r
    cdef Py_ssize_t v = pos
    cdef unsigned char f
    if from_root:
        v = first_child[0]
        steps = 1
        if track:
            n_count[v] += 1
        if not flags[v] & VISITED:
            flags[v] |= VISITED
            newly += 1
        max_level = level[v]
    elif v > 0:
        max_level = level[v]
    while True:
        if v == 0:
            return 0, v, steps, max_level, newly
        f = flags[v]
        if f & SINK:
            return 1, v, steps, max_level, newly
        if not f & EXPANDED:
            return 2, v, steps, max_level, newly
        if steps >= max_steps:
            return 3, v, steps, max_level, newly
        r = rotor[v] + 1
        if r > nchild[v]:
            r = 0
        rotor[v] = r
        steps += 1
        if r == 0:
            if track:
                m_count[v] += 1
            v = parent[v]
        else:
            v = first_child[v] + r - 1
            if track:
                n_count[v] += 1
            if not flags[v] & VISITED:
                flags[v] |= VISITED
                newly += 1
            if level[v] > max_level:
                max_level = level[v]
