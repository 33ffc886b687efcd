"""Pure-Python rotor-walk kernel (fallback for the compiled one)."""

RETURNED = 0
ABSORBED = 1
NEED_EXPAND = 2
BUDGET = 3

_SINK = 1
_EXPANDED = 2
_VISITED = 4


def advance(parent, first_child, nchild, rotor, level, flags, n_count, m_count,
            track, pos, max_steps, from_root):
    """Move one particle until it stops, needs an unexpanded vertex, or runs out of steps.

    Returns ``(code, pos, steps, max_level, newly_visited)``.  With
    ``from_root`` the particle starts at the root and first steps to the base.
    """
    steps = 0
    newly = 0
    max_level = 0
    v = pos
    if from_root:
        v = first_child[0]
        steps = 1
        if track:
            n_count[v] += 1
        if not flags[v] & _VISITED:
            flags[v] |= _VISITED
            newly += 1
        max_level = level[v]
    elif v > 0:
        max_level = level[v]
    while True:
        if v == 0:
            return RETURNED, v, steps, max_level, newly
        f = flags[v]
        if f & _SINK:
            return ABSORBED, v, steps, max_level, newly
        if not f & _EXPANDED:
            return NEED_EXPAND, v, steps, max_level, newly
        if steps >= max_steps:
            return BUDGET, v, steps, max_level, newly
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
            if not flags[v] & _VISITED:
                flags[v] |= _VISITED
                newly += 1
            if level[v] > max_level:
                max_level = level[v]
