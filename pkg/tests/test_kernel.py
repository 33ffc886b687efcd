import random

import pytest

from rotortree import kernel
from rotortree.generators import Brush
from rotortree.randomtrees import random_config, random_tree
from rotortree.walker import Arena, RotorEngine

needs_c = pytest.mark.skipif(kernel.c_advance is None, reason="compiled kernel not built")


def test_backend_name():
    assert kernel.BACKEND in ("cython", "python")
    assert kernel.advance is (kernel.c_advance if kernel.BACKEND == "cython" else kernel.py_advance)


def _run(tree, cfg, n, advance):
    eng = RotorEngine.for_tree(tree, cfg.copy(), advance=advance)
    pref = eng.run(n)
    st = eng.stats()
    return pref, list(st.n), list(st.m), st.visited.tolist(), [o.steps for o in eng.outcomes], list(eng.arena.rotor)


@needs_c
def test_finite_parity():
    rng = random.Random(11)
    for _ in range(60):
        tree = random_tree(rng, 120)
        cfg = random_config(tree, rng)
        assert _run(tree, cfg, 200, kernel.py_advance) == _run(tree, cfg, 200, kernel.c_advance)


@needs_c
def test_lazy_parity():
    out = []
    for adv in (kernel.py_advance, kernel.c_advance):
        arena = Arena.lazy(Brush(3), depth_cap=60)
        eng = RotorEngine(arena, advance=adv)
        pref = eng.run(150)
        out.append((pref, list(arena.rotor), list(arena.n_count), eng.steps, eng.max_level))
    assert out[0] == out[1]


@needs_c
def test_budget_parity():
    from rotortree.walker import StepBudgetExceeded
    rng = random.Random(3)
    tree = random_tree(rng, 150)
    cfg = random_config(tree, rng)
    for adv in (kernel.py_advance, kernel.c_advance):
        eng = RotorEngine.for_tree(tree, cfg.copy(), step_budget=37, advance=adv)
        with pytest.raises(StepBudgetExceeded):
            eng.run(1000)
        assert eng.steps == 37


def test_pure_fallback_selected_by_env():
    import os
    import subprocess
    import sys
    env = dict(os.environ, ROTORTREE_PURE="1")
    out = subprocess.run([sys.executable, "-c", "from rotortree import kernel; print(kernel.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"
