import os
import subprocess
import sys

import numpy as np
import pytest

from lackawalk import kernels
from lackawalk.classical import walk_matrix
from lackawalk.coined import CoinConfig, initial_state_lazy
from lackawalk.graphs import MarkedInstance, hypercube, johnson, torus
from lackawalk.spectral import discriminant, eigendecompose
from lackawalk.szegedy import InterpolatedWalks

pytestmark = pytest.mark.skipif("numba" not in kernels.KERNELS, reason="numba not installed")

NP, NB = kernels.KERNELS.get("numpy"), kernels.KERNELS.get("numba")


@pytest.mark.parametrize("oracle", [kernels.ORACLE_NONE, kernels.ORACLE_G, kernels.ORACLE_GHAT])
def test_coin_step_parity(oracle):
    g = torus(5, 5)
    rng = np.random.default_rng(0)
    psi = rng.normal(size=(25, 5)) + 1j * rng.normal(size=(25, 5))
    w = CoinConfig().weights(g)
    a = NP.coin_step(psi, g.neighbors, g.reverse_index, w, 3, oracle)
    b = NB.coin_step(psi, g.neighbors, g.reverse_index, w, 3, oracle)
    assert np.max(np.abs(a - b)) < 1e-15


def test_szegedy_step_parity():
    walks = InterpolatedWalks(MarkedInstance(johnson(5, 2), 0))
    for space in (walks.space, walks.space_hat):
        psi = np.random.default_rng(1).normal(size=space.size).astype(complex)
        a = NP.szegedy_step(psi, space.slots, space.blocks, space.swap)
        b = NB.szegedy_step(psi, space.slots, space.blocks, space.swap)
        assert np.max(np.abs(a - b)) < 1e-15


def full_decomposition(k, d):
    diag, sub, q = k.tridiagonalize(d)
    vals, vecs, ok = k.ql_implicit(diag, sub, q, 50 * d.shape[0])
    assert ok
    order = np.argsort(vals, kind="stable")
    return vals[order], vecs[:, order]


def projectors(vals, vecs, tol=1e-9):
    # one projector per cluster of equal eigenvalues; basis choice inside a cluster is free
    cuts = np.flatnonzero(np.diff(vals) > tol) + 1
    return [vecs[:, g] @ vecs[:, g].T for g in np.split(np.arange(len(vals)), cuts)]


@pytest.mark.parametrize("g", [hypercube(4), torus(6, 6), johnson(6, 3)])
def test_eigensolver_parity(g):
    d = discriminant(walk_matrix(g))
    va, qa = full_decomposition(NP, d)
    vb, qb = full_decomposition(NB, d)
    assert np.max(np.abs(va - vb)) < 1e-13
    pa, pb = projectors(va, qa), projectors(vb, qb)
    assert len(pa) == len(pb)
    assert max(np.max(np.abs(x - y)) for x, y in zip(pa, pb)) < 1e-10


def test_mc_advance_bitwise_identical():
    p = walk_matrix(torus(4, 4))
    cdf = np.cumsum(p, axis=1)
    last = np.array([np.flatnonzero(r > 0)[-1] for r in p], dtype=np.int64)
    rng = np.random.default_rng(2)
    pos = rng.integers(0, 16, 5000)
    u = rng.random(5000)
    assert np.array_equal(NP.mc_advance(pos, u, cdf, last), NB.mc_advance(pos, u, cdf, last))


def _run(code, backend):
    env = dict(os.environ, LACKAWALK_BACKEND=backend)
    return subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True)


def test_env_flag_selects_backend():
    code = "from lackawalk import kernels; print(kernels.BACKEND, kernels.coin_step is kernels.KERNELS['numpy'].coin_step)"
    assert _run(code, "numpy").stdout.split() == ["numpy", "True"]
    assert _run(code, "NUMBA").stdout.split() == ["numba", "False"]


def test_env_flag_rejects_unknown_value():
    out = _run("import lackawalk", "cuda")
    assert out.returncode != 0 and "LACKAWALK_BACKEND" in out.stderr


def test_end_to_end_results_agree_across_backends():
    code = ("from lackawalk import *; from lackawalk.graphs import MarkedInstance;"
            "import numpy as np; inst = MarkedInstance(torus(4, 4), 0);"
            "c = search_experiment(inst); print(repr(c.max));"
            "print(repr(check_theorem1(inst).values['C_L_sq_spectral']))")
    a, b = _run(code, "numpy"), _run(code, "numba")
    assert a.returncode == 0 and b.returncode == 0, a.stderr + b.stderr
    va, vb = map(float, a.stdout.split()), map(float, b.stdout.split())
    for x, y in zip(va, vb):
        assert x == pytest.approx(y, abs=1e-12)


def test_active_eigensolver_matches_lapack():
    d = discriminant(walk_matrix(torus(4, 4)))
    assert np.max(np.abs(eigendecompose(d).eigenvalues - np.linalg.eigvalsh(d))) < 1e-12
    assert initial_state_lazy(MarkedInstance(torus(4, 4), 0)).shape == (16, 5)
