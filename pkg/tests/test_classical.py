import numpy as np
import pytest
import sympy

from lackawalk import classical as C
from lackawalk import graphs


def exact_hitting_times(g, m):
    """Rational hitting times from a sympy solve of (I - Q) h = 1."""
    n, d = g.n_vertices, g.degree
    keep = [x for x in range(n) if x != m]
    q = sympy.zeros(n - 1, n - 1)
    for a, x in enumerate(keep):
        for y in g.neighbors[x]:
            if y != m:
                q[a, keep.index(int(y))] = sympy.Rational(1, d)
    h = (sympy.eye(n - 1) - q).LUsolve(sympy.ones(n - 1, 1))
    out = [sympy.Integer(0)] * n
    for a, x in enumerate(keep):
        out[x] = h[a]
    return out


def test_walk_matrix_examples():
    p = C.walk_matrix(graphs.cycle(4))
    assert p[0, 1] == p[0, 3] == 0.5 and p[0, 2] == 0.0
    k4 = C.walk_matrix(graphs.complete(4))
    assert np.allclose(k4, (np.ones((4, 4)) - np.eye(4)) / 3, atol=0)


@pytest.mark.parametrize("g", [graphs.cycle(7), graphs.torus(3, 4), graphs.hypercube(3), graphs.paley(13)])
def test_stationary_is_uniform(g):
    pi = C.stationary_distribution(C.walk_matrix(g))
    assert np.allclose(pi, 1 / g.n_vertices, atol=1e-12)


def test_absorbing_matrix():
    p = C.walk_matrix(graphs.cycle(3))
    a = C.absorbing_matrix(p, 0)
    assert a[0].tolist() == [1.0, 0.0, 0.0]
    assert np.array_equal(a[1:], p[1:])
    C.check_stochastic(a)


def test_interpolated_matrix():
    p = C.walk_matrix(graphs.cycle(4))
    assert np.array_equal(C.interpolated_matrix(p, 0, 0.0), p)
    assert np.array_equal(C.interpolated_matrix(p, 0, 1.0), C.absorbing_matrix(p, 0))
    ps = C.interpolated_matrix(p, 0, 0.75)
    assert ps[0, 0] == 0.75 and ps[0, 1] == ps[0, 3] == 0.125
    assert np.array_equal(ps[1:], p[1:])
    for s in (-0.1, 1.5):
        with pytest.raises(ValueError):
            C.interpolated_matrix(p, 0, s)


def test_lazy_matrices():
    g = graphs.cycle(4)
    assert np.array_equal(C.lazy_matrix(g, 0.0), C.walk_matrix(g))
    lz = C.lazy_matrix(g, 0.5)
    assert np.isclose(lz[0, 0], 0.2) and np.isclose(lz[0, 1], 0.4) and lz[0, 2] == 0
    with pytest.raises(ValueError):
        C.lazy_matrix(g, -1.0)
    li = C.lazy_interpolated_matrix(g, 0, 0.5, 1.0)
    assert li[0].tolist() == [1.0, 0.0, 0.0, 0.0]
    assert np.array_equal(C.lazy_interpolated_matrix(g, 0, 0.5, 0.3)[1:], lz[1:])


@pytest.mark.parametrize("g", [graphs.cycle(8), graphs.complete(6), graphs.torus(3, 3), graphs.johnson(5, 2)])
def test_lazy_interpolated_is_affine_in_interpolated(g):
    n, d = g.n_vertices, g.degree
    p_s = C.interpolated_matrix(C.walk_matrix(g), 0, 1 - 1 / n)
    p_hat_s = C.lazy_interpolated_matrix(g, 0, d / n, 1 - 1 / n)
    assert np.max(np.abs(p_hat_s - (n / (n + 1) * p_s + np.eye(n) / (n + 1)))) < 1e-14


def test_check_stochastic_rejects():
    with pytest.raises(ValueError):
        C.check_stochastic(np.array([[0.5, 0.4], [0.5, 0.5]]))
    with pytest.raises(ValueError):
        C.check_stochastic(np.array([[1.5, -0.5], [0.5, 0.5]]))
    with pytest.raises(ValueError):
        C.check_stochastic(np.ones((2, 3)) / 3)


@pytest.mark.parametrize("g", [graphs.cycle(5), graphs.cycle(8), graphs.torus(3, 3), graphs.hypercube(3)])
def test_hitting_times_match_rational_solve(g):
    exact = np.array([float(v) for v in exact_hitting_times(g, 0)])
    assert np.allclose(C.hitting_times(C.walk_matrix(g), 0), exact, rtol=1e-12, atol=0)


@pytest.mark.parametrize("n", [3, 5, 8, 16])
def test_complete_graph_hitting_time(n):
    assert C.hitting_time_exact(C.walk_matrix(graphs.complete(n)), 0) == pytest.approx(n - 1, rel=1e-12)


@pytest.mark.parametrize("n", [5, 9, 12, 31])
def test_cycle_hitting_time_closed_forms(n):
    p = C.walk_matrix(graphs.cycle(n))
    # from distance k the hitting time is k (n - k)
    assert C.hitting_time_exact(p, 0) == pytest.approx(n * (n + 1) / 6, rel=1e-12)
    assert C.hitting_time_exact(p, 0, np.full(n, 1 / n)) == pytest.approx((n * n - 1) / 6, rel=1e-12)


def test_cycle5_uniform_start_example():
    p = C.walk_matrix(graphs.cycle(5))
    assert C.hitting_time_exact(p, 0, np.full(5, 0.2)) == pytest.approx(4.0, abs=1e-12)
    assert C.hitting_time_exact(p, 0) == pytest.approx(5.0, abs=1e-12)


@pytest.mark.parametrize("g", [graphs.cycle(16), graphs.torus(4, 4), graphs.hypercube(4), graphs.paley(17)])
def test_hitting_time_at_most_2n_squared(g):
    assert C.hitting_time_exact(C.walk_matrix(g), 0) <= 2 * g.n_vertices**2


def test_unreachable_mark_is_singular():
    p = np.eye(3)
    with pytest.raises(np.linalg.LinAlgError):
        C.hitting_times(p, 0)


@pytest.mark.parametrize("g,exact", [(graphs.complete(8), 7.0), (graphs.cycle(9), 15.0)])
def test_monte_carlo_within_three_sigma(g, exact):
    est = C.hitting_time_monte_carlo(C.walk_matrix(g), 0, n_trials=100_000, seed=3)
    assert est.truncated == 0
    assert abs(est.mean - exact) < 3 * est.stderr


def test_monte_carlo_reproducible_and_job_independent():
    p = C.walk_matrix(graphs.torus(3, 3))
    a = C.hitting_time_monte_carlo(p, 0, n_trials=20_000, seed=11)
    b = C.hitting_time_monte_carlo(p, 0, n_trials=20_000, seed=11, jobs=3)
    c = C.hitting_time_monte_carlo(p, 0, n_trials=20_000, seed=12)
    assert a == b
    assert a.mean != c.mean


def test_monte_carlo_truncation_reported():
    # a lazy chain that almost never moves cannot finish inside the cap
    p = np.array([[1.0, 0.0], [1e-9, 1 - 1e-9]])
    est = C.hitting_time_monte_carlo(p, 0, start=np.array([0.0, 1.0]), n_trials=50, seed=0)
    assert est.truncated == 50 and est.max_steps == 400
    with pytest.raises(ValueError):
        C.hitting_time_monte_carlo(p, 0, n_trials=0)
