import numpy as np
import pytest

from lackawalk import classical as C
from lackawalk import coined as Q
from lackawalk import graphs
from lackawalk import szegedy as Z
from lackawalk.graphs import MarkedInstance
from lackawalk.spectral import cotangent_qht_from_spectrum


def walks_for(g, m=0):
    return Z.InterpolatedWalks(MarkedInstance(g, m))


def full_space_U(m):
    """SWAP (2 Pi - I) assembled entry by entry from |x, M_x> = sum_y sqrt(M_xy) |x, y>."""
    n = m.shape[0]
    pi = np.zeros((n * n, n * n))
    for x in range(n):
        v = np.zeros(n * n)
        v[x * n:(x + 1) * n] = np.sqrt(m[x])
        pi += np.outer(v, v)
    swap = np.zeros((n * n, n * n))
    for x in range(n):
        for y in range(n):
            swap[y * n + x, x * n + y] = 1.0
    return swap @ (2 * pi - np.eye(n * n))


def random_edge_state(space, seed=0):
    rng = np.random.default_rng(seed)
    psi = rng.normal(size=space.size) + 1j * rng.normal(size=space.size)
    return psi / np.linalg.norm(psi)


def test_lift_example_and_isometry():
    g = graphs.cycle(4)
    space = Z.EdgeSpace(C.interpolated_matrix(C.walk_matrix(g), 0, 0.75))
    t0 = space.lift(np.eye(4)[0])
    assert t0[space.index(0, 0)] == pytest.approx(np.sqrt(0.75), abs=1e-16)
    t = space.T_matrix()
    assert np.max(np.abs(t.T @ t - np.eye(4))) < 1e-12
    v = np.random.default_rng(0).normal(size=4)
    assert np.allclose(space.lower(space.lift(v)), v, atol=1e-15)
    with pytest.raises(Z.SzegedyError):
        space.index(0, 2)


@pytest.mark.parametrize("g", [graphs.cycle(6), graphs.complete(5), graphs.torus(3, 3), graphs.hypercube(3),
                               graphs.johnson(5, 2), graphs.cycle(24)])
@pytest.mark.parametrize("hat", [False, True])
def test_reduced_step_matches_full_space(g, hat):
    w = walks_for(g)
    m = w.P_hat_s if hat else w.P_s
    space = w.space_hat if hat else w.space
    u_full = full_space_U(m)
    assert np.max(np.abs(u_full - Z.dense_full_U(m))) < 1e-15
    psi = random_edge_state(space, 1)
    ours = Z.embed_full(space, space.step(psi))
    assert np.max(np.abs(ours - u_full @ Z.embed_full(space, psi))) < 1e-12
    assert np.max(np.abs(space.step(psi) - space.dense_U() @ psi)) < 1e-12


def test_unitarity_over_long_run():
    w = walks_for(graphs.cycle(64))
    for space, psi in ((w.space, w.init_ip()), (w.space_hat, w.init_ip_hat())):
        worst = 0.0
        for _ in range(10_000):
            psi = space.step(psi)
            worst = max(worst, abs(np.linalg.norm(psi) - 1.0))
        assert worst < 1e-12


def test_reflection_fixes_neighbourhood_states():
    w = walks_for(graphs.torus(3, 3))
    space = w.space
    for x in range(9):
        a = space.lift(np.eye(9)[x])
        assert np.max(np.abs(space.apply_reflection(a) - a)) < 1e-15
        assert np.max(np.abs(space.step(a) - space.apply_swap(a))) < 1e-15


def test_step_rejects_wrong_shape():
    with pytest.raises(Z.SzegedyError):
        walks_for(graphs.cycle(5)).space.step(np.zeros(3))


@pytest.mark.parametrize("g", [graphs.cycle(8), graphs.complete(6), graphs.hypercube(3), graphs.torus(4, 4),
                               graphs.complete_bipartite(3)])
def test_eigenpairs(g):
    w = walks_for(g)
    for spec, space in ((w.spectrum(), w.space), (w.spectrum_hat(), w.space_hat)):
        pairs = Z.lift_eigenpairs(spec, space)
        u = space.dense_U()
        by_k = {}
        for p in pairs:
            assert np.max(np.abs(u @ p.vector - p.eigenvalue * p.vector)) < 1e-10
            assert np.linalg.norm(p.vector) == pytest.approx(1.0, abs=1e-12)
            by_k.setdefault(p.k, []).append(p)
        for k, group in by_k.items():
            a = space.lift(spec.eigenvectors[:, k])
            if len(group) == 2:
                plus, minus = sorted(group, key=lambda p: -p.sign)
                assert abs(np.vdot(plus.vector, minus.vector)) < 1e-10
                assert np.max(np.abs((plus.vector + minus.vector) / np.sqrt(2) - a)) < 1e-10
        unit = [p for p in pairs if p.sign == 0]
        assert len(unit) == 1


def test_complete2_against_full_operator():
    w = walks_for(graphs.complete(2))
    u = Z.dense_full_U(w.P_s)
    vals, vecs = np.linalg.eig(u)
    init = Z.embed_full(w.space, w.init_ip())
    overlaps = np.abs(np.linalg.solve(vecs, init)) ** 2
    theta = np.angle(vals)
    keep = np.abs(theta) > 1e-8
    brute = np.sqrt(np.sum(overlaps[keep] / np.tan(theta[keep] / 2) ** 2))
    assert cotangent_qht_from_spectrum(w.spectrum(), w.pibar) == pytest.approx(brute, abs=1e-9)


@pytest.mark.parametrize("g", [graphs.cycle(8), graphs.cycle(32), graphs.torus(5, 5), graphs.hypercube(4),
                               graphs.complete(16), graphs.johnson(6, 3), graphs.paley(29), graphs.cycle(64)])
def test_cotangent_direct_matches_spectral(g):
    w = walks_for(g)
    for spec, space, init in ((w.spectrum(), w.space, w.init_ip()),
                              (w.spectrum_hat(), w.space_hat, w.init_ip_hat())):
        direct = Z.cotangent_qht_direct(Z.lift_eigenpairs(spec, space), init)
        assert abs(direct - cotangent_qht_from_spectrum(spec, w.pibar)) < 1e-9


def test_cotangent_direct_zero_on_unit_vector():
    w = walks_for(graphs.cycle(8))
    pairs = Z.lift_eigenpairs(w.spectrum(), w.space)
    unit = next(p for p in pairs if p.sign == 0)
    assert Z.cotangent_qht_direct(pairs, unit.vector) < 1e-12


def test_spectral_evolution_matches_stepping():
    w = walks_for(graphs.cycle(16))
    pairs = Z.lift_eigenpairs(w.spectrum(), w.space)
    psi = w.init_ip()
    for _ in range(100):
        psi = w.space.step(psi)
    assert np.max(np.abs(Z.evolve_spectral(pairs, w.init_ip(), 100) - psi)) < 1e-9


def test_isometry_E_basis_images(lat_instance):
    inst = lat_instance
    w = Z.InterpolatedWalks(inst)
    cfg = w.coin_config
    c = cfg.coin(inst.graph)
    cp = Q.coin_perp(inst.d, cfg.resolve(inst.graph))
    for u in range(inst.n):
        img = Z.isometry_E(w.space_hat.lift(np.eye(inst.n)[u]), w.space_hat, inst)
        expect = np.zeros((inst.n, inst.d + 1))
        expect[u] = cp if u == inst.marked else c
        assert np.max(np.abs(img - expect)) < 1e-14


def test_isometry_E_contracts(lat_instance):
    inst = lat_instance
    w = Z.InterpolatedWalks(inst)
    sp = w.space_hat
    e = np.column_stack([Z.isometry_E(np.eye(sp.size)[k], sp, inst).ravel() for k in range(sp.size)])
    assert np.max(np.abs(e.T @ e - np.eye(sp.size))) < 1e-15
    s_coin = Q.dense_shift(inst.graph)
    swap = np.eye(sp.size)[sp.swap]
    assert np.max(np.abs(e @ swap @ e.T - s_coin)) < 1e-12
    psi = np.random.default_rng(3).normal(size=(inst.n, inst.d + 1))
    assert np.allclose(Z.isometry_E(Z.isometry_E_adjoint(psi, sp, inst), sp, inst), psi, atol=1e-15)


def test_conjugation_on_random_states(lat_instance):
    inst = lat_instance
    w = Z.InterpolatedWalks(inst)
    rng = np.random.default_rng(4)
    for _ in range(10):
        psi = rng.normal(size=(inst.n, inst.d + 1)) + 1j * rng.normal(size=(inst.n, inst.d + 1))
        psi /= np.linalg.norm(psi)
        lhs = Q.step_Lhat(psi, inst, w.coin_config)
        rhs = Z.isometry_E(w.space_hat.step(Z.isometry_E_adjoint(psi, w.space_hat, inst)), w.space_hat, inst)
        assert np.linalg.norm(lhs - rhs) < 1e-12


def test_E_maps_initial_states():
    inst = MarkedInstance(graphs.torus(4, 4), 0)
    w = Z.InterpolatedWalks(inst)
    e_init = Z.isometry_E(w.init_ip_hat(), w.space_hat, inst)
    assert np.max(np.abs(e_init - Q.initial_state_lazy(inst, w.coin_config))) < 1e-15


def test_E_rejects_non_arc_pairs():
    inst = MarkedInstance(graphs.cycle(6), 0)
    space = Z.EdgeSpace(C.walk_matrix(graphs.complete(6)))
    with pytest.raises(Z.SzegedyError):
        Z.coin_embedding(space, inst)


@pytest.mark.parametrize("g", [graphs.cycle(8), graphs.torus(3, 3), graphs.hypercube(3), graphs.complete(6)])
def test_frame_isometries(g):
    w = walks_for(g)
    f = Z.FrameIsometries(w)
    r2 = f.r2
    assert np.max(np.abs(r2 @ r2 - r2)) < 1e-12
    assert np.max(np.abs(r2 - r2.T)) < 1e-12
    # R1 carries each eigenvector of U(P(s)) to the matching one of U(P-hat(s))
    pairs = Z.lift_eigenpairs(w.spectrum(), w.space)
    hat = {(p.k, p.sign): p for p in Z.lift_eigenpairs(w.spectrum(), w.space_hat)}
    for p in pairs:
        out, truncated = f.apply_r1(p.vector)
        assert truncated < 1e-12
        assert np.max(np.abs(out - hat[(p.k, p.sign)].vector)) < 1e-9
    # R2 leaves the evolving state alone
    psi = w.init_ip()
    for _ in range(int(2 * np.sqrt(w.hitting_time()))):
        assert np.max(np.abs(f.apply_r2(psi) - psi)) < 1e-10
        psi = w.space.step(psi)


def test_r1_reports_truncation():
    w = walks_for(graphs.cycle(8))
    f = Z.FrameIsometries(w)
    psi = random_edge_state(w.space, 9)
    _, truncated = f.apply_r1(psi)
    expected = 1.0 - np.linalg.norm(f.apply_r2(psi)) ** 2
    assert truncated == pytest.approx(expected, abs=1e-12)


def test_state_level_embedding_gap_decays():
    # || R1 U^t w - U^t w || restricted to the evolving state shrinks like N^(-1/2)
    scaled = []
    for n in (8, 16, 32, 64):
        w = walks_for(graphs.cycle(n))
        f = Z.FrameIsometries(w)
        psi = w.init_ip()
        worst = 0.0
        for _ in range(int(np.sqrt(w.hitting_time())) + 1):
            out, _ = f.apply_r1(psi)
            worst = max(worst, np.linalg.norm(out - f.embedding @ psi))
            psi = w.space.step(psi)
        scaled.append(worst * np.sqrt(n))
    assert max(scaled) < 1.5 and max(scaled) / min(scaled) < 1.5


@pytest.mark.xfail(strict=True, reason="operator norm of R1 - R2 grows with N on cycles (1.04 to 1.27 for N = 8..64); "
                                       "see the decisions ledger")
def test_operator_distance_decreases_with_n():
    dists = [Z.FrameIsometries(walks_for(graphs.cycle(n))).operator_distance() for n in (8, 16, 32, 64)]
    assert all(b < a for a, b in zip(dists, dists[1:]))


def test_distance_at_t0_closed_form():
    for g in (graphs.cycle(16), graphs.torus(4, 4), graphs.complete(8)):
        w = walks_for(g)
        n = g.n_vertices
        d0 = Z.theorem2_distance(w, 0)
        assert d0.d_exact < 1e-15
        assert d0.d_embed == pytest.approx(np.sqrt(2 - 2 * np.sqrt(n / (n + 1))), abs=1e-14)


def test_exact_distance_vanishes(lat_instance):
    w = Z.InterpolatedWalks(lat_instance)
    dists = Z.theorem2_distances(w, int(2 * np.sqrt(w.hitting_time())))
    assert max(d.d_exact for d in dists) < 1e-9
    assert all(d.d_total == d.d_exact + d.d_embed for d in dists)
