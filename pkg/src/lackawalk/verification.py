"""Numerical checks of the lackadaisical / interpolated walk correspondence.

Each ``check_*`` function returns a :class:`ClaimReport` whose ``passed``
flag is exactly ``residual <= tolerance``.  ``hypothesis_met`` records
whether the graph is locally arc-transitive with ell = d/N; checks still run
when it is not, so violations can be inspected.
"""

from __future__ import annotations

import math
import time
from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence

import numpy as np
import scipy.linalg

from .coined import CoinConfig, Walker, dense_walk, initial_state_lazy, step_Lhat, success_probability
from .graphs import MarkedInstance, UndecidableError, is_locally_arc_transitive, marked_arc_spread
from .spectral import cotangent_qht_from_spectrum, eigenvalue_map_residual, interpolated_hitting_time, \
    shared_eigenvector_residual
from .szegedy import InterpolatedWalks, isometry_E, isometry_E_adjoint, theorem2_distances

TOL_IDENTITY = 1e-9
TOL_EIGEN_MAP = 1e-10
TOL_CONJUGATION = 1e-11
TOL_INVARIANCE = 1e-12
TOL_BOUND = 1e-12
THM2_SLOPE = -0.20
DENSE_LIMIT = 2048


@dataclass
class ClaimReport:
    claim: str
    instance: str
    residual: float
    tolerance: float
    hypothesis_met: Optional[bool]
    values: dict = field(default_factory=dict)
    runtime: float = 0.0
    notes: str = ""

    @property
    def passed(self) -> bool:
        return bool(np.isfinite(self.residual) and self.residual <= self.tolerance)

    def to_dict(self) -> dict:
        out = asdict(self)
        out["passed"] = self.passed
        return out

    def line(self) -> str:
        flag = "PASS" if self.passed else "FAIL"
        hyp = "" if self.hypothesis_met else " [hypothesis unmet]"
        return f"{flag} {self.claim:<10} {self.instance:<28} residual={self.residual:.3e} tol={self.tolerance:.1e}{hyp}"


def hypothesis(inst: MarkedInstance, cfg: CoinConfig = CoinConfig()) -> Optional[bool]:
    """Locally arc-transitive and ell = d/N; ``None`` when transitivity is undecidable."""
    g = inst.graph
    if not math.isclose(cfg.resolve(g), g.degree / g.n_vertices, rel_tol=0, abs_tol=1e-15):
        return False
    try:
        return is_locally_arc_transitive(g)
    except UndecidableError:
        return None


def _report(claim, inst, residual, tol, cfg, start, values, notes=""):
    met = hypothesis(inst, cfg)
    if met is not True and not notes:
        notes = "hypothesis unmet" if met is False else "transitivity undecided"
    return ClaimReport(claim, inst.describe(), float(residual), tol, met, values, time.perf_counter() - start, notes)


def default_horizon(ht: float, c: float = 2.0) -> int:
    return int(math.floor(c * math.sqrt(ht)))


def cotangent_qht_unitary(u: np.ndarray, w: np.ndarray, unit_tol: float = 1e-7) -> float:
    """Cotangent quantum hitting time from a dense unitary via its complex Schur form.

    For a normal matrix the Schur form is diagonal and the Schur vectors are
    an orthonormal eigenbasis, so degenerate eigenvalues are handled safely.
    """
    tri, z = scipy.linalg.schur(np.asarray(u, dtype=np.complex128), output="complex")
    theta = np.angle(np.diag(tri))
    overlaps = np.abs(z.conj().T @ np.asarray(w, dtype=np.complex128).ravel()) ** 2
    keep = np.abs(theta) > unit_tol
    return float(np.sqrt(np.sum(overlaps[keep] / np.tan(theta[keep] / 2.0) ** 2)))


def check_theorem1(inst: MarkedInstance, cfg: CoinConfig = CoinConfig(), dense_limit: int = DENSE_LIMIT) -> ClaimReport:
    """C(L, init_lazy)^2 = (N+1)/N C(U, init_ip)^2 + 1/(2N-1).

    The left side is computed twice: from the dense walk matrix of L (when it
    fits under ``dense_limit``) and through the discriminant of P-hat(s); the
    residual is the worse of the two against the right side.
    """
    start = time.perf_counter()
    walks = InterpolatedWalks(inst, cfg.ell)
    n = inst.n
    c_u = cotangent_qht_from_spectrum(walks.spectrum(), walks.pibar)
    c_hat = cotangent_qht_from_spectrum(walks.spectrum_hat(), walks.pibar)
    rhs = (n + 1) / n * c_u**2 + 1.0 / (2 * n - 1)
    values = {"C_U_sq": c_u**2, "C_L_sq_spectral": c_hat**2, "rhs": rhs}
    residual = abs(c_hat**2 - rhs)
    if n * (inst.d + 1) <= dense_limit:
        lhs = cotangent_qht_unitary(dense_walk(inst, walks.coin_config), initial_state_lazy(inst, walks.coin_config))
        values["C_L_sq_dense"] = lhs**2
        residual = max(residual, abs(lhs**2 - rhs))
    return _report("thm1", inst, residual, TOL_IDENTITY, walks.coin_config, start, values)


def check_lemma3(inst: MarkedInstance, cfg: CoinConfig = CoinConfig()) -> ClaimReport:
    """D(P(s)) and D(P-hat(s)) share eigenspaces, lam-hat = (N lam + 1)/(N + 1),
    and the squared cotangent hitting times are related with p_M = 1/N.

    The interpolated hitting-time identity ``C^2 = 2 HT(s) - p_M / (1 - s(1 - p_M))``
    and the scaling of HT(s) are recorded in ``values`` but not gated on.
    """
    start = time.perf_counter()
    walks = InterpolatedWalks(inst, cfg.ell)
    n = inst.n
    spec, spec_hat = walks.spectrum(), walks.spectrum_hat()
    eig_map = eigenvalue_map_residual(spec, spec_hat, n)
    shared = shared_eigenvector_residual(spec, np.sqrt(walks.P_hat_s * walks.P_hat_s.T))
    ht_s = interpolated_hitting_time(spec, walks.pibar)
    ht_hat = interpolated_hitting_time(spec_hat, walks.pibar)
    c_u = cotangent_qht_from_spectrum(spec, walks.pibar)
    c_hat = cotangent_qht_from_spectrum(spec_hat, walks.pibar)
    p_m = 1.0 / n
    values = {
        "eigenvalue_map_residual": eig_map,
        "shared_eigenvector_residual": shared,
        "HT_s": ht_s,
        "HT_s_hat": ht_hat,
        "HT_scaling_residual": abs(ht_hat - (n + 1) / n * ht_s),
        "qht_relation_residual": abs(c_u**2 - (2 * ht_s - p_m / (1 - walks.s * (1 - p_m)))),
        "lemma3_identity_residual": abs(c_hat**2 - ((n + 1) / n * c_u**2 + 1.0 / (2 * n - 1))),
    }
    residual = max(eig_map, shared, values["lemma3_identity_residual"])
    return _report("lem3", inst, residual, TOL_EIGEN_MAP, walks.coin_config, start, values)


def check_lemma1(inst: MarkedInstance, cfg: CoinConfig = CoinConfig(), t_max: Optional[int] = None) -> ClaimReport:
    """max_t || L^t init - L-hat^t init ||."""
    start = time.perf_counter()
    walks = InterpolatedWalks(inst, cfg.ell)
    if t_max is None:
        t_max = default_horizon(walks.hitting_time())
    a = Walker(inst, walks.coin_config, "G")
    b = Walker(inst, walks.coin_config, "Ghat")
    worst = spread = 0.0
    for t in range(t_max + 1):
        if t:
            a.step()
            b.step()
        worst = max(worst, float(np.linalg.norm(a.state - b.state)))
        spread = max(spread, marked_arc_spread(a.state, inst))
    values = {"t_max": t_max, "max_distance": worst, "max_marked_arc_spread": spread}
    return _report("lem1", inst, worst, TOL_IDENTITY, walks.coin_config, start, values)


def check_invariance(inst: MarkedInstance, cfg: CoinConfig = CoinConfig(), t_max: Optional[int] = None) -> ClaimReport:
    """Equal amplitudes on the outgoing arcs of the marked vertex along L^t init."""
    start = time.perf_counter()
    cfg = CoinConfig(cfg.resolve(inst.graph))
    if t_max is None:
        from .classical import hitting_time_exact, walk_matrix
        t_max = default_horizon(hitting_time_exact(walk_matrix(inst.graph), inst.marked))
    spreads = []
    for t, psi in Walker(inst, cfg, "G"):
        spreads.append(marked_arc_spread(psi, inst))
        if t >= t_max:
            break
    spreads = np.array(spreads)
    values = {"t_max": t_max, "max_spread": float(spreads.max()), "argmax_t": int(spreads.argmax()),
              "spread_profile": spreads.tolist()}
    return _report("lem_invar", inst, spreads.max(), TOL_INVARIANCE, cfg, start, values)


def check_lemma2(inst: MarkedInstance, cfg: CoinConfig = CoinConfig(), n_random: int = 50, seed: int = 0) -> ClaimReport:
    """L-hat = E U(P-hat(s)) E^dagger on random coin states."""
    start = time.perf_counter()
    walks = InterpolatedWalks(inst, cfg.ell)
    rng = np.random.default_rng(seed)
    shape = (inst.n, inst.d + 1)
    worst = 0.0
    for _ in range(n_random):
        psi = rng.normal(size=shape) + 1j * rng.normal(size=shape)
        psi /= np.linalg.norm(psi)
        lhs = step_Lhat(psi, inst, walks.coin_config)
        rhs = isometry_E(walks.space_hat.step(isometry_E_adjoint(psi, walks.space_hat, inst)), walks.space_hat, inst)
        worst = max(worst, float(np.linalg.norm(lhs - rhs)))
    values = {"n_random": n_random, "seed": seed, "max_residual": worst}
    return _report("lem2", inst, worst, TOL_CONJUGATION, walks.coin_config, start, values)


def check_theorem2(instances: Sequence[MarkedInstance], cfg: CoinConfig = CoinConfig(), c: float = 1.0) -> ClaimReport:
    """Decay of max_{t <= floor(c sqrt(HT))} of ``theorem2_distance`` with N.

    The residual is the least-squares slope of log(distance) against log(N);
    it passes at or below -0.20.
    """
    start = time.perf_counter()
    rows = []
    for inst in instances:
        walks = InterpolatedWalks(inst, cfg.ell)
        ht = walks.hitting_time()
        t0 = default_horizon(ht, c)
        dists = theorem2_distances(walks, t0)
        rows.append({
            "instance": inst.describe(), "N": inst.n, "HT": ht, "T0": t0,
            "max_d_exact": max(d.d_exact for d in dists),
            "max_d_embed": max(d.d_embed for d in dists),
            "max_d_total": max(d.d_total for d in dists),
        })
    ns = np.array([r["N"] for r in rows], dtype=float)
    ds = np.array([r["max_d_total"] for r in rows])
    if len(rows) >= 2 and np.all(np.isfinite(ds)) and np.all(ds > 0):
        slope = float(np.polyfit(np.log(ns), np.log(ds), 1)[0])
    else:
        slope = float("nan")
    met_flags = [hypothesis(inst, cfg) for inst in instances]
    met = True if all(f is True for f in met_flags) else (False if any(f is False for f in met_flags) else None)
    desc = "; ".join(inst.describe() for inst in instances)
    return ClaimReport("thm2", desc, slope, THM2_SLOPE, met, {"c": c, "slope": slope, "instances": rows},
                       time.perf_counter() - start, "" if met else "hypothesis unmet on some instance")


def threshold_angle(n: int, ht: float) -> float:
    """theta_0 with cos(theta_0) = 1 - 2 sqrt((N - 1) / (16 HT))."""
    return float(np.arccos(1.0 - 2.0 * np.sqrt((n - 1) / (16.0 * ht))))


@dataclass(frozen=True)
class PartialSums:
    t: int
    small: float
    small_bound: float
    large: float
    large_bound: float


def fact_partial_sums(walks: InterpolatedWalks, t_samples: Sequence[int]) -> list:
    """Norms of the small- and large-angle parts of the eigen-expansion of
    R1 U(P(s))^t init_ip - U(P-hat(s))^t init_ip-hat, per eigenspace.

    The hatted angle of an eigenspace is read off the Rayleigh quotient of
    D(P-hat(s)) on that eigenspace, not from the eigenvalue map.
    """
    n = walks.inst.n
    spec = walks.spectrum()
    d_hat = np.sqrt(walks.P_hat_s * walks.P_hat_s.T)
    v = np.sqrt(walks.pibar)
    theta0 = threshold_angle(n, walks.hitting_time())
    theta, theta_hat, weight = [], [], []
    for g, (a, b) in enumerate(spec.groups):
        if g == spec.unit_group:
            continue
        basis = spec.basis(g)
        lam = spec.eigenvalues[a:b].mean()
        lam_hat = np.trace(basis.T @ d_hat @ basis) / (b - a)
        theta.append(np.arccos(np.clip(lam, -1, 1)))
        theta_hat.append(np.arccos(np.clip(lam_hat, -1, 1)))
        weight.append(np.sum((basis.T @ v) ** 2))
    theta, theta_hat, weight = map(np.array, (theta, theta_hat, weight))
    small = theta <= theta0
    out = []
    for t in t_samples:
        term = weight * 4.0 * np.sin(t * (theta - theta_hat) / 2.0) ** 2
        out.append(PartialSums(
            int(t),
            float(np.sqrt(term[small].sum())),
            float(8.0 * t / (n - 1) * np.sin(theta0 / 2.0)),
            float(np.sqrt(term[~small].sum())),
            float(2.0 / np.sqrt((1.0 - np.cos(theta0)) * (n - 1))),
        ))
    return out


def check_facts(inst: MarkedInstance, cfg: CoinConfig = CoinConfig(), t_samples: Optional[Sequence[int]] = None) -> ClaimReport:
    """Small-angle and large-angle partial-sum bounds at sampled t."""
    start = time.perf_counter()
    walks = InterpolatedWalks(inst, cfg.ell)
    ht = walks.hitting_time()
    if t_samples is None:
        r = math.sqrt(ht)
        t_samples = sorted({0, int(r / 2), int(r), int(2 * r)})
    sums = fact_partial_sums(walks, t_samples)
    residual = max(max(p.small - p.small_bound, p.large - p.large_bound) for p in sums)
    values = {"theta0": threshold_angle(inst.n, ht), "HT": ht, "samples": [asdict(p) for p in sums]}
    return _report("facts", inst, residual, TOL_BOUND, walks.coin_config, start, values)


@dataclass
class SearchCurve:
    probabilities: np.ndarray
    hitting_time: float

    @property
    def t_max(self) -> int:
        return len(self.probabilities) - 1

    @property
    def argmax(self) -> int:
        return int(np.argmax(self.probabilities))

    @property
    def max(self) -> float:
        return float(np.max(self.probabilities))

    def first_reaching(self, level: float = 0.5) -> Optional[int]:
        hits = np.flatnonzero(self.probabilities >= level)
        return int(hits[0]) if hits.size else None

    def summary(self) -> dict:
        return {"t_max": self.t_max, "argmax": self.argmax, "max": self.max,
                "first_t_half": self.first_reaching(0.5), "HT": self.hitting_time}


def search_experiment(inst: MarkedInstance, cfg: CoinConfig = CoinConfig(), t_max: Optional[int] = None) -> SearchCurve:
    """Success probability of L^t|init_lazy> for t = 0..t_max (default ceil(2 sqrt(HT)))."""
    from .classical import hitting_time_exact, walk_matrix
    ht = hitting_time_exact(walk_matrix(inst.graph), inst.marked)
    if t_max is None:
        t_max = int(math.ceil(2.0 * math.sqrt(ht)))
    probs = []
    for t, psi in Walker(inst, cfg, "G"):
        probs.append(success_probability(psi, inst))
        if t >= t_max:
            break
    return SearchCurve(np.array(probs), ht)


SINGLE_INSTANCE_CLAIMS = {
    "thm1": check_theorem1,
    "lem1": check_lemma1,
    "lem2": check_lemma2,
    "lem3": check_lemma3,
    "lem_invar": check_invariance,
    "facts": check_facts,
}
