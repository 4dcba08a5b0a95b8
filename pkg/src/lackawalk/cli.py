"""Command-line experiment runner.

Subcommands: simulate, verify, spectrum, sweep, hitting-time, distances.
Settings come from flags, then a flat ``key = value`` config file
(``--config``), then built-in defaults, in that order of precedence.
"""

from __future__ import annotations

import argparse
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import export
from .classical import hitting_time_exact, hitting_time_monte_carlo, lazy_interpolated_matrix, walk_matrix
from .coined import CoinConfig, trajectory
from .graphs import FAMILIES, GraphError, GraphFamilySpec, MarkedInstance, build_graph, family_parameters
from .spectral import SpectralError, cotangent_qht_from_spectrum, interpolated_hitting_time, overlap_decomposition
from .szegedy import InterpolatedWalks, SzegedyError, lift_eigenpairs, theorem2_distances
from .verification import SINGLE_INSTANCE_CLAIMS, check_theorem2, default_horizon, search_experiment

ALL_CLAIMS = tuple(SINGLE_INSTANCE_CLAIMS) + ("thm2",)
PARAM_KEYS = ("n", "k", "rows", "cols", "dim", "q")
INT_KEYS = PARAM_KEYS + ("mark", "t_max", "jobs", "seed", "trials", "stride")
FLOAT_KEYS = ("ell", "s", "c")


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    family: Optional[str] = None
    params: dict = field(default_factory=dict)
    mark: int = 0
    ell: Optional[float] = None
    s: Optional[float] = None
    t_max: Optional[int] = None
    c: float = 1.0
    jobs: int = 1
    seed: int = 0
    trials: int = 100_000
    stride: int = 1
    out: Optional[str] = None
    claims: Optional[tuple] = None  # None: every claim that applies
    sizes: tuple = ()

    def graph_spec(self, params: Optional[dict] = None) -> GraphFamilySpec:
        if self.family is None:
            raise ConfigError("--family is required")
        params = dict(self.params if params is None else params)
        return GraphFamilySpec(self.family, {k: params.get(k) for k in family_parameters(self.family)})

    def instance(self, params: Optional[dict] = None) -> MarkedInstance:
        g = build_graph(self.graph_spec(params))
        return MarkedInstance(g, self.mark)

    def resolved(self, inst: MarkedInstance):
        """``(ell, s)`` with the defaults ell = d/N and s = 1 - ell/d."""
        ell = inst.d / inst.n if self.ell is None else self.ell
        s = 1.0 - ell / inst.d if self.s is None else self.s
        return ell, s

    def sized(self, size: int) -> dict:
        """Family parameters for one entry of ``sizes``."""
        names = family_parameters(self.family)
        params = dict(self.params)
        if self.family == "torus":
            params.update(rows=size, cols=size)
        elif self.family == "edges":
            raise ConfigError("--sizes does not apply to the edges family")
        else:
            params[names[0]] = size
        return params


def read_config_file(path: str) -> dict:
    """Parse ``key = value`` lines; ``#`` starts a comment, dashes in keys become underscores."""
    out = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected key = value")
            key, value = (p.strip() for p in line.split("=", 1))
            out[key.replace("-", "_")] = value
    return out


def _coerce(key: str, value):
    if value is None:
        return None
    try:
        if key in INT_KEYS:
            return int(value)
        if key in FLOAT_KEYS:
            return float(value)
    except (TypeError, ValueError):
        raise ConfigError(f"invalid value for {key}: {value!r}") from None
    if key == "claims":
        items = value if isinstance(value, (list, tuple)) else str(value).split(",")
        claims = tuple(c.strip() for c in items if c.strip())
        bad = [c for c in claims if c not in ALL_CLAIMS]
        if bad:
            raise ConfigError(f"unknown claim(s) {bad}; choose from {', '.join(ALL_CLAIMS)}")
        return claims
    if key == "sizes":
        items = value if isinstance(value, (list, tuple)) else str(value).split(",")
        try:
            return tuple(int(v) for v in items if str(v).strip())
        except ValueError:
            raise ConfigError(f"invalid sizes: {value!r}") from None
    return value


def build_config(flags: dict, file_values: Optional[dict] = None, env=os.environ) -> ExperimentConfig:
    """Merge flags over config-file values over defaults."""
    merged: dict = {}
    if "LACKAWALK_JOBS" in env:
        merged["jobs"] = env["LACKAWALK_JOBS"]
    merged.update(file_values or {})
    merged.update({k: v for k, v in flags.items() if v is not None})
    known = {f for f in ExperimentConfig.__dataclass_fields__ if f != "params"} | set(PARAM_KEYS) | {"path"}
    unknown = sorted(set(merged) - known)
    if unknown:
        raise ConfigError(f"unknown setting(s): {', '.join(unknown)}")
    cfg = ExperimentConfig()
    params = {}
    for key, value in merged.items():
        value = _coerce(key, value)
        if key in PARAM_KEYS or key == "path":
            params[key] = value
        else:
            setattr(cfg, key, value)
    cfg.params = params
    if cfg.jobs < 1:
        raise ConfigError("jobs must be >= 1")
    if cfg.family is not None and cfg.family not in FAMILIES:
        raise ConfigError(f"unknown family {cfg.family!r}; choose from {', '.join(FAMILIES)}")
    return cfg


# ---------------------------------------------------------------------------
# commands


def _emit(text: str, out: Optional[str]) -> None:
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        with open(out, "w", newline="") as fh:
            fh.write(text)


def _info(msg: str) -> None:
    print(msg, file=sys.stderr)


def cmd_simulate(cfg: ExperimentConfig) -> int:
    inst = cfg.instance()
    ell, _ = cfg.resolved(inst)
    if cfg.s is not None:
        _info("note: --s has no effect on the coined walk; ell alone sets the coin")
    curve = search_experiment(inst, CoinConfig(ell), cfg.t_max)
    rows = trajectory(inst, curve.t_max, CoinConfig(ell))
    _emit(export.trajectory_csv(rows, cfg.stride), cfg.out)
    summ = curve.summary()
    _info(f"{inst.describe()}: HT={summ['HT']:.6g} max success_prob={summ['max']:.6g} "
          f"at t={summ['argmax']} (first t >= 0.5: {summ['first_t_half']})")
    return 0


def _run_claim(args):
    claim, cfg, params = args
    inst = cfg.instance(params)
    fn = SINGLE_INSTANCE_CLAIMS[claim]
    coin = CoinConfig(cfg.ell)
    if claim == "lem1" or claim == "lem_invar":
        return fn(inst, coin, cfg.t_max)
    if claim == "lem2":
        return fn(inst, coin, seed=cfg.seed)
    return fn(inst, coin)


def _map(fn, tasks, jobs: int) -> list:
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(min(jobs, len(tasks))) as pool:
            return list(pool.map(fn, tasks))
    return [fn(t) for t in tasks]


def cmd_verify(cfg: ExperimentConfig) -> int:
    if cfg.s is not None:
        _info("note: the claim checks fix s = 1 - ell/d; --s is ignored")
    param_sets = [cfg.sized(n) for n in cfg.sizes] if cfg.sizes else [cfg.params]
    claims = cfg.claims
    if claims is None:
        claims = ALL_CLAIMS if len(param_sets) >= 2 else tuple(SINGLE_INSTANCE_CLAIMS)
    tasks = [(c, cfg, p) for p in param_sets for c in claims if c != "thm2"]
    reports = _map(_run_claim, tasks, cfg.jobs)
    if "thm2" in claims:
        if len(param_sets) < 2:
            raise ConfigError("thm2 needs at least two sizes (--sizes)")
        insts = [cfg.instance(p) for p in param_sets]
        reports.append(check_theorem2(insts, CoinConfig(cfg.ell), cfg.c))
    _emit(export.reports_json(reports), cfg.out)
    for r in reports:
        _info(r.line())
    failed = [r for r in reports if r.hypothesis_met is True and not r.passed]
    return 1 if failed else 0


def spectrum_summary(walks: InterpolatedWalks, hat: bool) -> dict:
    spec = walks.spectrum_hat() if hat else walks.spectrum()
    dec = overlap_decomposition(spec, walks.pibar)
    groups = []
    for g, (a, b) in enumerate(spec.groups):
        lam = float(dec.group_values[g])
        groups.append({
            "eigenvalue": lam,
            "theta": float(np.arccos(np.clip(lam, -1.0, 1.0))),
            "multiplicity": b - a,
            "overlap_sq": float(dec.group_overlaps[g]),
        })
    space = walks.space_hat if hat else walks.space
    w = walks.init_ip_hat() if hat else walks.init_ip()
    return {
        "eigenvalues": spec.eigenvalues,
        "theta": spec.angles,
        "eigenspaces": groups,
        "HT_s": interpolated_hitting_time(spec, walks.pibar),
        "cot_qht": cotangent_qht_from_spectrum(spec, walks.pibar),
        "eigenpairs": export.eigenpairs_json(lift_eigenpairs(spec, space), w),
    }


def cmd_spectrum(cfg: ExperimentConfig) -> int:
    inst = cfg.instance()
    ell, s = cfg.resolved(inst)
    walks = InterpolatedWalks(inst, ell, s)
    doc = {
        "instance": inst.describe(), "N": inst.n, "d": inst.d, "marked": inst.marked,
        "ell": ell, "s": s, "HT": walks.hitting_time(),
        "P_s": spectrum_summary(walks, hat=False),
        "P_hat_s": spectrum_summary(walks, hat=True),
    }
    _emit(export.to_json(doc), cfg.out)
    return 0


def sweep_row(args) -> dict:
    cfg, params = args
    inst = cfg.instance(params)
    ell, s = cfg.resolved(inst)
    walks = InterpolatedWalks(inst, ell, s)
    ht = walks.hitting_time()
    curve = search_experiment(inst, CoinConfig(ell))
    dists = theorem2_distances(walks, default_horizon(ht, cfg.c))
    return {
        "N": inst.n, "HT": ht,
        "cot_qht": cotangent_qht_from_spectrum(walks.spectrum(), walks.pibar),
        "max_success_prob": curve.max,
        "thm2_distance_max": max(d.d_total for d in dists),
    }


def cmd_sweep(cfg: ExperimentConfig) -> int:
    if not cfg.sizes:
        raise ConfigError("sweep needs --sizes")
    rows = _map(sweep_row, [(cfg, cfg.sized(n)) for n in cfg.sizes], cfg.jobs)
    _emit(export.sweep_csv(rows), cfg.out)
    if len(rows) >= 2:
        ns = np.log([r["N"] for r in rows])
        ds = np.log([r["thm2_distance_max"] for r in rows])
        _info(f"log-log slope of thm2_distance_max vs N: {np.polyfit(ns, ds, 1)[0]:.4f}")
    return 0


def cmd_hitting_time(cfg: ExperimentConfig) -> int:
    inst = cfg.instance()
    ell, s = cfg.resolved(inst)
    p = walk_matrix(inst.graph)
    walks = InterpolatedWalks(inst, ell, s)
    doc = {
        "instance": inst.describe(), "N": inst.n, "marked": inst.marked,
        "HT": hitting_time_exact(p, inst.marked),
        "HT_lazy": hitting_time_exact(lazy_interpolated_matrix(inst.graph, inst.marked, ell, 0.0), inst.marked),
        "HT_s": interpolated_hitting_time(walks.spectrum(), walks.pibar),
        "ell": ell, "s": s,
    }
    if cfg.trials > 0:
        est = hitting_time_monte_carlo(p, inst.marked, n_trials=cfg.trials, seed=cfg.seed, jobs=cfg.jobs)
        doc["monte_carlo"] = {"mean": est.mean, "stderr": est.stderr, "n_trials": est.n_trials,
                              "truncated": est.truncated, "seed": cfg.seed}
    _emit(export.to_json(doc), cfg.out)
    return 0


def cmd_distances(cfg: ExperimentConfig) -> int:
    inst = cfg.instance()
    ell, s = cfg.resolved(inst)
    walks = InterpolatedWalks(inst, ell, s)
    t_max = default_horizon(walks.hitting_time(), cfg.c) if cfg.t_max is None else cfg.t_max
    _emit(export.distances_csv(theorem2_distances(walks, t_max)), cfg.out)
    return 0


COMMANDS = {
    "simulate": cmd_simulate,
    "verify": cmd_verify,
    "spectrum": cmd_spectrum,
    "sweep": cmd_sweep,
    "hitting-time": cmd_hitting_time,
    "distances": cmd_distances,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("graph")
    g.add_argument("--family", choices=FAMILIES)
    g.add_argument("--n", type=int, help="cycle/complete/complete_bipartite/moebius_ladder size, johnson n")
    g.add_argument("--k", type=int, help="johnson subset size")
    g.add_argument("--rows", type=int)
    g.add_argument("--cols", type=int)
    g.add_argument("--dim", type=int, help="hypercube dimension")
    g.add_argument("--q", type=int, help="paley prime")
    g.add_argument("--edges", dest="path", help="edge-list file (use with --family edges)")
    g.add_argument("--mark", type=int, help="marked vertex (default 0)")
    w = common.add_argument_group("walk")
    w.add_argument("--ell", type=float, help="self-loop weight (default d/N)")
    w.add_argument("--s", type=float, help="interpolation parameter (default 1 - ell/d)")
    w.add_argument("--t-max", dest="t_max", type=int)
    w.add_argument("--c", type=float, help="horizon multiplier: t <= floor(c sqrt(HT)) (default 1)")
    r = common.add_argument_group("run")
    r.add_argument("--jobs", type=int, help="worker processes (fallback: LACKAWALK_JOBS)")
    r.add_argument("--seed", type=int)
    r.add_argument("--trials", type=int, help="Monte Carlo trials for hitting-time (0 disables)")
    r.add_argument("--stride", type=int, help="keep every k-th trajectory row")
    r.add_argument("--claims", help=f"comma-separated subset of {','.join(ALL_CLAIMS)}")
    r.add_argument("--sizes", help="comma-separated family sizes for sweep / thm2")
    r.add_argument("--out", help="output path (default stdout)")
    r.add_argument("--config", help="flat key = value config file")

    parser = argparse.ArgumentParser(prog="lackawalk", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = vars(parser.parse_args(argv))
    command = args.pop("command")
    config_path = args.pop("config")
    try:
        file_values = read_config_file(config_path) if config_path else {}
        cfg = build_config(args, file_values)
        return COMMANDS[command](cfg)
    except (ConfigError, GraphError, SpectralError, SzegedyError, OSError, np.linalg.LinAlgError) as exc:
        print(f"lackawalk {command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
