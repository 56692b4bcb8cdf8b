"""End-to-end experiment drivers shared by the CLI and the acceptance suite.

Each driver returns a plain dict (JSON-ready payload) holding every statistic
plus the resolved configuration and master seed, so reports are reproducible
byte for byte under a fixed seed.
"""

from __future__ import annotations

from typing import Optional, Sequence

import numpy as np

from .bounds import GeometricBoundConfig, geometric_bound
from .core import ROLE_X, SeedPolicy, cube, sample_iid, table_functional
from .diffops import telescoping_residual
from .functionals import make_distribution, voronoi_factory
from .geometry import (
    covering_volume_and_isolated,
    germ_grain_from_config,
    make_grid,
)
from .hoeffding import (
    covariance_identity_residual,
    decompose_table,
    degeneracy_residual,
    direct_variance,
    harmonic_number,
    kappa,
    kappa_total,
    orthogonality_matrix,
    reconstruction_residual,
    variance_expansion,
)
from .mc import empirical_kolmogorov, fit_rate, replicate
from .stein import G_MAX, sweep_checks


def identity_suite(alphabet_size: int = 3, n: int = 3, trials: int = 100,
                   policy: Optional[SeedPolicy] = None,
                   pairs_per_functional: int = 5) -> dict:
    """Exact identity residuals over random table functionals, for uniform
    and skewed weights.  All maxima should sit at floating round-off."""
    policy = policy or SeedPolicy()
    from math import comb

    out = {
        "alphabet_size": alphabet_size,
        "n": n,
        "trials": trials,
        "master_seed": policy.master_seed,
        "telescoping_max": 0.0,
        "reconstruction_max": 0.0,
        "degeneracy_max": 0.0,
        "orthogonality_max": 0.0,
        "variance_expansion_max": 0.0,
        "covariance_identity_max": 0.0,
        "kappa_total_gap": abs(kappa_total(n) - harmonic_number(n)),
        "kappa_row_gap_max": max(
            abs(sum(comb(m - 1, a) * kappa(m, a) for a in range(m)) - 1.0)
            for m in range(1, 11)),
    }
    for skew in (False, True):
        dist = make_distribution(f"alphabet{alphabet_size}", skew=skew)
        weights = dist.weights
        gen = policy.stream(0 if not skew else 1, "X")
        tables = [gen.uniform(-1.0, 1.0, size=(alphabet_size,) * n)
                  for _ in range(trials)]
        for i, table in enumerate(tables):
            f = table_functional(table)
            for _ in range(pairs_per_functional):
                y = gen.integers(0, alphabet_size, size=n)
                yp = gen.integers(0, alphabet_size, size=n)
                out["telescoping_max"] = max(
                    out["telescoping_max"], telescoping_residual(f, y, yp))
            report = decompose_table(table, weights)
            out["reconstruction_max"] = max(
                out["reconstruction_max"], reconstruction_residual(report))
            out["degeneracy_max"] = max(
                out["degeneracy_max"], degeneracy_residual(report))
            _, mat = orthogonality_matrix(report)
            off = mat - np.diag(np.diag(mat))
            out["orthogonality_max"] = max(
                out["orthogonality_max"], float(np.abs(off).max()))
            out["variance_expansion_max"] = max(
                out["variance_expansion_max"],
                abs(variance_expansion(report) - direct_variance(table, weights)))
            other = tables[(i + 1) % len(tables)]
            out["covariance_identity_max"] = max(
                out["covariance_identity_max"],
                covariance_identity_residual(table, other, weights))
    out["max_residual"] = max(
        out[k] for k in out if k.endswith("_max") or k.endswith("_gap"))
    return out


def stein_suite(step: float = 0.01, lo: float = -6.0, hi: float = 6.0) -> dict:
    """Stein-kernel inequality sweep with pass/fail flags."""
    rep = sweep_checks(lo=lo, hi=hi, step=step)
    rep.update({
        "step": step, "lo": lo, "hi": hi,
        "positivity_ok": rep["g_min"] > 0.0,
        "upper_bound_ok": rep["g_max"] <= G_MAX + 1e-12,
        "derivative_bound_ok": rep["g_prime_max_abs"] <= 1.0 + 1e-12,
        "equation_ok": rep["stein_residual_max"] <= 1e-10,
        "taylor_ok": rep["taylor_slack_min"] >= -1e-12,
        "lipschitz_ok": rep["lipschitz_slack_min"] >= -1e-12,
    })
    rep["all_ok"] = all(rep[k] for k in rep if k.endswith("_ok"))
    return rep


def voronoi_experiment(shape, n_list: Sequence[int], reps: int, grid_m: int,
                       policy: SeedPolicy, bound_outer: int = 48,
                       bound_grid_m: int = 20000,
                       run_bounds: bool = True) -> dict:
    """Replicated reconstructed-volume statistics across sizes: mean/variance
    and empirical normal distance per size, log-log variance rate fit, and
    (optionally) the recombination bound report at a coarser bound grid."""
    d = shape.d
    dist = cube(d)
    per_n = []
    for n in n_list:
        sub = policy.child(f"voronoi-n{n}")
        factory = voronoi_factory(shape, grid_m, sub)
        res = replicate(factory, dist, int(n), reps, sub)
        d_k, band = empirical_kolmogorov(res.values)
        entry = {
            "n": int(n),
            "mean": res.mean,
            "se_mean": res.se_mean,
            "variance": res.variance,
            "variance_se": res.variance_se,
            "empirical_dK": d_k,
            "dkw_band": band,
        }
        if run_bounds:
            bound_pol = sub.child("bound")
            bound_factory = voronoi_factory(shape, bound_grid_m, bound_pol)
            cfg = GeometricBoundConfig(
                policy=bound_pol, outer=bound_outer,
                sigma2=res.variance, sigma2_se=res.variance_se,
                mean=res.mean,
            )
            rep = geometric_bound(bound_factory(0), dist, int(n), cfg)
            entry["graph_bound"] = rep.graph_bound
            entry["b_n"] = rep.b_n
            entry["b_n_prime"] = rep.b_n_prime
            entry["bound_report"] = rep.to_dict()
        per_n.append(entry)
    out = {
        "shape": shape.kind,
        "d": d,
        "reps": reps,
        "grid_m": grid_m,
        "master_seed": policy.master_seed,
        "per_n": per_n,
        "target_volume": getattr(shape, "volume", None),
    }
    if len(per_n) >= 3:
        fit = fit_rate([e["n"] for e in per_n],
                       [e["variance"] for e in per_n],
                       [e["variance_se"] for e in per_n])
        out["variance_fit"] = fit.to_dict()
    return out


def covering_experiment(law, d: int, n_list: Sequence[int], reps: int,
                        density: float, policy: SeedPolicy) -> dict:
    """Covered-volume and isolated-count statistics across sizes; one pass
    per replication computes both functionals on the shared grid."""
    per_n = []
    for n in n_list:
        n = int(n)
        sub = policy.child(f"covering-n{n}")
        side = n ** (1.0 / d)
        m = max(int(density * n), 16)
        fv_vals = np.empty(reps)
        fi_vals = np.empty(reps)
        for rep in range(reps):
            grid = make_grid(d, m, sub.stream(rep, "integration"), extent=side)
            u = sample_iid(cube(d + 1), n, sub.stream(rep, ROLE_X))
            grain = germ_grain_from_config(u, law, side)
            fv_vals[rep], fi_vals[rep] = covering_volume_and_isolated(grain, grid)
        entry = {"n": n, "m": m}
        for tag, vals in (("volume", fv_vals), ("isolated", fi_vals)):
            d_k, band = empirical_kolmogorov(vals)
            entry[tag] = {
                "mean": float(vals.mean()),
                "variance": float(np.var(vals, ddof=1)),
                "variance_over_n": float(np.var(vals, ddof=1) / n),
                "empirical_dK": d_k,
                "dkw_band": band,
                "sqrt_n_dK": float(np.sqrt(n) * d_k),
            }
        per_n.append(entry)
    out = {
        "d": d,
        "reps": reps,
        "density": density,
        "radius_law": law.kind,
        "master_seed": policy.master_seed,
        "per_n": per_n,
    }
    for tag in ("volume", "isolated"):
        ratios = [e[tag]["variance_over_n"] for e in per_n]
        out[f"{tag}_var_ratio_spread"] = float(max(ratios) / min(ratios))
        sq = [e[tag]["sqrt_n_dK"] for e in per_n]
        out[f"{tag}_sqrt_n_dK_spread"] = float(max(sq) / min(sq))
    return out
