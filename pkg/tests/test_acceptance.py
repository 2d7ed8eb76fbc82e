"""Acceptance criteria 1-10, each at its stated tolerance.

Every test records one ``criterion N: PASS/FAIL`` line, printed in the
terminal summary.
"""

import json
import math
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from epicluster import malthus, model, paradox, serialize, stats
from epicluster.sim import (
    GROWTH,
    StopCondition,
    StopReason,
    replay,
    replicate_batch,
    simulate,
    snapshot,
    totals_on_grid,
)

pytestmark = pytest.mark.slow

DEFAULT = model.validate(2.0, 0.5, 0.5)


# ---------------------------------------------------------------------------
# 1. three routes to the growth rate


def test_criterion_1_oracle_triangle(report):
    a_root = malthus.solve_alpha(DEFAULT)
    a_rec = malthus.recurrence_alpha(DEFAULT)
    a_ode = malthus.ode_alpha(DEFAULT, K_max=200, t_max=40.0)
    gaps = [abs(a_root - a_rec), abs(a_root - a_ode), abs(a_rec - a_ode)]

    p0 = model.validate(2.0, 0.0, 0.5)
    exact = p0.gamma - p0.delta
    p0_alphas = [malthus.solve_alpha(p0), malthus.recurrence_alpha(p0), malthus.ode_alpha(p0, 200, 40.0)]
    p0_err = max(abs(a - exact) for a in p0_alphas)

    ok = max(gaps) < 1e-4 and p0_err < 1e-8
    report(1, ok, f"max pairwise gap {max(gaps):.2e} (< 1e-4); p=0 max error {p0_err:.2e} (< 1e-8)")
    assert max(gaps) < 1e-4
    assert p0_err < 1e-8


# ---------------------------------------------------------------------------
# 2. exact identities


def test_criterion_2_exact_identities(report):
    from scipy.special import beta as B

    alpha = malthus.solve_alpha(DEFAULT)
    K = 200
    pa, _ = malthus.pi_active(DEFAULT, alpha, K)
    pi, _ = malthus.pi_isolated(DEFAULT, alpha, K)
    k = np.arange(1, K + 1)
    mean_a = float(np.dot(k, pa.mass))
    size_bias = np.max(np.abs(pi.mass * mean_a - k * pa.mass))

    a = alpha / DEFAULT.rho
    beta_id = np.max(np.abs(a * B(a, k + 1.0) - k * B(1.0 + a, k)))

    pa_tail, _ = malthus.pi_active(DEFAULT, alpha)  # tail-rule truncation
    resid = malthus.eigen_residual(DEFAULT, alpha, pa_tail)

    ok = size_bias < 1e-10 and beta_id < 1e-10 and resid < 1e-8
    report(2, ok, f"size-bias {size_bias:.1e}, beta identity {beta_id:.1e} (< 1e-10); "
                  f"eigen residual {resid:.1e} at K={pa_tail.K} (< 1e-8)")
    assert size_bias < 1e-10
    assert beta_id < 1e-10
    assert resid < 1e-8


# ---------------------------------------------------------------------------
# 3. laws of a single cluster

T_SIZE = 1.0


def _single_cluster(trace):
    iso = float(trace.cl_iso[0])
    if iso <= T_SIZE:
        size_t = 0
    else:
        size_t = 1 + int(np.count_nonzero((trace.ev_kind == GROWTH) & (trace.ev_time <= T_SIZE)))
    return int(trace.cl_final[0]), iso, size_t


def test_criterion_3_single_cluster_laws(report):
    # no untraceable child is ever born, so cluster 0 evolves alone
    res = replicate_batch(DEFAULT, 12345, 100_000, StopCondition(max_generation=0), reducer=_single_cluster)
    final = np.array([r.data[0] for r in res])
    iso = np.array([r.data[1] for r in res])
    size_t = np.array([r.data[2] for r in res])

    geo = malthus.geometric_pmf(DEFAULT.rates.iso_success, int(final.max()))
    chi_final = stats.chi_square(stats.EmpiricalDist.from_sizes(final), geo)

    k = np.arange(1, size_t.max() + 1)
    probs = np.concatenate(([model.isolation_cdf(DEFAULT, T_SIZE)], model.typical_size_pmf(DEFAULT, T_SIZE, k)))
    # shift by one so that "isolated by t" becomes the first bin
    chi_t = stats.chi_square(stats.EmpiricalDist.from_sizes(size_t + 1), probs)

    ks_stat, ks_p = stats.ks_test(iso, np.vectorize(lambda t: model.isolation_cdf(DEFAULT, t)))

    ok = chi_final.pvalue > 0.01 and chi_t.pvalue > 0.01 and ks_p > 0.01
    report(3, ok, f"final-size chi2 p={chi_final.pvalue:.3f}, size-at-t chi2 p={chi_t.pvalue:.3f}, "
                  f"isolation-time KS p={ks_p:.3f} (all > 0.01, n=1e5)")
    assert chi_final.pvalue > 0.01
    assert chi_t.pvalue > 0.01
    assert ks_p > 0.01


# ---------------------------------------------------------------------------
# 4. extinction probability

SUPERCRITICAL_SETS = [(2.0, 0.5, 0.5), (1.5, 0.2, 0.3), (3.0, 0.3, 0.7)]


def test_criterion_4_extinction_probability(report):
    n = 10_000
    lines, ok = [], True
    for g, p, d in SUPERCRITICAL_SETS:
        params = model.validate(g, p, d)
        # a run that reaches 2000 infections survives with overwhelming probability
        res = replicate_batch(params, 2024, n, StopCondition(max_individuals=2000))
        frac = float(np.mean([r.survived for r in res]))
        target = 1.0 - d / ((1.0 - p) * g)
        lo, hi = stats.binomial_band(target, n, 3.0)
        ok &= lo <= frac <= hi
        lines.append(f"({g},{p},{d}) {frac:.4f} in [{lo:.4f},{hi:.4f}]")
    sub = model.validate(1.0, 0.9, 0.5)
    assert model.regime(sub) is model.Regime.SUBCRITICAL
    res = replicate_batch(sub, 2024, n)
    extinct = sum(r.stop_reason is StopReason.EXTINCTION for r in res)
    ok &= extinct == n
    report(4, ok, "; ".join(lines) + f"; subcritical extinct {extinct}/{n}")
    assert ok


# ---------------------------------------------------------------------------
# 5. detection paradox


def _end_profile(trace):
    if trace.contagious == 0:
        return None
    snap = snapshot(trace, trace.end_time)
    return np.bincount(snap.isolated_sizes, minlength=2)[1:], np.bincount(snap.active_sizes, minlength=2)[1:]


@pytest.mark.parametrize("gpd", [(2.0, 0.5, 0.5), (3.0, 0.3, 0.7)])
def test_criterion_5_detection_paradox(report, gpd):
    params = model.validate(*gpd)
    res = replicate_batch(params, 5, 40, StopCondition(max_individuals=20_000), reducer=_end_profile)
    kept = [r.data for r in res if r.data is not None]
    emp_i = stats.pool([stats.EmpiricalDist(d[0]) for d in kept])
    alpha = malthus.solve_alpha(params)
    K = max(malthus.default_K(params), len(emp_i.counts))
    pi_i, _ = malthus.pi_isolated(params, alpha, K)
    geo = malthus.geometric_pmf(params.rates.iso_success, K)
    tv_pi = stats.tv_distance(emp_i, pi_i)
    tv_geo = stats.tv_distance(emp_i, geo)
    cdf_emp = np.cumsum(emp_i.weights)[:10]
    dominated = bool(np.all(cdf_emp >= geo.cdf()[:10]))

    ok = emp_i.total >= 10_000 and tv_pi < 0.02 and tv_geo > 5 * tv_pi and dominated
    report(5, ok, f"{gpd}: {emp_i.total} isolated clusters from {len(kept)} survivors; "
                  f"TV(pi_i)={tv_pi:.4f} (< 0.02), TV(geo)={tv_geo:.4f} (> 5x), CDF dominates on k<=10: {dominated}")
    assert emp_i.total >= 10_000
    assert tv_pi < 0.02
    assert tv_geo > 5 * tv_pi
    assert dominated


# ---------------------------------------------------------------------------
# 6. growth-rate estimation

T_GROWTH = 8.0
GRID = np.linspace(0.0, T_GROWTH, 801)


def _a1_curve(trace):
    if trace.contagious == 0:
        return None
    tot = totals_on_grid(trace, GRID)
    return tot.n_active_clusters, int(tot.cumulative_infected[-1])


def test_criterion_6_growth_rate(report):
    res = replicate_batch(DEFAULT, 6, 40, StopCondition(t_max=T_GROWTH), reducer=_a1_curve)
    kept = [r.data for r in res if r.data is not None]
    pooled = np.sum([c for c, _ in kept], axis=0)
    population = sum(n for _, n in kept)
    alpha_hat = stats.estimate_alpha((GRID, pooled))
    alpha = malthus.solve_alpha(DEFAULT)
    rel = abs(alpha_hat - alpha) / alpha
    ok = 1e4 <= population <= 1e5 and rel < 0.05
    report(6, ok, f"alpha_hat={alpha_hat:.4f} vs alpha={alpha:.4f}, rel error {rel:.2%} (< 5%), "
                  f"pooled population {population} from {len(kept)} survivors")
    assert 1e4 <= population <= 1e5
    assert rel < 0.05


# ---------------------------------------------------------------------------
# 7. intrinsic martingale

ALPHA = malthus.solve_alpha(DEFAULT)


def _w(trace):
    return [stats.intrinsic_martingale(trace, ALPHA, n) for n in range(5)]


def test_criterion_7_intrinsic_martingale(report):
    # untraceable births of generation 4 are dropped, so generations 0..4 are exact and finite
    n = 10_000
    res = replicate_batch(DEFAULT, 77, n, StopCondition(max_generation=4), reducer=_w)
    W = np.array([r.data for r in res])
    mean = W.mean(axis=0)
    se = W.std(axis=0, ddof=1) / math.sqrt(n)
    z = np.where(se > 0, np.abs(mean - 1.0) / np.where(se > 0, se, 1.0), 0.0)
    ok = abs(mean[0] - 1.0) < 1e-15 and bool(np.all(z <= 3.0))
    report(7, ok, "W_0..W_4 means " + ", ".join(f"{m:.4f}" for m in mean) + f"; max |z| {z.max():.2f} (<= 3)")
    assert ok


# ---------------------------------------------------------------------------
# 8. lifespan paradox


def test_criterion_8_paradox(report):
    spec = paradox.LifespanSpec.exponential(1.0)
    lam1 = spec.lambda1_expectation()
    dm_exp = paradox.dead_mean(paradox.sample_cohort(spec, paradox.EXPONENTIAL, 12.0, seed=8))
    rel_exp = abs(dm_exp.value - lam1) / lam1

    # the bias of the polynomial case decays like 1/t: about 16% at t = 12,
    # 0.5% at t = 400, so the 2% check needs a longer horizon
    poly = paradox.Intensity("polynomial", 1.0)
    dm_poly = paradox.dead_mean(paradox.sample_cohort(spec, poly, 400.0, seed=8))
    rel_poly = abs(dm_poly.value - 1.0)

    ok = abs(lam1 - 0.5) < 1e-12 and rel_exp < 0.02 and rel_poly < 0.02
    report(8, ok, f"exponential t=12: {dm_exp.value:.4f} vs 0.5 ({rel_exp:.2%}, n_dead={dm_exp.n_dead}); "
                  f"polynomial r=1 t=400: {dm_poly.value:.4f} vs 1.0 ({rel_poly:.2%})")
    assert ok


def test_criterion_8_polynomial_bias_is_deterministic():
    spec = paradox.LifespanSpec.exponential(1.0)
    poly = paradox.Intensity("polynomial", 1.0)
    exact = paradox.expected_dead_mean(spec, poly, 12.0)
    means = [paradox.dead_mean(paradox.sample_cohort(spec, poly, 12.0, seed=s)).value for s in range(400)]
    assert abs(np.mean(means) - exact) < 4 * np.std(means) / math.sqrt(len(means)) + 0.01
    assert exact < 0.9


# ---------------------------------------------------------------------------
# 9. detection-free limit


def test_criterion_9_yule_simon(report):
    params = model.validate(1.0, 0.5, 0.0, detection_free=True)
    trace = simulate(params, 9, StopCondition(max_clusters=100_000))
    emp = stats.EmpiricalDist.from_sizes(trace.cl_size)
    sigma = malthus.yule_simon(0.5, len(emp.counts))
    tv = stats.tv_distance(emp, sigma)
    ok = trace.n_clusters == 100_000 and tv < 0.02
    report(9, ok, f"TV(profile, sigma_p)={tv:.4f} (< 0.02) at {trace.n_clusters} clusters")
    assert ok


# ---------------------------------------------------------------------------
# 10. determinism and replay


def _cli(args, out):
    cmd = [sys.executable, "-m", "epicluster", *args, "--out", str(out)]
    return subprocess.run(cmd, capture_output=True, text=True)


def _tree(root: Path) -> dict[str, bytes]:
    return {str(p.relative_to(root)): p.read_bytes() for p in sorted(root.rglob("*")) if p.is_file()}


def test_criterion_10_determinism_and_replay(report, tmp_path):
    runs = [
        ["analyze"],
        ["simulate", "--replicates", "3", "--seed", "11"],
        ["compare", "--replicates", "8", "--max-individuals", "3000", "--seed", "3"],
    ]
    identical = True
    for args in runs:
        a, b = tmp_path / f"{args[0]}_a", tmp_path / f"{args[0]}_b"
        ra, rb = _cli(args, a), _cli(args, b)
        assert ra.returncode in (0, 3), ra.stderr
        assert ra.returncode == rb.returncode
        identical &= _tree(a) == _tree(b)

    # replay the serialized event log and recompute every snapshot row
    params = model.validate(2.0, 0.5, 0.5)
    sim_dir = tmp_path / "simulate_a"
    manifest = json.loads((sim_dir / "manifest.json").read_text())
    exact = True
    for i, rep in enumerate(manifest["replicates"]):
        d = sim_dir / f"rep_{i:04d}"
        trace = simulate(params, rep["seed"], StopCondition(t_max=10.0, max_individuals=10_000))
        cols = serialize.read_events(d / "events.jsonl")
        exact &= all(np.array_equal(cols[k], getattr(trace, k)) for k in cols)
        header, rows = serialize.read_csv(d / "snapshots.csv")
        assert tuple(header) == serialize.SNAPSHOT_COLUMNS
        times = np.array([float(r[0]) for r in rows])
        written = np.array([[int(x) for x in r[1:]] for r in rows])
        replayed = replay(trace)  # checks every invariant along the log
        idx = np.searchsorted(replayed.times, times, side="right") - 1
        state = np.stack([
            np.where(idx >= 0, c[np.maximum(idx, 0)], init)
            for c, init in zip(
                (replayed.n_active_clusters, replayed.n_isolated_clusters,
                 replayed.n_contagious, replayed.n_isolated_individuals),
                (1, 0, 1, 0),
            )
        ], axis=1)
        exact &= np.array_equal(state, written)
        for t, row in zip(times[::10], written[::10]):
            snap = snapshot(trace, t)
            exact &= [snap.n_active_clusters, snap.n_isolated_clusters,
                      snap.n_contagious, snap.n_isolated_individuals] == list(row)

    ok = identical and exact
    report(10, ok, f"byte-identical re-runs: {identical}; replay matches all snapshot totals: {exact}")
    assert identical
    assert exact
