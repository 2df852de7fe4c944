import json
import math

import numpy as np
import pytest
from scipy import stats

from ranpoly.experiments import (
    config_hash,
    histogram,
    istar_sample,
    ks_statistic,
    map_replicates,
    normal_cdf,
    replicate_seed,
    run_band,
    run_convergence,
    run_istar,
    run_joint_cov,
    run_marginal_clt,
    tstar_sample,
)
from ranpoly.limitcov import sigma_sq
from ranpoly.multiplicity import MultiplicitySpec

C1 = MultiplicitySpec.constant(1)


def test_ks_examples():
    x = np.random.default_rng(0).random(50)
    assert ks_statistic(x, x) == 0.0
    assert ks_statistic([0.5], lambda t: np.clip(t, 0, 1)) == 0.5
    u = np.random.default_rng(1).random(10**5)
    assert ks_statistic(u, lambda t: np.clip(t, 0, 1)) < 0.01
    with pytest.raises(ValueError):
        ks_statistic([], lambda t: t)
    with pytest.raises(ValueError):
        ks_statistic([1.0], [])


@pytest.mark.parametrize("seed", range(5))
def test_ks_matches_scipy(seed):
    rng = np.random.default_rng(seed)
    a, b = rng.normal(size=300), rng.normal(0.2, 1.1, size=170)
    assert ks_statistic(a, normal_cdf(1.0)) == pytest.approx(stats.kstest(a, "norm").statistic, abs=1e-14)
    assert ks_statistic(a, b) == pytest.approx(stats.ks_2samp(a, b).statistic, abs=1e-14)
    # ties across samples
    c, d = rng.integers(0, 5, 40), rng.integers(0, 5, 60)
    assert ks_statistic(c, d) == pytest.approx(stats.ks_2samp(c, d).statistic, abs=1e-14)


def test_histogram_examples():
    h = histogram([1, 2, 3], 3, (1, 3))
    assert list(h.counts) == [1, 1, 1] and h.total == 3
    h = histogram([2.5] * 7, 10)
    assert np.count_nonzero(h.counts) == 1 and h.counts.sum() == 7
    u = np.random.default_rng(3).random(10**6)
    h = histogram(u, 100, (0, 1))
    assert np.abs(h.counts - 10**4).max() < 5 * math.sqrt(10**4)
    assert h.counts.sum() == h.total and np.all(np.diff(h.edges) > 0)
    with pytest.raises(ValueError):
        histogram([], 3)
    with pytest.raises(ValueError):
        histogram([1.0], 0)
    with pytest.raises(ValueError):
        histogram([5.0], 2, (0, 1))


def test_map_replicates_order_and_threads():
    assert map_replicates(lambda i: i * i, 10, 1) == map_replicates(lambda i: i * i, 10, 4)


def test_seed_streams_distinct():
    a = np.random.default_rng(replicate_seed(1, "marginal_clt", 0)).random()
    b = np.random.default_rng(replicate_seed(1, "marginal_clt", 1)).random()
    c = np.random.default_rng(replicate_seed(1, "joint_cov", 0)).random()
    assert len({a, b, c}) == 3
    assert a == np.random.default_rng(replicate_seed(1, "marginal_clt", 0)).random()


def test_marginal_report_deterministic_across_threads():
    a = run_marginal_clt(C1, 300, 60, 0.0, seed=9, threads=1)
    b = run_marginal_clt(C1, 300, 60, 0.0, seed=9, threads=3)
    assert np.array_equal(a.samples["T"], b.samples["T"])
    assert a.summary == b.summary and a.config_hash == b.config_hash
    assert a.summary["sigma_sq"] == sigma_sq()
    json.dumps(a.to_dict())


def test_permuted_execution_order_gives_same_multiset():
    base = tstar_sample(C1, 100, 30, seed=4)
    order = np.random.default_rng(0).permutation(30)
    from ranpoly.polycircle import maximize, sample_poly

    perm = [maximize(sample_poly(C1, 100, replicate_seed(4, "convergence", 100, i))).t_star for i in order]
    assert np.array_equal(np.sort(base), np.sort(perm))


def test_joint_cov_degenerate_pair():
    r = run_joint_cov(C1, 500, 1500, (0.0, 0.0), seed=3)
    assert r.summary["cov"] == pytest.approx(r.summary["var1"], rel=1e-12)
    assert abs(r.summary["cov"] - sigma_sq()) < 3 * r.summary["se"]


def test_istar_run():
    r = run_istar(500, 1024, seed=2, bins=20)
    assert r.summary["all_positive"] and r.summary["min_istar"] > 0
    assert r.histogram.counts.sum() == 500
    assert r.summary["max_fubini_ratio"] < 1e-2
    assert r.extra["first_profile"].shape == (1024,)


def test_istar_grid_convergence():
    fine, _, _, _ = istar_sample(10_000, 4096, seed=21)
    coarse, _, _, _ = istar_sample(10_000, 2048, seed=21, generation_grid=4096)
    assert coarse.mean() < fine.mean()  # the grid supremum is biased low
    assert ks_statistic(coarse, fine) < 0.05


def test_istar_chunking_and_threads_do_not_matter():
    a = istar_sample(300, 512, seed=5, chunk=64)[0]
    b = istar_sample(300, 512, seed=5, chunk=100, threads=3)[0]
    assert np.array_equal(a, b)


def test_istar_scaling_factor():
    a = istar_sample(200, 512, "unit_variance_normalized", seed=8)[0]
    b = istar_sample(200, 512, "paper_bm_subtraction", seed=8)[0]
    assert np.allclose(b, a * math.sqrt(2 * math.pi), rtol=1e-12)
    with pytest.raises(ValueError):
        istar_sample(10, 500, generation_grid=1024)


def test_convergence_and_band_reports():
    ref = istar_sample(500, 1024, seed=1)[0]
    r = run_convergence(C1, [50, 100, 200], 40, ref, seed=2)
    assert [row["N"] for row in r.summary["per_N"]] == [50, 100, 200]
    assert all(0 <= row["ks"] <= 1 and row["min_tstar"] > 0 for row in r.summary["per_N"])
    b = run_band(MultiplicitySpec.power(1), [20, 40], m=10, seed=3)
    table = b.samples["table"]
    assert table.shape == (20, 5)
    assert np.allclose(table[:, 4], 5 * table[:, 3])
    frac = np.mean((table[:, 2] >= table[:, 3]) & (table[:, 2] <= table[:, 4]))
    assert b.summary["fraction_overall"] == pytest.approx(frac)


def test_config_hash():
    a = config_hash({"spec": C1, "N": 10})
    assert a == config_hash({"N": 10, "spec": MultiplicitySpec.constant(1)})
    assert a != config_hash({"spec": C1, "N": 11})
