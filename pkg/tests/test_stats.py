import pytest

from threshold_mldsa.stats import (BenchReport, naive_simulation, naive_success, render_csv,
                                   render_markdown, rejection_model, renyi_bound, renyi_table,
                                   run_bench, threshold_z_simulation)


def test_rejection_model_values():
    m = rejection_model()
    # frozen from direct evaluation of the closed forms
    assert m.p_z == pytest.approx(0.619647, abs=1e-6)
    assert m.p_r0 == pytest.approx(0.316640, abs=1e-6)
    assert m.p_combined == pytest.approx(0.196205, abs=1e-6)
    assert m.p_z == pytest.approx(0.62, abs=0.005)
    assert m.p_r0 == pytest.approx(0.32, abs=0.005)
    assert m.p_combined == pytest.approx(0.20, abs=0.005)


@pytest.mark.parametrize("size,expect", [(17, 2.9e-3), (25, 1.4e-2), (33, 4.1e-2)])
def test_renyi_reference_rows(size, expect):
    assert float(f"{renyi_bound(size)[0]:.1e}") == expect


def test_renyi_formula_values_small_sets():
    # formula (not the reference table) for |S| = 4 and 9
    assert renyi_bound(4)[0] == pytest.approx(8.944e-6, rel=1e-3)
    assert renyi_bound(9)[0] == pytest.approx(2.292e-4, rel=1e-3)
    notes = {r.s_size: r.note for r in renyi_table()}
    assert notes[4] and notes[9]
    assert not notes[17] and not notes[25] and not notes[33]


def test_renyi_monotone():
    rows = [renyi_bound(n) for n in range(2, 40)]
    r2 = [r[0] for r in rows]
    eps = [r[1] for r in rows]
    assert all(a < b for a, b in zip(r2, r2[1:]))
    assert all(a > b for a, b in zip(eps[2:], eps[3:]))
    with pytest.raises(ValueError):
        renyi_bound(1)


def test_tail_epsilon_under_table_caps():
    caps = {4: 1e-10, 9: 1e-19, 17: 1e-30, 25: 1e-40, 33: 1e-49}
    for n, cap in caps.items():
        assert renyi_bound(n)[1] < cap


def test_naive_success_table():
    assert naive_success(1) == 0.2
    assert float(f"{naive_success(8):.1e}") == 2.6e-6
    assert float(f"{naive_success(16):.1e}") == 6.6e-12
    assert float(f"{naive_success(32):.1e}") == 4.3e-23
    with pytest.raises(ValueError):
        naive_success(0)


def test_naive_simulation_small():
    s1 = naive_simulation(1, 2000, seed=1)
    assert s1.rate == s1.single_rate
    assert abs(s1.rate - rejection_model().p_z) < 0.04
    s2 = naive_simulation(2, 2000, seed=2)
    assert abs(s2.rate - s2.predicted) < 4 * s2.sigma


def test_threshold_nonce_concentration():
    assert threshold_z_simulation(4, 500, seed=0) > 0.95


def test_bench_report_identities():
    r = BenchReport(3, 5, 4, "p1", attempts=500, successes=150)
    lo, hi = r.ci95
    assert lo < 0.3 < hi
    assert r.rate * r.mean_attempts == pytest.approx(1.0)
    assert r.speedup == pytest.approx(125 / (500 / 150))


def test_run_bench_reproducible():
    a = run_bench([(2, 3)], trials=12, seed=5)
    b = run_bench([(2, 3)], trials=12, seed=5)
    assert a[0].successes == b[0].successes and a[0].aborts == b[0].aborts
    assert a[0].bytes_per_party == 12576
    md = render_markdown(a)
    assert md.count("\n") == 2 and "| 2 | 3 | 3 |" in md
    csv_text = render_csv(a)
    assert csv_text.splitlines()[0].startswith("T,N,S,profile")
