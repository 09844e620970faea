"""Acceptance suite: one test per criterion, at the stated tolerances.

Monte-Carlo criteria run on the package default base seed (20177), fixed
before any outcome was inspected and never tuned afterwards.
"""

import math
import time

import numpy as np
import pytest

from allee_dyn import _num, analysis, bounds, cli, maps, montecarlo as mc, noise
from allee_dyn import rng, simulate

SEED = 20177
UNI = noise.uniform()

EX61 = maps.builtin("example-6-1")
EX62 = maps.builtin("example-6-2")
D43 = maps.builtin("demo-4-3")
D44 = maps.builtin("demo-4-4")


def _report(criterion: str, detail: str = ""):
    print(f"[acceptance] {criterion}: PASS {detail}")


def test_criterion_01_thresholds_example_6_1():
    """Threshold reproduction for the first worked example, under 1 s."""
    t0 = time.perf_counter()
    r = analysis.analyze_regime(EX61, 1.8, 6.5, 0.2)
    elapsed = time.perf_counter() - t0
    assert r.b == pytest.approx(0.907, abs=0.005)
    assert r.F_b == pytest.approx(-0.3384, abs=0.001)
    assert r.F_a == pytest.approx(0.293, abs=0.001)
    assert r.f_H == pytest.approx(6.317, abs=0.001)
    assert r.f_H_argmax == pytest.approx(math.sqrt(11.0), abs=0.001)
    assert r.u_l == pytest.approx(1.74, abs=0.01)
    assert r.v_l == pytest.approx(0.361, abs=0.005)
    assert elapsed < 1.0
    _report("criterion 1", f"(runtime {elapsed:.3f}s)")


def test_criterion_02_thresholds_example_6_2():
    """Threshold reproduction for the second worked example, under 1 s."""
    t0 = time.perf_counter()
    r = analysis.analyze_regime(EX62, 0.2, 1.8, 0.04)
    Fs = lambda x: maps.eval_F(EX62, x)
    Fv = lambda xs: maps.eval_F_vec(EX62, xs)
    c = _num.first_crossing(Fs, Fv, 0.0, 1e-4, 0.5, n_grid=10_000)
    d = _num.first_crossing(Fs, Fv, 0.0, 0.5, 1.8, n_grid=10_000)
    elapsed = time.perf_counter() - t0
    assert c == pytest.approx(0.0833, abs=0.0005)
    assert d == pytest.approx(1.2037, abs=0.001)
    assert r.f_H == pytest.approx(1.3688, abs=0.001)
    assert r.f_H_argmax == pytest.approx(0.8508, abs=0.001)
    assert r.b == pytest.approx(0.0392, abs=0.0005)
    assert r.F_b == pytest.approx(-0.0186, abs=0.0005)
    assert r.F_a == pytest.approx(0.16, abs=0.005)
    assert maps.eval_f(EX62, 1.8) == pytest.approx(0.6886, abs=0.001)
    assert elapsed < 1.0
    _report("criterion 2", f"(runtime {elapsed:.3f}s)")


def test_criterion_03_corridor_switch_demo_4_4():
    """The corridor condition |F| < l flips between l = 0.1 and l = 0.05."""
    hi = analysis.analyze_regime(D44, 12.3, 14.5, 0.1)
    lo = analysis.analyze_regime(D44, 12.3, 14.5, 0.05)
    assert hi.flbound_holds is True
    assert lo.flbound_holds is False
    expected = {3.0: 1 / 12, 5.0: -1 / 20, 7.0: 1 / 28, 9.0: -1 / 36,
                11.0: 1 / 44}
    for x, v in expected.items():
        assert maps.eval_F(D44, x) == pytest.approx(v, abs=1e-9)
    _report("criterion 3")


def test_criterion_04_ordering_demo_4_3():
    """beta_l < alpha_l for the multi-dip map at a=5.2, H=7, l=0.19."""
    b, _ = analysis.find_b(D43, 5.2)
    assert b == pytest.approx(1.5, abs=1e-6)
    alpha, beta = analysis.compute_alpha_beta(D43, 5.2, b, 0.19)
    assert 1.5 < beta < 2.5
    assert 3.5 < alpha < 5.2
    assert beta < alpha
    _report("criterion 4", f"(beta_l={beta:.4f}, alpha_l={alpha:.4f})")


R61 = analysis.analyze_regime(EX61, 1.8, 6.5, 0.2)


def test_criterion_05_zone_purity():
    """Starts inside the absorbing zones classify unanimously, under 60 s."""
    t0 = time.perf_counter()
    low = mc.estimate(EX61, UNI, R61, 0.2, trials=10_000, n_max=100_000,
                      base_seed=SEED)
    up = mc.estimate(EX61, UNI, R61, 3.0, trials=10_000, n_max=100_000,
                     base_seed=SEED)
    elapsed = time.perf_counter() - t0
    assert low.n_low == 10_000 and low.n_undecided == 0
    assert up.n_persistent == 10_000 and up.n_undecided == 0
    assert elapsed < 60.0
    _report("criterion 5", f"(runtime {elapsed:.1f}s)")


def test_criterion_06_mixed_zone():
    """Mixed-zone grid: both outcomes, CI-monotone persistence, bounds hold."""
    grid = (1.4, 1.5, 1.6, 1.7)
    estimates = []
    for x0 in grid:
        est = mc.estimate(EX61, UNI, R61, x0, trials=10_000, n_max=100_000,
                          base_seed=SEED)
        reports = [bounds.basic_bounds(EX61, UNI, R61, x0),
                   bounds.improved_bounds(EX61, UNI, R61, x0),
                   bounds.explicit_bounds(EX61, UNI, R61, x0, variant="uniform")]
        verdict = mc.verify_bounds(est, reports)
        assert verdict.passed, verdict.checks
        estimates.append(est)
    # persistence non-decreasing across the grid at 99% CI separation:
    # no later point may sit significantly below an earlier one
    for i in range(len(grid)):
        for j in range(i + 1, len(grid)):
            assert estimates[j].ci_persist[1] >= estimates[i].ci_persist[0]
    # both outcomes occur at every grid point
    for est in estimates:
        assert est.n_persistent > 0, (
            f"no persistent trial at x0={est.x0} in {est.trials} trials "
            f"(true probability ~5e-5 at 1.4)")
        assert est.n_low > 0
    _report("criterion 6",
            "(p_hat_persist = "
            + ", ".join(f"{e.p_hat_persist:.4f}" for e in estimates) + ")")


def test_criterion_07_allee_erasure():
    """Amplitude above the drop threshold erases the Allee effect, under 120 s."""
    t0 = time.perf_counter()
    escape = analysis.analyze_regime(EX62, 0.2, 1.8, 0.04)
    est_hi = mc.estimate(EX62, UNI, escape, 0.01, trials=1000, n_max=100_000,
                         base_seed=SEED, absorption_steps=1000)
    trapped = analysis.analyze_regime(EX62, 0.2, 1.8, 0.01)
    est_lo = mc.estimate(EX62, UNI, trapped, 0.01, trials=1000, n_max=100_000,
                         base_seed=SEED)
    elapsed = time.perf_counter() - t0
    assert est_hi.n_persistent >= 990
    assert est_hi.n_low == 0
    assert est_lo.n_low >= 990
    assert est_lo.n_persistent == 0
    assert elapsed < 120.0
    _report("criterion 7", f"(runtime {elapsed:.1f}s)")


def _random_starts(n, lo, hi, tag):
    starts = []
    for i in range(n):
        u, _ = rng.uniform_block(rng.derive(SEED + tag, i, rng.PURPOSE_SUITE), 1)
        starts.append(lo + float(u[0]) * (hi - lo))
    return starts


def test_criterion_08_invariance_suites():
    """Pathwise trap and invariance properties: zero violations in 10^3
    randomized (seed, x0) trials per configuration."""
    n_steps = 2000
    # trap below b1 (example-6-1): l = 0.3 <= b1 - f(b1) ~ 0.338
    b1 = 0.907
    for i, x0 in enumerate(_random_starts(1000, 0.0, b1, tag=1)):
        path = simulate.simulate(EX61, UNI, 0.3, x0, n_steps,
                                 rng.derive(SEED, i))
        assert simulate.check_trap_below_b1(EX61, 0.3, b1, x0, path)
    # invariance of (a, H) on a configuration that satisfies the growth
    # assumption: (1.7, 6.35) with l = 0.03 < min(H - f_H, F(a)) ~ 0.0334
    _, f_H = analysis.compute_f_H(EX61, 6.35)
    for i, x0 in enumerate(_random_starts(1000, 1.7 + 1e-9, 6.35, tag=2)):
        path = simulate.simulate(EX61, UNI, 0.03, x0, n_steps,
                                 rng.derive(SEED + 1, i))
        assert simulate.check_invariance_aH(EX61, 0.03, 1.7, 6.35, x0, path,
                                            f_H=f_H)
    # multistability window of the sine ladder: (3.5, 9.0) with l = 0.3
    sine = maps.builtin("sine")
    _, f_H1 = analysis.compute_f_H(sine, 9.0)
    for i, x0 in enumerate(_random_starts(1000, 3.5 + 1e-9, 9.0, tag=3)):
        path = simulate.simulate(sine, UNI, 0.3, x0, n_steps,
                                 rng.derive(SEED + 2, i))
        assert simulate.check_invariance_aH(sine, 0.3, 3.5, 9.0, x0, path,
                                            f_H=f_H1)
    _report("criterion 8", "(3 x 1000 trials, zero violations)")


def test_criterion_09_expectation_floor():
    """Tail mean beats l*alpha - 3 SE in the near-zero trap."""
    verdict = mc.verify_expectation(EX61, UNI, 0.2, 0.1, trials=1000,
                                    n_max=10_000, base_seed=SEED)
    assert verdict.passed, verdict.checks
    assert bounds.min_expectation(UNI, 0.2) == pytest.approx(0.05)
    _report("criterion 9", f"({verdict.checks[0]})")


def test_criterion_10_dominance_chain():
    """explicit <= improved, basic <= improved across the corridor; the
    one-step boundary bound exceeds 0.9 at u_l - 1e-4."""
    xs = R61.v_core + (R61.u_l - R61.v_core) * (np.arange(1, 21) / 21.0)
    for x0 in xs:
        x0 = float(x0)
        basic = bounds.basic_bounds(EX61, UNI, R61, x0)
        improved = bounds.improved_bounds(EX61, UNI, R61, x0)
        explicit = bounds.explicit_bounds(EX61, UNI, R61, x0, variant="uniform")
        for rep in (basic, improved, explicit):
            for v in (rep.persistence_bound, rep.lowdensity_bound):
                assert v is not None and 0.0 <= v <= 1.0
        assert basic.persistence_bound <= improved.persistence_bound + 1e-12
        assert basic.lowdensity_bound <= improved.lowdensity_bound + 1e-12
        assert explicit.persistence_bound <= improved.persistence_bound + 1e-12
        assert explicit.lowdensity_bound <= improved.lowdensity_bound + 1e-12
    edge = bounds.boundary_bounds(EX61, UNI, R61, R61.u_l - 1e-4)
    assert edge.persistence_bound > 0.9
    _report("criterion 10",
            f"(boundary bound {edge.persistence_bound:.4f} at u_l - 1e-4)")


def test_criterion_11_determinism(tmp_path, monkeypatch, capsys):
    """Identical flags and seed give byte-identical CSVs at 1, 2, 8 threads."""
    cases = {
        "mc": ["montecarlo", "--map", "example-6-1", "--a", "1.8",
               "--H", "6.5", "--l", "0.2", "--x0", "1.5",
               "--trials", "3000", "--seed", "41"],
        "sweep": ["sweep", "--map", "example-6-1", "--a", "1.8", "--H", "6.5",
                  "--l", "0.2", "--x0-grid", "1.5:1.7:0.1",
                  "--trials", "500", "--seed", "42"],
        "analyze": ["analyze", "--map", "example-6-1", "--a", "1.8",
                    "--H", "6.5", "--l", "0.2"],
        "simulate": ["simulate", "--map", "example-6-1", "--a", "1.8",
                     "--H", "6.5", "--l", "0.2", "--x0", "1.5",
                     "--trials", "5", "--seed", "43"],
    }
    for name, args in cases.items():
        blobs = []
        for run, threads in enumerate(("1", "2", "8")):
            monkeypatch.setenv("ALLEE_DYN_THREADS", threads)
            out = tmp_path / f"{name}_{run}.csv"
            code = cli.parse_and_dispatch(args + ["--out", str(out)])
            assert code == 0
            blobs.append(out.read_bytes())
        assert blobs[0] == blobs[1] == blobs[2], f"{name} output varies"
    _report("criterion 11")
