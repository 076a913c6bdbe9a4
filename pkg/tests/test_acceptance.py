"""Acceptance suite: one test per criterion, printing one pass/fail line each.

Run with `pytest -s tests/test_acceptance.py` to see the per-criterion lines.
"""

import random
from fractions import Fraction

from quagd.cli import main as cli_main
from quagd.consensus import init_consensus, minmax_window_round, run_faqua
from quagd.graph import Digraph, diameter, generate_random_strongly_connected
from quagd.harness import (
    audit_invariants,
    centralized_baseline,
    default_theory,
    delta_sweep,
    plateau_level,
    reference_instance,
)
from quagd.optimizer import (
    OptRunConfig,
    compute_theta_and_floor,
    quadratic_cost,
    quadratic_optimum,
    quagd_run,
    step_size_interval,
    young_delta_interval,
)
from quagd.quantizer import QuantizationLevel


def _report(number, description, check):
    try:
        check()
    except BaseException:
        print(f"criterion {number}: FAIL ({description})")
        raise
    print(f"criterion {number}: PASS ({description})")


def _cycle(n):
    return Digraph(n, [((i + 1) % n, i) for i in range(n)])


def _complete(n):
    return Digraph(n, [(r, s) for r in range(n) for s in range(n) if r != s])


_TRIAL_RESULTS = None


def _randomized_trials():
    """200 consensus trials shared by criteria 1 and 2."""
    global _TRIAL_RESULTS
    if _TRIAL_RESULTS is None:
        rnd = random.Random(20240815)
        results = []
        for _ in range(200):
            n = rnd.randint(2, 8)
            g = generate_random_strongly_connected(
                n, rnd.random() * 0.6, rnd.randrange(2**32)
            )
            x_half = [rnd.uniform(-5.0, 10.0) for _ in range(n)]
            q = QuantizationLevel(rnd.choice(["1", "0.25", "0.1"]))
            results.append(
                run_faqua(x_half, g, diameter(g), q, rnd.randrange(2**32))
            )
        _TRIAL_RESULTS = results
    return _TRIAL_RESULTS


def test_criterion_1_consensus_accuracy():
    def check():
        for res in _randomized_trials():
            assert len(set(res.per_node_values)) == 1  # zero tolerance
            # |m*delta - (delta/n) * sum(counts)| <= delta, in integers:
            assert abs(res.value_count * res.n - res.quantized_sum) <= res.n

    _report(1, "consensus agreement and one-level accuracy, 200 trials", check)


def test_criterion_2_exact_mass_conservation():
    def check():
        for res in _randomized_trials():
            assert all(a.y_conserved for a in res.audits)
            assert all(a.z_conserved for a in res.audits)

    _report(2, "exact integer mass conservation every round", check)


def test_criterion_3_minmax_window_reaches_extrema():
    def check():
        rnd = random.Random(42)
        graphs = [_cycle(4)]
        graphs += [_complete(n) for n in range(2, 7)]
        for _ in range(50):
            n = rnd.randint(2, 8)
            graphs.append(
                generate_random_strongly_connected(
                    n, rnd.random() * 0.6, rnd.randrange(2**32)
                )
            )
        for g in graphs:
            d = diameter(g)
            states = init_consensus([0.0] * g.n, g, QuantizationLevel("1"))
            values = [rnd.randint(-50, 50) for _ in range(g.n)]
            for st, v in zip(states, values):
                st.y_s, st.z_s = v, 1
            for lam in range(1, d + 1):
                minmax_window_round(states, g, lam, d)
            assert all(st.M == max(values) for st in states)
            assert all(st.m == min(values) for st in states)

    _report(3, "max/min flood reaches global extrema within diameter rounds", check)


def test_criterion_4_runtime_averaging_bounds():
    def check():
        for delta in ("0.1", "0.01"):
            for seed in range(10):
                cfg = reference_instance(seed=seed, delta=delta)
                trace = quagd_run(cfg, x_star=quadratic_optimum(cfg.costs))
                d = float(cfg.delta.delta)
                for step in trace.steps[1:]:
                    assert step.centroid_err <= 2 * d
                    assert step.max_node_dev <= 4 * d
                assert audit_invariants(trace).clean

    _report(4, "2*delta / 4*delta observer bounds on the 20-node instance", check)


def test_criterion_5_theory_constants():
    def check():
        c = compute_theta_and_floor(Fraction(3, 4), 1, 20, 20, 20, 0)
        assert c.theta == Fraction(83, 160)  # = 0.51875 exactly
        rnd = random.Random(515)
        for _ in range(1000):
            n = rnd.randint(1, 30)
            mus = [rnd.uniform(0.1, 5.0) for _ in range(n)]
            Ls = [m * rnd.uniform(1.0, 2.9) for m in mus]
            mu, L = sum(mus), sum(Ls)
            iv = step_size_interval(L, mu, n)
            assert iv.sufficient_condition and iv.nonempty  # L < 3*mu by draw
            t = Fraction(rnd.uniform(0.05, 0.95)).limit_denominator(10**6)
            alpha = iv.lower + t * (iv.upper - iv.lower)
            _, hi = young_delta_interval(alpha, L, mu, n)
            s = Fraction(rnd.uniform(0.05, 0.95)).limit_denominator(10**6)
            consts = compute_theta_and_floor(alpha, s * hi, L, mu, n, 0)
            assert 0 < consts.theta < 1

    _report(5, "exact theta, theta in (0,1) over 1000 draws, interval nonempty", check)


def test_criterion_6_convergence_to_neighborhood():
    # at 1e-4 some seeds start too close to the optimum for a factor-1000
    # drop; 1e-5 gives >= 2650x over all 10 seeds while staying fast
    def check():
        for seed in range(10):
            cfg = reference_instance(seed=seed, delta="0.00001")
            x_star = quadratic_optimum(cfg.costs)
            trace = quagd_run(cfg, x_star=x_star)
            residuals = trace.residuals
            plateau = plateau_level(residuals)
            assert residuals[0] / plateau >= 1e3
            theory = default_theory(cfg)
            x_hat = sum(trace.final_estimates) / cfg.graph.n
            bound = float(theory.asymptotic_bound) + 4 * float(cfg.delta.delta)
            assert (x_hat - x_star) ** 2 <= bound

    _report(6, "factor-1000 residual drop and plateau within the theory bound", check)


def test_criterion_7_delta_scaling():
    def check():
        votes = 0
        for seed in range(5):
            cfg = reference_instance(seed=seed)
            report = delta_sweep(cfg, ["0.1", "0.01", "0.001"])
            p = [e.plateau for e in report.entries]
            ordered = p[2] < p[1] < p[0]
            gapped = p[0] >= 2 * p[1] and p[1] >= 2 * p[2]
            votes += ordered and gapped
        assert votes >= 3  # majority of 5 seeds

    _report(7, "plateaus shrink with delta, 2x gaps, majority over 5 seeds", check)


def test_criterion_8_cli_determinism(tmp_path, capsys):
    def check():
        traces = []
        for name in ("first", "second"):
            out = tmp_path / name
            code = cli_main(
                [
                    "run", "--nodes", "10", "--delta", "0.01", "--seed", "11",
                    "--max-iters", "12", "--output-dir", str(out),
                ]
            )
            assert code == 0
            traces.append((out / "trace.csv").read_bytes())
        assert traces[0] == traces[1]

    _report(8, "byte-identical trace CSVs for identical configurations", check)


def test_criterion_9_baseline_agreement():
    def check():
        n = 20
        g = generate_random_strongly_connected(n, 0.2, 99)
        cfg = OptRunConfig(
            graph=g,
            costs=[quadratic_cost(1.0, 4.0)] * n,
            delta="0.000001",
            x0=[7.5] * n,
            max_outer=30,
            master_seed=5,
        )
        quantized = quagd_run(cfg, x_star=4.0)
        baseline = centralized_baseline(cfg)
        tol = 6 * float(cfg.delta.delta)
        for sq, sb in zip(quantized.steps, baseline.steps):
            for a, b in zip(sq.estimates, sb.estimates):
                assert abs(a - b) <= tol

    _report(9, "tracks the unquantized baseline within 6*delta for 30 steps", check)
