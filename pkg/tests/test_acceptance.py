"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the per-criterion
lines and timings.  Every tolerance is pinned here; seeds are fixed so each
criterion is a deterministic check.
"""

import hashlib
import math
import time

import numpy as np
import pytest

from bellsim.behaviors import (
    behavior_from_quantum,
    behavior_s,
    no_signaling,
    pr_box,
    random_no_signaling_behavior,
)
from bellsim.cli import EXIT_INFEASIBLE, EXIT_OK, main
from bellsim.core import (
    CounterfactualTable,
    b_statistic,
    project_bundle,
    row_c_values,
    s_statistic,
)
from bellsim.feasibility import (
    ReshuffleProblem,
    chsh_certificate,
    fine_feasible_lp,
    reshuffle_feasible,
    reshuffle_problem_from_table,
)
from bellsim.lhv import boundary_mixture_model, exact_lhv_s, sign_cosine_model
from bellsim.quantum import (
    TSIRELSON_BOUND,
    AngleQuadruple,
    optimize_angles,
    random_density_matrix,
    s_quantum,
    singlet,
)
from bellsim.stats import ViolationStudy, generator_from_lhv, violation_frequency
from bellsim.weak import PointerConfig, per_pair_b_values_calibrated, per_pair_b_values_lhv

SUB_BOUNDARY_ANGLES = (0.0, math.pi / 20, math.pi, 5 * math.pi / 4)  # exact S = 1.8


class _Gate:
    def __init__(self, number: int, name: str, budget: float | None = None):
        self.number = number
        self.name = name
        self.budget = budget
        self.start = time.perf_counter()

    def finish(self, detail: str) -> None:
        elapsed = time.perf_counter() - self.start
        print(f"PASS  criterion-{self.number:02d} {self.name}: {detail} [{elapsed:.2f}s]")
        if self.budget is not None:
            assert elapsed <= self.budget, (
                f"criterion {self.number} exceeded its runtime budget: "
                f"{elapsed:.1f}s > {self.budget}s"
            )

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc, tb):
        if exc_type is not None:
            elapsed = time.perf_counter() - self.start
            print(f"FAIL  criterion-{self.number:02d} {self.name} [{elapsed:.2f}s]")
        return False


def test_criterion_01_finite_sample_b_bound():
    with _Gate(1, "finite-sample-B-bound", budget=10.0) as gate:
        rng = np.random.default_rng(101)
        tables = 10_000
        worst = 0.0
        for _ in range(tables):
            n = int(np.exp(rng.uniform(0.0, math.log(10_000.0))))
            outcomes = rng.integers(0, 2, size=(max(n, 1), 4), dtype=np.int8) * 2 - 1
            table = CounterfactualTable(outcomes)
            c_values = row_c_values(table)
            assert (np.abs(c_values) == 2).all(), "row C left {-2, +2}"
            value = abs(b_statistic(table))
            worst = max(worst, value)
            assert value <= 2.0, f"|B| = {value} > 2"
        gate.finish(f"{tables} random tables, max |B| = {worst:.6f} <= 2, all C in {{-2,+2}}")


def test_criterion_02_tsirelson_reachability():
    with _Gate(2, "tsirelson-reachability", budget=5.0) as gate:
        angles, value = optimize_angles(singlet(), grid_points=16, refine_iters=64)
        error = abs(value - TSIRELSON_BOUND)
        assert error <= 1e-6, f"|S| off Tsirelson bound by {error:.2e}"
        assert abs(abs(s_quantum(singlet(), angles)) - value) <= 1e-9
        gate.finish(f"optimize_angles(singlet) -> |S| = {value:.12f}, error {error:.1e} <= 1e-6")


def test_criterion_03_tsirelson_ceiling():
    with _Gate(3, "tsirelson-ceiling") as gate:
        rng = np.random.default_rng(303)
        worst = 0.0
        for _ in range(1000):
            rho = random_density_matrix(rng)
            angles = AngleQuadruple(*rng.uniform(0.0, 2.0 * math.pi, size=4))
            worst = max(worst, abs(s_quantum(rho, angles)))
            assert worst <= TSIRELSON_BOUND + 1e-9
        gate.finish(f"1000 random states x angles, max |S| = {worst:.6f} <= 2*sqrt(2) + 1e-9")


def test_criterion_04_boundary_fifty_percent():
    with _Gate(4, "boundary-50-percent", budget=120.0) as gate:
        model = boundary_mixture_model()
        assert exact_lhv_s(model) == 2.0
        study = ViolationStudy(
            generator_from_lhv(model), n_per_context=10_000, trials=10_000, seed=404
        )
        result = violation_frequency(study)
        assert 0.48 <= result.violation_frequency <= 0.52, (
            f"violation frequency {result.violation_frequency} outside [0.48, 0.52]"
        )
        gate.finish(
            f"exact S = 2 mixture: P(S-hat > 2) = {result.violation_frequency:.4f} in [0.48, 0.52]"
        )


def test_criterion_05_significance_decay():
    with _Gate(5, "significance-decay", budget=120.0) as gate:
        model = sign_cosine_model(*SUB_BOUNDARY_ANGLES)
        exact = exact_lhv_s(model)
        assert exact == pytest.approx(1.8, abs=1e-8), "generator is not at S = 1.8"
        generator = generator_from_lhv(model)
        small = violation_frequency(ViolationStudy(generator, 100, trials=1000, seed=505))
        large = violation_frequency(ViolationStudy(generator, 10_000, trials=1000, seed=505))
        assert large.violation_frequency < 0.01, (
            f"frequency at n=1e4 is {large.violation_frequency} >= 0.01"
        )
        assert large.violation_frequency < small.violation_frequency, (
            "violation did not become less frequent with larger n"
        )
        gate.finish(
            f"S = 1.8: frequency {small.violation_frequency:.3f} (n=100) -> "
            f"{large.violation_frequency:.4f} (n=1e4) < 0.01"
        )


def test_criterion_06_fine_oracle_equivalence():
    with _Gate(6, "fine-oracle-equivalence", budget=30.0) as gate:
        rng = np.random.default_rng(606)
        feasible_count = 0
        for _ in range(1000):
            behavior = random_no_signaling_behavior(rng)
            result = fine_feasible_lp(behavior)
            certificate = chsh_certificate(behavior)
            assert result.feasible == (certificate <= 2.0 + 1e-9), (
                f"LP said {result.status} but certificate = {certificate}"
            )
            if result.feasible:
                feasible_count += 1
                assert result.residual <= 1e-8, f"witness residual {result.residual:.2e}"
        gate.finish(
            f"1000 no-signaling behaviors: LP == (certificate <= 2) on every instance "
            f"({feasible_count} feasible, residuals <= 1e-8)"
        )


def test_criterion_07_cbd_bound_and_pr_box():
    with _Gate(7, "cbd-bound-and-pr-box") as gate:
        box = pr_box()
        assert behavior_s(box) == 4.0  # exact float arithmetic
        report = no_signaling(box)
        assert report.max_deficit == 0.0
        result = fine_feasible_lp(box)
        assert not result.feasible
        assert result.certificate.value == pytest.approx(4.0, abs=1e-12)
        # quantum behaviors stay within and below the a priori bound
        quantum = behavior_from_quantum(singlet(), optimize_angles(singlet())[0])
        assert abs(behavior_s(quantum)) <= 4.0
        gate.finish("behavior_s(pr_box) = 4 exactly, no-signaling deficit 0, LP infeasible")


def test_criterion_08_reshuffling():
    with _Gate(8, "reshuffling") as gate:
        rng = np.random.default_rng(808)
        for _ in range(5):
            table = CounterfactualTable(rng.choice([-1, 1], size=(100, 4)))
            result = reshuffle_feasible(reshuffle_problem_from_table(table))
            assert result.feasible, "projected table must be reshuffle-feasible at slack 0"
        pr_counts = np.array([[50, 0, 0, 50]] * 3 + [[0, 50, 50, 0]])
        box_result = reshuffle_feasible(ReshuffleProblem(pr_counts, 0.0))
        assert not box_result.feasible, "ideal PR-box counts must be infeasible at slack 0"
        gate.finish(
            "projected tables feasible at slack 0; PR-box counts (N=100/context) infeasible"
        )


def test_criterion_09_per_pair_b_values():
    with _Gate(9, "per-pair-B-values") as gate:
        config = PointerConfig(coupling=1.0, noise_sd=1.0)
        run = per_pair_b_values_calibrated(TSIRELSON_BOUND, config, 10_000, seed=909)
        exceedance = float((run.b_values > TSIRELSON_BOUND).mean())
        assert 0.48 <= exceedance <= 0.52, f"exceedance {exceedance} outside [0.48, 0.52]"

        model = sign_cosine_model(*SUB_BOUNDARY_ANGLES)
        from bellsim.lhv import sample_counterfactual_table

        table = sample_counterfactual_table(model, 100_000, seed=910)
        lhv_run = per_pair_b_values_lhv(table, config, seed=911)
        se = float(lhv_run.b_values.std(ddof=1)) / math.sqrt(len(lhv_run))
        gap = abs(float(lhv_run.b_values.mean()) - b_statistic(table))
        assert gap <= 4.0 * se, f"mean b-value off B by {gap:.4f} > 4*SE = {4 * se:.4f}"
        gate.finish(
            f"calibrated 2*sqrt(2): exceedance {exceedance:.4f} in [0.48, 0.52]; "
            f"LHV mean within {gap / se:.2f} SE of B over 1e5 rows"
        )


def test_criterion_10_identity_bridge():
    with _Gate(10, "identity-bridge") as gate:
        rng = np.random.default_rng(1010)
        worst = 0.0
        for _ in range(100):
            n = int(rng.integers(1, 2000))
            table = CounterfactualTable(rng.choice([-1, 1], size=(n, 4)))
            gap = abs(s_statistic(project_bundle(table)) - b_statistic(table))
            worst = max(worst, gap)
            assert gap <= 1e-12
        gate.finish(f"100 random tables: max |S(projection) - B| = {worst:.2e} <= 1e-12")


def _digest_dir(path):
    return {p.name: hashlib.sha256(p.read_bytes()).hexdigest() for p in sorted(path.iterdir())}


def test_criterion_11_cli_reproducibility(tmp_path):
    with _Gate(11, "cli-reproducibility") as gate:
        behavior_file = tmp_path / "box.txt"
        from bellsim.fileio import write_behavior

        write_behavior(behavior_file, pr_box())
        commands = {
            "simulate-lhv": (
                ["simulate-lhv", "--variant", "boundary_mixture", "--n", "500", "--seed", "11"],
                EXIT_OK,
            ),
            "simulate-quantum": (
                ["simulate-quantum", "--state", "singlet", "--n", "500", "--seed", "11"],
                EXIT_OK,
            ),
            "feasibility": (
                ["feasibility", "--behavior", str(behavior_file)],
                EXIT_INFEASIBLE,
            ),
            "violation-curve": (
                ["violation-curve", "--generator", "boundary_mixture", "--n", "100", "300",
                 "--trials", "200", "--seed", "11"],
                EXIT_OK,
            ),
            "weak-bvalues": (
                ["weak-bvalues", "--source", "calibrated", "--target-s", "2.8284271247461903",
                 "--n", "1000", "--seed", "11"],
                EXIT_OK,
            ),
        }
        for name, (argv, expected_code) in commands.items():
            first = tmp_path / f"{name}-1"
            second = tmp_path / f"{name}-2"
            assert main(argv + ["--out", str(first)]) == expected_code
            assert main(argv + ["--out", str(second)]) == expected_code
            assert _digest_dir(first) == _digest_dir(second), f"{name} outputs differ on rerun"
        gate.finish("all five subcommands byte-identical across reruns")
