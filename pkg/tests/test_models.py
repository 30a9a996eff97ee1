import numpy as np
import pytest

from gwsim.measurement import ideal_von_neumann
from gwsim.models import (
    InterpretationModel,
    born_violation_check,
    erasure_experiment,
    nonideal_sweep,
    run_model,
    trial_rng,
)
from gwsim.scenario import (
    OutcomeAssignment,
    ParityConstraint,
    build_schedule,
    standard_frames,
)

TRIALS = 2000


def four_sigma_band(p: float, n: int) -> float:
    return 4.0 * np.sqrt(p * (1.0 - p) / n)


@pytest.fixture(scope="module")
def schedule():
    return build_schedule(10.0, 1.0, ideal_von_neumann())


@pytest.fixture(scope="module")
def frames(schedule):
    return standard_frames(schedule.geometry)


@pytest.fixture(scope="module")
def born_sigma_report(schedule, frames):
    m = InterpretationModel("round_born", frames["sigma"])
    return run_model(schedule, m, TRIALS, seed=11)


class TestInterpretationModel:
    def test_valid_modes(self, frames):
        for mode in ("round_born", "sequential_collapse"):
            assert InterpretationModel(mode, frames["sigma"]).mode == mode

    def test_rejects_unknown_mode(self, frames):
        with pytest.raises(ValueError, match="mode"):
            InterpretationModel("copenhagen", frames["sigma"])


class TestTrialRng:
    def test_same_seed_and_trial_reproduce(self):
        a = trial_rng(42, 7).random(5)
        b = trial_rng(42, 7).random(5)
        np.testing.assert_array_equal(a, b)

    def test_distinct_trials_decorrelate(self):
        a = trial_rng(42, 0).random(5)
        b = trial_rng(42, 1).random(5)
        assert not np.array_equal(a, b)

    def test_distinct_seeds_decorrelate(self):
        a = trial_rng(1, 0).random(5)
        b = trial_rng(2, 0).random(5)
        assert not np.array_equal(a, b)


class TestBornViolationCheck:
    def test_flags_follow_constraint_order(self):
        constraints = [
            ParityConstraint(("x_A", "x_B"), +1),
            ParityConstraint(("x_A", "x_B"), -1),
        ]
        a = OutcomeAssignment((("x_A", +1), ("x_B", +1)))
        assert born_violation_check(a, constraints) == (False, True)


class TestRoundBorn:
    def test_rejects_negative_trials(self, schedule, frames):
        m = InterpretationModel("round_born", frames["sigma"])
        with pytest.raises(ValueError, match="trials"):
            run_model(schedule, m, -1, seed=0)

    def test_zero_trials_gives_empty_report(self, schedule, frames):
        m = InterpretationModel("round_born", frames["sigma"])
        report = run_model(schedule, m, 0, seed=0)
        assert report.assignments == ()
        assert report.violation_rate(0) == 0.0
        assert report.trials_violating_nonpreferred == 0

    def test_reports_the_four_constraints(self, born_sigma_report):
        keys = {(c.slots, c.required_product) for c in born_sigma_report.constraints}
        assert keys == {
            (("x_A", "x_B", "x_C"), -1),
            (("x_A", "z_B", "z_C"), +1),
            (("z_A", "x_B", "z_C"), +1),
            (("z_A", "z_B", "x_C"), +1),
        }

    def test_preferred_mask_marks_exactly_the_rest_frame_constraint(
        self, born_sigma_report
    ):
        assert sum(born_sigma_report.preferred_mask) == 1
        (index,) = [i for i, p in enumerate(born_sigma_report.preferred_mask) if p]
        assert born_sigma_report.constraints[index].slots == ("x_A", "x_B", "x_C")

    def test_assignments_cover_all_six_slots(self, born_sigma_report):
        for assignment in born_sigma_report.assignments[:50]:
            assert sorted(assignment.as_dict()) == [
                "x_A",
                "x_B",
                "x_C",
                "z_A",
                "z_B",
                "z_C",
            ]

    def test_preferred_constraint_never_violated(self, born_sigma_report):
        (index,) = [i for i, p in enumerate(born_sigma_report.preferred_mask) if p]
        assert born_sigma_report.violation_counts[index] == 0

    def test_nonpreferred_constraints_violated_half_the_time(self, born_sigma_report):
        band = four_sigma_band(0.5, TRIALS)
        for i, preferred in enumerate(born_sigma_report.preferred_mask):
            if preferred:
                continue
            assert born_sigma_report.violation_rate(i) == pytest.approx(0.5, abs=band)

    def test_every_trial_violates_some_nonpreferred_constraint(self, born_sigma_report):
        assert born_sigma_report.trials_violating_nonpreferred == TRIALS

    def test_tilted_preferred_frame_swaps_the_protected_constraint(self, schedule, frames):
        m = InterpretationModel("round_born", frames["sigma_p"])
        report = run_model(schedule, m, 400, seed=3)
        (index,) = [i for i, p in enumerate(report.preferred_mask) if p]
        assert report.constraints[index].slots == ("x_A", "z_B", "z_C")
        assert report.violation_counts[index] == 0
        assert report.trials_violating_nonpreferred == 400

    def test_same_seed_reproduces_assignments(self, schedule, frames, born_sigma_report):
        m = InterpretationModel("round_born", frames["sigma"])
        again = run_model(schedule, m, TRIALS, seed=11)
        assert again.assignments == born_sigma_report.assignments
        assert again.violation_counts == born_sigma_report.violation_counts

    def test_different_seed_changes_assignments(self, schedule, frames, born_sigma_report):
        m = InterpretationModel("round_born", frames["sigma"])
        other = run_model(schedule, m, TRIALS, seed=12)
        assert other.assignments != born_sigma_report.assignments


@pytest.fixture(scope="module")
def collapse_report(schedule, frames):
    m = InterpretationModel("sequential_collapse", frames["sigma"])
    return run_model(schedule, m, TRIALS, seed=19)


class TestSequentialCollapse:
    def test_assignments_cover_all_six_slots(self, collapse_report):
        for assignment in collapse_report.assignments[:50]:
            assert sorted(assignment.as_dict()) == [
                "x_A",
                "x_B",
                "x_C",
                "z_A",
                "z_B",
                "z_C",
            ]

    def test_even_the_preferred_constraint_fails_half_the_time(self, collapse_report):
        # Collapse after the friends' round kills the three-way coherence, so
        # the outsiders' odd-parity rule holds only by chance.
        (index,) = [i for i, p in enumerate(collapse_report.preferred_mask) if p]
        band = four_sigma_band(0.5, TRIALS)
        assert collapse_report.violation_rate(index) == pytest.approx(0.5, abs=band)

    def test_outsider_outcomes_are_individually_unbiased(self, collapse_report):
        band = four_sigma_band(0.5, TRIALS)
        for slot in ("x_A", "x_B", "x_C"):
            ups = sum(a.value(slot) == +1 for a in collapse_report.assignments)
            assert ups / TRIALS == pytest.approx(0.5, abs=band)

    def test_friend_records_match_z_statistics(self, collapse_report):
        band = four_sigma_band(0.5, TRIALS)
        for slot in ("z_A", "z_B", "z_C"):
            ups = sum(a.value(slot) == +1 for a in collapse_report.assignments)
            assert ups / TRIALS == pytest.approx(0.5, abs=band)

    def test_same_seed_reproduces(self, schedule, frames, collapse_report):
        m = InterpretationModel("sequential_collapse", frames["sigma"])
        again = run_model(schedule, m, TRIALS, seed=19)
        assert again.assignments == collapse_report.assignments


class TestErasure:
    def test_exact_down_probability_is_half(self):
        report = erasure_experiment(50, seed=1)
        assert report.exact_down_probability == pytest.approx(0.5, abs=1e-12)

    def test_down_frequency_tracks_the_exact_value(self):
        report = erasure_experiment(TRIALS, seed=5)
        band = four_sigma_band(0.5, TRIALS)
        assert report.down_frequency == pytest.approx(0.5, abs=band)

    def test_counts_are_consistent(self):
        report = erasure_experiment(500, seed=5)
        assert report.door_counts[+1] + report.door_counts[-1] == 500
        assert report.door_counts[0] == 0
        assert report.pair_x_counts[+1] + report.pair_x_counts[-1] == 500

    def test_pair_x_outcomes_are_balanced(self):
        report = erasure_experiment(TRIALS, seed=5)
        band = four_sigma_band(0.5, TRIALS)
        assert report.pair_x_counts[+1] / TRIALS == pytest.approx(0.5, abs=band)

    def test_skipping_the_outsider_leaves_the_record_intact(self):
        report = erasure_experiment(500, seed=1, skip_pair_x=True)
        assert report.exact_down_probability == 0.0
        assert report.door_counts == {+1: 500, -1: 0, 0: 0}
        assert report.pair_x_counts == {+1: 0, -1: 0}
        assert report.down_frequency == 0.0

    def test_zero_trials(self):
        report = erasure_experiment(0, seed=1)
        assert report.down_frequency == 0.0
        assert report.exact_down_probability == pytest.approx(0.5, abs=1e-12)

    def test_same_seed_reproduces_counts(self):
        a = erasure_experiment(300, seed=8)
        b = erasure_experiment(300, seed=8)
        assert a.door_counts == b.door_counts
        assert a.pair_x_counts == b.pair_x_counts


class TestNonidealSweep:
    def test_single_model_is_the_ideal_baseline(self):
        report = nonideal_sweep(1, seed=0)
        assert report.n_models == 1
        assert report.results[0].kind == "ideal"
        assert report.results[0].passed
        assert report.all_passed

    def test_random_models_reproduce_the_contradiction(self):
        report = nonideal_sweep(4, seed=21)
        assert [r.kind for r in report.results] == ["ideal", "haar", "haar", "haar"]
        for result in report.results:
            assert result.constraints_match
            assert result.satisfying_count == 0
            assert result.support_ok
        assert report.n_passed == 4
        assert report.all_passed

    def test_rejects_empty_sweep(self):
        with pytest.raises(ValueError, match="at least one"):
            nonideal_sweep(0, seed=0)

    def test_same_seed_reproduces(self):
        a = nonideal_sweep(3, seed=9)
        b = nonideal_sweep(3, seed=9)
        assert a.results == b.results
