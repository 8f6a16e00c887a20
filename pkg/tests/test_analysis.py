from __future__ import annotations

import itertools
import math

import numpy as np
import pytest

from lexsel.analysis import (
    LMESpec,
    RESPONSE_CONFIDENCE,
    CellAggregate,
    first_n_slice,
    fit_rule_effect,
    per_word_effect,
    report_to_csv,
    rule_effect_report,
)
from lexsel.lme import LMEError, fit_lme, profile_loglik, significance_stars
from lexsel.study import CONDITION_NO_RULES, CONDITION_RULES, TrialRecord


def trial(learner, word, position, correct, confidence=3, condition=CONDITION_RULES,
          word_order=1):
    return TrialRecord(
        learner=learner, word=word, example_id=f"{word}:{position}",
        position=position, word_order=word_order, shown_choices=("a", "b"),
        selected="a" if correct else "b", correct=correct, confidence=confidence,
        condition=condition, timestamp=0.0)


class TestFirstNSlice:
    def test_accuracy_over_all(self):
        trials = [trial("l", "w", p, correct=(p <= 7)) for p in range(1, 11)]
        cells = first_n_slice(trials, None)
        assert len(cells) == 1
        assert cells[0].accuracy == pytest.approx(0.7)

    def test_slicing_uses_only_first_positions(self):
        trials = [trial("l", "w", p, correct=(p <= 5)) for p in range(1, 11)]
        cells = first_n_slice(trials, 5)
        assert cells[0].accuracy == 1.0
        assert cells[0].n_trials == 5

    def test_confidence_excludes_incorrect(self):
        trials = [
            trial("l", "w", 1, correct=True, confidence=5),
            trial("l", "w", 2, correct=False, confidence=1),
            trial("l", "w", 3, correct=True, confidence=3),
        ]
        cells = first_n_slice(trials, None)
        assert cells[0].confidence_on_correct == pytest.approx(4.0)

    def test_all_wrong_confidence_is_none(self):
        trials = [trial("l", "w", 1, correct=False)]
        assert first_n_slice(trials, None)[0].confidence_on_correct is None

    def test_n_all_equals_unsliced(self):
        trials = [trial("l", "w", p, correct=bool(p % 2)) for p in range(1, 14)]
        assert first_n_slice(trials, None) == first_n_slice(trials, 13)

    def test_fewer_than_n_uses_available(self):
        trials = [trial("l", "w", p, correct=True) for p in range(1, 4)]
        cells = first_n_slice(trials, 50)
        assert cells[0].n_trials == 3


def simulate_zero_variance_cells(beta=0.1, n_learners=9, n_words=9, sd_resid=0.15,
                                 intercept=0.65, seed=0):
    """Cells whose noise is orthogonal to both groupings and the design.

    Projecting the noise out of span{1, rules, learner dummies, word dummies}
    zeroes every group sum, so the variance MLE sits exactly on the boundary
    and the GLS estimate must coincide with plain least squares.
    """
    rng = np.random.default_rng(seed)
    rows = [(l, w, (l + w) % 2 == 0) for l in range(n_learners)
            for w in range(n_words)]
    X = np.column_stack([np.ones(len(rows)), [r for _, _, r in rows]])
    Zl = np.zeros((len(rows), n_learners))
    Zw = np.zeros((len(rows), n_words))
    for i, (l, w, _) in enumerate(rows):
        Zl[i, l] = 1.0
        Zw[i, w] = 1.0
    basis = np.column_stack([X, Zl, Zw])
    e = rng.normal(0, sd_resid, len(rows))
    e = e - basis @ np.linalg.lstsq(basis, e, rcond=None)[0]
    cells = []
    for i, (l, w, rules) in enumerate(rows):
        cells.append(CellAggregate(
            learner=f"L{l}", word=f"w{w}",
            condition=CONDITION_RULES if rules else CONDITION_NO_RULES,
            word_order=w + 1, n_trials=10,
            accuracy=float(intercept + beta * rules + e[i]),
            confidence_on_correct=3.0))
    return cells


def simulate_cells(beta=0.1, n_learners=9, n_words=9, sd_learner=0.1, sd_word=0.1,
                   sd_resid=0.15, intercept=0.65, seed=0):
    rng = np.random.default_rng(seed)
    a = rng.normal(0, sd_learner, n_learners)
    b = rng.normal(0, sd_word, n_words)
    cells = []
    for l in range(n_learners):
        for w in range(n_words):
            rules = (l + w) % 2 == 0
            y = intercept + beta * rules + a[l] + b[w] + rng.normal(0, sd_resid)
            cells.append(CellAggregate(
                learner=f"L{l}", word=f"w{w}",
                condition=CONDITION_RULES if rules else CONDITION_NO_RULES,
                word_order=w + 1, n_trials=10, accuracy=float(y),
                confidence_on_correct=3.0 + float(rng.normal(0, 0.2))))
    return cells


class TestFitLME:
    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_zero_variance_reduces_to_ols(self, seed):
        cells = simulate_zero_variance_cells(seed=seed)
        fit = fit_rule_effect(cells, LMESpec(random_intercepts=("learner", "word")))
        assert all(v < 1e-8 for v in fit.variance_components.values())
        y = np.array([c.accuracy for c in cells])
        X = np.column_stack([np.ones(len(cells)),
                             [c.condition == CONDITION_RULES for c in cells]])
        ols = np.linalg.lstsq(X, y, rcond=None)[0]
        assert abs(fit.effect - ols[1]) < 1e-6
        assert abs(fit.intercept - ols[0]) < 1e-6

    def test_near_zero_true_variances_stay_small(self):
        cells = simulate_cells(sd_learner=0.0, sd_word=0.0, seed=4)
        fit = fit_rule_effect(cells, LMESpec(random_intercepts=("learner", "word")))
        assert all(v < 0.01 for v in fit.variance_components.values())

    def test_loglik_at_least_ols_start(self):
        cells = simulate_cells(seed=5)
        fit = fit_rule_effect(cells, LMESpec(random_intercepts=("learner", "word")))
        y = np.array([c.accuracy for c in cells])
        X = np.column_stack([np.ones(len(cells)),
                             [c.condition == CONDITION_RULES for c in cells]])
        resid = y - X @ np.linalg.lstsq(X, y, rcond=None)[0]
        s2 = float(resid @ resid) / len(y)
        ols_ll = profile_loglik(np.array([s2]), y, X, [])
        assert fit.loglik >= ols_ll - 1e-8

    def test_permutation_invariance(self):
        cells = simulate_cells(seed=6)
        spec = LMESpec(random_intercepts=("learner", "word"))
        fit1 = fit_rule_effect(cells, spec)
        fit2 = fit_rule_effect(list(reversed(cells)), spec)
        assert fit1.effect == pytest.approx(fit2.effect, abs=1e-8)
        assert fit1.loglik == pytest.approx(fit2.loglik, abs=1e-6)

    def test_profile_loglik_beats_coarse_grid(self):
        cells = simulate_cells(seed=7, n_learners=6, n_words=6)
        spec = LMESpec(random_intercepts=("learner", "word"))
        fit = fit_rule_effect(cells, spec)
        y = np.array([c.accuracy for c in cells])
        X = np.column_stack([np.ones(len(cells)),
                             [c.condition == CONDITION_RULES for c in cells]])
        from lexsel.lme import _group_indicator

        Zl = _group_indicator([c.learner for c in cells])
        Zw = _group_indicator([c.word for c in cells])
        ZZts = [Zl @ Zl.T, Zw @ Zw.T]
        var_y = float(np.var(y))
        grid = np.linspace(0, var_y, 11)
        best_grid = -np.inf
        for s1, s2, s3 in itertools.product(grid, grid, grid[1:]):
            best_grid = max(best_grid,
                            profile_loglik(np.array([s1, s2, s3]), y, X, ZZts))
        assert fit.loglik >= best_grid - 1e-6

    def test_rank_deficient_design_rejected(self):
        y = np.arange(4.0)
        X = np.column_stack([np.ones(4), np.ones(4)])
        with pytest.raises(LMEError, match="rank"):
            fit_lme(y, X, {})

    def test_single_level_grouping_rejected(self):
        y = np.arange(4.0)
        X = np.column_stack([np.ones(4), [0.0, 1, 0, 1]])
        with pytest.raises(LMEError, match="levels"):
            fit_lme(y, X, {"learner": ["same"] * 4})

    def test_wald_p_monotone_in_z(self):
        from scipy import stats

        zs = [0.1, 0.5, 1.0, 2.0, 3.0]
        ps = [2 * stats.norm.sf(z) for z in zs]
        assert ps == sorted(ps, reverse=True)

    def test_recovers_positive_effect(self):
        cells = simulate_cells(beta=0.25, sd_resid=0.05, seed=8)
        fit = fit_rule_effect(cells, LMESpec(random_intercepts=("learner", "word")))
        assert 0.15 < fit.effect < 0.35
        assert fit.p_value < 0.01


class TestRuleEffectReport:
    def make_trials(self, effect=0.25, seed=0):
        rng = np.random.default_rng(seed)
        trials = []
        for l in range(6):
            for w in range(6):
                rules = (l + w) % 2 == 0
                condition = CONDITION_RULES if rules else CONDITION_NO_RULES
                p = 0.6 + (effect if rules else 0.0)
                for pos in range(1, 13):
                    correct = bool(rng.random() < p)
                    trials.append(TrialRecord(
                        learner=f"L{l}", word=f"w{w}", example_id=f"{w}:{pos}",
                        position=pos, word_order=w + 1, shown_choices=("a", "b"),
                        selected="a", correct=correct,
                        confidence=int(rng.integers(1, 6)), condition=condition,
                        timestamp=0.0))
        return trials

    def test_report_shape_and_stars(self):
        report = rule_effect_report(self.make_trials(), n_list=(5, 10, None))
        assert [row["n"] for row in report["table"]] == [5, 10, "all"]
        for row in report["table"]:
            assert set(row) >= {"intercept", "beta", "p_value", "stars"}
            assert row["stars"] == significance_stars(row["p_value"])
        assert set(report["curves"]["5"]) == {CONDITION_RULES, CONDITION_NO_RULES}

    def test_positive_effect_detected(self):
        report = rule_effect_report(self.make_trials(effect=0.3), n_list=(10,))
        row = report["table"][0]
        assert row["beta"] > 0.15
        assert row["p_value"] < 0.05

    def test_single_condition_errors(self):
        trials = [t for t in self.make_trials() if t.condition == CONDITION_RULES]
        with pytest.raises(LMEError, match="not estimable"):
            rule_effect_report(trials, n_list=(5,))

    def test_csv_emission(self):
        report = rule_effect_report(self.make_trials(), n_list=(5, None))
        csv = report_to_csv(report)
        lines = csv.strip().splitlines()
        assert lines[0].startswith("n,intercept,beta")
        assert len(lines) == 3

    def test_constant_shift_recovered_across_n(self):
        report = rule_effect_report(self.make_trials(effect=0.25, seed=3),
                                    n_list=(10, None))
        for row in report["table"]:
            assert row["beta"] == pytest.approx(0.25, abs=0.1)


class TestPerWordEffect:
    def test_per_word_shapes_and_signs(self):
        rng = np.random.default_rng(2)
        trials = []
        for w, effect in (("easy", 0.0), ("hard", 0.35)):
            for l in range(8):
                rules = l % 2 == 0
                condition = CONDITION_RULES if rules else CONDITION_NO_RULES
                p = 0.55 + (effect if rules else 0.0)
                for pos in range(1, 21):
                    trials.append(TrialRecord(
                        learner=f"L{l}", word=w, example_id=f"{w}:{l}:{pos}",
                        position=pos, word_order=1, shown_choices=("a", "b"),
                        selected="a", correct=bool(rng.random() < p),
                        confidence=3, condition=condition, timestamp=0.0))
        effects = per_word_effect(trials, n=20, model_accuracy={"easy": 0.9})
        assert set(effects) == {"easy", "hard"}
        assert effects["hard"]["beta"] > effects["easy"]["beta"]
        assert abs(effects["easy"]["beta"]) <= 2 * effects["easy"]["se"] + 0.05
        assert effects["easy"]["model_accuracy"] == 0.9
        assert effects["hard"]["model_accuracy"] is None
        assert 0 <= effects["hard"]["baseline_accuracy"] <= 1

    def test_missing_condition_raises(self):
        trials = [trial("l1", "w", p, correct=True) for p in range(1, 4)]
        trials += [trial("l2", "w", p, correct=False) for p in range(1, 4)]
        with pytest.raises(LMEError, match="w"):
            per_word_effect(trials, n=20)


class TestConfidenceResponse:
    def test_confidence_fit_uses_scale(self):
        rng = np.random.default_rng(12)
        cells = simulate_cells(seed=11)
        # plant a confidence gap of 1.0 between the conditions
        cells = [
            CellAggregate(c.learner, c.word, c.condition, c.word_order, c.n_trials,
                          c.accuracy,
                          (4.0 if c.condition == CONDITION_RULES else 3.0)
                          + float(rng.normal(0, 0.15)))
            for c in cells
        ]
        fit = fit_rule_effect(cells, LMESpec(response=RESPONSE_CONFIDENCE,
                                             random_intercepts=("learner",)))
        assert fit.effect == pytest.approx(1.0, abs=0.1)
