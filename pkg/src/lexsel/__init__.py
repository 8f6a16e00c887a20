"""Cross-lingual lexical selection: discovery, models, rules, study, analysis."""

from .corpus import CorpusConfig, SentencePair, Token, is_excluded, load_corpus
from .discovery import (
    AlignmentCounts,
    ChoiceStats,
    FocusWord,
    accumulate_counts,
    discover,
    entropy,
    filter_entropy,
    filter_frequency,
    filter_sense,
    merge_choice_variants,
)
from .evaluation import cross_validate, evaluate, frequency_baseline, shortlist_study_words
from .features import Dataset, Example, FeatureKey, build_dataset, featurize, neighborhood, stratified_split
from .lme import LMEFit, fit_lme
from .rules import GlossMap, Rule, RuleSet, extract_rules, match_rules, render_rules
from .svm import DEFAULT_GRID, Hyperparams, LinearOvRModel, train_linear_svm
from .tree import DTreeModel, TreeHyperparams, train_decision_tree
from .study import (
    StudyConfig,
    Study,
    TrialRecord,
    AnnotationRecord,
    assign_conditions,
    fleiss_kappa,
    representative_filter,
)
from .analysis import first_n_slice, per_word_effect, rule_effect_report

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
