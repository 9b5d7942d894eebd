"""Naive Bayesian ensembles for supervised word sense disambiguation.

Each ensemble member is a Bernoulli Naive Bayes classifier over binary
co-occurrence features drawn from its own left/right window of context.
Members are chosen per window range category by held-out accuracy and the
ensemble decides by plurality vote.
"""

from wsd_ensemble.corpus import (
    Corpus,
    Instance,
    normalize,
    parse_corpus,
    read_corpus,
    sense_distribution,
    uniform_subsample,
    write_corpus,
)
from wsd_ensemble.ensemble import (
    ClassifierGrid,
    Ensemble,
    VoteRule,
    classify_batch,
    select_members,
    train_grid,
    vote,
)
from wsd_ensemble.errors import WSDError
from wsd_ensemble.evaluation import (
    ExperimentConfig,
    ExperimentReport,
    FoldPlan,
    accuracy,
    make_fold_plan,
    mcnemar,
    run_experiment,
)
from wsd_ensemble.features import (
    WINDOW_SIZES,
    RangeCategory,
    WindowSpec,
    category_of,
    extract,
    grid_specs,
)
from wsd_ensemble.naive_bayes import (
    NBModel,
    classify,
    load_model,
    log_joint,
    save_model,
    train,
)

__version__ = "0.1.0"

__all__ = [
    "ClassifierGrid",
    "Corpus",
    "Ensemble",
    "ExperimentConfig",
    "ExperimentReport",
    "FoldPlan",
    "Instance",
    "NBModel",
    "RangeCategory",
    "VoteRule",
    "WINDOW_SIZES",
    "WSDError",
    "WindowSpec",
    "accuracy",
    "category_of",
    "classify",
    "classify_batch",
    "extract",
    "grid_specs",
    "load_model",
    "log_joint",
    "make_fold_plan",
    "mcnemar",
    "normalize",
    "parse_corpus",
    "read_corpus",
    "run_experiment",
    "save_model",
    "select_members",
    "sense_distribution",
    "train",
    "train_grid",
    "uniform_subsample",
    "vote",
    "write_corpus",
]
