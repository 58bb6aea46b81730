"""Set estimators for binary classification built on adaptive dyadic trees."""

from .data import DataError, Dataset, LabeledSample, read_csv, write_csv
from .decorate import (
    DecorationResult,
    best_hcell,
    candidate_hyperplanes,
    decorated_energy,
    extract_decorated_classifier,
)
from .dp import EnergyTable, brute_force_energy, compute_energy, extract_classifier, extract_tree
from .empirical import (
    Box,
    BoxUnion,
    GridClassifier,
    SetClassifier,
    empirical_risk,
    epsilon_finite,
    epsilon_vc,
    eta_bar,
    rho_bar,
)
from .forest import CompleteTree, OccupancyForest, build_forest, enumerate_subtrees, leaves, refinement_count
from .geometry import DyadicCube, HCell, Hyperplane, children, cube_contains, locate, side_of
from .oracle import DyadicStripe, Massart, RiskReport, SignedPower, make_oracle
from .select import SelectionReport, select_model, select_uniform, split_halves, uniform_baseline

__version__ = "0.1.0"
