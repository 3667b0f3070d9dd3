"""Experiment kit: data generation, metrics, profiles, studies."""

from .generate import (SynthSpec, gen_gaussian_corr, gen_ground_truth,
                       gen_odct, mutual_coherence)
from .metrics import iacc, relerr, rerr, tmse
from .profiles import performance_profile, performance_ratios
from .realdata import (DEFAULT_GAMMA_GRID, Dataset, build_dataset,
                       cross_validate_gamma, load_csv, make_folds,
                       smoke_dataset_path, standardize_columns)
from .rng import make_rng, standard_normal
from .studies import (IdentCell, NoisyRun, StudyResult,
                      finite_identification_study, noisy_tau_study,
                      profile_times)

__all__ = [
    "SynthSpec", "gen_gaussian_corr", "gen_odct", "gen_ground_truth",
    "mutual_coherence", "iacc", "relerr", "rerr", "tmse",
    "performance_profile", "performance_ratios",
    "DEFAULT_GAMMA_GRID", "Dataset", "build_dataset", "cross_validate_gamma",
    "load_csv", "make_folds", "smoke_dataset_path", "standardize_columns",
    "make_rng", "standard_normal",
    "IdentCell", "NoisyRun", "StudyResult", "finite_identification_study",
    "noisy_tau_study", "profile_times",
]
