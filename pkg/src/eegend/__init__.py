"""Entropy-difference EEG channel selection and a two-class detection pipeline.

The package is organised by stage:

- :mod:`eegend.signals`: recordings, segmentation, I/O and a synthetic generator
- :mod:`eegend.ranking`: histogram entropy and entropy-difference channel ranking
- :mod:`eegend.dwt`, :mod:`eegend.emd`, :mod:`eegend.slbp`: signal decompositions
- :mod:`eegend.features`: feature vectors, z-scoring, chi-square selection
- :mod:`eegend.classifiers`: k-NN, RBF-SVM and a bagged-tree ensemble
- :mod:`eegend.evaluation`: split plans, metrics and the end-to-end pipeline
"""

from .errors import ConfigError, ConvergenceError, DataError, EegendError
from .signals import (
    ADHD, CANONICAL_CHANNELS, HC, Dataset, Recording, Segment, SynthSpec, from_arrays,
    load_dataset, save_dataset, segment_dataset, synthesize_dataset, write_synthetic,
)
from .ranking import (
    ChannelRanking, channel_entropy, entropy_bits, estimate_pmf, rank_by_end,
    rank_by_entropy, rank_channels, select_channels,
)
from .dwt import dwt_multilevel, idwt_multilevel
from .emd import emd_decompose
from .slbp import slbp_histogram
from .features import (
    FeatureMatrix, chi_square_select, extract_features, fit_standardizer, stat_features,
)
from .classifiers import ens_train, knn_train, svm_train, train_classifier
from .evaluation import (
    EvaluationReport, PipelineConfig, SplitPlan, compute_metrics, plan_splits, run_grid,
    run_pipeline, sweep_channels,
)

__version__ = "0.1.0"
