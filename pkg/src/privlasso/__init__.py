"""Differentially private sparse L1-constrained logistic regression."""

from .core import Dataset, LogisticLoss, bce_gradient, bce_loss, hessian_vector_inf_norm, sigmoid
from .data import (
    SyntheticSpec,
    generate_synthetic,
    load_libsvm,
    normalize_rows,
    parse_libsvm,
    scale_features,
    split,
)
from .frank_wolfe import (
    FwConfig,
    duality_gap,
    laplace_noise_scale,
    nonprivate_frank_wolfe,
    private_lasso,
    select_vertex,
    suggested_iterations,
    vertex_scores,
)
from .metrics import SupportReport, accuracy, auc, classification_error, count_nonzero, support_report
from .multinomial import (
    MultinomialLoss,
    multinomial_frank_wolfe,
    multinomial_gradient,
    multinomial_loss,
    multinomial_private_lasso,
    multinomial_sparsifier,
    softmax,
)
from .noise import RandomSource, StubSource, sample_double_geometric, sample_laplace
from .sparsifier import SparsifierConfig, keep_top_k, private_support_size, sparsifier

__version__ = "0.1.0"
