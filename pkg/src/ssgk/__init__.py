"""Structure-preserving symmetric graph kernels for brain-network classification.

Pipeline: factor each connectivity matrix into sparse symmetric rank-one
components, compare graphs by a squared-RBF kernel over the component vectors,
and classify with an SVM on the resulting Gram matrix. Classical baselines
(edge features, clustering coefficients, characteristic path length), EEG
frequency-band averaging, a synthetic data generator, and a grid-search
harness round out the toolkit.
"""

from .baselines import characteristic_path_length, clustering_coefficients, edge_features
from .core import (
    ConvergenceError,
    EigenDecomposition,
    FactorSet,
    SymmetricMatrix,
    frobenius_residual,
    matrix_inner,
    rank_one_inner,
    reconstruct,
    symmetric_eig,
)
from .data import (
    BUILTIN_BANDS,
    BandSpec,
    DataFileError,
    SampleManifest,
    StackedBandTensor,
    SyntheticConfig,
    band_average,
    band_by_name,
    generate_synthetic,
    load_factors,
    load_manifest,
    load_matrix,
    load_stacked,
    save_factors,
    save_manifest,
    save_matrix,
    save_stacked,
)
from .experiment import (
    ExperimentReport,
    GridRow,
    GridSpec,
    grid_search,
    render_report,
    stratified_folds,
)
from .factorization import (
    FactorizationConfig,
    FactorizationResult,
    canonicalize_signs,
    eigen_init,
    factorize,
    objective,
    smooth_gradient,
    soft_threshold,
)
from .kernel import (
    GramMatrix,
    RbfParams,
    build_cross_gram,
    build_gram,
    load_gram,
    psd_report,
    rbf,
    save_gram,
    ssgk,
    vector_cross_gram,
    vector_gram,
)
from .svm import (
    BinaryModel,
    MulticlassModel,
    SvmConfig,
    accuracy,
    decision,
    load_model,
    predict,
    save_model,
    train_binary,
    train_multiclass,
)

__version__ = "0.1.0"

__all__ = [
    "BUILTIN_BANDS",
    "BandSpec",
    "BinaryModel",
    "ConvergenceError",
    "DataFileError",
    "EigenDecomposition",
    "ExperimentReport",
    "FactorSet",
    "FactorizationConfig",
    "FactorizationResult",
    "GramMatrix",
    "GridRow",
    "GridSpec",
    "MulticlassModel",
    "RbfParams",
    "SampleManifest",
    "StackedBandTensor",
    "SvmConfig",
    "SymmetricMatrix",
    "SyntheticConfig",
    "accuracy",
    "band_average",
    "band_by_name",
    "build_cross_gram",
    "build_gram",
    "canonicalize_signs",
    "characteristic_path_length",
    "clustering_coefficients",
    "decision",
    "edge_features",
    "eigen_init",
    "factorize",
    "frobenius_residual",
    "generate_synthetic",
    "grid_search",
    "load_factors",
    "load_gram",
    "load_manifest",
    "load_matrix",
    "load_model",
    "load_stacked",
    "matrix_inner",
    "objective",
    "predict",
    "psd_report",
    "rank_one_inner",
    "rbf",
    "reconstruct",
    "render_report",
    "save_factors",
    "save_gram",
    "save_manifest",
    "save_matrix",
    "save_model",
    "save_stacked",
    "smooth_gradient",
    "soft_threshold",
    "ssgk",
    "stratified_folds",
    "symmetric_eig",
    "train_binary",
    "train_multiclass",
    "vector_cross_gram",
    "vector_gram",
]
