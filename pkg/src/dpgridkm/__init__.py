"""Differentially private K-means over privatized uniform-grid histograms.

The pipeline: partition [-r, r]^d into a uniform grid, release noisy cell
counts once under the Laplace mechanism, then run weighted Lloyd on the cell
centers with the noisy counts as weights.  The grid resolution comes from a
selection rule that minimizes a bound on the resulting objective deviation
and scales with the number of clusters, alongside the classical K-free
baseline rule and interactive/non-private references.
"""

from .bench import (
    ExperimentConfig,
    ExperimentResult,
    emit_sizing_tables,
    emit_tables,
    load_results,
    run,
    save_results,
)
from .cluster import (
    DpLloydConfig,
    LloydConfig,
    WeightedPointSet,
    dplloyd,
    dplloyd_budget_shares,
    nonprivate_kmeans,
    weighted_lloyd,
)
from .core import (
    ClusterModel,
    Dataset,
    DomainBounds,
    PrivacyBudget,
    evaluate_wcss,
    load_dataset,
)
from .grid import (
    GridHistogram,
    UniformGrid,
    build_grid,
    cell_index,
    cell_indices,
    histogram,
    histogram_from_dict,
    histogram_to_dict,
    privatize,
)
from .noise import LaplaceSampler, mix, privatize_counts
from .sizing import (
    DeviationBound,
    GridChoice,
    SizingParams,
    bound_profile,
    deviation_bound,
    eugkm,
    make_params,
    solve_rugnik,
    theorem_bounds,
    theta_scaling,
    threshold_strings,
    xi,
)
from .synth import SynthConfig, generate

__version__ = "0.1.0"
