"""Configuration-model random multigraphs and their normalized-Laplacian
spectra: sampling, exact small-instance enumeration, semicircle-law
diagnostics, and degree pruning."""

from .degseq import (ConditionReport, DegreeSequence, ParityError,
                     condition_report, degree_moment_diagnostic, load_degrees,
                     make_regular, make_two_valued, save_degrees)
from .confmodel import (Matching, Multigraph, adjacency_counts,
                        biased_sample_matching, double_factorial,
                        enumerate_matchings, sample_matching,
                        sample_matching_batch, uniformity_chisquare)
from .laplacian import LaplacianView, build_dense, build_operator
from .oracle import ExactStats, exact_stats, monte_carlo_moment
from .pruning import (PruneOutcome, bound_check, complete_after_prune,
                      dominating_chain_sim, prune, step_distribution)
from .rng import derive_rng, derive_seed
from .spectra import (Histogram, ReferenceDistribution, catalan,
                      eigenvalues_dense, empirical_moment, esd_histogram,
                      kesten_mckay, kesten_mckay_density, ks_distance,
                      ks_distance_two_sample, semicircle, semicircle_cdf,
                      semicircle_density, semicircle_moment,
                      stochastic_moment, wasserstein1_distance)

__version__ = "0.1.0"
