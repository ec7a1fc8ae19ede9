"""Graph proximity kernels for attributed networks and spectral community detection."""

__version__ = "0.1.0"

from .clustering import Partition, kmeans, spectral_partition
from .datasets import load_canonical, load_citation, load_webkb, save_canonical, sbm_generate
from .evaluation import adjusted_rand_index, rand_index, rank_options
from .graph import Graph, build_graph, cost_matrix, degree_matrix, laplacian, markov
from .kernels import (
    Kernel,
    communicability,
    compute_kernel,
    distance_to_kernel,
    free_energy,
    heat,
    pagerank_kernel,
    scct,
)
from .similarity import Similarity, fuse, similarity_matrix

__all__ = [
    "Graph",
    "Kernel",
    "Partition",
    "Similarity",
    "adjusted_rand_index",
    "build_graph",
    "communicability",
    "compute_kernel",
    "cost_matrix",
    "degree_matrix",
    "distance_to_kernel",
    "free_energy",
    "fuse",
    "heat",
    "kmeans",
    "laplacian",
    "load_canonical",
    "load_citation",
    "load_webkb",
    "markov",
    "pagerank_kernel",
    "rand_index",
    "rank_options",
    "save_canonical",
    "sbm_generate",
    "scct",
    "similarity_matrix",
    "spectral_partition",
]
