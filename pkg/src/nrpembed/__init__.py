"""Node embeddings from factorised Personalized PageRank with degree-targeted reweighting."""
from importlib import resources

__version__ = "0.1.0"

from .bksvd import SvdFactors, bksvd, exact_svd, spectral_norm_estimate
from .errors import CapExceededError, ConfigError, IngestionError, NrpError, SamplingError
from .evaluate import (LinkSplit, MetricReport, auc, candidate_pairs, link_prediction_auc,
                       precision_at_k, split_edges)
from .graph import EdgeList, Graph, from_edges, generate_erdos_renyi, read_edge_list
from .nrp import NrpConfig, NrpResult, nrp_embed, nrp_fit, score
from .ppr import EmbeddingPair, approx_ppr, exact_ppr, approximation_error_bound
from .reweight import WeightState, objective, update_bwd_weights, update_fwd_weights

EXAMPLE_GRAPH = "example_graph.txt"


def example_graph_path():
    return str(resources.files(__package__).joinpath("data", EXAMPLE_GRAPH))


def example_graph():
    """The bundled nine-node undirected graph (0-based; node ``i`` is v_{i+1})."""
    return from_edges(read_edge_list(example_graph_path(), directed=False))
