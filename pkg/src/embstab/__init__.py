"""Representational and functional stability of node embeddings across dimensions."""

from .classify import LogRegModel, TrainConfig, accuracy, predict_proba, select_l2, train_logreg
from .embed import EmbeddingMatrix, Node2vecConfig, node2vec_lite, read_embedding, spectral_embed, write_embedding
from .errors import DataError, DegenerateNormalizationError, EmbStabError, NumericError, ZeroCovarianceError
from .funcsim import (OutputMatrix, disagreement, error_rate, hard_predictions, mean_jsd,
                      minmax_normalized_disagreement, stable_core)
from .graph import Graph, SbmConfig, SplitSpec, generate_sbm, load_edge_list, load_labels, split_nodes
from .harness import StabilityReport, SweepConfig, emit_report, load_config, mark_optimum, run_sweep
from .repsim import (aligned_cosine_similarity, build_rsm, distance_correlation, knn_index, knn_jaccard,
                     procrustes_align, second_order_cosine)

__version__ = "0.1.0"
