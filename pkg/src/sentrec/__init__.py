"""Rating-sparsity experiments for explicit-feedback recommenders.

Parse a reviews table, hold out validation ratings, blank a fraction of
the training ratings, refill them from review-text sentiment, factorize
with alternating least squares, and compare ranking quality against the
sparse baseline.
"""

from .als import AlsConfig, AlsModel, recommend_all, train
from .dataset import (Cell, ImputePolicy, Provenance, RatingsDataset, SplitSpec,
                      impute, read_snapshot, sparsify, split, true_sentiment_rows,
                      write_snapshot)
from .ingest import (IdInterner, ParseResult, ReviewRecord, SchemaError,
                     StrictParseError, TableSchema, intern, lowrank_scores,
                     parse_reviews, synth_lowrank)
from .lexsent import (DEFAULT_LEXICON, Lexicon, SentimentRow, read_sentiment_file,
                      score_dataset, score_text, write_sentiment_file)
from .metrics import (RankingScores, average_precision, avg_improvement, idcg,
                      ndcg_at_k, precision_at_k, read_scores, score_rankings,
                      write_scores)

__version__ = "0.1.0"
