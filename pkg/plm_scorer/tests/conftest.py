import os

os.environ.setdefault("HF_HUB_OFFLINE", "1")
os.environ.setdefault("TRANSFORMERS_OFFLINE", "1")

import pytest
import torch
import transformers
from transformers import BertConfig, BertForMaskedLM, BertTokenizer

from plm_scorer import SNAPSHOT_COLUMNS, Paradigm, ScorerConfig

transformers.logging.set_verbosity_error()
transformers.logging.disable_progress_bar()

# Whole-word vocabulary for the stand-in backbone: special tokens, the
# five label words, the carrier sentence, and enough review words.
TINY_VOCAB = (
    "[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]",
    "awful", "bad", "fair", "good", "wonderful",
    "overall", ",", "it", "was", "a", "movie", ".",
    "i", "love", "loved", "this", "hate", "hated", "boring",
    "great", "fine", "okay", "terrible", "the", "film", "plot",
    "acting", "story", "not", "so", "really", "!",
)


@pytest.fixture(scope="session")
def tiny_backbone(tmp_path_factory):
    """Small random masked LM on disk, standing in for a published checkpoint."""
    path = tmp_path_factory.mktemp("backbone") / "tiny"
    torch.manual_seed(0)
    tokenizer = BertTokenizer(vocab={w: i for i, w in enumerate(TINY_VOCAB)},
                              do_lower_case=True)
    config = BertConfig(vocab_size=len(TINY_VOCAB), hidden_size=32,
                        num_hidden_layers=2, num_attention_heads=2,
                        intermediate_size=64, max_position_embeddings=64)
    model = BertForMaskedLM(config)
    tokenizer.save_pretrained(path)
    model.save_pretrained(path)
    return str(path)


@pytest.fixture
def tiny_config(tiny_backbone):
    """ScorerConfig factory wired to the stand-in backbone."""
    def make(**overrides) -> ScorerConfig:
        kwargs = dict(backbone="BERT-base", paradigm=Paradigm.FINETUNE, epochs=2,
                      learning_rate=1e-3, batch_size=4, seed=0, max_seq_len=64,
                      backbone_path=tiny_backbone)
        kwargs.update(overrides)
        return ScorerConfig(**kwargs)
    return make


def snapshot_text(rows) -> str:
    """Snapshot file content from (customer, product, rating, text, provenance) rows."""
    lines = ["\t".join(SNAPSHOT_COLUMNS)]
    lines += ["\t".join(fields) for fields in rows]
    return "\n".join(lines) + "\n"


@pytest.fixture
def write_snapshot_file(tmp_path):
    def write(rows, name="snapshot.tsv"):
        path = tmp_path / name
        path.write_text(snapshot_text(rows), encoding="utf-8")
        return path
    return write
