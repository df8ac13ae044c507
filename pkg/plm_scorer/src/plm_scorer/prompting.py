"""Label words and the carrier sentence for cloze-style rating prediction.

Rating classification can be phrased as a fill-in task: show a masked
language model a short carrier sentence with a blank and ask which
rating word belongs there. Two pieces define the task. The Verbalizer
pairs each star rating 1-5 with one vocabulary word, worst to best. The
Template is the carrier sentence with a single slot that takes a label
word during training and the mask token at inference.
"""

from __future__ import annotations

from dataclasses import dataclass

LABELS = (1, 2, 3, 4, 5)
LABEL_WORDS = ("awful", "bad", "fair", "good", "wonderful")
DEFAULT_TEMPLATE_TEXT = "Overall, it was a [x] movie"
SLOT = "[x]"


@dataclass(frozen=True)
class Verbalizer:
    """Order-preserving bijection between ratings and label words.

    Position k of ``words`` carries rating k+1, so the first word names
    the worst rating and the last the best.
    """

    words: tuple[str, ...] = LABEL_WORDS

    def __post_init__(self) -> None:
        if len(self.words) != len(LABELS):
            raise ValueError(f"need {len(LABELS)} label words, got {len(self.words)}")
        if len(set(self.words)) != len(self.words):
            raise ValueError("label words must be distinct")
        if not all(isinstance(word, str) and word for word in self.words):
            raise ValueError("label words must be non-empty strings")

    def word(self, label: int) -> str:
        if label not in LABELS:
            raise ValueError(f"label {label} outside 1-5")
        return self.words[label - 1]

    def label(self, word: str) -> int:
        try:
            return self.words.index(word) + 1
        except ValueError:
            raise ValueError(f"unknown label word {word!r}") from None


@dataclass(frozen=True)
class Template:
    """Carrier sentence holding exactly one slot for the label word."""

    text: str = DEFAULT_TEMPLATE_TEXT
    slot: str = SLOT

    def __post_init__(self) -> None:
        if not self.slot:
            raise ValueError("slot marker must be non-empty")
        occurrences = self.text.count(self.slot)
        if occurrences != 1:
            raise ValueError(
                f"template must contain the slot {self.slot!r} exactly once, found {occurrences}")

    def render(self, word: str) -> str:
        """Substitute the slot, with a label word or a mask token."""
        return self.text.replace(self.slot, word)


def training_string(template: Template, verbalizer: Verbalizer, label: int) -> str:
    """The carrier sentence rendered with the label's own word."""
    return template.render(verbalizer.word(label))
