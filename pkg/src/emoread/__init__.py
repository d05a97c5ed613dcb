"""Readers' emotion profiles from short text.

Affect counter-fitted word vectors feed a Bi-LSTM with additive attention;
the resulting document vector is fused with a pluggable context encoder and
trained as multi-target regression over five-emotion profiles, with the full
metric suite and attention-map behavior analysis alongside.
"""

from .corpus import Document, LabeledCorpus
from .embedding import CounterFitter, EmbeddingTable, counterfit
from .errors import DataError, EmoreadError, NumericalError
from .fusion import EmotionProfileRegressor, ModelConfig, TrainConfig
from .metrics import EvalPair, EvalReport, evaluate
from .validation import EMOTIONS

__all__ = [
    "Document",
    "LabeledCorpus",
    "EmbeddingTable",
    "CounterFitter",
    "counterfit",
    "EmotionProfileRegressor",
    "ModelConfig",
    "TrainConfig",
    "EvalPair",
    "EvalReport",
    "evaluate",
    "EMOTIONS",
    "EmoreadError",
    "DataError",
    "NumericalError",
]

__version__ = "0.1.0"
