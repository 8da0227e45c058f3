"""Core synthetic codec domain.

IO-free and torch-free: labels, channel layout, the toy codec with its
generator and exact decoders, the fixed style extractor and corpus splits.

Author:
    Michael Economou

Date:
    2026-10-17
"""

from control_tts.core.codec import (
    DatasetConfig,
    StyleCodeTable,
    SyntheticUtterance,
    ToyCodec,
    UnknownPatternError,
    make_generator_config,
    quantize_degree,
)
from control_tts.core.corpus import SPLIT_NAMES, Corpus, generate_corpus, generate_split
from control_tts.core.labels import (
    GRADED_ATTRIBUTES,
    STYLE_ATTRIBUTES,
    AttributeLabels,
    CategorySets,
    Degrees,
)
from control_tts.core.layout import ChannelLayout, CodecMatrix, join_style, split_style
from control_tts.core.serializable import Serializable
from control_tts.core.style_extractor import StyleExtractor

__all__ = [
    "GRADED_ATTRIBUTES",
    "SPLIT_NAMES",
    "STYLE_ATTRIBUTES",
    "AttributeLabels",
    "CategorySets",
    "ChannelLayout",
    "CodecMatrix",
    "Corpus",
    "DatasetConfig",
    "Degrees",
    "Serializable",
    "StyleCodeTable",
    "StyleExtractor",
    "SyntheticUtterance",
    "ToyCodec",
    "UnknownPatternError",
    "generate_corpus",
    "generate_split",
    "join_style",
    "make_generator_config",
    "quantize_degree",
    "split_style",
]
