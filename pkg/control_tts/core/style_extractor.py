"""Fixed style extractor over the style channels.

Produces the ground-truth style vector that the mixture-density head
regresses during training. The extractor is an embedding sum over token
patterns: every valid style-channel token owns a fixed embedding, built so
that the style vector equals a random orthonormal rotation of a concatenation
of per-attribute one-hot blocks. Graded attributes scale their one-hot entry
by ``1 + degree_scale * (degree - 0.5)``, so different degrees of one label
stay on the same axis with different magnitudes.

Author:
    Michael Economou

Date:
    2026-10-17
"""

from __future__ import annotations

import logging

import numpy as np

from control_tts.core.codec import DatasetConfig, StyleCodeTable
from control_tts.core.labels import STYLE_ATTRIBUTES, AttributeLabels, Degrees
from control_tts.core.layout import CodecMatrix, split_style
from control_tts.utils.helpers import derive_seed

logger = logging.getLogger(__name__)


class StyleExtractor:
    """Deterministic map from style channels to a d_s-dimensional vector.

    Attributes:
        d_style: Output dimension.
        blocks: Attribute name to its slice in the one-hot feature vector.
        rotation: Matrix of shape (d_style, n_features) with orthonormal columns.
    """

    def __init__(self, config: DatasetConfig) -> None:
        self.config = config
        self.codes = StyleCodeTable(config)
        self.d_style = config.d_style
        self.degree_scale = config.degree_scale

        self.blocks: dict[str, slice] = {}
        offset = 0
        for name in STYLE_ATTRIBUTES:
            size = len(config.categories.domain(name))
            self.blocks[name] = slice(offset, offset + size)
            offset += size
        self.n_features = offset
        if self.n_features > self.d_style:
            raise ValueError(f"d_style={self.d_style} < {self.n_features} one-hot features")

        rng = np.random.default_rng(derive_seed(config.seed, "style_extractor"))
        q, _ = np.linalg.qr(rng.normal(size=(self.d_style, self.n_features)))
        self.rotation = q

        self._tables = self._build_tables()
        logger.debug(
            "StyleExtractor: %d features rotated into d_style=%d", self.n_features, self.d_style
        )

    def _magnitude(self, degree: float | None) -> float:
        if degree is None:
            return 1.0
        return 1.0 + self.degree_scale * (degree - 0.5)

    def _build_tables(self) -> np.ndarray:
        """Embedding table per style channel: (n_style, codebook_size, d_style)."""
        layout = self.config.layout
        tables = np.zeros((layout.n_style, layout.codebook_size, self.d_style))
        for channel, names in enumerate(self.codes.channel_attributes):
            for token in range(layout.codebook_size):
                features = np.zeros(self.n_features)
                for name in names:
                    reading = self.codes.read_token(name, token)
                    if reading is None:
                        break
                    label, degree = reading
                    position = self.config.categories.domain(name).index(label)
                    features[self.blocks[name].start + position] = self._magnitude(degree)
                tables[channel, token] = self.rotation @ features
        return tables

    def __call__(self, style_channels: np.ndarray) -> np.ndarray:
        """Extract the style vector of one utterance.

        Args:
            style_channels: Token array of shape (T, n_style).

        Returns:
            Float64 vector of shape (d_style,), the frame average of the
            summed channel embeddings.
        """
        style_channels = np.asarray(style_channels, dtype=np.int64)
        n_style = self.config.layout.n_style
        if style_channels.ndim != 2 or style_channels.shape[1] != n_style:
            raise ValueError(
                f"style channels must have shape (T, {n_style}), got {style_channels.shape}"
            )
        if style_channels.shape[0] == 0:
            raise ValueError("style channels have no frames")
        channels = np.arange(n_style)[None, :]
        per_frame = self._tables[channels, style_channels].sum(axis=1)
        return per_frame.mean(axis=0)

    def extract(self, codec: CodecMatrix) -> np.ndarray:
        """Style vector of a full codec matrix."""
        _, style = split_style(codec)
        return self(style)

    def features(self, labels: AttributeLabels, degrees: Degrees) -> np.ndarray:
        """Unrotated one-hot feature vector of a (labels, degrees) pair."""
        features = np.zeros(self.n_features)
        for name in STYLE_ATTRIBUTES:
            position = labels.index(name, self.config.categories)
            degree = None if name == "gender" else degrees[name]
            features[self.blocks[name].start + position] = self._magnitude(degree)
        return features

    def vector_for(self, labels: AttributeLabels, degrees: Degrees) -> np.ndarray:
        """Style vector a codec generated from (labels, degrees) extracts to."""
        return self.rotation @ self.features(labels, degrees)
