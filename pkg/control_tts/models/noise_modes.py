"""Variance reducers of the four noise-perturbation modes.

Raw variances arrive with shape (B, K, d). Each reducer averages over the
dimensions its mode ties:

    fully_factored              (B, K, d)  every entry learned
    isotropic                   (B, K, 1)  one variance per component
    isotropic_across_clusters   (B, 1, 1)  one variance shared by all components
    fixed_isotropic             (B, 1, 1)  constant, not learned

Author:
    Michael Economou

Date:
    2026-10-17
"""

from __future__ import annotations

import torch

from control_tts.models.registry import NoiseMode, NoiseModeRegistry


class VarianceReducer:
    """Base reducer; subclasses are registered per NoiseMode."""

    mode: NoiseMode
    learned: bool = True

    def reduce(self, raw: torch.Tensor) -> torch.Tensor:
        raise NotImplementedError(f"{self.__class__.__name__} must implement reduce()")

    def n_variances(self, n_components: int, dim: int) -> int:
        """Number of distinct variances one forward pass emits."""
        raise NotImplementedError


@NoiseModeRegistry.register(NoiseMode.FULLY_FACTORED)
class FullyFactoredReducer(VarianceReducer):
    def reduce(self, raw: torch.Tensor) -> torch.Tensor:
        return raw

    def n_variances(self, n_components: int, dim: int) -> int:
        return n_components * dim


@NoiseModeRegistry.register(NoiseMode.ISOTROPIC)
class IsotropicReducer(VarianceReducer):
    def reduce(self, raw: torch.Tensor) -> torch.Tensor:
        return raw.mean(dim=-1, keepdim=True)

    def n_variances(self, n_components: int, dim: int) -> int:
        return n_components


@NoiseModeRegistry.register(NoiseMode.ISOTROPIC_ACROSS_CLUSTERS)
class IsotropicAcrossClustersReducer(VarianceReducer):
    def reduce(self, raw: torch.Tensor) -> torch.Tensor:
        return raw.mean(dim=(-2, -1), keepdim=True)

    def n_variances(self, n_components: int, dim: int) -> int:
        return 1


@NoiseModeRegistry.register(NoiseMode.FIXED_ISOTROPIC)
class FixedIsotropicReducer(VarianceReducer):
    """Constant variance; the head never evaluates its variance branches."""

    learned = False

    def reduce(self, raw: torch.Tensor) -> torch.Tensor:
        raise RuntimeError("fixed_isotropic variances are constant and never reduced")

    def n_variances(self, n_components: int, dim: int) -> int:
        return 1
