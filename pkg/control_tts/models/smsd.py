"""Style mixture density head.

Maps a style semantic vector to a Gaussian mixture over style vectors:

    pi      = softmax(a)                                 (B, K)
    mu      = f_mu(h)                                    (B, K, d)
    sigma^2 = reduce(softplus(f_var(h) + f_noise(eps))) + var_floor

where h is a two-layer feedforward trunk over the input and eps is a
standard-normal perturbation fed to the noise branch. The reducer of the
configured NoiseMode ties the variances (see noise_modes); the
fixed_isotropic mode skips both variance branches and emits a constant.

Key Responsibilities:
    - SmsdHead forward pass (mdn_forward)
    - Exact negative log density of the mixture (smsd_nll)
    - Gradients of the loss for every head parameter (smsd_nll_grad)
    - Ancestral sampling and the analytic mixture mean

Author:
    Michael Economou

Date:
    2026-10-17
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Any

import torch
import torch.nn.functional as F
from torch import nn

# Registers the reducers.
from control_tts.models import noise_modes  # noqa: F401
from control_tts.models.registry import NoiseMode, NoiseModeRegistry

logger = logging.getLogger(__name__)

LOG_2PI = math.log(2.0 * math.pi)


@dataclass
class SmsdConfig:
    """Mixture head settings.

    Attributes:
        n_components: Mixture component count K.
        noise_mode: Variance tying mode name.
        hidden: Trunk width.
        fixed_sigma: Standard deviation of the fixed_isotropic mode.
        var_floor: Additive variance floor.
        exact_constant: Include the (d/2)·log 2π term in the loss.
        reduced_nll: Drop every sigma-dependent normalizer term from the loss.
        inference_noise: Keep the noise branch stochastic at inference.
    """

    n_components: int = 5
    noise_mode: str = NoiseMode.ISOTROPIC_ACROSS_CLUSTERS.value
    hidden: int = 64
    fixed_sigma: float = 0.5
    var_floor: float = 1e-6
    exact_constant: bool = True
    reduced_nll: bool = False
    inference_noise: bool = False

    def validate(self) -> None:
        if self.n_components < 1:
            raise ValueError(f"n_components must be >= 1, got {self.n_components}")
        if self.hidden < 1:
            raise ValueError(f"hidden must be >= 1, got {self.hidden}")
        if self.fixed_sigma <= 0.0 or self.var_floor <= 0.0:
            raise ValueError("fixed_sigma and var_floor must be positive")
        NoiseMode.parse(self.noise_mode)

    @property
    def mode(self) -> NoiseMode:
        return NoiseMode.parse(self.noise_mode)


@dataclass
class MixtureParams:
    """Batched Gaussian mixture.

    Attributes:
        log_weights: Log mixture weights, shape (B, K).
        means: Component means, shape (B, K, d).
        variances: Variances in the mode's reduced shape, broadcastable to (B, K, d).
        mode: Noise mode that shaped the variances.
    """

    log_weights: torch.Tensor
    means: torch.Tensor
    variances: torch.Tensor
    mode: NoiseMode

    @classmethod
    def from_logits(
        cls,
        logits: torch.Tensor,
        means: torch.Tensor,
        variances: torch.Tensor,
        mode: NoiseMode = NoiseMode.FULLY_FACTORED,
    ) -> MixtureParams:
        """Build mixture parameters from pre-softmax weight logits."""
        return cls(F.log_softmax(logits, dim=-1), means, variances, mode)

    @property
    def weights(self) -> torch.Tensor:
        return self.log_weights.exp()

    @property
    def n_components(self) -> int:
        return int(self.means.shape[-2])

    @property
    def dim(self) -> int:
        return int(self.means.shape[-1])

    def expanded_variances(self) -> torch.Tensor:
        return self.variances.expand_as(self.means)

    def validate(self, tol: float = 1e-6) -> None:
        """Check the simplex and positivity invariants.

        Raises:
            ValueError: If weights do not sum to one or a variance is not positive.
        """
        total = self.weights.sum(dim=-1)
        if torch.any((total - 1.0).abs() > tol):
            raise ValueError(f"mixture weights sum to {total.tolist()}, expected 1")
        if torch.any(self.variances <= 0):
            raise ValueError("mixture variances must be strictly positive")


class SmsdHead(nn.Module):
    """Mixture density network over style vectors.

    Attributes:
        trunk: Two-layer feedforward network.
        fc_logits: Mixture weight logits.
        fc_means: Component means.
        fc_var: Data branch of the variances.
        fc_noise: Noise branch of the variances.
        fixed_variance: Constant variance buffer of the fixed_isotropic mode.
    """

    def __init__(self, d_in: int, d_out: int, config: SmsdConfig | None = None) -> None:
        super().__init__()
        self.config = config or SmsdConfig()
        self.config.validate()
        self.d_in = d_in
        self.d_out = d_out
        self.n_components = self.config.n_components
        self.mode = self.config.mode
        self.reducer = NoiseModeRegistry.create(self.mode)

        hidden = self.config.hidden
        self.trunk = nn.Sequential(
            nn.Linear(d_in, hidden), nn.SiLU(), nn.Linear(hidden, hidden), nn.SiLU()
        )
        self.fc_logits = nn.Linear(hidden, self.n_components)
        self.fc_means = nn.Linear(hidden, self.n_components * d_out)
        self.fc_var = nn.Linear(hidden, self.n_components * d_out)
        self.fc_noise = nn.Linear(d_in, self.n_components * d_out)
        self.register_buffer(
            "fixed_variance", torch.tensor(self.config.fixed_sigma**2, dtype=torch.float32)
        )

    @property
    def learns_variance(self) -> bool:
        return bool(self.reducer.learned)

    def n_variances(self) -> int:
        """Distinct variances per forward pass under the configured mode."""
        return int(self.reducer.n_variances(self.n_components, self.d_out))

    def draw_noise(self, batch: int, generator: torch.Generator | None = None) -> torch.Tensor:
        """Standard-normal perturbation for the noise branch."""
        weight = self.fc_noise.weight
        return torch.randn(
            (batch, self.d_in), generator=generator, dtype=weight.dtype, device=weight.device
        )

    def forward(self, x: torch.Tensor, noise: torch.Tensor | None = None) -> MixtureParams:
        """Compute the mixture parameters of a batch of style semantic vectors.

        Args:
            x: Input of shape (B, d_in).
            noise: Perturbation of shape (B, d_in); None feeds zeros, which is
                the deterministic inference setting.

        Returns:
            MixtureParams with variances in the mode's reduced shape.

        Raises:
            ValueError: If x does not have d_in features.
        """
        if x.ndim != 2 or x.shape[-1] != self.d_in:
            raise ValueError(f"expected input of shape (B, {self.d_in}), got {tuple(x.shape)}")
        batch = x.shape[0]
        h = self.trunk(x)
        logits = self.fc_logits(h)
        means = self.fc_means(h).view(batch, self.n_components, self.d_out)

        if self.learns_variance:
            if noise is None:
                noise = torch.zeros_like(x)
            raw = self.fc_var(h) + self.fc_noise(noise)
            raw = F.softplus(raw).view(batch, self.n_components, self.d_out)
            variances = self.reducer.reduce(raw) + self.config.var_floor
        else:
            fixed = self.fixed_variance.to(dtype=means.dtype)
            variances = fixed.expand(batch, 1, 1)

        return MixtureParams.from_logits(logits, means, variances, self.mode)


def component_log_density(
    y: torch.Tensor, mp: MixtureParams, exact_constant: bool = True, reduced_nll: bool = False
) -> torch.Tensor:
    """Log of pi_k times the k-th Gaussian density at y, shape (B, K)."""
    variances = mp.expanded_variances()
    assert torch.all(variances > 0), "mixture variances must be positive"
    diff = y.unsqueeze(-2) - mp.means
    log_comp = -0.5 * (diff.pow(2) / variances).sum(dim=-1)
    if not reduced_nll:
        log_comp = log_comp - 0.5 * variances.log().sum(dim=-1)
        if exact_constant:
            log_comp = log_comp - 0.5 * mp.dim * LOG_2PI
    return mp.log_weights + log_comp


def smsd_nll(
    y: torch.Tensor,
    mp: MixtureParams,
    exact_constant: bool = True,
    reduced_nll: bool = False,
    reduction: str = "mean",
) -> torch.Tensor:
    """Negative log density of y under the mixture.

    Args:
        y: Targets of shape (B, d).
        mp: Mixture parameters with matching batch and dimension.
        exact_constant: Include the (d/2)·log 2π term, making the value the
            exact negative log density.
        reduced_nll: Keep only the weights and the quadratic term.
        reduction: "mean", "sum" or "none".

    Returns:
        Scalar loss, or per-sample losses of shape (B,) for "none".

    Raises:
        ValueError: On dimension mismatch or unknown reduction.
    """
    if y.shape[-1] != mp.dim or y.shape[0] != mp.means.shape[0]:
        raise ValueError(
            f"target shape {tuple(y.shape)} does not match mixture means {tuple(mp.means.shape)}"
        )
    nll = -torch.logsumexp(component_log_density(y, mp, exact_constant, reduced_nll), dim=-1)
    if reduction == "none":
        return nll
    if reduction == "sum":
        return nll.sum()
    if reduction == "mean":
        return nll.mean()
    raise ValueError(f"Unknown reduction '{reduction}'")


def smsd_nll_grad(
    y: torch.Tensor,
    x: torch.Tensor,
    head: SmsdHead,
    noise: torch.Tensor | None = None,
    **loss_options: Any,
) -> dict[str, torch.Tensor]:
    """Gradients of the mixture loss with respect to every head parameter.

    Parameters the loss does not reach (the variance branches of the
    fixed_isotropic mode) get zero gradients.

    Returns:
        Parameter name to gradient tensor.
    """
    named = list(head.named_parameters())
    loss = smsd_nll(y, head(x, noise), **loss_options)
    grads = torch.autograd.grad(loss, [p for _, p in named], allow_unused=True)
    return {
        name: torch.zeros_like(param) if grad is None else grad
        for (name, param), grad in zip(named, grads, strict=True)
    }


def smsd_sample(
    mp: MixtureParams,
    generator: torch.Generator | None = None,
    num_samples: int | None = None,
) -> tuple[torch.Tensor, torch.Tensor]:
    """Draw a component from pi, then a Gaussian sample of that component.

    Args:
        mp: Mixture parameters.
        generator: Torch generator; the draw is a function of its state.
        num_samples: Samples per batch element; None draws one and drops
            the sample axis.

    Returns:
        (samples, components): shapes (B, d) and (B,), or (B, S, d) and
        (B, S) when num_samples is given.
    """
    n = 1 if num_samples is None else num_samples
    components = torch.multinomial(mp.weights, n, replacement=True, generator=generator)
    index = components.unsqueeze(-1).expand(-1, -1, mp.dim)
    means = torch.gather(mp.means, 1, index)
    stds = torch.gather(mp.expanded_variances(), 1, index).sqrt()
    eps = torch.randn(means.shape, generator=generator, dtype=means.dtype, device=means.device)
    samples = means + stds * eps
    if num_samples is None:
        return samples[:, 0], components[:, 0]
    return samples, components


def mixture_mean(mp: MixtureParams) -> torch.Tensor:
    """Analytic mixture mean sum_k pi_k mu_k, shape (B, d)."""
    return (mp.weights.unsqueeze(-1) * mp.means).sum(dim=-2)
