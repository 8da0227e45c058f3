"""Reference implementations the tests compare against.

Direct evaluation of the mixture density with scipy, central finite
differences over module parameters and a random mixture generator for every
noise mode.
"""

import numpy as np
import torch
from scipy import special, stats

from control_tts.models.registry import NoiseMode
from control_tts.models.smsd import MixtureParams


def variance_shape(mode: NoiseMode, batch: int, k: int, d: int) -> tuple[int, int, int]:
    if mode is NoiseMode.FULLY_FACTORED:
        return batch, k, d
    if mode is NoiseMode.ISOTROPIC:
        return batch, k, 1
    return batch, 1, 1


def random_mixture(
    rng: np.random.Generator, mode: NoiseMode, batch: int, k: int, d: int
) -> tuple[MixtureParams, np.ndarray]:
    """Random float64 mixture and targets near its means."""
    logits = rng.normal(size=(batch, k)) * 2.0
    means = rng.normal(size=(batch, k, d))
    if mode is NoiseMode.FIXED_ISOTROPIC:
        variances = np.full((batch, 1, 1), 0.25)
    else:
        variances = rng.uniform(0.05, 3.0, size=variance_shape(mode, batch, k, d))
    y = means[np.arange(batch), rng.integers(k, size=batch)] + rng.normal(size=(batch, d))
    mp = MixtureParams.from_logits(
        torch.from_numpy(logits), torch.from_numpy(means), torch.from_numpy(variances), mode
    )
    return mp, y


def direct_nll(y: np.ndarray, mp: MixtureParams) -> np.ndarray:
    """-log sum_k pi_k N(y; mu_k, diag sigma_k^2) per batch element."""
    weights = mp.weights.detach().numpy()
    means = mp.means.detach().numpy()
    stds = np.sqrt(np.broadcast_to(mp.variances.detach().numpy(), means.shape))
    log_components = stats.norm.logpdf(y[:, None, :], loc=means, scale=stds).sum(axis=-1)
    return -special.logsumexp(log_components, axis=-1, b=weights)


def finite_difference_grads(
    module: torch.nn.Module,
    loss_fn,
    n_coordinates: int = 6,
    eps: float = 1e-6,
    seed: int = 0,
) -> dict[str, tuple[np.ndarray, np.ndarray]]:
    """Central differences on a random subset of every parameter's entries.

    Returns:
        Parameter name to (flat indices, numerical derivatives).
    """
    rng = np.random.default_rng(seed)
    result = {}
    with torch.no_grad():
        for name, param in module.named_parameters():
            flat = param.view(-1)
            indices = rng.choice(flat.numel(), size=min(n_coordinates, flat.numel()), replace=False)
            derivatives = []
            for index in indices:
                original = float(flat[index])
                flat[index] = original + eps
                upper = float(loss_fn())
                flat[index] = original - eps
                lower = float(loss_fn())
                flat[index] = original
                derivatives.append((upper - lower) / (2 * eps))
            result[name] = (indices, np.asarray(derivatives))
    return result
