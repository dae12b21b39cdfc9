"""Weight-based classification and anchor construction.

A scalar object weight (kg) is encoded with a bank of sine-cosine pairs at
geometrically spaced frequencies, upscaled by a 4-layer perceptron
(PropertyNet), and either classified directly or injected into the
transformer-decoder query as an anchor.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import torch
from torch import nn

from .errors import ConfigError

FREQUENCY_BASE = 10_000.0
NOISE_MODES = ("constant", "proportional", "both", "none")
ANCHOR_MODES = ("none", "pe", "pe_pn", "pe_pn_frozen")

_MIN_WEIGHT_KG = 1e-6


@dataclass(frozen=True)
class WeightEncoding:
    frequencies: int
    vector: np.ndarray  # (2d,), interleaved sin/cos, entries in [-1, 1]


def pe(weight_kg: float, frequencies: int) -> WeightEncoding:
    """Sinusoidal encoding: [sin(w/B^(0/d)), cos(w/B^(0/d)), ..., sin(w/B^((d-1)/d)), cos(...)]."""
    if frequencies < 1:
        raise ConfigError("frequency count must be >= 1")
    if not math.isfinite(weight_kg):
        raise ConfigError("weight must be finite")
    d = frequencies
    scales = FREQUENCY_BASE ** (np.arange(d) / d)
    phases = weight_kg / scales
    vec = np.empty(2 * d, dtype=np.float64)
    vec[0::2] = np.sin(phases)
    vec[1::2] = np.cos(phases)
    return WeightEncoding(frequencies=d, vector=vec)


def pe_batch(weights_kg: torch.Tensor, frequencies: int) -> torch.Tensor:
    """Torch variant for training: (B,) weights -> (B, 2d) features."""
    d = frequencies
    scales = FREQUENCY_BASE ** (torch.arange(d, dtype=weights_kg.dtype, device=weights_kg.device) / d)
    phases = weights_kg.reshape(-1, 1) / scales
    out = torch.empty(phases.shape[0], 2 * d, dtype=weights_kg.dtype, device=weights_kg.device)
    out[:, 0::2] = torch.sin(phases)
    out[:, 1::2] = torch.cos(phases)
    return out


def weight_noise(weight_kg: float, mode: str, rng: np.random.Generator) -> float:
    """Simulated scale-measurement error.

    constant: +- 0.01 kg uniform; proportional: +- 1% of the weight uniform;
    both: pick one of the two uniformly at random. The result is clamped to
    stay positive (floor 1e-6 kg).
    """
    if mode not in NOISE_MODES:
        raise ConfigError(f"unknown noise mode {mode!r}")
    if mode == "none":
        return weight_kg
    if mode == "both":
        mode = "constant" if rng.random() < 0.5 else "proportional"
    u = rng.uniform(-0.01, 0.01)
    noisy = weight_kg + u if mode == "constant" else weight_kg + u * weight_kg
    return max(noisy, _MIN_WEIGHT_KG)


class PropertyNet(nn.Module):
    """4-layer MLP upscaling the weight encoding, plus a classifier head.

    The upscaler maps 1x2d -> 1x hidden; the final fully connected layer
    maps hidden -> classes. ``freeze_upscaler`` removes the upscaler from
    optimization (the classifier head stays trainable).
    """

    def __init__(self, frequencies: int, hidden: int, n_classes: int):
        super().__init__()
        if frequencies < 1 or hidden < 1 or n_classes < 2:
            raise ConfigError("PropertyNet needs frequencies >= 1, hidden >= 1, classes >= 2")
        self.frequencies = frequencies
        self.hidden = hidden
        self.n_classes = n_classes
        self.upscaler = nn.Sequential(
            nn.Linear(2 * frequencies, hidden),
            nn.ReLU(),
            nn.Linear(hidden, hidden),
            nn.ReLU(),
            nn.Linear(hidden, hidden),
            nn.ReLU(),
            nn.Linear(hidden, hidden),
            nn.ReLU(),
        )
        self.classifier = nn.Linear(hidden, n_classes)
        self.frozen = False

    def freeze_upscaler(self, frozen: bool = True) -> "PropertyNet":
        self.frozen = frozen
        for p in self.upscaler.parameters():
            p.requires_grad_(not frozen)
        return self

    def upscale(self, weights_kg: torch.Tensor) -> torch.Tensor:
        return self.upscaler(pe_batch(weights_kg, self.frequencies))

    def forward(self, weights_kg: torch.Tensor) -> torch.Tensor:
        return self.classifier(self.upscale(weights_kg))


def property_forward(weight_kg: float, net: PropertyNet) -> np.ndarray:
    """Classify a single weight; returns (n_classes,) logits."""
    with torch.no_grad():
        w = torch.tensor([weight_kg], dtype=next(net.parameters()).dtype)
        return net(w)[0].numpy()


def make_anchor(
    weight_kg: float,
    mode: str,
    query_width: int,
    *,
    frequencies: int | None = None,
    net: PropertyNet | None = None,
) -> torch.Tensor:
    """Anchor vector for conditional decoding; shape (query_width,).

    pe: the raw sinusoidal encoding, zero-padded (or truncated) to the query
    width. pe_pn / pe_pn_frozen: the PropertyNet upscaler output; the frozen
    variant differs only in which parameters the optimizer may touch.
    """
    if mode not in ANCHOR_MODES:
        raise ConfigError(f"unknown anchor mode {mode!r}")
    if mode == "none":
        return torch.zeros(query_width)
    if mode == "pe":
        d = frequencies if frequencies is not None else (net.frequencies if net else None)
        if d is None:
            raise ConfigError("anchor mode 'pe' requires a frequency count")
        vec = pe(weight_kg, d).vector
        out = np.zeros(query_width, dtype=np.float64)
        n = min(query_width, len(vec))
        out[:n] = vec[:n]
        return torch.from_numpy(out)
    if net is None:
        raise ConfigError(f"anchor mode {mode!r} requires a PropertyNet")
    if net.hidden != query_width:
        raise ConfigError(f"PropertyNet hidden width {net.hidden} != query width {query_width}")
    w = torch.tensor([weight_kg], dtype=next(net.parameters()).dtype)
    if mode == "pe_pn_frozen":
        with torch.no_grad():
            return net.upscale(w)[0]
    return net.upscale(w)[0]
