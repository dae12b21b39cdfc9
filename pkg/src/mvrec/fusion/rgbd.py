"""Stage-wise fusion between the color and depth feature streams.

Each stage computes squeeze-excitation gates from the channel context of
both streams concatenated. A one-directional stage re-weights only the
target stream's channels (the other stream passes through bit-identical);
the bidirectional variant re-weights both. The final-stage fusion collapses
the two streams into one map via a per-channel softmax-weighted sum.
"""

from __future__ import annotations

import torch
from torch import nn

from ..errors import ConfigError, ShapeError

DIRECTIONS = ("c2d", "d2c", "bidir", "none")


def _spatial_mean(x: torch.Tensor) -> torch.Tensor:
    return x.mean(dim=(-2, -1))


class StageFusion(nn.Module):
    """Cross-modal channel gating at one encoder stage."""

    def __init__(self, channels: int, reduction: int = 4):
        super().__init__()
        self.channels = channels
        hidden = max(1, 2 * channels // reduction)
        self.squeeze = nn.Linear(2 * channels, hidden)
        self.excite_color = nn.Linear(hidden, channels)
        self.excite_depth = nn.Linear(hidden, channels)

    def _gates(self, color: torch.Tensor, depth: torch.Tensor) -> tuple[torch.Tensor, torch.Tensor]:
        if color.shape != depth.shape:
            raise ShapeError(f"color {tuple(color.shape)} vs depth {tuple(depth.shape)} shape mismatch")
        if color.shape[-3] != self.channels:
            raise ShapeError(f"stage built for {self.channels} channels, got {color.shape[-3]}")
        context = torch.cat([_spatial_mean(color), _spatial_mean(depth)], dim=-1)
        h = torch.relu(self.squeeze(context))
        gc = torch.sigmoid(self.excite_color(h)).unsqueeze(-1).unsqueeze(-1)
        gd = torch.sigmoid(self.excite_depth(h)).unsqueeze(-1).unsqueeze(-1)
        return gc, gd

    def forward(
        self, color: torch.Tensor, depth: torch.Tensor, direction: str
    ) -> tuple[torch.Tensor, torch.Tensor]:
        if direction not in DIRECTIONS:
            raise ConfigError(f"unknown fusion direction {direction!r}")
        if direction == "none":
            return color, depth
        gc, gd = self._gates(color, depth)
        new_color = gc * color if direction in ("d2c", "bidir") else color
        new_depth = gd * depth if direction in ("c2d", "bidir") else depth
        return new_color, new_depth


class FinalFusion(nn.Module):
    """Collapse color and depth stage-I maps into one fused map.

    Per-channel weights come from a softmax over the two streams, so equal
    gate logits average the streams. When the depth modality is disabled
    this layer is bypassed and the color map passes through unchanged.
    """

    def __init__(self, channels: int, reduction: int = 4):
        super().__init__()
        self.channels = channels
        hidden = max(1, 2 * channels // reduction)
        self.squeeze = nn.Linear(2 * channels, hidden)
        self.excite = nn.Linear(hidden, 2 * channels)

    def forward(self, color: torch.Tensor, depth: torch.Tensor) -> torch.Tensor:
        if color.shape != depth.shape:
            raise ShapeError(f"color {tuple(color.shape)} vs depth {tuple(depth.shape)} shape mismatch")
        if color.shape[-3] != self.channels:
            raise ShapeError(f"final fusion built for {self.channels} channels, got {color.shape[-3]}")
        context = torch.cat([_spatial_mean(color), _spatial_mean(depth)], dim=-1)
        h = torch.relu(self.squeeze(context))
        logits = self.excite(h).reshape(*h.shape[:-1], 2, self.channels)
        weights = torch.softmax(logits, dim=-2).unsqueeze(-1).unsqueeze(-1)
        return weights[..., 0, :, :, :] * color + weights[..., 1, :, :, :] * depth
