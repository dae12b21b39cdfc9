"""Classification losses: cross-entropy, BCE, and the multi-head auxiliary loss.

The multi-head loss averages the overall cross-entropy with one term per
view; in RGBD mode each view term is itself the average of the fused,
color-only, and depth-only head losses for that view. Every head sees the
same target class because an image set shows a single object.
"""

from __future__ import annotations

import torch
import torch.nn.functional as F

from .errors import ConfigError

LOSS_MODES = ("ce", "mh", "mh_rgbd", "bce_stage1")


def ce(logits: torch.Tensor, target: int | torch.Tensor) -> torch.Tensor:
    """Cross-entropy from log-softmax. Accepts (N,) or (B, N) logits."""
    if logits.dim() == 1:
        logits = logits.unsqueeze(0)
    target = torch.as_tensor(target, dtype=torch.long, device=logits.device).reshape(-1)
    if target.min() < 0 or target.max() >= logits.shape[-1]:
        raise IndexError(f"class {target.tolist()} out of range for {logits.shape[-1]} classes")
    return F.cross_entropy(logits, target)


def bce(logits: torch.Tensor, target_multi_hot: torch.Tensor) -> torch.Tensor:
    """Binary cross-entropy over logits against a multi-hot target."""
    target = torch.as_tensor(target_multi_hot, dtype=logits.dtype, device=logits.device)
    if logits.dim() == 1:
        logits = logits.unsqueeze(0)
    target = target.reshape(logits.shape[0], -1)
    return F.binary_cross_entropy_with_logits(logits, target)


def mh_loss(outputs, target, mode: str = "mh") -> torch.Tensor:
    """Multi-head auxiliary loss over a model's head outputs.

    ``mode="ce"`` uses the overall head only. ``mode="mh"`` averages the
    overall term with the per-view terms, weight 1/(views+1) each.
    ``mode="mh_rgbd"`` additionally averages color- and depth-head terms
    into each view term (weight 1/3 inside the view term). In
    ``mode="bce_stage1"`` the target is a multi-hot vector (set shuffling
    can mix classes within a set) and only the overall head contributes.
    """
    if mode not in LOSS_MODES:
        raise ConfigError(f"unknown loss mode {mode!r}")
    if mode == "bce_stage1":
        return bce(outputs.overall, target)
    if mode == "ce":
        return ce(outputs.overall, target)
    if outputs.per_view is None:
        raise ConfigError(f"loss mode {mode!r} requires per-view head outputs")
    views = len(outputs.per_view)
    if mode == "mh_rgbd" and (outputs.per_view_color is None or outputs.per_view_depth is None):
        raise ConfigError("loss mode 'mh_rgbd' requires color and depth head outputs")

    total = ce(outputs.overall, target)
    for v in range(views):
        term = ce(outputs.per_view[v], target)
        if mode == "mh_rgbd":
            term = (term + ce(outputs.per_view_color[v], target) + ce(outputs.per_view_depth[v], target)) / 3.0
        total = total + term
    return total / (views + 1)


def mh_loss_terms(outputs, target, mode: str = "mh") -> dict[str, float]:
    """Per-head loss values for logging; keys are stable across steps."""
    terms: dict[str, float] = {"overall": float(ce(outputs.overall, target))}
    if mode in ("mh", "mh_rgbd") and outputs.per_view is not None:
        for v, logits in enumerate(outputs.per_view):
            terms[f"view_{v}"] = float(ce(logits, target))
            if mode == "mh_rgbd":
                terms[f"view_{v}_color"] = float(ce(outputs.per_view_color[v], target))
                terms[f"view_{v}_depth"] = float(ce(outputs.per_view_depth[v], target))
    return terms
