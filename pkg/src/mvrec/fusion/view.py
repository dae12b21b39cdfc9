"""View-fusion operator zoo.

Every operator reduces a stack of per-view tokens, shaped ``(views, width)``
or ``(batch, views, width)``, to a single fused token of the same width.
``TokenSelfAttention`` is the odd one out: it keeps the view axis and is
meant to run before any of the reducing operators.

Operators carry taxonomy flags:

* ``node_wise``   -- views are combined with per-node scalar weights.
* ``intra_view``  -- the weight given to a view depends on that view's
                     whole token.
* ``inter_view``  -- an output node may depend on every node of every view.
"""

from __future__ import annotations

from dataclasses import dataclass

import torch
from torch import nn

from ..errors import ConfigError, ShapeError

FUSION_KINDS = ("max_pool", "mean", "conv", "se", "shared_se", "mlp", "tr_en", "tr_ende")

TAXONOMY: dict[str, frozenset[str]] = {
    "max_pool": frozenset({"node_wise"}),
    "mean": frozenset({"node_wise"}),
    "conv": frozenset({"node_wise", "inter_view"}),
    "se": frozenset({"node_wise", "intra_view"}),
    "shared_se": frozenset({"node_wise", "intra_view"}),
    "mlp": frozenset({"inter_view", "intra_view"}),
    "tr_en": frozenset({"inter_view", "intra_view"}),
    "tr_ende": frozenset({"inter_view", "intra_view"}),
    "tau": frozenset({"inter_view", "intra_view"}),
}


@dataclass(frozen=True)
class FusionInfo:
    kind: str
    taxonomy_flags: frozenset[str]
    trainable_parameter_count: int


def _se_hidden(width: int, reduction: int) -> int:
    return max(1, width // reduction)


def _conv_widths(views: int) -> tuple[int, int, int, int]:
    # Gradual view mixing over three layers; lands on 13 scalars at views=3.
    mid = max(1, views - 1)
    return (views, mid, mid, 1)


def _encoder_block_params(width: int, ffn: int) -> int:
    attn = 3 * (width * width + width) + (width * width + width)
    feed = (width * ffn + ffn) + (ffn * width + width)
    norms = 2 * (2 * width)
    return attn + feed + norms


def _decoder_block_params(width: int, ffn: int) -> int:
    attn = 3 * (width * width + width) + (width * width + width)
    feed = (width * ffn + ffn) + (ffn * width + width)
    norms = 3 * (2 * width)
    return 2 * attn + feed + norms


def expected_parameter_count(
    kind: str,
    views: int,
    width: int,
    *,
    heads: int = 8,
    se_reduction: int = 16,
) -> int:
    """Closed-form trainable parameter count for a fusion operator.

    The feed-forward width of the transformer blocks is fixed at twice the
    token width, which reproduces the reference counts (8.4M for a single
    encoder block and 21.0M for encoder+decoder at width 1024).
    """
    if kind in ("max_pool", "mean"):
        return 0
    if kind == "conv":
        w0, w1, w2, w3 = _conv_widths(views)
        return w0 * w1 + w1 * w2 + w2 * w3 + 1
    if kind in ("se", "shared_se"):
        h = _se_hidden(width, se_reduction)
        per_module = width * h + h + h * width + width
        return per_module * (views if kind == "se" else 1)
    if kind == "mlp":
        h = 2 * width
        return (views * width * h + h) + (h * h + h) + (h * width + width)
    ffn = 2 * width
    if kind == "tr_en":
        return _encoder_block_params(width, ffn) + width
    if kind == "tr_ende":
        return _encoder_block_params(width, ffn) + _decoder_block_params(width, ffn) + width
    if kind == "tau":
        return _encoder_block_params(width, ffn)
    raise ConfigError(f"unknown fusion kind: {kind!r}")


def fusion_info(kind: str, views: int, width: int, **hyper) -> FusionInfo:
    return FusionInfo(kind, TAXONOMY[kind], expected_parameter_count(kind, views, width, **hyper))


def fuse_max(tokens: torch.Tensor) -> torch.Tensor:
    """Column-wise maximum over the view axis."""
    return tokens.max(dim=-2).values


def fuse_mean(tokens: torch.Tensor) -> torch.Tensor:
    """Column-wise mean over the view axis."""
    return tokens.mean(dim=-2)


def seed_parameters_(module: nn.Module, seed: int) -> nn.Module:
    """Deterministic re-initialization: uniform weights, zero biases, unit norms."""
    gen = torch.Generator().manual_seed(seed)
    for name, p in module.named_parameters():
        with torch.no_grad():
            if p.dim() >= 2:
                bound = 1.0 / (p.shape[-1] ** 0.5)
                values = torch.empty(p.shape, generator=gen, dtype=torch.float32).uniform_(-bound, bound)
                p.copy_(values.to(p.dtype))
            elif name.endswith("bias"):
                p.zero_()
            elif "norm" in name.lower():
                p.fill_(1.0)
            else:
                values = torch.empty(p.shape, generator=gen, dtype=torch.float32).uniform_(-0.1, 0.1)
                p.copy_(values.to(p.dtype))
    return module


class ViewFusion(nn.Module):
    """Base class: bookkeeping shared by every fusion operator."""

    kind = "base"

    def __init__(self, views: int, width: int):
        super().__init__()
        self.views = views
        self.width = width

    @property
    def taxonomy_flags(self) -> frozenset[str]:
        return TAXONOMY[self.kind]

    def info(self) -> FusionInfo:
        n = sum(p.numel() for p in self.parameters())
        return FusionInfo(self.kind, self.taxonomy_flags, n)

    def _check(self, tokens: torch.Tensor, enforce_views: bool = False) -> tuple[torch.Tensor, bool]:
        if tokens.dim() == 2:
            batched = False
            tokens = tokens.unsqueeze(0)
        elif tokens.dim() == 3:
            batched = True
        else:
            raise ShapeError(f"expected (views, width) or (batch, views, width), got {tuple(tokens.shape)}")
        if tokens.shape[-1] != self.width:
            raise ShapeError(f"token width {tokens.shape[-1]} != built width {self.width}")
        if enforce_views and tokens.shape[-2] != self.views:
            raise ShapeError(f"view count {tokens.shape[-2]} != built view count {self.views}")
        return tokens, batched


class MaxPoolFusion(ViewFusion):
    kind = "max_pool"

    def forward(self, tokens: torch.Tensor) -> torch.Tensor:
        tokens, batched = self._check(tokens)
        out = fuse_max(tokens)
        return out if batched else out.squeeze(0)


class MeanFusion(ViewFusion):
    kind = "mean"

    def forward(self, tokens: torch.Tensor) -> torch.Tensor:
        tokens, batched = self._check(tokens)
        out = fuse_mean(tokens)
        return out if batched else out.squeeze(0)


class ConvFusion(ViewFusion):
    """Three sequential view-mixing layers with node-shared weights.

    Purely linear along the view axis; all token nodes share the same mixing
    weights, so the operator stays a node-wise view weighting. A single bias
    on the final layer brings the count to 13 scalars for three views.
    """

    kind = "conv"

    def __init__(self, views: int, width: int):
        super().__init__(views, width)
        w0, w1, w2, w3 = _conv_widths(views)
        self.mix1 = nn.Parameter(torch.empty(w1, w0))
        self.mix2 = nn.Parameter(torch.empty(w2, w1))
        self.mix3 = nn.Parameter(torch.empty(w3, w2))
        self.bias = nn.Parameter(torch.zeros(1))
        self.init_mean_equivalent_()

    def init_mean_equivalent_(self) -> "ConvFusion":
        """Initialize each layer to uniform averaging, so forward == fuse_mean."""
        with torch.no_grad():
            for m in (self.mix1, self.mix2, self.mix3):
                m.fill_(1.0 / m.shape[1])
            self.bias.zero_()
        return self

    def forward(self, tokens: torch.Tensor) -> torch.Tensor:
        tokens, batched = self._check(tokens, enforce_views=True)
        h = torch.einsum("ov,bvj->boj", self.mix1, tokens)
        h = torch.einsum("ov,bvj->boj", self.mix2, h)
        h = torch.einsum("ov,bvj->boj", self.mix3, h)
        out = h.squeeze(-2) + self.bias
        return out if batched else out.squeeze(0)


class _GateNet(nn.Module):
    """Squeeze-excitation gate over one token: width -> width/r -> width, sigmoid."""

    def __init__(self, width: int, reduction: int):
        super().__init__()
        hidden = _se_hidden(width, reduction)
        self.squeeze = nn.Linear(width, hidden)
        self.excite = nn.Linear(hidden, width)

    def forward(self, token: torch.Tensor) -> torch.Tensor:
        return torch.sigmoid(self.excite(torch.relu(self.squeeze(token))))


class SharedSEFusion(ViewFusion):
    """One excitation module computes a per-node gate for every view; gated sum."""

    kind = "shared_se"

    def __init__(self, views: int, width: int, se_reduction: int = 16):
        super().__init__(views, width)
        self.se_reduction = se_reduction
        self.gate = _GateNet(width, se_reduction)

    def forward(self, tokens: torch.Tensor) -> torch.Tensor:
        tokens, batched = self._check(tokens)
        out = (self.gate(tokens) * tokens).sum(dim=-2)
        return out if batched else out.squeeze(0)


class SEFusion(ViewFusion):
    """Per-view excitation modules; otherwise identical to SharedSEFusion."""

    kind = "se"

    def __init__(self, views: int, width: int, se_reduction: int = 16):
        super().__init__(views, width)
        self.se_reduction = se_reduction
        self.gates = nn.ModuleList(_GateNet(width, se_reduction) for _ in range(views))

    def forward(self, tokens: torch.Tensor) -> torch.Tensor:
        tokens, batched = self._check(tokens, enforce_views=True)
        parts = [self.gates[v](tokens[:, v]) * tokens[:, v] for v in range(self.views)]
        out = torch.stack(parts, dim=1).sum(dim=1)
        return out if batched else out.squeeze(0)


class MLPFusion(ViewFusion):
    """Concatenated tokens through a 3-layer perceptron back to one token."""

    kind = "mlp"

    def __init__(self, views: int, width: int):
        super().__init__(views, width)
        hidden = 2 * width
        self.net = nn.Sequential(
            nn.Linear(views * width, hidden),
            nn.ReLU(),
            nn.Linear(hidden, hidden),
            nn.ReLU(),
            nn.Linear(hidden, width),
        )

    def forward(self, tokens: torch.Tensor) -> torch.Tensor:
        tokens, batched = self._check(tokens, enforce_views=True)
        out = self.net(tokens.reshape(tokens.shape[0], -1))
        return out if batched else out.squeeze(0)


def _encoder_block(width: int, heads: int) -> nn.TransformerEncoderLayer:
    if width % heads != 0:
        raise ConfigError(f"attention heads ({heads}) must divide token width ({width})")
    return nn.TransformerEncoderLayer(
        d_model=width,
        nhead=heads,
        dim_feedforward=2 * width,
        dropout=0.0,
        batch_first=True,
        norm_first=True,
    )


class TransformerEncoderFusion(ViewFusion):
    """Trainable query appended to the tokens; read the encoder output at the query."""

    kind = "tr_en"

    def __init__(self, views: int, width: int, heads: int = 8):
        super().__init__(views, width)
        self.heads = heads
        self.block = _encoder_block(width, heads)
        self.query = nn.Parameter(torch.empty(1, width).uniform_(-0.1, 0.1))

    def forward(self, tokens: torch.Tensor) -> torch.Tensor:
        tokens, batched = self._check(tokens)
        q = self.query.unsqueeze(0).expand(tokens.shape[0], -1, -1)
        out = self.block(torch.cat([q, tokens], dim=1))[:, 0]
        return out if batched else out.squeeze(0)


class TransformerDecoderFusion(ViewFusion):
    """Encoder over the view tokens, then a single trainable query cross-attends.

    The optional ``anchor`` is added to the query before decoding, which
    conditions the classification on an encoded physical property.
    """

    kind = "tr_ende"

    def __init__(self, views: int, width: int, heads: int = 8):
        super().__init__(views, width)
        self.heads = heads
        if width % heads != 0:
            raise ConfigError(f"attention heads ({heads}) must divide token width ({width})")
        self.encoder = _encoder_block(width, heads)
        self.decoder = nn.TransformerDecoderLayer(
            d_model=width,
            nhead=heads,
            dim_feedforward=2 * width,
            dropout=0.0,
            batch_first=True,
            norm_first=True,
        )
        self.query = nn.Parameter(torch.empty(1, width).uniform_(-0.1, 0.1))

    def forward(self, tokens: torch.Tensor, anchor: torch.Tensor | None = None) -> torch.Tensor:
        tokens, batched = self._check(tokens)
        b = tokens.shape[0]
        q = self.query.unsqueeze(0).expand(b, -1, -1)
        if anchor is not None:
            anchor = torch.as_tensor(anchor, dtype=tokens.dtype)
            if anchor.shape[-1] != self.width:
                raise ShapeError(f"anchor width {anchor.shape[-1]} != query width {self.width}")
            q = q + anchor.reshape(-1, 1, self.width)
        memory = self.encoder(tokens)
        out = self.decoder(q, memory)[:, 0]
        return out if batched else out.squeeze(0)


class TokenSelfAttention(nn.Module):
    """Optional pre-fusion encoder block: self-attention between all view tokens.

    Pre-norm residual blocks, so zeroing the attention and feed-forward
    weights makes this an exact identity.
    """

    kind = "tau"

    def __init__(self, width: int, heads: int = 8):
        super().__init__()
        self.width = width
        self.heads = heads
        self.block = _encoder_block(width, heads)

    def forward(self, tokens: torch.Tensor) -> torch.Tensor:
        batched = tokens.dim() == 3
        out = self.block(tokens if batched else tokens.unsqueeze(0))
        return out if batched else out.squeeze(0)


_BUILDERS = {
    "max_pool": lambda views, width, heads, red: MaxPoolFusion(views, width),
    "mean": lambda views, width, heads, red: MeanFusion(views, width),
    "conv": lambda views, width, heads, red: ConvFusion(views, width),
    "se": lambda views, width, heads, red: SEFusion(views, width, red),
    "shared_se": lambda views, width, heads, red: SharedSEFusion(views, width, red),
    "mlp": lambda views, width, heads, red: MLPFusion(views, width),
    "tr_en": lambda views, width, heads, red: TransformerEncoderFusion(views, width, heads),
    "tr_ende": lambda views, width, heads, red: TransformerDecoderFusion(views, width, heads),
}


def build_fusion(
    kind: str,
    views: int,
    width: int,
    *,
    heads: int = 8,
    se_reduction: int = 16,
    seed: int | None = None,
    mean_init_conv: bool = True,
) -> ViewFusion:
    """Construct a fusion operator; optionally reseed its parameters."""
    if kind not in _BUILDERS:
        raise ConfigError(f"unknown fusion kind: {kind!r} (expected one of {FUSION_KINDS})")
    module = _BUILDERS[kind](views, width, heads, se_reduction)
    if seed is not None:
        seed_parameters_(module, seed)
        if kind == "conv" and mean_init_conv:
            module.init_mean_equivalent_()
    return module


def parameter_segments(module: nn.Module) -> list[dict]:
    """Named-segment table for the flat parameter vector (checkpoint header)."""
    segments = []
    offset = 0
    for name, p in module.named_parameters():
        segments.append({"name": name, "offset": offset, "shape": list(p.shape)})
        offset += p.numel()
    return segments


def flat_parameters(module: nn.Module) -> torch.Tensor:
    """All parameters concatenated into one 1-D vector (detached copy)."""
    parts = [p.detach().reshape(-1) for p in module.parameters()]
    if not parts:
        return torch.zeros(0)
    return torch.cat(parts)


def load_flat_parameters_(module: nn.Module, flat: torch.Tensor) -> nn.Module:
    offset = 0
    for p in module.parameters():
        n = p.numel()
        with torch.no_grad():
            p.copy_(flat[offset : offset + n].reshape(p.shape).to(p.dtype))
        offset += n
    if offset != flat.numel():
        raise ShapeError(f"flat vector length {flat.numel()} != parameter count {offset}")
    return module
