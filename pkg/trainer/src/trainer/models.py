"""Transformer decoders: BCJRFormer, ECCT, and ConvBCJRFormer.

All attention blocks are pre-norm (normalize, attend, residual). Masks are
applied pre-softmax as -inf surrogates; a query row whose keys are all
masked outputs zeros by definition.
"""

from __future__ import annotations

import math

import torch
from torch import nn

from .config import ModelConfig


def masked_softmax(scores: torch.Tensor, allowed: torch.Tensor | None) -> torch.Tensor:
    """Softmax over the last dim with disallowed keys at -inf.

    Args:
        scores: (..., Tq, Tk) attention scores.
        allowed: Broadcastable boolean mask, True where attention is allowed,
            or None for full attention.

    Returns:
        Attention weights; rows with no allowed key are all zeros.
    """
    if allowed is None:
        return torch.softmax(scores, dim=-1)
    scores = scores.masked_fill(~allowed, float("-inf"))
    weights = torch.softmax(scores, dim=-1)
    dead = ~allowed.any(dim=-1, keepdim=True)
    return weights.masked_fill(dead, 0.0)


class MultiHeadAttention(nn.Module):
    """Plain scaled dot-product attention with an optional boolean mask."""

    def __init__(self, d_model: int, n_heads: int) -> None:
        super().__init__()
        self.n_heads = n_heads
        self.d_head = d_model // n_heads
        self.q_proj = nn.Linear(d_model, d_model)
        self.k_proj = nn.Linear(d_model, d_model)
        self.v_proj = nn.Linear(d_model, d_model)
        self.o_proj = nn.Linear(d_model, d_model)

    def forward(
        self,
        x_q: torch.Tensor,
        x_kv: torch.Tensor,
        allowed: torch.Tensor | None = None,
    ) -> torch.Tensor:
        b, tq, _ = x_q.shape
        tk = x_kv.shape[1]
        q = self.q_proj(x_q).view(b, tq, self.n_heads, self.d_head).transpose(1, 2)
        k = self.k_proj(x_kv).view(b, tk, self.n_heads, self.d_head).transpose(1, 2)
        v = self.v_proj(x_kv).view(b, tk, self.n_heads, self.d_head).transpose(1, 2)
        scores = q @ k.transpose(-1, -2) / math.sqrt(self.d_head)
        if allowed is not None and allowed.dim() == 2:
            allowed = allowed.view(1, 1, tq, tk)
        elif allowed is not None and allowed.dim() == 3:  # per-batch key mask
            allowed = allowed.view(b, 1, tq, tk)
        weights = masked_softmax(scores, allowed)
        out = (weights @ v).transpose(1, 2).reshape(b, tq, -1)
        return self.o_proj(out)


class FeedForward(nn.Module):
    def __init__(self, d_model: int) -> None:
        super().__init__()
        self.net = nn.Sequential(
            nn.Linear(d_model, 4 * d_model), nn.GELU(), nn.Linear(4 * d_model, d_model)
        )

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return self.net(x)


class SelfBlock(nn.Module):
    """Pre-norm self-attention layer followed by a pre-norm feed-forward."""

    def __init__(self, d_model: int, n_heads: int) -> None:
        super().__init__()
        self.norm1 = nn.LayerNorm(d_model)
        self.attn = MultiHeadAttention(d_model, n_heads)
        self.norm2 = nn.LayerNorm(d_model)
        self.ffn = FeedForward(d_model)

    def forward(self, x: torch.Tensor, allowed: torch.Tensor | None = None) -> torch.Tensor:
        h = self.norm1(x)
        x = x + self.attn(h, h, allowed)
        return x + self.ffn(self.norm2(x))


class CrossBlock(nn.Module):
    """Pre-norm cross-attention: queries from one stream, keys from the other."""

    def __init__(self, d_model: int, n_heads: int) -> None:
        super().__init__()
        self.norm_q = nn.LayerNorm(d_model)
        self.norm_kv = nn.LayerNorm(d_model)
        self.attn = MultiHeadAttention(d_model, n_heads)
        self.norm2 = nn.LayerNorm(d_model)
        self.ffn = FeedForward(d_model)

    def forward(
        self, x_q: torch.Tensor, x_kv: torch.Tensor, allowed: torch.Tensor | None
    ) -> torch.Tensor:
        x_q = x_q + self.attn(self.norm_q(x_q), self.norm_kv(x_kv), allowed)
        return x_q + self.ffn(self.norm2(x_q))


class BCJRFormer(nn.Module):
    """Windowed-token decoder: one token per inner position and copy."""

    def __init__(self, cfg: ModelConfig, manifest: dict) -> None:
        super().__init__()
        self.cfg = cfg
        self.n_in = manifest["n_in"]
        self.m_max = manifest.get("copies", 1)
        self.q = manifest.get("q", 2)
        feat_shape = manifest["feature_shape"]
        if feat_shape[0] != self.m_max * self.n_in:
            raise ValueError(
                f"shape mismatch: manifest tokens {feat_shape[0]} != copies*n_in"
            )
        d = cfg.d_model
        self.embed = nn.Linear(feat_shape[1], d)
        self.pos_emb = nn.Parameter(torch.randn(self.n_in, d) * 0.02)
        if cfg.sequence_embedding:
            self.seq_emb = nn.Parameter(torch.randn(self.m_max, d) * 0.02)
        self.layers = nn.ModuleList(
            SelfBlock(d, cfg.n_heads) for _ in range(cfg.n_layers)
        )
        self.final_norm = nn.LayerNorm(d)
        self.head = nn.Linear(d, 1 if self.q == 2 else self.q)
        if cfg.aggregation == "linear":
            self.agg = nn.Linear(self.m_max, 1, bias=False)

    def forward(
        self, x: torch.Tensor, pad_mask: torch.Tensor | None = None
    ) -> torch.Tensor:
        """Per-token logits of shape (B, m_max*n_in) (or (..., q) for q>2).

        Args:
            x: (B, m_max*n_in, F) feature tokens.
            pad_mask: (B, m_max*n_in) boolean, True for real (non-pad) tokens.
        """
        h = self.embed(x)
        h = h + self.pos_emb.repeat(self.m_max, 1)
        if self.cfg.sequence_embedding:
            h = h + self.seq_emb.repeat_interleave(self.n_in, dim=0)
        allowed = None
        if pad_mask is not None:
            # padded tokens may not be attended to by anyone
            allowed = pad_mask[:, None, :].expand(-1, h.shape[1], -1)
        for layer in self.layers:
            h = layer(h, allowed)
        out = self.head(self.final_norm(h))
        return out.squeeze(-1) if self.q == 2 else out

    def aggregate(
        self, logits: torch.Tensor, pad_mask: torch.Tensor | None = None
    ) -> torch.Tensor:
        """Combines per-copy predictions into (B, n_in) probabilities."""
        probs = torch.sigmoid(logits).view(-1, self.m_max, self.n_in)
        if self.cfg.aggregation == "linear":
            return self.agg(probs.transpose(1, 2)).squeeze(-1)
        if pad_mask is None:
            return probs.mean(dim=1)
        real = pad_mask.view(-1, self.m_max, self.n_in).float()
        return (probs * real).sum(dim=1) / real.sum(dim=1).clamp(min=1.0)

    def loss(self, x: torch.Tensor, target: torch.Tensor) -> torch.Tensor:
        """BCE over per-copy tokens (multi-class CE for q > 2)."""
        logits = self(x)
        tiled = target.repeat(1, self.m_max)
        if self.q == 2:
            return nn.functional.binary_cross_entropy_with_logits(logits, tiled)
        return nn.functional.cross_entropy(
            logits.reshape(-1, self.q), tiled.reshape(-1).long()
        )

    def predict(self, x: torch.Tensor) -> torch.Tensor:
        """Hard decisions (B, n_in) after aggregation."""
        with torch.no_grad():
            probs = self.aggregate(self(x))
        return (probs > 0.5).to(torch.uint8)


def ecct_attention_mask(pcm: torch.Tensor) -> torch.Tensor:
    """Parity-derived mask over n variable + (n-k) syndrome tokens.

    Token i attends to token j iff they co-occur in a parity check:
    variables sharing a check, variable/check incidence, checks sharing a
    variable, plus self-attention.
    """
    h = (pcm > 0)
    n_checks, n = h.shape
    t = n + n_checks
    allowed = torch.zeros(t, t, dtype=torch.bool)
    var_var = (h.T.float() @ h.float()) > 0
    chk_chk = (h.float() @ h.T.float()) > 0
    allowed[:n, :n] = var_var
    allowed[n:, n:] = chk_chk
    allowed[:n, n:] = h.T
    allowed[n:, :n] = h
    allowed |= torch.eye(t, dtype=torch.bool)
    return allowed


class ECCT(nn.Module):
    """Error-correction transformer over magnitude + syndrome tokens."""

    def __init__(self, cfg: ModelConfig, manifest: dict) -> None:
        super().__init__()
        self.cfg = cfg
        pcm = torch.tensor(manifest["ecct"]["pcm"])
        self.n = pcm.shape[1]
        self.n_tokens = self.n + pcm.shape[0]
        if manifest["feature_shape"][0] != self.n_tokens:
            raise ValueError(
                f"shape mismatch: manifest tokens {manifest['feature_shape'][0]}"
                f" != n + checks"
            )
        d = cfg.d_model
        self.register_buffer("allowed", ecct_attention_mask(pcm))
        self.embed = nn.Linear(1, d)
        self.pos_emb = nn.Parameter(torch.randn(self.n_tokens, d) * 0.02)
        self.layers = nn.ModuleList(
            SelfBlock(d, cfg.n_heads) for _ in range(cfg.n_layers)
        )
        self.final_norm = nn.LayerNorm(d)
        self.token_head = nn.Linear(d, 1)
        self.readout = nn.Linear(self.n_tokens, self.n)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        """Noise-bit logits of shape (B, n)."""
        h = self.embed(x) + self.pos_emb
        for layer in self.layers:
            h = layer(h, self.allowed)
        tok = self.token_head(self.final_norm(h)).squeeze(-1)
        return self.readout(tok)

    def loss(self, x: torch.Tensor, target: torch.Tensor) -> torch.Tensor:
        return nn.functional.binary_cross_entropy_with_logits(self(x), target)

    def predict(self, x: torch.Tensor) -> torch.Tensor:
        with torch.no_grad():
            return (torch.sigmoid(self(x)) > 0.5).to(torch.uint8)


def conv_generator_support(polys: str, n_sections: int, n_c: int) -> torch.Tensor:
    """Boolean (input-bit, codeword-bit) dependence from octal generators.

    The MSB of each octal polynomial taps the current input, so input j
    reaches the section-s output of generator c iff 0 <= s-j <= memory and
    that tap is set.
    """
    gens = [int(tok, 8) for tok in polys.split(",")]
    memory = max(g.bit_length() for g in gens) - 1
    taps = [
        [(g >> (memory - k)) & 1 for k in range(memory + 1)] for g in gens
    ]
    support = torch.zeros(n_sections, n_sections * n_c, dtype=torch.bool)
    for j in range(n_sections):
        for k in range(memory + 1):
            s = j + k
            if s >= n_sections:
                break
            for c in range(n_c):
                if taps[c][k]:
                    support[j, s * n_c + c] = True
    return support


class ConvBCJRFormer(nn.Module):
    """Two-stream decoder with generator-masked cross-attention.

    Each decoder block runs n_layers of self-attention on the symbol and
    state streams, then one cross-attention block: symbols query states
    under the transposed generator support, states query symbols under the
    support itself.
    """

    def __init__(self, cfg: ModelConfig, manifest: dict) -> None:
        super().__init__()
        self.cfg = cfg
        conv = manifest["conv"]
        self.n_in = conv["symbol_tokens"]
        self.n_state = conv["state_tokens"]
        if manifest["feature_shape"][0] != self.n_in + self.n_state:
            raise ValueError(
                f"shape mismatch: manifest tokens {manifest['feature_shape'][0]}"
                f" != symbol + state tokens"
            )
        width = manifest["feature_shape"][1]
        d = cfg.d_model
        support = conv_generator_support(conv["polys"], self.n_state, conv["n_c"])
        self.register_buffer("mask_state_to_symb", support)
        self.register_buffer("mask_symb_to_state", support.T.contiguous())
        self.embed_symb = nn.Linear(width, d)
        self.embed_state = nn.Linear(width, d)
        self.pos_symb = nn.Parameter(torch.randn(self.n_in, d) * 0.02)
        self.pos_state = nn.Parameter(torch.randn(self.n_state, d) * 0.02)
        self.blocks = nn.ModuleList()
        for _ in range(cfg.n_blocks):
            self.blocks.append(
                nn.ModuleDict(
                    {
                        "symb": nn.ModuleList(
                            SelfBlock(d, cfg.n_heads) for _ in range(cfg.n_layers)
                        ),
                        "state": nn.ModuleList(
                            SelfBlock(d, cfg.n_heads) for _ in range(cfg.n_layers)
                        ),
                        "cross_symb": CrossBlock(d, cfg.n_heads),
                        "cross_state": CrossBlock(d, cfg.n_heads),
                    }
                )
            )
        self.norm_symb = nn.LayerNorm(d)
        self.norm_state = nn.LayerNorm(d)
        self.head_symb = nn.Linear(d, 1)
        self.head_state = nn.Linear(d, 1)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        """Logits (B, n_in + n_state): inner bits then input/termination bits."""
        hs = self.embed_symb(x[:, : self.n_in]) + self.pos_symb
        hz = self.embed_state(x[:, self.n_in :]) + self.pos_state
        m_s2y = self.mask_symb_to_state if self.cfg.cross_masking else None
        m_y2s = self.mask_state_to_symb if self.cfg.cross_masking else None
        for block in self.blocks:
            for layer in block["symb"]:
                hs = layer(hs)
            for layer in block["state"]:
                hz = layer(hz)
            hs_new = block["cross_symb"](hs, hz, m_s2y)
            hz = block["cross_state"](hz, hs, m_y2s)
            hs = hs_new
        out_s = self.head_symb(self.norm_symb(hs)).squeeze(-1)
        out_z = self.head_state(self.norm_state(hz)).squeeze(-1)
        return torch.cat([out_s, out_z], dim=1)

    def loss(self, x: torch.Tensor, target: torch.Tensor) -> torch.Tensor:
        return nn.functional.binary_cross_entropy_with_logits(self(x), target)

    def predict(self, x: torch.Tensor) -> torch.Tensor:
        with torch.no_grad():
            return (torch.sigmoid(self(x)) > 0.5).to(torch.uint8)


def build_model(cfg: ModelConfig, manifest: dict) -> nn.Module:
    """Instantiates the variant named by cfg against a dataset manifest."""
    variant = manifest.get("variant")
    expected = {"bcjrformer": "window", "convbcjrformer": "conv", "ecct": "ecct"}
    if variant is not None and variant != expected[cfg.variant]:
        raise ValueError(
            f"dataset variant {variant!r} does not match model {cfg.variant!r}"
        )
    if cfg.variant == "bcjrformer":
        return BCJRFormer(cfg, manifest)
    if cfg.variant == "ecct":
        return ECCT(cfg, manifest)
    return ConvBCJRFormer(cfg, manifest)


def count_parameters(model: nn.Module) -> int:
    return sum(p.numel() for p in model.parameters() if p.requires_grad)
