"""Two-layer multi-head graph attention encoder over residual graphs.

Per head: linear transform, pairwise attention logits through a
leaky-relu(0.2), softmax over each node's closed neighborhood (self-loops
are always included so isolated residual nodes keep non-empty support),
then an attention-weighted sum. Head outputs are concatenated and passed
through an ELU.

Two dropout profiles are provided:

* ``encode``             - no dropout on layer 1, attention dropout 0.3 on
                           layer 2 while training (reduced-variance profile,
                           the default for the Q-learning agent);
* ``encode_original_gat`` - the classic profile with dropout 0.6 on the
                           inputs and attention coefficients of both layers.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from critnet import autodiff as ad
from critnet.graph import Graph

IN_FEATURES = 4
N_HEADS = 8
# per-head widths 8 and 12 concatenate to hidden 64 and output 96
HIDDEN_PER_HEAD = 8
OUT_PER_HEAD = 12
HIDDEN_DIM = N_HEADS * HIDDEN_PER_HEAD
EMBEDDING_DIM = N_HEADS * OUT_PER_HEAD

ATTENTION_SLOPE = 0.2
REDUCED_LAYER2_DROPOUT = 0.3
ORIGINAL_DROPOUT = 0.6


@dataclass
class HeadParams:
    w: ad.Tensor
    a_src: ad.Tensor
    a_dst: ad.Tensor


@dataclass
class GatLayerParams:
    heads: list[HeadParams]

    @property
    def in_dim(self) -> int:
        return self.heads[0].w.shape[0]


@dataclass
class EncoderParams:
    layer1: GatLayerParams
    layer2: GatLayerParams

    def parameters(self) -> list[ad.Tensor]:
        out = []
        for layer in (self.layer1, self.layer2):
            for head in layer.heads:
                out.extend([head.w, head.a_src, head.a_dst])
        return out

    def named_parameters(self) -> list[tuple[str, ad.Tensor]]:
        out = []
        for li, layer in enumerate((self.layer1, self.layer2), start=1):
            for hi, head in enumerate(layer.heads):
                out.append((f"encoder.l{li}.h{hi}.w", head.w))
                out.append((f"encoder.l{li}.h{hi}.a_src", head.a_src))
                out.append((f"encoder.l{li}.h{hi}.a_dst", head.a_dst))
        return out


def _glorot(rng: np.random.Generator, rows: int, cols: int) -> ad.Tensor:
    limit = np.sqrt(6.0 / (rows + cols))
    return ad.tensor(rng.uniform(-limit, limit, size=(rows, cols)), requires_grad=True)


def _init_layer(rng: np.random.Generator, in_dim: int, out_dim: int) -> GatLayerParams:
    heads = []
    for _ in range(N_HEADS):
        heads.append(
            HeadParams(
                w=_glorot(rng, in_dim, out_dim),
                a_src=_glorot(rng, out_dim, 1),
                a_dst=_glorot(rng, out_dim, 1),
            )
        )
    return GatLayerParams(heads)


def init_encoder_params(rng: np.random.Generator) -> EncoderParams:
    return EncoderParams(
        layer1=_init_layer(rng, IN_FEATURES, HIDDEN_PER_HEAD),
        layer2=_init_layer(rng, HIDDEN_DIM, OUT_PER_HEAD),
    )


def attention_mask(g: Graph) -> np.ndarray:
    """Closed-neighborhood mask of the alive subgraph (adjacency + self-loops)."""
    ids = g.alive_ids()
    index = {int(v): i for i, v in enumerate(ids)}
    mask = np.eye(len(ids))
    for u, v in g.edges:
        if g.alive[u] and g.alive[v]:
            iu, iv = index[u], index[v]
            mask[iu, iv] = 1.0
            mask[iv, iu] = 1.0
    return mask


def gat_layer(
    h: ad.Tensor,
    mask: np.ndarray,
    layer: GatLayerParams,
    dropout_rate: float,
    training: bool,
    rng: np.random.Generator | None = None,
    collect_attention: list | None = None,
) -> ad.Tensor:
    """One multi-head attention layer; returns elu(concat of head outputs)."""
    n = h.shape[0]
    if mask.shape != (n, n):
        raise ValueError(f"mask shape {mask.shape} does not match {n} nodes")
    if training and dropout_rate > 0 and rng is None:
        raise ValueError("training-mode dropout needs an rng")
    ones_row = ad.tensor(np.ones((1, n)))
    ones_col = ad.tensor(np.ones((n, 1)))
    outputs = []
    for head in layer.heads:
        hw = ad.matmul(h, head.w)
        src = ad.matmul(hw, head.a_src)
        dst = ad.matmul(hw, head.a_dst)
        logits = ad.add(ad.matmul(src, ones_row), ad.matmul(ones_col, ad.transpose(dst)))
        att = ad.row_softmax_masked(ad.leaky_relu(logits, ATTENTION_SLOPE), mask)
        if collect_attention is not None:
            collect_attention.append(att.data.copy())
        att = ad.dropout(att, dropout_rate, rng, training)
        outputs.append(ad.matmul(att, hw))
    return ad.elu(ad.concat(outputs, axis=1))


def encode(
    g: Graph,
    features: np.ndarray,
    params: EncoderParams,
    training: bool = False,
    rng: np.random.Generator | None = None,
) -> ad.Tensor:
    """Per-node embeddings (n_alive x 96), reduced-dropout profile."""
    mask = attention_mask(g)
    h = ad.tensor(features)
    h = gat_layer(h, mask, params.layer1, 0.0, training, rng)
    return gat_layer(h, mask, params.layer2, REDUCED_LAYER2_DROPOUT, training, rng)


def encode_original_gat(
    g: Graph,
    features: np.ndarray,
    params: EncoderParams,
    training: bool = False,
    rng: np.random.Generator | None = None,
) -> ad.Tensor:
    """Same architecture with the original dropout-0.6 profile on both layers."""
    mask = attention_mask(g)
    h = ad.dropout(ad.tensor(features), ORIGINAL_DROPOUT, rng, training)
    h = gat_layer(h, mask, params.layer1, ORIGINAL_DROPOUT, training, rng)
    h = ad.dropout(h, ORIGINAL_DROPOUT, rng, training)
    return gat_layer(h, mask, params.layer2, ORIGINAL_DROPOUT, training, rng)
