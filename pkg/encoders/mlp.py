"""Dual-head MLP encoder with hand-written reverse mode.

The encoder is a ReLU backbone followed by two 2-layer heads that read the
same backbone output: the intra-modal head feeds the self-supervised path
and the inter-modal head feeds the common image/caption space. Both head
outputs are l2-normalized. Rows of a 2-D input are independent samples.

Weights are stored ``(fan_in, fan_out)`` so a layer is ``x @ W + b``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from errors import DimensionMismatch, InvalidDimension, StaleCache
from numerics.linalg import (
    affine,
    l2_normalize_rows_total,
    normalize_backward,
    relu,
    relu_backward,
)
from numerics.rng import SeededRng


@dataclass
class AffineLayer:
    weight: np.ndarray
    bias: np.ndarray

    @property
    def fan_in(self) -> int:
        return self.weight.shape[0]

    @property
    def fan_out(self) -> int:
        return self.weight.shape[1]


@dataclass
class EncoderParams:
    """Backbone plus intra/inter heads.

    In ``shared`` head mode ``inter_head`` is empty and the single
    ``intra_head`` output is used as both features.
    """

    backbone: List[AffineLayer]
    intra_head: List[AffineLayer]
    inter_head: List[AffineLayer]
    head_mode: str = "separate"

    @property
    def input_dim(self) -> int:
        return self.backbone[0].fan_in

    @property
    def out_dim(self) -> int:
        return self.backbone[-1].fan_out

    @property
    def intra_dim(self) -> int:
        return self.intra_head[-1].fan_out

    @property
    def inter_dim(self) -> int:
        head = self.inter_head if self.head_mode == "separate" else self.intra_head
        return head[-1].fan_out

    def named_parameters(self) -> List[Tuple[str, np.ndarray]]:
        """All parameter arrays in a fixed order."""
        named = []
        for group in ("backbone", "intra_head", "inter_head"):
            for i, layer in enumerate(getattr(self, group)):
                named.append((f"{group}.{i}.weight", layer.weight))
                named.append((f"{group}.{i}.bias", layer.bias))
        return named

    def shapes(self) -> Tuple[Tuple[int, ...], ...]:
        return tuple(a.shape for _, a in self.named_parameters())

    def parameter_count(self) -> int:
        return sum(a.size for _, a in self.named_parameters())

    def copy(self) -> "EncoderParams":
        return self._map(np.copy)

    def zeros_like(self) -> "EncoderParams":
        return self._map(np.zeros_like)

    def flatten(self) -> np.ndarray:
        return np.concatenate([a.ravel() for _, a in self.named_parameters()])

    def with_flat(self, flat: np.ndarray) -> "EncoderParams":
        """Copy of these params with values taken from ``flat``."""
        if flat.shape != (self.parameter_count(),):
            raise DimensionMismatch(f"flat vector {flat.shape} != {self.parameter_count()} parameters")
        offset = 0
        arrays = []
        for _, a in self.named_parameters():
            arrays.append(np.array(flat[offset:offset + a.size]).reshape(a.shape))
            offset += a.size
        it = iter(arrays)
        return self._map(lambda _: next(it))

    def _map(self, fn) -> "EncoderParams":
        def group(layers):
            return [AffineLayer(fn(layer.weight), fn(layer.bias)) for layer in layers]

        return EncoderParams(
            backbone=group(self.backbone),
            intra_head=group(self.intra_head),
            inter_head=group(self.inter_head),
            head_mode=self.head_mode,
        )


@dataclass
class FeaturePairOutput:
    intra: np.ndarray
    inter: np.ndarray


@dataclass
class _HeadCache:
    hidden_pre: np.ndarray
    hidden: np.ndarray
    unit: np.ndarray
    norms: np.ndarray


@dataclass
class ForwardCache:
    """Activations kept by ``forward_batch`` for ``backward``."""

    shapes: Tuple[Tuple[int, ...], ...]
    layer_inputs: List[np.ndarray]
    pre_activations: List[np.ndarray]
    backbone_out: np.ndarray
    heads: Dict[str, _HeadCache] = field(default_factory=dict)
    single: bool = False

    def min_abs_pre_activation(self) -> float:
        """Distance of the closest ReLU input to its kink."""
        pres = self.pre_activations[:-1] + [h.hidden_pre for h in self.heads.values()]
        if not pres:
            return float("inf")
        return float(min(np.min(np.abs(p)) for p in pres))

    def min_head_norm(self) -> float:
        """Smallest pre-normalization head output norm; 0 for a dead head."""
        norms = [np.where(np.isinf(h.norms), 0.0, h.norms) for h in self.heads.values()]
        if not norms:
            return float("inf")
        return float(min(np.min(n) for n in norms))


def init_encoder(
    layer_dims: Sequence[int],
    intra_dim: int,
    inter_dim: int,
    rng: SeededRng,
    head_mode: str = "separate",
    head_hidden: Optional[int] = None,
) -> EncoderParams:
    """Create an encoder with Glorot-uniform weights and zero biases.

    Args:
        layer_dims: Backbone widths including input and output, e.g. ``[32, 64, 64]``
        intra_dim: Output width of the intra-modal head
        inter_dim: Output width of the inter-modal head
        rng: Stream the weights are drawn from (backbone, then intra, then inter)
        head_mode: ``separate`` (two heads) or ``shared`` (one head for both features)
        head_hidden: Head hidden width, defaults to the backbone output width

    Returns:
        Freshly initialized EncoderParams
    """
    dims = list(layer_dims)
    if len(dims) < 2:
        raise InvalidDimension(f"backbone needs input and output dims, got {dims}")
    hidden = dims[-1] if head_hidden is None else head_hidden
    for d in [*dims, intra_dim, inter_dim, hidden]:
        if int(d) < 1:
            raise InvalidDimension(f"all dimensions must be >= 1, got {d}")
    if head_mode not in ("separate", "shared"):
        raise ValueError(f"unknown head mode {head_mode!r}")
    if head_mode == "shared" and intra_dim != inter_dim:
        raise InvalidDimension("a shared head produces one feature; intra_dim must equal inter_dim")

    def layer(fan_in: int, fan_out: int) -> AffineLayer:
        limit = np.sqrt(6.0 / (fan_in + fan_out))
        return AffineLayer(
            weight=rng.uniform(-limit, limit, size=(fan_in, fan_out)),
            bias=np.zeros(fan_out),
        )

    backbone = [layer(dims[i], dims[i + 1]) for i in range(len(dims) - 1)]
    intra_head = [layer(dims[-1], hidden), layer(hidden, intra_dim)]
    inter_head = [] if head_mode == "shared" else [layer(dims[-1], hidden), layer(hidden, inter_dim)]
    return EncoderParams(backbone, intra_head, inter_head, head_mode)


def _head_forward(head: List[AffineLayer], features: np.ndarray) -> _HeadCache:
    hidden_pre = affine(features, head[0].weight, head[0].bias)
    hidden = relu(hidden_pre)
    # a dead head (zero output) yields a fixed unit vector and no gradient
    unit, norms = l2_normalize_rows_total(affine(hidden, head[1].weight, head[1].bias))
    return _HeadCache(hidden_pre, hidden, unit, norms)


def backbone_features(enc: EncoderParams, x: np.ndarray) -> np.ndarray:
    """Backbone output (pre-head, un-normalized) for a batch."""
    _, cache = _backbone_forward(enc, x)
    return cache.backbone_out


def _backbone_forward(enc: EncoderParams, x: np.ndarray):
    x = np.asarray(x, dtype=np.float64)
    single = x.ndim == 1
    batch = x[None, :] if single else x
    if batch.ndim != 2 or batch.shape[1] != enc.input_dim:
        raise DimensionMismatch(f"input shape {x.shape} does not match encoder input dim {enc.input_dim}")
    layer_inputs, pre_activations = [], []
    h = batch
    last = len(enc.backbone) - 1
    for i, layer in enumerate(enc.backbone):
        layer_inputs.append(h)
        z = affine(h, layer.weight, layer.bias)
        pre_activations.append(z)
        h = relu(z) if i < last else z
    cache = ForwardCache(enc.shapes(), layer_inputs, pre_activations, h, single=single)
    return h, cache


def forward_batch(enc: EncoderParams, x: np.ndarray):
    """Embed a batch; returns ``(intra, inter, cache)`` with unit-norm rows."""
    features, cache = _backbone_forward(enc, x)
    cache.heads["intra"] = _head_forward(enc.intra_head, features)
    if enc.head_mode == "separate":
        cache.heads["inter"] = _head_forward(enc.inter_head, features)
        inter = cache.heads["inter"].unit
    else:
        inter = cache.heads["intra"].unit.copy()
    return cache.heads["intra"].unit, inter, cache


def forward(enc: EncoderParams, x: np.ndarray) -> Tuple[FeaturePairOutput, ForwardCache]:
    """Embed one input vector (or a batch) into unit intra/inter features."""
    intra, inter, cache = forward_batch(enc, x)
    if cache.single:
        return FeaturePairOutput(intra[0].copy(), inter[0].copy()), cache
    return FeaturePairOutput(intra, inter), cache


def _head_backward(head: List[AffineLayer], head_cache: _HeadCache, features: np.ndarray, grad_unit: np.ndarray):
    grad_raw = normalize_backward(head_cache.unit, head_cache.norms, grad_unit)
    out_layer = AffineLayer(head_cache.hidden.T @ grad_raw, grad_raw.sum(axis=0))
    grad_hidden = relu_backward(head_cache.hidden_pre, grad_raw @ head[1].weight.T)
    in_layer = AffineLayer(features.T @ grad_hidden, grad_hidden.sum(axis=0))
    return [in_layer, out_layer], grad_hidden @ head[0].weight.T


def backward(
    enc: EncoderParams,
    cache: ForwardCache,
    grad_intra: np.ndarray,
    grad_inter: np.ndarray,
) -> EncoderParams:
    """Parameter gradients of ``sum(grad_intra * intra) + sum(grad_inter * inter)``.

    The gradients flow through the l2 normalization of both heads. The
    result has the same structure as ``enc``.
    """
    if cache.shapes != enc.shapes():
        raise StaleCache("cached activations were produced by an encoder of a different shape")
    batch = cache.backbone_out.shape[0]
    grad_intra = np.asarray(grad_intra, dtype=np.float64)
    grad_inter = np.asarray(grad_inter, dtype=np.float64)
    if cache.single and grad_intra.ndim == 1 and grad_inter.ndim == 1:
        grad_intra, grad_inter = grad_intra[None, :], grad_inter[None, :]
    if grad_intra.shape != (batch, enc.intra_dim) or grad_inter.shape != (batch, enc.inter_dim):
        raise StaleCache(
            f"gradient shapes {grad_intra.shape}/{grad_inter.shape} do not match cached batch of {batch}"
        )

    features = cache.backbone_out
    if enc.head_mode == "separate":
        intra_grads, grad_features = _head_backward(enc.intra_head, cache.heads["intra"], features, grad_intra)
        inter_grads, grad_from_inter = _head_backward(enc.inter_head, cache.heads["inter"], features, grad_inter)
        grad_features = grad_features + grad_from_inter
    else:
        intra_grads, grad_features = _head_backward(
            enc.intra_head, cache.heads["intra"], features, grad_intra + grad_inter
        )
        inter_grads = []

    backbone_grads: List[AffineLayer] = []
    grad = grad_features
    last = len(enc.backbone) - 1
    for i in range(last, -1, -1):
        if i < last:
            grad = relu_backward(cache.pre_activations[i], grad)
        layer_input = cache.layer_inputs[i]
        backbone_grads.append(AffineLayer(layer_input.T @ grad, grad.sum(axis=0)))
        grad = grad @ enc.backbone[i].weight.T
    backbone_grads.reverse()
    return EncoderParams(backbone_grads, intra_grads, inter_grads, enc.head_mode)


def shared_head_hidden_for_budget(
    layer_dims: Sequence[int],
    intra_dim: int,
    inter_dim: int,
    shared_dim: int,
    head_hidden: Optional[int] = None,
) -> int:
    """Hidden width that gives a shared head the parameter count of two separate heads."""
    width = layer_dims[-1]
    hidden = width if head_hidden is None else head_hidden
    separate = sum(
        width * hidden + hidden + hidden * out + out for out in (intra_dim, inter_dim)
    )
    # width*h + h + h*shared + shared == separate
    return max(1, int(round((separate - shared_dim) / (width + 1 + shared_dim))))
