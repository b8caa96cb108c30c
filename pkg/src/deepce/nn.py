"""A small fixed-topology network with hand-written reverse-mode gradients.

The only layers are the ones the channel estimator needs: 1x1 convolution,
x2 bilinear upsampling, ReLU and single-sample batch normalization.  All
tensors are ``(frequency, time, channel)`` numpy arrays.

Each layer exposes a forward function and a matching ``*_backward`` that
maps an upstream gradient to the gradient w.r.t. the layer input (and its
parameters, where it has any).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

BN_EPS = 1e-5


@dataclass
class Conv1x1Params:
    weight: np.ndarray  # (out_channels, in_channels)
    bias: np.ndarray  # (out_channels,)

    @property
    def in_channels(self) -> int:
        return self.weight.shape[1]

    @property
    def out_channels(self) -> int:
        return self.weight.shape[0]


@dataclass
class BatchNormParams:
    gamma: np.ndarray
    beta: np.ndarray
    eps: float = BN_EPS

    def __post_init__(self) -> None:
        if not self.eps > 0:
            raise ValueError(f"batch-norm epsilon must be positive, got {self.eps}")


@dataclass
class NetworkParams:
    """Hidden (conv, batch-norm) pairs followed by an output convolution."""

    hidden: list[tuple[Conv1x1Params, BatchNormParams]]
    output: Conv1x1Params

    def __post_init__(self) -> None:
        chans = [c.in_channels for c, _ in self.hidden] + [self.output.in_channels]
        for i, (conv, bn) in enumerate(self.hidden):
            if conv.out_channels != chans[i + 1]:
                raise ValueError(
                    f"hidden layer {i} emits {conv.out_channels} channels, next layer expects {chans[i + 1]}"
                )
            if bn.gamma.shape != (conv.out_channels,) or bn.beta.shape != (conv.out_channels,):
                raise ValueError(f"batch-norm params of layer {i} do not match {conv.out_channels} channels")

    @property
    def n_hidden(self) -> int:
        return len(self.hidden)

    def named_arrays(self) -> dict[str, np.ndarray]:
        """Flat name -> array mapping; the arrays are the live parameters."""
        out = {}
        for i, (conv, bn) in enumerate(self.hidden):
            out[f"hidden{i}.weight"] = conv.weight
            out[f"hidden{i}.bias"] = conv.bias
            out[f"hidden{i}.gamma"] = bn.gamma
            out[f"hidden{i}.beta"] = bn.beta
        out["output.weight"] = self.output.weight
        out["output.bias"] = self.output.bias
        return out

    def copy(self) -> "NetworkParams":
        return NetworkParams(
            [
                (Conv1x1Params(c.weight.copy(), c.bias.copy()), BatchNormParams(b.gamma.copy(), b.beta.copy(), b.eps))
                for c, b in self.hidden
            ],
            Conv1x1Params(self.output.weight.copy(), self.output.bias.copy()),
        )

    def zeros_like(self) -> "NetworkParams":
        net = self.copy()
        for arr in net.named_arrays().values():
            arr[...] = 0
        return net


def init_network(
    in_channels: int,
    hidden_channels: int,
    out_channels: int,
    n_hidden: int,
    rng: np.random.Generator,
    dtype=np.float64,
) -> NetworkParams:
    """Random network: conv weights and biases uniform in +-1/sqrt(fan_in), gamma=1, beta=0."""

    def conv(cin: int, cout: int) -> Conv1x1Params:
        bound = 1.0 / np.sqrt(cin)
        return Conv1x1Params(
            rng.uniform(-bound, bound, (cout, cin)).astype(dtype),
            rng.uniform(-bound, bound, cout).astype(dtype),
        )

    hidden = []
    cin = in_channels
    for _ in range(n_hidden):
        hidden.append(
            (conv(cin, hidden_channels),
             BatchNormParams(np.ones(hidden_channels, dtype), np.zeros(hidden_channels, dtype)))
        )
        cin = hidden_channels
    return NetworkParams(hidden, conv(cin, out_channels))


def param_count(net: NetworkParams) -> int:
    return sum(a.size for a in net.named_arrays().values())


# ---------------------------------------------------------------- layers


def conv1x1_forward(p: Conv1x1Params, t: np.ndarray) -> np.ndarray:
    if t.shape[-1] != p.in_channels:
        raise ValueError(f"conv expects {p.in_channels} input channels, got {t.shape[-1]}")
    out = t.reshape(-1, t.shape[-1]) @ p.weight.T
    out += p.bias
    return out.reshape(t.shape[:-1] + (p.out_channels,))


def conv1x1_backward(p: Conv1x1Params, t: np.ndarray, grad: np.ndarray) -> tuple[np.ndarray, Conv1x1Params]:
    g2 = grad.reshape(-1, grad.shape[-1])
    x2 = t.reshape(-1, t.shape[-1])
    dparams = Conv1x1Params(g2.T @ x2, g2.sum(axis=0))
    return (g2 @ p.weight).reshape(t.shape), dparams


def _up_axis(t: np.ndarray, axis: int) -> np.ndarray:
    # output j samples input coordinate (j + 0.5)/2 - 0.5, clamped at the edges
    x = np.moveaxis(t, axis, 0)
    prev = np.concatenate([x[:1], x[:-1]])
    nxt = np.concatenate([x[1:], x[-1:]])
    out = np.empty((2 * x.shape[0],) + x.shape[1:], dtype=x.dtype)
    out[0::2] = 0.75 * x + 0.25 * prev
    out[1::2] = 0.75 * x + 0.25 * nxt
    return np.moveaxis(out, 0, axis)


def _up_axis_backward(g: np.ndarray, axis: int) -> np.ndarray:
    g = np.moveaxis(g, axis, 0)
    even, odd = g[0::2], g[1::2]
    dx = 0.75 * (even + odd)
    dx[:-1] += 0.25 * even[1:]
    dx[0] += 0.25 * even[0]
    dx[1:] += 0.25 * odd[:-1]
    dx[-1] += 0.25 * odd[-1]
    return np.moveaxis(dx, 0, axis)


def upsample_bilinear_2x(t: np.ndarray) -> np.ndarray:
    """Double the frequency and time extent by separable bilinear interpolation."""
    return _up_axis(_up_axis(t, 0), 1)


def upsample_bilinear_2x_backward(grad: np.ndarray) -> np.ndarray:
    return _up_axis_backward(_up_axis_backward(grad, 1), 0)


def relu(t: np.ndarray) -> np.ndarray:
    return np.maximum(t, 0)


def relu_backward(t: np.ndarray, grad: np.ndarray) -> np.ndarray:
    return grad * (t > 0)


@dataclass
class _BNCache:
    xhat: np.ndarray
    inv_std: np.ndarray


def batch_norm(p: BatchNormParams, t: np.ndarray, cache: bool = False):
    """Normalize every channel over its whole frequency x time extent.

    Statistics always come from the tensor itself; there is no running
    average.  With ``cache=True`` also return what the backward pass needs.
    """
    if t.shape[-1] != p.gamma.shape[0]:
        raise ValueError(f"batch norm expects {p.gamma.shape[0]} channels, got {t.shape[-1]}")
    mean = t.mean(axis=(0, 1))
    centered = t - mean
    var = np.mean(centered * centered, axis=(0, 1))
    inv_std = 1.0 / np.sqrt(var + p.eps)
    xhat = centered * inv_std
    out = xhat * p.gamma + p.beta
    if cache:
        return out, _BNCache(xhat, inv_std)
    return out


def batch_norm_backward(p: BatchNormParams, c: _BNCache, grad: np.ndarray) -> tuple[np.ndarray, BatchNormParams]:
    count = grad.shape[0] * grad.shape[1]
    dbeta = grad.sum(axis=(0, 1))
    dgamma = np.sum(grad * c.xhat, axis=(0, 1))
    # d/dx of gamma * (x - mean) / std with mean and var depending on x
    dx = (p.gamma * c.inv_std / count) * (count * grad - dbeta - c.xhat * dgamma)
    return dx, BatchNormParams(dgamma, dbeta, p.eps)


# ---------------------------------------------------------------- network


@dataclass
class ForwardCache:
    inputs: list = field(default_factory=list)  # input of each hidden conv
    pre_relu: list = field(default_factory=list)
    bn: list = field(default_factory=list)
    last_hidden: np.ndarray | None = None


def forward(net: NetworkParams, z0: np.ndarray, cache: bool = False):
    """Run the generator on ``z0``.

    Hidden layers ``0..l-2`` are BN(ReLU(Up(conv(z)))), layer ``l-1`` skips
    the upsampler, and the output layer is a bare convolution.  With
    ``cache=True`` returns ``(output, ForwardCache)``.
    """
    if z0.ndim != 3:
        raise ValueError(f"input must be (frequency, time, channel), got shape {z0.shape}")
    fc = ForwardCache() if cache else None
    z = z0
    last = net.n_hidden - 1
    for i, (conv, bn) in enumerate(net.hidden):
        a = conv1x1_forward(conv, z)
        if i < last:
            a = upsample_bilinear_2x(a)
        if cache:
            fc.inputs.append(z)
            fc.pre_relu.append(a)
            z, bc = batch_norm(bn, relu(a), cache=True)
            fc.bn.append(bc)
        else:
            z = batch_norm(bn, relu(a))
    out = conv1x1_forward(net.output, z)
    if cache:
        fc.last_hidden = z
        return out, fc
    return out


def output_dims(net: NetworkParams, z0_dims: tuple[int, int, int]) -> tuple[int, int, int]:
    if z0_dims[2] != (net.hidden[0][0].in_channels if net.hidden else net.output.in_channels):
        raise ValueError(f"input has {z0_dims[2]} channels, network expects a different count")
    scale = 2 ** max(net.n_hidden - 1, 0)
    return z0_dims[0] * scale, z0_dims[1] * scale, net.output.out_channels


def backward(net: NetworkParams, cache: ForwardCache | None, grad: np.ndarray) -> NetworkParams:
    """Gradients of a scalar loss w.r.t. every parameter, given d loss / d output."""
    if cache is None or cache.last_hidden is None:
        raise ValueError("backward requires the cache of a forward pass run with cache=True")
    g, d_out = conv1x1_backward(net.output, cache.last_hidden, grad)
    last = net.n_hidden - 1
    grads = [None] * net.n_hidden
    for i in range(last, -1, -1):
        conv, bn = net.hidden[i]
        g, d_bn = batch_norm_backward(bn, cache.bn[i], g)
        g = relu_backward(cache.pre_relu[i], g)
        if i < last:
            g = upsample_bilinear_2x_backward(g)
        g, d_conv = conv1x1_backward(conv, cache.inputs[i], g)
        grads[i] = (d_conv, d_bn)
    return NetworkParams(grads, d_out)


def mse_loss(pred: np.ndarray, target: np.ndarray) -> tuple[float, np.ndarray]:
    """Mean squared error and its gradient w.r.t. ``pred``."""
    if pred.shape != target.shape:
        raise ValueError(f"prediction shape {pred.shape} != target shape {target.shape}")
    diff = pred - target
    return float(np.mean(diff * diff)), (2.0 / diff.size) * diff


# ---------------------------------------------------------------- optimizers


@dataclass
class AdamState:
    lr: float = 0.01
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    step: int = 0
    m: dict = field(default_factory=dict)
    v: dict = field(default_factory=dict)


def adam_step(state: AdamState, params: NetworkParams, grads: NetworkParams) -> None:
    """In-place bias-corrected adaptive-moment update of ``params``."""
    state.step += 1
    bc1 = 1.0 - state.beta1**state.step
    bc2 = 1.0 - state.beta2**state.step
    gmap = grads.named_arrays()
    for name, p in params.named_arrays().items():
        g = gmap[name]
        if g.shape != p.shape:
            raise ValueError(f"gradient for {name} has shape {g.shape}, parameter has {p.shape}")
        if name not in state.m:
            state.m[name] = np.zeros_like(p)
            state.v[name] = np.zeros_like(p)
        m, v = state.m[name], state.v[name]
        m *= state.beta1
        m += (1.0 - state.beta1) * g
        v *= state.beta2
        v += (1.0 - state.beta2) * (g * g)
        p -= (state.lr / bc1) * m / (np.sqrt(v / bc2) + state.eps)


def sgd_step(lr: float, params: NetworkParams, grads: NetworkParams) -> None:
    gmap = grads.named_arrays()
    for name, p in params.named_arrays().items():
        p -= lr * gmap[name]


def save_params(net: NetworkParams, path) -> None:
    """Debug snapshot as a numpy ``.npz`` of named arrays."""
    np.savez(path, **net.named_arrays())
