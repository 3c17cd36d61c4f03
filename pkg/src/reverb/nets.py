"""Minimal dense networks with reverse-mode gradients, no framework.

Hidden layers use tanh; the output layer is linear. ``backward`` implements
the exact chain rule for an upstream gradient on the outputs, so analytic
gradients can be checked against finite differences in the tests.
"""

from __future__ import annotations

import numpy as np

Array = np.ndarray


class MLP:
    def __init__(self, sizes: tuple[int, ...], rng: np.random.Generator) -> None:
        if len(sizes) < 2:
            raise ValueError("need at least input and output sizes")
        self.sizes = tuple(int(s) for s in sizes)
        self.weights: list[Array] = []
        self.biases: list[Array] = []
        for n_in, n_out in zip(sizes[:-1], sizes[1:]):
            self.weights.append(rng.normal(0.0, 1.0 / np.sqrt(n_in), size=(n_in, n_out)))
            self.biases.append(np.zeros(n_out))

    @property
    def n_layers(self) -> int:
        return len(self.weights)

    def forward(self, x: Array) -> Array:
        out, _ = self.forward_cached(x)
        return out

    def forward_cached(self, x: Array) -> tuple[Array, list[Array]]:
        """Returns outputs and the per-layer activations needed for backward."""
        h = np.atleast_2d(np.asarray(x, dtype=float))
        acts = [h]
        for i in range(self.n_layers):
            z = h @ self.weights[i] + self.biases[i]
            h = np.tanh(z) if i < self.n_layers - 1 else z
            acts.append(h)
        return h, acts

    def backward(self, acts: list[Array], grad_out: Array) -> list[Array]:
        """Gradients of sum(grad_out * outputs) w.r.t. the flat parameter list."""
        grads: list[Array] = [np.empty(0)] * (2 * self.n_layers)
        delta = np.atleast_2d(grad_out)
        for i in range(self.n_layers - 1, -1, -1):
            h_in, h_out = acts[i], acts[i + 1]
            if i < self.n_layers - 1:
                delta = delta * (1.0 - h_out * h_out)  # tanh'
            grads[2 * i] = h_in.T @ delta
            grads[2 * i + 1] = delta.sum(axis=0)
            if i > 0:
                delta = delta @ self.weights[i].T
        return grads

    # --- parameter plumbing -------------------------------------------------

    def parameters(self) -> list[Array]:
        out = []
        for w, b in zip(self.weights, self.biases):
            out.extend([w, b])
        return out

    def get_flat(self) -> Array:
        return np.concatenate([p.ravel() for p in self.parameters()])

    def set_flat(self, flat: Array) -> None:
        i = 0
        for p in self.parameters():
            p[...] = flat[i : i + p.size].reshape(p.shape)
            i += p.size

    def to_lists(self) -> dict:
        return {
            "sizes": list(self.sizes),
            "weights": [w.tolist() for w in self.weights],
            "biases": [b.tolist() for b in self.biases],
        }

    @classmethod
    def from_lists(cls, data: dict) -> "MLP":
        net = cls.__new__(cls)
        net.sizes = tuple(int(s) for s in data["sizes"])
        net.weights = [np.array(w, dtype=float) for w in data["weights"]]
        net.biases = [np.array(b, dtype=float) for b in data["biases"]]
        return net


class Sgd:
    """Plain gradient descent on a parameter list."""

    def __init__(self, lr: float) -> None:
        self.lr = lr

    def step(self, params: list[Array], grads: list[Array]) -> None:
        for p, g in zip(params, grads):
            p -= self.lr * g


class Adam:
    def __init__(self, lr: float, beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        self.lr, self.beta1, self.beta2, self.eps = lr, beta1, beta2, eps
        self.m: list[Array] | None = None
        self.v: list[Array] | None = None
        self.t = 0

    def step(self, params: list[Array], grads: list[Array]) -> None:
        if self.m is None:
            self.m = [np.zeros_like(p) for p in params]
            self.v = [np.zeros_like(p) for p in params]
        self.t += 1
        b1c = 1.0 - self.beta1**self.t
        b2c = 1.0 - self.beta2**self.t
        for p, g, m, v in zip(params, grads, self.m, self.v):
            m[...] = self.beta1 * m + (1.0 - self.beta1) * g
            v[...] = self.beta2 * v + (1.0 - self.beta2) * g * g
            p -= self.lr * (m / b1c) / (np.sqrt(v / b2c) + self.eps)


def make_optimizer(kind: str, lr: float):
    if kind == "sgd":
        return Sgd(lr)
    if kind == "adam":
        return Adam(lr)
    raise ValueError(f"unknown optimizer {kind!r}")
