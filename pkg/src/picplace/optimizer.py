"""Nesterov-accelerated descent with blockwise Barzilai-Borwein steps.

Each iteration: per-block BB step (Lipschitz fallback when the curvature
estimate is not positive), scaled by a cosine-annealed factor; a gradient
step from the reference point ``v``; Nesterov extrapolation; projection of the
new reference point; one gradient evaluation at the projected point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

GradFn = Callable[[np.ndarray], tuple[float, np.ndarray]]
Projector = Callable[[np.ndarray, int], np.ndarray]

OPTIMIZERS = ("bnag", "nag-bb", "nag", "adam")
STEP_BOUNDS = (1e-6, 1e3)


class DivergenceError(RuntimeError):
    """Raised when the objective or its gradient stops being finite."""

    def __init__(self, iteration: int, last_good: np.ndarray, message: str = "non-finite gradient"):
        self.iteration = iteration
        self.last_good = last_good
        super().__init__(f"diverged at iteration {iteration}: {message}")


def anneal(k: float, eta0: float, eta_min: float, k_max: int) -> float:
    k = min(max(k, 0), k_max)
    return eta_min + 0.5 * (eta0 - eta_min) * (1.0 + math.cos(math.pi * k / k_max))


def next_momentum(a: float) -> float:
    return (1.0 + math.sqrt(4.0 * a * a + 1.0)) / 2.0


def bb_step(s: np.ndarray, y: np.ndarray, prev: float, ref: float | None = None,
            bounds: tuple[float, float] = STEP_BOUNDS) -> float:
    """Barzilai-Borwein step for one block, truncated to ``bounds * ref``."""
    yy = float(np.dot(y, y))
    if math.sqrt(yy) < 1e-12:
        return prev
    alpha = float(np.dot(s, y)) / yy
    if not alpha > 0:
        alpha = min(math.sqrt(float(np.dot(s, s)) / yy), prev)
    if ref is not None:
        alpha = min(max(alpha, bounds[0] * ref), bounds[1] * ref)
    return alpha


def lipschitz_step(s: np.ndarray, y: np.ndarray, prev: float) -> float:
    ny = math.sqrt(float(np.dot(y, y)))
    if ny < 1e-12:
        return prev
    return math.sqrt(float(np.dot(s, s))) / ny


def _check(g: np.ndarray, value: float, k: int, last: np.ndarray) -> None:
    if not (np.isfinite(value) and np.all(np.isfinite(g))):
        raise DivergenceError(k, last)


@dataclass
class Nesterov:
    """Blockwise Nesterov descent.

    ``blocks`` partitions the coordinate indices. With ``rule="bb"`` each block
    gets a BB step truncated around its bootstrap step; ``rule="lipschitz"``
    uses the untruncated ``|s| / |y|`` estimate. ``anneal_steps`` turns the
    cosine step-scale schedule on.
    """

    blocks: Sequence[np.ndarray]
    eta0: float = 1.0
    eta_min: float = 0.1
    k_max: int = 1500
    bin_size: float = 1.0
    rule: str = "bb"
    anneal_steps: bool = True
    truncate: bool = True

    k: int = field(default=0, init=False)
    a: float = field(default=1.0, init=False)
    eta: float = field(default=1.0, init=False)

    def start(self, x0: np.ndarray, grad_fn: GradFn, project: Projector | None = None) -> np.ndarray:
        self.grad_fn = grad_fn
        self.project = project
        self.blocks = [np.asarray(b, dtype=int) for b in self.blocks if len(b)]
        v = project(np.array(x0, dtype=float), 0) if project else np.array(x0, dtype=float)
        self.value, g = grad_fn(v)
        _check(g, self.value, 0, v)
        self.u = v.copy()
        self.v = v
        self.g = g
        self.v_prev = None
        self.g_prev = None
        self.k = 0
        self.a = 1.0
        self.eta = self.eta0 if self.anneal_steps else 1.0
        self.ref = []
        for b in self.blocks:
            rms = math.sqrt(float(np.mean(g[b] ** 2)))
            self.ref.append(self.bin_size / rms if rms > 0 else self.bin_size)
        self.alpha = list(self.ref)
        return self.v

    def block_steps(self) -> list[float]:
        if self.v_prev is None:
            return [r * self.eta for r in self.ref]
        out = []
        for j, b in enumerate(self.blocks):
            s = self.v[b] - self.v_prev[b]
            y = self.g[b] - self.g_prev[b]
            if self.rule == "bb":
                alpha = bb_step(s, y, self.alpha[j], self.ref[j] if self.truncate else None)
            else:
                alpha = lipschitz_step(s, y, self.alpha[j])
            out.append(alpha * self.eta)
        return out

    def step(self) -> np.ndarray:
        steps = self.block_steps()
        self.alpha = steps
        u_next = self.v.copy()
        for b, alpha in zip(self.blocks, steps):
            u_next[b] = self.v[b] - alpha * self.g[b]
        a_next = next_momentum(self.a)
        v_next = u_next + (self.a - 1.0) / a_next * (u_next - self.u)
        if self.anneal_steps:
            self.eta = anneal(self.k, self.eta0, self.eta_min, self.k_max)
        if self.project is not None:
            v_next = self.project(v_next, self.k + 1)
        value, g = self.grad_fn(v_next)
        _check(g, value, self.k + 1, self.v)
        self.u, self.a = u_next, a_next
        self.v_prev, self.g_prev = self.v, self.g
        self.v, self.g, self.value = v_next, g, value
        self.k += 1
        return self.v

    def refresh_gradient(self) -> None:
        """Re-evaluate the gradient at the current point after the objective changed."""
        self.value, self.g = self.grad_fn(self.v)
        _check(self.g, self.value, self.k, self.v)

    @property
    def x(self) -> np.ndarray:
        return self.v


@dataclass
class Adam:
    blocks: Sequence[np.ndarray]
    lr: float = 1.0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    k: int = field(default=0, init=False)

    def start(self, x0, grad_fn: GradFn, project: Projector | None = None):
        self.grad_fn = grad_fn
        self.project = project
        x = project(np.array(x0, dtype=float), 0) if project else np.array(x0, dtype=float)
        self.value, self.g = grad_fn(x)
        _check(self.g, self.value, 0, x)
        self.xv = x
        self.m = np.zeros_like(x)
        self.s = np.zeros_like(x)
        self.k = 0
        return x

    def step(self):
        self.k += 1
        self.m = self.beta1 * self.m + (1 - self.beta1) * self.g
        self.s = self.beta2 * self.s + (1 - self.beta2) * self.g ** 2
        mh = self.m / (1 - self.beta1 ** self.k)
        sh = self.s / (1 - self.beta2 ** self.k)
        x = self.xv - self.lr * mh / (np.sqrt(sh) + self.eps)
        if self.project is not None:
            x = self.project(x, self.k)
        value, g = self.grad_fn(x)
        _check(g, value, self.k, self.xv)
        self.xv, self.g, self.value = x, g, value
        return x

    def refresh_gradient(self) -> None:
        self.value, self.g = self.grad_fn(self.xv)
        _check(self.g, self.value, self.k, self.xv)

    @property
    def x(self) -> np.ndarray:
        return self.xv


def make_optimizer(name: str, blocks: Sequence[np.ndarray], n: int, *, eta0: float = 1.0,
                   eta_min: float = 0.1, k_max: int = 1500, bin_size: float = 1.0):
    """Build one of the supported optimizers over ``n`` coordinates."""
    if name == "bnag":
        return Nesterov(blocks, eta0, eta_min, k_max, bin_size)
    everything = [np.arange(n)]
    if name == "nag-bb":
        return Nesterov(everything, eta0, eta_min, k_max, bin_size, rule="bb", anneal_steps=False)
    if name == "nag":
        return Nesterov(everything, eta0, eta_min, k_max, bin_size, rule="lipschitz", anneal_steps=False,
                        truncate=False)
    if name == "adam":
        return Adam(everything, lr=0.5 * bin_size)
    raise ValueError(f"unknown optimizer {name!r}; choose from {OPTIMIZERS}")
