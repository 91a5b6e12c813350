"""Linear UCB with per-arm ridge statistics.

Each arm keeps ``A = I + sum x x^T`` and ``b = sum r x``. The inverse of
``A`` is maintained alongside by Sherman-Morrison rank-one updates.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class ArmState:
    A: np.ndarray
    b: np.ndarray
    A_inv: np.ndarray

    @classmethod
    def identity(cls, dim: int) -> "ArmState":
        return cls(np.eye(dim), np.zeros(dim), np.eye(dim))

    def add_context(self, x: np.ndarray) -> None:
        self.A += np.outer(x, x)
        u = self.A_inv @ x
        self.A_inv -= np.outer(u, u) / (1.0 + x @ u)

    def add_reward(self, x: np.ndarray, r: float) -> None:
        self.b += r * x

    def theta(self) -> np.ndarray:
        """Ridge estimate scaled to unit l2 norm (zero stays zero)."""
        theta = self.A_inv @ self.b
        norm = np.linalg.norm(theta)
        return theta / norm if norm > 0 else theta

    def refresh_inverse(self) -> None:
        self.A_inv = np.linalg.inv(self.A)


@dataclass(frozen=True)
class ArmScore:
    mu: float
    sigma: float

    @property
    def ucb(self) -> float:
        return self.mu + self.sigma


def init_arms(warm_X, warm_y, num_arms: int) -> list[ArmState]:
    """Ridge statistics from labelled warm-start rows.

    Every arm gets ``A = I + sum_t x_t x_t^T`` over rows with a label
    (``y >= 0``); arm ``k`` gets ``b = sum_{t: y_t = k} x_t``.
    """
    if num_arms < 2:
        raise ValueError("need at least two arms")
    warm_X = np.atleast_2d(np.asarray(warm_X, dtype=np.float64))
    warm_y = np.asarray(warm_y, dtype=np.int64)
    dim = warm_X.shape[1]
    labeled = warm_y >= 0
    Xl = warm_X[labeled]
    A = np.eye(dim) + Xl.T @ Xl
    A_inv = np.linalg.inv(A)
    arms = []
    for k in range(num_arms):
        b = Xl[warm_y[labeled] == k].sum(axis=0)
        arms.append(ArmState(A.copy(), b, A_inv.copy()))
    return arms


def score_arm(arm: ArmState, x, alpha: float) -> ArmScore:
    x = np.asarray(x, dtype=np.float64)
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(arm.b))):
        raise ValueError("non-finite context or arm statistics")
    mu = float(arm.theta() @ x)
    sigma = alpha * np.sqrt(max(float(x @ arm.A_inv @ x), 0.0))
    return ArmScore(mu, float(sigma))


def select_arm(scores) -> int:
    """Index of the largest UCB; ties go to the lowest index."""
    if len(scores) == 0:
        raise ValueError("no arms to select from")
    ucb = [s.ucb if isinstance(s, ArmScore) else float(s) for s in scores]
    return int(np.argmax(ucb))


def update(arms: list[ArmState], chosen: int, x, h: int, imputed_reward: float | None = None,
           classic: bool = False) -> list[ArmState]:
    """Apply the response ``h`` for arm ``chosen`` in place.

    * ``h = 1``: every arm's ``A`` absorbs ``x x^T`` (only the chosen arm
      with ``classic=True``); the chosen ``b`` gains ``x``.
    * ``h = 0``: the chosen ``A`` absorbs ``x x^T``.
    * ``h = -1``: with an imputed reward ``r`` the chosen ``A`` absorbs
      ``x x^T`` and its ``b`` gains ``r x``; without one nothing changes.
    """
    x = np.asarray(x, dtype=np.float64)
    if h == 1:
        for k, arm in enumerate(arms):
            if not classic or k == chosen:
                arm.add_context(x)
        arms[chosen].add_reward(x, 1.0)
    elif h == 0:
        arms[chosen].add_context(x)
    elif h == -1:
        if imputed_reward is not None:
            arms[chosen].add_context(x)
            arms[chosen].add_reward(x, float(imputed_reward))
    else:
        raise ValueError(f"response must be -1, 0 or 1, got {h!r}")
    return arms


def ridge_stats(contexts, rewards, dim: int):
    """``(A, theta)`` with ``A = I + sum c c^T`` and unit-norm ``theta``.

    Used where the contexts of an arm change between steps and the
    statistics are rebuilt from scratch.
    """
    A = np.eye(dim)
    if len(contexts) == 0:
        return A, np.zeros(dim)
    C = np.asarray(contexts, dtype=np.float64)
    r = np.asarray(rewards, dtype=np.float64)
    A += C.T @ C
    theta = np.linalg.solve(A, C.T @ r)
    norm = np.linalg.norm(theta)
    return A, (theta / norm if norm > 0 else theta)
