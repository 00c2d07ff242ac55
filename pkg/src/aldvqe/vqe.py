"""Noiseless VQE: BFGS with Armijo backtracking on exact statevector energies."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .ansatz import AnsatzEnergy, AnsatzSpec
from .operators import QubitOperator

log = logging.getLogger(__name__)


@dataclass
class VqeConfig:
    energy_tol: float = 1e-9
    grad_tol: float = 1e-6
    max_iter: int = 500
    seed: int = 0
    gradient: str = "adjoint"  # or "parameter-shift"

    def __post_init__(self):
        if self.energy_tol <= 0 or self.grad_tol <= 0:
            raise ValueError("tolerances must be positive")
        if self.gradient not in ("adjoint", "parameter-shift"):
            raise ValueError(f"unknown gradient method {self.gradient!r}")


@dataclass
class VqeResult:
    energy: float
    theta: np.ndarray
    history: list[tuple[np.ndarray, float]] = field(default_factory=list)
    converged: bool = False
    n_iterations: int = 0
    n_evaluations: int = 0


def parameter_shift_gradient(H: QubitOperator, spec: AnsatzSpec, theta=None) -> np.ndarray:
    """dE/dtheta via the +-pi/2 shift rule applied to every PAULIEXP of the ansatz."""
    ev = AnsatzEnergy(H, spec)
    return ev.parameter_shift_gradient(spec.theta if theta is None else theta)


def minimize(H: QubitOperator, spec: AnsatzSpec, config: VqeConfig | None = None) -> VqeResult:
    """Optimize ``spec.theta`` starting from its current values.

    Converged means ``|dE| < energy_tol`` on the last accepted step and
    ``max|grad| < grad_tol``; on the starting point only the gradient test
    applies. Running out of iterations or line-search failure returns
    ``converged=False`` rather than raising.
    """
    config = config or VqeConfig()
    ev = AnsatzEnergy(H, spec)

    def fg(x):
        if config.gradient == "adjoint":
            return ev.energy_and_gradient(x)
        return ev.energy(x), ev.parameter_shift_gradient(x)

    x = spec.theta.astype(float).copy()
    f, g = fg(x)
    history = [(x.copy(), f)]
    n = x.size
    if n == 0 or np.max(np.abs(g), initial=0.0) < config.grad_tol:
        return VqeResult(f, x, history, True, 0, ev.n_evaluations)

    hinv = np.eye(n)
    converged = False
    it = 0
    for it in range(1, config.max_iter + 1):
        p = -hinv @ g
        slope = float(g @ p)
        if slope >= 0:
            hinv = np.eye(n)
            p, slope = -g, -float(g @ g)
        alpha, accepted = 1.0, False
        for _ in range(60):
            x_new = x + alpha * p
            f_new = ev.energy(x_new)
            if f_new <= f + 1e-4 * alpha * slope:
                accepted = True
                break
            alpha *= 0.5
        if not accepted:
            # no descent left at machine precision; final verdict from the gradient
            converged = np.max(np.abs(g)) < config.grad_tol
            log.debug("line search stalled at iteration %d", it)
            break
        f_new, g_new = fg(x_new)
        s, y = x_new - x, g_new - g
        df = f - f_new
        x, f, g = x_new, f_new, g_new
        history.append((x.copy(), f))
        sy = float(s @ y)
        if sy > 1e-14:
            rho = 1.0 / sy
            v = np.eye(n) - rho * np.outer(s, y)
            hinv = v @ hinv @ v.T + rho * np.outer(s, s)
        if abs(df) < config.energy_tol and np.max(np.abs(g)) < config.grad_tol:
            converged = True
            break
    return VqeResult(f, x, history, converged, it, ev.n_evaluations)
