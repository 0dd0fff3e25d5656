"""Reference fine-scale solves: static coupled system and backward Euler."""

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import SolverError

RESIDUAL_TOL = 1e-10


@dataclass
class SolutionField:
    """Nodal solution pair on the full fine grid (zeros on the boundary)."""

    u1: np.ndarray
    u2: np.ndarray
    time: float = 0.0

    def stacked_free(self, sys):
        return sys.full_to_free(self.u1, self.u2)


@dataclass
class SolutionSeries:
    """Backward Euler trajectory, including the initial state."""

    times: np.ndarray
    states: list = field(default_factory=list)

    @property
    def final(self):
        return self.states[-1]


def _check_residual(B, x, F, what):
    res = B @ x - F
    scale = np.linalg.norm(F)
    rel = np.linalg.norm(res) / scale if scale > 0 else np.linalg.norm(res)
    if not np.isfinite(rel) or rel > RESIDUAL_TOL:
        raise SolverError(
            f"{what}: relative residual {rel:.3e} exceeds {RESIDUAL_TOL:.0e}",
            residual=rel)
    return rel


def solve_static(sys, f1, f2):
    """Solve the static coupled system for a given source pair."""
    F = sys.load_free(f1, f2)
    if not np.all(np.isfinite(F)):
        raise SolverError("source vector has non-finite entries")
    if np.linalg.norm(F) == 0.0:
        x = np.zeros(2 * sys.n_free)
    else:
        try:
            x = spla.spsolve(sys.B.tocsc(), F)
        except RuntimeError as exc:
            raise SolverError(f"sparse factorization failed: {exc}") from exc
        if not np.all(np.isfinite(x)):
            raise SolverError("solver produced non-finite values "
                              "(singular or near-singular system)")
    _check_residual(sys.B, x, F, "static solve")
    u1, u2 = sys.free_to_full(x)
    return SolutionField(u1, u2)


def solve_dynamic(sys, f1, f2, u0=None, dt=0.05, t_final=1.0):
    """Backward Euler march: (C/dt + B) u_next = C u/dt + F each step.

    ``f1``/``f2`` may be constant source specs or callables of time returning
    one.  Returns the whole trajectory including the initial state.
    """
    if dt <= 0:
        raise SolverError(f"dt={dt}: time step must be positive")
    if t_final < dt:
        raise SolverError(f"t_final={t_final} is smaller than dt={dt}")
    n_steps = int(round(t_final / dt))

    if u0 is None:
        x = np.zeros(2 * sys.n_free)
        u1, u2 = sys.free_to_full(x)
    else:
        u1, u2 = np.asarray(u0.u1, dtype=float), np.asarray(u0.u2, dtype=float)
        x = sys.full_to_free(u1, u2)

    time_dependent = callable(f1) or callable(f2)
    if not time_dependent:
        F = sys.load_free(f1, f2)

    M = (sys.C / dt + sys.B).tocsc()
    try:
        lu = spla.splu(M)
    except RuntimeError as exc:
        raise SolverError(f"time-step factorization failed: {exc}") from exc

    times = [0.0]
    states = [SolutionField(u1.copy(), u2.copy(), 0.0)]
    for step in range(1, n_steps + 1):
        t = step * dt
        if time_dependent:
            F = sys.load_free(f1(t) if callable(f1) else f1,
                              f2(t) if callable(f2) else f2)
        rhs = sys.C @ x / dt + F
        x = lu.solve(rhs)
        if not np.all(np.isfinite(x)):
            raise SolverError(f"non-finite state at t={t}")
        _check_residual(M, x, rhs, f"step {step}")
        u1, u2 = sys.free_to_full(x)
        times.append(t)
        states.append(SolutionField(u1, u2, t))
    return SolutionSeries(np.array(times), states)


def c_norm(sys, state):
    """Storage-weighted norm of a solution pair."""
    x = state.stacked_free(sys) if isinstance(state, SolutionField) else state
    return float(np.sqrt(x @ (sys.C @ x)))


def galerkin_residual(sys, solution, f1, f2):
    """Per-component residual functional of a static solution."""
    x = solution.stacked_free(sys)
    F = sys.load_free(f1, f2)
    return F - sys.B @ x
