"""Generic smooth concave maximization under concave inequality and box constraints.

Log-barrier interior-point method: maximize f(v) + (1/t) * sum ln g_j(v)
(finite box sides contribute their own barrier terms), with Newton inner
iterations and Armijo backtracking, multiplying t by 10 per outer stage until
the barrier gap m/t drops below tolerance.

Builders may supply an exact combined-curvature callback; without one the
inner iterations fall back to damped BFGS seeded with the Gauss-Newton part
of the barrier Hessian.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

_ARMIJO_SLOPE = 0.25
_BACKTRACK = 0.5
_T_GROWTH = 10.0
_MAX_STAGES = 40
_RIDGE0 = 1e-10


class NumericError(RuntimeError):
    """A callback returned a non-finite value at an interior point."""

    def __init__(self, message, point=None):
        super().__init__(message if point is None else f"{message} at v={point}")
        self.point = None if point is None else np.array(point)


@dataclass
class ConcaveProgram:
    """Concave maximization problem in callback form.

    objective/gradient: smooth concave f and its gradient.
    constraints/constraint_jac: vector g(v) >= 0 of smooth concave functions
    and its (m, n) Jacobian; m may be zero.
    lower/upper: box bounds, +-inf entries allowed.
    curvature: optional callback (v, w) -> hess f(v) + sum_j w_j hess g_j(v),
    enabling exact Newton steps.
    """

    n: int
    objective: Callable[[np.ndarray], float]
    gradient: Callable[[np.ndarray], np.ndarray]
    constraints: Callable[[np.ndarray], np.ndarray]
    constraint_jac: Callable[[np.ndarray], np.ndarray]
    lower: np.ndarray
    upper: np.ndarray
    curvature: Optional[Callable[[np.ndarray, np.ndarray], np.ndarray]] = None
    name: str = ""

    def __post_init__(self):
        self.lower = np.asarray(self.lower, dtype=float)
        self.upper = np.asarray(self.upper, dtype=float)
        if self.lower.shape != (self.n,) or self.upper.shape != (self.n,):
            raise ValueError("box bounds must have shape (n,)")
        if np.any(self.lower >= self.upper):
            raise ValueError("need lower < upper on every coordinate")

    def midpoint(self) -> np.ndarray:
        lo = np.where(np.isfinite(self.lower), self.lower, -1.0)
        hi = np.where(np.isfinite(self.upper), self.upper, 1.0)
        return 0.5 * (lo + hi)


@dataclass
class SolveReport:
    solution: np.ndarray
    objective: float
    kkt_residual: float
    barrier_iterations: int
    status: str                      # converged | max_iters | infeasible
    stage_objectives: list = field(default_factory=list)


def _interior(program: ConcaveProgram, v: np.ndarray, margin: float = 0.0) -> bool:
    if np.any(v <= program.lower + margin) or np.any(v >= program.upper - margin):
        return False
    g = np.atleast_1d(program.constraints(v))
    return bool(np.all(np.isfinite(g)) and np.all(g > margin))


class _Barrier:
    """Barrier subproblem phi_t(v) = -f(v) - (1/t)(sum ln g + box terms), minimized."""

    def __init__(self, program: ConcaveProgram, t: float):
        self.p = program
        self.t = t
        self.fin_lo = np.isfinite(program.lower)
        self.fin_hi = np.isfinite(program.upper)

    def value(self, v):
        g = np.atleast_1d(self.p.constraints(v))
        dlo = v[self.fin_lo] - self.p.lower[self.fin_lo]
        dhi = self.p.upper[self.fin_hi] - v[self.fin_hi]
        if (g.size and np.any(g <= 0)) or np.any(dlo <= 0) or np.any(dhi <= 0):
            return np.inf
        f = self.p.objective(v)
        if not np.isfinite(f):
            return np.inf
        barrier = 0.0
        if g.size:
            barrier += float(np.sum(np.log(g)))
        barrier += float(np.sum(np.log(dlo))) + float(np.sum(np.log(dhi)))
        return -f - barrier / self.t

    def grad_and_pieces(self, v):
        g = np.atleast_1d(self.p.constraints(v))
        J = self.p.constraint_jac(v)
        J = np.atleast_2d(np.asarray(J, dtype=float)) if g.size else np.zeros((0, self.p.n))
        grad_f = np.asarray(self.p.gradient(v), dtype=float)
        if not (np.all(np.isfinite(grad_f)) and np.all(np.isfinite(g)) and np.all(np.isfinite(J))):
            raise NumericError("non-finite objective/constraint derivatives", v)
        grad = -grad_f
        if g.size:
            grad -= (J.T @ (1.0 / g)) / self.t
        box_grad = np.zeros(self.p.n)
        box_grad[self.fin_lo] -= 1.0 / (v[self.fin_lo] - self.p.lower[self.fin_lo])
        box_grad[self.fin_hi] += 1.0 / (self.p.upper[self.fin_hi] - v[self.fin_hi])
        grad += box_grad / self.t
        return grad, g, J

    def gauss_newton_hessian(self, v, g, J):
        """PSD part of the barrier Hessian (exact for the box, GN for g)."""
        H = np.zeros((self.p.n, self.p.n))
        if g.size:
            H += (J.T * (1.0 / g**2)) @ J / self.t
        diag = np.zeros(self.p.n)
        diag[self.fin_lo] += 1.0 / (v[self.fin_lo] - self.p.lower[self.fin_lo]) ** 2
        diag[self.fin_hi] += 1.0 / (self.p.upper[self.fin_hi] - v[self.fin_hi]) ** 2
        H[np.diag_indices_from(H)] += diag / self.t
        return H

    def hessian(self, v, g, J):
        H = self.gauss_newton_hessian(v, g, J)
        if self.p.curvature is not None:
            w = (1.0 / (self.t * g)) if g.size else np.zeros(0)
            H -= self.p.curvature(v, w)   # -(hess f + sum w_j hess g_j) is PSD
        return H


def _solve_spd(H, rhs):
    ridge = _RIDGE0 * max(1.0, float(np.max(np.abs(np.diag(H)))))
    eye = np.eye(H.shape[0])
    for _ in range(12):
        try:
            L = np.linalg.cholesky(H + ridge * eye)
            y = np.linalg.solve(L, rhs)
            return np.linalg.solve(L.T, y)
        except np.linalg.LinAlgError:
            ridge *= 100.0
    return np.linalg.lstsq(H + ridge * eye, rhs, rcond=None)[0]


def _newton_stage(barrier: _Barrier, v, max_steps, decrement_tol, use_bfgs):
    """Minimize one barrier subproblem; returns (v, last_decrement, steps)."""
    grad, g, J = barrier.grad_and_pieces(v)
    B = barrier.gauss_newton_hessian(v, g, J) + 1e-8 * np.eye(barrier.p.n) if use_bfgs else None
    phi = barrier.value(v)
    decrement = np.inf
    for step in range(max_steps):
        H = B if use_bfgs else barrier.hessian(v, g, J)
        d = _solve_spd(H, -grad)
        decrement = float(-grad @ d)
        if decrement < 0:        # model not PD enough; fall back to steepest descent
            d = -grad
            decrement = float(grad @ grad)
        if 0.5 * decrement <= decrement_tol:
            return v, 0.5 * decrement, step
        alpha = 1.0
        accepted = False
        while alpha > 1e-14:
            trial = v + alpha * d
            phi_trial = barrier.value(trial)
            if np.isfinite(phi_trial) and phi_trial <= phi - _ARMIJO_SLOPE * alpha * decrement:
                accepted = True
                break
            alpha *= _BACKTRACK
        if not accepted:
            return v, 0.5 * decrement, step
        v_new = trial
        grad_new, g, J = barrier.grad_and_pieces(v_new)
        if use_bfgs:
            s = v_new - v
            y = grad_new - grad
            Bs = B @ s
            sBs = float(s @ Bs)
            sy = float(s @ y)
            if sBs > 0:
                if sy < 0.2 * sBs:   # Powell damping keeps B positive definite
                    theta = 0.8 * sBs / (sBs - sy)
                    y = theta * y + (1.0 - theta) * Bs
                    sy = float(s @ y)
                if sy > 1e-12 * sBs:
                    B = B - np.outer(Bs, Bs) / sBs + np.outer(y, y) / sy
        v, grad, phi = v_new, grad_new, phi_trial
    return v, 0.5 * decrement, max_steps


def solve_concave(program: ConcaveProgram, start=None, tol: float = 1e-9,
                  max_newton: int = 200) -> SolveReport:
    """Maximize the program; see module docstring for the method.

    start must be strictly interior; when omitted, a phase-I feasibility
    subproblem locates one (status 'infeasible' if none exists).
    """
    if start is None or not _interior(program, np.asarray(start, dtype=float)):
        candidate = None if start is None else np.asarray(start, dtype=float)
        start = _phase_one(program, candidate, tol=max(tol, 1e-8), max_newton=max_newton)
        if start is None:
            return SolveReport(solution=program.midpoint(), objective=-np.inf,
                               kkt_residual=np.inf, barrier_iterations=0,
                               status="infeasible")
    v = np.asarray(start, dtype=float).copy()

    m_total = np.atleast_1d(program.constraints(v)).size \
        + int(np.sum(np.isfinite(program.lower))) \
        + int(np.sum(np.isfinite(program.upper)))
    use_bfgs = program.curvature is None
    decrement_tol = 0.5 * tol

    t = 1.0
    total_steps = 0
    stage_objectives = []
    last_decrement = np.inf
    for _ in range(_MAX_STAGES):
        barrier = _Barrier(program, t)
        v, last_decrement, steps = _newton_stage(
            barrier, v, max_newton, decrement_tol, use_bfgs)
        total_steps += steps
        stage_objectives.append(float(program.objective(v)))
        if m_total == 0 or m_total / t < tol:
            break
        t *= _T_GROWTH

    gap = m_total / t if m_total else 0.0
    kkt = max(gap, last_decrement)
    g_final = np.atleast_1d(program.constraints(v))
    feasible = (not g_final.size or float(np.min(g_final)) >= -1e-9) \
        and np.all(v >= program.lower - 1e-9) and np.all(v <= program.upper + 1e-9)
    status = "converged" if (kkt <= tol and feasible) else "max_iters"
    return SolveReport(solution=v, objective=float(program.objective(v)),
                       kkt_residual=float(kkt), barrier_iterations=total_steps,
                       status=status, stage_objectives=stage_objectives)


def _phase_one(program: ConcaveProgram, candidate, tol, max_newton):
    """Find a strictly interior point by minimizing the worst constraint slack."""
    v0 = program.midpoint() if candidate is None else np.clip(
        candidate,
        np.where(np.isfinite(program.lower), program.lower, -np.inf) + 1e-9,
        np.where(np.isfinite(program.upper), program.upper, np.inf) - 1e-9)
    g0 = np.atleast_1d(program.constraints(v0))
    if g0.size == 0:
        return v0
    s0 = max(0.0, -float(np.min(g0))) + 1.0
    n = program.n

    def obj(vs):
        return -vs[-1]

    def grad(vs):
        out = np.zeros(n + 1)
        out[-1] = -1.0
        return out

    def cons(vs):
        return np.atleast_1d(program.constraints(vs[:n])) + vs[-1]

    def jac(vs):
        J = np.atleast_2d(program.constraint_jac(vs[:n]))
        return np.hstack([J, np.ones((J.shape[0], 1))])

    curvature = None
    if program.curvature is not None:
        def curvature(vs, w):
            H = np.zeros((n + 1, n + 1))
            H[:n, :n] = program.curvature(vs[:n], w)
            return H

    aux = ConcaveProgram(
        n=n + 1,
        objective=obj, gradient=grad, constraints=cons, constraint_jac=jac,
        lower=np.append(program.lower, -2.0),
        upper=np.append(program.upper, s0 + 1.0),
        curvature=curvature, name=f"{program.name}:phase1")
    report = solve_concave(aux, start=np.append(v0, s0), tol=tol, max_newton=max_newton)
    v_feas = report.solution[:n]
    if report.solution[-1] < 0 and _interior(program, v_feas):
        return v_feas
    return None


def check_gradients(program: ConcaveProgram, reference_point, rng=None,
                    n_points: int = 100, step: float = 1e-6) -> float:
    """Max relative error of gradient/Jacobian callbacks vs central differences.

    Points are sampled on segments from the strictly interior reference point
    toward random box points, shrunk until they stay interior.
    """
    rng = np.random.default_rng(0) if rng is None else rng
    v0 = np.asarray(reference_point, dtype=float)
    if not _interior(program, v0):
        raise ValueError("reference_point must be strictly interior")
    lo = np.where(np.isfinite(program.lower), program.lower, v0 - 1.0)
    hi = np.where(np.isfinite(program.upper), program.upper, v0 + 1.0)
    worst = 0.0
    for _ in range(n_points):
        target = rng.uniform(lo, hi)
        lam = 1.0
        v = v0 + lam * (target - v0)
        while lam > 1e-6 and not _interior(program, v, margin=1e-12):
            lam *= 0.5
            v = v0 + lam * (target - v0)
        if not _interior(program, v, margin=1e-12):
            continue
        worst = max(worst, _point_gradient_error(program, v, step))
    return worst


def _point_gradient_error(program, v, step):
    n = program.n
    grad = np.asarray(program.gradient(v), dtype=float)
    J = np.atleast_2d(np.asarray(program.constraint_jac(v), dtype=float))
    m = np.atleast_1d(program.constraints(v)).size
    worst = 0.0
    for i in range(n):
        h = step * max(1.0, abs(v[i]))
        vp, vm = v.copy(), v.copy()
        vp[i] += h
        vm[i] -= h
        fd_obj = (program.objective(vp) - program.objective(vm)) / (2 * h)
        denom = max(1e-8, abs(fd_obj), abs(grad[i]))
        worst = max(worst, abs(fd_obj - grad[i]) / denom)
        if m:
            fd_con = (np.atleast_1d(program.constraints(vp))
                      - np.atleast_1d(program.constraints(vm))) / (2 * h)
            for j in range(m):
                denom = max(1e-8, abs(fd_con[j]), abs(J[j, i]))
                worst = max(worst, abs(fd_con[j] - J[j, i]) / denom)
    return worst
