"""Descent loop for the interface identification problem.

Each iteration solves state and adjoint on the current mesh, assembles the
design gradient, restricts it to the interface one-ring, smooths it into a
deformation field through a linear elasticity solve (stiffness largest on
the interface, decaying harmonically to the boundary), applies a limited
memory quasi-Newton correction, and moves the mesh by a line search that
first enforces geometric admissibility (no self-intersection, interface
inside the square) and then sufficient decrease. The interface stiffness
adapts to the observed line search effort; stalls clear the quasi-Newton
memory, and repeated stalls terminate the run.
"""

from dataclasses import dataclass, replace
from typing import List, Optional

import numpy as np

from . import fem, linalg, shapegrad, system
from .assembly import candidate_pairs
from .mesh import MeshError, deform, out_of_omega, self_intersects
from .transfer import interpolate, remesh_around_interface

__all__ = [
    "LineSearchParams",
    "OptimizerOptions",
    "LineSearchResult",
    "LbfgsMemory",
    "line_search",
    "HISTORY_COLUMNS",
    "HistoryRow",
    "run",
]

HISTORY_COLUMNS = ("iter", "J", "J_tracking", "J_perimeter", "grad_norm",
                   "alpha", "ls_rounds", "mu_max", "restarts")


@dataclass(frozen=True)
class LineSearchParams:
    alpha0: float = 1.0
    tau: float = 0.5
    c: float = 0.99
    n_up: int = 1
    n_down: int = 4
    n_restart: int = 8
    c_up: float = 1.2
    c_down: float = 0.8
    alpha_min: float = 1e-12


@dataclass(frozen=True)
class OptimizerOptions:
    tol: float = 1e-6
    max_iter: int = 100
    memory: int = 15
    max_restarts: int = 3
    mu_min: float = 0.0
    mu_max: float = 20.0
    lam: float = 0.0
    backend: Optional[str] = None


@dataclass(frozen=True)
class HistoryRow:
    iter: int
    J: float
    J_tracking: float
    J_perimeter: float
    grad_norm: float
    alpha: float
    ls_rounds: int
    mu_max: float
    restarts: int

    def astuple(self):
        return (self.iter, self.J, self.J_tracking, self.J_perimeter,
                self.grad_norm, self.alpha, self.ls_rounds, self.mu_max,
                self.restarts)


@dataclass
class LineSearchResult:
    accepted: bool
    alpha: float
    rounds: int
    restart: bool
    j_new: Optional[float]
    mu_max: float


class LbfgsMemory:
    """Limited-memory two-loop recursion. Vectors from successive meshes are
    compared entrywise (vertex identity is preserved within a stage, so this
    is the identity transport)."""

    def __init__(self, m=15):
        self.m = int(m)
        self.pairs: List = []

    def clear(self):
        self.pairs.clear()

    def push(self, s, y):
        """Store an (s, y) pair unless the curvature is too weak. Returns
        whether the pair was kept."""
        s = np.asarray(s, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
        sy = float(s @ y)
        if sy <= 1e-14 * float(np.linalg.norm(s)) * float(np.linalg.norm(y)):
            return False
        self.pairs.append((s, y, 1.0 / sy))
        if len(self.pairs) > self.m:
            self.pairs.pop(0)
        return True

    def direction(self, g):
        """Apply the inverse Hessian estimate to g. With empty memory this
        is the identity."""
        q = np.array(g, dtype=np.float64)
        if not self.pairs:
            return q
        alphas = []
        for s, y, rho in reversed(self.pairs):
            a = rho * float(s @ q)
            alphas.append(a)
            q -= a * y
        s, y, rho = self.pairs[-1]
        gamma = float(s @ y) / float(y @ y)
        q *= gamma
        for (s, y, rho), a in zip(self.pairs, reversed(alphas)):
            b = rho * float(y @ q)
            q += (a - b) * s
        return q


def _adapt_mu(params, mu_max, rounds):
    """Interface stiffness update from the line search effort. Both branches
    are independent: a single shrink round triggers the increase and still
    counts as an easy search, so both factors apply."""
    out = mu_max
    if rounds >= params.n_up:
        out *= params.c_up
    if rounds <= params.n_down:
        out *= params.c_down
    return out


def line_search(evaluator, j_old, params, mu_max):
    """Backtracking in two phases over a trial scaling alpha.

    Phase one shrinks until the moved interface neither self-intersects nor
    leaves the open square. Phase two shrinks until the trial objective
    satisfies J < c * J_old; a trial that fails to evaluate (inverted mesh,
    solver breakdown) keeps shrinking. alpha underflow gives up and signals
    a restart. The evaluator provides geometry_bad(alpha) and
    evaluate(alpha) -> float or None.
    """
    alpha = params.alpha0
    rounds = 0
    while evaluator.geometry_bad(alpha):
        alpha *= params.tau
        rounds += 1
        if alpha < params.alpha_min:
            return LineSearchResult(False, 0.0, rounds, True, None,
                                    _adapt_mu(params, mu_max, rounds))
    while True:
        j = evaluator.evaluate(alpha)
        if j is not None and j < params.c * j_old:
            break
        alpha *= params.tau
        rounds += 1
        if alpha < params.alpha_min:
            return LineSearchResult(False, 0.0, rounds, True, None,
                                    _adapt_mu(params, mu_max, rounds))
    return LineSearchResult(True, alpha, rounds, rounds >= params.n_restart, j,
                            _adapt_mu(params, mu_max, rounds))


@dataclass
class _Bundle:
    mesh: object
    pairs: object
    op: object
    u: np.ndarray
    u_bar: np.ndarray
    j: float
    j_track: float
    j_per: float


def _solve_bundle(mesh, cfg, data_mesh, data_field, backend):
    pairs = candidate_pairs(mesh, cfg.kernel.delta, cfg.kernel.norm)
    op = system.build_operator(mesh, cfg, pairs=pairs, backend=backend)
    u = system.solve_state(mesh, cfg, operator=op)
    u_bar = interpolate(data_mesh, data_field, mesh)
    j, jt, jp = system.objective_parts(mesh, cfg, u, u_bar)
    return _Bundle(mesh, pairs, op, u, u_bar, j, jt, jp)


class _TrialEvaluator:
    """Line search trials for a fixed descent direction: geometry checks are
    cheap (moved interface polygon only), objective evaluations deform the
    mesh and re-solve. The bundle of the last successful trial is kept so
    the accepted step costs no extra solve."""

    def __init__(self, mesh, direction, cfg, data_mesh, data_field, backend):
        self.mesh = mesh
        self.direction = direction
        self.cfg = cfg
        self.data_mesh = data_mesh
        self.data_field = data_field
        self.backend = backend
        self.iface_pts = mesh.interface_points()
        self.iface_disp = direction[mesh.interface_nodes]
        self.accepted_bundle = None

    def geometry_bad(self, alpha):
        moved = self.iface_pts - alpha * self.iface_disp
        if self_intersects(moved):
            return True
        return out_of_omega(self.mesh, self.direction, alpha)

    def evaluate(self, alpha):
        try:
            trial = deform(self.mesh, self.direction, alpha)
            bundle = _solve_bundle(trial, self.cfg, self.data_mesh,
                                   self.data_field, self.backend)
        except (MeshError, linalg.LinAlgError):
            self.accepted_bundle = None
            return None
        self.accepted_bundle = bundle
        return bundle.j


def _run_stage(bundle, cfg, data_mesh, data_field, opts, ls_params, history,
               iter_offset, on_iteration):
    memory = LbfgsMemory(opts.memory)
    mu_max = opts.mu_max
    restarts = 0
    pending_s = None
    prev_g = None
    k = 0
    converged = False

    while k < opts.max_iter:
        k += 1
        it = iter_offset + k
        v = system.solve_adjoint(bundle.mesh, cfg, bundle.u, bundle.u_bar,
                                 operator=bundle.op)
        g = shapegrad.assemble_shape_derivative(
            bundle.mesh, cfg, bundle.u, v, bundle.u_bar,
            pairs=bundle.pairs, backend=opts.backend)
        g = shapegrad.zero_non_interface(g, bundle.mesh)
        gflat = g.ravel()
        gnorm = float(np.max(np.abs(gflat))) if gflat.size else 0.0

        if pending_s is not None and prev_g is not None:
            memory.push(pending_s, gflat - prev_g)
            pending_s = None
        prev_g = gflat.copy()

        if gnorm <= opts.tol * max(1.0, abs(bundle.j)):
            history.append(HistoryRow(it, bundle.j, bundle.j_track, bundle.j_per,
                                      gnorm, 0.0, 0, mu_max, restarts))
            converged = True
            break

        mu = fem.solve_mu_field(bundle.mesh, opts.mu_min, mu_max)
        grad_dir = shapegrad.solve_deformation(bundle.mesh, g, mu, opts.lam)
        d = memory.direction(grad_dir.ravel())
        if float(d @ gflat) <= 0.0:
            d = grad_dir.ravel()  # quasi-Newton direction lost descent
        direction = np.ascontiguousarray(d.reshape(-1, 2))

        ev = _TrialEvaluator(bundle.mesh, direction, cfg, data_mesh,
                             data_field, opts.backend)
        res = line_search(ev, bundle.j, ls_params, mu_max)
        mu_max = res.mu_max
        if res.restart:
            restarts += 1
        history.append(HistoryRow(it, bundle.j, bundle.j_track, bundle.j_per,
                                  gnorm, res.alpha if res.accepted else 0.0,
                                  res.rounds, mu_max, restarts))

        if res.accepted:
            pending_s = -res.alpha * d
            bundle = ev.accepted_bundle
            if on_iteration is not None:
                on_iteration(it, bundle.mesh, bundle)
        if res.restart:
            memory.clear()
            pending_s = None
            prev_g = None
            if restarts > opts.max_restarts:
                break
    return bundle, k, converged


def run(cfg, mesh, data_mesh, data_field, opts=None, ls_params=None,
        fine_n=None, coarse_max_iter=None, on_iteration=None):
    """Drive the identification from an initial mesh. Returns the final mesh
    and the iteration history.

    With fine_n set, a first stage runs on the given mesh (using
    coarse_max_iter if provided), the interface is re-embedded into a fresh
    mesh of resolution fine_n, and a second stage continues there; history
    rows number iterations consecutively across stages.
    """
    opts = opts or OptimizerOptions()
    ls_params = ls_params or LineSearchParams()
    history: List[HistoryRow] = []

    stage_opts = opts
    if fine_n is not None and coarse_max_iter is not None:
        stage_opts = replace(opts, max_iter=int(coarse_max_iter))
    bundle = _solve_bundle(mesh, cfg, data_mesh, data_field, opts.backend)
    bundle, iters, converged = _run_stage(bundle, cfg, data_mesh, data_field,
                                          stage_opts, ls_params, history, 0,
                                          on_iteration)
    if fine_n is not None and not converged:
        fine_mesh = remesh_around_interface(bundle.mesh, int(fine_n))
        bundle = _solve_bundle(fine_mesh, cfg, data_mesh, data_field, opts.backend)
        bundle, _, _ = _run_stage(bundle, cfg, data_mesh, data_field, opts,
                                  ls_params, history, iters, on_iteration)
    return bundle.mesh, history
