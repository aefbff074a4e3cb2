"""Saddle-point assembly, row-norm preconditioning and the active-set loop.

For a fixed contact-state assignment the system is linear, so each Newton
phase converges in a single solve; the nonlinearity lives entirely in the
state updates.  The outer loop alternates converged solves with a global
reclassification of all pairs until the assignment is stable (monolithic
update of displacements and multipliers in one algebraic block).
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .contact import (
    PairState,
    StateKind,
    StateTolerances,
    assemble_contact_blocks,
    classify_all,
    contact_residuals,
    mohr_coulomb_tau_c,
    pair_kinematics,
)
from .elasticity import (
    assemble_loads,
    assemble_stiffness,
    dirichlet_constraints,
)


class SingularRowError(ValueError):
    """A Jacobian row is identically zero; carries a dof description."""


class LinearSolveError(RuntimeError):
    pass


@dataclass(frozen=True)
class SolverConfig:
    newton_tol: float = 1e-4
    max_newton: int = 50
    max_state_loops: int = 20
    n_load_steps: int = 1
    linear_solver: str = "direct"  # "direct" | "iterative"
    iterative_tol: float = 1e-10
    iterative_maxiter: int = 5000
    state_tol: StateTolerances = field(default_factory=StateTolerances)

    def __post_init__(self):
        if self.newton_tol <= 0.0:
            raise ValueError("newton_tol must be positive")
        if self.linear_solver not in ("direct", "iterative"):
            raise ValueError(f"unknown linear solver {self.linear_solver!r}")


@dataclass
class SolutionState:
    """Solution and diagnostics of one load step."""

    U: np.ndarray
    lam: np.ndarray
    states: list
    step: int = 0
    converged: bool = False
    newton_iters: int = 0
    state_loops: int = 0
    residual_norm: float = np.inf
    cycled: bool = False
    message: str = ""


@dataclass
class SaddleSystem:
    """Reduced block-2x2 Jacobian and residual at one iterate.

    Displacement dofs come first (Dirichlet rows/columns eliminated), then
    the multiplier dofs.  The multiplier unknowns are carried
    nondimensionalized as lam/mult_scale with the multiplier equations
    scaled by mult_scale (a symmetric constant scaling by the elastic
    modulus): tractions in Pa against displacements in meters would
    otherwise leave the assembled Jacobian with a condition number around
    1e13 that no row equilibration can repair.  All public quantities stay
    physical; only this system and its increments live in the scaled
    variable.  ``K``, ``blocks`` and ``F`` are kept for residual
    re-evaluation and reaction-force queries.
    """

    J: sp.csr_matrix
    R: np.ndarray
    free: np.ndarray
    fixed: np.ndarray
    fixed_vals: np.ndarray
    n_disp: int
    n_lam: int
    K: sp.csr_matrix
    blocks: object
    F: np.ndarray
    mult_scale: float = 1.0
    # residual in physical units (forces / gap integrals); the convergence
    # norm lives here because the scaled multiplier rows of R have a
    # floating-point floor of eps * lambda * mult_scale
    R_phys: np.ndarray | None = None


@dataclass
class Preconditioner:
    """Left row scaling: diagonal inverse 2-norms of the Jacobian rows.

    ``a`` covers the displacement-equation rows (stiffness + coupling),
    ``b`` the multiplier-equation rows.
    """

    a: np.ndarray
    b: np.ndarray

    @property
    def diag(self):
        return np.concatenate([self.a, self.b])

    def apply_matrix(self, J):
        return sp.diags(1.0 / self.diag) @ J

    def apply_vector(self, R):
        return R / self.diag


def _full_residual(K, blocks, F, U, lam):
    ru_c, rlam = contact_residuals(blocks, U, lam)
    ru = K @ U + ru_c - F
    return ru, rlam


def build_system(mesh, mat, fric, bcs, state, step=None, K=None):
    """Assemble the reduced saddle system for the current states/iterate.

    The caller must have written the prescribed Dirichlet values into
    ``state.U`` beforehand (then the fixed increments are identically zero
    and elimination is a plain row/column restriction).
    """
    if K is None:
        K = assemble_stiffness(mesh, mat)
    F = assemble_loads(mesh, bcs, step=step)
    fixed, fixed_vals = dirichlet_constraints(mesh, bcs, step=step)
    blocks = assemble_contact_blocks(mesh, state.states, fric, fixed_dofs=fixed)

    n2 = 2 * mesh.n_nodes
    m2 = 2 * mesh.n_pairs
    free = np.setdiff1d(np.arange(n2, dtype=np.int64), fixed)

    s = mat.E  # multiplier nondimensionalization (see SaddleSystem docs)
    ru, rlam = _full_residual(K, blocks, F, state.U, state.lam)
    R = np.concatenate([ru[free], s * rlam])
    R_phys = np.concatenate([ru[free], rlam])

    if m2:
        J_full = sp.bmat(
            [[K, s * blocks.B_up], [s * blocks.C, (s * s) * blocks.D]],
            format="csr",
        )
    else:
        J_full = K.tocsr()
    keep = np.concatenate([free, n2 + np.arange(m2, dtype=np.int64)])
    J = J_full[keep][:, keep].tocsr()

    return SaddleSystem(
        J=J,
        R=R,
        free=free,
        fixed=fixed,
        fixed_vals=fixed_vals,
        n_disp=free.size,
        n_lam=m2,
        K=K,
        blocks=blocks,
        F=F,
        mult_scale=s,
        R_phys=R_phys,
    )


def _dof_description(sys, row):
    if row < sys.n_disp:
        dof = sys.free[row]
        return f"displacement dof {dof} (node {dof // 2}, {'xy'[dof % 2]})"
    k = row - sys.n_disp
    return f"multiplier dof of pair {k // 2} ({'normal' if k % 2 == 0 else 'tangential'})"


def build_preconditioner(sys):
    """Row 2-norms of the assembled Jacobian; zero rows are an error."""
    sq = sys.J.multiply(sys.J)
    norms = np.sqrt(np.asarray(sq.sum(axis=1)).ravel())
    zero = np.where(norms == 0.0)[0]
    if zero.size:
        raise SingularRowError(
            f"zero Jacobian row: {_dof_description(sys, int(zero[0]))}"
        )
    return Preconditioner(a=norms[: sys.n_disp], b=norms[sys.n_disp :])


def linear_solve(sys, pc, config=None):
    """Solve J dx = -R through the row-scaled system.

    The direct path must reach a 1e-10 backward error on the
    row-equilibrated system (equivalent to the relative-residual contract
    whenever that quantity is evaluable in double precision); the iterative
    path uses GMRES at the configured tolerance and reports the iteration
    count on failure.
    """
    rnorm = float(np.linalg.norm(sys.R))
    if rnorm == 0.0:
        return np.zeros_like(sys.R)
    Jbar = pc.apply_matrix(sys.J).tocsc()
    rhs = -pc.apply_vector(sys.R)

    method = "direct" if config is None else config.linear_solver
    if method == "direct":
        try:
            lu = spla.splu(Jbar)
            dx = lu.solve(rhs)
        except RuntimeError as exc:
            raise LinearSolveError(f"sparse factorization failed: {exc}") from exc
        # Accuracy control on the row-equilibrated system, where every row
        # is O(1): the backward error |Jbar dx - rhs| / (|rhs| + |Jbar||dx|).
        # Dividing the raw residual by |R| alone is not evaluable below the
        # cancellation floor once a state change makes the solution jump
        # much larger than the residual; iterative refinement with the same
        # factorization recovers the digits a single pass loses.
        absJ = Jbar.copy()
        absJ.data = np.abs(absJ.data)
        rhs_norm = float(np.linalg.norm(rhs))

        def backward_error(v):
            denom = rhs_norm + float(np.linalg.norm(absJ @ np.abs(v)))
            return float(np.linalg.norm(Jbar @ v - rhs)) / denom

        rel = backward_error(dx)
        for _ in range(10):
            if not np.isfinite(rel) or rel <= 2e-16:
                break
            cand = dx - lu.solve(Jbar @ dx - rhs)
            cand_rel = backward_error(cand)
            if not cand_rel < rel:
                break
            dx, rel = cand, cand_rel
        if not np.isfinite(rel) or rel > 1e-10:
            raise LinearSolveError(
                f"direct solve backward error {rel:.3e} exceeds 1e-10 "
                "(structurally singular system?)"
            )
        return dx

    count = {"it": 0}

    def cb(_):
        count["it"] += 1

    dx, info = spla.gmres(
        Jbar,
        rhs,
        rtol=config.iterative_tol,
        atol=0.0,
        restart=200,
        maxiter=config.iterative_maxiter,
        callback=cb,
        callback_type="pr_norm",
    )
    if info != 0:
        rel = float(np.linalg.norm(sys.J @ dx + sys.R)) / rnorm
        raise LinearSolveError(
            f"GMRES did not converge after {count['it']} iterations "
            f"(relative residual {rel:.3e})"
        )
    return dx


def initial_states(mesh):
    """Most-constrained start: everything stick."""
    return [PairState.stick() for _ in mesh.pairs]


def _ranked_flips(mesh, states, proposed, U, lam, fric):
    """Proposed state changes ranked by a dimensionless violation score."""
    kins = {}
    lam_ref = 1.0
    gap_ref = 1e-12
    for pair, st, new in zip(mesh.pairs, states, proposed):
        if new == st:
            continue
        kin = pair_kinematics(pair, U, lam)
        kins[pair.id] = kin
        lam_ref = max(lam_ref, abs(kin.lam_n), abs(kin.lam_t))
        gap_ref = max(gap_ref, abs(kin.trial_gap))

    scored = []
    for pair, st, new in zip(mesh.pairs, states, proposed):
        if new == st:
            continue
        kin = kins[pair.id]
        if new.kind is StateKind.OPEN:
            score = kin.lam_n / lam_ref
        elif st.kind is StateKind.OPEN:
            score = -kin.trial_gap / gap_ref
        else:
            tau = mohr_coulomb_tau_c(kin.lam_n, fric)
            score = abs(abs(kin.lam_t) - tau) / lam_ref
        scored.append((score, pair.id))
    scored.sort(key=lambda t: (-t[0], t[1]))
    return scored


def _cautious_update(mesh, states, proposed, U, lam, fric, seen):
    """Anti-cycling fallback: apply one state change per loop.

    Simultaneous flips of marginal pairs can make the active-set map
    oscillate between assignments; changing one pair at a time, picked by
    violation score and skipping already-visited assignments (a tabu walk),
    restores progress the way Bland's rule does for the simplex method.
    Returns None when every single flip lands on a visited assignment.
    """
    for _, pid in _ranked_flips(mesh, states, proposed, U, lam, fric):
        out = list(states)
        out[pid] = proposed[pid]
        if tuple(out) not in seen:
            return out
    return None


def newton_loop(mesh, mat, fric, bcs, cfg, warm=None, step=None, K=None):
    """Monolithic-updated active-set loop for one load step.

    Inner Newton iterations run until the residual 2-norm drops below the
    tolerance, then all pair states are reclassified against the converged
    iterate; any change re-enters Newton.  Failure modes (iteration caps,
    divergence, state cycling) return a non-converged SolutionState with
    diagnostics, never a silent success.
    """
    n2 = 2 * mesh.n_nodes
    m2 = 2 * mesh.n_pairs
    if warm is not None:
        U = warm.U.copy()
        lam = warm.lam.copy()
        states = list(warm.states)
    else:
        U = np.zeros(n2)
        lam = np.zeros(m2)
        states = initial_states(mesh)

    if K is None:
        K = assemble_stiffness(mesh, mat)
    fixed, fixed_vals = dirichlet_constraints(mesh, bcs, step=step)
    U[fixed] = fixed_vals

    result = SolutionState(U=U, lam=lam, states=states, step=step or 0)
    seen = set()
    cautious = False

    for loop in range(1, cfg.max_state_loops + 1):
        result.state_loops = loop
        sys = build_system(mesh, mat, fric, bcs, result, step=step, K=K)
        rnorm0 = None
        phase_ok = False
        # After a state change the fresh constraint rows can sit below the
        # (force-scaled) tolerance without being enforced at all, so every
        # re-entered phase performs at least one solve.
        need_solve = loop > 1
        for _ in range(cfg.max_newton + 1):
            rnorm = float(np.linalg.norm(sys.R_phys))
            result.residual_norm = rnorm
            if rnorm0 is None:
                rnorm0 = rnorm
            if rnorm == 0.0 or (rnorm < cfg.newton_tol and not need_solve):
                phase_ok = True
                break
            need_solve = False
            if rnorm > 1e3 * max(rnorm0, cfg.newton_tol):
                result.message = (
                    f"residual diverged within Newton phase "
                    f"({rnorm0:.3e} -> {rnorm:.3e})"
                )
                return result
            try:
                pc = build_preconditioner(sys)
                dx = linear_solve(sys, pc, cfg)
            except (SingularRowError, LinearSolveError) as exc:
                result.message = str(exc)
                return result
            U[sys.free] += dx[: sys.n_disp]
            lam += sys.mult_scale * dx[sys.n_disp :]
            lam[sys.blocks.pinned] = 0.0  # identity rows solve to exactly 0
            result.newton_iters += 1
            ru, rlam = _full_residual(K, sys.blocks, sys.F, U, lam)
            sys.R = np.concatenate([ru[sys.free], sys.mult_scale * rlam])
            sys.R_phys = np.concatenate([ru[sys.free], rlam])
        if not phase_ok:
            result.message = f"max_newton={cfg.max_newton} exceeded"
            return result

        proposal = classify_all(mesh, states, U, lam, fric, cfg.state_tol)
        if proposal == states:
            result.converged = True
            return result
        seen.add(tuple(states))
        if not cautious:
            new_states = proposal
            if tuple(new_states) in seen:
                cautious = True  # revisit: fall back to one flip per loop
        if cautious:
            new_states = _cautious_update(
                mesh, states, proposal, U, lam, fric, seen
            )
            if new_states is None:
                result.cycled = True
                result.message = "active-set cycling detected"
                return result
        states = new_states
        result.states = states

    result.message = f"max_state_loops={cfg.max_state_loops} exceeded"
    return result


def run_load_steps(mesh, mat, fric, bcs, cfg):
    """Sequential proportional load steps, each warm-started from the last."""
    K = assemble_stiffness(mesh, mat)
    results = []
    warm = None
    for step in range(cfg.n_load_steps):
        res = newton_loop(mesh, mat, fric, bcs, cfg, warm=warm, step=step, K=K)
        res.step = step
        results.append(res)
        if not res.converged:
            res.message = f"step {step}: {res.message}"
            break
        warm = res
    return results


def reaction_forces(mesh, mat, fric, bcs, result, step=None, K=None):
    """Residual at the Dirichlet dofs = negated support reactions."""
    if K is None:
        K = assemble_stiffness(mesh, mat)
    F = assemble_loads(mesh, bcs, step=step)
    fixed, _ = dirichlet_constraints(mesh, bcs, step=step)
    blocks = assemble_contact_blocks(mesh, result.states, fric, fixed_dofs=fixed)
    ru, _ = _full_residual(K, blocks, F, result.U, result.lam)
    return fixed, ru[fixed]


def wall_timed(fn, *args, **kwargs):
    t0 = time.perf_counter()
    out = fn(*args, **kwargs)
    return out, time.perf_counter() - t0
