"""Contact kinematics, Mohr-Coulomb state classification, block assembly.

Every contact pair always owns two multiplier dofs (normal, tangential) so
the system size is fixed across iterations.  The pair state decides what the
corresponding rows/columns contain:

  stick  - both local jump components are constrained; the constraint rows
           and the displacement-equation coupling are exact transposes.
  slip   - the normal constraint row stays (closed face, non-dilatant); the
           tangential multiplier row is replaced by the algebraic relation
           lam_t = sign * (c - lam_n * tan(phi)); the friction force enters
           the displacement equations through the normal multiplier column
           (direction n - sign*tan(phi)*m) plus the cohesion load.  These
           rows break the symmetry of the saddle system.
  open   - both multiplier rows are replaced by identity rows pinning the
           multipliers to zero; no coupling.

Crossing pairs at fracture intersections transmit only a normal point force:
the two diagonal pairings of the four duplicates would otherwise duplicate
each other's full stick constraints (same node pair constrained in two
rotated frames) and make the system singular.  Their tangential multiplier
is always pinned to zero and they classify as active (normal constraint) or
open only.

Every constraint row is collocated at its pair and weighted by the pair's
tributary arc length (half of each adjacent segment, i.e. the row-sum
lumping of a piecewise-linear multiplier interpolation along the fracture).
Tributaries truncate at unduplicated crack tips and at intersections, where
the crossing-pair point constraints take over.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .elasticity import ConfigError


@dataclass(frozen=True)
class FrictionParams:
    """Mohr-Coulomb constants: cohesion (Pa) and friction angle (radians)."""

    cohesion: float
    friction_angle: float

    def __post_init__(self):
        if self.cohesion < 0.0:
            raise ConfigError(
                f"friction.cohesion must be >= 0, got {self.cohesion}"
            )
        if not 0.0 <= self.friction_angle < 0.5 * math.pi:
            raise ConfigError(
                "friction.friction_angle must be in [0, pi/2), got "
                f"{self.friction_angle}"
            )

    @property
    def tan_phi(self):
        return math.tan(self.friction_angle)


class StateKind(enum.Enum):
    STICK = "stick"
    SLIP = "slip"
    OPEN = "open"


@dataclass(frozen=True)
class PairState:
    kind: StateKind
    sign: int = 0

    def __post_init__(self):
        if self.kind is StateKind.SLIP and self.sign not in (-1, 1):
            raise ValueError("slip state needs sign +-1")
        if self.kind is not StateKind.SLIP and self.sign != 0:
            raise ValueError("only slip states carry a sign")

    @property
    def label(self):
        return self.kind.value

    @staticmethod
    def stick():
        return PairState(StateKind.STICK)

    @staticmethod
    def open_():
        return PairState(StateKind.OPEN)

    @staticmethod
    def slip(sign):
        return PairState(StateKind.SLIP, int(sign))


@dataclass(frozen=True)
class StateTolerances:
    """Hysteresis tolerances for state changes.

    ``open_tension``: any lam_n above this opens (0 = strict sign test).
    ``slip_rel``: relative band below tau_c still classified as slip, which
    keeps converged slip pairs from chattering back to stick.
    ``sign_eps``: tangential jumps below this fall back to the trial traction
    sign.
    ``gap_noise``: re-engagement dead band (meters); a separated pair only
    re-enters contact once its trial gap drops below -gap_noise.  Exactly at
    the degenerate KKT corner (zero traction, zero gap) the state is
    indeterminate and roundoff would otherwise flip it every loop.
    """

    open_tension: float = 0.0
    slip_rel: float = 1e-8
    sign_eps: float = 1e-12
    gap_noise: float = 1e-12


@dataclass
class PairKinematics:
    """Per-pair jump, multipliers and gap at one iterate."""

    jump_global: np.ndarray
    jump_n: float
    jump_t: float
    lam_n: float
    lam_t: float
    gap0: float

    @property
    def trial_gap(self):
        return self.gap0 + self.jump_n


def jump_displacement(pair, U):
    """Kinematic part only: global and local jump of one pair."""
    p, m = pair.node_plus, pair.node_minus
    jump = U[2 * p : 2 * p + 2] - U[2 * m : 2 * m + 2]
    return PairKinematics(
        jump_global=jump,
        jump_n=float(jump @ pair.normal),
        jump_t=float(jump @ pair.tangent),
        lam_n=0.0,
        lam_t=0.0,
        gap0=pair.gap0,
    )


def pair_kinematics(pair, U, lam):
    kin = jump_displacement(pair, U)
    kin.lam_n = float(lam[2 * pair.id])
    kin.lam_t = float(lam[2 * pair.id + 1])
    return kin


def mohr_coulomb_tau_c(lam_n, fric):
    """Critical shear traction c - lam_n * tan(phi) (compression negative)."""
    return fric.cohesion - lam_n * fric.tan_phi


def classify_state(kin, fric, tol=StateTolerances(), current=None, crossing=False):
    """Contact state of one pair from its current iterate.

    Order of tests: tension demanded -> open; an open pair with a positive
    trial gap stays open; otherwise slip if the tangential multiplier reaches
    the Mohr-Coulomb bound, else stick.  Crossing pairs only switch between
    open and (normal-)active.
    """
    if current is None:
        current = PairState.stick()
    if kin.lam_n > tol.open_tension:
        return PairState.open_()
    if current.kind is StateKind.OPEN and kin.trial_gap > -tol.gap_noise:
        return PairState.open_()
    if crossing:
        return PairState.stick()
    tau_c = mohr_coulomb_tau_c(kin.lam_n, fric)
    if abs(kin.lam_t) >= tau_c * (1.0 - tol.slip_rel):
        if abs(kin.jump_t) >= tol.sign_eps:
            sign = 1 if kin.jump_t > 0 else -1
        elif kin.lam_t != 0.0:
            sign = 1 if kin.lam_t > 0 else -1
        else:
            sign = 1
        return PairState.slip(sign)
    return PairState.stick()


def classify_all(mesh, states, U, lam, fric, tol=StateTolerances()):
    out = []
    for pair, st in zip(mesh.pairs, states):
        kin = pair_kinematics(pair, U, lam)
        out.append(
            classify_state(kin, fric, tol, current=st, crossing=pair.is_crossing_pair)
        )
    return out


@dataclass
class ContactBlocks:
    """Assembled contact blocks.

    ``C`` (2*n_cp x 2*n_node): multiplier constraint rows against U.
    ``B_up`` (2*n_node x 2*n_cp): displacement-equation coupling columns.
    For stick rows B_up equals C transposed; slip rows differ (friction).
    ``D`` (2*n_cp x 2*n_cp): replacement rows in the multiplier block (open
    identity rows, slip tangential relations, crossing tangential pins).
    ``g``: constant part of the multiplier residual (integrated initial gaps
    and cohesion constants).  ``f_slip``: cohesion load on the displacement
    equations.
    """

    C: sp.csr_matrix
    B_up: sp.csr_matrix
    D: sp.csr_matrix
    g: np.ndarray
    f_slip: np.ndarray
    pinned: np.ndarray  # multiplier dofs held at exactly zero (identity rows)


class _Coo:
    def __init__(self):
        self.rows = []
        self.cols = []
        self.vals = []

    def add(self, r, c, v):
        self.rows.append(r)
        self.cols.append(c)
        self.vals.append(v)

    def matrix(self, shape):
        return sp.coo_matrix(
            (self.vals, (self.rows, self.cols)), shape=shape
        ).tocsr()


def _add_pair_entries(coo, row, direction, coef, plus, minus, transpose=False):
    """Scatter coef * direction^T * (u_plus - u_minus) into a sparse row
    (or column when ``transpose``)."""
    for node, s in ((plus, 1.0), (minus, -1.0)):
        for comp in (0, 1):
            v = coef * s * direction[comp]
            if transpose:
                coo.add(2 * node + comp, row, v)
            else:
                coo.add(row, 2 * node + comp, v)


def fully_fixed_pairs(mesh, fixed_dofs):
    """Pairs whose four displacement dofs are all Dirichlet-prescribed.

    Such pairs carry no contact equations: their jump is part of the data,
    and their multiplier columns would vanish from the reduced system and
    make it singular.  Their multipliers are pinned to zero instead; the
    interface force there is absorbed by the support reactions.
    """
    if fixed_dofs is None or len(fixed_dofs) == 0:
        return frozenset()
    fixed = set(int(d) for d in fixed_dofs)
    out = set()
    for pair in mesh.pairs:
        dofs = (
            2 * pair.node_plus, 2 * pair.node_plus + 1,
            2 * pair.node_minus, 2 * pair.node_minus + 1,
        )
        if all(d in fixed for d in dofs):
            out.add(pair.id)
    return frozenset(out)


def tributary_weights(mesh):
    """Arc length owned by each regular pair: half of every adjacent
    segment (the row sum of the 1D linear-hat mass matrix)."""
    trib = np.zeros(mesh.n_pairs)
    for chain in mesh.chains:
        for ca, cb in zip(chain[:-1], chain[1:]):
            L = cb.eta - ca.eta
            if ca.pair is not None:
                trib[ca.pair] += 0.5 * L
            if cb.pair is not None:
                trib[cb.pair] += 0.5 * L
    return trib


def assemble_contact_blocks(mesh, states, fric, fixed_dofs=None):
    """Assemble all contact rows/columns for the given state assignment.

    Every active pair carries pointwise constraint rows weighted by its
    tributary arc length (the row-sum lumping of the linear multiplier
    interpolation along each fracture).  Lumping keeps the closure exact at
    every pair node; a consistent mass coupling would only enforce the gap
    in the weighted-average sense and trades visible interpenetration
    between neighbouring pairs wherever the jump field kinks (crack tips,
    crossings).  Crossing pairs add their diagonal point rows the same way.
    Pairs between fully prescribed nodes get identity rows (see
    :func:`fully_fixed_pairs`).
    """
    if len(states) != mesh.n_pairs:
        raise ValueError("one state per contact pair required")
    inactive = fully_fixed_pairs(mesh, fixed_dofs)
    n2 = 2 * mesh.n_nodes
    m2 = 2 * mesh.n_pairs
    C = _Coo()
    B = _Coo()
    Dmat = _Coo()
    g = np.zeros(m2)
    f_slip = np.zeros(n2)
    tan_phi = fric.tan_phi
    trib = tributary_weights(mesh)

    for pair, st in zip(mesh.pairs, states):
        if pair.is_crossing_pair or pair.id in inactive:
            continue
        if st.kind is StateKind.OPEN:
            continue
        w = trib[pair.id]
        row_n = 2 * pair.id
        nodes = (pair.node_plus, pair.node_minus)
        _add_pair_entries(C, row_n, pair.normal, w, *nodes)
        _add_pair_entries(B, row_n, pair.normal, w, *nodes, transpose=True)
        g[row_n] += pair.gap0 * w
        if st.kind is StateKind.STICK:
            _add_pair_entries(C, row_n + 1, pair.tangent, w, *nodes)
            _add_pair_entries(B, row_n + 1, pair.tangent, w, *nodes, transpose=True)
        else:  # slip: friction enters through the normal multiplier column
            _add_pair_entries(
                B, row_n, -st.sign * tan_phi * pair.tangent, w, *nodes,
                transpose=True,
            )
            if fric.cohesion != 0.0:
                coh = fric.cohesion * st.sign * w
                f_slip[2 * pair.node_plus : 2 * pair.node_plus + 2] += (
                    coh * pair.tangent
                )
                f_slip[2 * pair.node_minus : 2 * pair.node_minus + 2] -= (
                    coh * pair.tangent
                )

    pinned = np.zeros(m2, dtype=bool)
    for pair, st in zip(mesh.pairs, states):
        row_n = 2 * pair.id
        row_t = row_n + 1
        if pair.id in inactive:
            Dmat.add(row_n, row_n, 1.0)
            Dmat.add(row_t, row_t, 1.0)
            pinned[row_n] = pinned[row_t] = True
        elif pair.is_crossing_pair:
            if st.kind is StateKind.OPEN:
                Dmat.add(row_n, row_n, 1.0)
                pinned[row_n] = True
            else:
                w = pair.weight
                _add_pair_entries(C, row_n, pair.normal, w, pair.node_plus, pair.node_minus)
                _add_pair_entries(
                    B, row_n, pair.normal, w, pair.node_plus, pair.node_minus,
                    transpose=True,
                )
                g[row_n] += w * pair.gap0
            Dmat.add(row_t, row_t, 1.0)  # no point friction at the crossing
            pinned[row_t] = True
        elif st.kind is StateKind.OPEN:
            Dmat.add(row_n, row_n, 1.0)
            Dmat.add(row_t, row_t, 1.0)
            pinned[row_n] = pinned[row_t] = True
        elif st.kind is StateKind.SLIP:
            Dmat.add(row_t, row_n, st.sign * tan_phi)
            Dmat.add(row_t, row_t, 1.0)
            g[row_t] = -st.sign * fric.cohesion

    return ContactBlocks(
        C=C.matrix((m2, n2)),
        B_up=B.matrix((n2, m2)),
        D=Dmat.matrix((m2, m2)),
        g=g,
        f_slip=f_slip,
        pinned=pinned,
    )


def contact_residuals(blocks, U, lam):
    """Contact contributions: (added to R^u, full R^lambda)."""
    ru = blocks.B_up @ lam + blocks.f_slip
    rlam = blocks.C @ U + blocks.D @ lam + blocks.g
    return ru, rlam
