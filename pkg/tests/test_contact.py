"""Jump kinematics, state classification, contact block assembly."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fracfem.contact import (
    FrictionParams,
    PairKinematics,
    PairState,
    StateKind,
    StateTolerances,
    assemble_contact_blocks,
    classify_state,
    contact_residuals,
    fully_fixed_pairs,
    jump_displacement,
    mohr_coulomb_tau_c,
    pair_kinematics,
    tributary_weights,
)
from fracfem.mesh import build_contact_pairs, generate_rect_mesh, split_fractures

SQRT2 = math.sqrt(2.0)
FRIC30 = FrictionParams(cohesion=0.0, friction_angle=math.radians(30.0))
TOL = StateTolerances()


def built(mesh):
    return build_contact_pairs(split_fractures(mesh))


def horizontal_mesh(nx=2):
    # unit square with a through-going horizontal fracture at mid height
    return built(
        generate_rect_mesh(1.0, 1.0, nx, 2, fractures=[(0.0, 0.5, 1.0, 0.5)])
    )


def kin(jump_n=0.0, jump_t=0.0, lam_n=0.0, lam_t=0.0, gap0=0.0):
    return PairKinematics(
        jump_global=np.zeros(2), jump_n=jump_n, jump_t=jump_t,
        lam_n=lam_n, lam_t=lam_t, gap0=gap0,
    )


class TestJumpDisplacement:
    def test_rigid_translation_zero_jump(self):
        mesh = horizontal_mesh()
        U = np.tile([0.123, -0.456], mesh.n_nodes)
        for pair in mesh.pairs:
            k = jump_displacement(pair, U)
            np.testing.assert_allclose(k.jump_global, 0.0, atol=1e-15)

    @given(
        tx=st.floats(min_value=-1.0, max_value=1.0),
        ty=st.floats(min_value=-1.0, max_value=1.0),
    )
    @settings(max_examples=20)
    def test_any_translation_zero_jump(self, tx, ty):
        mesh = horizontal_mesh()
        U = np.tile([tx, ty], mesh.n_nodes)
        for pair in mesh.pairs:
            k = jump_displacement(pair, U)
            assert abs(k.jump_n) < 1e-15
            assert abs(k.jump_t) < 1e-15

    def test_axis_aligned_frame(self):
        mesh = horizontal_mesh()
        pair = mesh.pairs[0]
        U = np.zeros(2 * mesh.n_nodes)
        U[2 * pair.node_plus + 1] = 1e-3
        k = jump_displacement(pair, U)
        assert k.jump_n == pytest.approx(1e-3)
        assert k.jump_t == pytest.approx(0.0, abs=1e-18)

    def test_45_degree_frame(self):
        mesh = built(
            generate_rect_mesh(2.0, 2.0, 20, 20, fractures=[(0.5, 0.5, 1.5, 1.5)])
        )
        pair = mesh.pairs[1]
        U = np.zeros(2 * mesh.n_nodes)
        U[2 * pair.node_plus] = 1e-3  # jump (1e-3, 0)
        k = jump_displacement(pair, U)
        assert k.jump_n == pytest.approx(-SQRT2 / 2 * 1e-3, rel=1e-12)
        assert k.jump_t == pytest.approx(SQRT2 / 2 * 1e-3, rel=1e-12)

    @given(
        theta=st.floats(min_value=-math.pi, max_value=math.pi),
        jx=st.floats(min_value=-1e-3, max_value=1e-3),
        jy=st.floats(min_value=-1e-3, max_value=1e-3),
    )
    def test_local_components_reconstruct_jump(self, theta, jx, jy):
        n = np.array([math.cos(theta), math.sin(theta)])
        m = np.array([n[1], -n[0]])
        jump = np.array([jx, jy])
        jn, jt = jump @ n, jump @ m
        np.testing.assert_allclose(jn * n + jt * m, jump, atol=1e-12)


class TestMohrCoulomb:
    def test_frictionless_cohesionless(self):
        assert mohr_coulomb_tau_c(0.0, FRIC30) == 0.0

    def test_reference_value(self):
        # 1e7 * tan(pi/6), evaluated by hand
        assert mohr_coulomb_tau_c(-10e6, FRIC30) == pytest.approx(
            5.7735027e6, rel=1e-7
        )

    def test_low_friction_coefficient(self):
        fric = FrictionParams(cohesion=0.0, friction_angle=math.radians(5.71))
        assert mohr_coulomb_tau_c(-10e6, fric) == pytest.approx(1.0e6, rel=2e-3)

    def test_invalid_params(self):
        with pytest.raises(Exception):
            FrictionParams(cohesion=-1.0, friction_angle=0.1)
        with pytest.raises(Exception):
            FrictionParams(cohesion=0.0, friction_angle=math.pi / 2)


class TestClassifyState:
    def test_tension_opens(self):
        st_ = classify_state(kin(lam_n=1.0, lam_t=99e6), FRIC30, TOL)
        assert st_.kind is StateKind.OPEN

    def test_compressed_below_bound_sticks(self):
        st_ = classify_state(kin(lam_n=-10e6, lam_t=3e6), FRIC30, TOL)
        assert st_ == PairState.stick()

    def test_at_bound_slips_with_jump_sign(self):
        st_ = classify_state(kin(lam_n=-10e6, lam_t=6e6, jump_t=1e-6),
                             FRIC30, TOL)
        assert st_ == PairState.slip(+1)

    def test_sign_falls_back_to_trial_traction(self):
        st_ = classify_state(kin(lam_n=-10e6, lam_t=-6e6, jump_t=0.0),
                             FRIC30, TOL)
        assert st_ == PairState.slip(-1)

    def test_final_fallback_positive(self):
        fric = FrictionParams(cohesion=0.0, friction_angle=0.3)
        st_ = classify_state(kin(lam_n=0.0, lam_t=0.0), fric, TOL)
        assert st_ == PairState.slip(+1)

    def test_open_persists_with_positive_gap(self):
        st_ = classify_state(
            kin(jump_n=1e-6), FRIC30, TOL, current=PairState.open_()
        )
        assert st_.kind is StateKind.OPEN

    def test_open_reengages_beyond_noise_band(self):
        st_ = classify_state(
            kin(jump_n=-1e-6), FRIC30, TOL, current=PairState.open_()
        )
        assert st_.kind is not StateKind.OPEN

    def test_open_survives_noise_level_penetration(self):
        st_ = classify_state(
            kin(jump_n=-1e-15), FRIC30, TOL, current=PairState.open_()
        )
        assert st_.kind is StateKind.OPEN

    def test_crossing_pairs_never_slip(self):
        st_ = classify_state(
            kin(lam_n=-1e6, lam_t=99e6), FRIC30, TOL, crossing=True
        )
        assert st_ == PairState.stick()

    def test_slip_state_validation(self):
        with pytest.raises(ValueError):
            PairState(StateKind.SLIP, 0)
        with pytest.raises(ValueError):
            PairState(StateKind.STICK, 1)


class TestAssembleBlocks:
    def test_all_open_decouples(self):
        mesh = horizontal_mesh()
        states = [PairState.open_() for _ in mesh.pairs]
        blocks = assemble_contact_blocks(mesh, states, FRIC30)
        assert blocks.C.nnz == 0
        assert blocks.B_up.nnz == 0
        D = blocks.D.toarray()
        np.testing.assert_allclose(D, np.eye(2 * mesh.n_pairs))

    def test_stick_rows_are_lumped_mass_row_sums(self):
        # two segments of length 0.5 between three pairs; the closure weight
        # of each pair equals the row sum of the 1D linear mass matrix
        # [[L/3, L/6], [L/6, L/3]] accumulated over its adjacent segments
        mesh = horizontal_mesh(nx=2)
        assert mesh.n_pairs == 3
        L = 0.5
        mass = np.array([[L / 3, L / 6], [L / 6, L / 3]])
        expected_trib = {0.0: mass[0].sum(), 0.5: 2 * mass[0].sum(),
                         1.0: mass[0].sum()}
        trib = tributary_weights(mesh)
        for pair in mesh.pairs:
            assert trib[pair.id] == pytest.approx(expected_trib[pair.arc_coord])
        states = [PairState.stick() for _ in mesh.pairs]
        blocks = assemble_contact_blocks(mesh, states, FRIC30)
        C = blocks.C.toarray()
        for pair in mesh.pairs:
            w = expected_trib[pair.arc_coord]
            row_n = C[2 * pair.id]
            assert row_n[2 * pair.node_plus + 1] == pytest.approx(w)  # +n_y
            assert row_n[2 * pair.node_minus + 1] == pytest.approx(-w)
            row_t = C[2 * pair.id + 1]
            assert row_t[2 * pair.node_plus] == pytest.approx(w)  # +m_x
            assert row_t[2 * pair.node_minus] == pytest.approx(-w)

    def test_stick_coupling_is_exact_transpose(self):
        mesh = horizontal_mesh(nx=4)
        states = [PairState.stick() for _ in mesh.pairs]
        blocks = assemble_contact_blocks(mesh, states, FRIC30)
        diff = (blocks.B_up - blocks.C.T).toarray()
        assert np.abs(diff).max() == 0.0

    def test_slip_column_structure(self):
        # tangential load direction of the normal-multiplier column equals
        # -sign*tan(phi) times the normal direction weight
        mesh = horizontal_mesh(nx=2)
        states = [PairState.slip(+1) for _ in mesh.pairs]
        blocks = assemble_contact_blocks(mesh, states, FRIC30)
        B = blocks.B_up.toarray()
        tan_phi = math.tan(math.radians(30.0))
        for pair in mesh.pairs:
            col = B[:, 2 * pair.id]
            w_n = col[2 * pair.node_plus + 1]   # normal (y) part
            w_t = col[2 * pair.node_plus]        # tangential (x) part
            assert w_t == pytest.approx(-tan_phi * w_n, rel=1e-12)
            assert np.all(B[:, 2 * pair.id + 1] == 0.0)  # no lam_t column

    def test_slip_tangential_row_is_coulomb_relation(self):
        mesh = horizontal_mesh(nx=2)
        fric = FrictionParams(cohesion=2e5, friction_angle=math.radians(30.0))
        sign = -1
        states = [PairState.slip(sign) for _ in mesh.pairs]
        blocks = assemble_contact_blocks(mesh, states, fric)
        D = blocks.D.toarray()
        for pair in mesh.pairs:
            r = 2 * pair.id + 1
            assert D[r, 2 * pair.id] == pytest.approx(sign * fric.tan_phi)
            assert D[r, r] == 1.0
            assert blocks.g[r] == pytest.approx(-sign * fric.cohesion)

    def test_slip_cohesion_load(self):
        mesh = horizontal_mesh(nx=2)
        fric = FrictionParams(cohesion=1e6, friction_angle=math.radians(30.0))
        states = [PairState.slip(+1) for _ in mesh.pairs]
        blocks = assemble_contact_blocks(mesh, states, fric)
        trib = tributary_weights(mesh)
        for pair in mesh.pairs:
            f_plus = blocks.f_slip[2 * pair.node_plus : 2 * pair.node_plus + 2]
            np.testing.assert_allclose(
                f_plus, fric.cohesion * trib[pair.id] * pair.tangent,
                rtol=1e-12,
            )

    def test_gap_vector_uses_tributary_weights(self):
        mesh = built(
            generate_rect_mesh(1.0, 1.0, 2, 2,
                               fractures=[(0.0, 0.5, 1.0, 0.5, 1e-3)])
        )
        states = [PairState.stick() for _ in mesh.pairs]
        blocks = assemble_contact_blocks(mesh, states, FRIC30)
        trib = tributary_weights(mesh)
        for pair in mesh.pairs:
            assert blocks.g[2 * pair.id] == pytest.approx(1e-3 * trib[pair.id])
            assert blocks.g[2 * pair.id + 1] == 0.0

    def test_crossing_pair_rows(self):
        mesh = built(
            generate_rect_mesh(4.0, 4.0, 16, 16,
                               fractures=[(1, 2, 3, 2), (2, 1, 2, 3)])
        )
        states = [PairState.stick() for _ in mesh.pairs]
        blocks = assemble_contact_blocks(mesh, states, FRIC30)
        C = blocks.C.toarray()
        D = blocks.D.toarray()
        for pair in mesh.pairs:
            if not pair.is_crossing_pair:
                continue
            row_n = C[2 * pair.id]
            comp = pair.normal * pair.weight
            np.testing.assert_allclose(
                row_n[2 * pair.node_plus : 2 * pair.node_plus + 2], comp,
                atol=1e-15,
            )
            # tangential multiplier always pinned at a crossing
            assert np.all(C[2 * pair.id + 1] == 0.0)
            assert D[2 * pair.id + 1, 2 * pair.id + 1] == 1.0

    def test_fully_fixed_pairs_get_identity_rows(self):
        mesh = horizontal_mesh(nx=2)
        pair = mesh.pairs[0]
        fixed = np.array([
            2 * pair.node_plus, 2 * pair.node_plus + 1,
            2 * pair.node_minus, 2 * pair.node_minus + 1,
        ])
        assert fully_fixed_pairs(mesh, fixed) == {pair.id}
        states = [PairState.stick() for _ in mesh.pairs]
        blocks = assemble_contact_blocks(mesh, states, FRIC30, fixed_dofs=fixed)
        C = blocks.C.toarray()
        D = blocks.D.toarray()
        assert np.all(C[2 * pair.id] == 0.0)
        assert D[2 * pair.id, 2 * pair.id] == 1.0


class TestContactResiduals:
    def test_zero_state_zero_residuals(self):
        mesh = horizontal_mesh()
        states = [PairState.stick() for _ in mesh.pairs]
        blocks = assemble_contact_blocks(mesh, states, FRIC30)
        ru, rlam = contact_residuals(
            blocks, np.zeros(2 * mesh.n_nodes), np.zeros(2 * mesh.n_pairs)
        )
        assert np.all(ru == 0.0)
        assert np.all(rlam == 0.0)

    def test_rigid_translation_stick_residual_is_gap(self):
        mesh = built(
            generate_rect_mesh(1.0, 1.0, 2, 2,
                               fractures=[(0.0, 0.5, 1.0, 0.5, 1e-3)])
        )
        states = [PairState.stick() for _ in mesh.pairs]
        blocks = assemble_contact_blocks(mesh, states, FRIC30)
        U = np.tile([0.3, -0.7], mesh.n_nodes)
        _, rlam = contact_residuals(blocks, U, np.zeros(2 * mesh.n_pairs))
        np.testing.assert_allclose(rlam, blocks.g, atol=1e-16)
        assert np.linalg.norm(blocks.g) > 0.0

    def test_pair_kinematics_reads_multipliers(self):
        mesh = horizontal_mesh()
        lam = np.arange(2 * mesh.n_pairs, dtype=float)
        k = pair_kinematics(mesh.pairs[1], np.zeros(2 * mesh.n_nodes), lam)
        assert k.lam_n == 2.0
        assert k.lam_t == 3.0
