"""Fock-space substrate: states, operators, statistics, fidelity."""

import math

import numpy as np
import pytest

from vacuumprobe.errors import (DimensionMismatchError, TruncationError,
                                UnnormalizedStateError)
from vacuumprobe.fock import (AtomLevelSet, DensityOperator, FockTruncation,
                              HilbertSpace, PureState, annihilation,
                              atom_transition, bare_lower, bare_raise,
                              basis_state, coherent_state, creation, embed,
                              fidelity, field_space, identity,
                              number_distribution, number_operator,
                              photon_statistics, suggest_truncation, tensor,
                              vacuum_projectors)

TR = FockTruncation(12)
FS = field_space(TR)


def fock(n, trunc=TR):
    return basis_state(field_space(trunc), fock=n)


class TestSpaces:
    def test_truncation_dim(self):
        assert TR.dim == 13
        with pytest.raises(ValueError):
            FockTruncation(0)

    def test_atom_labels(self):
        atom = AtomLevelSet.lambda_system()
        assert atom.labels == ("g", "gp", "e", "s")
        assert AtomLevelSet.npod(2).labels == ("g0", "g1", "g2", "e", "s")
        with pytest.raises(ValueError):
            AtomLevelSet(("g", "g"))

    def test_basis_ordering_atom_major(self):
        space = HilbertSpace(AtomLevelSet.lambda_system(), (FockTruncation(2),))
        # atom index slowest-varying: |g,0>,|g,1>,|g,2>,|gp,0>,...
        assert space.index("g", 2) == 2
        assert space.index("gp", 0) == 3
        assert space.basis_labels()[3] == "|gp,0>"

    def test_index_bounds(self):
        space = HilbertSpace(AtomLevelSet.lambda_system(), (FockTruncation(2),))
        with pytest.raises(DimensionMismatchError):
            space.index("g", 3)


class TestCoherentStates:
    def test_alpha_zero_is_vacuum(self):
        psi = coherent_state(0.0, TR)
        assert psi.amplitudes[0] == 1.0
        assert np.all(psi.amplitudes[1:] == 0.0)

    def test_vacuum_weight_alpha_one(self):
        # |<0|alpha=1>|^2 = e^{-1}, the protocol's vacuum probability
        psi = coherent_state(1.0, TR)
        assert abs(abs(psi.amplitudes[0]) ** 2 - math.exp(-1)) < 1e-10

    def test_tail_below_tolerance(self):
        # oracle: Poisson tail sum_{n>12} e^{-1}/n! ~ 8e-11 < 1e-8
        tail = 1.0 - sum(math.exp(-1) / math.factorial(n) for n in range(13))
        assert tail < 1e-8
        coherent_state(1.0, TR)  # must not raise

    def test_truncation_too_small(self):
        with pytest.raises(TruncationError):
            coherent_state(2.0, FockTruncation(6))

    def test_suggest_truncation(self):
        tr = suggest_truncation(1.0)
        assert tr.n_max <= 12
        coherent_state(1.0, tr)
        coherent_state(2.0, suggest_truncation(2.0))


class TestLadderOperators:
    def test_annihilation_defining_relation(self):
        a = annihilation(TR)
        assert np.linalg.norm(a.matrix @ fock(0).amplitudes) == 0.0
        out = a.matrix @ fock(2).amplitudes
        assert abs(out[1] - math.sqrt(2)) < 1e-15

    def test_number_operator(self):
        n_op = number_operator(TR)
        for n in range(TR.dim):
            v = fock(n).amplitudes
            assert np.allclose(n_op.matrix @ v, n * v)

    def test_creation_is_dagger(self):
        assert np.array_equal(creation(TR).matrix, annihilation(TR).matrix.conj().T)

    def test_bare_raise_lower(self):
        ep, em = bare_raise(TR), bare_lower(TR)
        assert np.allclose(ep.matrix @ fock(0).amplitudes, fock(1).amplitudes)
        # E-E+ = I on states with zero top amplitude
        prod = em.matrix @ ep.matrix
        expect = np.eye(TR.dim)
        expect[-1, -1] = 0.0
        assert np.array_equal(prod, expect)

    def test_ep_em_on_coherent(self):
        # E+E- |alpha> = (I-P0)|alpha>, squared norm 1 - e^{-1}
        psi = coherent_state(1.0, TR)
        out = bare_raise(TR).matrix @ (bare_lower(TR).matrix @ psi.amplitudes)
        assert abs(np.linalg.norm(out) ** 2 - (1 - math.exp(-1))) < 1e-10

    def test_number_distribution_shift(self):
        psi = coherent_state(1.0, TR)
        shifted = PureState(FS, bare_raise(TR).matrix @ psi.amplitudes).normalized()
        pk = number_distribution(psi)
        pk_shift = number_distribution(shifted)
        assert np.max(np.abs(pk_shift[1:] - pk[:-1] / np.sum(pk[:-1]))) < 1e-12
        assert pk_shift[0] == 0.0


class TestProjectors:
    def test_projector_algebra(self):
        p0, pnot = vacuum_projectors(TR)
        assert np.array_equal(p0.matrix @ p0.matrix, p0.matrix)
        assert np.linalg.norm(p0.matrix @ pnot.matrix) == 0.0
        assert np.array_equal(p0.matrix + pnot.matrix, identity(FS).matrix)

    def test_projected_coherent_norm(self):
        _, pnot = vacuum_projectors(TR)
        psi = coherent_state(1.0, TR)
        n2 = np.linalg.norm(pnot.matrix @ psi.amplitudes) ** 2
        assert abs(n2 - (1 - math.exp(-1))) < 1e-10


class TestEmbedTensor:
    def test_embed_annihilation(self):
        space = HilbertSpace(AtomLevelSet.lambda_system(), (TR,))
        a_full = embed(annihilation(TR), 0, space)
        out = a_full.matrix @ basis_state(space, "gp", 1).amplitudes
        assert abs(out[space.index("gp", 0)] - 1.0) < 1e-15

    def test_embed_identity(self):
        space = HilbertSpace(AtomLevelSet.lambda_system(), (TR,))
        assert np.array_equal(embed(identity(FS), 0, space).matrix,
                              np.eye(space.dim))

    def test_atom_transition_bookkeeping(self):
        space = HilbertSpace(AtomLevelSet.lambda_system(), (TR,))
        op = atom_transition(space, "e", "g")
        g0 = basis_state(space, "g", 0)
        assert abs((op.matrix @ g0.amplitudes)[space.index("e", 0)] - 1.0) < 1e-15

    def test_tensor_atom_major(self):
        atom = basis_state(HilbertSpace(AtomLevelSet.lambda_system(), ()), "gp")
        joint = tensor(atom, fock(1))
        assert abs(joint.amplitudes[joint.space.index("gp", 1)] - 1.0) < 1e-15


class TestStatistics:
    def test_coherent_poissonian(self):
        st = photon_statistics(coherent_state(1.0, TR))
        assert abs(st.mean_n - 1.0) < 1e-8
        assert abs(st.mandel_q) < 1e-7

    def test_bare_raised_coherent(self):
        # oracle: shifted Poisson(1) -> mean 2, var 1, Q = -0.5; n_max = 20
        # keeps the truncation bias below 1e-10 (it is ~5e-8 at n_max = 12)
        tr = FockTruncation(20)
        psi = coherent_state(1.0, tr)
        shifted = PureState(field_space(tr),
                            bare_raise(tr).matrix @ psi.amplitudes).normalized()
        st = photon_statistics(shifted)
        assert abs(st.mean_n - 2.0) < 1e-10
        assert abs(st.var_n - 1.0) < 1e-10
        assert abs(st.mandel_q + 0.5) < 1e-10
        assert st.distribution[0] == 0.0

    def test_bare_lowered_coherent_superpoissonian(self):
        psi = coherent_state(1.0, TR)
        lowered = PureState(FS, bare_lower(TR).matrix @ psi.amplitudes).normalized()
        assert photon_statistics(lowered).mandel_q > 0.0

    def test_unnormalized_rejected(self):
        bad = PureState(FS, 0.5 * fock(0).amplitudes)
        with pytest.raises(UnnormalizedStateError):
            photon_statistics(bad)


class TestFidelity:
    def test_self_and_orthogonal(self):
        assert abs(fidelity(fock(0), fock(0)) - 1.0) < 1e-12
        assert fidelity(fock(0), fock(1)) < 1e-12

    def test_vacuum_vs_coherent(self):
        assert abs(fidelity(fock(0), coherent_state(1.0, TR)) - math.exp(-1)) < 1e-9

    def test_uhlmann_matches_overlap_for_pure(self):
        a, b = coherent_state(0.5, TR), coherent_state(1.0, TR)
        f_pure = fidelity(a, b)
        f_mixed = fidelity(a.to_density(), b.to_density())
        assert abs(f_pure - abs(a.overlap(b)) ** 2) < 1e-12
        assert abs(f_mixed - f_pure) < 1e-10

    def test_mixed_state_fidelity(self):
        rho = DensityOperator(FS, 0.5 * fock(0).to_density().matrix
                              + 0.5 * fock(1).to_density().matrix)
        assert abs(fidelity(rho, fock(0)) - 0.5) < 1e-12
        assert abs(fidelity(rho, rho) - 1.0) < 1e-10

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            fidelity(fock(0), basis_state(field_space(FockTruncation(5)), fock=0))


class TestDensityOperator:
    def test_validate_rejects_bad_trace(self):
        with pytest.raises(UnnormalizedStateError):
            DensityOperator(FS, 2.0 * fock(0).to_density().matrix).validate()

    def test_partial_trace(self):
        space = HilbertSpace(AtomLevelSet.lambda_system(), (TR,))
        joint = basis_state(space, "gp", 3).to_density()
        red = joint.reduced(0)
        assert abs(red.matrix[3, 3] - 1.0) < 1e-15
        atom_red = joint.reduced("atom")
        assert abs(atom_red.matrix[1, 1] - 1.0) < 1e-15

    def test_purity(self):
        assert abs(fock(0).to_density().purity - 1.0) < 1e-12
