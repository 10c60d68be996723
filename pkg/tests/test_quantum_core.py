import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pbqc.pauli import PauliString
from pbqc.quantum_core import (BlochAngles, CodeSpace, DimensionError, NamedGate, PureState, apply_gate,
                               apply_gates, apply_pauli, bell_code, bell_measure, bell_pair, bell_state,
                               code_closure_check, equal_up_to_phase, factor_out, fidelity, make_ghz, make_qubit,
                               make_rng, measure_pauli, projective_measure, projective_probabilities,
                               sequence_matrix, spawn_rngs, teleport, teleport_byproduct)
from pbqc.protocols import parse_gate_sequence

from conftest import angles_st, unit_complex

R2 = 1 / math.sqrt(2)
GATE_KINDS = ["H", "S", "SDG", "T", "TDG", "X", "Y", "Z", "I"]


def random_state(rng, n):
    v = rng.normal(size=2 ** n) + 1j * rng.normal(size=2 ** n)
    return PureState.normalized((2,) * n, v)


# --- states ------------------------------------------------------------------

def test_make_qubit_equator():
    s = make_qubit(BlochAngles(math.pi / 2, 0.0))
    assert np.allclose(s.amps, [R2, R2])


@given(angles_st)
def test_make_qubit_pair_orthogonal(ang):
    a = BlochAngles(*ang)
    assert abs(make_qubit(a).inner(make_qubit(a, anti=True))) < 1e-12


def test_bloch_angle_bounds():
    with pytest.raises(ValueError):
        BlochAngles(4.0, 0.0)
    with pytest.raises(ValueError):
        BlochAngles(1.0, -0.1)


def test_bell_pair_amplitudes():
    assert np.allclose(bell_pair().amps, [R2, 0, 0, R2])


def test_ghz_three_zero():
    s = make_ghz(3, [0, 0, 0], 0)
    want = np.zeros(8)
    want[0] = want[7] = R2
    assert np.allclose(s.amps, want)


def test_ghz_two_is_phi11():
    assert equal_up_to_phase(make_ghz(2, [0, 1], 1), bell_state(1, 1))


def test_state_rejects_bad_norm_and_dims():
    with pytest.raises(ValueError):
        PureState((2,), [1.0, 1.0])
    with pytest.raises(ValueError):
        PureState((2, 2), [1.0, 0.0])


def test_text_roundtrip():
    s = random_state(make_rng(0), 2)
    back = PureState.from_text(s.to_text())
    assert np.allclose(back.amps, s.amps) and back.dims == s.dims


# --- gates -------------------------------------------------------------------

def test_hththt_matches_matrix_chain(frozen):
    out = apply_gates(PureState.from_bits("0"), parse_gate_sequence("HTHTT"))
    want = np.array([complex(*z) for z in frozen["hththt_on_zero"]])
    assert np.allclose(out.amps, want, atol=1e-12)


def test_gate_arity_checked():
    with pytest.raises(ValueError):
        NamedGate("CNOT", (0,))
    with pytest.raises(ValueError):
        NamedGate("H", (0, 1))
    with pytest.raises(ValueError):
        NamedGate("FOO", (0,))


def test_gate_rejects_qutrit_target():
    s = PureState.basis((3, 2), (0, 0))
    with pytest.raises(DimensionError):
        apply_gate(s, NamedGate("H", (0,)))


@given(st.integers(0, 2 ** 32 - 1), st.lists(st.sampled_from(GATE_KINDS + ["CNOT", "CZ"]), max_size=20))
def test_unitarity_preserves_inner_products(seed, kinds):
    rng = make_rng(seed)
    a, b = random_state(rng, 3), random_state(rng, 3)
    gates = []
    for k in kinds:
        t = rng.permutation(3)
        gates.append(NamedGate(k, tuple(t[:2]) if k in ("CNOT", "CZ") else (int(t[0]),)))
    a2, b2 = apply_gates(a, gates), apply_gates(b, gates)
    assert abs(np.linalg.norm(a2.amps) - 1) < 1e-10
    assert abs(a2.inner(b2) - a.inner(b)) < 1e-10


@given(st.lists(st.sampled_from(GATE_KINDS), max_size=12))
def test_sequence_matrix_is_unitary(kinds):
    m = sequence_matrix([NamedGate(k, (0,)) for k in kinds])
    assert np.allclose(m.conj().T @ m, np.eye(2), atol=1e-12)


# --- measurements ------------------------------------------------------------

def test_zz_on_bell_always_plus():
    zz = PauliString.parse("ZZ")
    for seed in range(50):
        s, _ = measure_pauli(bell_pair(), zz, make_rng(seed))
        assert s == 1
    with pytest.raises(ValueError):
        measure_pauli(bell_pair(), zz, forced=-1)


def test_xx_on_phi00_keeps_state():
    s, post = measure_pauli(bell_pair(), PauliString.parse("XX"), make_rng(1))
    assert s == 1 and equal_up_to_phase(post, bell_pair())


def test_x_on_zero_born_frequency():
    rng = make_rng(2024)
    n = 100_000
    x = PauliString.parse("X")
    zero = PureState.from_bits("0")
    plus = sum(measure_pauli(zero, x, rng)[0] == 1 for _ in range(n))
    sigma = math.sqrt(0.25 / n)
    assert abs(plus / n - 0.5) < 3 * sigma


@given(st.integers(0, 10_000), st.sampled_from(["X", "Y", "Z", "XZ", "YY", "ZI"]))
def test_measurement_idempotent(seed, letters):
    rng = make_rng(seed)
    s = random_state(rng, len(letters))
    p = PauliString.parse(letters)
    o1, post = measure_pauli(s, p, rng)
    o2, post2 = measure_pauli(post, p, rng)
    assert o1 == o2 and equal_up_to_phase(post, post2)


@given(st.integers(0, 10_000))
def test_operations_keep_normalisation(seed):
    rng = make_rng(seed)
    s = random_state(rng, 3)
    _, s = measure_pauli(s, PauliString.parse("XIY"), rng)
    _, _, s = bell_measure(s, (0, 2), rng)
    k, s = projective_measure(s, bell_code(), (1, 2), rng)
    assert abs(np.linalg.norm(s.amps) - 1) < 1e-10


def test_bell_measure_phi11():
    a, b, _ = bell_measure(bell_state(1, 1), (0, 1), make_rng(0))
    assert (a, b) == (1, 1)


def test_bell_measure_on_00_projector_norms():
    probs = projective_probabilities(PureState.from_bits("00"), bell_code())
    assert np.allclose(probs, [0.5, 0.5, 0, 0])
    seen = {bell_measure(PureState.from_bits("00"), (0, 1), make_rng(s))[:2] for s in range(40)}
    assert seen == {(0, 0), (0, 1)}


def test_bell_measure_equals_cnot_h_zz():
    rng = make_rng(5)
    for _ in range(10):
        s = random_state(rng, 2)
        direct = projective_probabilities(s, bell_code())
        t = apply_gates(s, [NamedGate("CNOT", (0, 1)), NamedGate("H", (0,))])
        comp = np.abs(t.amps) ** 2                 # |b a> after the circuit
        # |Phi_ab> -> |b>|a>: index of (a, b) is 2b + a
        assert np.allclose(direct, [comp[0], comp[2], comp[1], comp[3]], atol=1e-12)


def test_projective_on_x_psi():
    ang = BlochAngles(math.pi / 3, 0.0)
    code = CodeSpace([make_qubit(ang), make_qubit(ang, anti=True)])
    s = apply_pauli(make_qubit(ang), PauliString.parse("X"))
    probs = projective_probabilities(s, code)
    assert probs[0] == pytest.approx(math.sin(math.pi / 3) ** 2, abs=1e-12)


def test_projective_rejects_incomplete_basis():
    code = CodeSpace([PureState.from_bits("0")])
    with pytest.raises(ValueError):
        projective_measure(PureState.from_bits("0"), code, rng=make_rng(0))


def _xz(state):
    return apply_pauli(apply_pauli(state, PauliString.parse("Z")), PauliString.parse("X"))


def test_equal_up_to_phase_xz_on_equator():
    # XZ flips |+> into |->, so the pair is detected as equal up to phase
    plus = BlochAngles(math.pi / 2, 0.0)
    assert equal_up_to_phase(_xz(make_qubit(plus)), make_qubit(plus, anti=True))
    # XZ = -iY fixes the Y eigenstate |+i> instead of flipping it
    plus_i = BlochAngles(math.pi / 2, math.pi / 2)
    assert equal_up_to_phase(_xz(make_qubit(plus_i)), make_qubit(plus_i))
    assert not equal_up_to_phase(_xz(make_qubit(plus_i)), make_qubit(plus_i, anti=True))


def test_factor_out_rejects_entangled():
    with pytest.raises(ValueError):
        factor_out(bell_pair(), 0)


# --- teleportation -----------------------------------------------------------

@given(unit_complex(2), st.sampled_from([(1, 1), (1, -1), (-1, 1), (-1, -1)]))
def test_teleportation_identity(amps, branch):
    psi = PureState((2,), amps)
    s1, s2, post = teleport(psi @ bell_pair(), 0, 1, forced=branch)
    assert (s1, s2) == branch
    fixed = apply_pauli(factor_out(post, 2), teleport_byproduct(s1, s2))
    assert abs(fidelity(fixed, psi) - 1) < 1e-10


# --- code spaces -------------------------------------------------------------

BYPRODUCTS = [PauliString.parse(p) for p in ("II", "XI", "ZI")] + [PauliString.parse("XI") * PauliString.parse("ZI")]


def test_bell_code_closed():
    closed, witness = code_closure_check(bell_code(), BYPRODUCTS)
    assert closed and witness is None


def test_triplet_singlet_code_not_closed():
    code = CodeSpace([PureState((2, 2), [1, 0, 0, 0]), PureState((2, 2), [0, R2, R2, 0]),
                      PureState((2, 2), [0, R2, -R2, 0]), PureState((2, 2), [0, 0, 0, 1])])
    closed, witness = code_closure_check(code, BYPRODUCTS)
    assert not closed
    assert witness.byproduct.letters == "XI" and witness.codeword == 0


def test_codespace_rejects_non_orthonormal():
    with pytest.raises(ValueError):
        CodeSpace([PureState.from_bits("0"), make_qubit(BlochAngles(0.3, 0))])


def test_spawned_streams_reproducible():
    a = [r.random() for r in spawn_rngs(7, 3)]
    b = [r.random() for r in spawn_rngs(7, 3)]
    assert a == b and len(set(a)) == 3
