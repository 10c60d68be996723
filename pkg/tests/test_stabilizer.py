import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pbqc.attacks import qss_residual, qss_residual_dense
from pbqc.pauli import PauliString
from pbqc.quantum_core import (NamedGate, PureState, apply_gate, equal_up_to_phase, make_ghz, make_rng,
                               measure_pauli)
from pbqc.stabilizer import (StabilizerTableau, apply_clifford, conjugate, ghz_party_rule, ghz_tableau,
                             qss_residual_tableau, residual_stabilizer, tableau_measure, tableau_to_state)

TWO_QUBIT_PAULIS = ["".join(p) for p in itertools.product("IXYZ", repeat=2)]
ONE_QUBIT_KINDS = ["H", "S", "SDG", "X", "Y", "Z"]


@pytest.mark.parametrize("kind,targets", [("CNOT", (0, 1)), ("CNOT", (1, 0)), ("CZ", (0, 1))] +
                         [(k, (q,)) for k in ONE_QUBIT_KINDS for q in (0, 1)])
def test_conjugation_matches_dense(kind, targets):
    u = apply_gate  # dense oracle: U P U^dag as a matrix
    for letters in TWO_QUBIT_PAULIS:
        p = PauliString.parse(letters)
        g = NamedGate(kind, targets)
        full = np.eye(4, dtype=complex)
        for col in range(4):
            full[:, col] = u(PureState((2, 2), np.eye(4)[col]), g).amps
        want = full @ p.matrix() @ full.conj().T
        assert np.allclose(conjugate(p, kind, targets).matrix(), want, atol=1e-12), letters


def test_cnot_on_bell_generators():
    tab = apply_clifford(StabilizerTableau.from_strings(["XX", "ZZ"]), "CNOT", (0, 1))
    assert {str(g) for g in tab.generators} == {"+XI", "+IZ"}


def test_clifford_only():
    with pytest.raises(ValueError):
        apply_clifford(StabilizerTableau.zeros(1), "T", (0,))


def test_rejects_bad_generator_sets():
    with pytest.raises(ValueError):
        StabilizerTableau.from_strings(["XI", "ZI"])      # anticommute
    with pytest.raises(ValueError):
        StabilizerTableau.from_strings(["ZZ", "ZZ"])      # dependent


@pytest.mark.parametrize("a,b,s2,s3", list(itertools.product((0, 1), (0, 1), (1, -1), (1, -1))))
def test_two_station_bell_residual(a, b, s2, s3):
    tab = StabilizerTableau.from_strings([("-" if a else "+") + "ZZII", ("-" if b else "+") + "XXXI",
                                          "+IZZZ", "+IIXX"])
    _, tab = tableau_measure(tab, PauliString.single(4, 1, "X"), forced=s2)
    _, tab = tableau_measure(tab, PauliString.single(4, 2, "Z"), forced=s3)
    assert tab.expectation(PauliString.parse("ZIIZ")) == (-1) ** a * s3
    assert tab.expectation(PauliString.parse("XIIX")) == (-1) ** b * s2


RESIDUAL_TABLE = {(0, 0): (+1, "X"), (0, 1): (-1, "Y"), (1, 0): (-1, "Y"), (1, 1): (-1, "X")}


@pytest.mark.parametrize("q2,q3,s2,s3", list(itertools.product((0, 1), (0, 1), (1, -1), (1, -1))))
def test_three_party_residual_table(q2, q3, s2, s3, frozen):
    sign, letter = RESIDUAL_TABLE[(q2, q3)]
    res = qss_residual_tableau((q2, q3), (s2, s3))
    assert res.letters == letter and res.sign == sign * s2 * s3
    assert qss_residual((q2, q3), (s2, s3)) == (letter, sign * s2 * s3)
    row = next(r for r in frozen["ghz_residuals_n3"] if r["q"] == [q2, q3] and r["s"] == [s2, s3])
    assert tuple(row["residual"]) == (letter, sign * s2 * s3)


def test_five_party_rule(frozen):
    assert ghz_party_rule((1, 1, 1, 0)) == "Y" == frozen["ghz_residual_n5_1110"][0]
    assert qss_residual_tableau((1, 1, 1, 0), (1, 1, 1, 1)).letters == "Y"
    assert ghz_party_rule((0, 0)) == "X" and ghz_party_rule((1, 0)) == "Y"


@given(st.integers(3, 6), st.data())
def test_closed_form_tracks_tableau(n, data):
    q = data.draw(st.lists(st.integers(0, 1), min_size=n - 1, max_size=n - 1))
    s = data.draw(st.lists(st.sampled_from([1, -1]), min_size=n - 1, max_size=n - 1))
    res = qss_residual_tableau(q, s)
    assert (res.letters, res.sign) == qss_residual(q, s)
    if n <= 5:
        assert qss_residual_dense(q, s) == qss_residual(q, s)


def test_ghz_tableau_matches_dense():
    for a in itertools.product((0, 1), repeat=3):
        for b1 in (0, 1):
            assert equal_up_to_phase(tableau_to_state(ghz_tableau(3, a, b1)), make_ghz(3, a, b1))


def test_forced_contradiction_rejected():
    tab = StabilizerTableau.zeros(1)
    with pytest.raises(ValueError):
        tableau_measure(tab, PauliString.parse("Z"), forced=-1)


def test_residual_stabilizer_none_when_entangled():
    assert residual_stabilizer(StabilizerTableau.from_strings(["XX", "ZZ"]), 0) is None


CLIFFORD_OPS = ONE_QUBIT_KINDS + ["CNOT", "CZ"]


@given(st.integers(0, 2 ** 31), st.integers(2, 5), st.integers(1, 25))
def test_cross_engine_agreement(seed, n, steps):
    """Random Clifford circuits with measurements: outcomes and states agree between engines."""
    rng = make_rng(seed)
    tab = StabilizerTableau.zeros(n)
    dense = PureState.zeros(n)
    for _ in range(steps):
        if rng.random() < 0.25:
            letters = "".join(rng.choice(list("IXYZ"), n))
            if set(letters) == {"I"}:
                continue
            p = PauliString.parse(letters)
            s, tab = tableau_measure(tab, p, rng)
            s_dense, dense = measure_pauli(dense, p, forced=s)
            assert s_dense == s
        else:
            kind = str(rng.choice(CLIFFORD_OPS))
            t = rng.permutation(n)
            targets = tuple(int(x) for x in t[:2]) if kind in ("CNOT", "CZ") else (int(t[0]),)
            tab = apply_clifford(tab, kind, targets)
            dense = apply_gate(dense, NamedGate(kind, targets))
        # group invariants: real phases, commuting, independent (checked by the constructor)
        StabilizerTableau(tab.n, tab.generators)
    assert equal_up_to_phase(tableau_to_state(tab), dense)
