import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles.independent import teleport_born
from pbqc.attacks import (PauliEncoding, attack_A_csqc_chain, attack_A_n2, attack_A_n2_xyz, attack_A_n3_qss,
                          attack_A_nN_qss, attack_B_n2, attack_B_n3, attack_modified, b2_marginal_counts,
                          enumerate_branches, exact_success_probability, protocol_b_n3_expected_generators,
                          protocol_b_n3_tableau, sample_branches)
from pbqc.protocols import (ModifiedInstance, ProtocolAInstance, ProtocolBInstance, parse_gate_sequence,
                            verify_response)
from pbqc.quantum_core import BlochAngles, make_rng
from pbqc.spacetime import regular_geometry

GEO = {n: regular_geometry(n, 1.0, 0.1) for n in (2, 3, 4, 5)}


def _all_succeed(branches, geometry):
    assert branches and abs(sum(b.probability for b in branches) - 1) < 1e-9
    for b in branches:
        assert b.success, b.records
        assert verify_response(b, b.expected, geometry)
    return len(branches)


@pytest.mark.parametrize("u,q", list(itertools.product((0, 1), (0, 1))))
def test_protocol_a_two_station_attack(u, q):
    branches = enumerate_branches(attack_A_n2, ProtocolAInstance.from_shares(u, (q,)), GEO[2])
    assert _all_succeed(branches, GEO[2]) == 4
    for b in branches:
        assert b.schedule.completion == pytest.approx(2.0, rel=1e-12)


@pytest.mark.parametrize("basis", ["X", "Y", "Z"])
@pytest.mark.parametrize("u", [0, 1])
def test_pauli_axis_attack(basis, u):
    assert exact_success_probability(attack_A_n2_xyz, PauliEncoding(u, basis), GEO[2]) == pytest.approx(1.0)


@pytest.mark.parametrize("u,q2,q3", list(itertools.product((0, 1), repeat=3)))
def test_protocol_a_three_station_qss(u, q2, q3):
    branches = enumerate_branches(attack_A_n3_qss, ProtocolAInstance.from_shares(u, (q2, q3)), GEO[3])
    assert _all_succeed(branches, GEO[3]) == 8
    assert {(b.records['s2'], b.records['s3']) for b in branches} == set(itertools.product((1, -1), repeat=2))
    assert branches[0].schedule.completion == pytest.approx(2 + (math.sqrt(3) - 2) * 0.1, rel=1e-12)


@pytest.mark.parametrize("n", [4, 5])
def test_qss_larger_coalitions(n):
    rng = make_rng(n)
    for _ in range(4):
        inst = ProtocolAInstance.random(n, rng)
        assert exact_success_probability(attack_A_nN_qss, inst, GEO[n]) == pytest.approx(1.0)


@pytest.mark.parametrize("label", list(itertools.product((0, 1), repeat=2)))
@pytest.mark.parametrize("local", ["I", "X", "Y", "Z"])
def test_protocol_b_two_station_attack(label, local):
    inst = ProtocolBInstance.from_label(label, [parse_gate_sequence(local), parse_gate_sequence(local)])
    assert _all_succeed(enumerate_branches(attack_B_n2, inst, GEO[2]), GEO[2]) == 4


@pytest.mark.parametrize("label", list(itertools.product((0, 1), repeat=3)))
def test_protocol_b_three_station_attack(label):
    inst = ProtocolBInstance.from_label(label, [parse_gate_sequence(s) for s in ("H", "S", "X")])
    assert _all_succeed(enumerate_branches(attack_B_n3, inst, GEO[3]), GEO[3]) == 16


@pytest.mark.parametrize("label", list(itertools.product((0, 1), repeat=3)))
def test_protocol_b_three_station_generators(label):
    for s in itertools.product((1, -1), repeat=4):
        signs = dict(zip(("s2", "s3", "s4", "s6"), s))
        tab = protocol_b_n3_tableau(label, signs)
        assert all(tab.contains(g) for g in protocol_b_n3_expected_generators(label, signs))


@pytest.mark.parametrize("shares", [("H",), ("S",), ("HS",), ("sHX",)])
@pytest.mark.parametrize("u", [0, 1])
def test_cluster_chain_attack(shares, u):
    inst = ModifiedInstance.from_sequences(u, shares)
    branches = enumerate_branches(attack_A_csqc_chain, inst, GEO[2])
    _all_succeed(branches, GEO[2])
    assert all(b.records["chain_state_ok"] for b in branches)


def test_cluster_chain_three_stations_exhaustive():
    inst = ModifiedInstance.from_sequences(1, ("H", "S"))
    _all_succeed(enumerate_branches(attack_A_csqc_chain, inst, GEO[3]), GEO[3])


@pytest.mark.parametrize("shares", [("X", "H"), ("sH", "HSH"), ("HS", "Y")])
def test_cluster_chain_three_stations_sampled(shares):
    for seed in range(6):
        inst = ModifiedInstance.from_sequences(seed % 2, shares)
        assert attack_A_csqc_chain(inst, GEO[3], make_rng(seed)).success


def test_chain_with_hadamard_matches_basis_attack():
    for u in (0, 1):
        chain = exact_success_probability(attack_A_csqc_chain, ModifiedInstance.from_sequences(u, ["H"]), GEO[2])
        direct = exact_success_probability(attack_A_n2, ProtocolAInstance.from_shares(u, (1,)), GEO[2])
        assert chain == pytest.approx(direct, abs=1e-12) and direct == pytest.approx(1.0)


def test_chain_rejects_non_clifford():
    with pytest.raises(ValueError):
        attack_A_csqc_chain(ModifiedInstance.from_sequences(0, ["T"]), GEO[2], make_rng(0))


def test_forced_zero_probability_branch_rejected():
    with pytest.raises(ValueError):
        attack_modified(ModifiedInstance.from_angles(0, BlochAngles(0.0, 0.0)), "MeasureHold", GEO[2],
                        forced={"b": -1})


def test_teleport_optimal_exact_values(frozen):
    p = exact_success_probability(attack_modified, ModifiedInstance.from_angles(0, BlochAngles(math.pi / 3, math.pi / 5)),
                                  "TeleportOptimal", GEO[2])
    assert p == pytest.approx(frozen["teleport_instance_pi3_pi5"], abs=1e-12)
    p = exact_success_probability(attack_modified, ModifiedInstance.from_angles(0, BlochAngles(math.pi / 2, 0.0)),
                                  "TeleportOptimal", GEO[2])
    assert p == pytest.approx(frozen["teleport_instance_pi2_0"], abs=1e-12)


def test_teleport_optimal_frequency():
    inst = ModifiedInstance.from_angles(0, BlochAngles(math.pi / 3, math.pi / 5))
    n = 100_000
    wins = sum(b.success for b in sample_branches(attack_modified, n, make_rng(5), inst, "TeleportOptimal", GEO[2]))
    assert abs(wins / n - 0.75) < 4 * math.sqrt(0.75 * 0.25 / n)
    direct = [attack_modified(inst, "TeleportOptimal", GEO[2], make_rng(s)).success for s in range(2000)]
    assert abs(np.mean(direct) - 0.75) < 4 * math.sqrt(0.75 * 0.25 / 2000)


@given(st.floats(0, math.pi), st.floats(0, 2 * math.pi), st.integers(0, 1))
def test_teleport_optimal_matches_born_oracle(theta, phi, u):
    inst = ModifiedInstance.from_angles(u, BlochAngles(theta, phi))
    p = exact_success_probability(attack_modified, inst, "TeleportOptimal", GEO[2])
    assert p == pytest.approx(teleport_born(theta, phi), abs=1e-9)


@given(st.floats(0, math.pi), st.floats(0, 2 * math.pi))
def test_measure_hold_and_guess(theta, phi):
    inst = ModifiedInstance.from_angles(0, BlochAngles(theta, phi))
    hold = exact_success_probability(attack_modified, inst, "MeasureHold", GEO[2])
    assert hold == pytest.approx(max(math.cos(theta / 2) ** 2, math.sin(theta / 2) ** 2), abs=1e-9)
    guess = exact_success_probability(attack_modified, inst, "RandomGuess", GEO[2])
    assert guess == pytest.approx(math.cos(theta / 2) ** 2, abs=1e-9)


def test_entangle_memory_is_rejected():
    inst = ModifiedInstance.from_angles(0, BlochAngles(math.pi / 2, 0.0))
    branches = enumerate_branches(attack_modified, inst, "EntangleMemory", GEO[2])
    bad = [b for b in branches if not b.consistent]
    assert bad and all(not verify_response(b, b.expected, GEO[2]) for b in bad)
    assert sum(b.probability for b in branches if b.success) < 1


def test_b2_marginal_independent_of_challenge():
    n = 25_000
    counts = b2_marginal_counts(n, make_rng(12))
    freqs = np.array(list(counts.values())) / n
    sigma = math.sqrt(0.25 / n)
    assert np.all(np.abs(freqs - 0.5) < 4 * sigma)
    assert np.ptp(freqs) < 4 * math.sqrt(2) * sigma


def test_sampler_matches_direct_runs():
    inst = ProtocolAInstance.from_shares(1, (1,))
    direct = [attack_A_n2(inst, GEO[2], make_rng(s)).records["s1"] for s in range(3000)]
    sampled = [b.records["s1"] for b in sample_branches(attack_A_n2, 3000, make_rng(0), inst, GEO[2])]
    assert abs(np.mean(direct) - np.mean(sampled)) < 4 * math.sqrt(2 / 3000)
