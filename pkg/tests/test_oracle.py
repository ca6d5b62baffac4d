"""Dense statevector reference engine."""

import numpy as np
import pytest

from clusterforge.cliffords import MAT
from clusterforge.graphstate import GraphState, chain, star
from clusterforge.oracle import (
    ORACLE_QUBIT_LIMIT,
    OracleLimitError,
    StateVector,
    amplitudes_csv,
    apply_unitary,
    equal_up_to_global_phase,
    graph_state_vector,
    merge_qubits,
    plus_state,
    project_measure,
)

INV_SQRT2 = 2**-0.5


def test_statevector_validates():
    with pytest.raises(ValueError, match="not normalized"):
        StateVector(1, np.array([1.0, 1.0]))
    with pytest.raises(ValueError, match="shape"):
        StateVector(2, np.array([1.0, 0.0]))
    with pytest.raises(OracleLimitError, match="oracle size limit"):
        plus_state(ORACLE_QUBIT_LIMIT + 1)
    v = plus_state(1)
    with pytest.raises(ValueError):
        v.amplitudes[0] = 9.0  # amplitudes are read-only


def test_plus_state_amplitudes():
    assert np.allclose(plus_state(2).amplitudes, [0.5, 0.5, 0.5, 0.5])


def test_graph_state_signs():
    # two-qubit graph state: CZ |++>, minus sign only on |11>
    v = graph_state_vector(chain(2))
    assert np.allclose(v.amplitudes, [0.5, 0.5, 0.5, -0.5])
    # no edges: plain plus state
    assert np.allclose(graph_state_vector(GraphState([1, 2])).amplitudes, 0.25**0.5)


def test_graph_state_vertex_order():
    # qubit index follows ascending vertex label, not insertion order
    a = graph_state_vector(GraphState([5, 9], [(9, 5)]))
    b = graph_state_vector(chain(2))
    assert np.allclose(a.amplitudes, b.amplitudes)


def test_graph_state_size_cap():
    with pytest.raises(OracleLimitError, match="oracle size limit"):
        graph_state_vector(chain(ORACLE_QUBIT_LIMIT + 1))


def test_apply_unitary_little_endian():
    # X on qubit 0 of |00> excites index 1
    v = StateVector(2, np.array([1, 0, 0, 0], dtype=complex))
    out = apply_unitary(v, MAT["X"], (0,))
    assert np.allclose(out.amplitudes, [0, 1, 0, 0])
    out = apply_unitary(v, MAT["X"], (1,))
    assert np.allclose(out.amplitudes, [0, 0, 1, 0])


def test_apply_unitary_two_qubit_order():
    # CNOT written with the first listed qubit as control (most
    # significant bit of the gate basis)
    cnot = np.array(
        [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex
    )
    v = StateVector(2, np.array([0, 1, 0, 0], dtype=complex))  # qubit0 = 1
    out = apply_unitary(v, cnot, (0, 1))
    assert np.allclose(out.amplitudes, [0, 0, 0, 1])  # target qubit1 flipped


def test_apply_unitary_rejects_junk():
    v = plus_state(2)
    with pytest.raises(ValueError, match="not unitary"):
        apply_unitary(v, np.ones((2, 2)), (0,))
    with pytest.raises(ValueError, match="duplicate qubit"):
        apply_unitary(v, np.eye(4), (0, 0))
    with pytest.raises(ValueError, match="no such qubit"):
        apply_unitary(v, MAT["X"], (5,))
    with pytest.raises(ValueError, match="1- and 2-qubit"):
        apply_unitary(v, np.eye(8), (0, 1, 2))


def test_cz_on_plus_gives_graph_state():
    cz = np.diag([1, 1, 1, -1]).astype(complex)
    got = apply_unitary(plus_state(2), cz, (0, 1))
    assert equal_up_to_global_phase(got, graph_state_vector(chain(2)))


def test_project_measure_probabilities():
    v = plus_state(1)
    vz, p = project_measure(v, 0, "Z", +1)
    assert abs(p - 0.5) < 1e-12
    assert np.allclose(vz.amplitudes, [1, 0])
    vx, p = project_measure(v, 0, "X", +1)
    assert abs(p - 1.0) < 1e-12
    assert np.allclose(vx.amplitudes, v.amplitudes)
    with pytest.raises(ValueError, match="vanishing probability"):
        project_measure(v, 0, "X", -1)
    with pytest.raises(ValueError, match="unknown measurement basis"):
        project_measure(v, 0, "Q", 1)
    with pytest.raises(ValueError, match="outcome must be"):
        project_measure(v, 0, "Z", 0)


def test_project_measure_y():
    vy, p = project_measure(plus_state(1), 0, "Y", +1)
    assert abs(p - 0.5) < 1e-12
    plus_i = StateVector(1, np.array([INV_SQRT2, 1j * INV_SQRT2]))
    assert equal_up_to_global_phase(vy, plus_i)


def test_z_measurement_on_graph_state_cuts_edges():
    # measuring vertex 2 of a 3-chain in Z leaves qubits 1,3 in |+>
    v = graph_state_vector(chain(3))
    out, p = project_measure(v, 1, "Z", +1)
    assert abs(p - 0.5) < 1e-12
    tensor = out.amplitudes.reshape(2, 2, 2)
    rest = tensor[:, 0, :].reshape(-1)  # qubit1 collapsed to |0>
    assert np.allclose(rest, 0.5)


def test_merge_qubits_plus_states():
    out, p = merge_qubits(plus_state(2), 0, 1)
    assert abs(p - 0.5) < 1e-12
    assert np.allclose(out.amplitudes, [INV_SQRT2, INV_SQRT2])


def test_merge_qubits_slot_bookkeeping():
    # |10> on (q1=1, q0=0) has no agreeing components with... build |11>
    v = StateVector(2, np.array([0, 0, 0, 1], dtype=complex))
    out, p = merge_qubits(v, 0, 1)
    assert abs(p - 1.0) < 1e-12
    assert np.allclose(out.amplitudes, [0, 1])
    v = StateVector(2, np.array([0, 1, 0, 0], dtype=complex))  # |01>: disagree
    with pytest.raises(ValueError, match="vanishing probability"):
        merge_qubits(v, 0, 1)
    with pytest.raises(ValueError, match="itself"):
        merge_qubits(plus_state(2), 1, 1)


def test_merge_matches_chain_join():
    # fusing the ends of two 2-chains must give the 3-chain state
    two = graph_state_vector(chain(2))
    both = StateVector(4, np.kron(two.amplitudes, two.amplitudes))
    merged, p = merge_qubits(both, 1, 2)
    assert abs(p - 0.5) < 1e-12
    assert equal_up_to_global_phase(merged, graph_state_vector(chain(3)))


def test_equal_up_to_global_phase():
    v = graph_state_vector(star(3))
    w = StateVector(3, v.amplitudes * np.exp(0.7j))
    assert equal_up_to_global_phase(v, w)
    assert not equal_up_to_global_phase(v, graph_state_vector(chain(3)))
    assert not equal_up_to_global_phase(v, plus_state(2))


def test_amplitudes_csv():
    text = amplitudes_csv(StateVector(1, np.array([1, 0], dtype=complex)))
    assert text == "index,bitstring,re,im\n0,0,1,0\n1,1,0,0\n"
    assert amplitudes_csv(plus_state(2)).splitlines()[3] == "2,01,0.5,0"
