#!/usr/bin/python

import sys
import os

try:
    import pytest
except ImportError:
    print('Unable to import pytest.  Is pytest installed?')
    sys.exit(1)

try:
    import numpy
except ImportError:
    print('Unable to import numpy.  Is numpy installed?')
    sys.exit(1)

# Find locclab
prefix = '.'
for i in range(0,3):
    if os.path.isdir(os.path.join(prefix, 'locclab')):
        sys.path.insert(0, prefix)
        break
    else:
        prefix = '../' + prefix

try:
    import locclab.States
    import locclab.linalg
    import locclab.LoccException
except ImportError:
    print('Unable to import locclab.  Is locclab installed?')
    sys.exit(1)

def _bell():
    return locclab.States.resource_from_mu(0.5)

# test locclab.States.PureState
def test_state_not_normalized():
    with pytest.raises(locclab.LoccException.LoccException):
        locclab.States.PureState([1, 1, 0, 0], (2, 2))

def test_state_bad_length():
    with pytest.raises(locclab.LoccException.StructureException):
        locclab.States.PureState([1, 0, 0], (2, 2))

def test_state_bad_dims():
    with pytest.raises(locclab.LoccException.StructureException):
        locclab.States.PureState([1], (0, 1))

def test_state_json():
    psi = locclab.States.PureState(numpy.array([0.6, 0, 0, 0.8j]), (2, 2))
    back = locclab.States.PureState.from_json(psi.to_json())
    assert back.dims == (2, 2)
    assert numpy.allclose(back.amplitudes, psi.amplitudes, rtol=0, atol=1e-15)

def test_state_json_missing_key():
    with pytest.raises(locclab.LoccException.StructureException):
        locclab.States.PureState.from_json({'dims': [2, 2]})

def test_state_json_renormalized():
    obj = {'dims': [2, 2], 'amplitudes': [[0.7071068, 0], [0, 0], [0, 0], [0.7071068, 0]]}
    psi = locclab.States.PureState.from_json(obj)
    assert abs(numpy.linalg.norm(psi.amplitudes) - 1) < 1e-15

# test locclab.States.schmidt_decompose
def test_schmidt_bell():
    coeffs, basisA, basisB = locclab.States.schmidt_decompose(_bell())
    assert numpy.allclose(coeffs, [1 / numpy.sqrt(2)] * 2)
    assert locclab.States.schmidt_number(_bell()) == 2

def test_schmidt_reconstruction():
    rng = numpy.random.default_rng(7)
    for trial in range(20):
        v = locclab.linalg.random_matrix(1, 6, rng).ravel()
        psi = locclab.States.PureState(v / numpy.linalg.norm(v), (2, 3))
        coeffs, basisA, basisB = locclab.States.schmidt_decompose(psi)
        rebuilt = sum(coeffs[k] * numpy.kron(basisA[:, k], basisB[:, k]) for k in range(len(coeffs)))
        assert numpy.allclose(rebuilt, psi.amplitudes, atol=1e-12)

def test_schmidt_product():
    psi = locclab.States.product_state([1, 1j], [0.6, 0.8])
    assert locclab.States.schmidt_number(psi) == 1
    assert abs(locclab.States.entanglement_entropy(psi)) < 1e-12

# test entropies
def test_entropy_bell():
    assert abs(locclab.States.entanglement_entropy(_bell()) - 1) < 1e-12

def test_entropy_qutrit():
    v = numpy.zeros(9, dtype=complex)
    v[[0, 4, 8]] = 1 / numpy.sqrt(3)
    psi = locclab.States.PureState(v, (3, 3))
    assert abs(locclab.States.entanglement_entropy(psi) - numpy.log2(3)) < 1e-12

def test_entropy_of_zero():
    assert locclab.States.entropy_of_coefficients([0, 0]) == 0.0

def test_entropy_mu_point_eight():
    res = locclab.States.canonical_resource(locclab.States.resource_from_mu(0.8))
    assert abs(res.entropy() - 0.721928) < 1e-6
    coeffs = [numpy.sqrt(0.8), numpy.sqrt(0.2)]
    assert abs(locclab.States.entropy_of_coefficients(coeffs) - 0.721928) < 1e-6

def test_local_unitary_invariance():
    rng = numpy.random.default_rng(17)
    for trial in range(20):
        dA, dB = [(2, 2), (3, 3), (2, 3)][trial % 3]
        v = locclab.linalg.random_matrix(1, dA * dB, rng).ravel()
        psi = locclab.States.PureState(v / numpy.linalg.norm(v), (dA, dB))
        UA = locclab.linalg.random_unitary(dA, rng)
        UB = locclab.linalg.random_unitary(dB, rng)
        moved = locclab.States.PureState(numpy.kron(UA, UB).dot(psi.amplitudes), (dA, dB))
        assert abs(locclab.States.entanglement_entropy(moved) - locclab.States.entanglement_entropy(psi)) < 1e-10
        assert locclab.States.schmidt_number(moved) == locclab.States.schmidt_number(psi)

# test locclab.States.canonical_resource
def test_canonical_resource_rebuild():
    rng = numpy.random.default_rng(8)
    for trial in range(20):
        v = locclab.linalg.random_matrix(1, 4, rng).ravel()
        psi = locclab.States.PureState(v / numpy.linalg.norm(v), (2, 2))
        res = locclab.States.canonical_resource(psi)
        assert res.mu >= 0.5 - 1e-12
        assert numpy.allclose(res.rebuild().amplitudes, psi.amplitudes, atol=1e-12)

def test_canonical_resource_flipped():
    v = numpy.array([0, numpy.sqrt(0.8), numpy.sqrt(0.2), 0])
    psi = locclab.States.PureState(v, (2, 2))
    res = locclab.States.canonical_resource(psi)
    assert abs(res.mu - 0.8) < 1e-12
    assert numpy.allclose(numpy.abs(res.localA), numpy.eye(2), rtol=0, atol=1e-12)
    assert numpy.allclose(numpy.abs(res.localB), numpy.array([[0, 1], [1, 0]]), rtol=0, atol=1e-12)
    assert numpy.allclose(res.rebuild().amplitudes, psi.amplitudes, rtol=0, atol=1e-12)

def test_canonical_resource_product():
    psi = locclab.States.product_state([1, 0], [1, 0])
    with pytest.raises(locclab.LoccException.LoccException):
        locclab.States.canonical_resource(psi)

def test_canonical_resource_qutrit():
    v = numpy.zeros(9)
    v[0] = 1
    with pytest.raises(locclab.LoccException.StructureException):
        locclab.States.canonical_resource(locclab.States.PureState(v, (3, 3)))

def test_resource_from_mu_range():
    with pytest.raises(locclab.LoccException.StructureException):
        locclab.States.resource_from_mu(1.5)

def test_resource_entropy():
    res = locclab.States.canonical_resource(locclab.States.resource_from_mu(0.5))
    assert abs(res.entropy() - 1) < 1e-12
    assert abs(res.mu - 0.5) < 1e-12

# test locclab.States.canonicalize_controlled_unitary
def test_canonicalize_cz():
    gate = locclab.States.canonicalize_controlled_unitary(numpy.diag([1, 1, 1, -1]))
    assert abs(gate.theta - numpy.pi) < 1e-12
    assert numpy.allclose(gate.matrix(), numpy.diag([1, 1, 1, -1]))

def test_canonicalize_cnot():
    cnot = numpy.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]])
    gate = locclab.States.canonicalize_controlled_unitary(cnot)
    assert abs(gate.theta - numpy.pi) < 1e-12
    a1, a2, b1, b2 = gate.canonical_dressing()
    rebuilt = numpy.kron(a1, a2).dot(gate.canonical_matrix()).dot(numpy.kron(b1, b2))
    assert numpy.allclose(rebuilt, cnot, atol=1e-12)

def test_canonicalize_random_dressing():
    rng = numpy.random.default_rng(9)
    for trial in range(10):
        theta = rng.uniform(0.1, numpy.pi)
        mats = [locclab.linalg.random_unitary(2, rng) for k in range(4)]
        u = locclab.linalg.random_unitary(2, rng)
        w, V = numpy.linalg.eig(u)
        u = V.dot(numpy.diag([w[0], w[0] * numpy.exp(1j * theta)])).dot(numpy.linalg.inv(V))
        raw = locclab.States.ControlledUnitary(0.0, mats[0], mats[1], mats[2], mats[3], u)
        gate = locclab.States.canonicalize_controlled_unitary(raw)
        assert abs(gate.theta - theta) < 1e-9
        a1, a2, b1, b2 = gate.canonical_dressing()
        rebuilt = numpy.kron(a1, a2).dot(gate.canonical_matrix()).dot(numpy.kron(b1, b2))
        assert numpy.allclose(rebuilt, raw.matrix(), atol=1e-9)

def test_canonicalize_identity_degenerate():
    gate = locclab.States.canonicalize_controlled_unitary(numpy.eye(4))
    assert gate.degenerate
    assert abs(gate.theta) < 1e-12

def test_canonicalize_not_controlled():
    swap = numpy.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]])
    with pytest.raises(locclab.LoccException.StructureException):
        locclab.States.canonicalize_controlled_unitary(swap)

def test_canonicalize_not_unitary():
    with pytest.raises(locclab.LoccException.StructureException):
        locclab.States.canonicalize_controlled_unitary(2 * numpy.eye(4))

def test_gate_json():
    gate = locclab.States.ControlledUnitary.canonical(numpy.pi / 3)
    back = locclab.States.ControlledUnitary.from_json(gate.to_json())
    assert abs(back.theta - numpy.pi / 3) < 1e-12
    assert back.is_canonical()

def test_gate_json_raw():
    obj = {'form': 'raw', 'matrix': locclab.linalg.matrix_to_json(numpy.diag([1, 1, 1, 1j]))}
    gate = locclab.States.ControlledUnitary.from_json(obj)
    assert abs(gate.theta - numpy.pi / 2) < 1e-12

def test_gate_json_bad_form():
    with pytest.raises(locclab.LoccException.StructureException):
        locclab.States.ControlledUnitary.from_json({'form': 'other'})

def test_tomography_inputs():
    inputs = locclab.States.tomography_inputs()
    assert len(inputs) == 16
    span = numpy.array([rho.ravel() for rho in inputs])
    assert numpy.linalg.matrix_rank(span) == 16
