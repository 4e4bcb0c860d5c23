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
    import json
    import locclab.Reducer
    import locclab.Verifier
    import locclab.Protocol
    import locclab.States
    import locclab.Reference
    import locclab.linalg
    import locclab.LoccException
except ImportError:
    print('Unable to import locclab.  Is locclab installed?')
    sys.exit(1)

ALICE = 'alice'
BOB = 'bob'
I2 = numpy.eye(2, dtype=complex)
I4 = numpy.eye(4, dtype=complex)
GATE_TOL = locclab.linalg.Tolerance(1e-9, 1e-7)

def _gate(theta):
    return locclab.States.ControlledUnitary.canonical(theta)

def _build(steps, resource=None):
    """
    Build a uniform protocol from (party, make) pairs, where make maps a
    history to the instrument used after it.
    """
    if resource is None:
        resource = locclab.States.resource_from_mu(0.5)
    turns = []
    histories = [()]
    for party, make in steps:
        instruments = {}
        following = []
        for h in histories:
            ops = make(h)
            instruments[h] = ops
            following.extend(h + (r,) for r in range(len(ops)))
        turns.append(locclab.Protocol.Turn(party, instruments))
        histories = following
    return locclab.Protocol.LoccProtocol(turns, resource)

def _passes(p, theta):
    report = locclab.Verifier.verify(p, _gate(theta), GATE_TOL)
    return report.passed and locclab.Protocol.validate(p, GATE_TOL) == []

def _leading_bob(theta):
    # teleportation protocol after an idle Bob turn
    first, second, third = locclab.Reference.eisert_operators(_gate(theta))
    return _build([(BOB, lambda h: [I4]),
                   (ALICE, lambda h: first),
                   (BOB, lambda h: second[h[1]]),
                   (ALICE, lambda h: [third[h[1]][h[2]]])])

def _split_bob(theta, seed):
    # Bob starts with a two-outcome local unitary that he undoes later
    rng = numpy.random.default_rng(seed)
    V = locclab.linalg.random_unitary(4, rng)
    first, second, third = locclab.Reference.eisert_operators(_gate(theta))
    return _build([(BOB, lambda h: [V / numpy.sqrt(2), V / numpy.sqrt(2)]),
                   (ALICE, lambda h: first),
                   (BOB, lambda h: [op.dot(V.conj().T) for op in second[h[1]]]),
                   (ALICE, lambda h: [third[h[1]][h[2]]])])

def _trailing_bob(theta, seed):
    # Bob rotates his output and rotates it back in an extra turn
    rng = numpy.random.default_rng(seed)
    w = locclab.linalg.random_unitary(2, rng)
    first, second, third = locclab.Reference.eisert_operators(_gate(theta))
    return _build([(ALICE, lambda h: first),
                   (BOB, lambda h: [w.dot(op) for op in second[h[0]]]),
                   (ALICE, lambda h: [third[h[0]][h[1]]]),
                   (BOB, lambda h: [w.conj().T])])

def _bob_random_unitary(theta):
    # a mirrored teleportation protocol with idle turns between its halves
    first, second, third = locclab.Reference.eisert_operators(_gate(theta))
    return _build([(BOB, lambda h: first),
                   (ALICE, lambda h: [I4]),
                   (BOB, lambda h: [I2]),
                   (ALICE, lambda h: second[h[0]]),
                   (BOB, lambda h: [third[h[0]][h[3]]])])

def _padded(theta, n, seed):
    rng = numpy.random.default_rng(seed)
    VA = locclab.linalg.random_unitary(4, rng)
    VB = locclab.linalg.random_unitary(4, rng)
    first, second, third = locclab.Reference.eisert_operators(_gate(theta))
    if n == 5:
        steps = [(BOB, lambda h: [VB]),
                 (ALICE, lambda h: first),
                 (BOB, lambda h: [op.dot(VB.conj().T) for op in second[h[1]]]),
                 (ALICE, lambda h: [third[h[1]][h[2]]]),
                 (BOB, lambda h: [I2])]
    else:
        steps = [(ALICE, lambda h: [VA]),
                 (BOB, lambda h: [VB]),
                 (ALICE, lambda h: [op.dot(VA.conj().T) for op in first]),
                 (BOB, lambda h: [op.dot(VB.conj().T) for op in second[h[2]]]),
                 (ALICE, lambda h: [third[h[2]][h[3]]]),
                 (BOB, lambda h: [I2])]
    return _build(steps)

# test the closed-form phases
def test_lambda_delta_phase():
    for lam in [0.5, 1.0, 2.0]:
        for theta in [0.4, numpy.pi / 2, numpy.pi]:
            z = locclab.Reducer.lambda_delta_phase(lam, theta)
            assert abs(abs(z) - 1) < 1e-12
            w = numpy.exp(-1j * theta)
            assert abs(z / lam + 1 - w * (z + 1 / lam)) < 1e-12

class _Blocks(object):
    def __init__(self, A00, A11):
        self.A00 = A00
        self.A11 = A11

def _lambda_node(lam, theta, flip=False):
    # blocks with A11 A00^-1 = Q diag(sqrt(lam), 1/sqrt(lam)) Rh and branch
    # vectors whose Rh A00 R b* images meet the intertwining relation
    rng = numpy.random.default_rng(40)
    G = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    A00 = locclab.linalg.psd_sqrt(G.dot(G.conj().T) + I2)
    Rh = locclab.linalg.random_unitary(2, rng)
    D2 = numpy.diag([lam, 1 / lam])
    A11 = locclab.linalg.psd_sqrt(A00.dot(Rh.conj().T).dot(D2).dot(Rh).dot(A00))
    R = numpy.diag([0.8, 0.6]).astype(complex)
    z = numpy.conj(locclab.Reducer.lambda_delta_phase(lam, theta))
    if flip:
        z = numpy.conj(z)
    tilt = numpy.sqrt(lam) * numpy.exp(0.7j)
    g0 = 0.9 * numpy.exp(0.3j) * numpy.array([1, tilt])
    g1 = 1.3 * numpy.exp(-1.1j) * numpy.array([1, z * tilt])
    M = numpy.linalg.inv(R).dot(numpy.linalg.inv(A00)).dot(Rh.conj().T)
    return A00, A11, R, numpy.conj(M.dot(g0)), numpy.conj(M.dot(g1))

def test_case_c_phase_lambda():
    for lam in [2.5, 0.4]:
        for theta in [numpy.pi / 2, 1.0]:
            A00, A11, R, b00, b11 = _lambda_node(lam, theta)
            found, phase = locclab.Reducer.case_c_phase(A00, A11, R, b00, b11)
            assert abs(found - max(lam, 1 / lam)) < 1e-9
            assert abs(phase - locclab.Reducer.lambda_delta_phase(found, theta)) < 1e-9

def test_case_c_lambda_residuals():
    theta = numpy.pi / 2
    A00, A11, R, b00, b11 = _lambda_node(2.5, theta)
    ws = locclab.Reducer.ReductionWorkspace((0,), 'c')
    locclab.Reducer._case_c_diagnostics(ws, _Blocks(A00, A11), R, theta, b00, b11)
    assert abs(ws.lam - 2.5) < 1e-9
    assert ws.residuals['intertwining'] < 1e-9
    assert ws.residuals['lambda_delta'] < 1e-9
    assert abs(numpy.exp(-1j * ws.delta) - locclab.Reducer.lambda_delta_phase(2.5, theta)) < 1e-9

    # the opposite phase breaks both relations
    A00, A11, R, b00, b11 = _lambda_node(2.5, theta, flip=True)
    ws = locclab.Reducer.ReductionWorkspace((0,), 'c')
    locclab.Reducer._case_c_diagnostics(ws, _Blocks(A00, A11), R, theta, b00, b11)
    assert ws.residuals['intertwining'] > 1e-3
    assert ws.residuals['lambda_delta'] > 1e-3

def test_case_c_lambda_one_skips_delta():
    ws = locclab.Reducer.ReductionWorkspace((0,), 'c')
    b00 = numpy.array([1, 0], dtype=complex)
    b11 = numpy.array([0, 1], dtype=complex)
    locclab.Reducer._case_c_diagnostics(ws, _Blocks(I2, I2), I2 / numpy.sqrt(2), numpy.pi, b00, b11)
    assert abs(ws.lam - 1) < 1e-12
    assert ws.delta is None
    assert 'lambda_delta' not in ws.residuals

def test_mu_delta_prime():
    for mu in [0.2, 0.5, 1.0]:
        for theta in [0.4, numpy.pi / 2, numpy.pi]:
            z = locclab.Reducer.mu_delta_prime(mu, theta)
            assert abs(abs(z) - 1) < 1e-12
            assert abs(mu + z - numpy.exp(1j * theta) * (1 + mu * z)) < 1e-12

# test the resource functional
def test_check_lemma4_eisert():
    rng = numpy.random.default_rng(15)
    for k in range(1, 9):
        theta = k * numpy.pi / 8
        p = locclab.Reference.build_eisert(_gate(theta))
        assert locclab.Verifier.verify(p, _gate(theta)).passed
        check = locclab.Reducer.check_lemma4(p)
        assert abs(check['inferred_mu'] - 0.5) < 1e-6
        assert check['proportionality_residual'] < 1e-9
        assert abs(p.resource_state().entropy() - 1) < 1e-5

def test_check_lemma4_wrong_depth():
    with pytest.raises(locclab.LoccException.StructureException):
        locclab.Reducer.check_lemma4(_trailing_bob(numpy.pi, 0))

def test_lemma4_functional_weak_resource():
    X = locclab.States.choi_matrix(0.8)
    residual, mu = locclab.Reducer.lemma4_functional(I2, X, I2, I2)
    assert residual > 0.1
    assert abs(mu - 0.8) < 1e-12

def test_simultaneous_eigenvalues():
    blocks = locclab.Reducer.compute_block_elements(locclab.Reference.build_eisert(_gate(numpy.pi)))
    e0, f0, e1, f1 = locclab.Reducer.simultaneous_eigenvalues(blocks, numpy.eye(2) / numpy.sqrt(2))
    assert abs(e0 - f1) < 1e-12
    assert abs(e1 - f0) < 1e-12

# test block elements and classification
def test_block_elements_eisert_root():
    blocks = locclab.Reducer.compute_block_elements(locclab.Reference.build_eisert(_gate(numpy.pi)))
    assert blocks.ranks == {'A00': 2, 'A11': 2, 'B00': 2, 'B11': 2}
    assert blocks.off_diagonal < 1e-12
    assert numpy.allclose(blocks.A00, I2)

def test_classify_cases():
    tol = locclab.linalg.Tolerance()
    cases = {'a': _trailing_bob(numpy.pi, 1),
             'b': _bob_random_unitary(numpy.pi),
             'c': _split_bob(numpy.pi, 2)}
    for expected, p in cases.items():
        blocks = locclab.Reducer.compute_block_elements(p, tol)
        assert locclab.Reducer.classify_case(blocks, tol) == expected

def test_classify_rank_mismatch():
    A = numpy.array([[1, 0, 1, 0], [0, 0, 0, 1]], dtype=complex)
    blocks = locclab.Reducer.BlockElements(A, I4, None)
    with pytest.raises(locclab.LoccException.InvariantViolation):
        locclab.Reducer.classify_case(blocks)

def test_block_elements_bad_resource():
    with pytest.raises(locclab.LoccException.StructureException):
        locclab.Reducer.BlockElements(numpy.eye(6), numpy.eye(6), None)

# test locclab.Reducer.split_measurement
def test_split_measurement_isometry():
    rng = numpy.random.default_rng(16)
    T = locclab.linalg.random_matrix(4, 2, rng)
    ops = locclab.Reducer.split_measurement(T, [T.conj().T.dot(T)])
    assert numpy.allclose(ops[0].dot(T), locclab.linalg.psd_sqrt(T.conj().T.dot(T)), atol=1e-10)
    total = sum(op.conj().T.dot(op) for op in ops)
    assert numpy.allclose(total, I4, atol=1e-10)

def test_split_measurement_two_grams():
    rng = numpy.random.default_rng(17)
    T = locclab.linalg.random_matrix(4, 4, rng)
    G = T.conj().T.dot(T)
    grams = [G / 3, 2 * G / 3]
    ops = locclab.Reducer.split_measurement(T, grams)
    for op, gram in zip(ops, grams):
        MT = op.dot(T)
        assert numpy.allclose(MT.conj().T.dot(MT), gram, atol=1e-8)

def test_split_measurement_mismatch():
    with pytest.raises(locclab.LoccException.LoccException):
        locclab.Reducer.split_measurement(I2, [2 * I2])

# test the single-step rewrites
def test_reduce_case_a():
    for seed in range(3):
        p = _trailing_bob(numpy.pi / 2, seed)
        q = locclab.Reducer.reduce_case_a(p, _gate(numpy.pi / 2))
        assert q.depth() == 3
        assert _passes(q, numpy.pi / 2)
        assert locclab.Protocol.channel_distance(p, q) < 1e-9

def test_reduce_case_b():
    p = _bob_random_unitary(numpy.pi)
    q = locclab.Reducer.reduce_case_b(p, _gate(numpy.pi))
    assert q.depth() == 4
    assert _passes(q, numpy.pi)
    assert locclab.Protocol.channel_distance(p, q) < 1e-9

def test_reduce_case_c():
    for theta in [numpy.pi, numpy.pi / 2, numpy.pi / 3]:
        p = _leading_bob(theta)
        q = locclab.Reducer.reduce_case_c(p, _gate(theta))
        assert q.depth() == 3
        assert q.parties() == [BOB, ALICE, BOB] or q.parties() == [ALICE, BOB, ALICE]
        assert _passes(q, theta)
        assert locclab.Protocol.channel_distance(p, q) < 1e-9

def test_reduce_case_c_record():
    p = _leading_bob(numpy.pi)
    q, record = locclab.Reducer.reduce_step(p, _gate(numpy.pi))
    assert record['case'] == 'c'
    assert abs(record['mu'] - 1) < 1e-9
    assert abs(record['lambda'] - 1) < 1e-9
    assert abs(abs(record['delta_prime']) - numpy.pi) < 1e-9
    assert record['residuals']['relation'] < 1e-9
    json.dumps(record)

def test_reduce_case_c_workspace_json():
    p = _split_bob(numpy.pi / 2, 2)
    q, record = locclab.Reducer.reduce_step(p, _gate(numpy.pi / 2))
    nodes = [node for node in record['nodes'] if node['case'] == 'c']
    assert len(nodes) == 2
    for node in nodes:
        for key in ['E00', 'U_A', 'U_B', 'kappa', 'eigenvalues', 'phases']:
            assert key in node
        for key in ['U_A', 'U_B']:
            U = locclab.linalg.matrix_from_json(node[key])
            assert numpy.allclose(U.conj().T.dot(U), I4, rtol=0, atol=1e-9)
        kappa = locclab.linalg.matrix_from_json(node['kappa'])
        assert kappa.shape == (2, 2)
    json.dumps(record)

def test_reduce_wrong_case():
    with pytest.raises(locclab.LoccException.LoccException):
        locclab.Reducer.reduce_case_a(_leading_bob(numpy.pi), _gate(numpy.pi))

def test_reduce_step_too_short():
    with pytest.raises(locclab.LoccException.StructureException):
        locclab.Reducer.reduce_step(locclab.Reference.build_eisert(_gate(numpy.pi)), _gate(numpy.pi))

def test_reduce_null_node():
    first, second, third = locclab.Reference.eisert_operators(_gate(numpy.pi))
    # a third Alice outcome that never happens
    zero = numpy.zeros((2, 4), dtype=complex)
    rng = numpy.random.default_rng(18)
    w = locclab.linalg.random_unitary(2, rng)
    p = _build([(ALICE, lambda h: first + [zero]),
                (BOB, lambda h: [w.dot(op) for op in second[min(h[0], 1)]]),
                (ALICE, lambda h: [third[min(h[0], 1)][h[1]]]),
                (BOB, lambda h: [w.conj().T])])
    assert _passes(p, numpy.pi)
    q, record = locclab.Reducer.reduce_step(p, _gate(numpy.pi))
    assert record['case'] == 'a'
    assert 'null' in [node['case'] for node in record['nodes']]
    assert q.depth() == 3
    assert _passes(q, numpy.pi)

# test locclab.Reducer.simplify
def test_simplify_padded():
    p = _padded(numpy.pi, 6, 0)
    q, actions = locclab.Reducer.simplify(p)
    assert q.depth() == 3
    assert len(actions) == 3
    assert _passes(q, numpy.pi)

def test_simplify_nothing_to_do():
    p = _split_bob(numpy.pi, 3)
    q, actions = locclab.Reducer.simplify(p)
    assert actions == []
    assert q.depth() == 4

# test locclab.Reducer.reduce_to_three_turns
def test_reduction_suite():
    target = _gate(numpy.pi)
    for n in [5, 6]:
        for seed in range(10):
            p = _padded(numpy.pi, n, seed)
            q, trace = locclab.Reducer.reduce_to_three_turns(p, target)
            assert q.depth() == 3
            report = locclab.Verifier.verify(q, target, GATE_TOL)
            assert report.passed
            assert report.max_deviation <= 1e-7
            assert locclab.Protocol.channel_distance(p, q) <= 1e-7
            assert len(trace) == n - 3

def test_reduce_full_case_c():
    for seed in range(3):
        p = _split_bob(numpy.pi / 2, seed)
        q, trace = locclab.Reducer.reduce_to_three_turns(p, _gate(numpy.pi / 2))
        assert q.depth() == 3
        assert trace.cases() == ['c']
        assert _passes(q, numpy.pi / 2)
        check = locclab.Reducer.check_lemma4(q)
        assert abs(check['inferred_mu'] - 0.5) < 1e-6
        json.dumps(trace.to_json())

def test_reduce_full_case_a():
    p = _trailing_bob(numpy.pi / 4, 4)
    q, trace = locclab.Reducer.reduce_to_three_turns(p, _gate(numpy.pi / 4))
    assert q.depth() == 3
    assert trace.cases() == ['a']

def test_reduce_three_turns_unchanged():
    p = locclab.Reference.build_eisert(_gate(numpy.pi))
    q, trace = locclab.Reducer.reduce_to_three_turns(p, _gate(numpy.pi))
    assert q.to_json() == p.to_json()
    assert len(trace) == 0

def test_reduce_degenerate():
    with pytest.raises(locclab.LoccException.LoccException):
        locclab.Reducer.reduce_to_three_turns(_padded(0.0, 5, 0), _gate(0.0))

def test_reduce_not_canonical():
    rng = numpy.random.default_rng(19)
    u = locclab.linalg.random_unitary(2, rng)
    gate = locclab.States.ControlledUnitary(numpy.pi, w1=u)
    with pytest.raises(locclab.LoccException.LoccException):
        locclab.Reducer.reduce_to_three_turns(_padded(numpy.pi, 5, 0), gate)

def test_reduce_failing_input():
    ident = locclab.Protocol.identity_protocol(5, locclab.States.resource_from_mu(0.5))
    with pytest.raises(locclab.LoccException.ReductionException) as excinfo:
        locclab.Reducer.reduce_to_three_turns(ident, _gate(numpy.pi))
    assert excinfo.value.step == 0
