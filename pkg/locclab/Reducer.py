# Copyright (C) 2026  The locclab developers

# This library is free software; you can redistribute it and/or
# modify it under the terms of the GNU Lesser General Public
# License as published by the Free Software Foundation;
# version 2.1 of the License.

# This library is distributed in the hope that it will be useful,
# but WITHOUT ANY WARRANTY; without even the implied warranty of
# MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE.  See the GNU
# Lesser General Public License for more details.

# You should have received a copy of the GNU Lesser General Public
# License along with this library; if not, write to the Free Software
# Foundation, Inc., 51 Franklin Street, Fifth Floor, Boston, MA  02110-1301  USA


"""
Turn reduction for protocols that implement a controlled-unitary gate.

The reducer works in the frame where Bob owns the last turn; protocols
ending with Alice are mirrored on the way in and out.  For an alternating
protocol of n >= 4 turns, every node reached after turn n-3 is classified
by the ranks of its block elements and its subtree (Bob, Alice, Bob) is
rewritten into a shorter one:

  case a - Alice's turn n-1 is a random unitary on the relevant support;
           Bob draws the choice himself and Alice's turn is folded away.
  case b - Bob's turn n-2 is a random unitary on the relevant support;
           Alice draws the choice together with her turn n-3.
  case c - all four blocks have rank 2; the last three turns are replaced
           by a two-outcome Alice splitting merged into turn n-3, a Bob
           measurement and a final Alice phase correction.

Every rewrite keeps the accumulated operators of all branches, so the
channel is unchanged.  reduce_to_three_turns() iterates rewrites and cheap
simplifications, checking each intermediate protocol.
"""

import logging
import numpy
import scipy.linalg

import locclab.LoccException
import locclab.linalg
import locclab.States
import locclab.Protocol
import locclab.Verifier

log = logging.getLogger(__name__)

DEFAULT_BUDGET = 1e-7
# branch probabilities at or below this are dropped from rebuilt instruments
NEGLIGIBLE = 1e-20
# case-c nodes with |lambda - 1| above this get the lambda-delta check
LAMBDA_ONE = 1e-6

def _loose(tol):
    return locclab.linalg.Tolerance(tol.eps_rank, locclab.linalg.MAX_EPS)

def _max_abs(M):
    return float(numpy.max(numpy.abs(M))) if numpy.size(M) > 0 else 0.0

def _resource_input(i, j, R):
    """
    Function to return the coefficient matrix of |ij> (x) |resource> over
    Alice's and Bob's (input, resource) registers.
    """
    E = numpy.zeros((2, 2), dtype=complex)
    E[i, j] = 1
    return numpy.kron(E, R)

def _node_weight(A, B, R):
    weight = 0.0
    for i, j in locclab.Verifier.BASIS:
        out = A.dot(_resource_input(i, j, R)).dot(locclab.linalg.transpose(B))
        weight += numpy.linalg.norm(out) ** 2
    return weight

class BlockElements(object):
    """
    Class that holds the block elements of one node.  Objects of this type
    contain the following pieces of information:

    A00, A11, B00, B11 - The square roots of the diagonal blocks of the
                         Gram matrices of the accumulated operators.
    ranks              - A dictionary from block name to its numerical rank.
    off_diagonal       - The largest off-diagonal Gram block entry; zero for
                         a protocol that implements a controlled gate.
    history            - The node's history.
    """
    def __init__(self, A, B, tol, history=()):
        tol = locclab.linalg._tol(tol)
        self.history = tuple(history)
        self.A00, self.A11, offA = _gram_blocks(A, tol)
        self.B00, self.B11, offB = _gram_blocks(B, tol)
        self.off_diagonal = max(offA, offB)
        self.ranks = {}
        for name in ['A00', 'A11', 'B00', 'B11']:
            block = getattr(self, name)
            self.ranks[name] = locclab.linalg.rank_tol(block, tol)
            _warn_near_threshold(name, block, tol, self.history)

    def __repr__(self):
        return "BlockElements(history=%s, ranks=%s)" % (list(self.history), self.ranks)

def _gram_blocks(M, tol):
    M = locclab.linalg.as_matrix(M)
    if M.shape[1] != 4:
        raise locclab.LoccException.StructureException("Block elements need a two-qubit resource, saw operator of shape %s" % (M.shape,))
    G = locclab.linalg.dagger(M).dot(M)
    loose = _loose(tol)
    return (locclab.linalg.psd_sqrt(G[:2, :2], loose),
            locclab.linalg.psd_sqrt(G[2:, 2:], loose),
            _max_abs(G[:2, 2:]))

def _warn_near_threshold(name, block, tol, history):
    s = locclab.linalg.singular_values(block)
    cutoff = locclab.linalg._cutoff(s, tol)
    for value in s:
        if cutoff < value <= 100 * cutoff:
            log.warning("Rank decision for %s at history %s is near the threshold: singular value %.3g, cutoff %.3g" % (name, list(history), value, cutoff))

def classify_case(blocks, tol=None):
    """
    Function to classify a node by the ranks of its block elements.  Returns
    'a', 'b' or 'c'.  Rank patterns that no implementing protocol can have
    raise InvariantViolation.
    """
    ranks = blocks.ranks
    if ranks['A00'] != ranks['A11']:
        raise locclab.LoccException.InvariantViolation("rank A00 = %d differs from rank A11 = %d at history %s" % (ranks['A00'], ranks['A11'], list(blocks.history)))
    if ranks['A00'] == 1:
        return 'a'
    if ranks['A00'] != 2:
        raise locclab.LoccException.InvariantViolation("rank A00 = %d at history %s" % (ranks['A00'], list(blocks.history)))
    if ranks['B00'] != ranks['B11']:
        raise locclab.LoccException.InvariantViolation("rank B00 = %d differs from rank B11 = %d at history %s" % (ranks['B00'], ranks['B11'], list(blocks.history)))
    if ranks['B00'] == 1:
        return 'b'
    if ranks['B00'] == 2:
        return 'c'
    raise locclab.LoccException.InvariantViolation("rank B00 = %d at history %s" % (ranks['B00'], list(blocks.history)))

class ReductionWorkspace(object):
    """
    Class that collects the quantities computed while rewriting one node.
    Objects of this type contain the following pieces of information:

    history       - The node's history.
    case          - 'a', 'b', 'c' or 'null' for a node without weight.
    blocks        - The BlockElements, None for null nodes.
    probabilities - Case a and b: the weights of the random unitary.
    lam           - Case c: lambda, the squared largest singular value of
                    A11 A00^{-1}.
    mu            - Case c: the smaller eigenvalue of tau^dagger tau with
                    tau = B11 B00^{-1}.
    delta         - Case c with lambda != 1: the phase relating lambda and
                    theta, see case_c_phase.
    delta_prime   - Case c: the phase with mu + e^{-i delta'} =
                    e^{i theta}(1 + mu e^{-i delta'}).
    E00           - Case c: factor with E00 E00^dagger equal to the Gram
                    matrix of Bob's side vectors in tau's eigenbasis.
    T, S          - Case c: T = S diag(1, e^{i theta}) S^{-1}.
    U_A, U_B      - Case c: the isometric parts of the accumulated operators.
    phases        - Case c: the splitting phases of Alice's two outcomes.
    kappa         - Case c: the branch amplitudes, indexed [x][r].
    eigenvalues   - Case c: (e0, f0, e1, f1) from simultaneous_eigenvalues.
    residuals     - A dictionary of consistency residuals.
    """
    def __init__(self, history, case, blocks=None):
        self.history = tuple(history)
        self.case = case
        self.blocks = blocks
        self.probabilities = None
        self.lam = None
        self.mu = None
        self.delta = None
        self.delta_prime = None
        self.E00 = None
        self.T = None
        self.S = None
        self.U_A = None
        self.U_B = None
        self.phases = None
        self.kappa = None
        self.eigenvalues = None
        self.residuals = {}

    def to_json(self):
        obj = {'history': list(self.history),
               'case': self.case,
               'residuals': dict(self.residuals)}
        if self.probabilities is not None:
            obj['probabilities'] = [float(x) for x in self.probabilities]
        for key, value in [('lambda', self.lam), ('mu', self.mu),
                           ('delta', self.delta),
                           ('delta_prime', self.delta_prime)]:
            if value is not None:
                obj[key] = float(value)
        if self.phases is not None:
            obj['phases'] = [float(x) for x in self.phases]
        if self.eigenvalues is not None:
            obj['eigenvalues'] = [float(x) for x in self.eigenvalues]
        for key, value in [('E00', self.E00), ('T', self.T), ('S', self.S),
                           ('U_A', self.U_A), ('U_B', self.U_B),
                           ('kappa', self.kappa)]:
            if value is not None:
                obj[key] = locclab.linalg.matrix_to_json(value)
        return obj

class ReductionTrace(object):
    """
    Class that records the steps of a reduction.  Each step is a dictionary
    with the keys step, case, lambda, mu, delta_prime and residuals.
    """
    def __init__(self):
        self.steps = []

    def add(self, step, record):
        entry = {'step': step,
                 'case': record.get('case'),
                 'lambda': record.get('lambda'),
                 'mu': record.get('mu'),
                 'delta_prime': record.get('delta_prime'),
                 'residuals': record.get('residuals', {})}
        if 'nodes' in record:
            entry['nodes'] = record['nodes']
        if 'action' in record:
            entry['action'] = record['action']
        self.steps.append(entry)

    def cases(self):
        return [s['case'] for s in self.steps]

    def __len__(self):
        return len(self.steps)

    def to_json(self):
        return list(self.steps)

def lambda_delta_phase(lam, theta):
    """
    Function to return e^{-i delta} = (lambda - e^{-i theta}) /
    (lambda e^{-i theta} - 1), the unit-modulus solution of
    z / lambda + 1 = e^{-i theta}(z + 1 / lambda).
    """
    w = numpy.exp(-1j * theta)
    return (lam - w) / (lam * w - 1)

def mu_delta_prime(mu, theta):
    """
    Function to return e^{-i delta'} = (e^{i theta} - mu) /
    (1 - mu e^{i theta}), the unit-modulus solution of
    mu + z = e^{i theta}(1 + mu z).
    """
    w = numpy.exp(1j * theta)
    return (w - mu) / (1 - mu * w)

def simultaneous_eigenvalues(blocks, X):
    """
    Function to compare M_l = A00 X conj(B_ll)^2 X^dagger A00 for l = 0, 1 in
    the eigenbasis of M_0.  Returns (e0, f0, e1, f1): the eigenvalues of M_0
    and the diagonal of M_1 in that basis.  When lambda = 1 they satisfy
    e0 = f1 and e1 = f0.
    """
    X = locclab.linalg.as_matrix(X, 'X')
    Ms = []
    for B in [blocks.B00, blocks.B11]:
        F = blocks.A00.dot(X).dot(numpy.conj(B))
        Ms.append(locclab.linalg.hermitian_part(F.dot(locclab.linalg.dagger(F))))
    w, V = scipy.linalg.eigh(Ms[0])
    d = numpy.real(numpy.diag(locclab.linalg.dagger(V).dot(Ms[1]).dot(V)))
    return float(w[0]), float(w[1]), float(d[0]), float(d[1])

def lemma4_functional(A00, X, B00, B11):
    """
    Function to evaluate F = sum_l (A00 X conj(B_ll))(A00 X conj(B_ll))^dagger.
    A protocol whose final Alice turn is unitary forces F to be proportional
    to the identity.  Returns (residual, inferred_mu) where residual is the
    largest entry of F / (tr F / 2) - I and inferred_mu the larger
    eigenvalue share of F.
    """
    F = numpy.zeros((2, 2), dtype=complex)
    for B in [B00, B11]:
        G = locclab.linalg.as_matrix(A00).dot(locclab.linalg.as_matrix(X)).dot(numpy.conj(locclab.linalg.as_matrix(B)))
        F += G.dot(locclab.linalg.dagger(G))
    F = locclab.linalg.hermitian_part(F)
    trace = float(numpy.trace(F).real)
    if trace <= 0:
        raise locclab.LoccException.LoccException("The functional vanishes; the blocks carry no weight")
    residual = _max_abs(F / (trace / 2) - numpy.eye(2))
    mu = float(numpy.max(numpy.linalg.eigvalsh(F)) / trace)
    return residual, mu

def check_lemma4(p, tol=None):
    """
    Function to evaluate lemma4_functional on a three-turn protocol, where
    the block elements at the root are identities.  Returns a dictionary
    with proportionality_residual and inferred_mu.
    """
    if p.depth() != 3:
        raise locclab.LoccException.StructureException("The resource check needs a three-turn protocol, saw %d turns" % (p.depth()))
    if p.resource_dims != (2, 2):
        raise locclab.LoccException.StructureException("The resource check needs a two-qubit resource, saw dims %s" % (p.resource_dims,))
    eye = numpy.eye(2, dtype=complex)
    residual, mu = lemma4_functional(eye, p.resource_matrix(), eye, eye)
    log.debug("resource check: residual %.3g, inferred mu %.12g" % (residual, mu))
    return {'proportionality_residual': residual, 'inferred_mu': mu}

def split_measurement(T, grams, factors=None, tol=None):
    """
    Function to build a measurement that splits an accumulated operator T.
    Given PSD matrices gram_x summing to T^dagger T, it returns operators
    M_x with (M_x T)^dagger (M_x T) = gram_x, followed by completion
    operators on the orthogonal complement of T's range.  With factors,
    M_x T equals factors[x] exactly; otherwise it is the PSD square root of
    gram_x.
    """
    tol = locclab.linalg._tol(tol)
    T = locclab.linalg.as_matrix(T, 'T')
    if len(grams) == 0:
        raise locclab.LoccException.StructureException("split_measurement needs at least one Gram matrix")
    gram_T = locclab.linalg.dagger(T).dot(T)
    total = sum(locclab.linalg.as_matrix(g, 'gram') for g in grams)
    scale = max(1.0, _max_abs(gram_T))
    mismatch = _max_abs(total - gram_T)
    if mismatch > tol.eps_eq * 10 * scale:
        raise locclab.LoccException.LoccException("Gram matrices do not sum to T^dagger T (mismatch %.3g)" % (mismatch))

    Tplus = locclab.linalg.pinv(T, tol)
    ops = []
    for x, gram in enumerate(grams):
        if factors is not None:
            F = locclab.linalg.as_matrix(factors[x], 'factor')
            if _max_abs(locclab.linalg.dagger(F).dot(F) - gram) > tol.eps_eq * 10 * scale:
                raise locclab.LoccException.LoccException("Factor %d does not reproduce its Gram matrix" % (x))
        else:
            F = locclab.linalg.psd_sqrt(gram, tol)
        ops.append(F.dot(Tplus))

    dim_out = ops[0].shape[0]
    if any(op.shape[0] != dim_out for op in ops):
        raise locclab.LoccException.StructureException("Split operators must share one output dimension")
    return ops + locclab.linalg.complete_instrument(ops, T.shape[0], dim_out, tol)

class _Child(object):
    """
    One replacement for a node: Alice's operator at turn n-3, Bob's
    instrument after it and Alice's final instrument per Bob outcome.
    """
    def __init__(self, alice_op, bob_ops, finals, filler=None):
        self.alice_op = alice_op
        self.bob_ops = bob_ops
        self.finals = finals
        self.filler = set() if filler is None else set(filler)

class _Node(object):
    def __init__(self, q, history, A, B):
        n = q.depth()
        self.history = history
        self.A = A
        self.B = B
        self.parent = history[:-1]
        self.M_r = q.turns[n - 4].instruments[self.parent][history[-1]]
        self.K = q.turns[n - 3].instruments[history]
        self.M = [q.turns[n - 2].instruments[history + (s,)] for s in range(len(self.K))]
        self.K_last = {}
        for s in range(len(self.K)):
            for t in range(len(self.M[s])):
                self.K_last[(s, t)] = q.turns[n - 1].instruments[history + (s, t)]

def _collect_nodes(q):
    n = q.depth()
    nodes = {}
    for k, history, accA, accB in q.walk():
        if k == n - 3:
            nodes[history] = _Node(q, history, accA, accB)
    return nodes

def _merge_runs(p):
    changed = True
    while changed:
        changed = False
        for k in range(len(p.turns) - 1):
            if p.turns[k].party == p.turns[k + 1].party:
                p = locclab.Protocol.merge_adjacent_turns(p, k)
                changed = True
                break
    return p

def _frame(p):
    """
    Function to bring p into the reduction frame: uniform depth, alternating
    parties, Bob last.  Returns (q, mirrored).
    """
    q = _merge_runs(locclab.Protocol.pad_to_uniform_depth(p))
    if q.resource_dims != (2, 2):
        raise locclab.LoccException.StructureException("Reduction needs a two-qubit resource, saw dims %s" % (q.resource_dims,))
    if q.turns[-1].party == locclab.Protocol.ALICE:
        return q.mirror(), True
    return q, False

def _discard(dim):
    return locclab.linalg.complete_instrument([], dim, 2)

def _null_children(node):
    bob = _discard(node.B.shape[0])
    final = _discard(node.M_r.shape[0])
    return [_Child(node.M_r, bob, [final] * len(bob))]

def _rewrite_a(node, ws, tol):
    loose = _loose(tol)
    A = node.A
    dA = A.shape[0]
    dB = node.B.shape[0]
    Pi = locclab.linalg.range_projector(A, tol)
    norm = float(numpy.trace(locclab.linalg.dagger(A).dot(A)).real)

    bob_ops = []
    finals = []
    probs = []
    unitarity = 0.0
    sums = 0.0
    for s, K in enumerate(node.K):
        total = 0.0
        for t, M in enumerate(node.M[s]):
            MA = M.dot(A)
            prob = float(numpy.trace(locclab.linalg.dagger(MA).dot(MA)).real) / norm
            probs.append(prob)
            total += prob
            if prob <= NEGLIGIBLE:
                continue
            Y = M.dot(Pi) / numpy.sqrt(prob)
            unitarity = max(unitarity, _max_abs(Pi.dot(locclab.linalg.dagger(Y)).dot(Y).dot(Pi) - Pi))
            final = [Y] + locclab.linalg.complete_instrument([Y], dA, Y.shape[0], loose)
            for Kv in node.K_last[(s, t)]:
                bob_ops.append(numpy.sqrt(prob) * Kv.dot(K))
                finals.append(final)
        sums = max(sums, abs(total - 1))

    extra = locclab.linalg.complete_instrument(bob_ops, dB, bob_ops[0].shape[0], loose)
    finals.extend([_discard(dA)] * len(extra))
    ws.probabilities = probs
    ws.residuals['unitarity'] = unitarity
    ws.residuals['probability_sum'] = sums
    return [_Child(node.M_r, bob_ops + extra, finals)]

def _rewrite_b(node, ws, tol):
    loose = _loose(tol)
    B = node.B
    dB = B.shape[0]
    Pi = locclab.linalg.range_projector(B, tol)
    norm = float(numpy.trace(locclab.linalg.dagger(B).dot(B)).real)

    children = []
    probs = []
    unitarity = 0.0
    for s, K in enumerate(node.K):
        KB = K.dot(B)
        prob = float(numpy.trace(locclab.linalg.dagger(KB).dot(KB)).real) / norm
        probs.append(prob)
        if prob <= NEGLIGIBLE:
            continue
        W = K.dot(Pi) / numpy.sqrt(prob)
        unitarity = max(unitarity, _max_abs(Pi.dot(locclab.linalg.dagger(W)).dot(W).dot(Pi) - Pi))
        for t, M in enumerate(node.M[s]):
            bob = [Kv.dot(W) for Kv in node.K_last[(s, t)]]
            bob = bob + locclab.linalg.complete_instrument(bob, dB, bob[0].shape[0], loose)
            eye = numpy.eye(M.shape[0], dtype=complex)
            children.append(_Child(numpy.sqrt(prob) * M.dot(node.M_r), bob,
                                   [[eye] for v in bob], range(len(bob))))
    ws.probabilities = probs
    ws.residuals['unitarity'] = unitarity
    ws.residuals['probability_sum'] = abs(sum(probs) - 1)
    return children

def _first_branch_vectors(q, node, tol):
    R = q.resource_matrix()
    for history, accA, accB in q.leaves():
        if history[:len(node.history)] != node.history:
            continue
        if accA.shape[0] != 2 or accB.shape[0] != 2:
            continue
        if _node_weight(accA, accB, R) <= tol.eps_eq:
            continue
        a, b = locclab.Verifier.extract_block_vectors(accA, accB)
        return b[(0, 0)], b[(1, 1)]
    return None, None

def case_c_phase(A00, A11, R, b00, b11):
    """
    Function to return (lambda, e^{-i delta}) for a case-c node.  The ratio
    A11 A00^-1 has singular values sqrt(lambda) >= 1/sqrt(lambda); with Vh
    its right singular vectors and g_l = Vh A00 R b_ll*, delta is the phase
    of g_0[0] g_1[1] conj(g_0[1] g_1[0]).  The result does not depend on the
    phases of the singular vectors or of b00 and b11.
    """
    ratio = A11.dot(scipy.linalg.inv(A00))
    U, s, Vh = locclab.linalg.svd(ratio)
    g0 = Vh.dot(A00).dot(R).dot(numpy.conj(b00))
    g1 = Vh.dot(A00).dot(R).dot(numpy.conj(b11))
    z = g0[0] * g1[1] * numpy.conj(g0[1] * g1[0])
    if abs(z) == 0:
        raise locclab.LoccException.InvariantViolation("Case-c branch vectors have a vanishing component")
    return float(s[0] ** 2), numpy.conj(z) / abs(z)

def _case_c_diagnostics(ws, blocks, R, theta, b00, b11):
    A0 = blocks.A00
    A1 = blocks.A11
    ratio = A1.dot(scipy.linalg.inv(A0))
    s = locclab.linalg.singular_values(ratio)
    ws.lam = float(s[0] ** 2)
    ws.residuals['lambda_det'] = float(abs(s[0] * s[1] - 1))
    if b00 is None:
        return
    S = numpy.column_stack([A0.dot(R).dot(numpy.conj(b00)), A0.dot(R).dot(numpy.conj(b11))])
    if locclab.linalg.rank_tol(S) < 2:
        return
    T = S.dot(numpy.diag([1, numpy.exp(1j * theta)])).dot(scipy.linalg.inv(S))
    A0inv = scipy.linalg.inv(A0)
    ws.S = S
    ws.T = T
    ws.residuals['intertwining'] = _max_abs(locclab.linalg.dagger(T).dot(T) - A0inv.dot(A1).dot(A1).dot(A0inv))
    # delta is undetermined at lambda = 1
    if abs(ws.lam - 1) > LAMBDA_ONE:
        lam, phase = case_c_phase(A0, A1, R, b00, b11)
        ws.delta = float(-numpy.angle(phase))
        ws.residuals['lambda_delta'] = float(abs(phase - lambda_delta_phase(lam, theta)))

def _rewrite_c(q, node, ws, theta, tol):
    loose = _loose(tol)
    blocks = ws.blocks
    R = q.resource_matrix()
    A0, A1 = blocks.A00, blocks.A11
    B0, B1 = blocks.B00, blocks.B11
    Adiag = scipy.linalg.block_diag(A0, A1)
    Bdiag = scipy.linalg.block_diag(B0, B1)
    ws.U_A = locclab.linalg.intertwining_isometry(Adiag, node.A, tol)
    ws.U_B = locclab.linalg.intertwining_isometry(Bdiag, node.B, tol)
    ws.residuals['gram_offdiag'] = blocks.off_diagonal

    B0inv = scipy.linalg.inv(B0)
    tau = B1.dot(B0inv)
    P = locclab.linalg.hermitian_part(locclab.linalg.dagger(tau).dot(tau))
    m_vals, W = scipy.linalg.eigh(P)
    m = float(m_vals[0])
    ws.mu = m
    ws.residuals['det'] = float(abs(m_vals[0] * m_vals[1] - 1))

    Ht = []
    for A in [A0, A1]:
        G = R.T.dot(numpy.conj(A)).dot(numpy.conj(A)).dot(numpy.conj(R))
        Ht.append(locclab.linalg.dagger(W).dot(B0).dot(G).dot(B0).dot(W))
    ws.E00 = locclab.linalg.dagger(W).dot(B0).dot(R.T).dot(numpy.conj(A0))

    S = float(Ht[0][0, 0].real)
    c = Ht[0][1, 0] / numpy.sqrt(m)
    z = mu_delta_prime(m, theta)
    dpsi = float(numpy.angle(z))
    ws.delta_prime = -dpsi
    D = numpy.diag([1, z])
    ws.residuals['diagonal_ratio'] = float(abs(Ht[0][1, 1] - m * S))
    ws.residuals['relation'] = _max_abs(Ht[1] - D.dot(Ht[0]).dot(locclab.linalg.dagger(D)))
    ws.residuals['delta_prime'] = float(abs(m + z - numpy.exp(1j * theta) * (1 + m * z)))

    spread = numpy.arccos(numpy.clip(abs(c) / S, -1.0, 1.0))
    psi = [float(numpy.angle(c) + spread), float(numpy.angle(c) - spread)]
    ws.phases = psi
    amp = numpy.sqrt(S / 2)
    sqm = numpy.sqrt(m)

    alice_factors = []
    bob_instruments = []
    corrections = []
    kappas = []
    unitarity = 0.0
    for x in range(2):
        y0 = W.dot(amp * numpy.array([1, sqm * numpy.exp(1j * psi[x])]))
        y1 = W.dot(amp * numpy.array([1, sqm * numpy.exp(1j * (psi[x] + dpsi))]))
        xi = psi[x] + dpsi / 2
        w0 = [W.dot(numpy.array([1, (-1) ** r * numpy.exp(1j * xi)]) / numpy.sqrt(2)) for r in range(2)]

        kappa = [[numpy.vdot(w0[r], y0), numpy.vdot(w0[r], y1)] for r in range(2)]
        deltas = [numpy.angle(k[0]) - numpy.angle(k[1]) for k in kappa]
        # rephase the |1> branch so that Bob's outcome 0 needs no correction
        y1 = y1 * numpy.exp(1j * deltas[0])
        kappas.append([k[0] for k in kappa])
        corrections.append(deltas[1] - deltas[0])

        v = [B0inv.dot(y0), B0inv.dot(y1)]
        V = numpy.column_stack(v)
        Y = V.dot(numpy.diag([1, numpy.exp(1j * theta)])).dot(scipy.linalg.inv(V))
        u = B0.dot(Y).dot(scipy.linalg.inv(B1))
        unitarity = max(unitarity, _max_abs(locclab.linalg.dagger(u).dot(u) - numpy.eye(2)))
        w1 = [locclab.linalg.dagger(u).dot(w) for w in w0]

        N = numpy.zeros((2, 4), dtype=complex)
        for i, A in enumerate([A0, A1]):
            ebar = scipy.linalg.inv(numpy.conj(A)).dot(scipy.linalg.inv(R.T)).dot(v[i])
            N[i, 2 * i:2 * i + 2] = ebar
        alice_factors.append(N.dot(Adiag))

        bob_factors = []
        for r in range(2):
            F = numpy.zeros((2, 4), dtype=complex)
            F[0, 0:2] = numpy.conj(w0[r]).dot(B0)
            F[1, 2:4] = numpy.conj(w1[r]).dot(B1)
            bob_factors.append(F)
        grams = [locclab.linalg.dagger(F).dot(F) for F in bob_factors]
        bob_instruments.append(split_measurement(node.B, grams, bob_factors, loose))

    ws.kappa = kappas
    ws.residuals['unitarity'] = unitarity
    ws.eigenvalues = simultaneous_eigenvalues(blocks, R)

    grams = [locclab.linalg.dagger(F).dot(F) for F in alice_factors]
    alice_ops = split_measurement(node.A, grams, alice_factors, loose)

    eye = numpy.eye(2, dtype=complex)
    children = []
    for x in range(2):
        bob = bob_instruments[x]
        finals = [[eye], [numpy.diag([1, numpy.exp(1j * corrections[x])])]]
        finals.extend([[eye]] * (len(bob) - 2))
        children.append(_Child(alice_ops[x].dot(node.M_r), bob, finals,
                               [0] + list(range(2, len(bob)))))
    discard = _discard(node.B.shape[0])
    for C in alice_ops[2:]:
        children.append(_Child(C.dot(node.M_r), discard, [[eye]] * len(discard),
                               range(len(discard))))

    b00, b11 = _first_branch_vectors(q, node, tol)
    _case_c_diagnostics(ws, blocks, R, theta, b00, b11)
    log.debug("case c at history %s: mu %.12g, lambda %.12g, delta' %.12g" % (list(node.history), m, ws.lam, ws.delta_prime))
    return children

def _assemble(q, children):
    n = q.depth()
    first = q.turns[n - 4]
    alice = {}
    bob = {}
    final = {}
    final_filler = set()
    for g in sorted(first.instruments.keys()):
        ops = []
        for r in range(len(first.instruments[g])):
            for child in children[g + (r,)]:
                h = g + (len(ops),)
                ops.append(child.alice_op)
                bob[h] = child.bob_ops
                for v, inst in enumerate(child.finals):
                    final[h + (v,)] = inst
                    if v in child.filler:
                        final_filler.add(h + (v,))
        alice[g] = ops

    turns = list(q.turns[:n - 4])
    turns.append(locclab.Protocol.Turn(first.party, alice))
    turns.append(locclab.Protocol.Turn(locclab.Protocol.other_party(first.party), bob))
    turns.append(locclab.Protocol.Turn(first.party, final, final_filler))
    return locclab.Protocol.LoccProtocol(turns, q.resource)

def compute_block_elements(p, tol=None, history=None):
    """
    Function to compute the block elements of a protocol at the node reached
    after turn n-3, in the frame where Bob owns the last turn.  By default
    the first node carrying weight is used; history selects another one.
    """
    tol = locclab.linalg._tol(tol)
    q, mirrored = _frame(p)
    if q.depth() < 3:
        raise locclab.LoccException.StructureException("Block elements need at least three turns, saw %d" % (q.depth()))
    R = q.resource_matrix()
    n = q.depth()
    for k, h, accA, accB in q.walk():
        if k != n - 3:
            continue
        if history is not None and tuple(history) != h:
            continue
        if history is None and _node_weight(accA, accB, R) <= tol.eps_eq:
            continue
        return BlockElements(accA, accB, tol, h)
    raise locclab.LoccException.StructureException("No node at history %s" % (history,))

def reduce_step(p, target, tol=None, expect=None):
    """
    Function to remove one turn from a protocol of at least four turns by
    rewriting every node after turn n-3.  Nodes may fall into different
    cases.  With expect set to 'a', 'b' or 'c' every node carrying weight
    must be of that case.  Returns (protocol, record) where record holds the
    per-node workspaces.
    """
    tol = locclab.linalg._tol(tol)
    q, mirrored = _frame(p)
    n = q.depth()
    if n < 4:
        raise locclab.LoccException.StructureException("A reduction step needs at least four turns, saw %d" % (n))

    R = q.resource_matrix()
    workspaces = []
    children = {}
    for h, node in sorted(_collect_nodes(q).items()):
        if _node_weight(node.A, node.B, R) <= tol.eps_eq:
            ws = ReductionWorkspace(h, 'null')
            children[h] = _null_children(node)
            workspaces.append(ws)
            continue

        blocks = BlockElements(node.A, node.B, tol, h)
        case = classify_case(blocks, tol)
        if expect is not None and case != expect:
            raise locclab.LoccException.LoccException("Node at history %s is of case %s, not %s" % (list(h), case, expect))
        ws = ReductionWorkspace(h, case, blocks)
        if case == 'a':
            children[h] = _rewrite_a(node, ws, tol)
        elif case == 'b':
            children[h] = _rewrite_b(node, ws, tol)
        else:
            if target.degenerate:
                raise locclab.LoccException.LoccException("Case c needs a nonlocal gate, theta = %g" % (target.theta))
            children[h] = _rewrite_c(q, node, ws, target.theta, tol)
        workspaces.append(ws)

    result = _assemble(q, children)
    if mirrored:
        result = result.mirror()

    cases = sorted(set(ws.case for ws in workspaces if ws.case != 'null'))
    record = {'case': '+'.join(cases) if cases else 'null',
              'nodes': [ws.to_json() for ws in workspaces],
              'residuals': {}}
    for ws in workspaces:
        for key, value in ws.residuals.items():
            record['residuals'][key] = max(record['residuals'].get(key, 0.0), float(value))
        if ws.case == 'c' and 'mu' not in record:
            record['lambda'] = ws.lam
            record['mu'] = ws.mu
            record['delta_prime'] = ws.delta_prime
    log.info("Reduced %d turns to %d (case %s)" % (n, result.depth(), record['case']))
    return result, record

def reduce_case_a(p, target, tol=None):
    return reduce_step(p, target, tol, 'a')[0]

def reduce_case_b(p, target, tol=None):
    return reduce_step(p, target, tol, 'b')[0]

def reduce_case_c(p, target, tol=None):
    return reduce_step(p, target, tol, 'c')[0]

def _is_identity_turn(turn, tol):
    for ops in turn.instruments.values():
        if len(ops) != 1:
            return False
        op = ops[0]
        if op.shape[0] != op.shape[1] or not numpy.allclose(op, numpy.eye(op.shape[0]), rtol=0, atol=tol.eps_eq):
            return False
    return True

def _simplify_once(p, tol):
    """
    Function to apply the first applicable turn-saving rewrite that needs no
    block analysis.  Returns (protocol, action) or None.
    """
    n = p.depth()
    for k in range(n - 1):
        if p.turns[k].party == p.turns[k + 1].party:
            return locclab.Protocol.merge_adjacent_turns(p, k), "merge turns %d and %d" % (k + 1, k + 2)
    if _is_identity_turn(p.turns[-1], tol):
        return locclab.Protocol.LoccProtocol(p.turns[:-1], p.resource), "drop identity turn %d" % (n)
    for k in range(n - 2):
        if p.turns[k].single_outcome() and p.turns[k + 2].party == p.turns[k].party:
            swapped = locclab.Protocol.exchange_turns(p, k, tol)
            return locclab.Protocol.merge_adjacent_turns(swapped, k + 1), "absorb single-outcome turn %d" % (k + 1)
    return None

def simplify(p, tol=None):
    """
    Function to shorten a protocol without block analysis while it has more
    than three turns: adjacent turns of one party are merged, a trailing
    identity turn is dropped and single-outcome turns are moved past the
    next turn and merged.  Returns (protocol, actions).
    """
    tol = locclab.linalg._tol(tol)
    p = locclab.Protocol.pad_to_uniform_depth(p)
    actions = []
    while p.depth() > 3:
        step = _simplify_once(p, tol)
        if step is None:
            break
        p, action = step
        actions.append(action)
    return p, actions

def _gate(original, candidate, target, gate_tol, step):
    violations = locclab.Protocol.validate(candidate, gate_tol)
    if violations:
        raise locclab.LoccException.ReductionException("Step %d produced an invalid protocol: %s" % (step, violations[0]), step)
    report = locclab.Verifier.verify(candidate, target, gate_tol)
    if not report.passed:
        raise locclab.LoccException.ReductionException("Step %d fails verification: max deviation %.3g, probability sum %.15g" % (step, report.max_deviation, report.prob_sum), step)
    dist = locclab.Protocol.channel_distance(original, candidate)
    if dist > gate_tol.eps_eq:
        raise locclab.LoccException.ReductionException("Step %d changed the channel by %.3g" % (step, dist), step)
    return report

def reduce_to_three_turns(p, target, tol=None, budget=DEFAULT_BUDGET):
    """
    Function to transform a protocol that implements target into a
    three-turn protocol.  Each step removes one turn, either by a cheap
    simplification or by reduce_step, and must keep the protocol valid,
    verifying and channel-equivalent to the input within budget.  Returns
    (protocol, ReductionTrace).  A failing step raises ReductionException
    carrying its index.
    """
    tol = locclab.linalg._tol(tol)
    if target.degenerate:
        raise locclab.LoccException.LoccException("Cannot reduce a protocol for a local gate, theta = %g" % (target.theta))
    if not target.is_canonical(tol):
        raise locclab.LoccException.LoccException("Reduction works on the canonical gate diag(1, 1, 1, e^{i theta})")
    if p.resource_dims != (2, 2):
        raise locclab.LoccException.StructureException("Reduction needs a two-qubit resource, saw dims %s" % (p.resource_dims,))

    gate_tol = locclab.linalg.Tolerance(tol.eps_rank, budget)
    original = locclab.Protocol.pad_to_uniform_depth(p)
    report = locclab.Verifier.verify(original, target, gate_tol)
    if not report.passed:
        raise locclab.LoccException.ReductionException("Input protocol does not implement the target: max deviation %.3g" % (report.max_deviation), 0)

    trace = ReductionTrace()
    current = original
    step = 0
    while current.depth() > 3:
        step += 1
        simplified = _simplify_once(current, tol)
        if simplified is not None:
            candidate, action = simplified
            record = {'case': 'merge', 'action': action}
            log.info("Step %d: %s" % (step, action))
        else:
            candidate, record = reduce_step(current, target, tol)
        report = _gate(original, candidate, target, gate_tol, step)
        record.setdefault('residuals', {})
        record['residuals']['max_deviation'] = report.max_deviation
        trace.add(step, record)
        current = candidate
    return current, trace
