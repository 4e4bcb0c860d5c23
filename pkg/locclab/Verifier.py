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
Deterministic-implementation checks.  A protocol implements a target gate
when every branch maps each basis input |ij> to c * U|ij> (x) junk, with a
single input-independent coefficient per branch and branch probabilities
summing to one.
"""

import logging
import numpy

import locclab.LoccException
import locclab.linalg
import locclab.Protocol

log = logging.getLogger(__name__)

BASIS = [(0, 0), (0, 1), (1, 0), (1, 1)]

class BranchFit(object):
    """
    Class that holds the fit of one branch.  Objects of this type contain 5
    pieces of information:

    outcomes  - The outcome sequence of the branch.
    c         - The branch coefficient; complex when the branch leaves no
                junk, otherwise the norm of the junk amplitude vector.
    amplitude - The fitted junk amplitude vector.
    prob      - The branch probability |c|^2.
    deviation - The residual norm of the fit.
    """
    def __init__(self, outcomes, amplitude, deviation):
        self.outcomes = tuple(outcomes)
        self.amplitude = amplitude
        if len(amplitude) == 1:
            self.c = complex(amplitude[0])
        else:
            self.c = complex(numpy.linalg.norm(amplitude))
        self.prob = float(numpy.vdot(amplitude, amplitude).real)
        self.deviation = float(deviation)

    def to_json(self):
        return {'outcomes': list(self.outcomes),
                'c': [self.c.real, self.c.imag],
                'prob': self.prob,
                'deviation': self.deviation}

class VerificationReport(object):
    """
    Class that holds the result of verify().  Objects of this type contain
    the following pieces of information:

    passed        - True when max_deviation and |prob_sum - 1| are both
                    within eps_eq.
    branches      - The list of BranchFit, in branch enumeration order.
    prob_sum      - The sum of the branch probabilities.
    max_deviation - The largest branch deviation.
    block_vectors - Per branch, the (a, b) block vector dictionaries, or None
                    when the branch operators do not end on the input qubits.
    degenerate    - True when the target has theta = 0.
    theta         - The target's nonlocal parameter.
    target_matrix - The 4x4 gate the fit was made against.
    """
    def __init__(self, branches, block_vectors, target, tol):
        self.branches = branches
        self.block_vectors = block_vectors
        self.theta = target.theta
        self.degenerate = target.degenerate
        self.target_matrix = target.matrix()
        self.prob_sum = float(sum(b.prob for b in branches))
        self.max_deviation = max([b.deviation for b in branches] + [0.0])
        self.passed = (self.max_deviation <= tol.eps_eq and
                       abs(self.prob_sum - 1) <= tol.eps_eq)

    def to_json(self):
        return {'pass': bool(self.passed),
                'theta': self.theta,
                'degenerate': bool(self.degenerate),
                'prob_sum': self.prob_sum,
                'max_deviation': self.max_deviation,
                'branches': [b.to_json() for b in self.branches]}

def _inputs_to_vectors(inputs):
    vectors = []
    for inp in inputs:
        if isinstance(inp, tuple):
            v = numpy.zeros(4, dtype=complex)
            v[2 * inp[0] + inp[1]] = 1
        else:
            v = numpy.asarray(inp, dtype=complex).ravel()
            if v.shape != (4,):
                raise locclab.LoccException.StructureException("Input vectors must have 4 entries, saw %d" % (v.size))
            v = v / numpy.linalg.norm(v)
        vectors.append(v)
    return vectors

def superposition_inputs():
    """
    Function to return the four product inputs |+-> (x) |+->.
    """
    plus = numpy.array([1, 1]) / numpy.sqrt(2)
    minus = numpy.array([1, -1]) / numpy.sqrt(2)
    return [numpy.kron(x, y).astype(complex) for x in (plus, minus) for y in (plus, minus)]

def fit_kraus(K, U, inputs=None):
    """
    Function to fit the junk amplitude vector phi minimizing
    sum over inputs of || K psi - (U psi) (x) phi ||^2 for a branch with
    effective operator K of shape (4, J, 4).  Inputs are basis index pairs
    (i, j) or 4-vectors, all four basis inputs by default.  Returns the
    tuple (phi, deviation).
    """
    if inputs is None:
        inputs = BASIS
    vectors = _inputs_to_vectors(inputs)
    outputs = [numpy.einsum('oji,i->oj', K, v) for v in vectors]
    images = [U.dot(v) for v in vectors]
    # images are unit vectors, so the least squares solution is the mean overlap
    phi = sum(numpy.conj(u).dot(o) for u, o in zip(images, outputs)) / len(vectors)
    residual = sum(numpy.linalg.norm(o - numpy.outer(u, phi)) ** 2 for u, o in zip(images, outputs))
    return phi, numpy.sqrt(residual)

def fit_branch(A, B, R, target_matrix, inputs=None):
    """
    Function to fit one branch from its accumulated operators.  See
    fit_kraus for the meaning of inputs.
    """
    K = locclab.Protocol.branch_kraus(locclab.linalg.as_matrix(A, 'A'),
                                      locclab.linalg.as_matrix(B, 'B'),
                                      locclab.linalg.as_matrix(R, 'resource'))
    return fit_kraus(K, numpy.asarray(target_matrix, dtype=complex), inputs)

def extract_block_vectors(A, B):
    """
    Function to split final accumulated operators into block vectors.  With
    A = sum_ki |k><i| (x) <a_ki|, the vector a_ki is the conjugate of the
    resource part of row k, column block i; likewise for B.  Returns the
    tuple (a, b) of dictionaries keyed by (k, i).
    """
    vectors = []
    for name, M in [('A', A), ('B', B)]:
        M = locclab.linalg.as_matrix(M, name)
        if M.shape[0] != 2 or M.shape[1] % 2 != 0:
            raise locclab.LoccException.StructureException("%s must map input (x) resource onto the input qubit, saw shape %s" % (name, M.shape))
        d = M.shape[1] // 2
        blocks = {}
        for k in range(2):
            for i in range(2):
                blocks[(k, i)] = numpy.conj(M[k, i * d:(i + 1) * d])
        vectors.append(blocks)
    return vectors[0], vectors[1]

def rebuild_from_block_vectors(a):
    """
    Function to rebuild sum_ki |k><i| (x) <a_ki| from block vectors.
    """
    d = len(a[(0, 0)])
    M = numpy.zeros((2, 2 * d), dtype=complex)
    for (k, i), vec in a.items():
        M[k, i * d:(i + 1) * d] = numpy.conj(vec)
    return M

def verify(p, target, tol=None, extended=False):
    """
    Function to decide whether protocol p deterministically implements the
    target gate with its attached resource.  Short branches are padded with
    identities first.  Returns a VerificationReport.
    """
    tol = locclab.linalg._tol(tol)
    p = locclab.Protocol.pad_to_uniform_depth(p)
    R = p.resource_matrix()
    U = target.matrix()
    inputs = BASIS
    if extended:
        inputs = BASIS + superposition_inputs()

    fits = []
    blocks = []
    for branch in locclab.Protocol.accumulated_operators(p):
        K = locclab.Protocol.branch_kraus(branch.accumulatedA, branch.accumulatedB, R)
        phi, dev = fit_kraus(K, U)
        if extended:
            ext_phi, ext_dev = fit_kraus(K, U, inputs)
            dev = max(dev, ext_dev)
        fits.append(BranchFit(branch.outcomes, phi, dev))
        if branch.accumulatedA.shape[0] == 2 and branch.accumulatedB.shape[0] == 2:
            blocks.append(extract_block_vectors(branch.accumulatedA, branch.accumulatedB))
        else:
            blocks.append(None)

    report = VerificationReport(fits, blocks, target, tol)
    log.debug("verify: %d branches, max deviation %.3g, prob_sum %.15g" % (len(fits), report.max_deviation, report.prob_sum))
    return report

def check_block_conditions(report, X, tol=None):
    """
    Function to check the block form of a passing report against the
    resource coefficient matrix X.  For every branch with non-negligible
    probability it checks that <a_ki|X|b*_lj> equals c * <kl|U|ij> for k = i,
    l = j and vanishes otherwise, that the off-diagonal block vectors vanish
    for a diagonal target, and that {a_00, a_11} and {b_00, b_11} are
    linearly independent unless theta is degenerate.  Returns a list of
    violation strings.
    """
    tol = locclab.linalg._tol(tol)
    X = locclab.linalg.as_matrix(X, 'X')
    U = report.target_matrix
    diagonal = numpy.allclose(U, numpy.diag(numpy.diag(U)), rtol=0, atol=tol.eps_eq)
    violations = []
    for fit, blocks in zip(report.branches, report.block_vectors):
        if fit.prob <= tol.eps_eq:
            continue
        label = list(fit.outcomes)
        if blocks is None:
            violations.append("branch %s: operators do not end on the input qubits" % (label))
            continue
        a, b = blocks
        for k, i in BASIS:
            for l, j in BASIS:
                value = numpy.conj(a[(k, i)]).dot(X).dot(numpy.conj(b[(l, j)]))
                expected = fit.c * U[2 * k + l, 2 * i + j]
                if abs(value - expected) > tol.eps_eq * 10:
                    violations.append("branch %s: <a_%d%d|X|b*_%d%d> = %.6g%+.6gj, expected %.6g%+.6gj" % (label, k, i, l, j, value.real, value.imag, expected.real, expected.imag))

        if diagonal:
            for name, vecs in [('a', a), ('b', b)]:
                for key in [(0, 1), (1, 0)]:
                    if numpy.linalg.norm(vecs[key]) > tol.eps_eq * 10:
                        violations.append("branch %s: %s_%d%d is not zero" % (label, name, key[0], key[1]))

        if report.degenerate:
            continue
        for name, vecs in [('a', a), ('b', b)]:
            pair = numpy.column_stack([vecs[(0, 0)], vecs[(1, 1)]])
            if locclab.linalg.rank_tol(pair, tol) < 2:
                violations.append("branch %s: %s_00 and %s_11 are linearly dependent" % (label, name, name))
    return violations

def min_turns_check(p, target, tol=None):
    """
    Function to assert that a passing protocol for a nonlocal gate has at
    least three turns once adjacent turns of the same party are merged.
    Returns the VerificationReport.
    """
    report = verify(p, target, tol)
    if report.passed and not target.degenerate and p.normalized_turn_count() < 3:
        raise locclab.LoccException.InvariantViolation("Protocol with %d effective turns implements a nonlocal gate" % (p.normalized_turn_count()))
    return report
