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
Numerical search for three-turn protocols over resources of Schmidt rank 2
or 3.

The ansatz fixes the shape Alice-Bob-Alice.  Alice applies a unitary on her
(input, resource) register and measures the resource in the computational
basis; Bob does the same with a unitary chosen by Alice's outcome; Alice
finishes with a correction chosen by both outcomes.  Every parameter vector
therefore gives a complete protocol.
"""

import csv
import logging
import numpy
import scipy.optimize

import locclab.LoccException
import locclab.linalg
import locclab.States
import locclab.Protocol
import locclab.Verifier
import locclab.Reference

log = logging.getLogger(__name__)

VERIFY_EPS = 1e-6
# rank-3 searches count as a sub-ebit success below these values
SUCCESS_INFIDELITY = 1e-4
SUCCESS_ENTROPY = 0.999
# rank-2 results below this entropy would contradict the one-ebit bound
RANK2_ENTROPY_FLOOR = 1 - 1e-3
# default entropy cap of rank-3 searches
SUB_EBIT_CAP = 0.99

def _embed(M, d):
    """
    Function to extend a 2x2 resource operator to d levels, acting as the
    identity on levels 2 and up.
    """
    out = numpy.eye(d, dtype=complex)
    out[:2, :2] = M
    return out

def _coefficients_from_angles(angles):
    """
    Function to map d-1 hyperspherical angles to d Schmidt coefficients of
    unit norm.
    """
    coeffs = []
    running = 1.0
    for t in angles:
        coeffs.append(running * numpy.cos(t))
        running *= numpy.sin(t)
    coeffs.append(running)
    return numpy.array(coeffs)

def _angles_from_coefficients(coeffs):
    angles = []
    for k in range(len(coeffs) - 1):
        rest = numpy.linalg.norm(coeffs[k + 1:])
        angles.append(numpy.arctan2(rest, coeffs[k]))
    return numpy.array(angles)

def project_to_entropy(coeffs, cap):
    """
    Function to move Schmidt coefficients toward the largest one until their
    entropy is at most cap.  The squared coefficients are mixed with the unit
    vector on the largest entry and the mixing weight is found with brentq.
    Coefficients already within the cap are returned unchanged.
    """
    coeffs = numpy.asarray(coeffs, dtype=float)
    if locclab.States.entropy_of_coefficients(coeffs) <= cap:
        return coeffs
    probs = coeffs ** 2 / numpy.sum(coeffs ** 2)
    peak = numpy.zeros(len(probs))
    peak[numpy.argmax(probs)] = 1.0

    def excess(t):
        return locclab.States.entropy_of_coefficients(numpy.sqrt((1 - t) * probs + t * peak)) - cap

    t = scipy.optimize.brentq(excess, 0.0, 1.0, xtol=1e-15)
    signs = numpy.where(coeffs < 0, -1.0, 1.0)
    return signs * numpy.sqrt((1 - t) * probs + t * peak)

class ProtocolAnsatz(object):
    """
    Class that maps real parameter vectors to three-turn protocols.  Objects
    of this type contain 3 pieces of information:

    rank    - The Schmidt rank of the resource, 2 or 3.  Both resource
              registers have this dimension.
    cap     - An optional entropy cap applied to the resource coefficients.
    layout  - A list of (name, start, stop) slices of the parameter vector:
              the rank-1 resource angles, Alice's first unitary, Bob's
              unitaries for each of Alice's outcomes and Alice's corrections
              for each pair of outcomes.
    """
    def __init__(self, rank, cap=None):
        if rank not in (2, 3):
            raise locclab.LoccException.StructureException("Search supports resource ranks 2 and 3, saw %s" % (rank))
        self.rank = rank
        self.cap = cap
        d = rank
        D = 2 * d
        self.layout = []
        start = 0
        for name, size in ([('resource', d - 1), ('alice', D * D)] +
                           [('bob%d' % m, D * D) for m in range(d)] +
                           [('final%d%d' % (m, n), 4) for m in range(d) for n in range(d)]):
            self.layout.append((name, start, start + size))
            start += size
        self.num_params = start
        self._slices = dict((name, slice(a, b)) for name, a, b in self.layout)

    def _check(self, params):
        params = numpy.asarray(params, dtype=float)
        if params.shape != (self.num_params,):
            raise locclab.LoccException.StructureException("Rank-%d ansatz takes %d parameters, saw %d" % (self.rank, self.num_params, params.size))
        return params

    def coefficients(self, params):
        coeffs = _coefficients_from_angles(self._check(params)[self._slices['resource']])
        if self.cap is not None:
            coeffs = project_to_entropy(coeffs, self.cap)
        return coeffs

    def operators(self, params):
        """
        Method to build the instrument operators.  Returns (alice, bob,
        final) with alice[m], bob[m][n] and final[m][n].
        """
        params = self._check(params)
        d = self.rank
        D = 2 * d
        U1 = locclab.linalg.unitary_from_params(params[self._slices['alice']], D)
        alice = [U1.reshape(2, d, D)[:, m, :] for m in range(d)]
        bob = []
        final = []
        for m in range(d):
            V = locclab.linalg.unitary_from_params(params[self._slices['bob%d' % m]], D)
            bob.append([V.reshape(2, d, D)[:, n, :] for n in range(d)])
            final.append([locclab.linalg.unitary_from_params(params[self._slices['final%d%d' % (m, n)]], 2)
                          for n in range(d)])
        return alice, bob, final

    def resource(self, params):
        coeffs = self.coefficients(params)
        return locclab.States.PureState(numpy.diag(coeffs).astype(complex).ravel(),
                                        (self.rank, self.rank))

    def protocol(self, params):
        """
        Method to build the LoccProtocol for a parameter vector.
        """
        alice, bob, final = self.operators(params)
        d = self.rank
        turns = [locclab.Protocol.Turn(locclab.Protocol.ALICE, {(): alice}),
                 locclab.Protocol.Turn(locclab.Protocol.BOB,
                                       dict(((m,), bob[m]) for m in range(d))),
                 locclab.Protocol.Turn(locclab.Protocol.ALICE,
                                       dict(((m, n), [final[m][n]]) for m in range(d) for n in range(d)))]
        return locclab.Protocol.LoccProtocol(turns, self.resource(params))

    def kraus(self, params):
        """
        Method to return the branch Kraus operators without building the
        protocol object.
        """
        alice, bob, final = self.operators(params)
        R = numpy.diag(self.coefficients(params)).astype(complex)
        out = []
        for m in range(self.rank):
            for n in range(self.rank):
                out.append(locclab.Protocol.branch_kraus(final[m][n].dot(alice[m]), bob[m][n], R))
        return out

    def reference_params(self, theta):
        """
        Method to return parameters that reproduce the teleportation
        protocol for the canonical gate, using the first two resource
        levels.
        """
        d = self.rank
        D = 2 * d
        hadamard = numpy.array([[1, 1], [1, -1]], dtype=complex) / numpy.sqrt(2)
        P0 = _embed(numpy.diag([1, 0]), d)
        P1 = numpy.eye(d, dtype=complex) - P0
        u = numpy.diag([1, numpy.exp(1j * theta)])

        cnot = numpy.zeros((D, D), dtype=complex)
        for i in range(2):
            for m in range(d):
                target = m ^ i if m < 2 else m
                cnot[i * d + target, i * d + m] = 1
        controlled = numpy.kron(numpy.eye(2), P0) + numpy.kron(u, P1)

        params = numpy.zeros(self.num_params)
        angles = [numpy.pi / 4] + [0.0] * (d - 2)
        params[self._slices['resource']] = angles
        params[self._slices['alice']] = locclab.linalg.params_from_unitary(cnot)
        for m in range(d):
            if m < 2:
                flip = _embed(numpy.linalg.matrix_power(locclab.Reference.PAULI_X, m), d)
                V = numpy.kron(numpy.eye(2), _embed(hadamard, d)).dot(controlled).dot(numpy.kron(numpy.eye(2), flip))
                params[self._slices['bob%d' % m]] = locclab.linalg.params_from_unitary(V)
            for n in range(min(d, 2)):
                Z = numpy.linalg.matrix_power(locclab.Reference.PAULI_Z, n)
                params[self._slices['final%d%d' % (m, n)]] = locclab.linalg.params_from_unitary(Z)
        return params

def process_fidelity(kraus, U):
    """
    Function to compute the process fidelity between a channel given by
    branch Kraus operators and conjugation by U: the overlap of the two
    normalized Choi matrices, (1/16) sum_K |tr(U^dagger K)|^2.
    """
    total = 0.0
    Uc = numpy.conj(U)
    for K in kraus:
        total += float(numpy.sum(numpy.abs(numpy.einsum('oi,oji->j', Uc, K)) ** 2))
    return total / 16.0

def objective(params, theta, resource_rank=2, cap=None):
    """
    Function to return the infidelity 1 - F of the ansatz protocol with
    respect to the canonical gate for theta.
    """
    ansatz = ProtocolAnsatz(resource_rank, cap)
    U = locclab.States.ControlledUnitary.canonical(theta).matrix()
    return _infidelity(ansatz, U, params)

def _infidelity(ansatz, U, params):
    return max(0.0, 1.0 - process_fidelity(ansatz.kraus(params), U))

class SearchResult(object):
    """
    Class that holds the outcome of a search.  Objects of this type contain
    the following pieces of information:

    theta            - The target angle.
    rank             - The resource rank of the ansatz.
    best_params      - The best parameter vector found.
    infidelity       - Its infidelity.
    resource_entropy - The entropy of its resource, in ebits.
    verified         - Whether the realized protocol passes verify at 1e-6.
    trace            - One record per restart.
    """
    def __init__(self, theta, rank, best_params, infidelity, resource_entropy,
                 verified, trace, cap=None):
        self.theta = theta
        self.rank = rank
        self.best_params = best_params
        self.infidelity = infidelity
        self.resource_entropy = resource_entropy
        self.verified = verified
        self.trace = trace
        self.cap = cap

    def protocol(self):
        return ProtocolAnsatz(self.rank, self.cap).protocol(self.best_params)

    def sub_ebit(self):
        """
        Method to check the rank-3 success criterion: a verified protocol
        with infidelity below 1e-4 on less than 0.999 ebits.
        """
        return bool(self.verified and self.infidelity < SUCCESS_INFIDELITY and
                    self.resource_entropy < SUCCESS_ENTROPY)

    def to_json(self):
        return {'theta': self.theta,
                'rank': self.rank,
                'best_params': [float(x) for x in self.best_params],
                'infidelity': self.infidelity,
                'resource_entropy': self.resource_entropy,
                'verified': self.verified,
                'sub_ebit': self.sub_ebit(),
                'cap': self.cap,
                'trace': self.trace}

def start_point(ansatz, theta, r, seed=0, jitter=0.3, anchor=False):
    """
    Function to return the starting parameters of restart r.  Even restarts
    jitter the embedded teleportation protocol uniformly by +/- jitter, odd
    restarts draw every parameter uniformly from (-pi, pi).  Each restart
    seeds its own generator with (seed, r).  With anchor set, restart 0
    starts from the unjittered protocol.  Returns (x0, kind).
    """
    reference = ansatz.reference_params(theta)
    if anchor and r == 0:
        return reference, 'reference'
    rng = numpy.random.default_rng([seed, r])
    if r % 2 == 0:
        return reference + rng.uniform(-jitter, jitter, size=reference.shape), 'jittered'
    return rng.uniform(-numpy.pi, numpy.pi, size=reference.shape), 'random'

def _select(candidates, rank, by_entropy=True):
    """
    Function to pick the winner among (restart, x, infidelity, entropy)
    candidates.  For rank 3 the lowest entropy among candidates under the
    success infidelity wins; otherwise the lowest infidelity.  Ties go to
    the lowest restart.
    """
    if rank == 3 and by_entropy:
        accurate = [c for c in candidates if c[2] < SUCCESS_INFIDELITY]
        if accurate:
            return min(accurate, key=lambda c: (c[3], c[2], c[0]))
    return min(candidates, key=lambda c: (c[2], c[0]))

def _run_restart(ansatz, U, x0, budget):
    """
    Function to run Nelder-Mead on half the budget and polish its result
    with L-BFGS-B on what is left.  Returns (x, value, evaluations), never
    worse than the starting point.
    """
    def f(x):
        return _infidelity(ansatz, U, x)

    best_x, best_value = x0, f(x0)
    evaluations = 1
    if budget <= 0:
        return best_x, best_value, evaluations

    simplex = scipy.optimize.minimize(f, x0, method='Nelder-Mead',
                                      options={'maxfev': max(1, budget // 2),
                                               'xatol': 1e-10,
                                               'fatol': 1e-14})
    evaluations += int(simplex.nfev)
    if simplex.fun < best_value:
        best_x, best_value = simplex.x, float(simplex.fun)

    remaining = budget - evaluations
    if remaining > ansatz.num_params + 1:
        polish = scipy.optimize.minimize(f, best_x, method='L-BFGS-B',
                                         options={'maxfun': remaining,
                                                  'ftol': 1e-16,
                                                  'gtol': 1e-12})
        evaluations += int(polish.nfev)
        if polish.fun < best_value:
            best_x, best_value = polish.x, float(polish.fun)
    return best_x, best_value, evaluations

def _search(ansatz, theta, restarts, budget, seed, jitter, anchor=False,
            by_entropy=True):
    """
    Function to run the restarts for one ansatz.  A budget of 0 or less
    evaluates the start of restart 0 only.  Returns (best_x, best_value,
    trace).
    """
    U = locclab.States.ControlledUnitary.canonical(theta).matrix()
    if budget <= 0:
        restarts = 1
    candidates = []
    trace = []
    for r in range(max(1, restarts)):
        x0, kind = start_point(ansatz, theta, r, seed, jitter, anchor)
        start = _infidelity(ansatz, U, x0)
        x, value, evaluations = _run_restart(ansatz, U, x0, budget)
        entropy = locclab.States.entropy_of_coefficients(ansatz.coefficients(x))
        trace.append({'restart': r, 'start': kind, 'start_infidelity': start,
                      'infidelity': value, 'entropy': entropy,
                      'evaluations': evaluations})
        log.info("restart %d (%s): infidelity %.3g, entropy %.6f after %d evaluations" % (r, kind, value, entropy, evaluations))
        candidates.append((r, x, value, entropy))
    r, best_x, best_value, entropy = _select(candidates, ansatz.rank, by_entropy)
    return best_x, best_value, trace

def optimize(theta, resource_rank=2, restarts=8, budget=20000, seed=0,
             jitter=0.3, cap=None):
    """
    Function to search for a three-turn protocol implementing the canonical
    gate for theta over a resource of the given rank.  Each restart gets at
    most budget evaluations; a budget of 0 evaluates the first starting
    point only.  Rank-3 searches default to an entropy cap of SUB_EBIT_CAP
    so that no start sits on the one-ebit protocol.  The chosen result is
    verified independently.  Returns a SearchResult.
    """
    if resource_rank == 3 and cap is None:
        cap = SUB_EBIT_CAP
        log.debug("Rank-3 search uses the default entropy cap %.3f" % (cap))
    ansatz = ProtocolAnsatz(resource_rank, cap)
    best_x, best_value, trace = _search(ansatz, theta, restarts, budget, seed, jitter)

    target = locclab.States.ControlledUnitary.canonical(theta)
    protocol = ansatz.protocol(best_x)
    report = locclab.Verifier.verify(protocol, target,
                                     locclab.linalg.Tolerance(VERIFY_EPS, VERIFY_EPS))
    entropy = locclab.States.entropy_of_coefficients(ansatz.coefficients(best_x))
    result = SearchResult(theta, resource_rank, best_x, best_value, entropy,
                          bool(report.passed), trace, cap)

    if resource_rank == 2 and result.verified and entropy < RANK2_ENTROPY_FLOOR:
        log.warning("Verified rank-2 protocol uses only %.6f ebits; this contradicts the one-ebit bound and points at a tolerance problem" % (entropy))
    if resource_rank == 3 and not result.sub_ebit():
        log.warning("Rank-3 search did not meet the sub-ebit criterion: infidelity %.3g, entropy %.6f, verified %s" % (best_value, entropy, result.verified))
    return result

def entropy_frontier(theta, resource_rank, entropy_grid, budget=20000,
                     restarts=1, seed=0, jitter=0.3):
    """
    Function to find the best infidelity reachable under each entropy cap.
    Caps must lie in (0, log2 rank].  Rows are returned as (cap,
    infidelity) sorted by cap, with a running minimum applied so the curve
    never rises.
    """
    top = numpy.log2(resource_rank)
    caps = sorted(float(c) for c in entropy_grid)
    for cap in caps:
        if cap <= 0 or cap > top + 1e-12:
            raise locclab.LoccException.StructureException("Entropy cap %s is outside (0, %.6f]" % (cap, top))

    rows = []
    running = None
    for cap in caps:
        ansatz = ProtocolAnsatz(resource_rank, cap)
        best_x, value, trace = _search(ansatz, theta, restarts, budget, seed,
                                       jitter, anchor=True, by_entropy=False)
        if running is None or value < running:
            running = value
        log.info("cap %.6f: infidelity %.3g (reported %.3g)" % (cap, value, running))
        rows.append((cap, running))
    return rows

def write_frontier_csv(rows, stream):
    """
    Function to write frontier rows as CSV with the header
    entropy_cap,infidelity.
    """
    writer = csv.writer(stream)
    writer.writerow(['entropy_cap', 'infidelity'])
    for cap, value in rows:
        writer.writerow(['%.12g' % (cap), '%.12g' % (value)])
