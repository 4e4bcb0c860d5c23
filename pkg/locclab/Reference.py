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
Known-good constructions: the three-turn gate teleportation protocol for
controlled-unitary gates, the entangling power of a gate, and the
known-input convertibility test.
"""

import logging
import numpy
import scipy.optimize

import locclab.LoccException
import locclab.linalg
import locclab.States
import locclab.Protocol

log = logging.getLogger(__name__)

I2 = numpy.eye(2, dtype=complex)
PAULI_X = numpy.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Z = numpy.diag([1, -1]).astype(complex)
CNOT = numpy.array([[1, 0, 0, 0],
                    [0, 1, 0, 0],
                    [0, 0, 0, 1],
                    [0, 0, 1, 0]], dtype=complex)

def _ket(k):
    return numpy.eye(2, dtype=complex)[k]

def _x_basis_bra(b):
    return numpy.array([1, (-1) ** b], dtype=complex) / numpy.sqrt(2)

def eisert_operators(target):
    """
    Function to return the instrument operators of the teleportation
    protocol for a target gate, as the tuple (first, second, third):

    first  - Alice's two operators, indexed by her outcome a.
    second - Bob's two operators after outcome a, as second[a][b].
    third  - Alice's correction after outcomes (a, b), as third[a][b].
    """
    P0 = numpy.diag([1, 0]).astype(complex)
    P1 = numpy.diag([0, 1]).astype(complex)
    # Bob's register is (input, resource); the resource qubit is the control
    controlled_u = numpy.kron(I2, P0) + numpy.kron(target.u, P1)

    first = []
    for a in range(2):
        first.append(numpy.kron(I2, _ket(a)[None, :]).dot(CNOT).dot(numpy.kron(target.w1, I2)))

    second = []
    for a in range(2):
        flip = numpy.linalg.matrix_power(PAULI_X, a)
        ops = []
        for b in range(2):
            ops.append(numpy.kron(target.v2, _x_basis_bra(b)[None, :]).dot(controlled_u).dot(numpy.kron(target.w2, flip)))
        second.append(ops)

    third = [[target.v1.dot(numpy.linalg.matrix_power(PAULI_Z, b)) for b in range(2)] for a in range(2)]
    return first, second, third

def build_eisert(target, resource=None):
    """
    Function to build the three-turn protocol that implements a
    controlled-unitary gate with one maximally entangled pair.  Alice copies
    her input onto her resource qubit with a CNOT and measures it; Bob flips
    his resource qubit on a = 1, applies the controlled u from it onto his
    input and measures it in the X basis; Alice fixes the sign with Z on
    b = 1.  A different two-qubit resource can be attached for testing.
    """
    if resource is None:
        resource = locclab.States.resource_from_mu(0.5)
    if resource.dims != (2, 2):
        raise locclab.LoccException.StructureException("The teleportation protocol needs a two-qubit resource, saw dims %s" % (resource.dims,))

    first, second, third = eisert_operators(target)
    turns = [locclab.Protocol.Turn(locclab.Protocol.ALICE, {(): first}),
             locclab.Protocol.Turn(locclab.Protocol.BOB,
                                   dict(((a,), second[a]) for a in range(2))),
             locclab.Protocol.Turn(locclab.Protocol.ALICE,
                                   dict(((a, b), [third[a][b]]) for a in range(2) for b in range(2)))]
    return locclab.Protocol.LoccProtocol(turns, resource)

def product_input(angles):
    """
    Function to map four angles (a, b, c, d) to the product state
    (cos a, e^{ib} sin a) (x) (cos c, e^{id} sin c).
    """
    a, b, c, d = angles
    alpha = numpy.array([numpy.cos(a), numpy.exp(1j * b) * numpy.sin(a)])
    beta = numpy.array([numpy.cos(c), numpy.exp(1j * d) * numpy.sin(c)])
    return numpy.kron(alpha, beta)

def output_entropy(U, angles):
    """
    Function to compute the entanglement entropy of U applied to the product
    input described by angles.
    """
    out = locclab.States.PureState(U.dot(product_input(angles)), (2, 2))
    return locclab.States.entanglement_entropy(out)

class EntanglingPowerResult(object):
    """
    Class that holds the result of entangling_power().  Objects of this type
    contain 3 pieces of information:

    value       - The largest output entropy found, in ebits.
    angles      - The four input angles that reach it.
    evaluations - The number of objective evaluations spent.
    """
    def __init__(self, value, angles, evaluations):
        self.value = value
        self.angles = angles
        self.evaluations = evaluations

    def to_json(self):
        return {'entangling_power': self.value,
                'angles': [float(x) for x in self.angles],
                'evaluations': self.evaluations}

def entangling_power(target, budget=10000, starts=16, seed=0):
    """
    Function to find the entangling power of a gate: the largest entropy it
    creates from a product input.  The four input angles are optimized with
    Nelder-Mead from `starts` seeded random points, sharing `budget`
    evaluations.  Ties go to the lowest start index.
    """
    U = target.matrix()
    rng = numpy.random.default_rng(seed)
    per_start = max(1, budget // starts)
    best = None
    evaluations = 0
    for start in range(starts):
        x0 = rng.uniform(0, numpy.pi, size=4)
        res = scipy.optimize.minimize(lambda x: -output_entropy(U, x), x0,
                                      method='Nelder-Mead',
                                      options={'maxfev': per_start,
                                               'xatol': 1e-10,
                                               'fatol': 1e-14})
        evaluations += res.nfev
        value = -res.fun
        log.debug("entangling power start %d: %.12g after %d evaluations" % (start, value, res.nfev))
        if best is None or value > best[0]:
            best = (value, res.x)

    value = float(min(1.0, max(0.0, best[0])))
    return EntanglingPowerResult(value, best[1], evaluations)

class ConvertibilityQuery(object):
    """
    Class that represents a known-input question: can the resource be
    consumed to turn the product input into the gate's output by LOCC?
    Objects of this type contain 3 pieces of information:

    input       - The product PureState on the two input qubits.
    target_gate - The ControlledUnitary.
    resource    - The ResourceState.
    """
    def __init__(self, input_state, target_gate, resource, tol=None):
        tol = locclab.linalg._tol(tol)
        if input_state.dims != (2, 2):
            raise locclab.LoccException.StructureException("Input must be a two-qubit state, saw dims %s" % (input_state.dims,))
        if locclab.linalg.rank_tol(input_state.coefficient_matrix(), tol) != 1:
            raise locclab.LoccException.LoccException("Input state is not a product state")
        if isinstance(resource, locclab.States.PureState):
            resource = locclab.States.canonical_resource(resource, tol)
        self.input = input_state
        self.target_gate = target_gate
        self.resource = resource
        self.tol = tol

    @classmethod
    def from_json(cls, obj, tol=None):
        """
        Method to parse a query object with 'input' (a state), 'gate' and
        'resource' (a state or {"mu": value}).
        """
        for key in ['input', 'gate', 'resource']:
            if key not in obj:
                raise locclab.LoccException.StructureException("Query object needs '%s'" % (key))
        res = obj['resource']
        if isinstance(res, dict) and 'mu' in res:
            resource = locclab.States.resource_from_mu(float(res['mu']))
        else:
            resource = locclab.States.PureState.from_json(res, tol)
        return cls(locclab.States.PureState.from_json(obj['input'], tol),
                   locclab.States.ControlledUnitary.from_json(obj['gate'], tol),
                   resource, tol)

def known_input_feasible(q):
    """
    Function to decide the known-input question by majorization: for two
    qubits the resource converts into the output state exactly when the
    resource's larger squared Schmidt coefficient does not exceed the
    output's.  Returns a dictionary with 'feasible', 'required_entropy' and
    the 'comparison' record.
    """
    out = locclab.States.PureState(q.target_gate.matrix().dot(q.input.amplitudes), (2, 2))
    target_coeffs, basisA, basisB = locclab.States.schmidt_decompose(out)
    target_sq = numpy.abs(target_coeffs) ** 2
    resource_sq = numpy.array([q.resource.mu, 1 - q.resource.mu])

    feasible = bool(resource_sq[0] <= target_sq[0] + q.tol.eps_eq)
    comparison = {'resource_squared_coefficients': [float(x) for x in resource_sq],
                  'target_squared_coefficients': [float(x) for x in target_sq],
                  'resource_partial_sums': [float(x) for x in numpy.cumsum(resource_sq)],
                  'target_partial_sums': [float(x) for x in numpy.cumsum(target_sq)]}
    return {'feasible': feasible,
            'required_entropy': locclab.States.entropy_of_coefficients(target_coeffs),
            'resource_entropy': q.resource.entropy(),
            'comparison': comparison}
