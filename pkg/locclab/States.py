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
Pure bipartite states, Schmidt analysis and entanglement measures, plus
the canonical forms of resource states and controlled-unitary gates.

A resource in canonical form is (X (x) I)|Phi+> with the unnormalized
|Phi+> = |00> + |11> and the Choi matrix X = diag(sqrt(mu), sqrt(1 - mu)),
mu >= 1/2.  A controlled-unitary gate in canonical form is
U_theta = diag(1, 1, 1, e^{i theta}).
"""

import logging
import numpy
import scipy.linalg
import scipy.stats

import locclab.LoccException
import locclab.linalg

log = logging.getLogger(__name__)

# normalization slack accepted from files written with limited precision
FILE_NORM_SLACK = 1e-6

class PureState(object):
    """
    Class that represents a pure state of two parties.  Objects of this type
    contain 2 pieces of information:

    amplitudes - The complex amplitude vector, Alice's index major.
    dims       - The pair (dA, dB) of local dimensions.
    """
    def __init__(self, amplitudes, dims, tol=None):
        tol = locclab.linalg._tol(tol)
        try:
            self.dims = (int(dims[0]), int(dims[1]))
        except (TypeError, ValueError, IndexError):
            raise locclab.LoccException.StructureException("State dims must be a pair of integers, saw %s" % (dims,))
        if self.dims[0] < 1 or self.dims[1] < 1:
            raise locclab.LoccException.StructureException("State dims must be positive, saw %s" % (self.dims,))

        self.amplitudes = numpy.asarray(amplitudes, dtype=complex).ravel()
        if len(self.amplitudes) != self.dims[0] * self.dims[1]:
            raise locclab.LoccException.StructureException("State with dims %s needs %d amplitudes, saw %d" % (self.dims, self.dims[0] * self.dims[1], len(self.amplitudes)))
        if not numpy.all(numpy.isfinite(self.amplitudes)):
            raise locclab.LoccException.LoccException("State has non-finite amplitudes")

        norm = numpy.linalg.norm(self.amplitudes)
        if abs(norm - 1) > tol.eps_eq:
            raise locclab.LoccException.LoccException("State is not normalized, norm is %.12g" % (norm))

    def coefficient_matrix(self):
        """
        Method to return the amplitudes as a dA x dB matrix C, so that the
        state is sum_ab C[a, b] |a>|b>.
        """
        return self.amplitudes.reshape(self.dims)

    def density(self):
        return numpy.outer(self.amplitudes, numpy.conj(self.amplitudes))

    def to_json(self):
        return {'dims': list(self.dims),
                'amplitudes': locclab.linalg.vector_to_json(self.amplitudes)}

    @classmethod
    def from_json(cls, obj, tol=None):
        """
        Method to build a PureState from its JSON object.  Amplitudes written
        with limited precision are renormalized when they are within
        FILE_NORM_SLACK of unit norm; amplitudes normalized within eps_eq
        are kept exactly.
        """
        if not isinstance(obj, dict) or 'dims' not in obj or 'amplitudes' not in obj:
            raise locclab.LoccException.StructureException("State object needs 'dims' and 'amplitudes'")
        amps = locclab.linalg.vector_from_json(obj['amplitudes'], 'amplitudes')
        norm = numpy.linalg.norm(amps)
        if locclab.linalg._tol(tol).eps_eq < abs(norm - 1) <= FILE_NORM_SLACK:
            amps = amps / norm
        return cls(amps, obj['dims'], tol)

    def __repr__(self):
        return "PureState(dims=%s)" % (self.dims,)

def product_state(alpha, beta):
    """
    Function to build the product state |alpha>|beta>.
    """
    alpha = numpy.asarray(alpha, dtype=complex)
    beta = numpy.asarray(beta, dtype=complex)
    return PureState(numpy.kron(alpha / numpy.linalg.norm(alpha),
                                beta / numpy.linalg.norm(beta)),
                     (len(alpha), len(beta)))

def schmidt_decompose(psi):
    """
    Function to compute the Schmidt decomposition of a pure state.  Returns a
    tuple (coeffs, basisA, basisB) where coeffs is descending and the k-th
    columns of basisA and basisB are the k-th Schmidt vectors, so that
    psi = sum_k coeffs[k] |a_k>|b_k>.
    """
    U, s, Vdag = locclab.linalg.svd(psi.coefficient_matrix())
    # C = sum_k s_k u_k (row k of Vdag), so the Bob vectors are the rows of Vdag
    return s, U, locclab.linalg.transpose(Vdag)

def schmidt_number(psi, tol=None):
    """
    Function to return the Schmidt number of a pure state.
    """
    return locclab.linalg.rank_tol(psi.coefficient_matrix(), tol)

def entropy_of_coefficients(coeffs):
    """
    Function to compute the entanglement entropy in ebits from Schmidt
    coefficients (not their squares).
    """
    probs = numpy.abs(numpy.asarray(coeffs, dtype=float)) ** 2
    if numpy.sum(probs) == 0:
        return 0.0
    return float(scipy.stats.entropy(probs, base=2))

def entanglement_entropy(psi):
    """
    Function to compute the entanglement entropy of a pure state in ebits.
    """
    coeffs, basisA, basisB = schmidt_decompose(psi)
    return entropy_of_coefficients(coeffs)

def choi_matrix(mu):
    """
    Function to return X = diag(sqrt(mu), sqrt(1 - mu)).
    """
    return numpy.diag([numpy.sqrt(mu), numpy.sqrt(1 - mu)]).astype(complex)

def resource_from_mu(mu):
    """
    Function to build the canonical resource sqrt(mu)|00> + sqrt(1 - mu)|11>.
    """
    if mu < 0 or mu > 1:
        raise locclab.LoccException.StructureException("mu must be in [0, 1], saw %s" % (mu))
    return PureState([numpy.sqrt(mu), 0, 0, numpy.sqrt(1 - mu)], (2, 2))

class ResourceState(object):
    """
    Class that represents a two-qubit resource with its canonical data.
    Objects of this type contain 4 pieces of information:

    state  - The PureState itself.
    mu     - The canonical Choi parameter, mu >= 1/2.
    localA - Alice's dressing unitary.
    localB - Bob's dressing unitary.

    The state equals (localA X (x) localB)|Phi+> with X the Choi matrix of mu,
    or equivalently its coefficient matrix is localA X localB^T.
    """
    def __init__(self, state, mu, localA, localB):
        self.state = state
        self.mu = float(mu)
        self.localA = localA
        self.localB = localB

    def choi(self):
        return choi_matrix(self.mu)

    def rebuild(self):
        """
        Method to rebuild the state from the canonical data.
        """
        C = self.localA.dot(self.choi()).dot(locclab.linalg.transpose(self.localB))
        return PureState(C.ravel(), (2, 2))

    def entropy(self):
        return entropy_of_coefficients([numpy.sqrt(self.mu), numpy.sqrt(1 - self.mu)])

def canonical_resource(psi, tol=None):
    """
    Function to bring a two-qubit resource of Schmidt number 2 to canonical
    form.
    """
    if psi.dims != (2, 2):
        raise locclab.LoccException.StructureException("Canonical form needs a two-qubit resource, saw dims %s" % (psi.dims,))
    rank = schmidt_number(psi, tol)
    if rank != 2:
        raise locclab.LoccException.LoccException("Canonical form needs Schmidt number 2, saw %d" % (rank))

    U, s, Vdag = locclab.linalg.svd(psi.coefficient_matrix())
    mu = s[0] ** 2
    # s is normalized to unit length, so s[1]**2 == 1 - mu up to rounding
    return ResourceState(psi, mu, U, locclab.linalg.transpose(Vdag))

def _check_unitary(name, M, tol):
    M = locclab.linalg.as_matrix(M, name)
    if M.shape != (2, 2) or not locclab.linalg.is_unitary(M, tol):
        raise locclab.LoccException.StructureException("%s must be a 2x2 unitary" % (name))
    return M

def _wrap(angle):
    return float(numpy.angle(numpy.exp(1j * angle)))

class ControlledUnitary(object):
    """
    Class that represents a two-qubit controlled-unitary gate
    U_u = (v1 (x) v2)(|0><0| (x) I + |1><1| (x) u)(w1 (x) w2), Alice's qubit
    being the control.  Objects of this type contain 7 pieces of information:

    theta      - The nonlocal parameter, in [0, pi].
    v1, v2     - The local unitaries applied after the controlled part.
    w1, w2     - The local unitaries applied before the controlled part.
    u          - The controlled unitary acting on Bob's qubit.
    degenerate - True when theta is 0 and the gate is local.
    """
    def __init__(self, theta, v1=None, v2=None, w1=None, w2=None, u=None,
                 tol=None):
        tol = locclab.linalg._tol(tol)
        eye = numpy.eye(2, dtype=complex)
        self.theta = float(theta)
        self.v1 = eye if v1 is None else _check_unitary('v1', v1, tol)
        self.v2 = eye if v2 is None else _check_unitary('v2', v2, tol)
        self.w1 = eye if w1 is None else _check_unitary('w1', w1, tol)
        self.w2 = eye if w2 is None else _check_unitary('w2', w2, tol)
        if u is None:
            u = numpy.diag([1, numpy.exp(1j * self.theta)])
        self.u = _check_unitary('u', u, tol)
        self.degenerate = abs(numpy.exp(1j * self.theta) - 1) < tol.eps_rank

    @classmethod
    def canonical(cls, theta):
        """
        Method to build the canonical gate diag(1, 1, 1, e^{i theta}).
        """
        return cls(theta)

    def canonical_matrix(self):
        return numpy.diag([1, 1, 1, numpy.exp(1j * self.theta)]).astype(complex)

    def matrix(self):
        """
        Method to return the reconstructed 4x4 gate U_u.
        """
        P0 = numpy.diag([1, 0]).astype(complex)
        P1 = numpy.diag([0, 1]).astype(complex)
        controlled = numpy.kron(P0, numpy.eye(2)) + numpy.kron(P1, self.u)
        return numpy.kron(self.v1, self.v2).dot(controlled).dot(numpy.kron(self.w1, self.w2))

    def _u_eigen(self):
        T, Z = scipy.linalg.schur(self.u, output='complex')
        eig = numpy.diag(T)
        if numpy.angle(eig[1] / eig[0]) < 0:
            eig = eig[::-1]
            Z = Z[:, ::-1]
        return eig, Z

    def canonical_dressing(self):
        """
        Method to return (a1, a2, b1, b2) with
        matrix() == (a1 (x) a2) U_theta (b1 (x) b2).
        With u = V diag(e^{ia}, e^{ib}) V^dagger the phase e^{ia} becomes a
        local phase on the control qubit.
        """
        eig, V = self._u_eigen()
        control_phase = numpy.diag([1, eig[0]])
        return (self.v1.dot(control_phase), self.v2.dot(V),
                self.w1, locclab.linalg.dagger(V).dot(self.w2))

    def is_canonical(self, tol=None):
        tol = locclab.linalg._tol(tol)
        return numpy.allclose(self.matrix(), self.canonical_matrix(),
                              rtol=0, atol=tol.eps_eq * 10)

    def to_json(self):
        return {'form': 'dressed',
                'theta': self.theta,
                'v1': locclab.linalg.matrix_to_json(self.v1),
                'v2': locclab.linalg.matrix_to_json(self.v2),
                'w1': locclab.linalg.matrix_to_json(self.w1),
                'w2': locclab.linalg.matrix_to_json(self.w2),
                'u': locclab.linalg.matrix_to_json(self.u)}

    @classmethod
    def from_json(cls, obj, tol=None):
        """
        Method to parse a gate file object.  The 'raw' form holds a single
        4x4 'matrix'; the 'dressed' form holds 'u' and optionally v1, v2, w1
        and w2.  Either way theta is recomputed from the matrices.
        """
        if not isinstance(obj, dict) or 'form' not in obj:
            raise locclab.LoccException.StructureException("Gate object needs a 'form'")
        form = obj['form']
        if form == 'raw':
            if 'matrix' not in obj:
                raise locclab.LoccException.StructureException("Raw gate needs a 'matrix'")
            return canonicalize_controlled_unitary(locclab.linalg.matrix_from_json(obj['matrix'], 'matrix'), tol)
        elif form == 'dressed':
            if 'u' not in obj:
                raise locclab.LoccException.StructureException("Dressed gate needs 'u'")
            mats = {}
            for name in ['v1', 'v2', 'w1', 'w2', 'u']:
                if name in obj:
                    mats[name] = locclab.linalg.matrix_from_json(obj[name], name)
            return canonicalize_controlled_unitary(cls(0.0, tol=tol, **mats), tol)
        raise locclab.LoccException.StructureException("Gate form must be 'raw' or 'dressed', saw '%s'" % (form))

    def __repr__(self):
        return "ControlledUnitary(theta=%.12g)" % (self.theta)

def canonicalize_controlled_unitary(U, tol=None):
    """
    Function to find the nonlocal parameter of a controlled-unitary gate.  U
    is either a ControlledUnitary in dressed form, or a raw 4x4 matrix that
    is block diagonal in Alice's computational basis,
    U = |0><0| (x) U0 + |1><1| (x) U1.  Returns a ControlledUnitary whose
    reconstruction equals U and whose theta is in [0, pi].
    """
    tol = locclab.linalg._tol(tol)
    if isinstance(U, ControlledUnitary):
        gate = U
    else:
        U = locclab.linalg.as_matrix(U, 'gate')
        if U.shape != (4, 4):
            raise locclab.LoccException.StructureException("A two-qubit gate must be 4x4, saw %s" % (U.shape,))
        if not locclab.linalg.is_unitary(U, tol):
            raise locclab.LoccException.StructureException("Gate is not unitary")
        atol = tol.eps_eq * 10
        if not (numpy.allclose(U[:2, 2:], 0, rtol=0, atol=atol) and numpy.allclose(U[2:, :2], 0, rtol=0, atol=atol)):
            raise locclab.LoccException.StructureException("Gate is not controlled by Alice's computational basis")
        U0 = U[:2, :2]
        U1 = U[2:, 2:]
        gate = ControlledUnitary(0.0, w2=U0, u=U1.dot(locclab.linalg.dagger(U0)), tol=tol)

    eig, V = gate._u_eigen()
    theta = abs(_wrap(numpy.angle(eig[1] / eig[0])))
    result = ControlledUnitary(theta, gate.v1, gate.v2, gate.w1, gate.w2,
                               gate.u, tol)
    if result.degenerate:
        log.warning("Gate has theta = 0 and is local")
    log.debug("Canonicalized gate: theta = %.12g" % (theta))
    return result

def tomography_inputs():
    """
    Function to return 16 density matrices on two qubits that span all 4x4
    operators: the basis projectors |i><i| and the projectors onto
    (|i> + |j>)/sqrt(2) and (|i> + i|j>)/sqrt(2) for i < j.
    """
    inputs = []
    basis = numpy.eye(4, dtype=complex)
    for i in range(4):
        inputs.append(numpy.outer(basis[i], basis[i]))
    for i in range(4):
        for j in range(i + 1, 4):
            for phase in [1, 1j]:
                v = (basis[i] + phase * basis[j]) / numpy.sqrt(2)
                inputs.append(numpy.outer(v, numpy.conj(v)))
    return inputs
