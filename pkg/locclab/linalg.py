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
Dense complex linear algebra for the small matrices that carry every
operator in locclab.  Matrices are plain 2-D numpy arrays of dtype
complex128; nothing here keeps state, so all functions are safe to call
from concurrent contexts.
"""

import numpy
import scipy.linalg
import scipy.stats

import locclab.LoccException

DEFAULT_EPS = 1e-9
MAX_EPS = 1e-6

class Tolerance(object):
    """
    Class that holds the numerical tolerances used throughout locclab.
    Objects of this type contain 2 pieces of information:

    eps_rank - The relative singular-value cutoff used for rank decisions.
    eps_eq   - The absolute tolerance for elementwise equality checks.
    """
    def __init__(self, eps_rank=DEFAULT_EPS, eps_eq=DEFAULT_EPS):
        for name, value in [('eps_rank', eps_rank), ('eps_eq', eps_eq)]:
            if not (value > 0 and value <= MAX_EPS):
                raise locclab.LoccException.LoccException("Tolerance %s must be in (0, %g], saw %s" % (name, MAX_EPS, value))
        self.eps_rank = float(eps_rank)
        self.eps_eq = float(eps_eq)

    def with_eq(self, eps_eq):
        """
        Method to return a copy of this Tolerance with a different equality
        tolerance.
        """
        return Tolerance(self.eps_rank, eps_eq)

    def __repr__(self):
        return "Tolerance(eps_rank=%g, eps_eq=%g)" % (self.eps_rank, self.eps_eq)

def _tol(tol):
    if tol is None:
        return Tolerance()
    return tol

def as_matrix(M, name='matrix'):
    """
    Function to coerce M into a finite 2-D complex array.  Raises
    StructureException for the wrong number of dimensions and LoccException
    for non-finite entries.
    """
    arr = numpy.asarray(M, dtype=complex)
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise locclab.LoccException.StructureException("%s must be a non-empty 2-D matrix, saw shape %s" % (name, arr.shape))
    if not numpy.all(numpy.isfinite(arr)):
        raise locclab.LoccException.LoccException("%s has non-finite entries" % (name))
    return arr

def dagger(M):
    """
    Function to return the conjugate transpose of M.
    """
    return numpy.conj(numpy.asarray(M)).T

def conj(M):
    """
    Function to return the elementwise complex conjugate of M.
    """
    return numpy.conj(numpy.asarray(M))

def transpose(M):
    """
    Function to return the transpose of M.
    """
    return numpy.asarray(M).T

def svd(M):
    """
    Function to compute the thin singular value decomposition M = U diag(s) Vdag.
    The singular values are returned in descending order.  To make results
    reproducible, the first non-negligible entry of every left singular
    vector is made real and positive, with the compensating phase moved into
    the matching row of Vdag.
    """
    M = as_matrix(M)
    U, s, Vdag = scipy.linalg.svd(M, full_matrices=False)
    for k in range(U.shape[1]):
        column = U[:, k]
        nonzero = numpy.nonzero(numpy.abs(column) > 1e-12)[0]
        if len(nonzero) == 0:
            continue
        phase = column[nonzero[0]] / abs(column[nonzero[0]])
        U[:, k] = column * numpy.conj(phase)
        Vdag[k, :] = Vdag[k, :] * phase
    return U, s, Vdag

def singular_values(M):
    """
    Function to return just the singular values of M, largest first.
    """
    return scipy.linalg.svdvals(as_matrix(M))

def _cutoff(s, tol):
    largest = s[0] if len(s) > 0 else 0.0
    return _tol(tol).eps_rank * max(1.0, largest)

def rank_tol(M, tol=None):
    """
    Function to compute the numerical rank of M: the number of singular values
    above eps_rank times max(1, largest singular value).
    """
    s = singular_values(M)
    return int(numpy.sum(s > _cutoff(s, tol)))

def polar_decompose(T):
    """
    Function to compute the polar decomposition T = isometry * root of an
    m x n matrix with m >= n.  The root is sqrt(T^dagger T); on rank-deficient
    input the isometry is completed on the null directions.
    """
    T = as_matrix(T, 'T')
    if T.shape[0] < T.shape[1]:
        raise locclab.LoccException.StructureException("Polar decomposition needs rows >= columns, saw %dx%d" % T.shape)
    isometry, root = scipy.linalg.polar(T, side='right')
    # symmetrize away rounding noise
    root = (root + dagger(root)) / 2
    return isometry, root

def kron(Ma, Mb):
    """
    Function to compute the Kronecker product, Alice's factor first.
    """
    return numpy.kron(as_matrix(Ma), as_matrix(Mb))

def partial_trace(M, dims, keep):
    """
    Function to trace out one side of a bipartite operator.  dims is the pair
    (dA, dB) and keep is either 'A' or 'B'.
    """
    M = as_matrix(M)
    dA, dB = dims
    if M.shape != (dA * dB, dA * dB):
        raise locclab.LoccException.StructureException("Operator of shape %s does not match dims (%d, %d)" % (M.shape, dA, dB))
    tensor = M.reshape(dA, dB, dA, dB)
    if keep == 'A':
        return numpy.einsum('ibjb->ij', tensor)
    elif keep == 'B':
        return numpy.einsum('aiaj->ij', tensor)
    raise locclab.LoccException.StructureException("keep must be 'A' or 'B', saw %s" % (keep))

def is_unitary(M, tol=None):
    """
    Function to decide whether M is square and unitary within eps_eq.
    """
    M = numpy.asarray(M, dtype=complex)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        return False
    return numpy.allclose(dagger(M).dot(M), numpy.eye(M.shape[0]),
                          rtol=0, atol=_tol(tol).eps_eq * 10)

def hermitian_part(H):
    return (H + dagger(H)) / 2

def psd_sqrt(H, tol=None):
    """
    Function to compute the positive semidefinite square root of a Hermitian
    matrix.  Slightly negative eigenvalues coming from rounding are clipped;
    clearly negative ones raise InvariantViolation.
    """
    H = hermitian_part(as_matrix(H))
    w, V = scipy.linalg.eigh(H)
    floor = -_tol(tol).eps_eq * max(1.0, numpy.max(numpy.abs(w)))
    if numpy.min(w) < floor:
        raise locclab.LoccException.InvariantViolation("Matrix is not positive semidefinite, smallest eigenvalue %g" % (numpy.min(w)))
    w = numpy.clip(w, 0, None)
    return (V * numpy.sqrt(w)).dot(dagger(V))

def pinv(M, tol=None):
    """
    Function to compute the Moore-Penrose pseudo-inverse with the same
    relative cutoff that rank_tol uses.
    """
    U, s, Vdag = svd(M)
    keep = s > _cutoff(s, tol)
    inv = numpy.zeros_like(s)
    inv[keep] = 1.0 / s[keep]
    return dagger(Vdag).dot(numpy.diag(inv)).dot(dagger(U))

def range_projector(M, tol=None):
    """
    Function to return the orthogonal projector onto the column space of M.
    """
    U, s, Vdag = svd(M)
    r = int(numpy.sum(s > _cutoff(s, tol)))
    basis = U[:, :r]
    return basis.dot(dagger(basis))

def intertwining_isometry(T, T2, tol=None):
    """
    Function to find the operator V with V T = T2 when T^dagger T equals
    T2^dagger T2.  V is isometric on the range of T.
    """
    return as_matrix(T2).dot(pinv(T, tol))

def complete_instrument(ops, dim_in, dim_out, tol=None):
    """
    Function to return the extra operators that complete a partial instrument.
    Given operators with sum(op^dagger op) <= I on a dim_in-dimensional space,
    this returns operators of shape dim_out x dim_in whose own sum equals the
    deficit I - sum(op^dagger op).  An empty list is returned when nothing is
    missing.
    """
    tol = _tol(tol)
    deficit = numpy.eye(dim_in, dtype=complex)
    for op in ops:
        deficit = deficit - dagger(op).dot(op)
    w, V = scipy.linalg.eigh(hermitian_part(deficit))
    if numpy.min(w) < -tol.eps_eq * 10:
        raise locclab.LoccException.InvariantViolation("Operators exceed the identity by %g" % (-numpy.min(w)))

    rows = [numpy.sqrt(w[k]) * numpy.conj(V[:, k]) for k in range(dim_in)
            if w[k] > tol.eps_eq]
    extra = []
    for start in range(0, len(rows), dim_out):
        op = numpy.zeros((dim_out, dim_in), dtype=complex)
        for i, row in enumerate(rows[start:start + dim_out]):
            op[i, :] = row
        extra.append(op)
    return extra

def random_unitary(d, rng):
    """
    Function to draw a Haar-random d x d unitary from the generator rng.
    """
    return numpy.asarray(scipy.stats.unitary_group.rvs(d, random_state=rng),
                         dtype=complex).reshape(d, d)

def random_matrix(rows, cols, rng):
    """
    Function to draw a matrix of independent complex Gaussian entries.
    """
    return rng.normal(size=(rows, cols)) + 1j * rng.normal(size=(rows, cols))

def random_isometry(rows, cols, rng):
    """
    Function to draw a random isometry (orthonormal columns), rows >= cols.
    """
    if rows < cols:
        raise locclab.LoccException.StructureException("An isometry needs rows >= columns, saw %dx%d" % (rows, cols))
    Q, R = numpy.linalg.qr(random_matrix(rows, cols, rng))
    return Q

def hermitian_from_params(params, d):
    """
    Function to build a d x d Hermitian matrix from d*d reals: the d diagonal
    entries first, then the real and imaginary parts of every upper
    triangular entry in row-major order.
    """
    params = numpy.asarray(params, dtype=float)
    if params.shape != (d * d,):
        raise locclab.LoccException.StructureException("Expected %d parameters for a %dx%d Hermitian matrix, saw %d" % (d * d, d, d, params.size))
    H = numpy.diag(params[:d]).astype(complex)
    idx = d
    for i in range(d):
        for j in range(i + 1, d):
            H[i, j] = params[idx] + 1j * params[idx + 1]
            H[j, i] = numpy.conj(H[i, j])
            idx += 2
    return H

def params_from_hermitian(H):
    d = H.shape[0]
    params = list(numpy.real(numpy.diag(H)))
    for i in range(d):
        for j in range(i + 1, d):
            params.extend([H[i, j].real, H[i, j].imag])
    return numpy.array(params)

def unitary_from_params(params, d):
    """
    Function to map d*d reals to the unitary expm(iH).
    """
    return scipy.linalg.expm(1j * hermitian_from_params(params, d))

def params_from_unitary(U):
    """
    Function to invert unitary_from_params: the complex Schur form of a
    unitary is diagonal, and its eigenphases give H.
    """
    U = as_matrix(U)
    T, Z = scipy.linalg.schur(U, output='complex')
    H = (Z * numpy.angle(numpy.diag(T))).dot(dagger(Z))
    return params_from_hermitian(hermitian_part(H))

def matrix_to_json(M):
    """
    Function to serialize a matrix as nested [re, im] pairs, row-major.
    """
    M = numpy.asarray(M, dtype=complex)
    return [[[float(z.real), float(z.imag)] for z in row] for row in M]

def matrix_from_json(obj, name='matrix'):
    """
    Function to parse a matrix serialized by matrix_to_json.
    """
    try:
        arr = numpy.array(obj, dtype=float)
    except (TypeError, ValueError):
        raise locclab.LoccException.StructureException("%s is not a nested array of numbers" % (name))
    if arr.ndim != 3 or arr.shape[2] != 2:
        raise locclab.LoccException.StructureException("%s must be rows of [re, im] pairs, saw shape %s" % (name, arr.shape))
    return as_matrix(arr[:, :, 0] + 1j * arr[:, :, 1], name)

def vector_to_json(v):
    return [[float(z.real), float(z.imag)] for z in numpy.asarray(v, dtype=complex).ravel()]

def vector_from_json(obj, name='vector'):
    try:
        arr = numpy.array(obj, dtype=float)
    except (TypeError, ValueError):
        raise locclab.LoccException.StructureException("%s is not an array of numbers" % (name))
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise locclab.LoccException.StructureException("%s must be a list of [re, im] pairs" % (name))
    return arr[:, 0] + 1j * arr[:, 1]
