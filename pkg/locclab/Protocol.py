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
LOCC protocols between Alice and Bob.

A protocol is an ordered list of turns.  At every turn one party applies a
quantum instrument to its registers (its input qubit followed by its half of
the resource) and broadcasts the outcome.  Instruments are stored per
history, the tuple of outcomes seen so far, so protocols are fully adaptive
and naturally form a tree whose leaves are the branches.
"""

import logging
import numpy

import locclab.LoccException
import locclab.linalg
import locclab.States

ALICE = 'alice'
BOB = 'bob'

def other_party(party):
    if party == ALICE:
        return BOB
    return ALICE

class Turn(object):
    """
    Class that represents one turn of a protocol.  Objects of this type
    contain 3 pieces of information:

    party       - ALICE or BOB.
    instruments - A dictionary mapping a history (tuple of integer outcomes)
                  to the ordered list of measurement operators used after
                  that history.  A history that is absent marks a branch
                  that has already ended.
    filler      - The set of histories whose instrument is an identity
                  inserted only to even out branch lengths.
    """
    def __init__(self, party, instruments, filler=None):
        if party not in (ALICE, BOB):
            raise locclab.LoccException.StructureException("Turn party must be '%s' or '%s', saw '%s'" % (ALICE, BOB, party))
        self.party = party
        self.instruments = {}
        for history, ops in instruments.items():
            history = tuple(int(r) for r in history)
            if len(ops) == 0:
                raise locclab.LoccException.StructureException("Instrument at history %s has no operators" % (list(history)))
            self.instruments[history] = [locclab.linalg.as_matrix(op, 'operator') for op in ops]
        if len(self.instruments) == 0:
            raise locclab.LoccException.StructureException("Turn has no instruments")
        if filler is None:
            filler = set()
        self.filler = set(tuple(h) for h in filler)

    def single_outcome(self):
        """
        Method to check whether every instrument of this turn has exactly
        one operator, so its outcome carries no information.
        """
        return all(len(ops) == 1 for ops in self.instruments.values())

    def is_filler(self):
        return set(self.instruments.keys()) == self.filler

    def to_json(self):
        instruments = []
        for history in sorted(self.instruments.keys()):
            instruments.append({'history': list(history),
                                'operators': [locclab.linalg.matrix_to_json(op) for op in self.instruments[history]]})
        return {'party': self.party,
                'filler': [list(h) for h in sorted(self.filler)],
                'instruments': instruments}

    @classmethod
    def from_json(cls, obj):
        if not isinstance(obj, dict) or 'party' not in obj or 'instruments' not in obj:
            raise locclab.LoccException.StructureException("Turn object needs 'party' and 'instruments'")
        instruments = {}
        for entry in obj['instruments']:
            if 'history' not in entry or 'operators' not in entry:
                raise locclab.LoccException.StructureException("Instrument entry needs 'history' and 'operators'")
            history = tuple(entry['history'])
            if history in instruments:
                raise locclab.LoccException.StructureException("History %s appears twice in one turn" % (list(history)))
            instruments[history] = [locclab.linalg.matrix_from_json(op, 'operator') for op in entry['operators']]
        return cls(obj['party'], instruments, [tuple(h) for h in obj.get('filler', [])])

class Branch(object):
    """
    Class that represents one leaf of the protocol tree.  Objects of this
    type contain 3 pieces of information:

    outcomes     - The full outcome sequence of the branch.
    accumulatedA - The product of Alice's operators along the branch.
    accumulatedB - The product of Bob's operators along the branch.
    """
    def __init__(self, outcomes, accumulatedA, accumulatedB):
        self.outcomes = tuple(outcomes)
        self.accumulatedA = accumulatedA
        self.accumulatedB = accumulatedB

class LoccProtocol(object):
    """
    Class that represents an LOCC protocol acting on two input qubits and a
    shared resource.  Objects of this kind contain 3 pieces of information:

    turns          - The ordered list of Turn objects.
    resource       - The PureState shared before the protocol starts; its
                     dims are the resource register dimensions.
    resource_dims  - The pair (dA_r, dB_r).

    Each party starts with a register of dimension 2 * (its resource
    dimension), input qubit first.  Operators may shrink a register, for
    instance by measuring out the resource half.
    """
    def __init__(self, turns, resource):
        self.log = logging.getLogger('%s.%s' % (__name__,
                                                self.__class__.__name__))
        if not isinstance(resource, locclab.States.PureState):
            raise locclab.LoccException.StructureException("Protocol resource must be a PureState")
        self.turns = list(turns)
        self.resource = resource
        self.resource_dims = resource.dims
        self._check_histories()

    def _check_histories(self):
        reachable = set([()])
        for k, turn in enumerate(self.turns):
            for history in turn.instruments:
                if history not in reachable:
                    raise locclab.LoccException.StructureException("Turn %d references history %s that earlier turns cannot produce" % (k + 1, list(history)))
            reachable = set()
            for history, ops in turn.instruments.items():
                for r in range(len(ops)):
                    reachable.add(history + (r,))

    def depth(self):
        return len(self.turns)

    def histories(self, k):
        """
        Method to return the sorted histories at which turn k (0-based) acts.
        """
        return sorted(self.turns[k].instruments.keys())

    def initial_dims(self):
        return {ALICE: 2 * self.resource_dims[0], BOB: 2 * self.resource_dims[1]}

    def resource_matrix(self):
        """
        Method to return the dA_r x dB_r coefficient matrix of the resource.
        """
        return self.resource.coefficient_matrix()

    def resource_state(self, tol=None):
        return locclab.States.canonical_resource(self.resource, tol)

    def parties(self):
        return [turn.party for turn in self.turns]

    def normalized_turn_count(self):
        """
        Method to count turns after merging adjacent turns of the same party.
        """
        count = 0
        last = None
        for party in self.parties():
            if party != last:
                count += 1
            last = party
        return count

    def walk(self):
        """
        Method to enumerate every node of the protocol tree, depth first with
        ascending outcomes.  Yields tuples (k, history, accA, accB) where k is
        the 0-based index of the turn about to act at this node (equal to the
        depth for leaves), and accA/accB are the accumulated operators so far.
        Operators whose input dimension does not match are not descended into.
        """
        dims = self.initial_dims()
        stack = [(0, (), numpy.eye(dims[ALICE], dtype=complex),
                  numpy.eye(dims[BOB], dtype=complex))]
        while stack:
            k, history, accA, accB = stack.pop()
            yield (k, history, accA, accB)
            if k >= len(self.turns) or history not in self.turns[k].instruments:
                continue
            turn = self.turns[k]
            children = []
            for r, op in enumerate(turn.instruments[history]):
                if turn.party == ALICE:
                    if op.shape[1] != accA.shape[0]:
                        continue
                    children.append((k + 1, history + (r,), op.dot(accA), accB))
                else:
                    if op.shape[1] != accB.shape[0]:
                        continue
                    children.append((k + 1, history + (r,), accA, op.dot(accB)))
            stack.extend(reversed(children))

    def leaves(self):
        """
        Method to return the (history, accA, accB) triples of every branch end.
        """
        leaves = []
        for k, history, accA, accB in self.walk():
            if k >= len(self.turns) or history not in self.turns[k].instruments:
                leaves.append((history, accA, accB))
        return leaves

    def is_uniform(self):
        n = len(self.turns)
        return all(len(history) == n for history, accA, accB in self.leaves())

    def mirror(self):
        """
        Method to return the protocol with the roles of Alice and Bob swapped.
        The resource is transposed so that the new Alice holds the old Bob's
        half.
        """
        turns = [Turn(other_party(t.party), t.instruments, t.filler) for t in self.turns]
        C = locclab.linalg.transpose(self.resource_matrix())
        resource = locclab.States.PureState(C.ravel(), (self.resource_dims[1], self.resource_dims[0]))
        return LoccProtocol(turns, resource)

    def to_json(self):
        return {'dims': {'input': [2, 2], 'resource': list(self.resource_dims)},
                'resource': self.resource.to_json(),
                'turns': [turn.to_json() for turn in self.turns]}

    @classmethod
    def from_json(cls, obj, tol=None):
        """
        Method to parse a protocol file object.  The resource is either
        {"mu": value} for the canonical two-qubit resource or a full state
        object with "dims" and "amplitudes".
        """
        if not isinstance(obj, dict) or 'resource' not in obj or 'turns' not in obj:
            raise locclab.LoccException.StructureException("Protocol object needs 'resource' and 'turns'")
        res = obj['resource']
        if isinstance(res, dict) and 'mu' in res:
            resource = locclab.States.resource_from_mu(float(res['mu']))
        else:
            resource = locclab.States.PureState.from_json(res, tol)

        dims = obj.get('dims')
        if dims is not None and 'resource' in dims:
            if tuple(dims['resource']) != resource.dims:
                raise locclab.LoccException.StructureException("Protocol dims %s do not match resource dims %s" % (dims['resource'], resource.dims))

        return cls([Turn.from_json(t) for t in obj['turns']], resource)

def load_protocol(path, tol=None):
    import locclab.locclabutil
    return LoccProtocol.from_json(locclab.locclabutil.load_json(path), tol)

def save_protocol(p, path):
    import locclab.locclabutil
    locclab.locclabutil.write_json(p.to_json(), path=path)

def validate(p, tol=None):
    """
    Function to check every instrument of a protocol.  Returns a list of
    violation strings; the list is empty when every completeness relation
    holds within eps_eq and every operator fits the register it acts on.
    """
    tol = locclab.linalg._tol(tol)
    violations = []
    for k, history, accA, accB in p.walk():
        if k >= len(p.turns) or history not in p.turns[k].instruments:
            continue
        turn = p.turns[k]
        if turn.party == ALICE:
            dim = accA.shape[0]
        else:
            dim = accB.shape[0]

        ops = turn.instruments[history]
        shapes_ok = True
        for r, op in enumerate(ops):
            if op.shape[1] != dim:
                violations.append("turn %d history %s: operator %d has input dimension %d, %s's register has dimension %d" % (k + 1, list(history), r, op.shape[1], turn.party, dim))
                shapes_ok = False
        if not shapes_ok:
            continue

        total = sum(locclab.linalg.dagger(op).dot(op) for op in ops)
        err = numpy.max(numpy.abs(total - numpy.eye(dim)))
        if err > tol.eps_eq:
            violations.append("turn %d history %s: completeness violated by %.3g" % (k + 1, list(history), err))
    return violations

def pad_to_uniform_depth(p):
    """
    Function to extend every short branch with single-outcome identity
    instruments so that all branches have the same number of turns.
    """
    n = len(p.turns)
    leaves = p.leaves()
    if all(len(history) == n for history, accA, accB in leaves):
        return p

    instruments = [dict(turn.instruments) for turn in p.turns]
    filler = [set(turn.filler) for turn in p.turns]
    for history, accA, accB in leaves:
        extended = history
        for k in range(len(history), n):
            if p.turns[k].party == ALICE:
                dim = accA.shape[0]
            else:
                dim = accB.shape[0]
            instruments[k][extended] = [numpy.eye(dim, dtype=complex)]
            filler[k].add(extended)
            extended = extended + (0,)

    turns = [Turn(turn.party, instruments[k], filler[k]) for k, turn in enumerate(p.turns)]
    return LoccProtocol(turns, p.resource)

def accumulated_operators(p):
    """
    Function to return one Branch per leaf of a uniform-depth protocol.
    """
    n = len(p.turns)
    branches = []
    for history, accA, accB in p.leaves():
        if len(history) != n:
            raise locclab.LoccException.StructureException("Protocol is not of uniform depth: branch %s ends after %d of %d turns" % (list(history), len(history), n))
        branches.append(Branch(history, accA, accB))
    return branches

def _relabel(turns, start, mapping, prefix_len):
    """
    Function to rewrite the history keys of turns[start:] through a mapping of
    history prefixes of length prefix_len.
    """
    out = []
    for turn in turns[start:]:
        instruments = {}
        filler = set()
        for history, ops in turn.instruments.items():
            new = mapping[history[:prefix_len]] + history[prefix_len:]
            instruments[new] = ops
            if history in turn.filler:
                filler.add(new)
        out.append(Turn(turn.party, instruments, filler))
    return out

def merge_adjacent_turns(p, k):
    """
    Function to combine turns k and k+1 (0-based) of the same party into one
    turn whose outcomes are the joint outcomes (r_k, r_k+1).
    """
    if k < 0 or k + 1 >= len(p.turns):
        raise locclab.LoccException.StructureException("Cannot merge turns %d and %d of a %d-turn protocol" % (k, k + 1, len(p.turns)))
    first = p.turns[k]
    second = p.turns[k + 1]
    if first.party != second.party:
        raise locclab.LoccException.StructureException("Cannot merge turn %d (%s) with turn %d (%s)" % (k, first.party, k + 1, second.party))

    instruments = {}
    filler = set()
    mapping = {}
    for history, ops in first.instruments.items():
        merged = []
        all_filler = history in first.filler
        for r1, op1 in enumerate(ops):
            after = history + (r1,)
            if after in second.instruments:
                if after not in second.filler:
                    all_filler = False
                for r2, op2 in enumerate(second.instruments[after]):
                    mapping[after + (r2,)] = history + (len(merged),)
                    merged.append(op2.dot(op1))
            else:
                merged.append(op1)
        instruments[history] = merged
        if all_filler:
            filler.add(history)

    turns = list(p.turns[:k]) + [Turn(first.party, instruments, filler)]
    turns.extend(_relabel(p.turns, k + 2, mapping, k + 2))
    return LoccProtocol(turns, p.resource)

def exchange_turns(p, k, tol=None):
    """
    Function to swap turns k and k+1 (0-based) of different parties.  This
    is only possible when the instruments of turn k+1 do not depend on the
    outcome of turn k; LoccException is raised otherwise.
    """
    tol = locclab.linalg._tol(tol)
    if k < 0 or k + 1 >= len(p.turns):
        raise locclab.LoccException.StructureException("Cannot exchange turns %d and %d of a %d-turn protocol" % (k, k + 1, len(p.turns)))
    first = p.turns[k]
    second = p.turns[k + 1]
    if first.party == second.party:
        raise locclab.LoccException.StructureException("Turns %d and %d belong to the same party; merge them instead" % (k, k + 1))

    new_first = {}
    new_second = {}
    new_first_filler = set()
    new_second_filler = set()
    mapping = {}
    for history, ops in first.instruments.items():
        follow = [second.instruments.get(history + (r,)) for r in range(len(ops))]
        if any(f is None for f in follow):
            raise locclab.LoccException.StructureException("Cannot exchange turns at history %s: some branches end" % (list(history)))
        reference = follow[0]
        for other in follow[1:]:
            same = len(other) == len(reference) and all(a.shape == b.shape and numpy.allclose(a, b, rtol=0, atol=tol.eps_eq) for a, b in zip(other, reference))
            if not same:
                raise locclab.LoccException.LoccException("Cannot exchange turns at history %s: turn %d depends on the outcome of turn %d" % (list(history), k + 1, k))

        new_first[history] = reference
        if history + (0,) in second.filler:
            new_first_filler.add(history)
        for s in range(len(reference)):
            new_second[history + (s,)] = ops
            if history in first.filler:
                new_second_filler.add(history + (s,))
            for r in range(len(ops)):
                mapping[history + (r, s)] = history + (s, r)

    turns = list(p.turns[:k])
    turns.append(Turn(second.party, new_first, new_first_filler))
    turns.append(Turn(first.party, new_second, new_second_filler))
    turns.extend(_relabel(p.turns, k + 2, mapping, k + 2))
    return LoccProtocol(turns, p.resource)

def branch_kraus(A, B, R):
    """
    Function to turn the accumulated operators of one branch into its
    effective Kraus operators on the two input qubits.  A and B map each
    party's (input, resource) register to an output of dimension 2 * junk,
    output qubit first; R is the resource coefficient matrix.  Returns an
    array K of shape (4, J, 4) where K[:, j, :] maps |ij> to the output
    qubits for junk index j.
    """
    dAr, dBr = R.shape
    if A.shape[1] != 2 * dAr or B.shape[1] != 2 * dBr:
        raise locclab.LoccException.StructureException("Accumulated operators of shapes %s and %s do not act on resource dims %s" % (A.shape, B.shape, R.shape))
    if A.shape[0] % 2 != 0 or B.shape[0] % 2 != 0:
        raise locclab.LoccException.StructureException("Final operators must keep the input qubit, saw output dimensions %d and %d" % (A.shape[0], B.shape[0]))
    kA = A.shape[0] // 2
    kB = B.shape[0] // 2
    A4 = A.reshape(2, kA, 2, dAr)
    B4 = B.reshape(2, kB, 2, dBr)
    K = numpy.einsum('xaib,ycjd,bd->xyacij', A4, B4, R)
    return K.reshape(4, kA * kB, 4)

def _check_density(rho, tol):
    rho = locclab.linalg.as_matrix(rho, 'rho_in')
    if rho.shape != (4, 4):
        raise locclab.LoccException.StructureException("rho_in must be 4x4, saw %s" % (rho.shape,))
    if not numpy.allclose(rho, locclab.linalg.dagger(rho), rtol=0, atol=tol.eps_eq):
        raise locclab.LoccException.StructureException("rho_in is not Hermitian")
    if abs(numpy.trace(rho) - 1) > tol.eps_eq:
        raise locclab.LoccException.StructureException("rho_in has trace %s, expected 1" % (numpy.trace(rho).real))
    if numpy.min(numpy.linalg.eigvalsh(rho)) < -tol.eps_eq:
        raise locclab.LoccException.StructureException("rho_in is not positive semidefinite")
    return rho

def branch_kraus_list(p):
    """
    Function to return the Kraus operators of every branch end, ragged
    trees included.
    """
    R = p.resource_matrix()
    return [branch_kraus(accA, accB, R) for history, accA, accB in p.leaves()]

def apply_channel(p, rho_in, tol=None, kraus=None):
    """
    Function to apply the channel realized by a protocol to a two-qubit
    density matrix, summing over all branches and tracing out whatever is
    left of the resource registers.
    """
    tol = locclab.linalg._tol(tol)
    rho = _check_density(rho_in, tol)
    if kraus is None:
        kraus = branch_kraus_list(p)
    out = numpy.zeros((4, 4), dtype=complex)
    for K in kraus:
        out += numpy.einsum('oji,ik,pjk->op', K, rho, numpy.conj(K))
    return out

def channel_distance(p, q, inputs=None, tol=None):
    """
    Function to compare the channels of two protocols: the largest entry of
    the difference of their outputs over a set of inputs, by default the 16
    tomographic inputs.
    """
    if inputs is None:
        inputs = locclab.States.tomography_inputs()
    kp = branch_kraus_list(p)
    kq = branch_kraus_list(q)
    dist = 0.0
    for rho in inputs:
        diff = apply_channel(p, rho, tol, kp) - apply_channel(q, rho, tol, kq)
        dist = max(dist, float(numpy.max(numpy.abs(diff))))
    return dist

def choi_matrix(p):
    """
    Function to return the Choi matrix sum over Kraus operators K of
    vec(K) vec(K)^dagger, with vec(K) = (K (x) I)(|00> + |11> + |22> + |33>)
    on the output (x) input space.
    """
    J = numpy.zeros((16, 16), dtype=complex)
    for K in branch_kraus_list(p):
        for j in range(K.shape[1]):
            v = K[:, j, :].reshape(16)
            J += numpy.outer(v, numpy.conj(v))
    return J

def random_instrument(d_in, d_out, outcomes, rng):
    """
    Function to draw a complete instrument with the given number of outcomes
    from a random isometry.
    """
    V = locclab.linalg.random_isometry(outcomes * d_out, d_in, rng)
    return [V[r * d_out:(r + 1) * d_out, :] for r in range(outcomes)]

def identity_protocol(n, resource):
    """
    Function to build an n-turn protocol, alternating from Alice, in which
    every instrument is the identity.
    """
    dims = {ALICE: 2 * resource.dims[0], BOB: 2 * resource.dims[1]}
    turns = []
    party = ALICE
    for k in range(n):
        history = (0,) * k
        turns.append(Turn(party, {history: [numpy.eye(dims[party], dtype=complex)]}, [history]))
        party = other_party(party)
    return LoccProtocol(turns, resource)
