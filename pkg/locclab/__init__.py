"""
Library for LOCC implementations of two-qubit controlled-unitary gates.

locclab builds, checks and transforms protocols in which Alice and Bob,
sharing an entangled resource, implement a controlled-unitary gate on their
two input qubits using local operations and classical communication.  It
can verify that a protocol implements a gate on every input, reduce a
protocol with any number of turns to three turns, compare the resource
against the gate's entangling power and search numerically for protocols.

The simplest locclab program (without error handling or any advanced
features) would look something like:

import numpy
import locclab.States
import locclab.Reference
import locclab.Verifier

gate = locclab.States.ControlledUnitary.canonical(numpy.pi / 2)
protocol = locclab.Reference.build_eisert(gate)
report = locclab.Verifier.verify(protocol, gate)
print(report.passed, protocol.resource_state().entropy())
"""
