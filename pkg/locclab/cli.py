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
Command-line front end for locclab.
"""

import argparse
import logging
import sys

import locclab.LoccException
import locclab.linalg
import locclab.locclabutil
import locclab.States
import locclab.Protocol
import locclab.Verifier
import locclab.Reducer
import locclab.Reference
import locclab.Search

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_ERROR = 2

def _emit(obj, args):
    if args.out is not None:
        locclab.locclabutil.write_json(obj, path=args.out)
    else:
        locclab.locclabutil.write_json(obj, stream=sys.stdout)

def _target(args, tol):
    if getattr(args, 'gate', None) is not None:
        return locclab.States.ControlledUnitary.from_json(locclab.locclabutil.load_json(args.gate), tol)
    if args.theta is None:
        raise locclab.LoccException.StructureException("Either --theta or --gate is required")
    return locclab.States.ControlledUnitary.canonical(locclab.locclabutil.parse_theta(args.theta))

def _theta(args):
    return locclab.locclabutil.parse_theta(args.theta)

def do_canon(args, config, tol):
    if args.gate is not None:
        gate = locclab.States.ControlledUnitary.from_json(locclab.locclabutil.load_json(args.gate), tol)
        a1, a2, b1, b2 = gate.canonical_dressing()
        obj = gate.to_json()
        obj['degenerate'] = bool(gate.degenerate)
        obj['dressing'] = dict((name, locclab.linalg.matrix_to_json(M))
                               for name, M in zip(['a1', 'a2', 'b1', 'b2'], [a1, a2, b1, b2]))
    elif args.state is not None:
        psi = locclab.States.PureState.from_json(locclab.locclabutil.load_json(args.state), tol)
        coeffs, basisA, basisB = locclab.States.schmidt_decompose(psi)
        obj = {'schmidt_coefficients': [float(x) for x in coeffs],
               'schmidt_number': locclab.States.schmidt_number(psi, tol),
               'entropy': locclab.States.entropy_of_coefficients(coeffs)}
        if psi.dims == (2, 2) and obj['schmidt_number'] == 2:
            res = locclab.States.canonical_resource(psi, tol)
            obj['mu'] = res.mu
            obj['localA'] = locclab.linalg.matrix_to_json(res.localA)
            obj['localB'] = locclab.linalg.matrix_to_json(res.localB)
    else:
        raise locclab.LoccException.StructureException("canon needs --gate or --state")
    _emit(obj, args)
    return EXIT_OK

def do_verify(args, config, tol):
    p = locclab.Protocol.load_protocol(args.protocol, tol)
    p = locclab.Protocol.pad_to_uniform_depth(p)
    target = _target(args, tol)
    extended = args.extended
    if not extended:
        extended = locclab.locclabutil.config_get_boolean_key(config, 'verify', 'extended', False)
    report = locclab.Verifier.verify(p, target, tol, extended)
    obj = report.to_json()
    obj['extended'] = extended
    obj['violations'] = locclab.Protocol.validate(p, tol)
    if report.passed:
        obj['block_violations'] = locclab.Verifier.check_block_conditions(report, p.resource_matrix(), tol)
    _emit(obj, args)
    if report.passed and not obj['violations']:
        return EXIT_OK
    return EXIT_FAIL

def do_reduce(args, config, tol):
    p = locclab.Protocol.load_protocol(args.protocol, tol)
    target = locclab.States.ControlledUnitary.canonical(_theta(args))
    budget = args.budget
    if budget is None:
        budget = locclab.locclabutil.config_get_float_key(config, 'reduce', 'budget',
                                                          locclab.Reducer.DEFAULT_BUDGET)
    try:
        reduced, trace = locclab.Reducer.reduce_to_three_turns(p, target, tol, budget)
    except locclab.LoccException.ReductionException as err:
        logging.error("Reduction failed at step %d: %s" % (err.step, err))
        return EXIT_FAIL
    if args.trace is not None:
        locclab.locclabutil.write_json(trace.to_json(), path=args.trace)
    _emit(reduced.to_json(), args)
    return EXIT_OK

def do_eisert(args, config, tol):
    target = _target(args, tol)
    resource = None
    if args.mu is not None:
        resource = locclab.States.resource_from_mu(args.mu)
    _emit(locclab.Reference.build_eisert(target, resource).to_json(), args)
    return EXIT_OK

def do_epower(args, config, tol):
    target = _target(args, tol)
    starts = args.starts
    if starts is None:
        starts = locclab.locclabutil.config_get_int_key(config, 'epower', 'starts', 16)
    budget = args.budget
    if budget is None:
        budget = locclab.locclabutil.config_get_int_key(config, 'epower', 'budget', 10000)
    result = locclab.Reference.entangling_power(target, budget, starts, args.seed)
    _emit(result.to_json(), args)
    return EXIT_OK

def do_convert(args, config, tol):
    query = locclab.Reference.ConvertibilityQuery.from_json(locclab.locclabutil.load_json(args.query), tol)
    answer = locclab.Reference.known_input_feasible(query)
    _emit(answer, args)
    if answer['feasible']:
        return EXIT_OK
    return EXIT_FAIL

def _search_settings(args, config):
    settings = {}
    for key, getter, default in [('restarts', locclab.locclabutil.config_get_int_key, 8),
                                 ('budget', locclab.locclabutil.config_get_int_key, 20000),
                                 ('seed', locclab.locclabutil.config_get_int_key, 0),
                                 ('jitter', locclab.locclabutil.config_get_float_key, 0.3)]:
        value = getattr(args, key)
        if value is None:
            value = getter(config, 'search', key, default)
        settings[key] = value
    return settings

def do_search(args, config, tol):
    s = _search_settings(args, config)
    result = locclab.Search.optimize(_theta(args), args.rank, s['restarts'],
                                     s['budget'], s['seed'], s['jitter'],
                                     args.cap)
    _emit(result.to_json(), args)
    if args.rank == 2 and result.verified:
        return EXIT_OK
    if args.rank == 3 and result.sub_ebit():
        return EXIT_OK
    return EXIT_FAIL

def do_frontier(args, config, tol):
    s = _search_settings(args, config)
    try:
        caps = [float(c) for c in args.caps.split(',')]
    except ValueError:
        raise locclab.LoccException.StructureException("Could not parse caps '%s'" % (args.caps))
    rows = locclab.Search.entropy_frontier(_theta(args), args.rank, caps,
                                           s['budget'], s['restarts'],
                                           s['seed'], s['jitter'])
    if args.out is not None:
        with open(args.out, 'w') as f:
            locclab.Search.write_frontier_csv(rows, f)
    else:
        locclab.Search.write_frontier_csv(rows, sys.stdout)
    return EXIT_OK

command_dict = {'canon': do_canon,
                'verify': do_verify,
                'reduce': do_reduce,
                'eisert': do_eisert,
                'epower': do_epower,
                'convert': do_convert,
                'search': do_search,
                'frontier': do_frontier,
}

def build_parser():
    """
    Function to build the argument parser with one sub-parser per command.
    """
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--config', help='configuration file')
    common.add_argument('--eps', type=float, help='override both tolerances')
    common.add_argument('--debug', action='store_true', help='print numerical diagnostics')
    common.add_argument('--out', help='write the result here instead of standard output')

    parser = argparse.ArgumentParser(prog='locclab-tool',
                                     description='LOCC implementations of controlled-unitary gates')
    sub = parser.add_subparsers(dest='command')
    sub.required = True

    p = sub.add_parser('canon', parents=[common], help='canonicalize a gate or a resource')
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument('--gate')
    group.add_argument('--state')

    p = sub.add_parser('verify', parents=[common], help='check that a protocol implements a gate')
    p.add_argument('--protocol', required=True)
    p.add_argument('--theta')
    p.add_argument('--gate')
    p.add_argument('--extended', action='store_true', help='also test superposition inputs')

    p = sub.add_parser('reduce', parents=[common], help='reduce a protocol to three turns')
    p.add_argument('--protocol', required=True)
    p.add_argument('--theta', required=True)
    p.add_argument('--budget', type=float)
    p.add_argument('--trace', help='write the reduction trace here')

    p = sub.add_parser('eisert', parents=[common], help='emit the teleportation protocol')
    p.add_argument('--theta')
    p.add_argument('--gate')
    p.add_argument('--mu', type=float)

    p = sub.add_parser('epower', parents=[common], help='compute the entangling power')
    p.add_argument('--theta')
    p.add_argument('--gate')
    p.add_argument('--starts', type=int)
    p.add_argument('--budget', type=int)
    p.add_argument('--seed', type=int, default=0)

    p = sub.add_parser('convert', parents=[common], help='decide a known-input conversion')
    p.add_argument('--query', required=True)

    for name, helptext in [('search', 'search for a protocol numerically'),
                           ('frontier', 'best infidelity per entropy cap')]:
        p = sub.add_parser(name, parents=[common], help=helptext)
        p.add_argument('--theta', required=True)
        p.add_argument('--rank', type=int, choices=[2, 3], default=2)
        p.add_argument('--restarts', type=int)
        p.add_argument('--budget', type=int)
        p.add_argument('--seed', type=int)
        p.add_argument('--jitter', type=float)
        if name == 'frontier':
            p.add_argument('--caps', required=True, help='comma separated entropy caps')
        else:
            p.add_argument('--cap', type=float, help='entropy cap on the resource')
    return parser

def run(argv):
    """
    Function to run one command.  Returns 0 on success, 1 when a check
    fails or a search misses, and 2 on malformed input.
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as err:
        if err.code in (0, None):
            return EXIT_OK
        return EXIT_ERROR

    level = logging.WARNING
    if args.debug:
        level = logging.DEBUG
    logging.basicConfig(level=level, format="%(message)s")

    try:
        config = locclab.locclabutil.parse_config(args.config)
        tol = locclab.locclabutil.tolerance_from_config(config, args.eps)
        return command_dict[args.command](args, config, tol)
    except locclab.LoccException.ReductionException as err:
        logging.error("%s" % (err))
        return EXIT_FAIL
    except locclab.LoccException.LoccException as err:
        logging.error("%s" % (err))
        return EXIT_ERROR
