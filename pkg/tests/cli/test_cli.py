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
    import locclab.cli
    import locclab.Protocol
    import locclab.States
    import locclab.Reference
    import locclab.locclabutil
    import locclab.linalg
except ImportError:
    print('Unable to import locclab.  Is locclab installed?')
    sys.exit(1)

def _path(tmpdir, name):
    return os.path.join(str(tmpdir), name)

def _write(tmpdir, name, obj):
    path = _path(tmpdir, name)
    locclab.locclabutil.write_json(obj, path=path)
    return path

def _padded5(tmpdir):
    # idle Bob turns around the teleportation protocol
    first, second, third = locclab.Reference.eisert_operators(
        locclab.States.ControlledUnitary.canonical(numpy.pi))
    V = locclab.linalg.random_unitary(4, numpy.random.default_rng(3))
    turns = [locclab.Protocol.Turn(locclab.Protocol.BOB, {(): [V]}),
             locclab.Protocol.Turn(locclab.Protocol.ALICE, {(0,): first}),
             locclab.Protocol.Turn(locclab.Protocol.BOB,
                                   dict(((0, a), [op.dot(V.conj().T) for op in second[a]])
                                        for a in range(len(first)))),
             locclab.Protocol.Turn(locclab.Protocol.ALICE,
                                   dict(((0, a, b), [third[a][b]])
                                        for a in range(len(first)) for b in range(len(second[a])))),
             locclab.Protocol.Turn(locclab.Protocol.BOB,
                                   dict(((0, a, b, 0), [numpy.eye(2)])
                                        for a in range(len(first)) for b in range(len(second[a]))))]
    path = _path(tmpdir, 'padded5.json')
    locclab.Protocol.save_protocol(locclab.Protocol.LoccProtocol(turns, locclab.States.resource_from_mu(0.5)), path)
    return path

# end to end
def test_eisert_then_verify(tmpdir):
    out = _path(tmpdir, 'p.json')
    assert locclab.cli.run(['eisert', '--theta', 'pi', '--out', out]) == 0
    assert locclab.cli.run(['verify', '--protocol', out, '--theta', 'pi']) == 0

def test_verify_report(tmpdir, capsys):
    out = _path(tmpdir, 'p.json')
    locclab.cli.run(['eisert', '--theta', 'pi/4', '--out', out])
    capsys.readouterr()
    assert locclab.cli.run(['verify', '--protocol', out, '--theta', 'pi/4', '--extended']) == 0
    report = json.loads(capsys.readouterr().out)
    assert report['pass'] is True
    assert report['violations'] == []
    assert report['block_violations'] == []
    assert report['extended'] is True

def test_verify_extended_config(tmpdir, capsys):
    out = _path(tmpdir, 'p.json')
    locclab.cli.run(['eisert', '--theta', 'pi/4', '--out', out])
    config = _path(tmpdir, 'locclab.cfg')
    open(config, 'w').write('[verify]\nextended = yes\n')
    capsys.readouterr()
    assert locclab.cli.run(['verify', '--protocol', out, '--theta', 'pi/4', '--config', config]) == 0
    assert json.loads(capsys.readouterr().out)['extended'] is True
    open(config, 'w').write('[verify]\nextended = No\n')
    assert locclab.cli.run(['verify', '--protocol', out, '--theta', 'pi/4', '--config', config]) == 0
    assert json.loads(capsys.readouterr().out)['extended'] is False

def test_verify_extended_config_bad(tmpdir):
    out = _path(tmpdir, 'p.json')
    locclab.cli.run(['eisert', '--theta', 'pi', '--out', out])
    config = _path(tmpdir, 'locclab.cfg')
    open(config, 'w').write('[verify]\nextended = perhaps\n')
    assert locclab.cli.run(['verify', '--protocol', out, '--theta', 'pi', '--config', config]) == 2

def test_verify_identity_fails(tmpdir):
    path = _path(tmpdir, 'identity3.json')
    locclab.Protocol.save_protocol(locclab.Protocol.identity_protocol(3, locclab.States.resource_from_mu(0.5)), path)
    assert locclab.cli.run(['verify', '--protocol', path, '--theta', 'pi/2']) == 1

def test_verify_with_gate_file(tmpdir):
    gate = locclab.States.ControlledUnitary.canonical(numpy.pi / 3)
    gate_path = _write(tmpdir, 'gate.json', gate.to_json())
    out = _path(tmpdir, 'p.json')
    assert locclab.cli.run(['eisert', '--gate', gate_path, '--out', out]) == 0
    assert locclab.cli.run(['verify', '--protocol', out, '--gate', gate_path]) == 0

def test_reduce_padded(tmpdir):
    out = _path(tmpdir, 'reduced.json')
    trace = _path(tmpdir, 'trace.json')
    assert locclab.cli.run(['reduce', '--protocol', _padded5(tmpdir), '--theta', 'pi',
                            '--out', out, '--trace', trace]) == 0
    assert locclab.Protocol.load_protocol(out).depth() == 3
    assert len(locclab.locclabutil.load_json(trace)) == 2
    assert locclab.cli.run(['verify', '--protocol', out, '--theta', 'pi']) == 0

def test_reduce_wrong_theta(tmpdir):
    assert locclab.cli.run(['reduce', '--protocol', _padded5(tmpdir), '--theta', 'pi/2']) == 1

# argument errors
def test_unknown_flag():
    assert locclab.cli.run(['verify', '--bogus']) == 2

def test_no_command():
    assert locclab.cli.run([]) == 2

def test_help():
    assert locclab.cli.run(['--help']) == 0

def test_bad_theta(tmpdir):
    out = _path(tmpdir, 'p.json')
    assert locclab.cli.run(['eisert', '--theta', 'tau/2', '--out', out]) == 2

def test_missing_file(tmpdir):
    assert locclab.cli.run(['verify', '--protocol', _path(tmpdir, 'nothere.json'), '--theta', 'pi']) == 2

def test_eps_too_loose(tmpdir):
    out = _path(tmpdir, 'p.json')
    assert locclab.cli.run(['eisert', '--theta', 'pi', '--eps', '1e-3', '--out', out]) == 2

# canon
def test_canon_gate(tmpdir, capsys):
    raw = {'form': 'raw', 'matrix': locclab.linalg.matrix_to_json(numpy.diag([1, 1, 1, -1]))}
    assert locclab.cli.run(['canon', '--gate', _write(tmpdir, 'cz.json', raw)]) == 0
    obj = json.loads(capsys.readouterr().out)
    assert abs(abs(obj['theta']) - numpy.pi) < 1e-9
    assert obj['degenerate'] is False

def test_canon_state(tmpdir, capsys):
    state = locclab.States.resource_from_mu(0.7)
    assert locclab.cli.run(['canon', '--state', _write(tmpdir, 'r.json', state.to_json())]) == 0
    obj = json.loads(capsys.readouterr().out)
    assert abs(obj['mu'] - 0.7) < 1e-12
    assert obj['schmidt_number'] == 2

def test_canon_needs_input():
    assert locclab.cli.run(['canon']) == 2

# reference commands
def test_epower(capsys):
    assert locclab.cli.run(['epower', '--theta', 'pi', '--starts', '4', '--budget', '4000']) == 0
    obj = json.loads(capsys.readouterr().out)
    assert obj['entangling_power'] > 0.99

def test_convert(tmpdir):
    query = {'input': locclab.States.product_state([1, 1], [1, 1]).to_json(),
             'gate': locclab.States.ControlledUnitary.canonical(numpy.pi).to_json(),
             'resource': {'mu': 0.5}}
    assert locclab.cli.run(['convert', '--query', _write(tmpdir, 'q.json', query)]) == 0
    query['resource'] = {'mu': 0.9}
    assert locclab.cli.run(['convert', '--query', _write(tmpdir, 'q2.json', query)]) == 1

# search commands
def test_search_zero_budget(capsys):
    # the first start is jittered away from the exact protocol
    assert locclab.cli.run(['search', '--theta', 'pi', '--budget', '0']) == 1
    obj = json.loads(capsys.readouterr().out)
    assert obj['verified'] is False
    assert obj['trace'][0]['start'] == 'jittered'
    assert obj['trace'][0]['start_infidelity'] > 0

def test_search_config(tmpdir, capsys):
    config = _path(tmpdir, 'locclab.cfg')
    open(config, 'w').write('[search]\nbudget = 0\nrestarts = 1\njitter = 0.05\n')
    locclab.cli.run(['search', '--theta', 'pi/2', '--config', config])
    obj = json.loads(capsys.readouterr().out)
    assert len(obj['trace']) == 1
    assert obj['trace'][0]['evaluations'] == 1

def test_search_cap(capsys):
    assert locclab.cli.run(['search', '--theta', 'pi', '--budget', '0', '--cap', '0.5']) == 1
    obj = json.loads(capsys.readouterr().out)
    assert obj['resource_entropy'] <= 0.5 + 1e-9

def test_frontier(tmpdir):
    out = _path(tmpdir, 'frontier.csv')
    assert locclab.cli.run(['frontier', '--theta', 'pi', '--caps', '1.0', '--budget', '0', '--out', out]) == 0
    lines = open(out).read().splitlines()
    assert lines[0] == 'entropy_cap,infidelity'
    assert len(lines) == 2

def test_frontier_bad_caps():
    assert locclab.cli.run(['frontier', '--theta', 'pi', '--caps', 'half']) == 2
