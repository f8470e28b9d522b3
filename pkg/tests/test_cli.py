import sys
import os
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..'))

import json

import pytest
import requests

import fns

SETTINGS_FILE = os.path.join(os.path.dirname(__file__), '..', 'storage', 'settings.json')
SHEAR_FILE = os.path.join(os.path.dirname(__file__), '..', 'storage', 'metrics', 'shear.txt')


def run(argv):
    return fns.main(['--config', SETTINGS_FILE] + argv)


def test_eval_counterexample_bracket(capsys):
    """eval prints the normalized field."""
    assert run(['eval', 'gp1(p1*dq1, p1*p2)']) == 0
    assert capsys.readouterr().out.strip() == 'p2 * dp1'


def test_eval_with_metric(capsys):
    """Connection operators use the metric given on the command line."""
    assert run(['eval', 'dg(v1)', '--metric', SHEAR_FILE]) == 0
    assert capsys.readouterr().out.strip() == 'dq1 + q1 * dq2'


def test_eval_syntax_error_exits_2(capsys):
    """Calculus errors are reported on stderr."""
    assert run(['eval', 'd(']) == 2
    assert capsys.readouterr().err.startswith('error:')


def test_verify_single_suite(capsys, tmp_path):
    """verify writes a JSON report and exits 0 when the suite passes."""
    target = tmp_path / 'report.json'
    assert run(['verify', 'T35-5', '--json', str(target)]) == 0
    assert 'Suite T35-5: ok' in capsys.readouterr().out
    document = json.loads(target.read_text())
    assert document['suite'] == 'T35-5' and document['ok'] is True


def test_verify_expected_failure_is_ok(capsys):
    """A suite that finds its counterexample still exits 0."""
    assert run(['verify', 'GP1-JACOBI', '--cases', '1', '--dim', '1', '--deg', '1']) == 0
    out = capsys.readouterr().out
    assert '(expected failure): ok' in out
    assert 'Witness (seed' in out


def test_verify_all_at_default_settings(capsys):
    """Every suite in the catalog succeeds with the shipped settings."""
    assert run(['verify', 'all']) == 0
    out = capsys.readouterr().out
    assert 'FAILED' not in out


def test_verify_unknown_suite(capsys):
    """Unknown suites exit 2."""
    assert run(['verify', 'L99-1']) == 2
    assert 'L99-1' in capsys.readouterr().err


def test_verify_invalid_envelope(capsys):
    """Dimensions above 3 are refused."""
    assert run(['verify', 'L33-1', '--dim', '4']) == 2


def test_verify_posts_reports(monkeypatch):
    """--post sends the batch to the ingest endpoint."""
    sent = {}

    class Response:
        def raise_for_status(self):
            pass

    def fake_post(url, json=None, timeout=None):
        sent['url'], sent['json'] = url, json
        return Response()

    monkeypatch.setattr(requests, 'post', fake_post)
    url = 'http://127.0.0.1:5000/api/reports/ingest'
    assert run(['verify', 'T35-5', '--post', url]) == 0
    assert sent['url'] == url
    assert sent['json']['reports'][0]['suite'] == 'T35-5'


def test_verify_post_failure_is_logged(monkeypatch, caplog):
    """An unreachable API does not change the exit status."""
    def refuse(url, json=None, timeout=None):
        raise requests.exceptions.ConnectionError("refused")

    monkeypatch.setattr(requests, 'post', refuse)
    assert run(['verify', 'T35-5', '--post', 'http://127.0.0.1:9/api/reports/ingest']) == 0
    assert 'Error sending reports' in caplog.text


def test_suites_lists_catalog(capsys):
    """suites prints one line per identity."""
    assert run(['suites']) == 0
    out = capsys.readouterr().out
    assert 'L33-1' in out
    assert 'NB-JACOBI' in out and '[expected failure]' in out


def test_demo_counterexample(capsys):
    """The worked counterexample names the failing check."""
    assert run(['demo', 'counterexample']) == 0
    out = capsys.readouterr().out
    assert '{pb(A), pb(B)}^1 = p2 * dp1' in out
    assert 'horizontal check fails' in out


def test_demo_killing(capsys):
    """Rotations are Killing for the flat metric; q1 ∂1 is not."""
    assert run(['demo', 'killing', '--metric', 'euclidean2', '--tensor', 'q1*v2 - q2*v1']) == 0
    assert capsys.readouterr().out.splitlines()[-1] == 'Killing tensor'
    assert run(['demo', 'killing', '--metric', 'euclidean2', '--tensor', 'q1*v1']) == 0
    out = capsys.readouterr().out
    assert 'D(S) = v1.v1' in out
    assert out.splitlines()[-1] == 'not a Killing tensor'


def test_demo_killing_needs_arguments(capsys):
    """Missing --metric or --tensor is a usage error."""
    assert run(['demo', 'killing']) == 2


def test_parser_requires_command():
    """A subcommand is mandatory."""
    with pytest.raises(SystemExit):
        fns.build_parser().parse_args([])
