import os

from services.background_processor import background_processor
from tests.conftest import WORKSPACES


def _source(name):
    with open(os.path.join(WORKSPACES, name), encoding='utf-8') as fh:
        return fh.read()


class TestHealth:
    def test_root_and_health(self, client):
        assert client.get('/').status_code == 200
        response = client.get('/api/health')
        assert response.status_code == 200
        assert response.get_json()['status'] == 'healthy'


class TestKernelRoutes:
    def test_check(self, client):
        response = client.post('/api/kernel/check', json={'source': _source('truth.sexp')})
        assert response.status_code == 200
        body = response.get_json()
        assert body['exit_code'] == 0
        assert body['report']['failures'] == 0

    def test_verdict_failure_is_still_a_report(self, client):
        response = client.post('/api/kernel/check', json={'source': _source('rejected.sexp')})
        assert response.status_code == 200
        assert response.get_json()['exit_code'] == 1

    def test_extended_mode(self, client):
        response = client.post('/api/kernel/check', json={'source': _source('derived.sexp'), 'mode': 'extended'})
        assert response.get_json()['exit_code'] == 0

    def test_missing_source(self, client):
        assert client.post('/api/kernel/check', json={}).status_code == 400

    def test_unknown_command_or_mode(self, client):
        source = _source('truth.sexp')
        assert client.post('/api/kernel/frobnicate', json={'source': source}).status_code == 400
        assert client.post('/api/kernel/check', json={'source': source, 'mode': 'lax'}).status_code == 400

    def test_malformed_source(self, client):
        response = client.post('/api/kernel/check', json={'source': '(sig (ground A)'})
        assert response.status_code == 400
        body = response.get_json()
        assert body['error']['error'] == 'syntax_error'
        assert body['exit_code'] == 2

    def test_bad_projection_index(self, client):
        source = '(sig (ground A)) (term t (proj one (tuple star star)))'
        response = client.post('/api/kernel/eval', json={'source': source})
        assert response.status_code == 400
        assert response.get_json()['error']['error'] == 'arity_error'

    def test_budget_exceeded(self, client):
        response = client.post('/api/kernel/eval', json={'source': _source('model.sexp'), 'budget': 1})
        assert response.status_code == 413
        assert response.get_json()['exit_code'] == 3


class TestJobs:
    def test_queued_job_runs(self, app, client):
        response = client.post('/api/processing/jobs', json={'command': 'check', 'source': _source('truth.sexp')})
        assert response.status_code == 201
        job = response.get_json()['job']
        assert job['status'] == 'pending'

        with app.app_context():
            assert background_processor.process_pending_jobs() == 1

        job = client.get(f"/api/processing/jobs/{job['id']}").get_json()['job']
        assert job['status'] == 'completed'
        assert job['exit_code'] == 0
        assert job['report']['command'] == 'check'

    def test_job_fields_required(self, client):
        assert client.post('/api/processing/jobs', json={'command': 'check'}).status_code == 400

    def test_unknown_job(self, client):
        assert client.get('/api/processing/jobs/no-such-job').status_code == 404
