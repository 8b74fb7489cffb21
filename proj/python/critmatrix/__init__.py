"""Fault criticality matrix, traceability queries and platoon simulation.

Thin wrapper over the compiled core: every call returns decoded JSON in the
same shape the command line and the HTTP service produce.
"""

import json

from . import _critmatrix
from ._critmatrix import Error, rank, stopping_distance

__all__ = ["Error", "Session", "fcm", "fcm_csv", "rank", "simulate", "stopping_distance", "unresolved", "validate"]


def validate(project):
    """Raises Error (code ValidationError or ParseError) when the project is invalid."""
    _critmatrix.validate(str(project))


def fcm(project):
    """Matrix document: {"project", "revision", "rows"}."""
    return json.loads(_critmatrix.fcm(str(project), "json"))


def fcm_csv(project):
    return _critmatrix.fcm(str(project), "csv")


def unresolved(project):
    return json.loads(_critmatrix.unresolved(str(project)))["unresolved"]


def simulate(scenario, project=None, include_trace=False):
    """Runs a scenario file. Guard bindings are checked against the project's matrix when one is given."""
    return json.loads(_critmatrix.simulate(str(scenario), None if project is None else str(project), include_trace))


class Session:
    """In-process equivalent of the HTTP service for one project."""

    def __init__(self, project):
        self._session = _critmatrix.Session(str(project))

    @property
    def revision(self):
        return self._session.revision

    def request(self, method, path, body=None):
        """Returns (status, decoded body)."""
        payload = "" if body is None else json.dumps(body)
        status, text, _ = self._session.handle(method, path, payload)
        return status, json.loads(text)

    def get(self, path):
        return self.request("GET", path)

    def post(self, path, body=None):
        return self.request("POST", path, body)

    def delete(self, path, body=None):
        return self.request("DELETE", path, body)
