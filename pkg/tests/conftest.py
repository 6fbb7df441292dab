"""Shared fixtures.  The whole suite runs with outbound networking disabled:
every LLM is a mock, and nothing outside the gateway may construct traffic.
"""

from __future__ import annotations

import socket

import pytest

import stagecraft
from stagecraft.script import parse_script


class _NetworkDisabled(RuntimeError):
    pass


@pytest.fixture(autouse=True)
def no_network(monkeypatch):
    """Fail any test that tries to open an outbound connection."""

    def guard(*args, **kwargs):
        raise _NetworkDisabled("outbound networking is disabled in the test suite")

    monkeypatch.setattr(socket.socket, "connect", guard)
    monkeypatch.setattr(socket, "create_connection", guard)


@pytest.fixture(scope="session")
def example_script_text():
    return stagecraft.example_script_text()


@pytest.fixture()
def example_script(example_script_text):
    return parse_script(example_script_text)
