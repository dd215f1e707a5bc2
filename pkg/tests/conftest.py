import base64
import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

from mlpod.authpod.core import Claims, ClientRegistry, Client, Limits, TokenService


SIGNING_KEY = b"0123456789abcdef0123456789abcdef"
EDGE_KEY = b"fedcba9876543210fedcba9876543210"


@pytest.fixture
def signing_key():
    return SIGNING_KEY


@pytest.fixture
def edge_key():
    return EDGE_KEY


def make_registry():
    return ClientRegistry(
        [
            Client("doctor1", "secret", frozenset({"app:access", "model:execute", "data:read", "data:write"})),
            Client("admin", "admin-secret", frozenset({"model:admin", "model:execute", "model:dispatch", "data:read", "data:write", "app:access"})),
            Client("restricted", "r-secret", frozenset({"app:access"})),
            Client(
                "limited",
                "l-secret",
                frozenset({"model:execute", "data:write"}),
                limits=Limits(max_jobs=1, max_input_bytes=1024),
            ),
        ]
    )


@pytest.fixture
def token_service():
    return TokenService(SIGNING_KEY, make_registry())


def claims_with(*scopes, sub="tester", **kwargs):
    """Shortcut for unit tests that sit below the verification layer."""
    return Claims(sub=sub, scopes=frozenset(scopes), iat=0, nbf=0, exp=2**31, **kwargs)


def set_key_env(monkeypatch):
    monkeypatch.setenv("MLPOD_SIGNING_KEY", base64.b64encode(SIGNING_KEY).decode())
    monkeypatch.setenv("MLPOD_EDGE_KEY", base64.b64encode(EDGE_KEY).decode())
