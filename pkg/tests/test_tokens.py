import base64

import pytest
from hypothesis import given, settings, strategies as st

from mlpod.authpod.core import AuthError, encode_token, verify_token

from conftest import SIGNING_KEY


def issue(token_service, scopes={"app:access", "model:execute"}, ttl=3600):
    return token_service.issue_token("doctor1", "secret", set(scopes), ttl)


def test_issue_verify_round_trip(token_service):
    tok = issue(token_service)
    claims = token_service.verify_token(tok, "model:execute")
    assert claims.sub == "doctor1"
    assert claims.scopes == {"app:access", "model:execute"}


def test_wrong_secret_is_invalid_client(token_service):
    with pytest.raises(AuthError) as exc:
        token_service.issue_token("doctor1", "wrong-secret", {"app:access"}, 3600)
    assert exc.value.code == "invalid_client"


def test_unknown_client_same_error_as_bad_secret(token_service):
    with pytest.raises(AuthError) as exc:
        token_service.issue_token("nobody", "secret", {"app:access"}, 3600)
    assert exc.value.code == "invalid_client"


def test_disallowed_scope_is_invalid_scope(token_service):
    with pytest.raises(AuthError) as exc:
        token_service.issue_token("restricted", "r-secret", {"model:admin"}, 3600)
    assert exc.value.code == "invalid_scope"


def test_expired_token_rejected(token_service):
    tok = issue(token_service, ttl=10)
    with pytest.raises(AuthError) as exc:
        token_service.verify_token(tok, now=1e12)
    assert exc.value.code == "expired"


def test_not_yet_valid(signing_key):
    tok = encode_token(
        signing_key,
        {"sub": "x", "scopes": [], "iat": 1000, "nbf": 1000, "exp": 2000},
    )
    with pytest.raises(AuthError) as exc:
        verify_token(signing_key, tok, now=500)
    assert exc.value.code == "not-yet-valid"


def test_missing_scope(token_service):
    tok = issue(token_service, scopes={"app:access"})
    with pytest.raises(AuthError) as exc:
        token_service.verify_token(tok, "model:admin")
    assert exc.value.code == "missing-scope"


def test_network_restriction(signing_key):
    tok = encode_token(
        signing_key,
        {"sub": "x", "scopes": [], "iat": 0, "nbf": 0, "exp": 2**31, "net": ["10.0.0.0/8"]},
    )
    assert verify_token(signing_key, tok, now=10, peer_addr="10.1.2.3")
    with pytest.raises(AuthError) as exc:
        verify_token(signing_key, tok, now=10, peer_addr="192.168.1.1")
    assert exc.value.code == "network-restricted"
    with pytest.raises(AuthError):
        verify_token(signing_key, tok, now=10, peer_addr=None)


def test_tamper_single_payload_byte(token_service):
    tok = issue(token_service)
    head, body, sig = tok.split(".")
    raw = bytearray(base64.urlsafe_b64decode(body + "=" * (-len(body) % 4)))
    raw[0] ^= 0x01
    forged = head + "." + base64.urlsafe_b64encode(bytes(raw)).rstrip(b"=").decode() + "." + sig
    with pytest.raises(AuthError) as exc:
        token_service.verify_token(forged)
    assert exc.value.code == "bad-signature"


@settings(max_examples=200, deadline=None)
@given(bit=st.integers(min_value=0), data=st.data())
def test_tamper_any_bit_fails(bit, data):
    from conftest import make_registry
    from mlpod.authpod.core import TokenService

    service = TokenService(SIGNING_KEY, make_registry())
    scopes = data.draw(
        st.sets(st.sampled_from(["app:access", "model:execute", "data:read"]), min_size=1)
    )
    tok = service.issue_token("doctor1", "secret", scopes, 3600)
    raw = bytearray(tok.encode("ascii"))
    pos = bit % (len(raw) * 8)
    raw[pos // 8] ^= 1 << (pos % 8)
    mutated = raw.decode("ascii", errors="replace")
    if mutated == tok:
        return
    with pytest.raises(AuthError):
        service.verify_token(mutated)


def test_monotone_expiry(token_service):
    tok = issue(token_service, ttl=100)
    claims = token_service.verify_token(tok)
    t_reject = claims.exp
    for t in (t_reject, t_reject + 1, t_reject + 10_000):
        with pytest.raises(AuthError) as exc:
            token_service.verify_token(tok, now=t)
        assert exc.value.code == "expired"


def test_scope_monotonicity(token_service):
    tok = issue(token_service)
    assert token_service.verify_token(tok, "model:execute")
    assert token_service.verify_token(tok, None)


def test_introspect(token_service):
    tok = issue(token_service)
    out = token_service.introspect(tok)
    assert out["active"] and out["claims"]["sub"] == "doctor1"
    expired = issue(token_service, ttl=1)
    assert token_service.introspect("garbage") == {"active": False, "claims": None}
    import time

    out = token_service.introspect(
        encode_token(SIGNING_KEY, {"sub": "x", "scopes": [], "iat": 0, "nbf": 0, "exp": 1})
    )
    assert out["active"] is False
