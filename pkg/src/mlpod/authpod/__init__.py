from .core import (
    ALL_SCOPES,
    AuthError,
    Claims,
    ClientRegistry,
    TokenService,
    service_claims_token,
)

__all__ = [
    "ALL_SCOPES",
    "AuthError",
    "Claims",
    "ClientRegistry",
    "TokenService",
    "service_claims_token",
]
