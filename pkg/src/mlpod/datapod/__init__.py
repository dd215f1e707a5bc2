from .store import DatapodError, ObjectStore, StoredObject
from .manifest import DatasetManifest, validate_manifest

__all__ = ["DatapodError", "ObjectStore", "StoredObject", "DatasetManifest", "validate_manifest"]
