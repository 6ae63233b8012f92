from .recorder import MANIFEST_NAME, RunManifest, RunRecorder, canonical_json, config_hash

__all__ = ["MANIFEST_NAME", "RunManifest", "RunRecorder", "canonical_json", "config_hash"]
