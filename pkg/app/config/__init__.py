from .settings import LabConfig, apply_overrides, load_config

__all__ = ["LabConfig", "apply_overrides", "load_config"]
