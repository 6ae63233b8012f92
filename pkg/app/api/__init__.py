from .commands import build_parser, configure, execute

__all__ = ["build_parser", "configure", "execute"]
