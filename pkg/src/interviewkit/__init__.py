"""Human-like interview orchestration and post-interview analysis toolkit."""

__version__ = "0.1.0"
