"""Gradient-boosted competing-risks and survival models.

The heavy lifting lives in the compiled ``_survboost`` extension; this
package re-exports its public surface.
"""

try:
    from survboost._survboost import *  # noqa: F401,F403  (installed layout)
    from survboost import _survboost as _impl
except ImportError:  # build-tree layout: extension next to the sources
    from _survboost import *  # noqa: F401,F403
    import _survboost as _impl

__all__ = [name for name in dir(_impl) if not name.startswith("_")]
__version__ = "0.1.0"
