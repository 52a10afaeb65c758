"""Ginzburg-Landau wire solver: spectral constants, normal fields and TDGL runs."""

try:
    from ._glwire import *  # noqa: F401,F403
    from ._glwire import ConfigError, GlwireError, __doc__  # noqa: F401
except ImportError:  # in-tree build: the extension sits next to the package
    from _glwire import *  # noqa: F401,F403
    from _glwire import ConfigError, GlwireError, __doc__  # noqa: F401
