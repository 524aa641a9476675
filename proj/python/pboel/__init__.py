try:
    from ._pboel import *  # noqa: F401,F403  (installed wheel layout)
except ImportError:
    from _pboel import *  # noqa: F401,F403  (build-tree layout)

from ._version import __version__ as __version__
