"""Distance-aware ranking engine for image geolocalization."""

try:
    from ._georank import *  # noqa: F401,F403  (installed wheel layout)
except ImportError:
    from _georank import *  # noqa: F401,F403  (in-tree build, .so on PYTHONPATH)

__version__ = "0.1.0"
