try:
    from .lanefit_ext import *  # noqa: F401,F403
    from .lanefit_ext import __doc__  # noqa: F401
except ImportError:  # extension built next to this package instead of inside it
    from lanefit_ext import *  # noqa: F401,F403
    from lanefit_ext import __doc__  # noqa: F401
