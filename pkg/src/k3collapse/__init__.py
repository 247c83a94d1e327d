"""Desk-scale geometry of collapsing K3 surfaces.

Subpackages cover exact lattice arithmetic (boundary strata of the
compactified moduli space), monodromy degeneration types, elliptic-fibration
periods and the induced base metric, finite metric spaces with
Gromov-Hausdorff estimates, and the collapse map tying them together.
"""

__version__ = "0.1.0"

from ._accel import BACKEND, HAVE_EXT  # noqa: F401
