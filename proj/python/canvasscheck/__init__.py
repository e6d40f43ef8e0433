"""Election-record reconciliation and duplicate-scan forensics.

Thin wrapper over the compiled module: parsers for the canonical record
formats, batch-sheet matching, sequence-run duplicate detection, ballot
accounting, and exact hypergeometric confidence bounds.
"""

from ._canvasscheck import *  # noqa: F401,F403
from ._canvasscheck import __version__  # noqa: F401
