"""Mine TikTok platform subtitles out of Zeeschuimer/4CAT captures.

The heavy lifting lives in the compiled ``subtext._core`` extension:
NDJSON/CSV ingestion, subtitle track selection, polite cached fetching,
WebVTT parsing and normalization, dataset/corpus export, and coverage
and speech-length reporting.
"""

from subtext._core import *  # noqa: F401,F403
from subtext._core import __version__  # noqa: F401
