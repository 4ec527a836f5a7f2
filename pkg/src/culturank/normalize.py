"""Tag and term normalization shared by every matcher."""

import re
import unicodedata

_WS = re.compile(r"\s+")


def normalize_term(text):
    """NFKC-fold, lowercase and drop all whitespace.

    >>> normalize_term("Street  Art")
    'streetart'
    """
    return _WS.sub("", unicodedata.normalize("NFKC", text).lower())
