"""The fixed English stop-word list used by the text pipeline.

This list is part of the output contract: changing it changes every
derived vocabulary, keyword ranking, and text prototype. It is frozen by
a golden test; append-only edits require bumping that test on purpose.
Only function words belong here, never descriptive vocabulary.
"""

from __future__ import annotations

STOP_WORD_LIST: tuple[str, ...] = (
    "a", "about", "above", "after", "again", "against", "all", "also",
    "although", "always", "am", "among", "an", "and", "any", "are", "as",
    "at", "be", "because", "been", "before", "being", "below", "between",
    "both", "but", "by", "can", "cannot", "could", "did", "do", "does",
    "doing", "down", "during", "each", "either", "few", "for", "from",
    "further", "had", "has", "have", "having", "he", "her", "here", "hers",
    "herself", "him", "himself", "his", "how", "however", "i", "if", "in",
    "into", "is", "it", "its", "itself", "just", "me", "might", "more",
    "most", "must", "my", "myself", "neither", "never", "no", "nor", "not",
    "now", "of", "off", "on", "once", "only", "onto", "or", "other",
    "ought", "our", "ours", "ourselves", "out", "over", "own", "per",
    "rather", "same", "shall", "she", "should", "since", "so", "some",
    "something", "sometimes", "still", "such", "than", "that", "the",
    "their", "theirs", "them", "themselves", "then", "there", "these",
    "they", "this", "those", "through", "to", "too", "under", "until",
    "up", "upon", "us", "very", "via", "was", "we", "well", "were", "what",
    "when", "where", "whether", "which", "while", "who", "whom", "why",
    "will", "with", "within", "without", "would", "yet", "you", "your",
    "yours", "yourself", "yourselves",
)

STOP_WORDS: frozenset[str] = frozenset(STOP_WORD_LIST)
