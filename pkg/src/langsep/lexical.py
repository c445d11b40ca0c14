"""Script-aware tokenization and MTLD lexical diversity."""

import unicodedata

MTLD_TTR_THRESHOLD = 0.72

# Scripts written without inter-word spacing; used for the single-token
# fallback in tokenize().
_CONTINUA_RANGES = (
    (0x0E00, 0x0E7F),   # Thai
    (0x0E80, 0x0EFF),   # Lao
    (0x1000, 0x109F),   # Myanmar
    (0x1780, 0x17FF),   # Khmer
    (0x3040, 0x30FF),   # Hiragana, Katakana
    (0x3400, 0x4DBF),   # CJK extension A
    (0x4E00, 0x9FFF),   # CJK unified
    (0xAC00, 0xD7AF),   # Hangul syllables
    (0xF900, 0xFAFF),   # CJK compatibility
)


def _is_continua(ch):
    cp = ord(ch)
    for lo, hi in _CONTINUA_RANGES:
        if lo <= cp <= hi:
            return True
    return False


def _is_separator(ch):
    return ch.isspace() or unicodedata.category(ch).startswith("P")


def _split_words(text):
    tokens = []
    current = []
    for ch in text:
        if _is_separator(ch):
            if current:
                tokens.append("".join(current))
                current = []
        else:
            current.append(ch)
    if current:
        tokens.append("".join(current))
    return tokens


def _expand_continua(token):
    """Split scriptio-continua runs into code points; keep other runs whole."""
    out = []
    current = []
    for ch in token:
        if _is_continua(ch):
            if current:
                out.append("".join(current))
                current = []
            out.append(ch)
        else:
            current.append(ch)
    if current:
        out.append("".join(current))
    return out


def tokenize(text, lang=""):
    """Lowercased whitespace-and-punctuation word split.

    When the whole text collapses into one token that contains
    scriptio-continua script characters (CJK, Thai, Khmer, Lao, Myanmar),
    those script runs fall back to per-code-point tokens, since such text
    carries no separators to split on. The language code is accepted for
    interface symmetry but the heuristic is purely script-based.
    """
    tokens = _split_words(text.lower())
    if len(tokens) == 1:
        token = tokens[0]
        if any(_is_continua(ch) for ch in token):
            return _expand_continua(token)
    return tokens


def _mtld_pass(tokens):
    factors = 0.0
    types = set()
    count = 0
    ttr = 1.0
    for token in tokens:
        count += 1
        types.add(token)
        ttr = len(types) / count
        if ttr <= MTLD_TTR_THRESHOLD:
            factors += 1.0
            types.clear()
            count = 0
            ttr = 1.0
    if count > 0:
        factors += (1.0 - ttr) / (1.0 - MTLD_TTR_THRESHOLD)
    if factors == 0.0:
        # Zero-factor convention: the pass value is the token count.
        return float(len(tokens))
    return len(tokens) / factors


def mtld_score(tokens):
    """Bidirectional MTLD: mean of the forward and reverse factor passes."""
    tokens = list(tokens)
    if not tokens:
        raise ValueError("empty token list")
    return (_mtld_pass(tokens) + _mtld_pass(tokens[::-1])) / 2.0
