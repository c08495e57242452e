"""Per-token feature extraction and window-template expansion.

The observation features fed to the CRF come in two steps: a per-token
feature row (morphological flags, regex matchers, lexicon hits, optional
pass-through annotation columns) and the expansion of those rows through
the 14 window templates over positions -2..+2.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional

from .corpus import Sequence, Token

DATA_DIR = Path(__file__).parent / "data"

BOS = "_BOS_"
EOS = "_EOS_"

# Window templates, identified T00..T13.  Unigrams first, then pairs and
# triples; T05 is the (-1, 0) conjunction.
TEMPLATES: tuple["Template", ...]


@dataclass(frozen=True)
class Template:
    tid: str
    offsets: tuple[int, ...]

    def __post_init__(self):
        if not 1 <= len(self.offsets) <= 3:
            raise ValueError(f"template {self.tid}: arity {len(self.offsets)}")
        if any(o < -2 or o > 2 for o in self.offsets):
            raise ValueError(f"template {self.tid}: offset out of range")


TEMPLATES = tuple(
    Template(f"T{i:02d}", offs)
    for i, offs in enumerate([
        (0,), (-1,), (-2,), (1,), (2,),
        (-1, 0), (-2, -1), (0, 1), (1, 2), (-1, 1), (-2, 2),
        (-1, 0, 1), (0, 1, 2), (-2, -1, 0),
    ])
)


def load_wordlist(path) -> frozenset[str]:
    words = set()
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        line = line.strip().lower()
        if line and not line.startswith("#"):
            words.add(line)
    return frozenset(words)


class Lexicons:
    """Editable word lists backing the regex-matcher features."""

    NAMES = ("weekdays", "months", "seasons", "periods_of_day", "past_refs",
             "present_refs", "future_refs", "temporal_signals",
             "fuzzy_quantifiers", "modifiers", "temporal_adverbs",
             "stopwords", "prepositions", "conjunctions")

    def __init__(self, directory=None):
        directory = Path(directory) if directory else DATA_DIR / "lexicons"
        for name in self.NAMES:
            setattr(self, name, load_wordlist(directory / f"{name}.txt"))


_DEFAULT_LEXICONS: Optional[Lexicons] = None


def default_lexicons() -> Lexicons:
    global _DEFAULT_LEXICONS
    if _DEFAULT_LEXICONS is None:
        _DEFAULT_LEXICONS = Lexicons()
    return _DEFAULT_LEXICONS


@dataclass(frozen=True)
class Gazetteer:
    name: str
    phrases: frozenset[tuple[str, ...]]

    @classmethod
    def load(cls, name: str, path) -> "Gazetteer":
        phrases = set()
        for phrase in load_wordlist(path):
            parts = tuple(phrase.split())
            if parts:
                phrases.add(parts)
        return cls(name, frozenset(phrases))


def default_gazetteers(directory=None) -> list[Gazetteer]:
    directory = Path(directory) if directory else DATA_DIR / "gazetteers"
    return [Gazetteer.load(p.stem, p) for p in sorted(directory.glob("*.txt"))]


def match_gazetteer(seq: Sequence, gaz: Gazetteer) -> list[str]:
    """Leftmost-longest case-insensitive phrase matching, BIO-encoded."""
    words = [t.surface.lower() for t in seq.tokens]
    if not gaz.phrases:
        return ["O"] * len(words)
    max_len = max(len(p) for p in gaz.phrases)
    labels = ["O"] * len(words)
    i = 0
    while i < len(words):
        best = 0
        for n in range(min(max_len, len(words) - i), 0, -1):
            if tuple(words[i:i + n]) in gaz.phrases:
                best = n
                break
        if best:
            labels[i] = "B"
            for j in range(i + 1, i + best):
                labels[j] = "I"
            i += best
        else:
            i += 1
    return labels


def pattern(surface: str) -> str:
    """Character-class pattern: 'Jan-2003' -> 'Xxx-dddd'."""
    out = []
    for c in surface:
        if c.isupper():
            out.append("X")
        elif c.islower():
            out.append("x")
        elif c.isdigit():
            out.append("d")
        else:
            out.append(c)
    return "".join(out)


def collapsed_pattern(surface: str) -> str:
    """pattern() with runs of one class collapsed: 'Jan-2003' -> 'Xx-d'."""
    pat = pattern(surface)
    out = []
    for c in pat:
        if not out or out[-1] != c:
            out.append(c)
    return "".join(out)


_STEM_SUFFIXES = ("ations", "ation", "ings", "ies", "ing", "eed", "ed",
                  "est", "ers", "er", "es", "ly", "s")


def stem(word: str) -> str:
    """Deterministic suffix-stripping stemmer (longest suffix first,
    stripped once, stem kept at >= 3 characters)."""
    w = word.lower()
    for suf in _STEM_SUFFIXES:
        if w.endswith(suf) and len(w) - len(suf) >= 3:
            return w[:-len(suf)]
    return w


_RE_CARDINAL_DIGITS = re.compile(r"\d+")
_RE_ORDINAL_DIGITS = re.compile(r"\d+(st|nd|rd|th)")
_RE_TIME = re.compile(r"\d{1,2}(:\d{2}){1,2}|\d{1,2}(am|pm|h)")
_RE_DATE = re.compile(
    r"\d{4}|\d{1,2}[-/]\d{1,2}[-/]\d{2,4}|\d{4}[-/]\d{1,2}([-/]\d{1,2})?"
    r"|[a-z]{3,9}-\d{2,4}", re.IGNORECASE)
_RE_DECIMAL = re.compile(r"\d+\.\d+")
_RE_NUM_DOTS = re.compile(r"\d+(\.\d+)+")
_RE_ACRONYM = re.compile(r"([A-Z]\.)+[A-Z]?")
_ADJ_SUFFIXES = ("al", "ive", "ous", "ful", "ic", "able", "ible", "ish",
                 "less", "ary")

CARDINAL_WORDS = frozenset("""
zero one two three four five six seven eight nine ten eleven twelve
thirteen fourteen fifteen sixteen seventeen eighteen nineteen twenty
thirty forty fifty sixty seventy eighty ninety hundred thousand million
billion""".split())

ORDINAL_WORDS = frozenset("""
first second third fourth fifth sixth seventh eighth ninth tenth
eleventh twelfth twentieth thirtieth fortieth fiftieth hundredth""".split())

_PENN_TENSE = {
    "VB": "base", "VBP": "present", "VBZ": "present", "VBD": "past",
    "VBG": "gerund", "VBN": "participle", "MD": "modal",
}

_BOOL = {True: "y", False: "n"}

#: Per-token feature names, in emission order.
MORPHOLOGICAL_FEATURES = (
    "word", "lemma", "stem", "pattern", "collapsed_pattern",
    "prefix3", "suffix3", "upper_first", "ends_with_s",
    "no_letters", "no_letters_digits", "verb_tense",
    "lower", "alphabetic", "digit", "alphanumeric", "titled",
    "capitalized", "acronym", "number", "decimal_number",
    "number_with_dots", "stopword",
    "cardinal", "ordinal", "time", "date", "period_of_day", "weekday",
    "season", "past_ref", "present_ref", "future_ref", "temporal_signal",
    "fuzzy_quantifier", "modifier", "temporal_adverb", "adjective_suffix",
    "conjunction", "preposition",
)

REGEX_FLAG_FEATURES = MORPHOLOGICAL_FEATURES[23:]

SYNTACTIC_FEATURES = ("pos", "chunk", "pnp")


def token_features(tok: Token, lex: Lexicons) -> dict[str, str]:
    w = tok.surface
    low = w.lower()
    full = re.fullmatch
    row = {
        "word": w,
        "lemma": tok.lemma if tok.lemma else low,
        "stem": stem(w),
        "pattern": pattern(w),
        "collapsed_pattern": collapsed_pattern(w),
        "prefix3": w[:3],
        "suffix3": w[-3:],
        "upper_first": _BOOL[w[0].isupper()],
        "ends_with_s": _BOOL[low.endswith("s")],
        "no_letters": re.sub(r"[A-Za-z]", "", w) or "_",
        "no_letters_digits": re.sub(r"[A-Za-z0-9]", "", w) or "_",
        "verb_tense": _PENN_TENSE.get(tok.pos or "", "_"),
        "lower": _BOOL[w.islower()],
        "alphabetic": _BOOL[w.isalpha()],
        "digit": _BOOL[w.isdigit()],
        "alphanumeric": _BOOL[w.isalnum()],
        "titled": _BOOL[w.istitle()],
        "capitalized": _BOOL[w[0].isupper() and w.isalpha()],
        "acronym": _BOOL[bool(full(_RE_ACRONYM, w))],
        "number": _BOOL[w.isdigit() or low in CARDINAL_WORDS],
        "decimal_number": _BOOL[bool(full(_RE_DECIMAL, w))],
        "number_with_dots": _BOOL[bool(full(_RE_NUM_DOTS, w))],
        "stopword": _BOOL[low in lex.stopwords],
        "cardinal": _BOOL[bool(full(_RE_CARDINAL_DIGITS, w))
                          or low in CARDINAL_WORDS],
        "ordinal": _BOOL[bool(full(_RE_ORDINAL_DIGITS, low))
                         or low in ORDINAL_WORDS],
        "time": _BOOL[bool(full(_RE_TIME, low))],
        "date": _BOOL[bool(full(_RE_DATE, low))
                      or low in lex.months],
        "period_of_day": _BOOL[low in lex.periods_of_day],
        "weekday": _BOOL[low in lex.weekdays],
        "season": _BOOL[low in lex.seasons],
        "past_ref": _BOOL[low in lex.past_refs],
        "present_ref": _BOOL[low in lex.present_refs],
        "future_ref": _BOOL[low in lex.future_refs],
        "temporal_signal": _BOOL[low in lex.temporal_signals],
        "fuzzy_quantifier": _BOOL[low in lex.fuzzy_quantifiers],
        "modifier": _BOOL[low in lex.modifiers],
        "temporal_adverb": _BOOL[low in lex.temporal_adverbs],
        "adjective_suffix": _BOOL[low.endswith(_ADJ_SUFFIXES)],
        "conjunction": _BOOL[low in lex.conjunctions],
        "preposition": _BOOL[low in lex.prepositions],
    }
    return row


def extract_morphological(seq: Sequence, lex: Optional[Lexicons] = None
                          ) -> list[dict[str, str]]:
    """One feature row per token (morphological catalog only)."""
    lex = lex or default_lexicons()
    return [token_features(tok, lex) for tok in seq.tokens]


@dataclass(frozen=True)
class FeatureConfig:
    """Which per-token features exist and which feed the conjunction
    templates.  Model profiles differ only here."""
    profile: str = "model1"
    unigram_features: tuple[str, ...] = MORPHOLOGICAL_FEATURES
    conjunction_features: tuple[str, ...] = (
        ("word", "pattern") + REGEX_FLAG_FEATURES)
    use_syntax: bool = False
    use_gazetteers: bool = False
    use_wordnet: bool = False


def profile_config(profile: str) -> FeatureConfig:
    """The four model profiles: morphological only, + syntax, + gazetteers,
    + gazetteers + wordnet pass-through columns."""
    if profile == "model1":
        return FeatureConfig(profile=profile)
    if profile == "model2":
        return FeatureConfig(
            profile=profile,
            unigram_features=MORPHOLOGICAL_FEATURES + SYNTACTIC_FEATURES,
            use_syntax=True)
    if profile == "model3":
        return FeatureConfig(profile=profile, use_gazetteers=True)
    if profile == "model4":
        return FeatureConfig(profile=profile, use_gazetteers=True,
                             use_wordnet=True)
    raise ValueError(f"unknown model profile {profile!r}")


def extract_rows(seq: Sequence, config: FeatureConfig,
                 lex: Optional[Lexicons] = None,
                 gazetteers: Optional[Iterable[Gazetteer]] = None
                 ) -> list[dict[str, str]]:
    """Full feature rows for a sequence under a model profile."""
    lex = lex or default_lexicons()
    rows = extract_morphological(seq, lex)
    if config.use_syntax:
        for row, tok in zip(rows, seq.tokens):
            row["pos"] = tok.pos or "_"
            row["chunk"] = tok.chunk or "_"
            row["pnp"] = tok.pnp or "_"
    if config.use_gazetteers:
        for gaz in (gazetteers if gazetteers is not None
                    else default_gazetteers()):
            labels = match_gazetteer(seq, gaz)
            for row, lab in zip(rows, labels):
                row[f"gaz_{gaz.name}"] = lab
    return rows


def expansion_feature_names(config: FeatureConfig,
                            gazetteers: Optional[Iterable[Gazetteer]] = None
                            ) -> tuple[tuple[str, ...], tuple[str, ...]]:
    """(unigram names, conjunction names) actually expanded for a profile."""
    unigram = list(config.unigram_features)
    if config.use_gazetteers:
        gaz = (gazetteers if gazetteers is not None else default_gazetteers())
        unigram += [f"gaz_{g.name}" for g in gaz]
    return tuple(unigram), config.conjunction_features


def expand_templates(rows: list[dict[str, str]],
                     templates: Iterable[Template] = TEMPLATES,
                     unigram_features: Iterable[str] = MORPHOLOGICAL_FEATURES,
                     conjunction_features: Iterable[str] = (
                         ("word", "pattern") + REGEX_FLAG_FEATURES),
                     ) -> list[list[str]]:
    """Expand per-token rows into observation feature strings.

    For position p, template t and feature name f the emitted string is
    ``tid:f[o1]=v1|f[o2]=v2...``.  Out-of-range offsets read the _BOS_ /
    _EOS_ sentinels, so every position gets the same number of strings.
    """
    unigram_features = tuple(unigram_features)
    conjunction_features = tuple(conjunction_features)
    n = len(rows)

    def value(p, name):
        if p < 0:
            return BOS
        if p >= n:
            return EOS
        return rows[p].get(name, "_")

    out = []
    for p in range(n):
        feats = []
        for t in templates:
            names = (unigram_features if len(t.offsets) == 1
                     else conjunction_features)
            for f in names:
                parts = "|".join(
                    f"{f}[{o:+d}]={value(p + o, f)}".replace("[+0]", "[0]")
                    for o in t.offsets)
                feats.append(f"{t.tid}:{parts}")
        out.append(feats)
    return out


def featurize_sequence(seq: Sequence, config: FeatureConfig,
                       lex: Optional[Lexicons] = None,
                       gazetteers: Optional[Iterable[Gazetteer]] = None
                       ) -> list[list[str]]:
    """Rows + template expansion in one call (the CRF input)."""
    rows = extract_rows(seq, config, lex, gazetteers)
    unigram, conj = expansion_feature_names(config, gazetteers)
    return expand_templates(rows, TEMPLATES, unigram, conj)
