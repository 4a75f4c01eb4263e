"""Content-only caption machinery: lexicon, templates, vocabulary, prompts.

Captions describe *what* is in an image, never how it is drawn. The style
vocabulary blocklist below is the contract: no caption template may produce
a word from it, and the corpus loader re-checks every caption against it.
"""

import re
from dataclasses import dataclass
from importlib import resources

from .errors import DataError, PreconditionError

# Content classes, index == content_id. Order is part of the corpus format.
CONTENT_NAMES = (
    "circle",
    "square",
    "triangle",
    "star",
    "cross",
    "ring",
    "diamond",
    "hexagon",
)

# Content-only caption templates ({} takes a content noun).
CAPTION_TEMPLATES = (
    "a {}",
    "a {} on a plain background",
    "an image of a {}",
    "a picture of a {}",
    "one {}",
    "a single {} in the middle",
    "a {} shape",
)

# Words that describe rendering style rather than content. Captions must not
# contain any of these; the generator and loader both enforce it.
STYLE_WORD_BLOCKLIST = frozenset(
    {
        "red", "green", "blue", "yellow", "orange", "purple", "pink", "cyan",
        "magenta", "brown", "black", "white", "gray", "grey", "teal", "violet",
        "striped", "stripes", "stripe", "stippled", "stipple", "dotted",
        "spotted", "grainy", "grain", "noisy", "gradient", "shaded", "outline",
        "outlined", "sketch", "sketched", "flat", "textured", "texture",
        "palette", "colorful", "colored", "colour", "coloured", "bright",
        "dark", "light", "pastel", "neon", "painted", "drawn", "style",
        "styled", "jittery", "rough", "smooth", "glossy", "matte",
    }
)

PAD, UNK, BOS, EOS = "[PAD]", "[UNK]", "[BOS]", "[EOS]"

_WORD_RE = re.compile(r"[a-z]+")


def tokenize_words(text: str) -> list[str]:
    """Lowercase word tokenizer; punctuation and digits are separators."""
    return _WORD_RE.findall(text.lower())


class Vocabulary:
    """Fixed word-level vocabulary shared by captions and prompts.

    Ids 0..3 are the special tokens; remaining words are sorted so the
    mapping is reproducible. The vocabulary is a pure function of the
    templates and content lexicon, never of a particular corpus.
    """

    MAX_WORDS = 512

    def __init__(self, extra_words: tuple[str, ...] = ()):
        words = set()
        for template in CAPTION_TEMPLATES:
            words.update(tokenize_words(template.format("")))
        words.update(CONTENT_NAMES)
        words.update(extra_words)
        ordered = [PAD, UNK, BOS, EOS] + sorted(words)
        if len(ordered) > self.MAX_WORDS:
            raise PreconditionError(f"vocabulary exceeds {self.MAX_WORDS} words")
        self.id_of = {w: i for i, w in enumerate(ordered)}
        self.words = ordered

    def __len__(self) -> int:
        return len(self.words)

    @property
    def pad_id(self) -> int:
        return self.id_of[PAD]

    @property
    def unk_id(self) -> int:
        return self.id_of[UNK]

    @property
    def bos_id(self) -> int:
        return self.id_of[BOS]

    @property
    def eos_id(self) -> int:
        return self.id_of[EOS]

    def encode(self, text: str, max_len: int) -> tuple[list[int], list[str]]:
        """Map text to padded ids of length ``max_len``.

        Returns ``(ids, unknown_words)``; unknown words map to [UNK] and are
        reported back to the caller rather than silently swallowed.
        """
        words = tokenize_words(text)
        unknown = [w for w in words if w not in self.id_of]
        ids = [self.id_of.get(w, self.unk_id) for w in words[:max_len]]
        ids += [self.pad_id] * (max_len - len(ids))
        return ids, unknown


def make_caption(content_id: int, template_idx: int) -> str:
    noun = CONTENT_NAMES[content_id]
    return CAPTION_TEMPLATES[template_idx % len(CAPTION_TEMPLATES)].format(noun)


def check_caption_purity(caption: str) -> None:
    bad = sorted(set(tokenize_words(caption)) & STYLE_WORD_BLOCKLIST)
    if bad:
        raise DataError(f"caption contains style vocabulary {bad}: {caption!r}")


@dataclass(frozen=True)
class EvalPrompt:
    content_id: int
    text: str


def load_eval_prompts() -> list[EvalPrompt]:
    """Bundled evaluation prompt set: 52 content prompts over the lexicon."""
    raw = resources.files("styletok").joinpath("data/eval_prompts.tsv").read_text()
    prompts = []
    for line in raw.strip().splitlines():
        cid, text = line.split("\t", 1)
        prompts.append(EvalPrompt(int(cid), text))
    return prompts
