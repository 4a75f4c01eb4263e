"""Synthetic style-labeled corpus: generation, manifest I/O, retrieval.

Style and content are exact, disentangled ground-truth factors here. A style
is a rendering recipe (palette + texture + stroke jitter) applied to simple
content shapes; captions are templated from a content lexicon and never
mention style. That makes decoupling probes possible that real data cannot
support.

Manifest format (external interface): a UTF-8 text file, one header line of
tab-separated ``key=value`` pairs (num_styles, num_contents, image_size,
seed, version, min_per_style, max_per_style), then one record per line::

    relative_path <TAB> style_id or "-" <TAB> content_id <TAB> split <TAB> caption

Images are 8-bit RGB PNG. Generation is deterministic: each image draws from
its own seed derived from (corpus seed, record index), so records could be
rendered in parallel without changing a single byte of output.
"""

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from PIL import Image

from .config import GeneratorConfig
from .errors import DataError, PreconditionError
from .text import (
    CONTENT_NAMES,
    check_caption_purity,
    make_caption,
    tokenize_words,
    STYLE_WORD_BLOCKLIST,
)
from .utils import derive_seed, rng_for, sha256_file, to_float01

GENERATOR_VERSION = "styletok-corpus-1"
TEXTURE_KINDS = ("flat", "stripes", "noise_grain", "stippled", "gradient", "outline_only")
SPLITS = ("train", "val")


@dataclass(frozen=True)
class StyleRecipe:
    """Deterministic rendering recipe for one style category."""

    style_id: int
    palette: tuple  # (background, accent, foreground), each an RGB 3-tuple in [0,1]
    texture_kind: str
    texture_params: dict
    stroke_jitter: float  # boundary noise amplitude, pixels

    def key(self) -> tuple:
        return (self.palette, self.texture_kind, tuple(sorted(self.texture_params.items())), self.stroke_jitter)


@dataclass
class StyleImage:
    """One in-memory corpus record."""

    image: np.ndarray  # H x W x 3 float in [0, 1]
    style_id: int | None
    content_id: int
    caption: str
    split: str = "train"


@dataclass(frozen=True)
class ManifestRecord:
    path: str
    style_id: int | None
    content_id: int
    split: str
    caption: str


@dataclass
class CorpusManifest:
    root: Path
    records: list
    num_styles: int
    num_contents: int
    image_size: int
    seed: int
    generator_version: str
    min_per_style: int
    max_per_style: int
    manifest_path: Path = None

    @property
    def num_unlabeled(self) -> int:
        return sum(1 for r in self.records if r.style_id is None)

    def split_records(self, split: str) -> list:
        return [r for r in self.records if r.split == split]

    def style_ids(self, split: str | None = None) -> list:
        recs = self.records if split is None else self.split_records(split)
        return sorted({r.style_id for r in recs if r.style_id is not None})

    def load_image(self, record: ManifestRecord) -> np.ndarray:
        return load_image(self.root / record.path)

    def load_style_image(self, record: ManifestRecord) -> StyleImage:
        return StyleImage(
            image=self.load_image(record),
            style_id=record.style_id,
            content_id=record.content_id,
            caption=record.caption,
            split=record.split,
        )

    def content_hash(self) -> str:
        return sha256_file(self.manifest_path)


# ---------------------------------------------------------------------------
# Style recipes


def _hsv_to_rgb(h: float, s: float, v: float) -> tuple:
    h = h % 1.0
    i = int(h * 6.0)
    f = h * 6.0 - i
    p, q, t = v * (1 - s), v * (1 - s * f), v * (1 - s * (1 - f))
    rgb = [(v, t, p), (q, v, p), (p, v, t), (p, q, v), (t, p, v), (v, p, q)][i % 6]
    return tuple(round(c, 6) for c in rgb)


def recipe_for_style(style_id: int, corpus_seed: int) -> StyleRecipe:
    """Recipe is a pure function of (style id, corpus seed).

    Background hues follow a golden-angle sequence so any two styles get
    visibly distinct palettes; texture kinds cycle so every kind occurs in
    both low and high style ids (and therefore in train and holdout splits).
    """
    rng = rng_for(corpus_seed, "recipe", style_id)
    hue = (0.11 + style_id * 0.618033988749895) % 1.0
    bg_v = float(rng.uniform(0.45, 0.9))
    bg = _hsv_to_rgb(hue, float(rng.uniform(0.55, 0.95)), bg_v)
    accent = _hsv_to_rgb(hue + float(rng.uniform(0.07, 0.16)), float(rng.uniform(0.4, 0.9)),
                         min(1.0, max(0.1, bg_v + float(rng.choice((-0.3, 0.3))))))
    fg_v = float(rng.uniform(0.15, 0.35)) if bg_v > 0.62 else float(rng.uniform(0.82, 1.0))
    fg = _hsv_to_rgb(hue + 0.5 + float(rng.uniform(-0.08, 0.08)), float(rng.uniform(0.6, 1.0)), fg_v)
    kind = TEXTURE_KINDS[style_id % len(TEXTURE_KINDS)]
    params: dict = {}
    if kind == "stripes":
        params = {"freq": float(rng.uniform(3.0, 7.0)), "angle": float(rng.uniform(0, math.pi))}
    elif kind == "noise_grain":
        params = {"amp": float(rng.uniform(0.25, 0.55)), "cell": int(rng.integers(1, 3))}
    elif kind == "stippled":
        params = {"density": float(rng.uniform(0.12, 0.3)), "cell": int(rng.integers(2, 4))}
    elif kind == "gradient":
        params = {"angle": float(rng.uniform(0, 2 * math.pi))}
    elif kind == "outline_only":
        params = {"width": float(rng.uniform(0.08, 0.16))}
    jitter = float(rng.uniform(0.0, 2.0)) if kind != "outline_only" else float(rng.uniform(0.0, 1.0))
    return StyleRecipe(style_id, (bg, accent, fg), kind, params, round(jitter, 4))


# ---------------------------------------------------------------------------
# Rendering


def _coarse_noise(rng: np.random.Generator, size: int, cell: int) -> np.ndarray:
    """Smooth noise in [-1,1]: coarse grid, bilinear upsample."""
    c = max(2, size // max(1, cell) // 4)
    grid = rng.uniform(-1.0, 1.0, size=(c, c))
    # bilinear upsample to size x size
    src = np.linspace(0, c - 1, size)
    i0 = np.clip(np.floor(src).astype(int), 0, c - 2)
    frac = src - i0
    rows = grid[i0, :] * (1 - frac)[:, None] + grid[i0 + 1, :] * frac[:, None]
    out = rows[:, i0] * (1 - frac)[None, :] + rows[:, i0 + 1] * frac[None, :]
    return out.astype(np.float32)


def _shape_distance(content: str, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Signed distance-like field; negative inside the unit-size shape."""
    if content == "circle":
        return np.hypot(x, y) - 1.0
    if content == "square":
        return np.maximum(np.abs(x), np.abs(y)) - 1.0
    if content == "diamond":
        return np.abs(x) + np.abs(y) - 1.0
    if content == "ring":
        r = np.hypot(x, y)
        return np.maximum(r - 1.0, 0.55 - r)
    if content == "cross":
        w = 0.34
        bar_h = np.maximum(np.abs(x) - 1.0, np.abs(y) - w)
        bar_v = np.maximum(np.abs(x) - w, np.abs(y) - 1.0)
        return np.minimum(bar_h, bar_v)
    if content == "triangle":
        # equilateral, apex up, inscribed in unit radius
        k = math.sqrt(3.0)
        d1 = -y - 0.5
        d2 = (k * x + y) / 2.0 - 0.5
        d3 = (-k * x + y) / 2.0 - 0.5
        return np.maximum(np.maximum(d1, d2), d3)
    if content == "hexagon":
        k = math.sqrt(3.0) / 2.0
        ax, ay = np.abs(x), np.abs(y)
        return np.maximum(ax * k + ay * 0.5, ay) - 0.92
    if content == "star":
        r = np.hypot(x, y)
        phi = np.arctan2(y, x)
        # 5-point star: radius threshold oscillates between inner and outer radius
        saw = np.abs(((phi * 5.0 / (2 * math.pi)) % 1.0) - 0.5) * 2.0
        radius = 0.42 + (1.0 - 0.42) * saw
        return r - radius
    raise PreconditionError(f"unknown content shape {content!r}")


def _texture(recipe: StyleRecipe, size: int, rng: np.random.Generator) -> np.ndarray:
    bg, accent, _ = (np.array(c, dtype=np.float32) for c in recipe.palette)
    ys, xs = np.mgrid[0:size, 0:size].astype(np.float32)
    X = xs / (size - 1) * 2.0 - 1.0
    Y = ys / (size - 1) * 2.0 - 1.0
    kind, params = recipe.texture_kind, recipe.texture_params
    if kind in ("flat", "outline_only"):
        mix = np.zeros((size, size), dtype=np.float32)
    elif kind == "stripes":
        theta = params["angle"] + rng.uniform(-0.15, 0.15)
        phase = rng.uniform(0.0, 1.0)
        coord = (math.cos(theta) * X + math.sin(theta) * Y) * params["freq"] / 2.0 + phase
        mix = (np.floor(coord) % 2).astype(np.float32)
    elif kind == "noise_grain":
        n = rng.standard_normal((size, size)).astype(np.float32)
        if params["cell"] > 1:
            c = params["cell"]
            n = n[: size - size % c, : size - size % c]
            n = n.reshape(size // c, c, size // c, c).mean(axis=(1, 3))
            n = np.kron(n, np.ones((c, c), dtype=np.float32))[:size, :size]
        mix = np.clip(0.5 + params["amp"] * n, 0.0, 1.0)
    elif kind == "stippled":
        c = params["cell"]
        coarse = rng.random((size // c + 1, size // c + 1)) < params["density"]
        mix = np.kron(coarse, np.ones((c, c)))[:size, :size].astype(np.float32)
    elif kind == "gradient":
        theta = params["angle"] + rng.uniform(-0.1, 0.1)
        t = (math.cos(theta) * X + math.sin(theta) * Y + 1.0) / 2.0
        mix = np.clip(t, 0.0, 1.0).astype(np.float32)
    else:
        raise PreconditionError(f"unknown texture kind {kind!r}")
    return bg[None, None, :] * (1.0 - mix[..., None]) + accent[None, None, :] * mix[..., None]


def render_image(recipe: StyleRecipe, content_id: int, image_size: int,
                 rng: np.random.Generator) -> np.ndarray:
    """Render one styled content image, float32 H x W x 3 in [0, 1]."""
    content = CONTENT_NAMES[content_id]
    background = _texture(recipe, image_size, rng)

    cx, cy = rng.uniform(-0.12, 0.12, size=2)
    scale = rng.uniform(0.5, 0.72)
    rot = rng.uniform(0.0, 2 * math.pi)
    ys, xs = np.mgrid[0:image_size, 0:image_size].astype(np.float32)
    X = (xs / (image_size - 1) * 2.0 - 1.0 - cx) / scale
    Y = (ys / (image_size - 1) * 2.0 - 1.0 - cy) / scale
    Xr = math.cos(rot) * X + math.sin(rot) * Y
    Yr = -math.sin(rot) * X + math.cos(rot) * Y

    sd = _shape_distance(content, Xr, Yr)
    px = 2.0 / (image_size * scale)  # one pixel in shape coordinates
    if recipe.stroke_jitter > 0:
        sd = sd + _coarse_noise(rng, image_size, 1) * recipe.stroke_jitter * px

    fg = np.array(recipe.palette[2], dtype=np.float32)
    aa = 1.2 * px
    if recipe.texture_kind == "outline_only":
        band = np.abs(sd) - recipe.texture_params["width"]
        mask = np.clip(0.5 - band / aa, 0.0, 1.0)
    else:
        mask = np.clip(0.5 - sd / aa, 0.0, 1.0)
    img = background * (1.0 - mask[..., None]) + fg[None, None, :] * mask[..., None]
    return np.clip(img, 0.0, 1.0).astype(np.float32)


# ---------------------------------------------------------------------------
# Corpus generation


@dataclass(frozen=True)
class PlannedRecord:
    index: int
    style_id: int
    content_id: int
    split: str
    labeled: bool
    template_idx: int


def plan_records(config: GeneratorConfig) -> list:
    """Deterministic record plan: balanced (style, content) assignment.

    Content cycles within each style so every (style, content) pair occurs
    whenever images_per_style >= num_contents, and the joint distribution is
    the uniform product — style and content are independent by construction.
    """
    _check_generator_config(config)
    plans = []
    index = 0
    first_holdout = config.num_styles - config.holdout_styles
    for style_id in range(config.num_styles):
        split = "val" if style_id >= first_holdout else "train"
        rng = rng_for(config.seed, "plan", style_id)
        offset = int(rng.integers(0, config.num_contents))
        for i in range(config.images_per_style):
            content_id = (i + offset) % config.num_contents
            labeled = True
            if split == "train" and config.unlabeled_fraction > 0:
                labeled = bool(rng.random() >= config.unlabeled_fraction)
            template_idx = int(rng.integers(0, 7))
            plans.append(PlannedRecord(index, style_id, content_id, split, labeled, template_idx))
            index += 1
    return plans


def _check_generator_config(config: GeneratorConfig) -> None:
    if config.num_styles < 2:
        raise PreconditionError("num_styles must be >= 2")
    if config.num_contents < 1 or config.num_contents > len(CONTENT_NAMES):
        raise PreconditionError(f"num_contents must be in [1, {len(CONTENT_NAMES)}]")
    if config.images_per_style < 2:
        raise PreconditionError("images_per_style must be >= 2")
    if config.image_size < 16:
        raise PreconditionError("image_size must be >= 16")
    if not (config.min_per_style <= config.images_per_style <= config.max_per_style):
        raise PreconditionError(
            f"images_per_style={config.images_per_style} outside configured bounds "
            f"[{config.min_per_style}, {config.max_per_style}]"
        )
    if config.holdout_styles < 0 or config.holdout_styles >= config.num_styles:
        raise PreconditionError("holdout_styles must be in [0, num_styles)")
    total = config.num_styles * config.images_per_style
    if total > config.max_total_images:
        raise PreconditionError(
            f"refusing to generate {total} images (cap max_total_images={config.max_total_images})"
        )


def generate_corpus(config: GeneratorConfig, out_dir: str | Path) -> CorpusManifest:
    """Render the corpus and write images + manifest under ``out_dir``."""
    out_dir = Path(out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        probe = out_dir / ".write_probe"
        probe.write_bytes(b"")
        probe.unlink()
    except OSError as exc:
        raise DataError(f"output directory {out_dir} is not writable: {exc}") from exc

    recipes = [recipe_for_style(s, config.seed) for s in range(config.num_styles)]
    keys = [r.key() for r in recipes]
    if len(set(keys)) != len(keys):
        raise DataError("style recipes collide; change the corpus seed")

    plans = plan_records(config)
    records = []
    for plan in plans:
        caption = make_caption(plan.content_id, plan.template_idx)
        check_caption_purity(caption)
        rng = rng_for(config.seed, "image", plan.index)
        img = render_image(recipes[plan.style_id], plan.content_id, config.image_size, rng)
        rel = f"images/s{plan.style_id:03d}/i{plan.index:05d}_c{plan.content_id}.png"
        path = out_dir / rel
        path.parent.mkdir(parents=True, exist_ok=True)
        arr = np.clip(np.round(img * 255.0), 0, 255).astype(np.uint8)
        Image.fromarray(arr, mode="RGB").save(path, format="PNG", optimize=False)
        records.append(
            ManifestRecord(rel, plan.style_id if plan.labeled else None,
                           plan.content_id, plan.split, caption)
        )

    manifest = CorpusManifest(
        root=out_dir,
        records=records,
        num_styles=config.num_styles,
        num_contents=config.num_contents,
        image_size=config.image_size,
        seed=config.seed,
        generator_version=GENERATOR_VERSION,
        min_per_style=config.min_per_style,
        max_per_style=config.max_per_style,
        manifest_path=out_dir / "manifest.tsv",
    )
    write_manifest(manifest)
    return manifest


def write_manifest(manifest: CorpusManifest) -> None:
    header = "\t".join(
        [
            f"num_styles={manifest.num_styles}",
            f"num_contents={manifest.num_contents}",
            f"image_size={manifest.image_size}",
            f"seed={manifest.seed}",
            f"version={manifest.generator_version}",
            f"min_per_style={manifest.min_per_style}",
            f"max_per_style={manifest.max_per_style}",
        ]
    )
    lines = [header]
    for r in manifest.records:
        sid = "-" if r.style_id is None else str(r.style_id)
        if "\t" in r.caption or "\n" in r.caption:
            raise DataError(f"caption may not contain tabs/newlines: {r.caption!r}")
        lines.append(f"{r.path}\t{sid}\t{r.content_id}\t{r.split}\t{r.caption}")
    manifest.manifest_path.write_text("\n".join(lines) + "\n")


def load_image(path: str | Path) -> np.ndarray:
    try:
        with Image.open(path) as im:
            return to_float01(np.asarray(im.convert("RGB")))
    except FileNotFoundError:
        raise DataError(f"image file missing: {path}")


def load_corpus(path: str | Path, validate_images: bool = True) -> CorpusManifest:
    """Parse + validate a manifest written by :func:`generate_corpus` or by hand."""
    path = Path(path)
    if path.is_dir():
        path = path / "manifest.tsv"
    if not path.exists():
        raise DataError(f"manifest not found: {path}")
    root = path.parent
    lines = path.read_text().splitlines()
    if not lines:
        raise DataError(f"{path}: empty manifest")

    header = {}
    for item in lines[0].split("\t"):
        if "=" not in item:
            raise DataError(f"{path}: malformed header item {item!r}")
        k, v = item.split("=", 1)
        header[k] = v
    required = ("num_styles", "num_contents", "image_size", "seed", "version")
    missing = [k for k in required if k not in header]
    if missing:
        raise DataError(f"{path}: header missing {missing}")

    num_styles = int(header["num_styles"])
    num_contents = int(header["num_contents"])
    image_size = int(header["image_size"])
    min_per = int(header.get("min_per_style", 1))
    max_per = int(header.get("max_per_style", 10**9))

    records = []
    for idx, line in enumerate(lines[1:]):
        if not line.strip():
            continue
        parts = line.split("\t")
        if len(parts) != 5:
            raise DataError(f"record {idx}: expected 5 tab-separated fields, got {len(parts)}")
        rel, sid_s, cid_s, split, caption = parts
        style_id = None if sid_s == "-" else int(sid_s)
        content_id = int(cid_s)
        if style_id is not None and not (0 <= style_id < num_styles):
            raise DataError(f"record {idx}: style_id {style_id} out of range [0, {num_styles})")
        if not (0 <= content_id < num_contents):
            raise DataError(f"record {idx}: content_id {content_id} out of range [0, {num_contents})")
        if split not in SPLITS:
            raise DataError(f"record {idx}: split {split!r} not in {SPLITS}")
        bad = sorted(set(tokenize_words(caption)) & STYLE_WORD_BLOCKLIST)
        if bad:
            raise DataError(f"record {idx}: caption contains style vocabulary {bad}")
        if not (root / rel).exists():
            raise DataError(f"record {idx}: dangling file reference {rel}")
        records.append(ManifestRecord(rel, style_id, content_id, split, caption))

    if validate_images:
        for idx, r in enumerate(records):
            with Image.open(root / r.path) as im:
                if im.size != (image_size, image_size):
                    raise DataError(
                        f"record {idx}: image {r.path} has size {im.size}, "
                        f"expected {(image_size, image_size)}"
                    )

    counts: dict = {}
    for r in records:
        if r.style_id is not None:
            counts[r.style_id] = counts.get(r.style_id, 0) + 1
    for sid, n in sorted(counts.items()):
        if not (min_per <= n <= max_per):
            raise DataError(
                f"style {sid} has {n} records, outside manifest bounds [{min_per}, {max_per}]"
            )

    return CorpusManifest(
        root=root,
        records=records,
        num_styles=num_styles,
        num_contents=num_contents,
        image_size=image_size,
        seed=int(header["seed"]),
        generator_version=header["version"],
        min_per_style=min_per,
        max_per_style=max_per,
        manifest_path=path,
    )


def style_content_independence(manifest_or_plans) -> tuple:
    """Chi-square independence test over the (style, content) contingency table.

    Returns ``(chi2, p_value)``; a large p means independence is not rejected.
    """
    from scipy.stats import chi2_contingency

    items = manifest_or_plans.records if isinstance(manifest_or_plans, CorpusManifest) else manifest_or_plans
    styles = [it.style_id for it in items if it.style_id is not None]
    contents = [it.content_id for it in items if it.style_id is not None]
    s_vals = sorted(set(styles))
    c_vals = sorted(set(contents))
    table = np.zeros((len(s_vals), len(c_vals)), dtype=np.int64)
    s_idx = {v: i for i, v in enumerate(s_vals)}
    c_idx = {v: i for i, v in enumerate(c_vals)}
    for s, c in zip(styles, contents):
        table[s_idx[s], c_idx[c]] += 1
    chi2, p, _, _ = chi2_contingency(table)
    return float(chi2), float(p)


# ---------------------------------------------------------------------------
# Retrieval


def retrieve_by_style(query_images, corpus: CorpusManifest, encoder, k: int) -> list:
    """Rank corpus records by style similarity to the mean query embedding.

    ``encoder`` is any callable mapping an N x H x W x 3 float array to
    N x D embeddings (e.g. ``StyleEncoder.encode_images``). Ties break by
    record index ascending. Returns at most ``min(k, len(corpus))`` items.
    """
    if k < 1:
        raise PreconditionError("k must be >= 1")
    queries = [q.image if isinstance(q, StyleImage) else np.asarray(q) for q in query_images]
    if not queries:
        raise PreconditionError("empty query list")
    q_emb = encoder(np.stack([to_float01(q) for q in queries]))
    mean_q = np.mean(np.asarray(q_emb, dtype=np.float64), axis=0)
    mean_q = mean_q / max(np.linalg.norm(mean_q), 1e-12)

    images = np.stack([corpus.load_image(r) for r in corpus.records])
    emb = np.asarray(encoder(images), dtype=np.float64)
    emb = emb / np.clip(np.linalg.norm(emb, axis=1, keepdims=True), 1e-12, None)
    scores = emb @ mean_q
    order = np.lexsort((np.arange(len(scores)), -scores))
    top = order[: min(k, len(scores))]
    return [(corpus.records[i], float(scores[i])) for i in top]
