"""Image and text augmentations, the noisy-set construction, and
corpus-level augmentation with concatenation.

Everything here is a pure function of (input, params, seed). Corpus-level
operations derive one sub-seed per sample from (seed, sample_id), so the
results do not depend on iteration or parallelization order.
"""

from __future__ import annotations

import hashlib
import json
import string
from dataclasses import dataclass, field, replace

import numpy as np

from chartrole import kernels
from chartrole.corpus import ChartSample, Corpus
from chartrole.geometry import RotationTransform

IMAGE_METHODS = ("salt_pepper_noise", "gaussian_noise", "brightness", "color", "rotation")
TEXT_METHODS = ("char_insert", "char_substitute", "char_delete_prefix")
RECIPE_METHODS = IMAGE_METHODS + TEXT_METHODS + ("cutout",)

# sampled over the full augmentation pool when building the noisy set
NOISY_POOL = IMAGE_METHODS + TEXT_METHODS

# selected training-time methods: noise adjustment plus the two text
# augmentations that survive ablation
DEFAULT_TRAIN_METHODS = ("salt_pepper_noise", "gaussian_noise",
                         "char_delete_prefix", "char_insert")

SALT_PEPPER_MAX = 0.1
GAUSSIAN_SIGMA_MAX = 25.0
FACTOR_RANGE = (0.5, 1.5)
ROTATION_RANGE = (-30.0, 30.0)

# sampling ranges for corpus-level augmentation; lower bounds keep the
# corruption visible but the text legible
_PARAM_SAMPLERS = {
    "salt_pepper_noise": lambda rng: {"amount": float(rng.uniform(0.01, SALT_PEPPER_MAX))},
    "gaussian_noise": lambda rng: {"sigma": float(rng.uniform(3.0, GAUSSIAN_SIGMA_MAX))},
    "brightness": lambda rng: {"factor": float(rng.uniform(*FACTOR_RANGE))},
    "color": lambda rng: {"factor": float(rng.uniform(*FACTOR_RANGE))},
    "rotation": lambda rng: {"theta": float(rng.uniform(*ROTATION_RANGE))},
    "char_insert": lambda rng: {},
    "char_substitute": lambda rng: {},
    "char_delete_prefix": lambda rng: {},
    "cutout": lambda rng: {},
}

ALPHABET = string.ascii_letters + string.digits + " "


def derive_seed(*parts) -> int:
    """Stable 63-bit sub-seed from arbitrary hashable parts."""
    digest = hashlib.blake2s("\x1f".join(str(p) for p in parts).encode(),
                             digest_size=8).digest()
    return int.from_bytes(digest, "big") >> 1


@dataclass(frozen=True)
class AugmentationRecipe:
    method: str
    params: dict = field(default_factory=dict)
    seed: int = 0

    def __post_init__(self):
        if self.method not in RECIPE_METHODS:
            raise ValueError(f"unknown augmentation method {self.method!r}")
        p = self.params
        if self.method == "salt_pepper_noise":
            amount = p.get("amount", 0.02)
            if not (0.0 < amount <= SALT_PEPPER_MAX):
                raise ValueError(f"salt/pepper amount must be in (0, {SALT_PEPPER_MAX}]: {amount}")
        elif self.method == "gaussian_noise":
            sigma = p.get("sigma", 8.0)
            if not (0.0 < sigma <= GAUSSIAN_SIGMA_MAX):
                raise ValueError(f"gaussian sigma must be in (0, {GAUSSIAN_SIGMA_MAX}]: {sigma}")
        elif self.method in ("brightness", "color"):
            factor = p.get("factor", 1.0)
            if not (FACTOR_RANGE[0] <= factor <= FACTOR_RANGE[1]):
                raise ValueError(f"{self.method} factor must be in {FACTOR_RANGE}: {factor}")

    def to_json(self) -> str:
        return json.dumps({"recipe": {"method": self.method, "params": self.params,
                                      "seed": self.seed}}, indent=1)

    @classmethod
    def from_json(cls, text: str) -> "AugmentationRecipe":
        doc = json.loads(text)
        rec = doc["recipe"] if "recipe" in doc else doc
        return cls(rec["method"], dict(rec.get("params", {})), int(rec.get("seed", 0)))


# -- image ops ---------------------------------------------------------------

def rotate_sample(sample: ChartSample, theta: float,
                  fill: tuple[int, int, int] = (255, 255, 255)) -> ChartSample:
    """Rotate about the image center with canvas expansion.

    Each bbox becomes the axis-aligned hull of its four rotated corners in
    the new canvas; text and roles are untouched.
    """
    h, w = sample.image.shape[:2]
    tf = RotationTransform(float(theta), (w, h))
    out_w, out_h = tf.out_size
    ox, oy = tf.offset
    cx, cy = tf.center
    t = np.radians(tf.theta_deg)
    image = kernels.resample_affine(np.ascontiguousarray(sample.image), out_h, out_w,
                                    float(np.cos(t)), float(np.sin(t)),
                                    ox + cx, oy + cy, cx, cy, fill)
    blocks = tuple(replace(b, bbox=tf.map_bbox(b.bbox)) for b in sample.blocks)
    return replace(sample, image=image, blocks=blocks)


def apply_image_noise(sample: ChartSample, method: str, params: dict,
                      seed: int) -> ChartSample:
    recipe = AugmentationRecipe(method, params, seed)  # range validation
    rng = np.random.default_rng(seed)
    img = sample.image
    if method == "salt_pepper_noise":
        amount = recipe.params.get("amount", 0.02)
        h, w = img.shape[:2]
        hit = rng.random((h, w)) < amount
        salt = rng.random((h, w)) < 0.5
        out = img.copy()
        out[hit & salt] = 255
        out[hit & ~salt] = 0
    elif method == "gaussian_noise":
        sigma = recipe.params.get("sigma", 8.0)
        noise = rng.normal(0.0, sigma, size=img.shape)
        out = np.clip(np.rint(img.astype(np.float64) + noise), 0, 255).astype(np.uint8)
    else:
        raise ValueError(f"not an image-noise method: {method!r}")
    return replace(sample, image=out)


def adjust_photometry(sample: ChartSample, method: str, factor: float) -> ChartSample:
    if not (FACTOR_RANGE[0] <= factor <= FACTOR_RANGE[1]):
        raise ValueError(f"{method} factor must be in {FACTOR_RANGE}: {factor}")
    img = sample.image.astype(np.float64)
    if method == "brightness":
        out = img * factor
    elif method == "color":
        # saturation scaling: blend toward the per-pixel luma
        luma = (0.299 * img[..., 0] + 0.587 * img[..., 1] + 0.114 * img[..., 2])[..., None]
        out = luma + factor * (img - luma)
    else:
        raise ValueError(f"not a photometry method: {method!r}")
    return replace(sample, image=np.clip(np.rint(out), 0, 255).astype(np.uint8))


# -- text ops ----------------------------------------------------------------

def char_insert(text: str, seed: int) -> str:
    """Insert one alphabet character at a seed-chosen position."""
    if not text:
        raise ValueError("text must be non-empty")
    rng = np.random.default_rng(seed)
    pos = int(rng.integers(0, len(text) + 1))
    ch = ALPHABET[int(rng.integers(0, len(ALPHABET)))]
    return text[:pos] + ch + text[pos:]


def char_substitute(text: str, seed: int) -> str:
    """Replace one seed-chosen position with a different alphabet character."""
    if not text:
        raise ValueError("text must be non-empty")
    rng = np.random.default_rng(seed)
    pos = int(rng.integers(0, len(text)))
    choices = ALPHABET.replace(text[pos], "")
    ch = choices[int(rng.integers(0, len(choices)))]
    return text[:pos] + ch + text[pos + 1:]


def char_delete_prefix(text: str, seed: int) -> str:
    """Drop 1-5 leading characters from texts of at least 10 characters."""
    if len(text) < 10:
        return text
    rng = np.random.default_rng(seed)
    k = int(rng.integers(1, 6))
    return text[k:]


_TEXT_FNS = {"char_insert": char_insert, "char_substitute": char_substitute,
             "char_delete_prefix": char_delete_prefix}


def apply_text_method(sample: ChartSample, method: str, seed: int) -> ChartSample:
    """Apply one text augmentation to every block; bboxes are left alone."""
    fn = _TEXT_FNS[method]
    blocks = tuple(replace(b, text=fn(b.text, derive_seed(seed, b.block_id)))
                   for b in sample.blocks)
    return sample.with_blocks(blocks)


# -- recipes and corpus-level ops ---------------------------------------------

def apply_recipe(sample: ChartSample, recipe: AugmentationRecipe,
                 class_histogram=None):
    """Run one recipe; returns (augmented sample, cutout plan or None)."""
    m, p, seed = recipe.method, recipe.params, recipe.seed
    if m == "rotation":
        return rotate_sample(sample, p.get("theta", 0.0)), None
    if m in ("salt_pepper_noise", "gaussian_noise"):
        return apply_image_noise(sample, m, p, seed), None
    if m in ("brightness", "color"):
        return adjust_photometry(sample, m, p.get("factor", 1.0)), None
    if m in _TEXT_FNS:
        return apply_text_method(sample, m, seed), None
    if m == "cutout":
        from chartrole.balancing import cutout_sample
        from chartrole.corpus import class_distribution

        hist = class_histogram
        if hist is None:
            hist = class_distribution(Corpus("tmp", (sample,)))
        return cutout_sample(sample, hist, seed)
    raise ValueError(f"unknown method {m!r}")


def sample_recipe(method: str, seed: int) -> AugmentationRecipe:
    """Recipe with parameters drawn uniformly within the method's range."""
    rng = np.random.default_rng(derive_seed(seed, method, "params"))
    return AugmentationRecipe(method, _PARAM_SAMPLERS[method](rng), seed)


def make_noisy_corpus(corpus: Corpus, seed: int) -> Corpus:
    """Noisy twin of a corpus: one uniformly drawn augmentation per image.

    Sample ids are preserved; provenance gains a "-N" tag.
    """
    if len(corpus) == 0:
        raise ValueError("corpus must be non-empty")
    noisy = []
    for sample in corpus.samples:
        sub = derive_seed(seed, sample.sample_id)
        rng = np.random.default_rng(sub)
        method = NOISY_POOL[int(rng.integers(0, len(NOISY_POOL)))]
        out, _ = apply_recipe(sample, sample_recipe(method, sub))
        noisy.append(replace(out, provenance=sample.provenance + "-N"))
    return Corpus(corpus.name + "-N", tuple(noisy), dict(corpus.splits))


def augment_corpus(corpus: Corpus, enabled_methods=DEFAULT_TRAIN_METHODS,
                   seed: int = 0) -> Corpus:
    """Original corpus concatenated with one augmented copy per sample."""
    methods = tuple(m for m in RECIPE_METHODS if m in set(enabled_methods))
    if set(enabled_methods) - set(methods):
        raise ValueError(f"unknown methods: {set(enabled_methods) - set(methods)}")
    if len(corpus) == 0:
        return Corpus(corpus.name, ())
    if not methods:
        raise ValueError("enabled_methods must be non-empty")
    extras = []
    for sample in corpus.samples:
        sub = derive_seed(seed, sample.sample_id, "train-aug")
        rng = np.random.default_rng(sub)
        method = methods[int(rng.integers(0, len(methods)))]
        out, _ = apply_recipe(sample, sample_recipe(method, sub))
        extras.append(replace(out, sample_id=sample.sample_id + "-aug",
                              provenance=sample.provenance + "+aug"))
    return Corpus(corpus.name, tuple(corpus.samples) + tuple(extras))
