"""Random codebooks of typical input sequences at a target rate.

Codewords are sampled i.i.d. from the letter prior with rejection of
non-typical sequences, so repeated codewords are possible by default (that is
what the random-coding average is over).  A ``distinct`` mode rejects
collisions for small-n experiments where they would dominate.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .budgets import DEFAULT_BUDGETS, Budgets
from .channel import CQChannel
from .config import parse_kv_text
from .errors import ConfigError, ResourceBudgetError, ValidationError
from .typicality import is_typical_sequence, typical_set_size

_SNAP = 1e-9


def codeword_count(n: int, rate: float) -> int:
    """ceil(2^(nR)), snapping values within 1e-9 of an integer first."""
    x = 2.0 ** (n * rate)
    nearest = round(x)
    if abs(x - nearest) < _SNAP * max(1.0, nearest):
        return int(nearest)
    return int(math.ceil(x))


@dataclass(frozen=True)
class Codebook:
    n: int
    rate: float
    seed: int
    delta_source: float
    distinct: bool
    codewords: tuple[tuple[int, ...], ...]

    @property
    def num_messages(self) -> int:
        return len(self.codewords)


def sample_codebook(
    ch: CQChannel,
    n: int,
    rate: float,
    delta_source: float,
    seed: int,
    distinct: bool = False,
    budgets: Budgets = DEFAULT_BUDGETS,
) -> Codebook:
    """Draw ceil(2^(nR)) typical codewords, deterministically in ``seed``."""
    target = codeword_count(n, rate)
    if target > budgets.set_limit:
        raise ResourceBudgetError(
            f"codebook of {target} codewords exceeds set budget {budgets.set_limit}",
            reason="set",
        )
    available = typical_set_size(ch.priors, n, delta_source)
    if available == 0:
        raise ValidationError(
            f"typical set at n={n}, delta_source={delta_source} is empty; "
            "increase delta_source or n"
        )
    if distinct and target > available:
        raise ValidationError(
            f"cannot draw {target} distinct codewords from a typical set of {available}"
        )
    rng = np.random.default_rng(seed)
    words: list[tuple[int, ...]] = []
    seen: set[tuple[int, ...]] = set()
    # the typical set is nonempty, so rejection terminates with probability 1
    while len(words) < target:
        seq = tuple(int(x) for x in rng.choice(ch.alphabet_size, size=n, p=ch.priors))
        if not is_typical_sequence(ch.priors, seq, delta_source):
            continue
        if distinct:
            if seq in seen:
                continue
            seen.add(seq)
        words.append(seq)
    return Codebook(
        n=n,
        rate=rate,
        seed=seed,
        delta_source=delta_source,
        distinct=distinct,
        codewords=tuple(words),
    )


_CODEBOOK_KEYS = {"n", "rate", "seed", "delta_source", "distinct", "codewords"}


def codebook_to_text(cb: Codebook) -> str:
    lines = [
        f"n = {cb.n}",
        f"rate = {cb.rate!r}",
        f"seed = {cb.seed}",
        f"delta_source = {cb.delta_source!r}",
        f"distinct = {json.dumps(cb.distinct)}",
        f"codewords = {json.dumps([list(w) for w in cb.codewords])}",
    ]
    return "\n".join(lines) + "\n"


def parse_codebook_text(text: str) -> Codebook:
    doc = parse_kv_text(text)
    unknown = set(doc) - _CODEBOOK_KEYS
    if unknown:
        raise ConfigError(f"unknown codebook keys: {sorted(unknown)}")
    missing = _CODEBOOK_KEYS - set(doc)
    if missing:
        raise ConfigError(f"codebook document missing keys: {sorted(missing)}")
    words = tuple(tuple(int(x) for x in w) for w in doc["codewords"])
    return Codebook(
        n=int(doc["n"]),
        rate=float(doc["rate"]),
        seed=int(doc["seed"]),
        delta_source=float(doc["delta_source"]),
        distinct=bool(doc["distinct"]),
        codewords=words,
    )
