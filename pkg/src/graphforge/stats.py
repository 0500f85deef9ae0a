"""Seed splitting, chunked Monte Carlo driver and binomial intervals.

Splitting rule: trials are cut into consecutive chunks of ``CHUNK`` trials
and chunk ``i`` draws from ``SeedSequence(seed).spawn(n_chunks)[i]``.  The
chunk layout depends only on the trial count, so results are identical for
any number of worker threads.
"""

from __future__ import annotations

import math
import os
from collections.abc import Callable
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy import stats as _st

CHUNK = 4096
EXACT_BELOW = 30
SEED_ENV = "GRAPHFORGE_SEED"


def resolve_seed(seed: int | None) -> int:
    """Environment override first, then the argument, then 0."""
    env = os.environ.get(SEED_ENV)
    if env is not None and env.strip():
        return int(env)
    return 0 if seed is None else int(seed)


def chunk_sizes(trials: int, chunk: int = CHUNK) -> list[int]:
    if trials < 0:
        raise ValueError("trial count must be non-negative")
    full, rest = divmod(trials, chunk)
    return [chunk] * full + ([rest] if rest else [])


def chunk_generators(seed: int, trials: int, chunk: int = CHUNK) -> list[tuple[int, np.random.Generator]]:
    sizes = chunk_sizes(trials, chunk)
    seqs = np.random.SeedSequence(seed).spawn(len(sizes))
    return [(n, np.random.default_rng(s)) for n, s in zip(sizes, seqs)]


def run_chunked(
    fn: Callable[[int, np.random.Generator], object],
    trials: int,
    seed: int,
    threads: int = 1,
    chunk: int = CHUNK,
) -> list:
    """Call ``fn(n_trials, rng)`` per chunk; results come back in chunk order."""
    jobs = chunk_generators(seed, trials, chunk)
    if threads <= 1 or len(jobs) <= 1:
        return [fn(n, g) for n, g in jobs]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(lambda job: fn(*job), jobs))


def sample_counts(probs: np.ndarray, trials: int, seed: int, threads: int = 1) -> np.ndarray:
    """Multinomial counts of categorical draws, chunked for reproducibility."""
    p = np.asarray(probs, float)
    p = p / p.sum()

    def one(n, rng):
        return np.bincount(rng.choice(len(p), size=n, p=p), minlength=len(p))

    parts = run_chunked(one, trials, seed, threads)
    return np.sum(parts, axis=0) if parts else np.zeros(len(p), int)


@dataclass(frozen=True)
class Estimate:
    successes: int
    trials: int

    @property
    def rate(self) -> float:
        return self.successes / self.trials if self.trials else float("nan")

    @property
    def stderr(self) -> float:
        if not self.trials:
            return float("nan")
        p = self.rate
        return math.sqrt(p * (1 - p) / self.trials)

    def ci95(self) -> tuple[float, float]:
        return binomial_ci(self.successes, self.trials)

    def agrees(self, p: float, n_sigma: float = 3.0) -> bool:
        """``|k - n p| <= n_sigma * sqrt(n p (1 - p))`` with sigma from the model.

        For tiny expected counts the normal band is widened to the exact
        two-sided binomial interval at the same coverage.
        """
        n, k = self.trials, self.successes
        if n == 0:
            return False
        sigma = math.sqrt(n * p * (1 - p))
        if abs(k - n * p) <= n_sigma * sigma:
            return True
        if n * p < EXACT_BELOW or n * (1 - p) < EXACT_BELOW:
            alpha = 2 * _st.norm.sf(n_sigma)
            lo, hi = _st.binom.interval(1 - alpha, n, p)
            return lo <= k <= hi
        return False


def binomial_ci(k: int, n: int, level: float = 0.95) -> tuple[float, float]:
    """Normal-approximation interval; Clopper-Pearson when ``k`` is small."""
    if n == 0:
        return (0.0, 1.0)
    z = _st.norm.ppf(0.5 + level / 2)
    if k < EXACT_BELOW or n - k < EXACT_BELOW:
        a = 1 - level
        lo = 0.0 if k == 0 else float(_st.beta.ppf(a / 2, k, n - k + 1))
        hi = 1.0 if k == n else float(_st.beta.ppf(1 - a / 2, k + 1, n - k))
        return lo, hi
    p = k / n
    half = z * math.sqrt(p * (1 - p) / n)
    return max(0.0, p - half), min(1.0, p + half)
