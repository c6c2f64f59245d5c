"""Optical orthogonal codes (OOCs) for simultaneous relay identification.

A codeword of length ``n`` and weight ``w`` is a set of ``w`` mark positions
in ``Z_n``. A family with bounds ``(lambda_a, lambda_c)`` keeps every
off-peak cyclic autocorrelation at most ``lambda_a`` and every cyclic
cross-correlation at most ``lambda_c``. Here both bounds equal ``lam``.

For ``lam == 1`` the constraints say that all pairwise mark differences in
the family are distinct, so construction is an exact-cover style search
over difference pairs ``{d, n - d}``. Other ``lam`` use a plain
lexicographic backtracking search with explicit correlation checks.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from .channel import ImpulseResponse
from .errors import InvalidArgumentError, NoSignalError
from .relay import TransmitWaveform

DEFAULT_NODE_BUDGET = 1_000_000


@dataclass(frozen=True)
class Codeword:
    n: int
    marks: tuple[int, ...]

    def __post_init__(self) -> None:
        marks = tuple(int(m) for m in self.marks)
        object.__setattr__(self, "marks", marks)
        if self.n < 1:
            raise InvalidArgumentError("code length must be positive")
        if not marks:
            raise InvalidArgumentError("a codeword needs at least one mark")
        if any(b <= a for a, b in zip(marks, marks[1:])):
            raise InvalidArgumentError(f"marks must be strictly increasing: {marks}")
        if marks[0] < 0 or marks[-1] >= self.n:
            raise InvalidArgumentError(f"marks must lie in [0, {self.n}): {marks}")

    @property
    def w(self) -> int:
        return len(self.marks)

    def shifted(self, s: int) -> "Codeword":
        return Codeword(self.n, tuple(sorted((m + s) % self.n for m in self.marks)))

    def __str__(self) -> str:
        return " ".join(str(m) for m in self.marks)


@dataclass(frozen=True)
class CodeFamily:
    n: int
    w: int
    lambda_a: int
    lambda_c: int
    codewords: tuple[Codeword, ...]

    def __len__(self) -> int:
        return len(self.codewords)

    def __iter__(self) -> Iterator[Codeword]:
        return iter(self.codewords)

    def __getitem__(self, i: int) -> Codeword:
        return self.codewords[i]

    def to_text(self) -> str:
        lines = [f"# n={self.n} w={self.w} lambda={max(self.lambda_a, self.lambda_c)} size={len(self)}"]
        lines += [str(c) for c in self.codewords]
        return "\n".join(lines) + "\n"


def correlate(a: Codeword, b: Codeword, shift: int) -> int:
    """Number of mark pairs with ``a_i == b_j + shift (mod n)``."""
    if a.n != b.n:
        raise InvalidArgumentError(f"code lengths differ: {a.n} vs {b.n}")
    if not 0 <= shift < a.n:
        raise InvalidArgumentError(f"shift must lie in [0, {a.n})")
    bs = {(m + shift) % a.n for m in b.marks}
    return sum(1 for m in a.marks if m in bs)


def correlation_profile(a: Codeword, b: Codeword) -> np.ndarray:
    """``correlate(a, b, s)`` for every shift ``s``."""
    if a.n != b.n:
        raise InvalidArgumentError(f"code lengths differ: {a.n} vs {b.n}")
    diffs = [(x - y) % a.n for x in a.marks for y in b.marks]
    return np.bincount(diffs, minlength=a.n)


def verify_family(family: CodeFamily) -> bool:
    """Exhaustive check of peak, autocorrelation and cross-correlation bounds."""
    words = family.codewords
    for i, a in enumerate(words):
        auto = correlation_profile(a, a)
        if auto[0] != a.w or (a.n > 1 and auto[1:].max() > family.lambda_a):
            return False
        for b in words[i + 1 :]:
            if correlation_profile(a, b).max() > family.lambda_c:
                return False
    return True


def johnson_bound(n: int, w: int, lam: int) -> int:
    """Upper bound on the size of an ``(n, w, lam)`` OOC family."""
    if lam >= w:
        raise InvalidArgumentError("lambda must be smaller than the weight")
    v = 1
    for i in range(lam, 0, -1):
        v = (n - i) * v // (w - i)
    return v // w


def _canonical(n: int, marks: Sequence[int]) -> tuple[int, ...]:
    """Lexicographically smallest cyclic translate that contains mark 0."""
    return min(tuple(sorted((m - s) % n for m in marks)) for s in marks)


class _Budget(Exception):
    pass


def _lambda1_search(n: int, w: int, target: int, budget: int) -> list[tuple[int, ...]]:
    pairs = (n - 1) // 2
    per_word = w * (w - 1) // 2
    slack = pairs - target * per_word
    # the self-paired difference n/2 can never appear with lam == 1
    used = [False] * n
    used[0] = True
    if n % 2 == 0:
        used[n // 2] = True
    best: list[tuple[int, ...]] = []
    nodes = 0

    def diff_ok(marks: list[int], x: int, taken: set[int]) -> list[int] | None:
        new = []
        for m in marks:
            d = (x - m) % n
            e = n - d
            if used[d] or d in taken or e in taken or d == e:
                return None
            new.append(d)
            new.append(e)
        # differences introduced by x must also be mutually distinct
        if len(set(new)) != len(new):
            return None
        return new

    def words_with(d: int) -> Iterator[tuple[tuple[int, ...], list[int]]]:
        def extend(marks: list[int], taken: set[int], start: int):
            if len(marks) == w:
                yield tuple(sorted(marks)), sorted(taken)
                return
            nonlocal nodes
            for x in range(start, n):
                if x == d:
                    continue
                nodes += 1
                if nodes > budget:
                    raise _Budget
                new = diff_ok(marks, x, taken)
                if new is None:
                    continue
                yield from extend(marks + [x], taken | set(new), x + 1)

        yield from extend([0, d], {d, n - d}, 1)

    def dfs(family: list[tuple[int, ...]], skipped: int) -> bool:
        nonlocal best, nodes
        if len(family) > len(best):
            best = list(family)
        if len(family) >= target:
            return True
        nodes += 1
        if nodes > budget:
            raise _Budget
        uncovered = [k for k in range(1, pairs + 1) if not used[k]]
        if not uncovered:
            return False
        d = uncovered[0]
        cands = words_with(d)
        if slack == 0 and w <= 4:
            # perfect family: branch on the most constrained difference
            fewest = None
            for k in uncovered:
                found = list(words_with(k))
                if fewest is None or len(found) < len(fewest):
                    d, fewest = k, found
                    if not found:
                        break
            cands = fewest
        for word, diffs in cands:
            for k in diffs:
                used[k] = True
            family.append(word)
            if dfs(family, skipped):
                return True
            family.pop()
            for k in diffs:
                used[k] = False
        if skipped < slack:
            used[d] = used[n - d] = True
            ok = dfs(family, skipped + 1)
            used[d] = used[n - d] = False
            return ok
        return False

    if w == 1:
        return [(0,)][:target]
    try:
        dfs([], 0)
    except _Budget:
        pass
    return best


def _generic_search(n: int, w: int, lam: int, target: int, budget: int) -> list[tuple[int, ...]]:
    best: list[tuple[int, ...]] = []
    nodes = 0

    def max_overlap(a: np.ndarray, b: np.ndarray, skip_zero: bool) -> int:
        counts = np.bincount(((a[:, None] - b[None, :]) % n).ravel(), minlength=n)
        return int(counts[1:].max() if skip_zero else counts.max())

    def compatible(word: tuple[int, ...], family: list[tuple[int, ...]]) -> bool:
        # translates of the same word always collide; test canonical forms only
        if word != _canonical(n, word):
            return False
        a = np.asarray(word)
        if n > 1 and max_overlap(a, a, True) > lam:
            return False
        return all(max_overlap(a, np.asarray(f), False) <= lam for f in family)

    def words_after(prev: tuple[int, ...] | None) -> Iterator[tuple[int, ...]]:
        def extend(marks: list[int], start: int):
            if len(marks) == w:
                yield tuple(marks)
                return
            for x in range(start, n - (w - len(marks)) + 1):
                yield from extend(marks + [x], x + 1)

        for word in extend([0], 1):
            if prev is None or word > prev:
                yield word

    def dfs(family: list[tuple[int, ...]]) -> bool:
        nonlocal best, nodes
        if len(family) > len(best):
            best = list(family)
        if len(family) >= target:
            return True
        for word in words_after(family[-1] if family else None):
            nodes += 1
            if nodes > budget:
                raise _Budget
            if compatible(word, family):
                family.append(word)
                if dfs(family):
                    return True
                family.pop()
        return False

    try:
        dfs([])
    except _Budget:
        pass
    return best


def generate(
    n: int,
    w: int,
    lam: int = 1,
    max_codewords: int | None = None,
    node_budget: int = DEFAULT_NODE_BUDGET,
) -> CodeFamily:
    """Deterministic backtracking construction of an OOC family.

    The search aims for the Johnson bound (or ``max_codewords`` when smaller)
    and returns the largest family found within ``node_budget`` search
    nodes. Each codeword is stored as its smallest translate containing
    mark 0 and the family is sorted lexicographically.
    """
    if w < 1 or n < 1:
        raise InvalidArgumentError("n and w must be positive")
    if lam < 1:
        raise InvalidArgumentError("lambda must be >= 1")
    if n <= w * (w - 1):
        raise InvalidArgumentError(f"infeasible parameters: need n > w(w-1) = {w * (w - 1)}")
    target = johnson_bound(n, w, lam) if lam < w else max_codewords or 1
    if max_codewords is not None:
        target = min(target, max_codewords)
    if lam == 1:
        words = _lambda1_search(n, w, target, node_budget)
    else:
        words = _generic_search(n, w, lam, target, node_budget)
    words = sorted(_canonical(n, m) for m in words)
    return CodeFamily(n, w, lam, lam, tuple(Codeword(n, m) for m in words))


def chip_bins(chip_duration: float, bin_width: float) -> int:
    k = round(chip_duration / bin_width)
    if k < 1 or not math.isclose(k * bin_width, chip_duration, rel_tol=1e-9):
        raise InvalidArgumentError(
            f"chip duration {chip_duration!r} s is not a positive multiple of the bin width {bin_width!r} s"
        )
    return int(k)


def encode(c: Codeword, chip_duration: float, bin_width: float) -> TransmitWaveform:
    """Unit-power rectangular chips at the mark positions, one code period long."""
    k = chip_bins(chip_duration, bin_width)
    samples = np.zeros(c.n * k)
    for m in c.marks:
        samples[m * k : (m + 1) * k] = 1.0
    return TransmitWaveform(bin_width, samples)


def chip_samples(received: ImpulseResponse | Sequence[float], n: int, chip_duration: float, bin_width: float) -> np.ndarray:
    """Integrate each chip interval and fold the result onto one code period.

    Folding a full one-shot capture modulo the code period gives the same
    chip values as one steady-state period of a cyclically repeated probe.
    """
    k = chip_bins(chip_duration, bin_width)
    if isinstance(received, ImpulseResponse):
        values, first = received.gains, received.start_bin
    else:
        values, first = np.asarray(received, dtype=float), 0
    chips = ((np.arange(values.size) + first) // k) % n
    return np.bincount(chips, weights=values, minlength=n)


def cyclic_correlation(y: np.ndarray, c: Codeword) -> np.ndarray:
    """``out[s] = sum_m y[(m + s) mod n]`` over the marks of ``c``."""
    out = np.zeros(c.n)
    for m in c.marks:
        out += np.roll(y, -m)
    return out


def estimate_delay(
    received: ImpulseResponse | Sequence[float],
    c: Codeword,
    chip_duration: float,
    bin_width: float,
) -> int:
    """Cyclic shift (in chips) maximising the correlation with ``c``; earliest on ties."""
    y = chip_samples(received, c.n, chip_duration, bin_width)
    if not np.any(y):
        raise NoSignalError("received signal is all zero")
    return int(np.argmax(cyclic_correlation(y, c)))
