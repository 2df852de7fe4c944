"""Multiplicity sequences ``n_k``, their prefix norms, and the exponential
sufficient condition for asymptotic normality of the scaled log modulus.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

KINDS = ("constant", "power", "geometric", "explicit")


class NormOverflowError(OverflowError):
    """An exact prefix sum cannot be represented as a float."""


def _iroot(x: int, k: int) -> int:
    """floor(x ** (1/k)) for nonnegative integers, exact."""
    if x < 2 or k == 1:
        return x
    r = 1 << -(-x.bit_length() // k)  # >= true root
    while True:
        s = ((k - 1) * r + x // r ** (k - 1)) // k
        if s >= r:
            break
        r = s
    while r**k > x:
        r -= 1
    while (r + 1) ** k <= x:
        r += 1
    return r


@dataclass(frozen=True)
class MultiplicitySpec:
    """Rule producing the multiplicities ``n_1, n_2, ...``.

    ``constant``: ``n_k = c``; ``power``: ``n_k = floor(k**p)`` (exact for
    rational ``p``); ``geometric``: ``n_k = b**k``; ``explicit``: a finite list.
    """

    kind: str
    param: object = field(default=1)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown multiplicity kind {self.kind!r}")
        if self.kind == "constant":
            c = int(self.param)
            if c != self.param or c < 1:
                raise ValueError("constant multiplicity must be a positive integer")
            object.__setattr__(self, "param", c)
        elif self.kind == "power":
            p = Fraction(self.param)
            if p < 0:
                raise ValueError("power exponent must be >= 0")
            object.__setattr__(self, "param", p)
        elif self.kind == "geometric":
            b = int(self.param)
            if b != self.param or b < 1:
                raise ValueError("geometric base must be a positive integer")
            object.__setattr__(self, "param", b)
        else:
            vals = tuple(int(v) for v in self.param)
            if not vals or any(v < 1 for v in vals):
                raise ValueError("explicit multiplicities must be positive integers")
            object.__setattr__(self, "param", vals)

    @classmethod
    def constant(cls, c: int = 1) -> "MultiplicitySpec":
        return cls("constant", c)

    @classmethod
    def power(cls, p) -> "MultiplicitySpec":
        return cls("power", p)

    @classmethod
    def geometric(cls, b: int) -> "MultiplicitySpec":
        return cls("geometric", b)

    @classmethod
    def explicit(cls, values: Sequence[int]) -> "MultiplicitySpec":
        return cls("explicit", tuple(values))

    def term(self, k: int) -> int:
        """The k-th multiplicity (1-based)."""
        if k < 1:
            raise ValueError("multiplicity index starts at 1")
        if self.kind == "constant":
            return self.param
        if self.kind == "power":
            p = self.param
            return _iroot(k**p.numerator, p.denominator)
        if self.kind == "geometric":
            return self.param**k
        if k > len(self.param):
            raise ValueError(f"explicit sequence has only {len(self.param)} terms")
        return self.param[k - 1]

    def terms(self, n: int) -> list[int]:
        """Exact integers ``[n_1, ..., n_N]``."""
        _check_n(n)
        if self.kind == "constant":
            return [self.param] * n
        if self.kind == "explicit":
            if n > len(self.param):
                raise ValueError(f"explicit sequence has only {len(self.param)} terms")
            return list(self.param[:n])
        if self.kind == "geometric":
            out, cur = [], 1
            for _ in range(n):
                cur *= self.param
                out.append(cur)
            return out
        return [self.term(k) for k in range(1, n + 1)]

    def log_terms(self, n: int) -> np.ndarray:
        """``log n_k`` for k <= n, without forming huge floats."""
        _check_n(n)
        k = np.arange(1, n + 1, dtype=float)
        if self.kind == "constant":
            return np.full(n, math.log(self.param))
        if self.kind == "geometric":
            return k * math.log(self.param)
        if self.kind == "power" and self.param.denominator == 1:
            return float(self.param) * np.log(k)
        return np.array([math.log(t) for t in self.terms(n)])

    def mults(self, n: int) -> np.ndarray:
        """Multiplicities as float64; raises if any term exceeds float range."""
        try:
            return np.array([float(t) for t in self.terms(n)])
        except OverflowError as exc:
            raise NormOverflowError(f"multiplicities of {self} overflow float at N={n}") from exc

    def to_record(self) -> dict[str, str]:
        if self.kind == "constant":
            return {"kind": "constant", "c": str(self.param)}
        if self.kind == "power":
            return {"kind": "power", "p": str(self.param)}
        if self.kind == "geometric":
            return {"kind": "geometric", "b": str(self.param)}
        return {"kind": "explicit", "values": ",".join(map(str, self.param))}

    @classmethod
    def from_record(cls, rec: dict) -> "MultiplicitySpec":
        kind = rec.get("kind", "constant")
        if kind == "constant":
            return cls.constant(int(rec.get("c", 1)))
        if kind == "power":
            return cls.power(Fraction(str(rec.get("p", 1))))
        if kind == "geometric":
            return cls.geometric(int(rec.get("b", 2)))
        if kind == "explicit":
            vals = rec.get("values", "")
            if isinstance(vals, str):
                vals = [v for v in vals.split(",") if v.strip()]
            return cls.explicit([int(v) for v in vals])
        raise ValueError(f"unknown multiplicity kind {kind!r}")

    def __str__(self):
        rec = self.to_record()
        return rec["kind"] + "(" + ",".join(f"{k}={v}" for k, v in rec.items() if k != "kind") + ")"


def _check_n(n: int) -> None:
    if int(n) != n or n < 1:
        raise ValueError(f"N must be a positive integer, got {n!r}")


@dataclass(frozen=True)
class PrefixNorms:
    """Exact ``sum n_k^2`` and ``sum n_k`` up to ``N``."""

    N: int
    sumsq: int
    total: int

    @property
    def s_N(self) -> float:
        try:
            return math.sqrt(self.sumsq)
        except OverflowError as exc:
            raise NormOverflowError(f"s_N^2 has {self.sumsq.bit_length()} bits") from exc

    @property
    def log_s_N(self) -> float:
        return 0.5 * math.log(self.sumsq)

    @property
    def mass(self) -> float:
        """``M_N / s_N``: total weight of the normalised counting measure."""
        return math.exp(math.log(self.total) - self.log_s_N)


def prefix_norms(spec: MultiplicitySpec, n: int) -> PrefixNorms:
    terms = spec.terms(n)
    return PrefixNorms(N=n, sumsq=sum(t * t for t in terms), total=sum(terms))


def _sumsq_at(spec: MultiplicitySpec, ns: Sequence[int]) -> dict[int, int]:
    """Exact prefix sums of squares at each N in ``ns`` (single pass)."""
    want = sorted(set(ns))
    if spec.kind == "constant":
        return {n: spec.param**2 * n for n in want}
    if spec.kind == "geometric" and spec.param > 1:
        b2 = spec.param**2
        return {n: b2 * (b2**n - 1) // (b2 - 1) for n in want}
    out, acc, k = {}, 0, 0
    for n in want:
        while k < n:
            k += 1
            acc += spec.term(k) ** 2
        out[n] = acc
    return out


def _margin(log_terms: np.ndarray, sumsq: int, eps: float) -> float:
    ratio_log = 0.5 * math.log(sumsq) - log_terms
    with np.errstate(over="ignore", under="ignore"):
        return float(np.exp(-eps * np.exp(ratio_log)).sum())


def lindberg_margin(spec: MultiplicitySpec, n: int, eps: float) -> float:
    """Partial sum ``sum_{k<=N} exp(-eps s_N / n_k)``.

    Works in the log domain, so geometric sequences with astronomically large
    ``s_N`` are handled without converting ``s_N`` to float.
    """
    if not eps > 0:
        raise ValueError("eps must be positive")
    _check_n(n)
    return _margin(spec.log_terms(n), _sumsq_at(spec, [n])[n], eps)


@dataclass
class LindbergVerdict:
    verdict: str
    per_eps: dict[float, str]
    trace: dict[float, list[tuple[int, float]]]
    tol: float


PLATEAU_FRACTION = 0.5


def _classify(margins: list[float], tol: float) -> str:
    tail = margins[-max(2, (len(margins) + 1) // 2):]
    decreasing = all(b <= a for a, b in zip(tail, tail[1:]))
    if decreasing and margins[-1] < tol:
        return "pass"
    if min(tail) >= tol and min(tail) >= PLATEAU_FRACTION * max(tail):
        return "fail"
    return "inconclusive"


def lindberg_verdict(
    spec: MultiplicitySpec,
    eps_list: Sequence[float],
    n_schedule: Sequence[int],
    tol: float,
) -> LindbergVerdict:
    """Classify the finite-N margin trace as ``pass``, ``fail`` or ``inconclusive``.

    Per eps, over the tail (last half) of the schedule: ``pass`` when the tail
    is nonincreasing and the final margin is below ``tol``; ``fail`` when the
    tail stays above ``tol`` on a plateau (min >= half the max). The overall
    verdict is ``fail`` if any eps fails, ``pass`` if all pass.
    """
    ns = [int(n) for n in n_schedule]
    if len(ns) < 3 or any(b <= a for a, b in zip(ns, ns[1:])):
        raise ValueError("N schedule must be strictly increasing with at least 3 entries")
    if any(not e > 0 for e in eps_list):
        raise ValueError("eps values must be positive")
    sumsq = _sumsq_at(spec, ns)
    logs = spec.log_terms(ns[-1])
    trace, per_eps = {}, {}
    for eps in eps_list:
        row = [(n, _margin(logs[:n], sumsq[n], float(eps))) for n in ns]
        trace[float(eps)] = row
        per_eps[float(eps)] = _classify([m for _, m in row], tol)
    verdicts = set(per_eps.values())
    if "fail" in verdicts:
        overall = "fail"
    elif verdicts == {"pass"}:
        overall = "pass"
    else:
        overall = "inconclusive"
    return LindbergVerdict(overall, per_eps, trace, tol)
