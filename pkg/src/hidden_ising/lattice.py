"""Toric grid, strip layout of hidden preferences, and regime classification.

Columns are laid out left to right as A, S1, B, S2::

    [0, n)          A   preference +1
    [n, n+k)        S1  neutral
    [n+k, n+k+m)    B   preference -1
    [n+k+m, N)      S2  neutral

Sites are indexed row-major, ``index = row * N + col``.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import NamedTuple

import numpy as np


class InvalidSpec(ValueError):
    """Raised when model parameters violate the layout or the strict assumptions."""


class Site(NamedTuple):
    row: int
    col: int

    def reduced(self, N: int) -> "Site":
        return Site(self.row % N, self.col % N)


class RegionLabel(enum.Enum):
    A = "A"
    S1 = "S1"
    B = "B"
    S2 = "S2"


class Regime(enum.Enum):
    LowAlpha = "LowAlpha"
    CriticalEqual = "CriticalEqual"
    CriticalStrict = "CriticalStrict"
    MidAlpha = "MidAlpha"
    HighAlpha = "HighAlpha"
    VeryHighAlpha = "VeryHighAlpha"
    Unsupported = "Unsupported"


def _as_fraction(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise InvalidSpec("alpha must be a number, not a boolean")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise InvalidSpec(f"cannot parse alpha {value!r}") from exc
    if isinstance(value, float):
        # floats are accepted only when they are exact small rationals
        frac = Fraction(value).limit_denominator(10**6)
        if float(frac) != value:
            raise InvalidSpec(f"alpha {value!r} is not an exact rational; pass 'p/q'")
        return frac
    raise InvalidSpec(f"unsupported alpha type {type(value).__name__}")


@dataclass(frozen=True)
class ModelSpec:
    """Grid side, strip widths and interaction strength.

    ``alpha`` is stored as an exact :class:`~fractions.Fraction`. With
    ``strict=True`` the construction also enforces the standing assumptions
    (N even, 3 <= n <= m, 1 <= k < N/2, integer alpha outside (n, m]).
    Non-strict specs allow tiny grids such as N=4 for brute-force work, and
    alpha = 0 for a pure-field landscape.
    """

    N: int
    n: int
    m: int
    k: int
    alpha: Fraction
    strict: bool = True

    def __post_init__(self) -> None:
        object.__setattr__(self, "alpha", _as_fraction(self.alpha))
        for name in ("N", "n", "m", "k"):
            value = getattr(self, name)
            if not isinstance(value, (int, np.integer)) or isinstance(value, bool):
                raise InvalidSpec(f"{name} must be an integer, got {value!r}")
            object.__setattr__(self, name, int(value))
        N, n, m, k, alpha = self.N, self.n, self.m, self.k, self.alpha
        if N < 2:
            raise InvalidSpec("N must be at least 2")
        if n < 1 or k < 1:
            raise InvalidSpec("n and k must be at least 1")
        if m < n:
            raise InvalidSpec(f"m={m} must be at least n={n}")
        if n + m + 2 * k != N:
            raise InvalidSpec(f"strip widths do not partition the columns: {n}+{m}+2*{k} != {N}")
        if alpha < 0 or (self.strict and alpha == 0):
            raise InvalidSpec("alpha must be positive")
        if self.strict:
            problems = self.assumption_violations()
            if problems:
                raise InvalidSpec("; ".join(problems))

    def assumption_violations(self) -> list[str]:
        """Human-readable list of violated standing assumptions (empty if none)."""
        N, n, m, k, alpha = self.N, self.n, self.m, self.k, self.alpha
        out = []
        if N % 2:
            out.append("N must be even")
        if N < 4:
            out.append("N must be at least 4")
        if not 3 <= n <= m:
            out.append("need 3 <= n <= m")
        if not 1 <= k < N / 2:
            out.append("need 1 <= k < N/2")
        if alpha.denominator != 1:
            out.append("alpha must be an integer")
        if not (2 <= alpha <= n or alpha >= m + 1):
            out.append("alpha must satisfy 2 <= alpha <= n or alpha >= m+1")
        return out

    # -- geometry -------------------------------------------------------
    @property
    def sites(self) -> int:
        return self.N * self.N

    @property
    def edge_count(self) -> int:
        return 2 * self.N * self.N

    @cached_property
    def column_labels(self) -> tuple[RegionLabel, ...]:
        n, m, k = self.n, self.m, self.k
        return (
            (RegionLabel.A,) * n
            + (RegionLabel.S1,) * k
            + (RegionLabel.B,) * m
            + (RegionLabel.S2,) * k
        )

    @cached_property
    def columns(self) -> dict[RegionLabel, range]:
        n, m, k, N = self.n, self.m, self.k, self.N
        return {
            RegionLabel.A: range(0, n),
            RegionLabel.S1: range(n, n + k),
            RegionLabel.B: range(n + k, n + k + m),
            RegionLabel.S2: range(n + k + m, N),
        }

    @cached_property
    def preference(self) -> np.ndarray:
        """Hidden preference per site as an int8 array of length N^2."""
        col = np.zeros(self.N, dtype=np.int8)
        col[self.columns[RegionLabel.A].start : self.columns[RegionLabel.A].stop] = 1
        col[self.columns[RegionLabel.B].start : self.columns[RegionLabel.B].stop] = -1
        pref = np.tile(col, self.N)
        pref.setflags(write=False)
        return pref

    @cached_property
    def neighbor_table(self) -> np.ndarray:
        """(N^2, 4) int32 table of up, down, left, right neighbours."""
        N = self.N
        idx = np.arange(N * N)
        r, c = np.divmod(idx, N)
        table = np.stack(
            [((r - 1) % N) * N + c, ((r + 1) % N) * N + c, r * N + (c - 1) % N, r * N + (c + 1) % N],
            axis=1,
        ).astype(np.int32)
        table.setflags(write=False)
        return table

    @cached_property
    def edges(self) -> np.ndarray:
        """(2N^2, 2) array of undirected edges: each site to its down and right neighbour."""
        t = self.neighbor_table
        idx = np.arange(self.sites, dtype=np.int32)
        out = np.concatenate([np.stack([idx, t[:, 1]], 1), np.stack([idx, t[:, 3]], 1)])
        out.setflags(write=False)
        return out

    def index(self, site: Site | tuple[int, int]) -> int:
        r, c = site
        return (r % self.N) * self.N + (c % self.N)

    def site(self, index: int) -> Site:
        return Site(*divmod(int(index), self.N))

    # -- regime ---------------------------------------------------------
    @cached_property
    def alpha_star(self) -> Fraction | None:
        """Threshold (N(m-1) - 2m)/(m-2) separating the two highest-alpha regimes."""
        if self.m == 2:
            return None
        return Fraction(self.N * (self.m - 1) - 2 * self.m, self.m - 2)

    @cached_property
    def regime(self) -> Regime:
        return classify_regime(self)

    # -- exact energy helpers --------------------------------------------
    @property
    def energy_scale(self) -> int:
        """Denominator q of alpha; ``q * H`` is an integer for every configuration."""
        return self.alpha.denominator

    def unscale(self, scaled: int) -> Fraction:
        return Fraction(int(scaled), self.energy_scale)

    # -- serialisation ---------------------------------------------------
    def to_dict(self) -> dict:
        a = self.alpha
        return {
            "N": self.N,
            "n": self.n,
            "m": self.m,
            "k": self.k,
            "alpha": a.numerator if a.denominator == 1 else f"{a.numerator}/{a.denominator}",
            "strict": self.strict,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, data: dict) -> "ModelSpec":
        try:
            return cls(
                N=data["N"],
                n=data["n"],
                m=data["m"],
                k=data["k"],
                alpha=data["alpha"],
                strict=bool(data.get("strict", True)),
            )
        except KeyError as exc:
            raise InvalidSpec(f"missing key {exc.args[0]!r}") from exc

    @classmethod
    def from_json(cls, text: str) -> "ModelSpec":
        return cls.from_dict(json.loads(text))

    def __str__(self) -> str:
        return f"ModelSpec(N={self.N}, n={self.n}, m={self.m}, k={self.k}, alpha={self.alpha})"


def build_layout(spec: ModelSpec) -> dict[Site, RegionLabel]:
    labels = spec.column_labels
    return {Site(r, c): labels[c] for r in range(spec.N) for c in range(spec.N)}


def region_of(spec: ModelSpec, site: Site | tuple[int, int]) -> RegionLabel:
    return spec.column_labels[site[1] % spec.N]


def hidden_preference(spec: ModelSpec, site: Site | tuple[int, int]) -> int:
    return int(spec.preference[spec.index(site)])


def neighbors(spec: ModelSpec, site: Site | tuple[int, int]) -> set[Site]:
    N = spec.N
    r, c = site[0] % N, site[1] % N
    return {Site((r - 1) % N, c), Site((r + 1) % N, c), Site(r, (c - 1) % N), Site(r, (c + 1) % N)}


def classify_regime(spec: ModelSpec) -> Regime:
    if spec.assumption_violations():
        return Regime.Unsupported
    a, n, m, k = spec.alpha, spec.n, spec.m, spec.k
    if 2 <= a < n:
        return Regime.LowAlpha
    if a == n:
        return Regime.CriticalEqual if n == m else Regime.CriticalStrict
    if a < m + 1:
        return Regime.Unsupported
    if a < 2 * k + m:
        return Regime.MidAlpha
    star = spec.alpha_star
    if star is not None and a < star:
        return Regime.HighAlpha
    return Regime.VeryHighAlpha
