"""Bell functionals as coefficient tensors, their evaluation, and exact LHV bounds.

Coefficients are stored as ``c[a_0, ..., a_{n-1}, x_0, ..., x_{n-1}]``:
outcome indices first, then setting indices.
"""

from __future__ import annotations

import itertools
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from qutritghz.measurement import CountTable, ProbabilityTable, probability_table
from qutritghz.states import ghz_state

REFERENCE_LHV = 7.0
REFERENCE_DIM_BOUNDS = {(2, 2, 2): 7.446, (2, 2, 3): 7.584, (2, 3, 3): 8.225}


class FunctionalFormatError(ValueError):
    pass


@dataclass(frozen=True)
class BellScenario:
    n: int = 3
    m: int = 3
    k: int = 3

    def __post_init__(self):
        if self.n < 2 or self.k < 2 or self.m < 1:
            raise ValueError(f"invalid scenario {self}")

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.k,) * self.n + (self.m,) * self.n


@dataclass(frozen=True)
class BoundChain:
    """LHV bound, dimension-restricted bounds keyed by sorted tuple, and the maximum."""

    lhv: float
    dim_bounds: dict
    algebraic_max: float

    def __post_init__(self):
        values = [self.lhv, *self.dim_bounds.values(), self.algebraic_max]
        if any(b < a for a, b in zip(values, values[1:])):
            raise ValueError(f"bound chain is not non-decreasing: {values}")

    def tiers(self) -> list[tuple[str, float]]:
        out = [("LHV", self.lhv)]
        out += [(dim_label(dims), b) for dims, b in sorted(self.dim_bounds.items(), key=lambda t: t[1])]
        return out

    def to_dict(self) -> dict:
        return {
            "lhv": self.lhv,
            "dim_bounds": {dim_label(k): v for k, v in self.dim_bounds.items()},
            "algebraic_max": self.algebraic_max,
        }


def dim_label(dims) -> str:
    return "(" + ",".join(str(d) for d in dims) + ")"


@dataclass(frozen=True)
class BellFunctional:
    scenario: BellScenario
    coefficients: np.ndarray
    name: str = ""
    bounds: BoundChain | None = field(default=None, compare=False)

    def __post_init__(self):
        c = np.array(self.coefficients, dtype=float, copy=True)
        if c.shape != self.scenario.shape:
            raise ValueError(f"coefficient shape {c.shape} does not match scenario {self.scenario.shape}")
        if not np.all(np.isfinite(c)):
            raise ValueError("coefficients must be finite")
        c.flags.writeable = False
        object.__setattr__(self, "coefficients", c)

    @property
    def n(self) -> int:
        return self.scenario.n

    def settings(self) -> list[tuple[int, ...]]:
        """Global settings with at least one nonzero coefficient, in lexicographic order."""
        n = self.n
        support = np.any(self.coefficients != 0, axis=tuple(range(n)))
        return [tuple(int(i) for i in s) for s in zip(*np.nonzero(support))]

    def block(self, setting) -> np.ndarray:
        return self.coefficients[(Ellipsis,) + tuple(setting)]

    def scaled(self, alpha: float) -> "BellFunctional":
        return BellFunctional(self.scenario, alpha * self.coefficients, self.name)

    def permuted(self, perm) -> "BellFunctional":
        """Relabel parties: new party i is old party ``perm[i]``."""
        n = self.n
        axes = list(perm) + [n + p for p in perm]
        return BellFunctional(self.scenario, np.transpose(self.coefficients, axes), self.name)


def _residues(n: int) -> np.ndarray:
    return np.indices((3,) * n).sum(axis=0) % 3


def default_functional() -> BellFunctional:
    """Three-party, three-setting, three-outcome functional on the settings with x+y+z = 0 mod 3.

    For each such setting the coefficient is 1 on outcomes with a+b+c = r mod 3,
    where r is the residue the ideal qutrit GHZ state produces with certainty
    under the phased-Fourier bases.
    """
    scen = BellScenario(3, 3, 3)
    settings = [s for s in itertools.product(range(3), repeat=3) if sum(s) % 3 == 0]
    table = probability_table(ghz_state(3, 3), settings)
    sums = _residues(3)
    c = np.zeros(scen.shape)
    for s in settings:
        probs = np.array([table[s][sums == r].sum() for r in range(3)])
        winning = np.flatnonzero(probs > 1 - 1e-9)
        if winning.size != 1:
            raise RuntimeError(f"no deterministic outcome sum for setting {s}: {probs}")
        c[(Ellipsis,) + s] = (sums == winning[0]).astype(float)
    chain = BoundChain(REFERENCE_LHV, dict(REFERENCE_DIM_BOUNDS), 9.0)
    return BellFunctional(scen, c, "default", chain)


def winning_residues(f: BellFunctional) -> dict:
    """For a functional of the default form, the residue r per supported setting."""
    sums = _residues(f.n)
    out = {}
    for s in f.settings():
        blk = f.block(s)
        for r in range(3):
            if np.array_equal(blk, (sums == r).astype(float)):
                out[s] = r
    return out


def bell_value(f: BellFunctional, pt: ProbabilityTable) -> float:
    total = 0.0
    for s in f.settings():
        if s not in pt:
            raise KeyError(f"probability table lacks setting {s}")
        total += float(np.sum(f.block(s) * pt[s]))
    return total


def bell_value_from_counts(f: BellFunctional, counts: CountTable) -> tuple[float, dict]:
    totals = {}
    for s in f.settings():
        if s not in counts:
            raise KeyError(f"count table lacks setting {s}")
        totals[s] = counts.total(s)
        if totals[s] == 0:
            raise ValueError(f"setting {s} has zero counts")
    value = sum(float(np.sum(f.block(s) * counts[s])) / totals[s] for s in totals)
    return value, totals


def bell_table(state, f: BellFunctional) -> ProbabilityTable:
    """Outcome table of ``state`` under phased-Fourier settings on every supported setting."""
    return probability_table(state, f.settings())


def uniform_table(f: BellFunctional) -> ProbabilityTable:
    k, n = f.scenario.k, f.n
    return ProbabilityTable({s: np.full((k,) * n, 1.0 / k**n) for s in f.settings()})


def white_noise_value(f: BellFunctional) -> float:
    if not f.settings():
        return 0.0
    return bell_value(f, uniform_table(f))


def ghz_value(f: BellFunctional) -> float:
    """Value of the ideal qutrit GHZ state with phased-Fourier measurements."""
    return bell_value(f, bell_table(ghz_state(f.n, f.scenario.k), f))


def critical_visibility_bell(f: BellFunctional, threshold: float) -> float:
    q_max = ghz_value(f)
    if threshold >= q_max:
        raise ValueError(f"threshold {threshold} is not below the GHZ value {q_max}")
    white = white_noise_value(f)
    return (threshold - white) / (q_max - white)


def classify_violation(value: float, chain: BoundChain, tol: float = 1e-9) -> str:
    """Name of the highest bound strictly exceeded by ``value``.

    Returns ``"none"`` when the LHV bound is not exceeded and ``"(3,3,3)"``
    (the unrestricted qutrit tier) when ``value`` reaches the maximum.
    """
    if value >= chain.algebraic_max - tol:
        return "(3,3,3)"
    label = "none"
    for name, bound in chain.tiers():
        if value > bound:
            label = name
    return label


def _deterministic_strategies(m: int, k: int) -> np.ndarray:
    return np.array(list(itertools.product(range(k), repeat=m)), dtype=np.intp).reshape(-1, m)


def _chunk_values(c, settings, strategies, first: slice) -> np.ndarray:
    n = len(strategies)
    value = 0.0
    for s in settings:
        idx = []
        for p in range(n):
            col = strategies[p][first, s[p]] if p == 0 else strategies[p][:, s[p]]
            shape = [1] * n
            shape[p] = col.size
            idx.append(col.reshape(shape))
        value = value + c[tuple(idx) + tuple(s)]
    return np.broadcast_to(value, tuple([strategies[0][first].shape[0]] + [len(st) for st in strategies[1:]]))


def lhv_max_bruteforce(f: BellFunctional, cap: int = 10**7, workers: int = 1):
    """Exact maximum over deterministic local strategies.

    Returns ``(value, strategy)`` where ``strategy[p][x]`` is party p's
    outcome for setting x. Ties go to the lowest flattened strategy index,
    independent of ``workers``.
    """
    scen = f.scenario
    per_party = scen.k**scen.m
    if per_party**scen.n > cap:
        raise ValueError(f"{per_party**scen.n} strategy tuples exceed the cap of {cap}")
    strategies = [_deterministic_strategies(scen.m, scen.k)] * scen.n
    settings = f.settings()
    if not settings:
        return 0.0, tuple(tuple(0 for _ in range(scen.m)) for _ in range(scen.n))
    c = f.coefficients
    n_chunks = max(1, min(per_party, workers * 4))
    bounds = np.linspace(0, per_party, n_chunks + 1).astype(int)
    chunks = [slice(a, b) for a, b in zip(bounds, bounds[1:]) if b > a]

    def best_in(chunk: slice):
        vals = _chunk_values(c, settings, strategies, chunk)
        flat = int(np.argmax(vals))
        local = np.unravel_index(flat, vals.shape)
        return float(vals[local]), (local[0] + chunk.start,) + tuple(int(i) for i in local[1:])

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            results = list(pool.map(best_in, chunks))
    else:
        results = [best_in(ch) for ch in chunks]
    # chunks are in index order, so the first maximum is the lowest index
    value, index = results[0]
    for v, i in results[1:]:
        if v > value:
            value, index = v, i
    strategy = tuple(tuple(int(o) for o in strategies[p][index[p]]) for p in range(scen.n))
    return value, strategy


def strategy_table(f: BellFunctional, strategy) -> ProbabilityTable:
    """Deterministic behaviour table for ``strategy[p][x]``."""
    k, n = f.scenario.k, f.n
    data = {}
    for s in f.settings():
        arr = np.zeros((k,) * n)
        arr[tuple(strategy[p][s[p]] for p in range(n))] = 1.0
        data[s] = arr
    return ProbabilityTable(data)


# --- text format -----------------------------------------------------------


def save_functional(f: BellFunctional, path) -> None:
    n = f.n
    lines = [f"# {f.name}" if f.name else "# Bell functional"]
    lines.append(f"scenario {n} {f.scenario.m} {f.scenario.k}")
    c = f.coefficients
    for idx in zip(*np.nonzero(c)):
        outcomes, settings = idx[:n], idx[n:]
        fields = [str(int(i)) for i in settings + outcomes] + [format(float(c[idx]), ".17g")]
        lines.append(" ".join(fields))
    Path(path).write_text("\n".join(lines) + "\n")


def load_functional(path) -> BellFunctional:
    text = Path(path).read_text()
    scen = None
    c = None
    name = ""
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if raw.strip().startswith("#") and not name:
            name = raw.strip().lstrip("#").strip()
        if not line:
            continue
        parts = line.split()
        if scen is None:
            if parts[0] != "scenario" or len(parts) != 4:
                raise FunctionalFormatError(f"line {lineno}: expected 'scenario <n> <m> <k>'")
            try:
                scen = BellScenario(*(int(p) for p in parts[1:]))
            except ValueError as exc:
                raise FunctionalFormatError(f"line {lineno}: {exc}") from exc
            c = np.zeros(scen.shape)
            continue
        n = scen.n
        if len(parts) != 2 * n + 1:
            raise FunctionalFormatError(f"line {lineno}: expected {2 * n + 1} fields, got {len(parts)}")
        try:
            settings = tuple(int(p) for p in parts[:n])
            outcomes = tuple(int(p) for p in parts[n : 2 * n])
            coef = float(parts[-1])
        except ValueError as exc:
            raise FunctionalFormatError(f"line {lineno}: {exc}") from exc
        if any(not 0 <= x < scen.m for x in settings):
            raise FunctionalFormatError(f"line {lineno}: setting out of range 0..{scen.m - 1}")
        if any(not 0 <= a < scen.k for a in outcomes):
            raise FunctionalFormatError(f"line {lineno}: outcome out of range 0..{scen.k - 1}")
        c[outcomes + settings] = coef
    if scen is None:
        raise FunctionalFormatError("missing scenario header")
    return BellFunctional(scen, c, name)
