"""Local measurement bases, Born-rule tables, trigger projection and count sampling.

A *global setting* is a tuple with one basis label per party. Labels are
``"C"`` (computational), ``"F"`` (Fourier) or an integer ``x`` selecting a
phased-Fourier basis; outcome labels are 0-based integers.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from functools import reduce
from typing import Callable, Hashable, Iterable, Mapping

import numpy as np

from qutritghz.qudit import TOL, DensityMatrix, StateVector, as_density

Setting = tuple[Hashable, ...]


@dataclass(frozen=True)
class MeasurementBasis:
    """``d`` orthonormal vectors, one per row of ``vectors``."""

    d: int
    vectors: np.ndarray
    label: Hashable = None

    def __post_init__(self):
        vecs = np.array(self.vectors, dtype=complex, copy=True)
        if vecs.shape != (self.d, self.d):
            raise ValueError(f"basis of dimension {self.d} needs a {self.d}x{self.d} array")
        gram = vecs.conj() @ vecs.T
        if not np.allclose(gram, np.eye(self.d), atol=TOL, rtol=0):
            raise ValueError("basis vectors are not orthonormal")
        vecs.flags.writeable = False
        object.__setattr__(self, "vectors", vecs)

    def vector(self, a: int) -> StateVector:
        return StateVector((self.d,), self.vectors[a])

    def projectors(self) -> np.ndarray:
        """Array of shape (d, d, d): ``P[a] = |v_a><v_a|``."""
        return np.einsum("ai,aj->aij", self.vectors, self.vectors.conj())


def computational_basis(d: int) -> MeasurementBasis:
    return MeasurementBasis(d, np.eye(d), "C")


def fourier_basis(d: int) -> MeasurementBasis:
    """Vector ``a`` has amplitudes ``omega**(a*j) / sqrt(d)`` with ``omega = exp(2 pi i / d)``."""
    if d < 2:
        raise ValueError("Fourier basis needs d >= 2")
    a, j = np.meshgrid(np.arange(d), np.arange(d), indexing="ij")
    return MeasurementBasis(d, np.exp(2j * np.pi * a * j / d) / np.sqrt(d), "F")


def phased_fourier_basis(d: int, x: int) -> MeasurementBasis:
    """Fourier basis with the extra phase ``gamma**(x*j)``, ``gamma = exp(2 pi i / d**2)``.

    Setting ``x = 0`` is the plain Fourier basis. For ``d = 3`` these are the
    three settings per party used by the default Bell functional.
    """
    if not 0 <= x < d:
        raise ValueError(f"setting must be in 0..{d - 1}, got {x}")
    a, j = np.meshgrid(np.arange(d), np.arange(d), indexing="ij")
    phase = 2j * np.pi * (a * j / d + x * j / d**2)
    return MeasurementBasis(d, np.exp(phase) / np.sqrt(d), int(x))


def basis_for_label(label: Hashable, d: int) -> MeasurementBasis:
    if label == "C":
        return computational_basis(d)
    if label == "F":
        return fourier_basis(d)
    if isinstance(label, (int, np.integer)):
        return phased_fourier_basis(d, int(label))
    raise ValueError(f"unknown basis label {label!r}")


def _label_key(label):
    return (0, label, "") if isinstance(label, (int, np.integer)) else (1, 0, str(label))


def setting_key(setting: Setting):
    return tuple(_label_key(x) for x in setting)


def _parse_label(text: str):
    return int(text) if text.lstrip("-").isdigit() else text


def outcome_distribution(state, bases: Iterable[MeasurementBasis]) -> np.ndarray:
    """Born-rule probabilities, indexed ``p[a_0, a_1, ...]``."""
    rho = as_density(state)
    bases = list(bases)
    if tuple(b.d for b in bases) != rho.dims:
        raise ValueError(f"bases of dims {[b.d for b in bases]} do not match state dims {rho.dims}")
    u = reduce(np.kron, [b.vectors.conj() for b in bases])
    probs = np.real(np.einsum("ai,ij,aj->a", u, rho.matrix, u.conj()))
    probs = np.clip(probs, 0.0, None)
    return (probs / probs.sum()).reshape(rho.dims)


class _Table:
    """Mapping from global setting to an outcome array of shape ``outcomes``."""

    kind = ""
    dtype: type = float

    def __init__(self, data: Mapping[Setting, np.ndarray]):
        if not data:
            raise ValueError("table needs at least one setting")
        items = {}
        shape = None
        for setting, values in data.items():
            arr = np.array(values, dtype=self.dtype, copy=True)
            setting = tuple(int(x) if isinstance(x, np.integer) else x for x in setting)
            if shape is None:
                shape = arr.shape
            if arr.shape != shape or len(setting) != arr.ndim:
                raise ValueError(f"inconsistent entry for setting {setting}: shape {arr.shape}")
            arr.flags.writeable = False
            items[setting] = arr
        self._data = {s: items[s] for s in sorted(items, key=setting_key)}
        self.outcomes = shape
        self._validate()

    def _validate(self):
        pass

    @property
    def n_parties(self) -> int:
        return len(self.outcomes)

    def settings(self) -> list[Setting]:
        return list(self._data)

    def __getitem__(self, setting) -> np.ndarray:
        return self._data[tuple(setting)]

    def __contains__(self, setting) -> bool:
        return tuple(setting) in self._data

    def __len__(self) -> int:
        return len(self._data)

    def items(self):
        return self._data.items()

    def __eq__(self, other):
        if type(other) is not type(self) or self.settings() != other.settings():
            return False
        return all(np.array_equal(self[s], other[s]) for s in self.settings())

    def _format(self, value) -> str:
        return repr(float(value)) if self.dtype is float else str(int(value))

    def to_csv(self) -> str:
        n = self.n_parties
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow([f"s{i}" for i in range(n)] + [f"o{i}" for i in range(n)] + ["value"])
        for setting, arr in self.items():
            for outcome in np.ndindex(arr.shape):
                w.writerow([str(x) for x in setting] + list(outcome) + [self._format(arr[outcome])])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str):
        rows = list(csv.reader(io.StringIO(text)))
        header, rows = rows[0], [r for r in rows[1:] if r]
        n = (len(header) - 1) // 2
        if len(header) != 2 * n + 1 or header[-1] != "value":
            raise ValueError(f"unexpected CSV header {header}")
        entries: dict = {}
        for r in rows:
            setting = tuple(_parse_label(x) for x in r[:n])
            outcome = tuple(int(x) for x in r[n : 2 * n])
            entries.setdefault(setting, {})[outcome] = cls.dtype(r[-1])
        shape = tuple(max(o[i] for e in entries.values() for o in e) + 1 for i in range(n))
        data = {}
        for setting, vals in entries.items():
            arr = np.zeros(shape, dtype=cls.dtype)
            for outcome, v in vals.items():
                arr[outcome] = v
            data[setting] = arr
        return cls(data)

    def to_json(self) -> str:
        payload = {
            "kind": self.kind,
            "outcomes": list(self.outcomes),
            "settings": [
                {"setting": list(s), "values": [self.dtype(v) for v in arr.ravel()]}
                for s, arr in self.items()
            ],
        }
        return json.dumps(payload)

    @classmethod
    def from_json(cls, text: str):
        payload = json.loads(text)
        if payload.get("kind") != cls.kind:
            raise ValueError(f"expected a {cls.kind} table, got {payload.get('kind')!r}")
        shape = tuple(payload["outcomes"])
        return cls(
            {
                tuple(e["setting"]): np.array(e["values"], dtype=cls.dtype).reshape(shape)
                for e in payload["settings"]
            }
        )


class ProbabilityTable(_Table):
    kind = "probability"
    dtype = float

    def _validate(self):
        for setting, arr in self.items():
            if arr.min() < -TOL or abs(arr.sum() - 1) > TOL:
                raise ValueError(f"probabilities for setting {setting} are not a distribution")

    @staticmethod
    def mix(v: float, first: "ProbabilityTable", second: "ProbabilityTable") -> "ProbabilityTable":
        return ProbabilityTable({s: v * first[s] + (1 - v) * second[s] for s in first.settings()})


class CountTable(_Table):
    kind = "count"
    dtype = int

    def _validate(self):
        for setting, arr in self.items():
            if arr.min() < 0:
                raise ValueError(f"negative count for setting {setting}")

    def total(self, setting) -> int:
        return int(self[setting].sum())

    def totals(self) -> dict[Setting, int]:
        return {s: int(arr.sum()) for s, arr in self.items()}

    def frequencies(self) -> ProbabilityTable:
        out = {}
        for s, arr in self.items():
            if arr.sum() == 0:
                raise ValueError(f"setting {s} has no counts")
            out[s] = arr / arr.sum()
        return ProbabilityTable(out)


def probability_table(
    state,
    settings: Iterable[Setting],
    basis: Callable[[Hashable, int], MeasurementBasis] = basis_for_label,
) -> ProbabilityTable:
    """Exact outcome distributions of ``state`` for each global setting."""
    rho = as_density(state)
    data = {}
    for setting in settings:
        setting = tuple(setting)
        if len(setting) != rho.n_parties:
            raise ValueError(f"setting {setting} has wrong length for {rho.n_parties} parties")
        data[setting] = outcome_distribution(rho, [basis(x, d) for x, d in zip(setting, rho.dims)])
    return ProbabilityTable(data)


def project_trigger(state, party: int, vector):
    """Project ``party`` onto ``vector`` and return (post-measurement state, probability).

    The remaining parties keep their order. A pure input yields a
    ``StateVector``; a mixed one a ``DensityMatrix``. When the projection has
    zero probability the state is ``None``.
    """
    vec = vector.amplitudes if isinstance(vector, StateVector) else np.asarray(vector, complex)
    if abs(np.linalg.norm(vec) - 1) > TOL:
        raise ValueError("trigger vector must be normalized")
    dims = state.dims
    if not 0 <= party < len(dims) or dims[party] != vec.size:
        raise ValueError(f"trigger vector of size {vec.size} does not fit party {party} of {dims}")
    if len(dims) < 2:
        raise ValueError("cannot trigger on the only party")
    before = int(np.prod(dims[:party]))
    after = int(np.prod(dims[party + 1 :]))
    kraus = np.kron(np.kron(np.eye(before), vec.conj()[None, :]), np.eye(after))
    rest = dims[:party] + dims[party + 1 :]
    if isinstance(state, StateVector):
        out = kraus @ state.amplitudes
        prob = float(np.vdot(out, out).real)
        if prob < 1e-15:
            return None, 0.0
        return StateVector(rest, out / np.sqrt(prob)), prob
    rho = as_density(state)
    out = kraus @ rho.matrix @ kraus.conj().T
    prob = float(np.trace(out).real)
    if prob < 1e-15:
        return None, 0.0
    return DensityMatrix(rest, out / prob), prob


def sample_counts(pt: ProbabilityTable, shots, seed) -> CountTable:
    """Multinomial draw per setting, settings visited in sorted order.

    ``shots`` is one integer for every setting or a mapping setting -> integer.
    ``seed`` may be an integer or a ``numpy.random.Generator``.
    """
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    data = {}
    for setting, probs in pt.items():
        n = shots[setting] if isinstance(shots, Mapping) else shots
        if n < 0:
            raise ValueError("shots must be nonnegative")
        p = np.clip(probs.ravel(), 0.0, None)
        data[setting] = rng.multinomial(int(n), p / p.sum()).reshape(probs.shape)
    return CountTable(data)


def split_shots(settings: Iterable[Setting], total: int) -> dict[Setting, int]:
    """Split ``total`` evenly; the remainder goes to the first settings in sorted order."""
    ordered = sorted((tuple(s) for s in settings), key=setting_key)
    base, extra = divmod(int(total), len(ordered))
    return {s: base + (1 if i < extra else 0) for i, s in enumerate(ordered)}
