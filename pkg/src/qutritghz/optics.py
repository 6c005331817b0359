"""Post-selected path-identity simulation of two qutrit pair sources with layer-wise exchanges.

Each source emits ``sum_j w_j |j>|j>`` over path layers j. An exchange
``(p, q, layer)`` swaps the output arms of photons found in arms p and q
in that layer. A term of the source product survives post-selection when
every arm ends up holding exactly one photon (fourfold coincidence); the
arm contents of the surviving terms define the output qudits.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field

import numpy as np

from qutritghz.measurement import fourier_basis, project_trigger
from qutritghz.qudit import DensityMatrix, fidelity_with_pure
from qutritghz.states import damped_ghz, ghz_state


@dataclass(frozen=True)
class PairSourceSpec:
    photons: tuple[str, str]
    d: int = 3
    weights: tuple | None = None

    def __post_init__(self):
        if len(self.photons) != 2 or self.photons[0] == self.photons[1]:
            raise ValueError(f"a pair source needs two distinct photon labels, got {self.photons}")

    def amplitudes(self) -> np.ndarray:
        w = np.ones(self.d) if self.weights is None else np.asarray(self.weights, dtype=complex)
        if w.shape != (self.d,):
            raise ValueError(f"need {self.d} layer weights")
        return w / np.linalg.norm(w)


@dataclass(frozen=True)
class ExchangeSpec:
    photon1: str
    photon2: str
    layer: int


@dataclass(frozen=True)
class PhotonOverlap:
    """Pairwise internal-state overlaps, each equal to the ideal HOM visibility of the pair."""

    values: dict = field(default_factory=dict)

    def __post_init__(self):
        clean = {}
        for pair, s in self.values.items():
            if not 0 <= s <= 1:
                raise ValueError(f"overlap {pair} = {s} outside [0, 1]")
            clean[frozenset(pair)] = float(s)
        object.__setattr__(self, "values", clean)

    def get(self, p: str, q: str) -> float:
        return self.values.get(frozenset((p, q)), 1.0)

    @classmethod
    def from_triple(cls, s_bc: float, s_bd: float, s_cd: float) -> "PhotonOverlap":
        return cls({("b", "c"): s_bc, ("b", "d"): s_bd, ("c", "d"): s_cd})


DEFAULT_SOURCES = (PairSourceSpec(("a", "b")), PairSourceSpec(("c", "d")))
DEFAULT_EXCHANGES = (ExchangeSpec("b", "c", 1), ExchangeSpec("b", "d", 2))
# default overlaps: HOM visibilities of the three filtered photons
MEASURED_OVERLAPS = PhotonOverlap.from_triple(0.974, 0.996, 0.981)


@dataclass
class PostselectedResult:
    state: DensityMatrix
    success_probability: float
    branches: list
    damping: np.ndarray

    def fidelity(self) -> float:
        n = self.state.n_parties
        return fidelity_with_pure(self.state, ghz_state(n, self.state.dims[0]))

    def to_dict(self) -> dict:
        m = self.state.matrix
        return {
            "dims": list(self.state.dims),
            "success_probability": self.success_probability,
            "fidelity": self.fidelity(),
            "damping": self.damping.tolist(),
            "state": {"real": m.real.tolist(), "imag": m.imag.tolist()},
        }


def _route(arm_of: dict, layer_of: dict, exchanges) -> dict:
    """Final arm of each photon after applying the exchanges in order."""
    arm = dict(arm_of)
    for ex in exchanges:
        for photon, a in arm.items():
            if layer_of[photon] != ex.layer:
                continue
            if a == ex.photon1:
                arm[photon] = ex.photon2
            elif a == ex.photon2:
                arm[photon] = ex.photon1
    return arm


def simulate_postselected(sources=DEFAULT_SOURCES, exchanges=DEFAULT_EXCHANGES, overlaps=None, phases=None):
    """Fourfold-coincidence output of the path-identity circuit.

    Returns a :class:`PostselectedResult` with the state on the arms in
    source order (a, b, c, d for the default circuit) and the coincidence
    probability. Partial distinguishability enters as branch-coherence
    damping: a surviving branch j that routes photons through exchanges
    carries the product of those exchanges' overlaps ``f_j``, and the
    coherence between two different branches is ``f_j * f_k``.
    """
    overlaps = overlaps or PhotonOverlap()
    photons = [p for src in sources for p in src.photons]
    if len(set(photons)) != len(photons):
        raise ValueError("photon labels must be unique across sources")
    d = sources[0].d
    if any(src.d != d for src in sources):
        raise ValueError("all sources must share one path dimension")
    for ex in exchanges:
        if ex.photon1 not in photons or ex.photon2 not in photons or ex.photon1 == ex.photon2:
            raise ValueError(f"exchange {ex} names unknown or identical photons")
        if not 0 <= ex.layer < d:
            raise ValueError(f"exchange {ex} uses a layer outside 0..{d - 1}")

    amps = [src.amplitudes() for src in sources]
    n = len(photons)
    psi = np.zeros(d**n, dtype=complex)
    tags = {}
    for layers in itertools.product(range(d), repeat=len(sources)):
        layer_of = {p: layers[i] for i, src in enumerate(sources) for p in src.photons}
        arm = _route({p: p for p in photons}, layer_of, exchanges)
        if sorted(arm.values()) != sorted(photons):
            continue
        amp = np.prod([amps[i][layers[i]] for i in range(len(sources))])
        digits = tuple(layer_of[next(p for p in photons if arm[p] == out)] for out in photons)
        idx = int(np.ravel_multi_index(digits, (d,) * n))
        psi[idx] += amp
        swapped = [ex for ex in exchanges if any(layer_of[p] == ex.layer and arm[p] != p for p in photons)]
        tags[idx] = math.prod(overlaps.get(ex.photon1, ex.photon2) for ex in swapped)

    prob = float(np.vdot(psi, psi).real)
    if prob == 0:
        raise ValueError("no source term survives post-selection")
    psi /= np.sqrt(prob)
    support = sorted(tags)
    rho = np.outer(psi, psi.conj())
    lam = np.ones((len(support), len(support)))
    for i, j in itertools.permutations(range(len(support)), 2):
        lam[i, j] = tags[support[i]] * tags[support[j]]
    rho[np.ix_(support, support)] *= lam
    if phases is not None:
        ph = np.exp(1j * np.asarray(phases, dtype=float))
        if ph.size != len(support):
            raise ValueError(f"need one phase per surviving branch ({len(support)})")
        rho[np.ix_(support, support)] *= np.outer(ph, ph.conj())
    return PostselectedResult(DensityMatrix((d,) * n, rho), prob, support, lam)


def branch_damping_from_overlaps(s_bc: float, s_bd: float) -> np.ndarray:
    """Damping matrix of the default circuit: l01 = s_bc, l02 = s_bd, l12 = s_bc * s_bd."""
    lam = np.array([[1.0, s_bc, s_bd], [s_bc, 1.0, s_bc * s_bd], [s_bd, s_bc * s_bd, 1.0]])
    return lam


def damped_output(s_bc: float, s_bd: float) -> DensityMatrix:
    """Closed form of the default circuit's output, via :func:`damped_ghz`."""
    return damped_ghz(4, 3, branch_damping_from_overlaps(s_bc, s_bd))


def hom_coincidence(s: float, t: float) -> float:
    """Normalized two-photon coincidence probability 0.5 (1 - s exp(-t^2)) at delay t."""
    if not 0 <= s <= 1:
        raise ValueError("overlap must lie in [0, 1]")
    if t < 0:
        raise ValueError("delay must be nonnegative")
    return 0.5 * (1 - s * math.exp(-t * t))


def hom_visibility(s: float, t: float = 0.0) -> float:
    """Dip depth relative to the distinguishable baseline 1/2."""
    return 1 - hom_coincidence(s, t) / 0.5


def trigger_to_three(state4) -> tuple:
    """Project the first photon onto the uniform superposition of its three paths."""
    return project_trigger(state4, 0, fourier_basis(3).vector(0))


def load_circuit(text: str) -> dict:
    """Parse a JSON circuit description into keyword arguments for :func:`run_circuit`.

    Keys (all optional): ``sources`` (list of photon-label pairs),
    ``exchanges`` (list of ``[p, q, layer]``), ``overlaps``
    (``{"bc": s, ...}``), ``weights`` (one list per source), ``phases``,
    ``trigger`` (bool).
    """
    cfg = json.loads(text)
    weights = cfg.get("weights") or [None] * len(cfg.get("sources", DEFAULT_SOURCES))
    if "sources" in cfg:
        sources = tuple(PairSourceSpec(tuple(p), 3, None if w is None else tuple(w)) for p, w in zip(cfg["sources"], weights))
    else:
        sources = tuple(PairSourceSpec(s.photons, s.d, None if w is None else tuple(w)) for s, w in zip(DEFAULT_SOURCES, weights))
    exchanges = tuple(ExchangeSpec(p, q, int(l)) for p, q, l in cfg["exchanges"]) if "exchanges" in cfg else DEFAULT_EXCHANGES
    overlaps = PhotonOverlap({tuple(k): v for k, v in cfg.get("overlaps", {}).items()})
    return {
        "sources": sources,
        "exchanges": exchanges,
        "overlaps": overlaps,
        "phases": cfg.get("phases"),
        "trigger": bool(cfg.get("trigger", False)),
    }


def run_circuit(sources=DEFAULT_SOURCES, exchanges=DEFAULT_EXCHANGES, overlaps=None, phases=None, trigger=False) -> dict:
    res = simulate_postselected(sources, exchanges, overlaps, phases)
    out = res.to_dict()
    if trigger:
        rho3, p = trigger_to_three(res.state)
        out["trigger"] = {
            "probability": p,
            "fidelity": None if rho3 is None else fidelity_with_pure(rho3, ghz_state(3, 3)),
            "state": None if rho3 is None else {"real": rho3.matrix.real.tolist(), "imag": rho3.matrix.imag.tolist()},
        }
    return out
