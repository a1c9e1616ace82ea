"""Hubbard-level parameters, effective exchange couplings and gate-time estimates.

Sites are the six orbital levels ``a1 a2 a3 b1 b2 b3``; levels 1 and 2 of a
qubit belong to its doubly occupied dot. Pair-keyed parameters use the pair
name (``"a1a3"``, ``"a3b1"``). Energies are in arbitrary but consistent units
(micro-eV on the device path).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Mapping

import numpy as np

from .dynamics import PulseSequence
from .spin import SPIN_LABELS, exchange_op, pair_name

SITES = SPIN_LABELS
PLANCK_EV_S = 4.135667e-15

_INTRA_ALL = ("a1a2", "a1a3", "a2a3", "b1b2", "b1b3", "b2b3")
_INTRA_TUNNEL = ("a1a3", "a2a3", "b1b3", "b2b3")

# pairs carrying tunneling / Coulomb / H_J terms per configuration
PAIRS = {
    "A": {
        "t": _INTRA_TUNNEL + ("a3b1", "a3b2"),
        "U_pair": _INTRA_ALL + ("a3b1", "a3b2"),
        "J": _INTRA_ALL + ("a3b1", "a3b2"),
        "effective": _INTRA_ALL + ("a3b1", "a3b2"),
    },
    "B": {
        "t": _INTRA_TUNNEL + ("a1b1", "a2b2"),
        "U_pair": _INTRA_ALL + ("a1b1", "a1b2", "a2b1", "a2b2"),
        "J": _INTRA_ALL + ("a1b1", "a2b2"),
        "effective": _INTRA_ALL + ("a1b1", "a1b2", "a2b1", "a2b2"),
    },
}


class PerturbativeRegimeError(ValueError):
    """An excitation energy entering the effective couplings is not positive."""


def _config_name(config) -> str:
    name = getattr(config, "name", config)
    if name not in PAIRS:
        raise ValueError(f"configuration must be 'A' or 'B', got {name!r}")
    return name


@dataclass(frozen=True)
class HubbardParameters:
    """Microscopic parameters of the two-qubit Hubbard-like model.

    Missing entries default to zero; every site needs a positive ``U_site``.
    """

    eps: Mapping[str, float] = field(default_factory=dict)
    t: Mapping[str, float] = field(default_factory=dict)
    U_site: Mapping[str, float] = field(default_factory=dict)
    U_pair: Mapping[str, float] = field(default_factory=dict)
    Je: Mapping[str, float] = field(default_factory=dict)
    Jp: Mapping[str, float] = field(default_factory=dict)
    Jt: Mapping[str, float] = field(default_factory=dict)

    _PAIR_FIELDS = ("t", "U_pair", "Je", "Jp", "Jt")

    def __post_init__(self):
        for name in ("eps", "U_site"):
            d = {k: float(v) for k, v in getattr(self, name).items()}
            bad = set(d) - set(SITES)
            if bad:
                raise ValueError(f"{name}: unknown sites {sorted(bad)}")
            object.__setattr__(self, name, d)
        for name in self._PAIR_FIELDS:
            d = {pair_name(k): float(v) for k, v in getattr(self, name).items()}
            object.__setattr__(self, name, d)
        for name in ("eps", "U_site") + self._PAIR_FIELDS:
            vals = list(getattr(self, name).values())
            if not np.all(np.isfinite(vals)):
                raise ValueError(f"{name}: parameters must be finite")
        missing = [s for s in SITES if self.U_site.get(s, 0.0) <= 0]
        if missing:
            raise ValueError(f"U_site must be > 0 on every site; missing or nonpositive: {missing}")

    @classmethod
    def from_dict(cls, doc: Mapping) -> "HubbardParameters":
        unknown = set(doc) - {"eps", "t", "U_site", "U_pair", "Je", "Jp", "Jt", "configuration"}
        if unknown:
            raise ValueError(f"unknown parameter groups {sorted(unknown)}")
        return cls(**{k: v for k, v in doc.items() if k != "configuration"})

    def to_dict(self) -> dict:
        return {k: dict(getattr(self, k)) for k in ("eps", "t", "U_site", "U_pair", "Je", "Jp", "Jt")}

    def check(self, config) -> None:
        """Reject pair parameters that do not exist in ``config``."""
        allowed = PAIRS[_config_name(config)]
        for name, key in (("t", "t"), ("U_pair", "U_pair"), ("Je", "J"), ("Jp", "J"), ("Jt", "J")):
            bad = sorted(p for p, v in getattr(self, name).items() if p not in allowed[key] and v != 0.0)
            if bad:
                raise ValueError(f"{name}: pairs {bad} do not appear in configuration {_config_name(config)}")

    def scaled_tunneling(self, factor: float) -> "HubbardParameters":
        return HubbardParameters(
            self.eps, {k: v * factor for k, v in self.t.items()}, self.U_site, self.U_pair, self.Je, self.Jp, self.Jt
        )

    def off_diagonal_scale(self) -> float:
        """Largest magnitude among t, Je, Jp, Jt."""
        vals = [abs(v) for name in ("t", "Je", "Jp", "Jt") for v in getattr(self, name).values()]
        return max(vals, default=0.0)


# ---------------------------------------------------------------------------
# classical occupation energies and couplings
# ---------------------------------------------------------------------------


def occupation_energy(params: HubbardParameters, config, occupation) -> float:
    """Energy of a charge configuration with no tunneling.

    ``occupation`` lists electrons per level in the order ``a1 a2 a3 b1 b2 b3``.
    """
    name = _config_name(config)
    n = dict(zip(SITES, occupation))
    e = sum(params.eps.get(s, 0.0) * n[s] for s in SITES)
    e += sum(params.U_site[s] for s in SITES if n[s] == 2)
    for p in PAIRS[name]["U_pair"]:
        e += params.U_pair.get(p, 0.0) * n[p[:2]] * n[p[2:]]
    return float(e)


_REFERENCE = (1, 1, 1, 1, 1, 1)
_INTRA_EXCITED = {1: (0, 1, 2), 2: (1, 0, 2), 3: (2, 0, 1), 4: (0, 2, 1)}


def energy_differences(params: HubbardParameters, config) -> dict[str, float]:
    """Virtual-state excitation energies above the (111,111) configuration.

    Keys are ``dE1a..dE4a``, ``dE1b..dE4b`` and, for configuration A,
    ``dE5`` (3a doubly occupied, 1b empty) and ``dE6`` (3a doubly occupied,
    2b empty). Raises ``PerturbativeRegimeError`` if any is <= 0.
    """
    name = _config_name(config)
    params.check(name)
    e0 = occupation_energy(params, name, _REFERENCE)
    out = {}
    for k, occ in _INTRA_EXCITED.items():
        out[f"dE{k}a"] = occupation_energy(params, name, occ + (1, 1, 1)) - e0
        out[f"dE{k}b"] = occupation_energy(params, name, (1, 1, 1) + occ) - e0
    if name == "A":
        out["dE5"] = occupation_energy(params, name, (1, 1, 2, 0, 1, 1)) - e0
        out["dE6"] = occupation_energy(params, name, (1, 1, 2, 1, 0, 1)) - e0
    bad = {k: v for k, v in out.items() if v <= 0}
    if bad:
        raise PerturbativeRegimeError(f"nonpositive excitation energies {bad}")
    return out


def _hop_coupling(params: HubbardParameters, pair: str, de: float) -> float:
    hop = params.t.get(pair, 0.0) - params.Jt.get(pair, 0.0)
    return 4.0 * hop**2 / de - 2.0 * params.Je.get(pair, 0.0)


def effective_couplings(params: HubbardParameters, config) -> dict[str, float]:
    """Heisenberg couplings ``J[pair]`` of the low-energy spin model."""
    name = _config_name(config)
    de = energy_differences(params, name)
    out = {}
    for q in "ab":
        out[f"{q}1{q}3"] = _hop_coupling(params, f"{q}1{q}3", de[f"dE1{q}"])
        out[f"{q}2{q}3"] = _hop_coupling(params, f"{q}2{q}3", de[f"dE2{q}"])
        p12 = f"{q}1{q}2"
        out[p12] = (1 / de[f"dE3{q}"] + 1 / de[f"dE4{q}"]) * 4.0 * params.Jt.get(p12, 0.0) ** 2 - 2.0 * params.Je.get(
            p12, 0.0
        )
    if name == "A":
        out["a3b1"] = _hop_coupling(params, "a3b1", de["dE5"])
        out["a3b2"] = _hop_coupling(params, "a3b2", de["dE6"])
    else:
        out["a1b1"] = -2.0 * params.Je.get("a1b1", 0.0)
        out["a2b2"] = -2.0 * params.Je.get("a2b2", 0.0)
        out["a1b2"] = 0.0
        out["a2b1"] = 0.0
    return out


def heisenberg_hamiltonian(couplings: Mapping[str, float]) -> np.ndarray:
    """``sum J_ij S_i.S_j`` on the 64-dim spin space."""
    h = np.zeros((64, 64))
    for p, j in couplings.items():
        if j != 0.0:
            h += j * exchange_op(p)
    return h


def effective_spectrum(params: HubbardParameters, config, n_levels: int = 64) -> np.ndarray:
    return np.linalg.eigvalsh(heisenberg_hamiltonian(effective_couplings(params, config)))[:n_levels]


# ---------------------------------------------------------------------------
# exact diagonalization of the fermionic model
# ---------------------------------------------------------------------------

N_MODES = 2 * len(SITES)


def _mode(site: str, spin: int) -> int:
    """Spin-orbital index; ``spin`` is 0 for up, 1 for down."""
    return 2 * SITES.index(site) + spin


def _apply(ops: tuple, state: int) -> tuple[int, int] | None:
    """Apply a product of ladder operators (rightmost acts first) to a Fock bitmask."""
    sign = 1
    for mode, create in reversed(ops):
        occupied = (state >> mode) & 1
        if occupied == create:
            return None
        if bin(state & ((1 << mode) - 1)).count("1") % 2:
            sign = -sign
        state ^= 1 << mode
    return sign, state


def _cdag(site, s):
    return (_mode(site, s), 1)


def _c(site, s):
    return (_mode(site, s), 0)


def _number(site, s):
    return (_cdag(site, s), _c(site, s))


def _hubbard_terms(params: HubbardParameters, name: str) -> list[tuple[float, tuple]]:
    """Operator strings of the Hamiltonian; hermitian conjugates added explicitly."""
    terms: list[tuple[float, tuple]] = []

    def add(coef, ops, hc=False):
        if coef == 0.0:
            return
        terms.append((coef, ops))
        if hc:
            terms.append((np.conj(coef), tuple((m, 1 - d) for m, d in reversed(ops))))

    for s in SITES:
        for sp in (0, 1):
            add(params.eps.get(s, 0.0), _number(s, sp))
        add(params.U_site[s], _number(s, 0) + _number(s, 1))
    for p in PAIRS[name]["t"]:
        i, j = p[:2], p[2:]
        for sp in (0, 1):
            add(params.t.get(p, 0.0), (_cdag(i, sp), _c(j, sp)), hc=True)
    for p in PAIRS[name]["U_pair"]:
        i, j = p[:2], p[2:]
        for si in (0, 1):
            for sj in (0, 1):
                add(params.U_pair.get(p, 0.0), _number(i, si) + _number(j, sj))
    for p in PAIRS[name]["J"]:
        i, j = p[:2], p[2:]
        je, jp, jt = params.Je.get(p, 0.0), params.Jp.get(p, 0.0), params.Jt.get(p, 0.0)
        for sp in (0, 1):
            add(-je, _number(i, sp) + _number(j, sp))
        add(-je, (_cdag(i, 1), _cdag(j, 0), _c(j, 1), _c(i, 0)), hc=True)
        add(-jp, (_cdag(j, 0), _cdag(j, 1), _c(i, 0), _c(i, 1)), hc=True)
        # occupation-modulated hopping, occupation measured on the two sites of the pair
        for k in (i, j):
            for sp in (0, 1):
                add(-jt, _number(k, sp) + (_cdag(i, 1 - sp), _c(j, 1 - sp)), hc=True)
    return terms


@lru_cache(maxsize=None)
def fock_sector(n_electrons: int = 6, two_sz: int | None = None) -> tuple[int, ...]:
    """Bitmasks with ``n_electrons`` set, optionally restricted to ``2*Sz``."""
    up_modes = range(0, N_MODES, 2)
    out = []
    for modes in itertools.combinations(range(N_MODES), n_electrons):
        if two_sz is not None:
            n_up = sum(1 for m in modes if m in up_modes)
            if 2 * n_up - n_electrons != two_sz:
                continue
        out.append(sum(1 << m for m in modes))
    return tuple(out)


def hubbard_matrix(params: HubbardParameters, config, two_sz: int | None = None) -> np.ndarray:
    """Dense Hamiltonian on the 6-electron Fock sector (optionally one ``Sz`` block)."""
    name = _config_name(config)
    params.check(name)
    basis = fock_sector(6, two_sz)
    index = {s: k for k, s in enumerate(basis)}
    h = np.zeros((len(basis), len(basis)), dtype=complex)
    for coef, ops in _hubbard_terms(params, name):
        for col, state in enumerate(basis):
            res = _apply(ops, state)
            if res is None:
                continue
            sign, new = res
            h[index[new], col] += sign * coef
    if not np.allclose(h, h.conj().T, atol=1e-12):
        raise RuntimeError("assembled Hubbard Hamiltonian is not Hermitian")
    return h


def hubbard_oracle_spectrum(params: HubbardParameters, config, n_levels: int = 14) -> np.ndarray:
    """Lowest ``n_levels`` eigenvalues of the 6-electron model, Sz blocks diagonalized separately."""
    if n_levels < 2:
        raise ValueError("n_levels must be >= 2")
    evals = [np.linalg.eigvalsh(hubbard_matrix(params, config, two_sz)) for two_sz in range(-6, 7, 2)]
    return np.sort(np.concatenate(evals))[:n_levels]


def spectrum_mismatch(params: HubbardParameters, config, n_levels: int = 14) -> float:
    """Relative distance between oracle and effective low-energy spectra, ground states aligned."""
    oracle = hubbard_oracle_spectrum(params, config, n_levels)
    eff = effective_spectrum(params, config, n_levels)
    oracle = oracle - oracle[0]
    eff = eff - eff[0]
    return float(np.linalg.norm(oracle - eff) / np.linalg.norm(eff))


# ---------------------------------------------------------------------------
# gate time
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DeviceParameters:
    """Tunneling rate and singlet-triplet splitting, both in micro-eV.

    ``metadata`` carries geometry and valley-splitting values through
    unchanged; they do not enter any computation.
    """

    TR: float
    dE_ST: float
    metadata: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if not (self.TR > 0 and self.dE_ST > 0):
            raise ValueError(f"TR and dE_ST must be positive, got TR={self.TR}, dE_ST={self.dE_ST}")

    @property
    def jmax_ueV(self) -> float:
        return self.TR**2 / self.dE_ST

    @classmethod
    def from_dict(cls, doc: Mapping) -> "DeviceParameters":
        meta = {k: v for k, v in doc.items() if k not in ("TR", "dE_ST")}
        return cls(float(doc["TR"]), float(doc["dE_ST"]), meta)


@dataclass(frozen=True)
class GateTimeEstimate:
    jmax_ueV: float
    t_dimensionless: float
    t_ns: float

    def as_dict(self) -> dict:
        return {"jmax_ueV": self.jmax_ueV, "t_dimensionless": self.t_dimensionless, "t_ns": self.t_ns}


def unit_time_ns(jmax_ueV: float) -> float:
    """Length of one ``h/Jmax`` time unit in ns."""
    if jmax_ueV <= 0:
        raise ValueError(f"Jmax must be positive, got {jmax_ueV}")
    return PLANCK_EV_S / (jmax_ueV * 1e-6) * 1e9


def estimate_gate_time(dev: DeviceParameters | float, seq: PulseSequence | float, rule: str = "max") -> GateTimeEstimate:
    """Physical duration of a sequence.

    ``dev`` is a DeviceParameters or a Jmax value in micro-eV; ``seq`` is a
    sequence or an already summed dimensionless time. ``rule="max"`` counts
    each step by its longest pulse, ``rule="sum"`` adds every pulse.
    """
    jmax = dev.jmax_ueV if isinstance(dev, DeviceParameters) else float(dev)
    if isinstance(seq, PulseSequence):
        if rule not in ("max", "sum"):
            raise ValueError(f"rule must be 'max' or 'sum', got {rule!r}")
        t_dimless = seq.total_time("simultaneous" if rule == "max" else "sequential")
    else:
        t_dimless = float(seq)
    return GateTimeEstimate(jmax, t_dimless, t_dimless * unit_time_ns(jmax))


def jmax_for_gate_time(t_dimensionless: float, t_ns: float) -> float:
    """Jmax (micro-eV) at which a sequence of the given length takes ``t_ns``."""
    if t_ns <= 0:
        raise ValueError("target time must be positive")
    return t_dimensionless * PLANCK_EV_S / (t_ns * 1e-9) * 1e6
