"""Variable-length genetic search with periodic duration refinement.

Refinement uses Nelder-Mead by default. ``refine_method="gradient"`` swaps in
L-BFGS-B driven by exact derivatives of the sector propagators, which scales
to long sequences where the simplex stalls.

A genome is a tuple of steps; each step is a tuple of one or two
``(pair, duration)`` genes, or the single gene ``("wait", duration)``.
Pairs are pair names such as ``"a3b1"``.

Determinism: every child of generation ``g`` at slot ``k`` draws from its own
generator seeded with ``(seed, g, k)``, so results do not depend on the
order in which candidates are evaluated.
"""

from __future__ import annotations

import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from typing import Callable, Optional

import numpy as np
from scipy.optimize import minimize

from .dynamics import (
    DEFAULT_MODE,
    MODES,
    Configuration,
    Pulse,
    PulseSequence,
    PulseStep,
    _background,
    _eig,
    _merge_terms,
    _space_exchange,
    sequence_propagator,
)
from .metrics import objective_f9, objective_f_joint
from .sequences import sequence_to_dict
from .spin import canonical_pair

WAIT = "wait"
MIN_DURATION = 1e-4

Gene = tuple  # (pair name or "wait", duration)
Step = tuple  # tuple of 1-2 genes
Genome = tuple  # tuple of steps
Objective = Callable[[PulseSequence], float]
REFINE_METHODS = ("nelder-mead", "gradient")


@dataclass(frozen=True)
class SearchConfig:
    population: int = 128
    generations: int = 200
    sigma: float = 0.05
    p_duration: float = 0.1
    p_insert: float = 0.1
    p_delete: float = 0.1
    p_pair_swap: float = 0.1
    p_crossover: float = 0.7
    p_second_pulse: float = 0.1
    tournament: int = 4
    elite: int = 2
    simplex_period: int = 10
    simplex_iterations: int = 200
    simplex_top: int = 1
    refine_method: str = "nelder-mead"
    target_f: float = 1e-3
    seed: int = 0
    max_steps: int = 40
    init_steps: int = 10
    t_max_step: float = 2.0
    objective: str = "f_joint"
    mode: str = DEFAULT_MODE
    jmax_fraction_fixed: float = 0.5
    workers: int = 1

    def __post_init__(self):
        for name in ("sigma", "t_max_step"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        for f in fields(self):
            if f.name.startswith("p_") and not 0.0 <= getattr(self, f.name) <= 1.0:
                raise ValueError(f"{f.name} must lie in [0, 1]")
        if self.population < 4:
            raise ValueError("population must be >= 4")
        if not 1 <= self.tournament <= self.population:
            raise ValueError("tournament size must lie in [1, population]")
        if not 0 <= self.elite < self.population:
            raise ValueError("elite must lie in [0, population)")
        if self.generations < 1 or self.max_steps < 1 or not 1 <= self.init_steps <= self.max_steps:
            raise ValueError("generations, max_steps >= 1 and 1 <= init_steps <= max_steps required")
        if not 1 <= self.simplex_top <= self.population:
            raise ValueError("simplex_top must lie in [1, population]")
        if self.simplex_period < 0 or self.simplex_iterations < 0 or self.workers < 1:
            raise ValueError("simplex_period, simplex_iterations must be >= 0 and workers >= 1")
        if self.objective not in ("f9", "f_joint"):
            raise ValueError(f"objective must be 'f9' or 'f_joint', got {self.objective!r}")
        if self.refine_method not in REFINE_METHODS:
            raise ValueError(f"refine_method must be one of {REFINE_METHODS}")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be an unsigned 64-bit integer")

    @classmethod
    def from_dict(cls, doc: dict) -> "SearchConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(doc) - known
        if unknown:
            raise ValueError(f"unknown search parameters {sorted(unknown)}")
        return cls(**doc)

    def to_dict(self) -> dict:
        return asdict(self)


# ---------------------------------------------------------------------------
# genome <-> sequence
# ---------------------------------------------------------------------------


def decode(genome: Genome, configuration: Configuration, jmax_fraction_fixed: float = 0.5) -> PulseSequence:
    steps = []
    for step in genome:
        if step[0][0] == WAIT:
            steps.append(PulseStep.waiting(step[0][1]))
        else:
            steps.append(PulseStep(tuple(Pulse(p, d) for p, d in step)))
    return PulseSequence(configuration, tuple(steps), jmax_fraction_fixed)


def encode(seq: PulseSequence) -> Genome:
    """Genome of a bang-bang sequence (pulse strengths are dropped)."""
    out = []
    for step in seq.steps:
        if step.is_wait:
            out.append(((WAIT, float(step.wait)),))
        else:
            out.append(tuple((p.name, float(p.duration)) for p in step.pulses))
    return tuple(out)


def check_genome(genome: Genome, configuration: Configuration, config: SearchConfig) -> None:
    """Raise ``ValueError`` unless ``genome`` satisfies all genome invariants."""
    if not 1 <= len(genome) <= config.max_steps:
        raise ValueError(f"genome length {len(genome)} outside [1, {config.max_steps}]")
    legal = set(configuration.pair_names())
    for k, step in enumerate(genome):
        if not 1 <= len(step) <= 2:
            raise ValueError(f"step {k} has {len(step)} genes")
        pairs = [p for p, _ in step]
        if WAIT in pairs and len(step) != 1:
            raise ValueError(f"step {k}: wait cannot share a step")
        if len(set(pairs)) != len(pairs):
            raise ValueError(f"step {k}: repeated pair")
        for p, d in step:
            if p != WAIT and p not in legal:
                raise ValueError(f"step {k}: illegal pair {p}")
            if not 0 < d <= config.t_max_step:
                raise ValueError(f"step {k}: duration {d} outside (0, {config.t_max_step}]")


def durations(genome: Genome) -> np.ndarray:
    return np.array([d for step in genome for _, d in step], dtype=float)


def with_durations(genome: Genome, values) -> Genome:
    it = iter(float(v) for v in values)
    return tuple(tuple((p, next(it)) for p, _ in step) for step in genome)


# ---------------------------------------------------------------------------
# evaluation
# ---------------------------------------------------------------------------


def sequence_objective(seq: PulseSequence, objective: str = "f_joint", mode: str = DEFAULT_MODE) -> float:
    u5, u9 = sequence_propagator(seq, mode)
    if objective == "f9":
        return objective_f9(u9)
    return objective_f_joint(u5, u9)


def evaluate(
    genome: Genome,
    config: SearchConfig,
    configuration: Configuration,
    objective: Optional[Objective] = None,
) -> float:
    """Objective value of a genome (lower is better)."""
    seq = decode(genome, configuration, config.jmax_fraction_fixed)
    if objective is not None:
        return float(objective(seq))
    return sequence_objective(seq, config.objective, config.mode)


class _Evaluator:
    """Memoizing evaluator; counts objective computations."""

    def __init__(self, config, configuration, objective):
        self.config = config
        self.configuration = configuration
        self.objective = objective
        self.cache: dict = {}
        self.count = 0

    def __call__(self, genome: Genome) -> float:
        f = self.cache.get(genome)
        if f is None:
            f = evaluate(genome, self.config, self.configuration, self.objective)
            self.cache[genome] = f
            self.count += 1
        return f

    def many(self, genomes: list) -> list[float]:
        todo = [g for g in dict.fromkeys(genomes) if g not in self.cache]
        if self.config.workers > 1 and len(todo) > 1:
            with ThreadPoolExecutor(self.config.workers) as pool:
                vals = list(
                    pool.map(lambda g: evaluate(g, self.config, self.configuration, self.objective), todo)
                )
            for g, v in zip(todo, vals):
                self.cache[g] = v
            self.count += len(todo)
        return [self(g) for g in genomes]


# ---------------------------------------------------------------------------
# simplex refinement
# ---------------------------------------------------------------------------


def _initial_simplex(x0: np.ndarray, lo: float, hi: float, step: float) -> np.ndarray:
    simplex = [x0]
    for i in range(len(x0)):
        x = x0.copy()
        # step away from the nearer bound so the simplex never collapses
        x[i] = x0[i] + step if x0[i] + step <= hi else x0[i] - step
        simplex.append(x)
    return np.array(simplex)


def _refine(genome: Genome, iterations: int, f_of: Callable[[Genome], float], t_max: float, step: float = 0.05):
    f0 = f_of(genome)
    if iterations <= 0:
        return genome, f0
    x0 = np.clip(durations(genome), MIN_DURATION, t_max)

    def fun(x):
        return f_of(with_durations(genome, np.clip(x, MIN_DURATION, t_max)))

    res = minimize(
        fun,
        x0,
        method="Nelder-Mead",
        bounds=[(MIN_DURATION, t_max)] * len(x0),
        options={
            "maxiter": iterations,
            "maxfev": 2 * iterations,
            "initial_simplex": _initial_simplex(x0, MIN_DURATION, t_max, step),
            "adaptive": len(x0) > 4,
            "xatol": 1e-10,
            "fatol": 1e-14,
        },
    )
    candidate = with_durations(genome, np.clip(res.x, MIN_DURATION, t_max))
    f1 = f_of(candidate)
    if f1 < f0:
        return candidate, f1
    return genome, f0


_CNOT_ENTRIES = ((0, 0), (1, 1), (2, 3), (3, 2))


def _step_segments(step: Step, mode: str, offset: int) -> list[tuple[tuple, float, dict]]:
    """Constant-Hamiltonian segments of a genome step.

    Each segment is ``(active genes, length, {gene index: d length / d duration})``.
    """
    if step[0][0] == WAIT:
        return [((), step[0][1], {offset: 1.0})]
    if mode == "sequential":
        return [(((p, 1.0),), d, {offset + k: 1.0}) for k, (p, d) in enumerate(step)]
    order = sorted(range(len(step)), key=lambda k: (step[k][1], k))
    out = []
    prev = None
    for j, k in enumerate(order):
        active = tuple((step[m][0], 1.0) for m in order[j:])
        coef = {offset + k: 1.0}
        length = step[k][1]
        if prev is not None:
            coef[offset + prev] = -1.0
            length -= step[prev][1]
        out.append((active, length, coef))
        prev = k
    return out


def _squared_objective_and_gradient(
    genome: Genome, config: SearchConfig, configuration: Configuration
) -> tuple[float, np.ndarray]:
    """``f**2`` of the built-in objective and its exact derivative in the durations."""
    background = _background(configuration, config.jmax_fraction_fixed)
    segments = []
    offset = 0
    for step in genome:
        segments.extend(_step_segments(step, config.mode, offset))
        offset += len(step)
    sectors = ("S1",) if config.objective == "f9" else ("S0", "S1")
    value = float(len(sectors))
    grad = np.zeros(offset)
    for space in sectors:
        us, hs = [], []
        for active, length, _ in segments:
            terms = tuple(sorted(_merge_terms(background, tuple((canonical_pair(p), s) for p, s in active))))
            w, v = _eig(space, terms)
            us.append((v * np.exp(-2j * np.pi * length * w)) @ v.conj().T)
            h = sum((s * _space_exchange(space, pr) for pr, s in terms), np.zeros((len(w), len(w))))
            hs.append(h)
        dim = us[0].shape[0] if us else 1
        prefix = [np.eye(dim, dtype=complex)]
        for u in us:
            prefix.append(u @ prefix[-1])
        c = sum(prefix[-1][i, j] for i, j in _CNOT_ENTRIES)
        a = abs(c)
        value -= a / 4
        if a < 1e-15:
            continue
        suffix = np.eye(dim, dtype=complex)
        for n in range(len(segments) - 1, -1, -1):
            d = suffix @ (-2j * np.pi * hs[n] @ us[n]) @ prefix[n]
            dc = sum(d[i, j] for i, j in _CNOT_ENTRIES)
            g = -(np.conj(c) * dc).real / (4 * a)
            for k, coef in segments[n][2].items():
                grad[k] += coef * g
            suffix = suffix @ us[n]
    return max(value, 0.0), grad


def _refine_gradient(genome: Genome, iterations: int, f_of, config: SearchConfig, configuration: Configuration):
    f0 = f_of(genome)
    if iterations <= 0:
        return genome, f0
    x0 = np.clip(durations(genome), MIN_DURATION, config.t_max_step)
    res = minimize(
        lambda x: _squared_objective_and_gradient(with_durations(genome, x), config, configuration),
        x0,
        jac=True,
        method="L-BFGS-B",
        bounds=[(MIN_DURATION, config.t_max_step)] * len(x0),
        options={"maxiter": iterations},
    )
    candidate = with_durations(genome, np.clip(res.x, MIN_DURATION, config.t_max_step))
    f1 = f_of(candidate)
    if f1 < f0:
        return candidate, f1
    return genome, f0


def _refine_with(genome, ev, config: SearchConfig, configuration: Configuration, objective, iterations: int):
    if config.refine_method == "gradient" and objective is None:
        return _refine_gradient(genome, iterations, ev, config, configuration)
    return _refine(genome, iterations, ev, config.t_max_step)


def refine_durations(
    genome: Genome,
    iterations: int,
    config: SearchConfig | None = None,
    configuration: Configuration | None = None,
    objective: Optional[Objective] = None,
) -> Genome:
    """Optimize the duration vector with pairs frozen; never returns a worse genome.

    The method follows ``config.refine_method``; custom objectives always use
    Nelder-Mead since they come without derivatives.
    """
    config = config or SearchConfig()
    if configuration is None:
        raise ValueError("refine_durations needs the target configuration")
    ev = _Evaluator(config, configuration, objective)
    return _refine_with(genome, ev, config, configuration, objective, iterations)[0]


# ---------------------------------------------------------------------------
# genetic operators
# ---------------------------------------------------------------------------


def _choices(configuration: Configuration) -> list[str]:
    return configuration.pair_names() + [WAIT]


def _random_duration(rng: np.random.Generator, t_max: float) -> float:
    return float(rng.uniform(MIN_DURATION, t_max))


def random_step(rng: np.random.Generator, configuration: Configuration, config: SearchConfig) -> Step:
    choices = _choices(configuration)
    first = choices[rng.integers(len(choices))]
    step = [(first, _random_duration(rng, config.t_max_step))]
    others = [p for p in configuration.pair_names() if p != first]
    if first != WAIT and others and rng.random() < config.p_second_pulse:
        step.append((others[rng.integers(len(others))], _random_duration(rng, config.t_max_step)))
    return tuple(step)


def random_genome(rng: np.random.Generator, configuration: Configuration, config: SearchConfig) -> Genome:
    n = int(rng.integers(max(1, config.init_steps // 2), config.init_steps + 1))
    return tuple(random_step(rng, configuration, config) for _ in range(n))


def crossover(rng: np.random.Generator, a: Genome, b: Genome, max_steps: int) -> Genome:
    """One-point crossover on the step lists (cut points chosen independently)."""
    ca = int(rng.integers(0, len(a) + 1))
    cb = int(rng.integers(0, len(b) + 1))
    child = (a[:ca] + b[cb:])[:max_steps]
    return child or a[:1]


def mutate(rng: np.random.Generator, genome: Genome, configuration: Configuration, config: SearchConfig) -> Genome:
    steps = list(genome)
    # duration perturbation
    for k, step in enumerate(steps):
        genes = []
        for p, d in step:
            if rng.random() < config.p_duration:
                d = float(np.clip(d + rng.normal(0.0, config.sigma), MIN_DURATION, config.t_max_step))
            genes.append((p, d))
        steps[k] = tuple(genes)
    # pair swap
    if steps and rng.random() < config.p_pair_swap:
        k = int(rng.integers(len(steps)))
        step = steps[k]
        g = int(rng.integers(len(step)))
        if len(step) == 1:
            choices = [c for c in _choices(configuration) if c != step[0][0]]
        else:
            choices = [c for c in configuration.pair_names() if c not in (step[0][0], step[1][0])]
        if choices:
            new = list(step)
            new[g] = (choices[rng.integers(len(choices))], step[g][1])
            steps[k] = tuple(new)
    if len(steps) < config.max_steps and rng.random() < config.p_insert:
        steps.insert(int(rng.integers(len(steps) + 1)), random_step(rng, configuration, config))
    if len(steps) > 1 and rng.random() < config.p_delete:
        del steps[int(rng.integers(len(steps)))]
    return tuple(steps)


# ---------------------------------------------------------------------------
# driver
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SearchReport:
    best_genome: Genome
    best_f: float
    trace: tuple
    evaluations: int
    generations: int
    reached_target: bool
    configuration: str
    seed: int
    jmax_fraction_fixed: float = 0.5
    wall_time: float = field(default=0.0, compare=False)

    def best_sequence(self, configuration: Configuration) -> PulseSequence:
        return decode(self.best_genome, configuration, self.jmax_fraction_fixed)

    def to_dict(self, configuration: Configuration, include_timing: bool = False) -> dict:
        doc = {
            "best_f": self.best_f,
            "reached_target": self.reached_target,
            "evaluations": self.evaluations,
            "generations": self.generations,
            "seed": self.seed,
            "trace": list(self.trace),
            "sequence": sequence_to_dict(self.best_sequence(configuration)),
        }
        if include_timing:
            doc["wall_time_s"] = self.wall_time
        return doc

    def to_json(self, configuration: Configuration, include_timing: bool = False) -> str:
        return json.dumps(self.to_dict(configuration, include_timing), indent=2)


def _tournament(rng: np.random.Generator, fitness: list[float], size: int) -> int:
    picks = rng.choice(len(fitness), size=size, replace=False)
    return int(min(picks, key=lambda i: (fitness[i], i)))


def run_search(
    config: SearchConfig,
    configuration: Configuration,
    objective: Optional[Objective] = None,
    callback: Optional[Callable[[int, float], None]] = None,
) -> SearchReport:
    """Evolve pulse sequences for ``configuration`` until ``target_f`` or the generation budget.

    ``objective`` overrides the CNOT objective named in ``config``; it maps a
    PulseSequence to a value to be minimized.
    """
    start = time.perf_counter()
    ev = _Evaluator(config, configuration, objective)
    rng0 = np.random.default_rng([config.seed, 0, 2**32 - 1])
    population = [random_genome(rng0, configuration, config) for _ in range(config.population)]
    fitness = ev.many(population)

    def best_index() -> int:
        return min(range(len(population)), key=lambda i: (fitness[i], i))

    b = best_index()
    best_genome, best_f = population[b], fitness[b]
    trace = []
    gen = 0
    for gen in range(1, config.generations + 1):
        order = sorted(range(len(population)), key=lambda i: (fitness[i], i))
        children = [population[i] for i in order[: config.elite]]
        for k in range(config.elite, config.population):
            rng = np.random.default_rng([config.seed, gen, k])
            a = population[_tournament(rng, fitness, config.tournament)]
            if rng.random() < config.p_crossover:
                other = population[_tournament(rng, fitness, config.tournament)]
                a = crossover(rng, a, other, config.max_steps)
            children.append(mutate(rng, a, configuration, config))
        population = children
        fitness = ev.many(population)

        if config.simplex_period and gen % config.simplex_period == 0:
            order = sorted(range(len(population)), key=lambda i: (fitness[i], i))
            seen = set()
            for i in order:
                if len(seen) == config.simplex_top:
                    break
                if population[i] in seen:
                    continue
                seen.add(population[i])
                population[i], fitness[i] = _refine_with(
                    population[i], ev, config, configuration, objective, config.simplex_iterations
                )

        b = best_index()
        if fitness[b] < best_f:
            best_genome, best_f = population[b], fitness[b]
        trace.append(best_f)
        if callback is not None:
            callback(gen, best_f)
        if best_f <= config.target_f:
            break

    return SearchReport(
        best_genome=best_genome,
        best_f=float(best_f),
        trace=tuple(trace),
        evaluations=ev.count,
        generations=gen,
        reached_target=best_f <= config.target_f,
        configuration=configuration.name,
        seed=config.seed,
        jmax_fraction_fixed=config.jmax_fraction_fixed,
        wall_time=time.perf_counter() - start,
    )

