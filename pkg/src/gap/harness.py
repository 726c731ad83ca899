"""Training/evaluation loops, learning-curve metrics, and result emission.

A trial owns one fresh model and runs it through a sequence of epochs:
the world resets (re-randomised where the domain calls for it), the
agent plans or explores one action per step through the error injector,
and every observation lands in the model, which persists across the
trial's epochs.  Trials are independent; their RNG streams split from
the master seed through a counter-based generator keyed by (seed, trial
index), so runs are reproducible at any parallelism level.

Metrics follow the reciprocal learning-curve form: mean steps per epoch
are fitted to A/k + B by least squares on (1/k, steps), reported with
R^2 and the mean proportional deviation from the fitted line (the
percent-off-linear figure).
"""

from __future__ import annotations

import math
import os
import time
from dataclasses import asdict, dataclass, field
from typing import Callable, Iterable, Sequence as Seq

import numpy as np

from .environments import ErrorInjector, make_environment  # noqa: F401  (re-export)
from .hypergraph import IncidenceHypergraph
from .markov import (
    TransitionMatrix,
    build_merged_transition_matrix,
    build_transition_matrix,
    l_max as graph_l_max,
    detect_traps,
)
from .planner import (
    APOSTERIORI,
    APRIORI,
    GoalSpec,
    PolicyConfig,
    choose_action,
    explore_action,
    infer_sequence,
)

DOMAINS = ("strips", "taxi-simple", "taxi-maze", "toh", "blocks", "binadd")


@dataclass
class ExperimentConfig:
    """Fully serialisable description of one experiment."""

    domain: str
    domain_params: dict = field(default_factory=dict)
    error_rate: float = 0.0
    abstractions: tuple[str, ...] = ()
    epochs: int = 10
    trials: int = 1
    seed: int = 0
    probability_model: str = APOSTERIORI
    exploration: str = "random"
    stochastic_choice: bool = False
    model_window: int | None = None
    step_cap_factor: int = 50
    step_cap_floor: int = 1000
    step_cap_ceiling: int | None = None
    stuck_patience: int = 1
    revisit_patience: int | None = None
    familiarization_epochs: int = 0
    world_per_trial: bool = False
    out_dir: str | None = None

    def validate(self) -> None:
        if self.domain not in DOMAINS:
            raise ValueError("unknown domain %r" % self.domain)
        if not (0.0 <= self.error_rate <= 1.0):
            raise ValueError("error_rate must lie in [0, 1]")
        if self.epochs < 1 or self.trials < 1:
            raise ValueError("epochs and trials must be >= 1")
        if self.probability_model not in (APRIORI, APOSTERIORI):
            raise ValueError("unknown probability model %r" % self.probability_model)
        if self.step_cap_factor < 1 or self.step_cap_floor < 1:
            raise ValueError("step caps must be positive")

    def to_json(self) -> dict:
        d = asdict(self)
        d["abstractions"] = list(self.abstractions)
        return d


@dataclass
class EpochRecord:
    trial: int
    epoch: int
    steps: int
    capped: bool
    wall_ms: float


@dataclass
class FitResult:
    """Least-squares fit of steps = A/k + B over a window of epochs."""

    A: float
    B: float
    r_squared: float
    off_linear_pct: float
    window: int


def _trial_generator(seed: int, trial: int) -> np.random.Generator:
    key = np.array([trial & 0xFFFFFFFFFFFFFFFF, seed & 0xFFFFFFFFFFFFFFFF], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def _step_cap(cfg: ExperimentConfig, num_states: int) -> int:
    cap = max(cfg.step_cap_factor * num_states, cfg.step_cap_floor)
    if cfg.step_cap_ceiling is not None:
        cap = min(cap, cfg.step_cap_ceiling)
    return cap


class _CoverageTracker:
    """States with untried actions, maintained incrementally by the
    familiarization policy.  Goal states never get actions taken from
    them (epochs end on arrival), so they are exempt."""

    def __init__(self, model: IncidenceHypergraph, goal: GoalSpec) -> None:
        self.model = model
        self.goal = goal
        self.uncovered: set[int] = set()
        self._seen = 0

    def sync(self) -> None:
        n = self.model.num_states
        if n > self._seen:
            goal_ids = self.goal.ids(self.model)
            self.uncovered.update(
                s for s in range(self._seen, n) if s not in goal_ids
            )
            self._seen = n

    def after_record(self, state: int) -> None:
        if state in self.uncovered:
            if not (self.model.action_use_counts(state) == 0).any():
                self.uncovered.discard(state)

    def pending(self) -> bool:
        self.sync()
        return bool(self.uncovered)

    def exploration_action(self, sid: int, policy: PolicyConfig) -> int:
        """An untried action here, or the first step of a shortest known
        route toward some state that still has untried actions."""
        if sid in self.uncovered:
            counts = self.model.action_use_counts(sid)
            untried = [a for a in range(self.model.num_actions) if counts[a] == 0]
            if untried:
                return policy.rng.choice(untried)
        target = GoalSpec.for_states(self.uncovered)
        seq = infer_sequence(self.model, sid, target, policy)
        if seq is not None and seq.actions:
            return seq.actions[0]
        return explore_action(self.model, sid, policy)


def run_experiment(
    cfg: ExperimentConfig,
    initial_model: IncidenceHypergraph | None = None,
    model_sink: Callable[[int, IncidenceHypergraph], None] | None = None,
) -> list[EpochRecord]:
    """Run every trial and epoch of ``cfg`` and return the epoch records.

    ``initial_model`` seeds each trial with a copy of a pre-trained model
    instead of a blank one.  ``model_sink(trial, model)`` receives each
    trial's final model, for callers that analyse or persist them.
    """
    cfg.validate()
    records: list[EpochRecord] = []
    for trial in range(cfg.trials):
        gen = _trial_generator(cfg.seed, trial)
        env = make_environment(cfg.domain, cfg.domain_params, cfg.abstractions)
        n_actions = env.action_count()
        if initial_model is not None:
            model = initial_model.copy()
        else:
            model = IncidenceHypergraph(n_actions, window=cfg.model_window)
        policy = PolicyConfig(
            model=cfg.probability_model,
            exploration=cfg.exploration,
            stochastic_choice=cfg.stochastic_choice,
            rng_seed=int(gen.integers(2**63)),
        )
        injector = ErrorInjector(cfg.error_rate, n_actions, seed=int(gen.integers(2**63)))
        goal = GoalSpec.for_predicate(env.goal_predicate())
        coverage = (
            _CoverageTracker(model, goal) if cfg.familiarization_epochs > 0 else None
        )
        trial_world_seed = int(gen.integers(2**63))
        for epoch in range(1, cfg.epochs + 1):
            # world_per_trial freezes the generated world across a trial's
            # epochs (within-world learning); otherwise each epoch draws a
            # fresh world where the domain randomises on reset.
            epoch_seed = (
                trial_world_seed if cfg.world_per_trial else int(gen.integers(2**63))
            )
            t0 = time.perf_counter()
            obs = env.reset(epoch_seed)
            sid = model.register_state(obs)
            steps = 0
            capped = False
            noop_streak = 0
            jam_tried: dict[int, set[int]] = {}
            visit_counts: dict[int, int] = {}
            # Verified plan suffix: while execution matches the plan, only
            # plan edges get recorded, which cannot improve any alternative
            # path, so the remaining suffix stays maximum-probability and
            # re-planning would reproduce it.  Any off-plan event (mismatch,
            # exploration, stuck sweep) invalidates it.
            plan_states: list[int] | None = None
            plan_actions: list[int] = []
            plan_idx = 0
            while not env.at_goal():
                if steps >= _step_cap(cfg, model.num_states):
                    capped = True
                    break
                if noop_streak >= cfg.stuck_patience:
                    # Planned action keeps observably failing here (hidden
                    # state or a stale model): sweep the alternatives not yet
                    # tried from this state this epoch, standing in for
                    # optimistic initialisation.
                    plan_states = None
                    tried = jam_tried.setdefault(sid, set())
                    candidates = [a for a in range(n_actions) if a not in tried]
                    if not candidates:
                        tried.clear()
                        candidates = list(range(n_actions))
                    action = policy.rng.choice(candidates)
                    tried.add(action)
                elif (
                    coverage is not None
                    and epoch <= cfg.familiarization_epochs
                    and coverage.pending()
                ):
                    # Familiarization: defer planning while visited non-goal
                    # states still have untried actions, for the first few
                    # epochs only.
                    plan_states = None
                    action = coverage.exploration_action(sid, policy)
                    jam_tried.setdefault(sid, set()).add(action)
                elif (
                    cfg.revisit_patience is not None
                    and visit_counts.get(sid, 0) > cfg.revisit_patience
                ):
                    # Re-planning keeps cycling through this state: inject an
                    # exploration step to break the loop (plan oscillation on
                    # pooled cross-world models).
                    plan_states = None
                    action = explore_action(model, sid, policy)
                    jam_tried.setdefault(sid, set()).add(action)
                elif plan_states is not None and plan_states[plan_idx] == sid:
                    action = plan_actions[plan_idx]
                elif cfg.stochastic_choice:
                    action = choose_action(model, sid, goal, policy)
                    jam_tried.setdefault(sid, set()).add(action)
                else:
                    plan_states = None
                    plan = None
                    if goal.ids(model):
                        plan = infer_sequence(model, sid, goal, policy)
                    if plan is not None and plan.actions:
                        action = plan.actions[0]
                        plan_states = plan.states
                        plan_actions = plan.actions
                        plan_idx = 0
                    else:
                        action = explore_action(model, sid, policy)
                    jam_tried.setdefault(sid, set()).add(action)
                executed = injector.apply(action)
                obs = env.step(executed)
                nsid = model.register_state(obs)
                model.record(sid, action, nsid)
                if coverage is not None:
                    coverage.after_record(sid)
                if plan_states is not None:
                    if plan_idx + 1 < len(plan_states) and plan_states[plan_idx + 1] == nsid:
                        plan_idx += 1
                        if plan_idx >= len(plan_actions):
                            plan_states = None
                    else:
                        plan_states = None
                noop_streak = noop_streak + 1 if nsid == sid else 0
                if cfg.revisit_patience is not None:
                    visit_counts[nsid] = visit_counts.get(nsid, 0) + 1
                sid = nsid
                steps += 1
            wall_ms = (time.perf_counter() - t0) * 1000.0
            records.append(EpochRecord(trial, epoch, steps, capped, wall_ms))
        if model_sink is not None:
            model_sink(trial, model)
    return records


# ----------------------------------------------------------------------
# learning-curve metrics


def epoch_curve(records: Iterable[EpochRecord]) -> list[tuple[int, float]]:
    """Arithmetic mean steps per epoch across trials, capped epochs
    included at their cap value."""
    sums: dict[int, float] = {}
    counts: dict[int, int] = {}
    for r in records:
        sums[r.epoch] = sums.get(r.epoch, 0.0) + r.steps
        counts[r.epoch] = counts.get(r.epoch, 0) + 1
    return [(k, sums[k] / counts[k]) for k in sorted(sums)]


def fit_reciprocal(
    curve: Seq[tuple[float, float]], window: tuple[int, int] | None = None
) -> FitResult:
    """Fit steps = A/k + B by linear least squares on (1/k, steps).

    ``window`` restricts the fit to epochs first <= k <= last; sequential
    data points are required either way.  R^2 is computed against the
    reciprocal model on the fitted points; the off-linear figure is the
    mean of |steps - fit| / steps over them, as a percentage.
    """
    points = [(k, y) for k, y in curve]
    if window is not None:
        lo, hi = window
        points = [(k, y) for k, y in points if lo <= k <= hi]
    if len(points) < 3:
        raise ValueError("need at least 3 points to fit")
    ks = np.array([k for k, _ in points], dtype=float)
    ys = np.array([y for _, y in points], dtype=float)
    if np.allclose(ks, ks[0]):
        raise ValueError("degenerate fit input: constant k")
    x = 1.0 / ks
    A, B = np.polyfit(x, ys, 1)
    fitted = A * x + B
    ss_res = float(((ys - fitted) ** 2).sum())
    ss_tot = float(((ys - ys.mean()) ** 2).sum())
    if ss_tot <= 1e-12:
        r2 = 1.0 if ss_res <= 1e-12 else -math.inf
    else:
        r2 = 1.0 - ss_res / ss_tot
    positive = ys > 0
    if positive.any():
        off = float(
            (np.abs(ys[positive] - fitted[positive]) / ys[positive]).mean() * 100.0
        )
    else:
        off = 0.0
    return FitResult(float(A), float(B), r2, off, len(points))


def estimate_k_p(
    records: Iterable[EpochRecord],
    tail_fraction: float = 0.2,
    window: tuple[int, int] | None = None,
) -> tuple[float, float]:
    """(measured, predicted) asymptotic steps-to-goal.

    Measured averages the final ``tail_fraction`` of per-epoch means;
    predicted is the fitted reciprocal intercept B.
    """
    curve = epoch_curve(records)
    if len(curve) < 2:
        raise ValueError("need at least 2 epochs")
    tail = max(1, int(math.ceil(len(curve) * tail_fraction)))
    measured = float(np.mean([y for _, y in curve[-tail:]]))
    predicted = fit_reciprocal(curve, window=window).B
    return measured, predicted


def estimate_l_max(
    model: IncidenceHypergraph,
    goal_ids: int | set[int],
    thresholds: Seq[float] = (0.25, 0.5, 0.75, 0.9),
    probability_model: str = APOSTERIORI,
    k_limit: int = 2000,
) -> tuple[float, float]:
    """(measured, predicted) longest minimum path to the goal.

    Predicted reads the support graph of the policy matrix directly.
    Measured probes the matrix dynamics: for each threshold p, find the
    first step count k(p) at which every goal-reachable state has reach
    probability at least p, then regress k(p) on log(1 - p); the bound's
    linear form has the longest minimum path as its additive constant,
    recovered as the regression intercept.
    """
    thresholds = sorted(thresholds)
    if len(thresholds) < 3:
        raise ValueError("need at least 3 threshold levels")
    if any(not (0.0 < p < 1.0) for p in thresholds):
        raise ValueError("thresholds must lie in (0, 1)")
    if isinstance(goal_ids, int):
        tm = build_transition_matrix(model, goal_ids, probability_model)
    else:
        tm, _ = build_merged_transition_matrix(model, goal_ids, probability_model)
    predicted = graph_l_max(tm)
    if predicted is None:
        raise ValueError("goal unreachable from every state")
    measured = _l_max_probe(tm, thresholds, k_limit)
    return measured, float(predicted)


def _l_max_probe(
    tm: TransitionMatrix, thresholds: Seq[float], k_limit: int = 2000
) -> float:
    """Threshold probe of the matrix dynamics: k(p) is the first step at
    which every goal-reachable state's reach probability is >= p, and the
    intercept of k(p) against log(1-p) estimates the longest minimum
    path (the bound's additive constant)."""
    thresholds = sorted(thresholds)
    traps = detect_traps(tm).trap_states
    nongoal = [i for i in range(tm.size) if i != tm.goal_index]
    live = np.array(
        [idx for idx, s in enumerate(nongoal) if s not in traps], dtype=int
    )
    tg = tm.t_g
    Ts = tm.t_s
    acc = tg.copy()
    row = tg.copy()
    k_of: dict[float, int] = {}
    pending = list(thresholds)
    k = 1
    while pending and k <= k_limit:
        reach = acc[live].min() if live.size else 1.0
        while pending and reach >= pending[0]:
            k_of[pending.pop(0)] = k
            # keep filling thresholds satisfied at this same k
        if not pending:
            break
        row = row @ Ts
        acc += row
        k += 1
    for p in pending:
        k_of[p] = k_limit
    xs = np.array([math.log(1.0 - p) for p in thresholds])
    ys = np.array([k_of[p] for p in thresholds], dtype=float)
    if np.allclose(ys, ys[0]):
        return float(ys[0])
    _, intercept = np.polyfit(xs, ys, 1)
    return float(intercept)


# ----------------------------------------------------------------------
# abstraction norm estimation from measured step counts


@dataclass
class NormEstimate:
    """Per-error-level norm-product estimates for one abstraction."""

    per_level: dict[float, float]
    mean: float
    cv: float


def estimate_abstraction_norms(
    kpa_by_error: dict[float, float], l_max_value: float
) -> NormEstimate:
    """Solve the threshold bound for the norm product at each error level.

    Treating the bound as equality at error level e with asymptotic steps
    kpa(e):  norm = (1 - e) ** (1 / (kpa(e) - l_max)).  Levels at or
    below l_max are skipped (the bound is uninformative there).
    """
    per: dict[float, float] = {}
    for e, kpa in kpa_by_error.items():
        if not (0.0 < e < 1.0):
            continue
        gap = kpa - l_max_value
        if gap <= 0:
            continue
        per[e] = (1.0 - e) ** (1.0 / gap)
    if not per:
        raise ValueError("no informative error levels")
    vals = np.array(list(per.values()))
    mean = float(vals.mean())
    cv = float(vals.std() / mean) if mean else math.inf
    return NormEstimate(per, mean, cv)


def composition_routes(
    norms: dict[str, NormEstimate],
    corner_keys: tuple[str, str, str, str] = ("AI wA", "AII wA", "AI w/oA", "AII w/oA"),
) -> tuple[float, float, float]:
    """Two independent composed estimates of the corner-to-corner norm
    ratio across a 2x2 abstraction grid, plus the directly measured one.

    With corners (AB, A'B, AB', A'B'), route one composes the A->A' shift
    measured under B with the B->B' shift measured under A; route two
    composes the same shifts each measured under the other branch.  Both
    approximate the direct AB -> A'B' ratio.
    """
    ab, a2b, ab2, a2b2 = (norms[k].mean for k in corner_keys)
    direct = a2b2 / ab
    route_one = (a2b / ab) * (ab2 / ab)
    route_two = (a2b2 / a2b) * (a2b2 / ab2)
    return route_one, route_two, direct


# ----------------------------------------------------------------------
# result emission


def emit_results(
    records: Iterable[EpochRecord],
    fit: FitResult | None,
    out_dir: str,
    extras: dict | None = None,
    include_wall_time: bool = False,
) -> None:
    """Write results.csv, fit.csv and series.csv under ``out_dir``.

    Outputs are byte-stable for identical inputs; measured wall time
    varies between runs, so it is zeroed unless ``include_wall_time``.
    """
    os.makedirs(out_dir, exist_ok=True)
    records = list(records)
    with open(os.path.join(out_dir, "results.csv"), "w", encoding="utf-8") as fh:
        fh.write("trial,epoch,steps,capped,wall_ms\n")
        for r in records:
            wall = r.wall_ms if include_wall_time else 0.0
            fh.write(
                "%d,%d,%d,%d,%s\n" % (r.trial, r.epoch, r.steps, int(r.capped), repr(wall))
            )
    extras = extras or {}
    with open(os.path.join(out_dir, "fit.csv"), "w", encoding="utf-8") as fh:
        fh.write(
            "A,B,R2,off_linear_pct,k_p_measured,k_p_predicted,"
            "l_max_measured,l_max_predicted\n"
        )
        if fit is not None:
            cells = [repr(fit.A), repr(fit.B), repr(fit.r_squared), repr(fit.off_linear_pct)]
        else:
            cells = ["", "", "", ""]
        for key in ("k_p_measured", "k_p_predicted", "l_max_measured", "l_max_predicted"):
            cells.append(repr(float(extras[key])) if key in extras else "")
        fh.write(",".join(cells) + "\n")
    with open(os.path.join(out_dir, "series.csv"), "w", encoding="utf-8") as fh:
        fh.write("epoch,mean_steps,fit\n")
        for k, y in epoch_curve(records):
            fitted = fit.A / k + fit.B if fit is not None else ""
            fh.write("%d,%s,%s\n" % (k, repr(y), repr(fitted) if fitted != "" else ""))
