"""ZNE and CDR expressed as task graphs.

The graphs wire together the same helpers the monolithic :func:`zne` and
:func:`cdr` use, so a graph run reproduces the direct call exactly. Both
graphs take two inputs: the circuit and the observable.
"""

from ..errors import DegenerateTrainingError
from .cdr import (
    _spread,
    attempt_seed,
    cdr_plan,
    check_noisy_spread,
    finish_cdr,
    generate_training_set,
    ideal_values,
    run_training,
    shot_seed_for,
)
from .taskgraph import INPUT, TaskGraph
from .zne import Experiment, evaluate_level, finish_zne, fold_level, zne_plan


def build_zne_graph(cfg, backend, shot_budget, shot_seed=None):
    """Graph: fold_i → evaluate_i (one branch per λ) → collate → extrapolate."""
    plan = _static_zne_plan(cfg, shot_budget, shot_seed)
    g = TaskGraph()
    names = []
    for i, (lam, shots, fseed, sseed) in enumerate(plan):
        f = g.add_task(f"fold_{lam}", lambda c, lam=lam, fseed=fseed: fold_level(c, lam, cfg.folding, fseed), 1)
        ev = g.add_task(
            f"evaluate_{lam}",
            lambda c, o, shots=shots, sseed=sseed: evaluate_level(backend, c, o, shots, sseed),
            2,
        )
        g.connect(INPUT, f, 0, 0)
        g.connect(f, ev, 0, 0)
        g.connect(INPUT, ev, 1, 1)
        names.append(ev)
    g.add_task("collate", lambda *vals: list(vals), len(names))
    for i, name in enumerate(names):
        g.connect(name, "collate", 0, i)
    g.add_task("extrapolate", lambda vals: finish_zne(cfg, plan, vals), 1)
    g.connect("collate", "extrapolate")
    g.set_outputs([("extrapolate", 0)])
    return g


class _BudgetOnly:
    def __init__(self, shot_budget):
        self.shot_budget = shot_budget


def _static_zne_plan(cfg, shot_budget, shot_seed):
    return zne_plan(_BudgetOnly(shot_budget), cfg, shot_seed)


def build_cdr_graph(cfg, noisy_backend, ideal_backend, shot_budget, shot_seed=None):
    """Graph: training → (ideal check) → noisy_i per training circuit → fit; target runs alongside."""
    shares, root = cdr_plan(_BudgetOnly(shot_budget), cfg, shot_seed)
    g = TaskGraph()

    def target(c, o):
        return noisy_backend.estimate(c, o, shares[0], shot_seed_for(root, 0, 0))

    def training(c, o):
        for attempt in range(cfg.max_attempts):
            circuits = generate_training_set(c, cfg, attempt_seed(cfg, attempt))
            ideal = ideal_values(circuits, o, ideal_backend)
            if _spread(ideal) >= cfg.conditioning_tol:
                return attempt, circuits, ideal
        raise DegenerateTrainingError(f"no well-conditioned training set after {cfg.max_attempts} attempts")

    def noisy_i(i):
        def run(train, o):
            attempt, circuits, _ = train
            est = noisy_backend.estimate(circuits[i], o, shares[i + 1], shot_seed_for(root, attempt, i + 1))
            return float(est.value)

        return run

    def fit(c, o, target_est, train, *noisy):
        attempt, _, ideal = train
        noisy = list(noisy)
        used = shares[0] + sum(shares[1:])
        e = Experiment(c, o, shot_budget)
        if check_noisy_spread(cfg, noisy, attempt) is not None:
            return run_training(e, cfg, noisy_backend, ideal_backend, shares, root, target_est, attempt + 1, used)
        return finish_cdr(e, cfg, target_est, noisy, ideal, attempt + 1, used)

    g.add_task("target", target, 2)
    g.add_task("training", training, 2)
    g.connect(INPUT, "target", 0, 0)
    g.connect(INPUT, "target", 1, 1)
    g.connect(INPUT, "training", 0, 0)
    g.connect(INPUT, "training", 1, 1)
    g.add_task("fit", fit, 4 + cfg.n_training)
    g.connect(INPUT, "fit", 0, 0)
    g.connect(INPUT, "fit", 1, 1)
    g.connect("target", "fit", 0, 2)
    g.connect("training", "fit", 0, 3)
    for i in range(cfg.n_training):
        name = g.add_task(f"noisy_{i}", noisy_i(i), 2)
        g.connect("training", name, 0, 0)
        g.connect(INPUT, name, 1, 1)
        g.connect(name, "fit", 0, 4 + i)
    g.set_outputs([("fit", 0)])
    return g
