"""Running experiments and fitting the reciprocal learning law.

Train agents on the fetch-and-deliver world across error rates, fit the
mean learning curve to steps = A/k + B, and compare measured against
predicted asymptotes and longest-minimum-path estimates.
"""

from gap import (
    ExperimentConfig,
    emit_results,
    epoch_curve,
    estimate_k_p,
    estimate_l_max,
    fit_reciprocal,
    run_experiment,
)

for error in (0.0, 0.15, 0.30):
    cfg = ExperimentConfig(
        domain="strips",
        error_rate=error,
        epochs=20,
        trials=60,
        seed=42,
        exploration="least-chosen",
    )
    records = run_experiment(cfg)
    curve = epoch_curve(records)
    fit = fit_reciprocal(curve)
    measured, predicted = estimate_k_p(records, window=(2, 20))
    print(
        "error %4.0f%%: epoch-1 mean %6.1f -> tail %5.1f | fit A=%.1f B=%.1f "
        "R2=%.2f | k_p measured %.2f vs fitted %.2f"
        % (
            error * 100,
            curve[0][1],
            curve[-1][1],
            fit.A,
            fit.B,
            fit.r_squared,
            measured,
            predicted,
        )
    )

# longest-minimum-path: support-graph prediction vs the threshold probe
models = {}
cfg = ExperimentConfig(
    domain="strips", epochs=20, trials=1, seed=31, exploration="least-chosen"
)
run_experiment(cfg, model_sink=lambda t, m: models.update({t: m}))
model = models[0]
goal_id = model.registry.id_of("loc=0;item=1")
measured, predicted = estimate_l_max(model, goal_id, thresholds=(0.2, 0.4, 0.6, 0.8))
print("\nlongest minimum path: probe %.2f vs support graph %.0f" % (measured, predicted))

# byte-stable CSV emission for downstream plotting
out = "/tmp/gap-demo-results"
records = run_experiment(
    ExperimentConfig(domain="strips", epochs=10, trials=10, seed=7)
)
emit_results(records, fit_reciprocal(epoch_curve(records)), out)
print("\nwrote results.csv, fit.csv, series.csv under", out)
