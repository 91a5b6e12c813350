"""
All policies on one stream
==========================

Every algorithm replays the same shuffles and masks, so the numbers are
directly comparable. Results and mean accuracy curves go to ``demo_output/``.
"""

from oprlearn import ExperimentConfig, emit_results, make_blobs, run_experiment

data = make_blobs(600, num_classes=3, num_features=10, separation=2.0, seed=0)

runs = [("linucb", "none"), ("rogcn", "none"), ("gcnucb", "none"),
        ("bilinucb", "kmeans"), ("bilinucb", "random"), ("bilinucb", "oracle")]

for algorithm, imputer in runs:
    # a short warmup so the imputers have something to do on 600 points
    cfg = ExperimentConfig(algorithm=algorithm, imputer=imputer, missing=0.5, warmup=100,
                           train_steps=2, resamples=3, seed=0)
    summary = run_experiment(cfg, data)
    print(f"{cfg.label:18s} {100 * summary.mean:5.1f} +- {100 * summary.std:.1f}")
    emit_results(summary, f"demo_output/{cfg.label}")
