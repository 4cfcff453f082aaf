"""Benchmarks, training kernels and experiment runner."""
from ..metrics import (LearningCurve, build_curves, final_mean, final_quartile_std,
                       final_raw_mean, normalize, smooth)
from .benchmarks import BENCHMARKS, BaselineRewardRule, Benchmark, baseline_reward
from .runner import (MODES, ExperimentResult, TrainingParams, TrainResult, read_csv,
                     run_experiment, train, train_reference, write_csv)
