"""Out-of-sample accuracy by rolling the forecast origin.

Each window trains on an initial span of smoothed curves and scores a
single h-step-ahead forecast against the raw observed rates of its target
year; the targets tile the last observed years.  The same harness tunes
the geometric decay rate by grid search.
"""

from mortfpca.evaluation import rolling_rmse, tune_kappa
from mortfpca.forecasters import MODELS
from mortfpca.synthetic import synthetic_bundle

bundle = synthetic_bundle(seed=17, n_years=28, max_age=30)
h, windows = 5, 3

print(f"observed span {bundle.years[0]}..{bundle.years[-1]}, "
      f"horizon {h}, {windows} windows\n")
print(f"{'model':<15s}{'female':>8s}{'male':>8s}{'average':>9s}")
for model in MODELS:
    report = rolling_rmse(bundle, model, h, windows=windows, kappa=0.5)
    print(f"{model:<15s}{report.rmse['female']:>8.4f}{report.rmse['male']:>8.4f}"
          f"{report.avg_rmse:>9.4f}")

# decay-rate tuning for the weighted joint model, coarse grid
grid = (0.2, 0.5, 0.8)
best = tune_kappa(bundle, "wmfpca", h, grid=grid, windows=windows)
print(f"\nbest kappa on grid {grid}: {best}")
print("the evaluate command does the same, appending rows to eval.csv:")
print("  mortfpca evaluate --data observed/ --model wmfpca --kappa auto "
      "--h 5 --windows 3 --out reports/")
