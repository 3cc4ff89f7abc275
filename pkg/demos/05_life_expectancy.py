"""Life tables, life expectancy paths and sex ratios from forecasts.

Forecast log rates become period life tables: death probabilities,
survivors, person-years and remaining life expectancy at every age.  The
demo tracks life expectancy at birth through history and a coherent
forecast, plus the male-to-female rate ratio that the coherent model keeps
from drifting apart.
"""

import pathlib

import numpy as np

from mortfpca.demographics import life_expectancy, sex_ratio
from mortfpca.forecasters import fit_model, predict_interval
from mortfpca.svgplot import line_chart
from mortfpca.synthetic import synthetic_bundle

out_dir = pathlib.Path(__file__).parent / "out"
out_dir.mkdir(exist_ok=True)

_, bundle = synthetic_bundle(seed=23, n_years=50, max_age=100, return_truth=True)
horizon = 30

result = fit_model(bundle, "coherent", h=horizon, kappa=0.5)
surfaces = predict_interval(result, None)
female, male = surfaces[0], surfaces[1]

# one full life table from the final training year
table = life_expectancy(bundle[0].log_rates[-1])
print(f"female life table, {bundle.years[-1]}:")
print(f"  q_0 = {table.death_prob[0]:.5f}, q_80 = {table.death_prob[80]:.4f}")
print(f"  survivors to 65: {table.survivors[65]:.3f}, to 90: {table.survivors[90]:.3f}")
print(f"  e_0 = {table.e0:.2f} years, e_65 = {table.life_expectancy[65]:.2f} years")

# life expectancy at birth, history plus forecast
years = np.concatenate([bundle.years, female.horizon_years])
e0 = {}
for name, hist, fc in (("female", bundle[0], female), ("male", bundle[1], male)):
    rows = np.vstack([hist.log_rates, fc.mean])
    e0[name] = np.array([life_expectancy(row).e0 for row in rows])
print(f"\ne0 {years[0]}: female {e0['female'][0]:.1f}, male {e0['male'][0]:.1f}")
print(f"e0 {bundle.years[-1]} (last observed): "
      f"female {e0['female'][bundle.years.size - 1]:.1f}, "
      f"male {e0['male'][bundle.years.size - 1]:.1f}")
print(f"e0 {years[-1]} (forecast): female {e0['female'][-1]:.1f}, "
      f"male {e0['male'][-1]:.1f}")

line_chart(
    out_dir / "e0_paths.svg", years,
    [("female", e0["female"]), ("male", e0["male"])],
    title="Life expectancy at birth, history and coherent forecast",
    y_label="years",
)

# sex ratio of death rates at the end of the forecast stays bounded
ratio_now = sex_ratio(bundle[1].log_rates[-1], bundle[0].log_rates[-1])
ratio_end = sex_ratio(male.mean[-1], female.mean[-1])
print(f"\nmale/female rate ratio at age 30: "
      f"{ratio_now[30]:.2f} now, {ratio_end[30]:.2f} at {years[-1]}")
line_chart(
    out_dir / "sex_ratio.svg", bundle.ages,
    [(f"observed {bundle.years[-1]}", ratio_now),
     (f"forecast {years[-1]}", ratio_end)],
    title="Male-to-female death rate ratio by age",
    y_label="ratio",
)
print(f"wrote {out_dir / 'e0_paths.svg'} and {out_dir / 'sex_ratio.svg'}")
