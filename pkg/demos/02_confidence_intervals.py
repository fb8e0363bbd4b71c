"""All four confidence intervals for the C-statistic, side by side.

DeLong's interval and the apparent bootstrap interval are centered on the
apparent (optimistic) estimate. The location-shifted interval translates
the apparent interval by the estimated optimism, keeping its width exactly.
The two-stage interval re-runs the whole correction inside every outer
resample, so it also reflects the variability of the correction itself and
is typically wider.
"""

import numpy as np

from bootval import Dataset
from bootval.intervals import (apparent_bootstrap_ci, delong_interval,
                               location_shifted_ci, two_stage_ci)
from bootval.metrics import C_STATISTIC, measure_value
from bootval.models import FitRecipe, predict
from bootval.optimism import apparent_fit, correct, evaluate_replicates
from bootval.resampling import ResamplePlan


def main():
    rng = np.random.default_rng(7)
    n, p = 120, 8
    x = rng.normal(size=(n, p))
    eta = -1.0 + x[:, 0] - 0.6 * x[:, 1]
    y = (rng.random(n) < 1.0 / (1.0 + np.exp(-eta))).astype(float)
    d = Dataset(y, x)

    recipe = FitRecipe("ml")
    plan = ResamplePlan(B=300, seed=42)
    inner_B = 300

    scores = predict(apparent_fit(d, recipe, plan), d)
    apparent = measure_value(C_STATISTIC, scores, d.outcomes)
    reps = evaluate_replicates(d, recipe, C_STATISTIC, plan)

    def show(label, est):
        print(f"{label:<28} {est.point:.4f} "
              f"({est.lower:.4f}, {est.upper:.4f})  width {est.width:.4f}")

    print(f"n={n}, p={p}, B={plan.B}, alpha=0.05\n")
    show("DeLong (apparent)",
         delong_interval(d, recipe, plan, apparent_scores=scores))
    app_ci = apparent_bootstrap_ci(d, recipe, C_STATISTIC, plan,
                                   replicates=reps, apparent=apparent)
    show("apparent bootstrap", app_ci)

    ls = location_shifted_ci(d, recipe, C_STATISTIC, plan, "harrell",
                             replicates=reps, apparent=apparent)
    show("location-shifted (Harrell)", ls)
    print(f"{'':<28} shift = {ls.shift:.4f}; width identical to the "
          f"apparent interval: {ls.width == app_ci.width}")

    point = correct("harrell", d, recipe, C_STATISTIC, plan,
                    replicates=reps, apparent=apparent)
    print(f"\nrunning the two-stage interval "
          f"({plan.B} x {inner_B} resamples)...")
    ts = two_stage_ci(d, recipe, C_STATISTIC, plan, inner_B, "harrell",
                      point_result=point)
    show("two-stage (Harrell)", ts)


if __name__ == "__main__":
    main()
