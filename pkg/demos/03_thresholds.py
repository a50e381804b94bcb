"""Pick a similarity threshold where two fitted mixture components meet."""
import numpy as np

from commtrack import fit_mixture, junction_point

rng = np.random.default_rng(0)
# unrelated pairs score low, continuations score high
low = rng.normal(0.2, 0.05, 400)
high = rng.normal(0.7, 0.05, 100)
scores = np.concatenate([low, high])

fit = fit_mixture(scores)
print("weights", np.round(fit.weights, 3))
print("means  ", np.round(fit.means, 3))
print("stds   ", np.round(fit.stds, 3))
print("EM iterations", fit.n_iter)

th = junction_point(fit, "jaccard")
print(f"threshold {th.value:.4f} ({th.provenance})")

# the gamma family is available too
gamma = fit_mixture(np.clip(scores, 1e-3, None), family="gamma")
print(f"gamma threshold {junction_point(gamma).value:.4f}")
