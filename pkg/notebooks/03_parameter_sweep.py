# ---
# jupyter:
#   jupytext:
#     formats: ipynb,py:percent
#     text_representation:
#       extension: .py
#       format_name: percent
#       format_version: '1.3'
# ---

# %% [markdown]
# # Sensitivity to the energy threshold and the per-iteration budget
#
# ``tau`` decides which functions are close enough to the best one to be
# fitted jointly; ``n_bf`` caps how many pairs join per iteration.

# %%
import os

import matplotlib.pyplot as plt
from skimage import data

from muse_fse.bench import DEFAULT_SWEEP, benchmark_image

TEST_MODE = bool(os.environ.get("TEST_MODE"))
ITERATIONS = 10 if TEST_MODE else 200

# %%
image = data.astronaut()[..., 1]  # green channel as a quick luminance stand-in
if TEST_MODE:
    image = image[:192, :192]
result = benchmark_image("astronaut", image, DEFAULT_SWEEP, iterations=ITERATIONS)

print(f"FSE: saturation {result.fse.saturation_iterations} it, {result.fse.saturation_psnr:.2f} dB")
for r in result.muse:
    print(f"MuSE tau={r.tau:<4} n_bf={r.n_bf}: saturation {r.saturation_iterations:3d} it, "
          f"{r.saturation_psnr:.2f} dB, ratio {result.ratio(r):.2f}")

# %%
plt.plot(result.fse.curve, "k--", label="FSE")
for r in result.muse:
    plt.plot(r.curve, label=f"MuSE tau={r.tau}, n_bf={r.n_bf}")
plt.xlabel("iterations")
plt.ylabel("PSNR [dB]")
plt.legend()
