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
# # Extrapolating one lost block
#
# A 16x16 block is cut out of a photograph and extrapolated from the 16-pixel
# frame around it, first with FSE (one conjugate pair per iteration), then
# with MuSE (up to five pairs per iteration, fitted jointly).

# %%
import os

import matplotlib.pyplot as plt
import numpy as np
from skimage import data

from muse_fse import (DataArea, ExtrapolationConfig, build_dictionary,
                      build_isotropic_weights, fse_run, muse_run)

TEST_MODE = bool(os.environ.get("TEST_MODE"))
ITERATIONS = 20 if TEST_MODE else 200

# %% [markdown]
# ## The data area
#
# The window is 48x48 samples. The center 16x16 is the loss area, everything
# else is support. The weights decay as 0.8 to the power of the distance
# from the window center and are zero on the loss area.

# %%
image = data.camera().astype(float)
window = image[136:184, 200:248]
lost = np.zeros((48, 48), bool)
lost[16:32, 16:32] = True

area = DataArea(window, lost)
weights = build_isotropic_weights(area, rho_hat=0.8)
dictionary = build_dictionary(area, weights)
print(area.n_support, "support samples,", area.n_lost, "lost,", len(dictionary), "basis functions")

# %% [markdown]
# ## Run both engines
#
# Passing the true window as ``reference`` records the PSNR over the loss
# area after every iteration.

# %%
config = ExtrapolationConfig(iterations=ITERATIONS)
fse_model, fse_trace = fse_run(area, weights, dictionary, config, reference=window)
muse_model, muse_trace = muse_run(area, weights, dictionary, config, reference=window)

print(f"FSE  final PSNR {fse_trace.psnr_curve[-1]:.2f} dB")
print(f"MuSE final PSNR {muse_trace.psnr_curve[-1]:.2f} dB")
print("functions per MuSE iteration:", [r.selected_count for r in muse_trace][:15], "...")

# %%
fig, axes = plt.subplots(1, 4, figsize=(13, 3.5))
shown = window.copy()
shown[lost] = 0
for ax, img, title in zip(axes, [window, shown, fse_model.values, muse_model.values],
                          ["original", "damaged", "FSE model", "MuSE model"]):
    ax.imshow(np.clip(img, 0, 255), cmap="gray", vmin=0, vmax=255)
    ax.set_title(title)
    ax.axis("off")

# %% [markdown]
# ## Convergence
#
# The weighted residual energy on the support area never increases. The
# PSNR on the loss area is not monotone, since only the support is fitted.

# %%
fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10, 3.5))
ax1.semilogy(fse_trace.energies, label="FSE")
ax1.semilogy(muse_trace.energies, label="MuSE")
ax1.set_xlabel("iteration")
ax1.set_ylabel("weighted residual energy")
ax1.legend()
ax2.plot(fse_trace.psnr_curve, label="FSE")
ax2.plot(muse_trace.psnr_curve, label="MuSE")
ax2.set_xlabel("iteration")
ax2.set_ylabel("PSNR [dB]")
ax2.legend()
plt.tight_layout()
