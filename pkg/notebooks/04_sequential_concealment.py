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
# # Concealing larger, connected losses
#
# Connected lost regions are cut into 16x16 tiles and concealed one after
# the other in raster order. Tiles already concealed act as support for the
# following ones with a reduced weight, which limits error propagation.

# %%
import os

import matplotlib.pyplot as plt
import numpy as np
from skimage import data

from muse_fse import ExtrapolationConfig, conceal_sequential, psnr

TEST_MODE = bool(os.environ.get("TEST_MODE"))
ITERATIONS = 10 if TEST_MODE else 100

# %%
image = data.camera()[96:352, 96:352]
lost = np.zeros(image.shape, bool)
lost[64:96, 48:112] = True    # a 2x4 tile slice
lost[160:176, 150:214] = True  # a row of four tiles

config = ExtrapolationConfig(iterations=ITERATIONS)
for weight in (0.0, 0.5, 1.0):
    out, report = conceal_sequential(image, lost, "muse", config, concealed_weight=weight,
                                     reference=image)
    print(f"concealed_weight={weight}: {report.aggregate_psnr:.2f} dB over "
          f"{len(report.blocks)} tiles")

# %%
damaged = image.copy()
damaged[lost] = 0
fig, axes = plt.subplots(1, 2, figsize=(9, 4.5))
for ax, img, title in zip(axes, [damaged, out], ["damaged", "concealed (weight 1.0)"]):
    ax.imshow(img, cmap="gray", vmin=0, vmax=255)
    ax.set_title(title)
    ax.axis("off")
