# Plots from CLI outputs: running averages (trace.csv) and rate vs gamma (sweep.csv).
# usage: python3 plot_results.py <trace.csv> [sweep.csv]
import json
import os
import sys

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

trace = np.genfromtxt(sys.argv[1], delimiter=",", names=True)
summary = json.load(open(os.path.join(os.path.dirname(sys.argv[1]), "summary.json")))

fig, ax = plt.subplots(1, 2, figsize=(10, 4))
ax[0].semilogx(trace["t"] + 1, trace["running_rate"], label="running rate")
ax[0].axhline(summary["rate_lower"], ls="--", c="k", label="R(gamma)")
ax[0].axhline(summary["rate_upper"], ls=":", c="k", label="R + b + 1")
ax[0].set_xlabel("t"); ax[0].set_ylabel("bits / step"); ax[0].legend()
ax[1].semilogx(trace["t"] + 1, trace["running_cost"], label="running cost")
ax[1].axhline(summary["gamma"], ls="--", c="k", label="gamma")
ax[1].set_xlabel("t"); ax[1].legend()
fig.tight_layout()
fig.savefig(sys.argv[1].replace(".csv", ".png"), dpi=120)

if len(sys.argv) > 2:
    sw = np.genfromtxt(sys.argv[2], delimiter=",", names=True, dtype=None, encoding=None)
    ok = sw["status"] == "ok"
    fig, ax = plt.subplots(figsize=(5, 4))
    ax.plot(sw["gamma"][ok], sw["rate_lower"][ok], "k-", label="R(gamma)")
    ax.plot(sw["gamma"][ok], sw["rate_upper"][ok], "k:", label="R + b + 1")
    ax.plot(sw["empirical_cost"][ok], sw["empirical_rate"][ok], "o", label="empirical")
    ax.set_xlabel("LQG cost"); ax.set_ylabel("bits / step"); ax.legend()
    fig.tight_layout()
    fig.savefig(sys.argv[2].replace(".csv", ".png"), dpi=120)
