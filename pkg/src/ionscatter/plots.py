"""Figure rendering for scan results.

Renders through the non-interactive Agg backend; the output format follows
the file extension (``.svg`` by default in the shipped configs, but anything
matplotlib supports works).
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)
import numpy as np  # noqa: E402

from .spectra import SpectrumTable  # noqa: E402

plt.rcParams["svg.hashsalt"] = "ionscatter"

_AXIS_LABEL = {
    "probe_detuning": "probe detuning (MHz)",
    "control_detuning": "control detuning (MHz)",
    "two_photon_detuning": "two-photon detuning (MHz)",
    "control_rabi": "control Rabi frequency (MHz)",
    "bfield": "magnetic field (mT)",
}


def render_table(table: SpectrumTable, path: str, title: str | None = None) -> None:
    """Plot extinction (and fluorescence, when it varies) against the scan axis."""
    if table.parameter == "bfield":
        x = table.axis * 1e3
    else:
        x = table.axis / 1e6

    fig, ax = plt.subplots(figsize=(7.0, 4.2))
    ext = table.columns["extinction"]
    ax.plot(x, 100.0 * ext, color="tab:blue", label="extinction")
    ax.set_xlabel(_AXIS_LABEL[table.parameter])
    ax.set_ylabel("extinction (%)", color="tab:blue")
    ax.tick_params(axis="y", labelcolor="tab:blue")
    ax.grid(True, alpha=0.3)

    fluor = table.columns.get("fluorescence_rel")
    if fluor is not None and np.ptp(fluor) > 0:
        ax2 = ax.twinx()
        ax2.plot(x, fluor / fluor.max(), color="tab:orange", label="fluorescence")
        ax2.set_ylabel("fluorescence (norm.)", color="tab:orange")
        ax2.tick_params(axis="y", labelcolor="tab:orange")
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
