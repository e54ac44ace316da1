"""Static SVG rendering of rho-sweeps (matplotlib, Agg backend)."""

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

__all__ = ["axis_label", "render_sweep"]

_SYMBOL = {"t00": "T_{00}", "trr": "T_{rr}", "tthth": r"T_{\theta\theta}"}
_MARK = {"conformal": r"\diamond", "nonconformal": r"\blacksquare"}


def axis_label(component, part):
    power = 2 if component == "tthth" else 4
    return rf"$\lambda^{power} {_SYMBOL[component]}^{{({_MARK[part]})}}$"


def render_sweep(rho, values, component, part, path, log_x=True):
    """Write a line plot of ``values`` against ``rho`` to ``path`` as SVG.

    Output is reproducible: the SVG hash salt is fixed and no date is embedded.
    """
    with matplotlib.rc_context({"svg.hashsalt": "pointzeta", "svg.fonttype": "path"}):
        fig, ax = plt.subplots(figsize=(5.0, 3.5))
        try:
            ax.plot(rho, values, color="black", linewidth=1.2)
            ax.axhline(0.0, color="0.6", linewidth=0.6)
            if log_x:
                ax.set_xscale("log")
            ax.set_xlabel(r"$\rho = 2r/\lambda$")
            ax.set_ylabel(axis_label(component, part))
            fig.tight_layout()
            fig.savefig(path, format="svg", metadata={"Date": None})
        finally:
            plt.close(fig)
