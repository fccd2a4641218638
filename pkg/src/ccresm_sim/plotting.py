"""SVG error-rate curves from sweep results."""

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .ra_codec import ConfigError  # noqa: E402

_STYLE = {
    "ccresm": ("C0", "o"),
    "turbo_sic": ("C1", "s"),
    "independent": ("C2", "^"),
    "single_user": ("C3", "d"),
}
_LINES = ("-", "--", ":", "-.")


def emit_plot(result, kind, out, title=None):
    """Write log-scale BER or PER against SNR, one curve per (scheme, delta).

    Zero error counts cannot go on a log axis, so those points are dropped.
    Raises ConfigError on an empty result or when PER is asked for but the
    result carries no packet counts.
    """
    if kind not in ("ber", "per"):
        raise ConfigError(f"kind must be 'ber' or 'per', got {kind!r}")
    if not result.cells:
        raise ConfigError("cannot plot an empty result")
    if kind == "per" and not all(c.has_per for c in result.cells):
        raise ConfigError("result has no packet error columns; cannot plot PER")

    curves = sorted({(c.scheme, c.delta) for c in result.cells})
    deltas = sorted({d for _, d in curves})
    fig, ax = plt.subplots(figsize=(6.4, 4.8))
    for scheme, delta in curves:
        snr, vals = result.curve(scheme, delta, kind)
        keep = vals > 0
        color, marker = _STYLE.get(scheme, ("k", "x"))
        ls = _LINES[deltas.index(delta) % len(_LINES)]
        ax.plot(snr[keep], vals[keep], color=color, marker=marker, linestyle=ls,
                label=f"{scheme}, delta={delta:g}", gid=f"curve-{scheme}-{delta:g}")
    ax.set_yscale("log")
    ax.set_xlabel("SNR (dB)")
    ax.set_ylabel(kind.upper())
    ax.grid(True, which="both", alpha=0.3)
    ax.legend(fontsize="small")
    if title:
        ax.set_title(title)
    fig.tight_layout()
    try:
        fig.savefig(out, format="svg")
    except OSError as exc:
        raise OSError(f"cannot write plot to {out}: {exc}") from exc
    finally:
        plt.close(fig)
    return out


__all__ = ["emit_plot"]
