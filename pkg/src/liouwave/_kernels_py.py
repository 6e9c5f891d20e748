"""Pure numpy fallback for the compiled kernels in _kernels.pyx."""

import numpy as np


def exp_shifted_sum(g, m, out):
    """out[i,j] = exp(g[i,j] - m); returns the sum of out."""
    np.subtract(g, m, out=out)
    np.exp(out, out=out)
    return float(out.sum())


def gautschi_combine(cosw, sincw, qw, wsinw, uh, vh, fh, uh_out, vh_out):
    """Per-mode trigonometric update with frozen forcing; outputs must not
    alias the inputs."""
    uh_out[...] = cosw * uh + sincw * vh + qw * fh
    vh_out[...] = cosw * vh - wsinw * uh + sincw * fh
