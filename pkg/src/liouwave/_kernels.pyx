# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernel: the fused per-mode trigonometric step update.

One pass over the mode arrays replaces the eight strided passes (plus
temporaries) the numpy fallback needs.  Semantics must match
liouwave._kernels_py.gautschi_combine up to floating-point summation order;
the benchmark suite compares both lanes.  The exponential evaluations stay in
numpy in both lanes: its SIMD exp beats a scalar libm loop by several times.
"""


def gautschi_combine(double[:, ::1] cosw, double[:, ::1] sincw,
                     double[:, ::1] qw, double[:, ::1] wsinw,
                     double complex[:, ::1] uh, double complex[:, ::1] vh,
                     double complex[:, ::1] fh,
                     double complex[:, ::1] uh_out,
                     double complex[:, ::1] vh_out):
    """Per-mode update of the second-order oscillator with frozen forcing:

        uh_out = cos*uh + sinc*vh + q*fh
        vh_out = cos*vh - wsin*uh + sinc*fh

    Output buffers must not alias the inputs.
    """
    cdef Py_ssize_t i, j
    cdef Py_ssize_t n1 = uh.shape[0], n2 = uh.shape[1]
    cdef double c, s, q, w
    cdef double complex u, v, f
    for i in range(n1):
        for j in range(n2):
            c = cosw[i, j]
            s = sincw[i, j]
            q = qw[i, j]
            w = wsinw[i, j]
            u = uh[i, j]
            v = vh[i, j]
            f = fh[i, j]
            uh_out[i, j] = c * u + s * v + q * f
            vh_out[i, j] = c * v - w * u + s * f
