# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled Dormand-Prince 5(4) stepper for linear ODE systems.

Twin of ``_pure.solve``: identical tableau and step control, with the CSR
matrix-vector products and vector updates done in C.  Coefficient functions
are still evaluated through a Python callback (a handful of calls per step).
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, fmin, fmax, fabs

from ..errors import ToleranceNotMetError

cnp.import_array()

DEF NSTAGE = 7

cdef double[7] C_NODES
cdef double[7][6] A_COEF
cdef double[7] E_COEF
C_NODES = [0.0, 1.0/5, 3.0/10, 4.0/5, 8.0/9, 1.0, 1.0]
A_COEF[1][0] = 1.0/5
A_COEF[2][0] = 3.0/40;        A_COEF[2][1] = 9.0/40
A_COEF[3][0] = 44.0/45;       A_COEF[3][1] = -56.0/15;       A_COEF[3][2] = 32.0/9
A_COEF[4][0] = 19372.0/6561;  A_COEF[4][1] = -25360.0/2187;  A_COEF[4][2] = 64448.0/6561
A_COEF[4][3] = -212.0/729
A_COEF[5][0] = 9017.0/3168;   A_COEF[5][1] = -355.0/33;      A_COEF[5][2] = 46732.0/5247
A_COEF[5][3] = 49.0/176;      A_COEF[5][4] = -5103.0/18656
A_COEF[6][0] = 35.0/384;      A_COEF[6][1] = 0.0;            A_COEF[6][2] = 500.0/1113
A_COEF[6][3] = 125.0/192;     A_COEF[6][4] = -2187.0/6784;   A_COEF[6][5] = 11.0/84
E_COEF = [71.0/57600, 0.0, -71.0/16695, 71.0/1920, -17253.0/339200, 22.0/525, -1.0/40]

cdef double MIN_FACTOR = 0.2
cdef double MAX_FACTOR = 5.0
cdef double SAFETY = 0.9


cdef void _csr_accumulate(double complex[::1] data, int[::1] indices, int[::1] indptr,
                          double c, double complex[::1] vec, double complex[::1] out) noexcept:
    cdef Py_ssize_t row, j
    cdef double complex acc
    cdef Py_ssize_t n = indptr.shape[0] - 1
    for row in range(n):
        acc = 0
        for j in range(indptr[row], indptr[row + 1]):
            acc = acc + data[j] * vec[indices[j]]
        out[row] = out[row] + c * acc


def solve(list mats, object coeff_fn, cnp.ndarray y0, double t0, double t1,
          double rtol, double atol, long max_steps=2_000_000):
    """Integrate from t0 to t1 and return the final vector."""
    if t1 < t0:
        raise ValueError("backward integration not supported")
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] y_arr = np.array(y0, dtype=np.complex128)
    if t1 == t0:
        return y_arr

    cdef Py_ssize_t n = y_arr.shape[0]
    cdef Py_ssize_t n_mats = len(mats)
    cdef double complex[::1] y = y_arr

    # unpack CSR arrays once
    data_list = [m[0] for m in mats]
    idx_list = [m[1] for m in mats]
    ptr_list = [m[2] for m in mats]

    cdef cnp.ndarray k_arr = np.zeros((NSTAGE, n), dtype=np.complex128)
    cdef double complex[:, ::1] k = k_arr
    cdef cnp.ndarray tmp_arr = np.zeros(n, dtype=np.complex128)
    cdef double complex[::1] yi = tmp_arr
    cdef cnp.ndarray ynew_arr = np.zeros(n, dtype=np.complex128)
    cdef double complex[::1] y_new = ynew_arr

    cdef double t = t0, h, err, scale, factor, fn0, yn0
    cdef Py_ssize_t i, j, stage
    cdef long step
    cdef double complex ev

    _rhs(data_list, idx_list, ptr_list, coeff_fn, t, y, k[0, :])
    fn0 = _norm2(k[0, :])
    yn0 = _norm2(y)
    h = fmin((t1 - t0) / 100.0, 0.1 * yn0 / fmax(fn0, 1e-30))
    h = fmax(fmin(h, t1 - t0), (t1 - t0) * 1e-12)

    for step in range(max_steps):
        if t + h > t1:
            h = t1 - t
        for stage in range(1, NSTAGE):
            for i in range(n):
                ev = 0
                for j in range(stage):
                    if A_COEF[stage][j] != 0.0:
                        ev = ev + A_COEF[stage][j] * k[j, i]
                yi[i] = y[i] + h * ev
            _rhs(data_list, idx_list, ptr_list, coeff_fn, t + C_NODES[stage] * h, yi, k[stage, :])
        # fifth-order solution is the stage-6 argument (FSAL row)
        err = 0.0
        for i in range(n):
            ev = 0
            for j in range(6):
                if A_COEF[6][j] != 0.0:
                    ev = ev + A_COEF[6][j] * k[j, i]
            y_new[i] = y[i] + h * ev
            ev = 0
            for j in range(NSTAGE):
                if E_COEF[j] != 0.0:
                    ev = ev + E_COEF[j] * k[j, i]
            scale = atol + rtol * fmax(abs(y[i]), abs(y_new[i]))
            err += (h * abs(ev) / scale) ** 2
        err = sqrt(err / n)
        if err <= 1.0:
            t = t + h
            for i in range(n):
                y[i] = y_new[i]
                k[0, i] = k[6, i]
            if t >= t1 - 1e-14 * fmax(fabs(t1), 1.0):
                return y_arr
            factor = MAX_FACTOR if err == 0.0 else fmin(MAX_FACTOR, SAFETY * err ** -0.2)
        else:
            factor = fmax(MIN_FACTOR, SAFETY * err ** -0.2)
        h *= fmax(MIN_FACTOR, fmin(factor, MAX_FACTOR))
        if h < (t1 - t0) * 1e-14:
            raise ToleranceNotMetError(f"step size underflow at t={t}")
    raise ToleranceNotMetError(f"max step count exceeded at t={t}")


cdef void _rhs(list data_list, list idx_list, list ptr_list, object coeff_fn,
               double t, double complex[::1] vec, double complex[::1] out):
    cdef Py_ssize_t i, m
    coeffs = coeff_fn(t)
    for i in range(vec.shape[0]):
        out[i] = 0
    for m in range(len(data_list)):
        c = coeffs[m]
        if c != 0.0:
            _csr_accumulate(data_list[m], idx_list[m], ptr_list[m], c, vec, out)


cdef double _norm2(double complex[::1] v) noexcept:
    cdef double s = 0.0
    cdef Py_ssize_t i
    for i in range(v.shape[0]):
        s += v[i].real * v[i].real + v[i].imag * v[i].imag
    return sqrt(s)
