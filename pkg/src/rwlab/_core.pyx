# Compiled hot kernels: legal-rewrite scanning over flat term encodings and
# the tree-network forward/backward passes. Each function mirrors a pure
# Python reference implementation (rwlab.matching / rwlab.neural.backends)
# and must return identical results; parity is enforced by the test suite.

from libc.stdlib cimport free, malloc
from libc.math cimport exp


cdef inline int _run_match(
    const int[:] tsym, const int[:] tsize, int start,
    const signed char[:] kinds, const int[:] vals, int koff, int kend,
    int* slots,
) noexcept nogil:
    cdef int ti = start
    cdef int k, kk, sl, a, b, length, m
    for k in range(koff, kend):
        kk = kinds[k]
        if kk == 0:
            if tsym[ti] != vals[k]:
                return 0
            ti += 1
        elif kk == 1:
            slots[vals[k]] = ti
            ti += tsize[ti]
        else:
            sl = slots[vals[k]]
            a = ti
            b = sl
            length = tsize[a]
            if tsize[b] != length:
                return 0
            for m in range(length):
                if tsym[a + m] != tsym[b + m]:
                    return 0
            ti += length
    return 1


def scan_candidates(
    const int[:] tsym, const int[:] tsize, int start,
    const signed char[:] kinds, const int[:] vals, const int[:] offs,
    const int[:] aids, int[:] out,
):
    """Try every candidate pattern at `start`; write matching action ids to
    `out` and return how many matched."""
    cdef int slots[16]
    cdef int n = aids.shape[0]
    cdef int i, hits = 0
    for i in range(n):
        if _run_match(tsym, tsize, start, kinds, vals, offs[i], offs[i + 1], slots):
            out[hits] = aids[i]
            hits += 1
    return hits


def match_at(
    const int[:] tsym, const int[:] tsize, int start,
    const signed char[:] kinds, const int[:] vals, int nslots, int[:] out_slots,
):
    """Single-pattern match; fills `out_slots` with bound preorder positions."""
    cdef int slots[16]
    cdef int i
    if not _run_match(tsym, tsize, start, kinds, vals, 0, kinds.shape[0], slots):
        return False
    for i in range(nslots):
        out_slots[i] = slots[i]
    return True


cdef inline void _net_apply(
    const double[:] buf, long long w1o, long long b1o, long long w2o, long long b2o,
    int in_dim, int n, double* x, double* h, double* y,
) noexcept nogil:
    cdef int i, j
    cdef double acc
    for i in range(n):
        acc = buf[b1o + i]
        for j in range(in_dim):
            acc += buf[w1o + i * in_dim + j] * x[j]
        h[i] = acc if acc > 0.0 else 0.0
    for i in range(n):
        acc = buf[b2o + i]
        for j in range(n):
            acc += buf[w2o + i * n + j] * h[j]
        y[i] = acc


cdef inline double _nonlin(int code, double z) noexcept nogil:
    if code == 1:  # relu
        return z if z > 0.0 else 0.0
    return 1.0 / (1.0 + exp(-z))


def tree_forward(
    const double[:] buf,
    const long long[:] w1o, const long long[:] b1o, const long long[:] w2o, const long long[:] b2o,
    const int[:] net_in,
    long long leaf_off, int n, int hidden,
    long long pw0, long long pb0, long long pw1, long long pb1, long long pw2, long long pb2,
    long long vw, long long vb, int nl0, int nl1,
    const signed char[:] code, const int[:] arg,
    const int[:] c0, const int[:] c1, const int[:] c2, int n_rows,
    const double[:, :] ctx,
    double[:, :] out, double[:, :] hid, double[:, :] xin,
    double[:] a0, double[:] a1, double[:] logits, double[:] value,
):
    cdef int i, j, k, op, nid, in_dim
    cdef int num_actions = logits.shape[0]
    cdef long long off
    cdef double acc
    for i in range(n_rows):
        op = code[i]
        if op == 0:  # leaf vector
            off = leaf_off + <long long> arg[i] * n
            for j in range(n):
                out[i, j] = buf[off + j]
        elif op == 1:  # episode-context vector
            for j in range(n):
                out[i, j] = ctx[arg[i], j]
        else:
            nid = arg[i]
            in_dim = net_in[nid]
            for j in range(n):
                xin[i, j] = out[c0[i], j]
            if in_dim > n:
                for j in range(n):
                    xin[i, n + j] = out[c1[i], j]
            if in_dim > 2 * n:
                for j in range(n):
                    xin[i, 2 * n + j] = out[c2[i], j]
            _net_apply(buf, w1o[nid], b1o[nid], w2o[nid], b2o[nid], in_dim, n,
                       &xin[i, 0], &hid[i, 0], &out[i, 0])
    # predictor: linear / nl0 / linear / nl1 / linear (+ value row)
    for i in range(hidden):
        acc = buf[pb0 + i]
        for j in range(n):
            acc += buf[pw0 + i * n + j] * out[n_rows - 1, j]
        a0[i] = _nonlin(nl0, acc)
    for i in range(hidden):
        acc = buf[pb1 + i]
        for j in range(hidden):
            acc += buf[pw1 + i * hidden + j] * a0[j]
        a1[i] = _nonlin(nl1, acc)
    for i in range(num_actions):
        acc = buf[pb2 + i]
        for j in range(hidden):
            acc += buf[pw2 + i * hidden + j] * a1[j]
        logits[i] = acc
    if vw >= 0:
        acc = buf[vb]
        for j in range(hidden):
            acc += buf[vw + j] * a1[j]
        value[0] = acc


cdef inline double _nonlin_deriv(int code, double a) noexcept nogil:
    if code == 1:
        return 1.0 if a > 0.0 else 0.0
    return a * (1.0 - a)


def tree_backward(
    const double[:] buf, double[:] gbuf,
    const long long[:] w1o, const long long[:] b1o, const long long[:] w2o, const long long[:] b2o,
    const int[:] net_in,
    long long leaf_off, int n, int hidden,
    long long pw0, long long pb0, long long pw1, long long pb1, long long pw2, long long pb2,
    long long vw, long long vb, int nl0, int nl1,
    const signed char[:] code, const int[:] arg,
    const int[:] c0, const int[:] c1, const int[:] c2, int n_rows,
    const double[:, :] out, const double[:, :] hid, const double[:, :] xin,
    const double[:] a0, const double[:] a1,
    const double[:] dlogits, double dvalue,
    double[:, :] dout,
):
    cdef int i, j, k, op, nid, in_dim
    cdef int num_actions = dlogits.shape[0]
    cdef long long off
    cdef double acc, dzi
    cdef double* da1 = <double*> malloc(sizeof(double) * hidden)
    cdef double* dz1 = <double*> malloc(sizeof(double) * hidden)
    cdef double* da0 = <double*> malloc(sizeof(double) * hidden)
    cdef double* dz0 = <double*> malloc(sizeof(double) * hidden)
    cdef double* dh = <double*> malloc(sizeof(double) * n)
    cdef double* dx = <double*> malloc(sizeof(double) * 3 * n)
    if da1 == NULL or dz1 == NULL or da0 == NULL or dz0 == NULL or dh == NULL or dx == NULL:
        free(da1); free(dz1); free(da0); free(dz0); free(dh); free(dx)
        raise MemoryError()
    try:
        # third predictor layer (+ value row into the shared penultimate layer)
        for j in range(hidden):
            acc = 0.0
            for i in range(num_actions):
                acc += buf[pw2 + i * hidden + j] * dlogits[i]
            da1[j] = acc
        for i in range(num_actions):
            dzi = dlogits[i]
            gbuf[pb2 + i] += dzi
            for j in range(hidden):
                gbuf[pw2 + i * hidden + j] += dzi * a1[j]
        if vw >= 0 and dvalue != 0.0:
            gbuf[vb] += dvalue
            for j in range(hidden):
                gbuf[vw + j] += dvalue * a1[j]
                da1[j] += dvalue * buf[vw + j]
        for i in range(hidden):
            dz1[i] = da1[i] * _nonlin_deriv(nl1, a1[i])
        for j in range(hidden):
            acc = 0.0
            for i in range(hidden):
                acc += buf[pw1 + i * hidden + j] * dz1[i]
            da0[j] = acc
        for i in range(hidden):
            dzi = dz1[i]
            gbuf[pb1 + i] += dzi
            for j in range(hidden):
                gbuf[pw1 + i * hidden + j] += dzi * a0[j]
        for i in range(hidden):
            dz0[i] = da0[i] * _nonlin_deriv(nl0, a0[i])
        for i in range(n_rows):
            for j in range(n):
                dout[i, j] = 0.0
        for j in range(n):
            acc = 0.0
            for i in range(hidden):
                acc += buf[pw0 + i * n + j] * dz0[i]
            dout[n_rows - 1, j] = acc
        for i in range(hidden):
            dzi = dz0[i]
            gbuf[pb0 + i] += dzi
            for j in range(n):
                gbuf[pw0 + i * n + j] += dzi * out[n_rows - 1, j]
        # embedding rows in reverse evaluation order
        for i in range(n_rows - 1, -1, -1):
            op = code[i]
            if op == 0:
                off = leaf_off + <long long> arg[i] * n
                for j in range(n):
                    gbuf[off + j] += dout[i, j]
            elif op == 1:
                continue
            else:
                nid = arg[i]
                in_dim = net_in[nid]
                for j in range(n):
                    acc = 0.0
                    for k in range(n):
                        acc += buf[w2o[nid] + k * n + j] * dout[i, k]
                    dh[j] = acc if hid[i, j] > 0.0 else 0.0
                for k in range(n):
                    dzi = dout[i, k]
                    gbuf[b2o[nid] + k] += dzi
                    for j in range(n):
                        gbuf[w2o[nid] + k * n + j] += dzi * hid[i, j]
                for j in range(in_dim):
                    acc = 0.0
                    for k in range(n):
                        acc += buf[w1o[nid] + k * in_dim + j] * dh[k]
                    dx[j] = acc
                for k in range(n):
                    dzi = dh[k]
                    gbuf[b1o[nid] + k] += dzi
                    for j in range(in_dim):
                        gbuf[w1o[nid] + k * in_dim + j] += dzi * xin[i, j]
                for j in range(n):
                    dout[c0[i], j] += dx[j]
                if in_dim > n:
                    for j in range(n):
                        dout[c1[i], j] += dx[n + j]
                if in_dim > 2 * n:
                    for j in range(n):
                        dout[c2[i], j] += dx[2 * n + j]
    finally:
        free(da1); free(dz1); free(da0); free(dz0); free(dh); free(dx)
