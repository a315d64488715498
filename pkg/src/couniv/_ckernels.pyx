# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the hot kernels; same contracts as ``_pykernels``."""
from libc.stdlib cimport malloc, free


def reduce_codes(codes):
    cdef Py_ssize_t n = len(codes), top = 0, i
    cdef long c
    cdef long *stack
    if n == 0:
        return ()
    stack = <long *> malloc(n * sizeof(long))
    if stack == NULL:
        raise MemoryError()
    try:
        for i in range(n):
            c = codes[i]
            if top > 0 and stack[top - 1] == (c ^ 1):
                top -= 1
            else:
                stack[top] = c
                top += 1
        return tuple([stack[i] for i in range(top)])
    finally:
        free(stack)


def mul_codes(tuple a, tuple b):
    cdef Py_ssize_t i = len(a), j = 0, nb = len(b)
    while i > 0 and j < nb and <long> a[i - 1] == ((<long> b[j]) ^ 1):
        i -= 1
        j += 1
    if j == 0:
        return a + b
    return a[:i] + b[j:]


def index_sum_codes(codes):
    cdef long total = 0
    cdef long c
    for c in codes:
        total += c >> 1
    return total


def phi_recursive(long n, codes):
    cdef Py_ssize_t length = len(codes), span, i
    cdef long left, right
    cdef long *idx
    cdef long *table
    if length == 0:
        return n
    idx = <long *> malloc(length * sizeof(long))
    table = <long *> malloc(length * sizeof(long))
    if idx == NULL or table == NULL:
        free(idx)
        free(table)
        raise MemoryError()
    try:
        for i in range(length):
            idx[i] = (<long> codes[i]) >> 1
            table[i] = n + idx[i]
        # in-place sweep: table[i] is overwritten only after table[i+1] is read
        for span in range(2, length + 1):
            for i in range(length - span + 1):
                left = table[i] + idx[i + span - 1]
                right = table[i + 1] + idx[i]
                table[i] = left if left >= right else right
        return table[0]
    finally:
        free(idx)
        free(table)


def set_product(const int[:] flat, Py_ssize_t order, left, right):
    cdef Py_ssize_t nr = len(right), i, j, a
    cdef int *rr
    cdef unsigned char *seen
    rr = <int *> malloc((nr + 1) * sizeof(int))
    seen = <unsigned char *> malloc(order + 1)
    if rr == NULL or seen == NULL:
        free(rr)
        free(seen)
        raise MemoryError()
    try:
        for j in range(nr):
            rr[j] = right[j]
        for i in range(order):
            seen[i] = 0
        for a in left:
            for j in range(nr):
                seen[flat[a * order + rr[j]]] = 1
        return [i for i in range(order) if seen[i]]
    finally:
        free(rr)
        free(seen)
