"""Compiled inner loops.

Field arithmetic inside kernels works on element codes and takes the tuple
from ``FieldSpec.kernel_tables``.  Polynomials are int64 digit arrays,
little-endian.

Most enumerations here walk an affine family ``base + sum_i r_i * step_i``
over every digit vector ``r`` in index order (an odometer): advancing digit
``i`` from code ``c`` to ``c + 1`` adds ``inc[c] * step_i``, which touches only
the nonzero span ``[lo[i], hi[i])`` of that step.
"""

import numpy as np
from numba import njit


@njit(inline="always")
def _fadd(a, b, p, e, log, exp, zech):
    if e == 1:
        s = a + b
        if s >= p:
            s -= p
        return s
    if p == 2:
        return a ^ b
    if a == 0:
        return b
    if b == 0:
        return a
    la = log[a]
    k = log[b] - la
    if k < 0:
        k += exp.shape[0] // 2
    z = zech[k]
    if z < 0:
        return 0
    return exp[la + z]


@njit(inline="always")
def _fmul(a, b, p, e, log, exp):
    if e == 1:
        return (a * b) % p
    if a == 0 or b == 0:
        return 0
    return exp[log[a] + log[b]]


@njit(inline="always")
def _advance(digits, cur, steps, lo, hi, code, q, p, e, log, exp, zech, inc, powq):
    i = 0
    while True:
        c = digits[i]
        if e == 1:
            # prime field: inc is identically 1
            for j in range(lo[i], hi[i]):
                s = steps[i, j]
                if s != 0:
                    old = cur[j]
                    new = old + s
                    if new >= p:
                        new -= p
                    cur[j] = new
                    code += (new - old) * powq[j]
        elif p == 2:
            ld = log[inc[c]]
            for j in range(lo[i], hi[i]):
                s = steps[i, j]
                if s != 0:
                    old = cur[j]
                    new = old ^ exp[ld + log[s]]
                    cur[j] = new
                    code += (new - old) * powq[j]
        else:
            # odd characteristic extension: Zech-log addition, written out
            # in place.  Keep this loop free of calls and of % or //, either
            # of which slows the whole walk by an order of magnitude.
            ld = log[inc[c]]
            order = exp.shape[0] // 2
            for j in range(lo[i], hi[i]):
                s = steps[i, j]
                if s != 0:
                    old = cur[j]
                    lt = ld + log[s]
                    if old == 0:
                        new = exp[lt]
                    else:
                        lo_ = log[old]
                        t = lt - lo_
                        if t < 0:
                            t += order
                        elif t >= order:
                            t -= order
                        z = zech[t]
                        new = 0 if z < 0 else exp[lo_ + z]
                    cur[j] = new
                    code += (new - old) * powq[j]
        if c == q - 1:
            digits[i] = 0
            i += 1
        else:
            digits[i] = c + 1
            break
    return code


@njit(inline="always")
def _polymul_into(a, na, b, nb, out, p, e, log, exp, zech):
    for j in range(na + nb - 1):
        out[j] = 0
    for i in range(na):
        x = a[i]
        if x != 0:
            for j in range(nb):
                y = b[j]
                if y != 0:
                    out[i + j] = _fadd(out[i + j], _fmul(x, y, p, e, log, exp), p, e, log, exp, zech)


@njit(cache=True, nogil=True)
def walk_fill(base, steps, lo, hi, f, ncode, p, e, q, log, exp, zech, inc, powq, out):
    """out[t] = code (first ncode digits) of base + sum r_i step_i, r = digits of t."""
    cur = base.copy()
    code = 0
    for j in range(ncode):
        code += cur[j] * powq[j]
    digits = np.zeros(max(f, 1), dtype=np.int64)
    out[0] = code
    total = q ** f
    for t in range(1, total):
        code = _advance(digits, cur, steps, lo, hi, code, q, p, e, log, exp, zech, inc, powq)
        out[t] = code


@njit(cache=True, nogil=True)
def sieve_degree(d, p, e, q, log, exp, zech, inc, powq, spf_deg, spf_idx, off):
    """Fill the degree-d slice of the smallest-prime-factor table.

    Slices of degree < d must already be complete.  Primes are taken in
    (degree, index) order and only unset entries are written, so every
    entry ends up holding its least prime factor.
    """
    o = off[d]
    cur = np.zeros(d + 1, dtype=np.int64)
    pd = np.zeros(d + 1, dtype=np.int64)
    steps = np.zeros((max(d - 1, 1), d + 1), dtype=np.int64)
    lo = np.zeros(max(d - 1, 1), dtype=np.int64)
    hi = np.zeros(max(d - 1, 1), dtype=np.int64)
    digits = np.zeros(max(d - 1, 1), dtype=np.int64)
    for k in range(1, d // 2 + 1):
        m = d - k
        nk = q ** k
        ok = off[k]
        for pidx in range(nk):
            if spf_deg[ok + pidx] != k:
                continue
            x = pidx
            for j in range(k):
                pd[j] = x % q
                x //= q
            pd[k] = 1
            for j in range(d + 1):
                cur[j] = 0
            for j in range(k + 1):
                cur[m + j] = pd[j]
            for i in range(m):
                for j in range(d + 1):
                    steps[i, j] = 0
                for j in range(k + 1):
                    steps[i, i + j] = pd[j]
                lo[i] = i
                hi[i] = i + k + 1
                digits[i] = 0
            code = 0
            for j in range(d):
                code += cur[j] * powq[j]
            if spf_deg[o + code] == 0:
                spf_deg[o + code] = k
                spf_idx[o + code] = pidx
            total = q ** m
            for t in range(1, total):
                code = _advance(digits, cur, steps, lo, hi, code, q, p, e, log, exp, zech, inc, powq)
                if spf_deg[o + code] == 0:
                    spf_deg[o + code] = k
                    spf_idx[o + code] = pidx
    for i in range(q ** d):
        if spf_deg[o + i] == 0:
            spf_deg[o + i] = d


def packed_width(p):
    """Bits per F_p digit in the packed layout used by :func:`sieve_degree_packed`."""
    return 1 if p == 2 else p.bit_length() + 1


@njit(nogil=True)
def _swar_add(x, y, p, hmask, shift):
    if p == 2:
        return x ^ y
    s = x + y
    over = ((s + hmask - (hmask >> shift) * p) & hmask) >> shift
    return s - over * p


@njit(nogil=True)
def _unpack(x, p, width, chunk, ctab, cweight, nchunks):
    if p == 2:
        return x
    idx = 0
    bits = width * chunk
    cmask = (np.int64(1) << bits) - 1
    for r in range(nchunks):
        idx += ctab[(x >> (bits * r)) & cmask] * cweight[r]
    return idx


@njit(cache=True, nogil=True)
def sieve_degree_packed(d, p, e, log, exp, spf_deg, spf_idx, off, width, ctab, chunk):
    """Same result as :func:`sieve_degree`, for tables whose codes fit a word.

    A polynomial of degree < d is held as its d*e coordinates over F_p, one
    ``packed_width(p)``-bit field each, so adding two of them is a handful of
    word operations (XOR when p = 2).  The cofactors G of a prime P are
    visited in reflected p-ary Gray-code order of their F_p coordinates:
    every step adds +-(basis element)*P*T^i, precomputed per prime.
    ``ctab`` maps ``chunk`` packed digits to their base-p value.
    """
    o = off[d]
    hmask = 0
    if p != 2:
        for j in range(d * e):
            hmask |= np.int64(1) << (width * j + width - 1)
    shift = width - 1
    ndig = d * e
    nchunks = (ndig + chunk - 1) // chunk
    cweight = np.zeros(max(nchunks, 1), dtype=np.int64)
    w = 1
    for r in range(nchunks):
        cweight[r] = w
        for _ in range(chunk):
            w *= p
    q = p ** e
    pd = np.zeros(d + 1, dtype=np.int64)
    vec = np.zeros((e, 2), dtype=np.int64)
    free = np.zeros(d * e + 1, dtype=np.int64)
    cnt = np.zeros(d * e + 1, dtype=np.int64)
    sgn = np.zeros(d * e + 1, dtype=np.int64)
    for k in range(1, d // 2 + 1):
        m = d - k
        nfree = m * e
        ok = off[k]
        for pidx in range(q ** k):
            if spf_deg[ok + pidx] != k:
                continue
            x = pidx
            for j in range(k):
                pd[j] = x % q
                x //= q
            pd[k] = 1
            # packed (beta_s * P) and its negative, beta_s = p**s as a code
            for s in range(e):
                beta = p ** s
                pos = 0
                neg = 0
                for j in range(k + 1):
                    c = _fmul(beta, pd[j], p, e, log, exp)
                    cn = _fmul(p - 1, c, p, e, log, exp)  # p - 1 is the code of -1
                    y = c
                    z = cn
                    for t in range(e):
                        dig = j * e + t
                        pos |= np.int64(y % p) << (width * dig)
                        neg |= np.int64(z % p) << (width * dig)
                        y //= p
                        z //= p
                vec[s, 0] = pos
                vec[s, 1] = neg
            # P * T^m without its leading coefficient
            code = 0
            for j in range(k):
                y = pd[j]
                for t in range(e):
                    code |= np.int64(y % p) << (width * ((m + j) * e + t))
                    y //= p
            for u in range(nfree + 1):
                cnt[u] = 0
                sgn[u] = 0
            idx = _unpack(code, p, width, chunk, ctab, cweight, nchunks)
            if spf_deg[o + idx] == 0:
                spf_deg[o + idx] = k
                spf_idx[o + idx] = pidx
            total = np.int64(1)
            for _ in range(nfree):
                total *= p
            for _ in range(1, total):
                u = 0
                while cnt[u] == p - 1:
                    cnt[u] = 0
                    sgn[u] ^= 1
                    u += 1
                cnt[u] += 1
                code = _swar_add(code, vec[u % e, sgn[u]] << (width * e * (u // e)),
                                 p, hmask, shift)
                idx = _unpack(code, p, width, chunk, ctab, cweight, nchunks)
                if spf_deg[o + idx] == 0:
                    spf_deg[o + idx] = k
                    spf_idx[o + idx] = pidx
    for i in range(q ** d):
        if spf_deg[o + i] == 0:
            spf_deg[o + i] = d


@njit(inline="always")
def _factor(d, idx, p, e, q, log, exp, zech, neg, powq, spf_deg, spf_idx, off, cur, pd, fdeg, fidx, fexp):
    """Factor the monic (d, idx) into distinct primes; returns the number found."""
    x = idx
    for j in range(d):
        cur[j] = x % q
        x //= q
    cur[d] = 1
    deg = d
    cidx = idx
    n = 0
    while deg > 0:
        k = spf_deg[off[deg] + cidx]
        if k == deg:
            pi = cidx
        else:
            pi = np.int64(spf_idx[off[deg] + cidx])
        if n > 0 and fdeg[n - 1] == k and fidx[n - 1] == pi:
            fexp[n - 1] += 1
        else:
            fdeg[n] = k
            fidx[n] = pi
            fexp[n] = 1
            n += 1
        if k == deg:
            break
        x = pi
        for j in range(k):
            pd[j] = x % q
            x //= q
        pd[k] = 1
        for i in range(deg, k - 1, -1):
            c = cur[i]
            if c != 0:
                nc = neg[c]
                for j in range(k):
                    s = pd[j]
                    if s != 0:
                        cur[i - k + j] = _fadd(cur[i - k + j], _fmul(nc, s, p, e, log, exp), p, e, log, exp, zech)
        deg -= k
        cidx = 0
        for j in range(deg + 1):
            cur[j] = cur[j + k]
        for j in range(deg):
            cidx += cur[j] * powq[j]
    return n


@njit(cache=True, nogil=True)
def degree_stats(d, p, e, q, log, exp, zech, neg, powq, spf_deg, spf_idx, off, mdeg, midx,
                 types, sqfree, omega, tau, W, L, degmask, coprime):
    """Per-polynomial factorization data for every monic of degree d.

    types[i, k]  number of distinct prime factors of degree k
    degmask[i]   bit t set iff some monic divisor has degree t
    coprime[i]   no prime factor is among (mdeg, midx)
    """
    cur = np.zeros(d + 1, dtype=np.int64)
    pd = np.zeros(d + 1, dtype=np.int64)
    fdeg = np.zeros(d + 1, dtype=np.int64)
    fidx = np.zeros(d + 1, dtype=np.int64)
    fexp = np.zeros(d + 1, dtype=np.int64)
    td = np.zeros(d + 1, dtype=np.int64)
    tn = np.zeros(d + 1, dtype=np.int64)
    for idx in range(q ** d):
        if d == 0:
            n = 0
        else:
            n = _factor(d, idx, p, e, q, log, exp, zech, neg, powq, spf_deg, spf_idx, off,
                        cur, pd, fdeg, fidx, fexp)
        for k in range(d + 1):
            types[idx, k] = 0
            td[k] = 0
        td[0] = 1
        top = 0
        sf = True
        t = 1
        cp = True
        for r in range(n):
            k = fdeg[r]
            a = fexp[r]
            types[idx, k] += 1
            if a > 1:
                sf = False
            t *= a + 1
            for s in range(len(mdeg)):
                if mdeg[s] == k and midx[s] == fidx[r]:
                    cp = False
            for u in range(top + 1):
                tn[u] = 0
            newtop = top + a * k
            for u in range(newtop + 1):
                tn[u] = 0
            for u in range(top + 1):
                if td[u] != 0:
                    for s in range(a + 1):
                        tn[u + s * k] += td[u]
            for u in range(newtop + 1):
                td[u] = tn[u]
            top = newtop
        w = 0
        cnt = 0
        mask = 0
        for u in range(top + 1):
            if td[u] != 0:
                w += td[u] * td[u]
                cnt += 1
                mask |= np.int64(1) << u
        sqfree[idx] = sf
        omega[idx] = n
        tau[idx] = t
        W[idx] = w
        L[idx] = cnt
        degmask[idx] = mask
        coprime[idx] = cp


@njit(cache=True, nogil=True)
def mark_products(g1, b1, h0, m2, f2, n, p, e, q, log, exp, zech, inc, powq, hit, lo_code, hi_code):
    """Mark every product G1 * (h0 + m2 * R), G1 a row of g1, deg R < f2.

    hit covers monic indices [lo_code, hi_code) of degree n.
    """
    nm = len(m2)
    cur = np.zeros(n + 1, dtype=np.int64)
    step = np.zeros(b1 + nm, dtype=np.int64)
    ns = b1 + nm
    steps = np.zeros((max(f2, 1), n + 1), dtype=np.int64)
    lo = np.zeros(max(f2, 1), dtype=np.int64)
    hi = np.zeros(max(f2, 1), dtype=np.int64)
    digits = np.zeros(max(f2, 1), dtype=np.int64)
    total = q ** f2
    for r in range(g1.shape[0]):
        g = g1[r]
        _polymul_into(g, b1 + 1, h0, len(h0), cur, p, e, log, exp, zech)
        _polymul_into(g, b1 + 1, m2, nm, step, p, e, log, exp, zech)
        for i in range(f2):
            for j in range(n + 1):
                steps[i, j] = 0
            for j in range(ns):
                if i + j <= n:
                    steps[i, i + j] = step[j]
            lo[i] = i
            hi[i] = min(i + ns, n + 1)
            digits[i] = 0
        code = 0
        for j in range(n):
            code += cur[j] * powq[j]
        if lo_code <= code < hi_code:
            hit[code - lo_code] = 1
        for t in range(1, total):
            code = _advance(digits, cur, steps, lo, hi, code, q, p, e, log, exp, zech, inc, powq)
            if lo_code <= code < hi_code:
                hit[code - lo_code] = 1
