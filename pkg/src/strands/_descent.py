"""Compiled coordinate-descent engine.

Everything here works in Gram space: the path solver receives G = X'X/n
and b = X'y/n and maintains the gradient vector c = b - G beta exactly
across coordinate updates, so screening, KKT checks and warm starts all
read maintained state instead of touching X.

The penalty at level lam is lam * sum_j (a_j |beta_j| + g_j/2 beta_j^2)
with per-coordinate l1 weights a_j (possibly +inf, which pins the
coordinate at zero) and l2 factors g_j. Lasso is a=1, g=0; elastic net
a=alpha, g=1-alpha; adaptive lasso a=w_j, g=0.

Convergence per lambda requires both max |coordinate change| <= sweep_tol
over a full sweep and the KKT residual <= kkt_tol. On saturated supports
(|A| close to min(n, p), routine at the dense end of subsample paths)
plain cyclic descent needs O(kappa) sweeps to push the last zigzag below
sweep_tol, which is effectively unbounded. The `accel` path therefore
solves the sign-fixed stationarity system on the current support with a
cached Cholesky factor (appended / Givens-downdated as the support
drifts, rebuilt when stale) and steps to the solution, clamped at the
first sign crossing. Accelerated points are still polished and verified
by the two criteria above, so acceleration changes speed, never the
contract.
"""

import numpy as np
from numba import njit

# status codes per lambda
OK = 0
NO_CONVERGENCE = 1

# factor maintenance policy
_REBUILD_OPS = 60
_MAX_PIVOTS = 40
_ACCEL_BUDGET = 50


@njit(cache=True)
def _chol_build(G, l2f, lam, eps, fo, fm, L):
    """Factor K = G[S,S] + diag(lam*g + eps) into L. False on pivot failure."""
    for i in range(fm):
        ji = fo[i]
        for j in range(i + 1):
            s = G[ji, fo[j]]
            for k in range(j):
                s -= L[i, k] * L[j, k]
            if j < i:
                L[i, j] = s / L[j, j]
            else:
                s += lam * l2f[ji] + eps
                if s <= 1e-13:
                    return False
                L[i, i] = np.sqrt(s)
    return True


@njit(cache=True)
def _chol_append(G, l2f, lam, eps, fo, fm, L, jnew):
    """Grow the factor by variable jnew at position fm. False if pivot fails."""
    for i in range(fm):
        s = G[fo[i], jnew]
        for k in range(i):
            s -= L[i, k] * L[fm, k]
        L[fm, i] = s / L[i, i]
    d = G[jnew, jnew] + lam * l2f[jnew] + eps
    for k in range(fm):
        d -= L[fm, k] * L[fm, k]
    if d <= 1e-13:
        return False
    L[fm, fm] = np.sqrt(d)
    return True


@njit(cache=True)
def _chol_drop(L, fm, pos, v):
    """Remove row/col `pos` from an fm x fm factor in place.

    The trailing block absorbs the removed column via a LINPACK-style
    rank-one update; rows shift up, columns left. `v` is scratch of
    length >= fm.
    """
    q = fm - pos - 1
    for i in range(q):
        v[i] = L[pos + 1 + i, pos]
    # shift the trailing rows up / left
    for i in range(pos, fm - 1):
        for j in range(pos):
            L[i, j] = L[i + 1, j]
        for j in range(pos, i + 1):
            L[i, j] = L[i + 1, j + 1]
    # cholupdate of the shifted trailing block with v (Givens form)
    for k in range(q):
        a = L[pos + k, pos + k]
        bk = v[k]
        r = np.sqrt(a * a + bk * bk)
        c = a / r
        s = bk / r
        L[pos + k, pos + k] = r
        for i in range(k + 1, q):
            old = L[pos + i, pos + k]
            L[pos + i, pos + k] = c * old + s * v[i]
            v[i] = c * v[i] - s * old


@njit(cache=True)
def _factor_solve(L, fm, rhs, out):
    """Solve (L L') out = rhs."""
    for i in range(fm):
        t = rhs[i]
        for k in range(i):
            t -= L[i, k] * out[k]
        out[i] = t / L[i, i]
    for i in range(fm - 1, -1, -1):
        t = out[i]
        for k in range(i + 1, fm):
            t -= L[k, i] * out[k]
        out[i] = t / L[i, i]


@njit(cache=True)
def _solve_refined(G, l2f, lam, L, fo, fm, rhs, sol, resid, dsol):
    """Solve K sol = rhs through the jittered factor, then refine.

    L factors K + eps*I; two refinement passes against the true K push
    the eps-induced error below the convergence tolerances, so the
    accelerated point agrees with the fixed point plain descent is
    heading for. On a genuinely singular K the refinement leaves the
    null-space component alone, which neither the KKT residual nor the
    descent updates can see.
    """
    _factor_solve(L, fm, rhs, sol)
    for _ in range(2):
        for a in range(fm):
            ja = fo[a]
            s = lam * l2f[ja] * sol[a]
            for k in range(fm):
                s += G[ja, fo[k]] * sol[k]
            resid[a] = rhs[a] - s
        _factor_solve(L, fm, resid, dsol)
        for a in range(fm):
            sol[a] += dsol[a]


@njit(cache=True)
def cd_path(G, b, lams, l1w, l2f, beta0, sweep_tol, kkt_tol, max_sweeps, accel):
    """Warm-started descending-lambda coordinate descent.

    Parameters
    ----------
    G : (p, p) Gram matrix X'X/n.
    b : (p,) X'y/n.
    lams : (L,) strictly positive, descending.
    l1w : (p,) per-coordinate l1 weights, may contain +inf.
    l2f : (p,) per-coordinate l2 factors.
    beta0 : (p,) starting point (zeros for a cold start).
    accel : enable the subspace-solve acceleration.

    Returns
    -------
    betas : (L, p) solution at each lambda.
    status : (L,) OK or NO_CONVERGENCE.
    sweeps : (L,) sweep count spent at each lambda.
    """
    p = G.shape[0]
    nlam = lams.shape[0]
    betas = np.zeros((nlam, p))
    status = np.zeros(nlam, dtype=np.int64)
    nsweeps = np.zeros(nlam, dtype=np.int64)

    beta = beta0.copy()
    c = b - G @ beta if np.any(beta0 != 0.0) else b.copy()
    cand = np.zeros(p, dtype=np.bool_)

    # cached Cholesky of the active-set system, shared across lambdas
    L = np.zeros((p, p))
    fo = np.full(p, -1, dtype=np.int64)
    fpos = np.full(p, -1, dtype=np.int64)
    fm = 0
    fops = _REBUILD_OPS + 1  # force first build
    factor_lam = -1.0

    nz = np.empty(p, dtype=np.int64)
    rhs = np.empty(p)
    sol = np.empty(p)
    cur = np.empty(p)
    scratch = np.empty(p)
    resid = np.empty(p)
    dsol = np.empty(p)

    has_l2 = False
    diag_mean = 0.0
    for j in range(p):
        diag_mean += G[j, j]
        if l2f[j] != 0.0:
            has_l2 = True
    eps = 1e-8 * diag_mean / p if p > 0 else 0.0

    for li in range(nlam):
        lam = lams[li]
        lam_prev = lams[li - 1] if li > 0 else 2.0 * lam
        thr = 2.0 * lam - lam_prev
        for j in range(p):
            aj = l1w[j]
            if aj == np.inf:
                cand[j] = False
            else:
                cand[j] = (beta[j] != 0.0) or (abs(c[j]) >= thr * aj)

        sweeps = 0
        since_accel = 1000
        budget = _ACCEL_BUDGET
        done = False
        while sweeps < max_sweeps:
            # ---- one cyclic sweep over the candidate set ----
            maxd = 0.0
            for j in range(p):
                if not cand[j]:
                    continue
                oldb = beta[j]
                zj = G[j, j]
                rho = c[j] + zj * oldb
                t = abs(rho) - lam * l1w[j]
                if t > 0.0:
                    newb = (t if rho > 0.0 else -t) / (zj + lam * l2f[j])
                else:
                    newb = 0.0
                if newb != oldb:
                    d = newb - oldb
                    beta[j] = newb
                    row = G[j]
                    for k in range(p):
                        c[k] -= d * row[k]
                    if abs(d) > maxd:
                        maxd = abs(d)
            sweeps += 1
            since_accel += 1

            if maxd <= sweep_tol:
                # screen misses: any zero coordinate violating KKT joins
                viol = False
                for j in range(p):
                    if cand[j] or l1w[j] == np.inf:
                        continue
                    if abs(c[j]) - lam * l1w[j] > kkt_tol:
                        cand[j] = True
                        viol = True
                if viol:
                    continue
                kkt = 0.0
                for j in range(p):
                    if l1w[j] == np.inf:
                        continue
                    if beta[j] != 0.0:
                        sgn = 1.0 if beta[j] > 0.0 else -1.0
                        res = abs(c[j] - lam * l2f[j] * beta[j] - lam * l1w[j] * sgn)
                    else:
                        res = abs(c[j]) - lam * l1w[j]
                        if res < 0.0:
                            res = 0.0
                    if res > kkt:
                        kkt = res
                if kkt <= kkt_tol:
                    done = True
                    break
                continue

            if not accel or since_accel < 3 or budget <= 0:
                continue

            # ---- subspace solve on the current support ----
            budget -= 1
            since_accel = 0
            m = 0
            for j in range(p):
                if beta[j] != 0.0:
                    nz[m] = j
                    m += 1
            if m == 0:
                continue

            # sync the cached factor with the support
            rebuild = fops > _REBUILD_OPS or (has_l2 and lam != factor_lam)
            if not rebuild:
                ndrop = 0
                nadd = 0
                for a in range(fm):
                    if beta[fo[a]] == 0.0:
                        ndrop += 1
                for a in range(m):
                    if fpos[nz[a]] < 0:
                        nadd += 1
                if ndrop + nadd > max(8, fm // 3):
                    rebuild = True
                else:
                    # drops from the highest position down
                    a = fm - 1
                    while a >= 0:
                        if beta[fo[a]] == 0.0:
                            _chol_drop(L, fm, a, scratch)
                            fpos[fo[a]] = -1
                            for i in range(a + 1, fm):
                                fpos[fo[i]] -= 1
                                fo[i - 1] = fo[i]
                            fm -= 1
                            fops += 1
                        a -= 1
                    for a in range(m):
                        j = nz[a]
                        if fpos[j] < 0:
                            if not _chol_append(G, l2f, lam, eps, fo, fm, L, j):
                                rebuild = True
                                break
                            fo[fm] = j
                            fpos[j] = fm
                            fm += 1
                            fops += 1
            if rebuild:
                for a in range(fm):
                    fpos[fo[a]] = -1
                fm = m
                for a in range(m):
                    fo[a] = nz[a]
                    fpos[nz[a]] = a
                factor_lam = lam
                fops = 0
                if not _chol_build(G, l2f, lam, eps, fo, fm, L):
                    # hopeless conditioning; retreat to plain sweeps
                    for a in range(fm):
                        fpos[fo[a]] = -1
                    fm = 0
                    fops = _REBUILD_OPS + 1
                    continue

            # pivot toward the sign-fixed optimum, clamping at sign crossings
            for a in range(fm):
                cur[a] = beta[fo[a]]
                sgn = 1.0 if cur[a] > 0.0 else -1.0
                rhs[a] = b[fo[a]] - lam * l1w[fo[a]] * sgn
            pivots = _MAX_PIVOTS
            while fm > 0 and pivots > 0:
                pivots -= 1
                _solve_refined(G, l2f, lam, L, fo, fm, rhs, sol, resid, dsol)
                tmax = 1.0
                crossing = -1
                for a in range(fm):
                    if sol[a] * cur[a] < 0.0 or sol[a] == 0.0:
                        ta = cur[a] / (cur[a] - sol[a])
                        if ta < tmax:
                            tmax = ta
                            crossing = a
                if crossing < 0:
                    for a in range(fm):
                        cur[a] = sol[a]
                    break
                for a in range(fm):
                    cur[a] += tmax * (sol[a] - cur[a])
                # land the crossing coordinate exactly on zero and drop it
                j = fo[crossing]
                cur[crossing] = 0.0
                delta = 0.0 - beta[j]
                if delta != 0.0:
                    beta[j] = 0.0
                    row = G[j]
                    for k in range(p):
                        c[k] -= delta * row[k]
                _chol_drop(L, fm, crossing, scratch)
                fpos[j] = -1
                for i in range(crossing + 1, fm):
                    fpos[fo[i]] -= 1
                    fo[i - 1] = fo[i]
                for i in range(crossing, fm - 1):
                    cur[i] = cur[i + 1]
                    rhs[i] = rhs[i + 1]
                fm -= 1
                fops += 1
            # apply the surviving coordinates
            for a in range(fm):
                j = fo[a]
                d = cur[a] - beta[j]
                if d != 0.0:
                    beta[j] = cur[a]
                    row = G[j]
                    for k in range(p):
                        c[k] -= d * row[k]

        nsweeps[li] = sweeps
        if not done:
            status[li] = NO_CONVERGENCE
        for j in range(p):
            betas[li, j] = beta[j]
    return betas, status, nsweeps


@njit(cache=True)
def cd_single_trace(G, b, lam, l1w, l2f, sweep_tol, kkt_tol, max_sweeps):
    """Plain cyclic descent at one lambda, recording beta after every sweep.

    Test-support variant: no screening, no acceleration. Returns the
    per-sweep trajectory (sweep count in the second output).
    """
    p = G.shape[0]
    cap = min(max_sweeps, 4000)
    trail = np.zeros((cap, p))
    beta = np.zeros(p)
    c = b.copy()
    sweeps = 0
    while sweeps < max_sweeps:
        maxd = 0.0
        for j in range(p):
            if l1w[j] == np.inf:
                continue
            oldb = beta[j]
            zj = G[j, j]
            rho = c[j] + zj * oldb
            t = abs(rho) - lam * l1w[j]
            if t > 0.0:
                newb = (t if rho > 0.0 else -t) / (zj + lam * l2f[j])
            else:
                newb = 0.0
            if newb != oldb:
                d = newb - oldb
                beta[j] = newb
                row = G[j]
                for k in range(p):
                    c[k] -= d * row[k]
                if abs(d) > maxd:
                    maxd = abs(d)
        if sweeps < cap:
            for j in range(p):
                trail[sweeps, j] = beta[j]
        sweeps += 1
        if maxd <= sweep_tol:
            kkt = 0.0
            for j in range(p):
                if l1w[j] == np.inf:
                    continue
                if beta[j] != 0.0:
                    sgn = 1.0 if beta[j] > 0.0 else -1.0
                    res = abs(c[j] - lam * l2f[j] * beta[j] - lam * l1w[j] * sgn)
                else:
                    res = abs(c[j]) - lam * l1w[j]
                    if res < 0.0:
                        res = 0.0
                if res > kkt:
                    kkt = res
            if kkt <= kkt_tol:
                break
    return trail, min(sweeps, cap)
