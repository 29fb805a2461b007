"""Compiled inner loop of one simulation run.

Mirrors the semantics of ``engine.step`` exactly (same arithmetic, same
pre-drawn random variates); the equivalence is pinned by a test.  Keep
any behavioral change in sync with the reference path.
"""

from __future__ import annotations

import numpy as np
from numba import njit

BOLTZMANN, EPSILON_GREEDY, UCB = 0, 1, 2


@njit(cache=True)
def _segment(centers, s):
    # Left segment index and interpolation weight of a clamped scalar.
    nc = centers.size
    if s <= centers[0]:
        return 0, 0.0
    if s >= centers[nc - 1]:
        return nc - 2, 1.0
    j = 0
    for i in range(1, nc):
        if centers[i] <= s:
            j = i
        else:
            break
    if j > nc - 2:
        j = nc - 2
    w = (s - centers[j]) / (centers[j + 1] - centers[j])
    return j, w


@njit(cache=True)
def _select_boltzmann(q, beta, u, sel, buf):
    n, k = q.shape
    for i in range(n):
        hi = q[i, 0]
        lo = q[i, 0]
        for j in range(1, k):
            v = q[i, j]
            if v > hi:
                hi = v
            if v < lo:
                lo = v
        if hi == lo:
            # All-equal row: the distribution is uniform and the generic
            # inverse-CDF draw reduces exactly to floor(u*k).
            idx = int(u[i] * k)
            if idx > k - 1:
                idx = k - 1
            sel[i] = idx
            continue
        total = 0.0
        for j in range(k):
            e = np.exp((q[i, j] - hi) / beta)
            buf[j] = e
            total += e
        thresh = u[i] * total
        chosen = k - 1
        acc = 0.0
        for j in range(k):
            acc += buf[j]
            if acc > thresh:
                chosen = j
                break
        sel[i] = chosen


@njit(cache=True)
def _select_eps_greedy(q, eps, u, v, sel):
    n, k = q.shape
    for i in range(n):
        if u[i] < eps:
            idx = int(v[i] * k)
            if idx > k - 1:
                idx = k - 1
            sel[i] = idx
            continue
        hi = q[i, 0]
        for j in range(1, k):
            if q[i, j] > hi:
                hi = q[i, j]
        ties = 0
        for j in range(k):
            if q[i, j] == hi:
                ties += 1
        pick = int(v[i] * ties)
        if pick > ties - 1:
            pick = ties - 1
        count = 0
        chosen = k - 1
        for j in range(k):
            if q[i, j] == hi:
                if count == pick:
                    chosen = j
                    break
                count += 1
        sel[i] = chosen


@njit(cache=True)
def _select_ucb(q, visits, t, c1, u, sel):
    n, k = q.shape
    log_t = np.log(float(t))
    for i in range(n):
        unvisited = 0
        for j in range(k):
            if visits[i, j] == 0:
                unvisited += 1
        if unvisited > 0:
            pick = int(u[i] * unvisited)
            if pick > unvisited - 1:
                pick = unvisited - 1
            count = 0
            chosen = k - 1
            for j in range(k):
                if visits[i, j] == 0:
                    if count == pick:
                        chosen = j
                        break
                    count += 1
            sel[i] = chosen
        else:
            best = q[i, 0] + c1 * np.sqrt(log_t / visits[i, 0])
            chosen = 0
            for j in range(1, k):
                score = q[i, j] + c1 * np.sqrt(log_t / visits[i, j])
                if score > best:
                    best = score
                    chosen = j
            sel[i] = chosen


@njit(cache=True)
def simulate(
    b,
    lam_s,
    lam_b,
    mean_s,
    mean_b,
    sd_s,
    sd_b,
    gamma_share,
    learning_rate,
    discount,
    policy_kind,
    beta1,
    beta2,
    eps1,
    eps2,
    c1,
    t_learn,
    centers,
    actions,
    q_s,
    q_b,
    visits_s,
    visits_b,
    state_s,
    state_b,
    noise_s,
    noise_b,
    z_s,
    z_b,
    records,
):
    """Run the full event loop in place; returns 0 or the step of failure.

    ``records`` (t_total, 8) receives per-step
    (inv_s, inv_b, theta_s, theta_b, quantity, profit_s, profit_b, profit_hq).
    q-tables and visit counts are mutated in place.
    """
    nc = centers.size
    n_rules = nc * nc
    k = actions.size
    t_total = records.shape[0]
    gamma_b = 1.0 - gamma_share
    lo = centers[0]
    hi = centers[nc - 1]
    buf = np.empty(k)
    sel_s = np.empty(n_rules, np.int64)
    sel_b = np.empty(n_rules, np.int64)

    for t in range(1, t_total + 1):
        ss = state_s
        if ss < lo:
            ss = lo
        if ss > hi:
            ss = hi
        sb = state_b
        if sb < lo:
            sb = lo
        if sb > hi:
            sb = hi
        js, ws = _segment(centers, ss)
        jb, wb = _segment(centers, sb)

        if policy_kind == BOLTZMANN:
            beta = beta1 / (beta2 + t)
            _select_boltzmann(q_s, beta, noise_s[t - 1, 0], sel_s, buf)
            _select_boltzmann(q_b, beta, noise_b[t - 1, 0], sel_b, buf)
        elif policy_kind == EPSILON_GREEDY:
            eps = 0.0
            if t <= t_learn:
                eps = eps1 - eps2 * t
                if eps > 1.0:
                    eps = 1.0
                if eps < 0.0:
                    eps = 0.0
            _select_eps_greedy(q_s, eps, noise_s[t - 1, 0], noise_s[t - 1, 1], sel_s)
            _select_eps_greedy(q_b, eps, noise_b[t - 1, 0], noise_b[t - 1, 1], sel_b)
        else:
            _select_ucb(q_s, visits_s, t, c1, noise_s[t - 1, 0], sel_s)
            _select_ucb(q_b, visits_b, t, c1, noise_b[t - 1, 0], sel_b)
        for i in range(n_rules):
            visits_s[i, sel_s[i]] += 1
            visits_b[i, sel_b[i]] += 1

        # Inferred investments and pre-update value of the current state;
        # only the (up to) four active rules carry weight.
        inv_s = 0.0
        inv_b = 0.0
        qold_s = 0.0
        qold_b = 0.0
        for di in range(2):
            w_row = (1.0 - ws) if di == 0 else ws
            base = (js + di) * nc
            for dj in range(2):
                wgt = w_row * ((1.0 - wb) if dj == 0 else wb)
                rule = base + jb + dj
                inv_s += wgt * actions[sel_s[rule]]
                inv_b += wgt * actions[sel_b[rule]]
                qold_s += wgt * q_s[rule, sel_s[rule]]
                qold_b += wgt * q_b[rule, sel_b[rule]]

        theta_s = mean_s + sd_s * z_s[t - 1]
        theta_b = mean_b + sd_b * z_b[t - 1]
        quantity = (theta_b - theta_s + inv_s + inv_b) / b
        if quantity < 0.0:
            quantity = 0.0
        margin = (theta_b - 0.5 * b * quantity + inv_b) * quantity - (theta_s - inv_s) * quantity
        profit_s = gamma_share * margin - 0.5 * lam_s * inv_s * inv_s
        profit_b = gamma_b * margin - 0.5 * lam_b * inv_b * inv_b
        profit_hq = profit_s + profit_b
        if not (np.isfinite(profit_hq) and np.isfinite(inv_s) and np.isfinite(inv_b)):
            return t

        # Greedy value of the next state (the investments just chosen).
        ns = inv_s
        if ns < lo:
            ns = lo
        if ns > hi:
            ns = hi
        nb = inv_b
        if nb < lo:
            nb = lo
        if nb > hi:
            nb = hi
        jns, wns = _segment(centers, ns)
        jnb, wnb = _segment(centers, nb)
        value_s = 0.0
        value_b = 0.0
        for di in range(2):
            w_row = (1.0 - wns) if di == 0 else wns
            base = (jns + di) * nc
            for dj in range(2):
                wgt = w_row * ((1.0 - wnb) if dj == 0 else wnb)
                if wgt == 0.0:
                    continue
                rule = base + jnb + dj
                max_s = q_s[rule, 0]
                max_b = q_b[rule, 0]
                for j in range(1, k):
                    if q_s[rule, j] > max_s:
                        max_s = q_s[rule, j]
                    if q_b[rule, j] > max_b:
                        max_b = q_b[rule, j]
                value_s += wgt * max_s
                value_b += wgt * max_b

        delta_s = learning_rate * (profit_s + discount * value_s - qold_s)
        delta_b = learning_rate * (profit_b + discount * value_b - qold_b)
        for di in range(2):
            w_row = (1.0 - ws) if di == 0 else ws
            base = (js + di) * nc
            for dj in range(2):
                wgt = w_row * ((1.0 - wb) if dj == 0 else wb)
                if wgt == 0.0:
                    continue
                rule = base + jb + dj
                q_s[rule, sel_s[rule]] += wgt * delta_s
                q_b[rule, sel_b[rule]] += wgt * delta_b

        records[t - 1, 0] = inv_s
        records[t - 1, 1] = inv_b
        records[t - 1, 2] = theta_s
        records[t - 1, 3] = theta_b
        records[t - 1, 4] = quantity
        records[t - 1, 5] = profit_s
        records[t - 1, 6] = profit_b
        records[t - 1, 7] = profit_hq

        state_s = inv_s
        state_b = inv_b
    return 0
