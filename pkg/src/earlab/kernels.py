"""Hot loops: one full optimisation run per call.

Everything here is compiled with numba unless ``EARLAB_DISABLE_JIT`` is set,
in which case the same code runs as plain Python over numpy arrays. Random
numbers come from two ``numpy.random.Generator`` objects (mutation stream and
selection stream); numba's Generator support reproduces numpy's output exactly,
so compiled and uncompiled runs are bit-identical.

Target values are updated incrementally per flipped bit instead of being
recomputed, which keeps a generation O(1) for OMd and XdivK.
"""
import numpy as np

from ._jit import njit

KIND_OMD = 0
KIND_XDIVK = 1
KIND_LEADINGONES = 2

VARIANT_RLS = 0
VARIANT_EARL = 1
VARIANT_MOD_LEARNING = 2
VARIANT_MOD_NO_LEARNING = 3

STATE_TARGET = 0
STATE_SINGLE = 1

OBJ_TARGET = 0
OBJ_AUX1 = 1
OBJ_AUX2 = 2


@njit(cache=True)
def full_target(kind, n, k, d, bits, ones):
    if kind == KIND_OMD:
        t = 0
        for i in range(n):
            want = 0 if i < d else 1
            if bits[i] == want:
                t += 1
        return t
    if kind == KIND_XDIVK:
        return ones // k
    t = 0
    while t < n and bits[t] == 1:
        t += 1
    return t


@njit(cache=True)
def optimum(kind, n, k):
    if kind == KIND_XDIVK:
        return n // k
    return n


@njit(cache=True)
def target_after_flip(kind, n, k, d, bits, ones, t, pos):
    """Target value of ``bits`` with ``pos`` flipped, given its current value ``t``."""
    if kind == KIND_OMD:
        want = 0 if pos < d else 1
        if bits[pos] == want:
            return t - 1
        return t + 1
    if kind == KIND_XDIVK:
        if bits[pos] == 1:
            return (ones - 1) // k
        return (ones + 1) // k
    # LeadingOnes
    if pos < t:
        return pos
    if pos == t:
        j = t + 1
        while j < n and bits[j] == 1:
            j += 1
        return j
    return t


@njit(cache=True)
def objective_value(h, n, p, x, t):
    if h == OBJ_TARGET:
        return t
    low = x < p
    if h == OBJ_AUX1:
        return x if low else n - x
    return n - x if low else x


@njit(cache=True)
def select_objective(q, s, epsilon, rng):
    if epsilon > 0.0 and rng.random() < epsilon:
        return int(rng.random() * 3)
    best = q[s, 0]
    for h in range(1, 3):
        if q[s, h] > best:
            best = q[s, h]
    n_ties = 0
    for h in range(3):
        if q[s, h] == best:
            n_ties += 1
    if n_ties == 1:
        for h in range(3):
            if q[s, h] == best:
                return h
    j = int(rng.random() * n_ties)
    for h in range(3):
        if q[s, h] == best:
            if j == 0:
                return h
            j -= 1
    return 2


@njit(cache=True)
def random_bits(n, rng):
    bits = np.zeros(n, np.uint8)
    ones = 0
    for i in range(n):
        if rng.random() < 0.5:
            bits[i] = 1
            ones += 1
    return bits, ones


@njit(cache=True, nogil=True)
def run_kernel(kind, n, k, d, p, variant, state_mode, alpha, gamma, epsilon, cap, rng_mut, rng_sel):
    """Run one algorithm until the optimum is hit or ``cap`` evaluations are used.

    Returns ``(evaluations, reached_optimum, best_target, n_decreases)`` where
    the last entry counts generations in which the target value dropped.
    """
    bits, ones = random_bits(n, rng_mut)
    t = full_target(kind, n, k, d, bits, ones)
    opt = optimum(kind, n, k)
    n_states = opt + 1 if state_mode == STATE_TARGET else 1
    q = np.zeros((n_states, 3))
    best = t
    decreases = 0
    evals = 1
    while t < opt and evals < cap:
        pos = int(rng_mut.random() * n)
        x_new = ones + 1 - 2 * np.int64(bits[pos])
        t_new = target_after_flip(kind, n, k, d, bits, ones, t, pos)
        evals += 1

        if variant == VARIANT_RLS:
            if t_new >= t:
                bits[pos] ^= 1
                ones = x_new
                t = t_new
            continue

        s = t if state_mode == STATE_TARGET else 0
        h = select_objective(q, s, epsilon, rng_sel)
        h_ok = objective_value(h, n, p, x_new, t_new) >= objective_value(h, n, p, ones, t)
        f = t
        if variant == VARIANT_EARL:
            accept = h_ok
        else:
            accept = h_ok and t_new >= t
        if accept:
            bits[pos] ^= 1
            ones = x_new
            t = t_new
            if t < f:
                decreases += 1
            elif t > best:
                best = t

        if variant == VARIANT_MOD_LEARNING and h_ok:
            r = float(t_new - f)
        else:
            r = float(t - f)
        s_next = t if state_mode == STATE_TARGET else 0
        q_next = q[s_next, 0]
        if q[s_next, 1] > q_next:
            q_next = q[s_next, 1]
        if q[s_next, 2] > q_next:
            q_next = q[s_next, 2]
        old = q[s, h]
        q[s, h] = old + alpha * (r + gamma * q_next - old)
    if t > best:
        best = t
    return evals, t >= opt, best, decreases


@njit(cache=True)
def simulate_birth_death(forward, backward, start_states, max_steps, rng):
    """Monte-Carlo hitting times of the last state for a birth-death chain.

    ``forward``/``backward`` are per-state step probabilities (floats); one
    double is drawn per transition.
    """
    n_last = forward.shape[0] - 1
    out = np.empty(start_states.shape[0], np.int64)
    for r in range(start_states.shape[0]):
        x = start_states[r]
        steps = 0
        while x < n_last and steps < max_steps:
            u = rng.random()
            if u < forward[x]:
                x += 1
            elif u < forward[x] + backward[x]:
                x -= 1
            steps += 1
        out[r] = steps
    return out
