# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled tick kernel.

Mirror of the pure-Python lane (_kernel_py + interact): same case table,
same draw order, same floating-point operation order, same splitmix64
stream. Any semantic change here must land in the reference first; the
parity tests compare final society digests across lanes.
"""

import numpy as np

from libc.math cimport exp, pow

DEF U53 = 1.0 / 9007199254740992.0

# Role codes; must match socsynth.roles.
DEF R_CIVILIAN = 0
DEF R_POLICE = 1
DEF R_PERPETRATOR = 2
DEF R_LEADER = 3
DEF R_FINANCIER = 4

# Outcome-kind slots; must match socsynth.kernel.KIND_ORDER.
DEF K_NO_ACTION = 0
DEF K_PRED_SHIFT = 1
DEF K_POWER_SHIFT = 2
DEF K_RECRUITMENT = 3
DEF K_ARREST = 4
DEF K_ATTACK_EXECUTED = 6
DEF K_ATTACK_FAILED = 7

# Packed parameter slots; must match socsynth.kernel.P_*.
DEF P_POLICE_THR = 0
DEF P_TERROR_THR = 1
DEF P_LEADER_EDU_MIN = 2
DEF P_FIN_WEALTH_MIN = 3
DEF P_ATTACK_POWER_THR = 4
DEF P_FIN_POWER_MIN = 5
DEF P_REMOVAL_FLOOR = 6
DEF P_GAIN_NEUTRAL = 7
DEF P_GAIN_CONTACT = 8
DEF P_GAIN_PEER = 9
DEF P_LOSS_POLICE = 10
DEF P_RECRUIT_JUMP = 11
DEF P_LOGISTIC_S = 12
DEF P_TOLL_P0 = 13
DEF P_TOLL_ALPHA = 14
DEF P_TOLL_SCALE = 15
DEF P_FAIL_FACTOR = 16

# Trait columns; must match socsynth.roles.COL_*.
DEF C_EDU = 0
DEF C_MARITAL = 1
DEF C_WEALTH = 2
DEF C_POLICE_PRED = 6
DEF C_TERROR_PRED = 7
DEF C_POWER = 8


cdef inline unsigned long long _mix64(unsigned long long x) noexcept nogil:
    x ^= x >> 30
    x *= 0xBF58476D1CE4E5B9ULL
    x ^= x >> 27
    x *= 0x94D049BB133111EBULL
    return x ^ (x >> 31)


cdef inline unsigned long long _next_u64(unsigned long long *state) noexcept nogil:
    state[0] += 0x9E3779B97F4A7C15ULL
    return _mix64(state[0])


cdef inline double _rand(unsigned long long *state) noexcept nogil:
    return <double>(_next_u64(state) >> 11) * U53


cdef inline double _rand_open0(unsigned long long *state) noexcept nogil:
    return <double>((_next_u64(state) >> 11) + 1) * U53


cdef inline int _classify(double edu, double married, double wealth,
                          double police_pred, double terror_pred,
                          const double[::1] P) noexcept nogil:
    cdef bint police_q = police_pred >= P[P_POLICE_THR]
    cdef bint terror_q = terror_pred >= P[P_TERROR_THR]
    if police_q and police_pred > terror_pred:
        return R_POLICE
    if terror_q and (terror_pred > police_pred or not police_q):
        if edu >= P[P_LEADER_EDU_MIN] and married == 1.0:
            return R_LEADER
        if wealth >= P[P_FIN_WEALTH_MIN] and married == 1.0:
            return R_FINANCIER
        return R_PERPETRATOR
    return R_CIVILIAN


cdef inline int _classify_slot(const double[:, ::1] tau, Py_ssize_t slot,
                               const double[::1] P) noexcept nogil:
    return _classify(tau[slot, C_EDU], tau[slot, C_MARITAL], tau[slot, C_WEALTH],
                     tau[slot, C_POLICE_PRED], tau[slot, C_TERROR_PRED], P)


def resolve_tick(double[:, ::1] tau,
                 long long[::1] ids,
                 long long[::1] indptr,
                 long long[::1] indices,
                 long long[:, ::1] edge_pairs,
                 int pair_mode,  # 0 = per_agent, 1 = edge_sample
                 dict memory,
                 double[::1] params,
                 unsigned long long state):
    cdef Py_ssize_t n = tau.shape[0]
    cdef Py_ssize_t n_edges = edge_pairs.shape[0]
    cdef unsigned long long rng = state

    counts_arr = np.zeros(8, dtype=np.int64)
    d_crimes_arr = np.zeros(n, dtype=np.float64)
    d_police_arr = np.zeros(n, dtype=np.float64)
    d_terror_arr = np.zeros(n, dtype=np.float64)
    d_power_arr = np.zeros(n, dtype=np.float64)
    removal_flag_arr = np.zeros(n, dtype=np.uint8)

    cdef long long[::1] counts = counts_arr
    cdef double[::1] d_crimes = d_crimes_arr
    cdef double[::1] d_police = d_police_arr
    cdef double[::1] d_terror = d_terror_arr
    cdef double[::1] d_power = d_power_arr
    cdef unsigned char[::1] removal_flag = removal_flag_arr

    removal_slots = []
    attacks = []

    # Population mean of signed predisposition, identical to the reference
    # (same numpy reduction over the same data).
    tau_np = np.asarray(tau)
    cdef double mu = float((tau_np[:, C_POLICE_PRED] - tau_np[:, C_TERROR_PRED]).mean())

    cdef Py_ssize_t slot, other, neigh, fin_slot, c, pair_index, edge_row
    cdef long long start, degree, count
    cdef int role_a, role_b, role_n, cell_count
    cdef double local_power, new_pred, cell_sum, combined, p, u, u0, u1
    cdef double severity, deaths_f
    cdef long long deaths
    cdef bint success
    cdef object key

    cdef Py_ssize_t n_pairs = n
    if pair_mode == 1 and n_edges == 0:
        n_pairs = 0

    for pair_index in range(n_pairs):
        if pair_mode == 1:
            edge_row = <Py_ssize_t>(_next_u64(&rng) % <unsigned long long>n_edges)
            slot = <Py_ssize_t>edge_pairs[edge_row, 0]
            other = <Py_ssize_t>edge_pairs[edge_row, 1]
            start = indptr[slot]
            degree = indptr[slot + 1] - start
        else:
            slot = pair_index
            start = indptr[slot]
            degree = indptr[slot + 1] - start
            if degree == 0:
                continue
            other = <Py_ssize_t>indices[start + <long long>(_next_u64(&rng) % <unsigned long long>degree)]

        role_a = _classify_slot(tau, slot, params)
        role_b = _classify_slot(tau, other, params)

        if role_a == R_CIVILIAN:
            if role_b == R_PERPETRATOR or role_b == R_LEADER or role_b == R_FINANCIER:
                d_terror[slot] += params[P_GAIN_NEUTRAL]
                counts[K_PRED_SHIFT] += 1
            elif role_b == R_POLICE:
                d_police[slot] += params[P_GAIN_NEUTRAL]
                counts[K_PRED_SHIFT] += 1
            else:
                counts[K_NO_ACTION] += 1
            continue

        if role_a == R_POLICE:
            if role_b == R_PERPETRATOR or role_b == R_LEADER or role_b == R_FINANCIER:
                if ids[slot] < ids[other]:
                    key = (ids[slot], ids[other])
                else:
                    key = (ids[other], ids[slot])
                count = memory.get(key, 0)
                if count == 0:
                    memory[key] = 1
                    counts[K_NO_ACTION] += 1
                else:
                    counts[K_ARREST] += 1
                    if not removal_flag[other]:
                        removal_flag[other] = 1
                        removal_slots.append(other)
            elif role_b == R_POLICE:
                d_power[slot] += params[P_GAIN_PEER]
                d_power[other] += params[P_GAIN_PEER]
                counts[K_POWER_SHIFT] += 1
            else:
                d_police[other] += params[P_GAIN_CONTACT]
                counts[K_PRED_SHIFT] += 1
            continue

        # Initiator holds a terrorist role: Leader, Financier or Perpetrator.
        if role_b == R_POLICE:
            d_power[slot] -= params[P_LOSS_POLICE]
            if tau[slot, C_POWER] - params[P_LOSS_POLICE] < params[P_REMOVAL_FLOOR]:
                if not removal_flag[slot]:
                    removal_flag[slot] = 1
                    removal_slots.append(slot)
            counts[K_POWER_SHIFT] += 1
            continue

        if role_b == R_CIVILIAN:
            if role_a == R_LEADER or role_a == R_FINANCIER:
                new_pred = tau[other, C_TERROR_PRED] + params[P_GAIN_CONTACT]
                if new_pred >= params[P_TERROR_THR]:
                    d_terror[other] += params[P_GAIN_CONTACT] + params[P_RECRUIT_JUMP]
                    counts[K_RECRUITMENT] += 1
                    continue
            d_terror[other] += params[P_GAIN_CONTACT]
            counts[K_PRED_SHIFT] += 1
            continue

        # Both sides hold terrorist roles.
        if role_a == R_FINANCIER:
            d_power[slot] += params[P_GAIN_PEER]
            d_power[other] += params[P_GAIN_PEER]
            counts[K_POWER_SHIFT] += 1
            continue

        # Leader or Perpetrator meets a peer: accrue power, then the attack gate.
        local_power = tau[slot, C_POWER] + params[P_GAIN_PEER]
        fin_slot = -1
        cell_count = 0
        cell_sum = 0.0
        if local_power >= params[P_ATTACK_POWER_THR]:
            for neigh in range(start, start + degree):
                c = <Py_ssize_t>indices[neigh]
                role_n = _classify_slot(tau, c, params)
                if role_n == R_PERPETRATOR or role_n == R_LEADER or role_n == R_FINANCIER:
                    cell_count += 1
                    cell_sum += tau[c, C_POWER]
                    if (fin_slot < 0 and role_n == R_FINANCIER
                            and tau[c, C_POWER] >= params[P_FIN_POWER_MIN]):
                        fin_slot = c

        if cell_count < 3 or fin_slot < 0:
            d_power[slot] += params[P_GAIN_PEER]
            counts[K_POWER_SHIFT] += 1
            continue

        combined = local_power + tau[fin_slot, C_POWER] + cell_sum
        p = 1.0 / (1.0 + exp(-(combined - mu) / params[P_LOGISTIC_S]))
        u = _rand(&rng)
        success = u < p
        if success:
            u0 = _rand(&rng)
            if u0 < params[P_TOLL_P0]:
                deaths = 0
            else:
                u1 = _rand_open0(&rng)
                severity = params[P_TOLL_SCALE] * combined * (pow(u1, -1.0 / params[P_TOLL_ALPHA]) - 1.0)
                if severity > 1e15:  # numeric guard, mirrored from the reference
                    severity = 1e15
                deaths = <long long>severity
            d_power[slot] += params[P_GAIN_PEER]
            d_crimes[slot] += 1.0
            cell = []
            for neigh in range(start, start + degree):
                c = <Py_ssize_t>indices[neigh]
                role_n = _classify_slot(tau, c, params)
                if role_n == R_PERPETRATOR or role_n == R_LEADER or role_n == R_FINANCIER:
                    d_crimes[c] += 1.0
                    cell.append(c)
            attacks.append((slot, fin_slot, tuple(cell), combined, deaths))
            counts[K_ATTACK_EXECUTED] += 1
        else:
            d_power[slot] += params[P_GAIN_PEER]
            d_power[slot] += -local_power * (1.0 - params[P_FAIL_FACTOR])
            counts[K_ATTACK_FAILED] += 1

    return (rng, counts_arr, d_crimes_arr, d_police_arr, d_terror_arr,
            d_power_arr, removal_slots, attacks)
