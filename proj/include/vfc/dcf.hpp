#pragma once

#include <stdexcept>

namespace vfc {

/**
802.11p MAC-layer constants for the saturated DCF analysis.

Durations are microseconds; the payload is given in bytes together with the
data rate used to convert it to airtime. Defaults follow the standard
highway-scenario parameter set used throughout this project.
*/
struct DcfParams {
    int w_min = 3;                  // minimum contention window W
    int m_stage = 1;                // maximum number of window doublings
    double slot_us = 20.0;          // idle slot duration
    double sifs_us = 10.0;
    double difs_us = 50.0;
    double header_us = 229.0;       // packet header airtime H
    double ack_us = 304.0;
    double propagation_us = 2.0;    // propagation delay delta
    double payload_bytes = 1920.0;  // task length E[P]
    double data_rate_mbps = 6.0;    // payload rate (1 Mbit/s == 1 bit/us)

    /// ACKtimeout = ACK + delta + DIFS.
    double ack_timeout_us() const {
        return ack_us + propagation_us + difs_us;
    }

    /// Airtime of one equal-split sub-task when the task goes to i units.
    double payload_time_us(int i_rus) const {
        return payload_bytes * 8.0 / data_rate_mbps / i_rus;
    }

    /// Throws std::invalid_argument when a field is out of range.
    void validate() const;
};

/// Solution of the saturation fixed point: transmission probability tau
/// and conditional collision probability p.
struct DcfFixedPoint {
    double tau;
    double p_coll;
};

/**
Solves the coupled saturation equations

    tau = 2 / (W+1 + p*W*sum_{k<m} (2p)^k)     (ratio form, singularity-free)
    p   = 1 - (1-tau)^(M-1)

by damped iteration with a bisection fallback. Residual below 1e-13 or a
diagnostic std::runtime_error naming M and the residual.
*/
DcfFixedPoint solve_fixed_point(const DcfParams& params, int m_vehicles);

/**
Closed-form expected number of backoff slots E[N] for success under
conditional failure probability p, minimum window w_min and cap stage
m_stage. The (1-2p) ratio is computed as its geometric-sum value, so the
p = 1/2 point is exact. Throws std::domain_error for p outside [0, 1).
*/
double expected_slots(double p, int w_min, int m_stage);

/// The two printed parts of E[N]; their sum equals expected_slots().
double expected_slots_short_chains(double p, int w_min, int m_stage);
double expected_slots_long_chains(double p, int w_min, int m_stage);

/**
Saturation metrics of a system of m_vehicles contending stations, plus the
per-allocation delay chain. All per-i quantities assume every station
transmits sub-tasks of airtime E[P]/i.
*/
struct DcfMetrics {
    DcfParams params;
    int m_vehicles = 1;
    double tau = 0.0;             // per-slot transmission probability
    double p_coll = 0.0;          // conditional collision probability
    double p_idle = 0.0;          // slot-status probabilities; sum to 1
    double p_succ = 0.0;
    double p_col = 0.0;
    double expected_slots = 0.0;  // E[N]

    /// Duration of a successful exchange, H + E[P]/i + SIFS + 2*delta + ACK + DIFS.
    double success_time_us(int i_rus) const;
    /// Duration of a collision, H + E[P]/i + SIFS + delta + ACKtimeout.
    double collision_time_us(int i_rus) const;
    /// Mean slot duration T_slot(i).
    double slot_time_us(int i_rus) const;
    /// Mean delay of one sub-task, E[D_i] = E[N] * T_slot(i).
    double subtask_delay_us(int i_rus) const;
    /// Whole-task transmission delay D_t(i) = i * E[D_i].
    double task_delay_us(int i_rus) const;
    /// Saturated per-vehicle task completion rate 1/D_t(i), per second.
    double task_arrival_rate(int i_rus) const;
};

/// Runs the fixed point and assembles the metrics for M contending vehicles.
DcfMetrics analyze_dcf(const DcfParams& params, int m_vehicles);

}  // namespace vfc
