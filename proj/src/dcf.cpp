#include "vfc/dcf.hpp"

#include <cmath>
#include <string>

namespace vfc {

void DcfParams::validate() const {
    if (w_min < 1) throw std::invalid_argument("DcfParams: w_min must be >= 1");
    if (m_stage < 0) throw std::invalid_argument("DcfParams: m_stage must be >= 0");
    if (slot_us <= 0 || sifs_us <= 0 || difs_us <= 0 || header_us <= 0 ||
        ack_us <= 0 || propagation_us <= 0)
        throw std::invalid_argument("DcfParams: all durations must be > 0");
    if (payload_bytes <= 0)
        throw std::invalid_argument("DcfParams: payload_bytes must be > 0");
    if (data_rate_mbps <= 0)
        throw std::invalid_argument("DcfParams: data_rate_mbps must be > 0");
}

namespace {

// tau as a function of p. The textbook ratio has a removable 0/0 at
// p = 1/2; dividing (1-(2p)^m) by (1-2p) analytically leaves a plain
// geometric sum, exact for every p in [0,1].
double tau_of_p(double p, int w, int m) {
    double geom = 0.0;  // sum_{k=0}^{m-1} (2p)^k
    double term = 1.0;
    for (int k = 0; k < m; ++k) {
        geom += term;
        term *= 2.0 * p;
    }
    return 2.0 / ((w + 1) + p * w * geom);
}

double p_of_tau(double tau, int m_vehicles) {
    return 1.0 - std::pow(1.0 - tau, m_vehicles - 1);
}

double residual(double tau, double p, int w, int m, int m_vehicles) {
    return std::abs(tau - tau_of_p(p, w, m)) + std::abs(p - p_of_tau(tau, m_vehicles));
}

}  // namespace

DcfFixedPoint solve_fixed_point(const DcfParams& params, int m_vehicles) {
    params.validate();
    if (m_vehicles < 1)
        throw std::invalid_argument("solve_fixed_point: m_vehicles must be >= 1");

    const int w = params.w_min;
    const int m = params.m_stage;
    constexpr double kTol = 1e-13;
    constexpr int kMaxIters = 100000;
    constexpr double kDamping = 0.5;

    double tau = tau_of_p(0.0, w, m);
    for (int it = 0; it < kMaxIters; ++it) {
        const double p = p_of_tau(tau, m_vehicles);
        const double next = (1.0 - kDamping) * tau + kDamping * tau_of_p(p, w, m);
        tau = next;
        if (residual(tau, p_of_tau(tau, m_vehicles), w, m, m_vehicles) < kTol)
            return {tau, p_of_tau(tau, m_vehicles)};
    }

    // Fallback: bisection on h(tau) = tau - tau_of_p(p_of_tau(tau)).
    // h is increasing through the root since tau_of_p decreases in p.
    double lo = 1e-15, hi = 1.0 - 1e-15;
    auto h = [&](double t) { return t - tau_of_p(p_of_tau(t, m_vehicles), w, m); };
    if (h(lo) > 0.0 || h(hi) < 0.0) {
        throw std::runtime_error(
            "solve_fixed_point: no bracket for M=" + std::to_string(m_vehicles));
    }
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        (h(mid) >= 0.0 ? hi : lo) = mid;
    }
    tau = 0.5 * (lo + hi);
    const double p = p_of_tau(tau, m_vehicles);
    const double res = residual(tau, p, w, m, m_vehicles);
    if (res >= kTol) {
        throw std::runtime_error("solve_fixed_point: M=" + std::to_string(m_vehicles) +
                                 " did not converge, residual=" + std::to_string(res));
    }
    return {tau, p};
}

double expected_slots_short_chains(double p, int w_min, int m_stage) {
    if (p < 0.0 || p >= 1.0)
        throw std::domain_error("expected_slots: p must be in [0, 1)");
    const double w = w_min;
    const int m = m_stage;
    const double pm1 = std::pow(p, m + 1);
    double geom = 0.0, term = 1.0;  // sum_{k=0}^{m} (2p)^k == (1-(2p)^{m+1})/(1-2p)
    for (int k = 0; k <= m; ++k) {
        geom += term;
        term *= 2.0 * p;
    }
    return (1.0 - (m + 2) * pm1 + (m + 1) * pm1 * p) / (2.0 * (1.0 - p)) +
           (1.0 - p) * geom * w - (1.0 - pm1) * w / 2.0;
}

double expected_slots_long_chains(double p, int w_min, int m_stage) {
    if (p < 0.0 || p >= 1.0)
        throw std::domain_error("expected_slots: p must be in [0, 1)");
    const double w = w_min;
    const int m = m_stage;
    const double pm1 = std::pow(p, m + 1);
    const double cap = std::pow(2.0, m) * w;
    return pm1 / 2.0 *
           ((m + 1) + (std::pow(2.0, m + 1) - 1.0) * w + (2.0 - p) * (cap + 1.0) / (1.0 - p));
}

double expected_slots(double p, int w_min, int m_stage) {
    return expected_slots_short_chains(p, w_min, m_stage) +
           expected_slots_long_chains(p, w_min, m_stage);
}

double DcfMetrics::success_time_us(int i_rus) const {
    return params.header_us + params.payload_time_us(i_rus) + params.sifs_us +
           params.propagation_us + params.ack_us + params.propagation_us + params.difs_us;
}

double DcfMetrics::collision_time_us(int i_rus) const {
    return params.header_us + params.payload_time_us(i_rus) + params.sifs_us +
           params.propagation_us + params.ack_timeout_us();
}

double DcfMetrics::slot_time_us(int i_rus) const {
    if (i_rus < 1) throw std::invalid_argument("slot_time_us: i_rus must be >= 1");
    return p_idle * params.slot_us + p_col * collision_time_us(i_rus) +
           p_succ * success_time_us(i_rus);
}

double DcfMetrics::subtask_delay_us(int i_rus) const {
    return expected_slots * slot_time_us(i_rus);
}

double DcfMetrics::task_delay_us(int i_rus) const {
    return i_rus * subtask_delay_us(i_rus);
}

double DcfMetrics::task_arrival_rate(int i_rus) const {
    return 1e6 / task_delay_us(i_rus);
}

DcfMetrics analyze_dcf(const DcfParams& params, int m_vehicles) {
    const auto [tau, p] = solve_fixed_point(params, m_vehicles);
    DcfMetrics m;
    m.params = params;
    m.m_vehicles = m_vehicles;
    m.tau = tau;
    m.p_coll = p;
    m.p_idle = std::pow(1.0 - tau, m_vehicles);
    m.p_succ = m_vehicles * tau * std::pow(1.0 - tau, m_vehicles - 1);
    m.p_col = 1.0 - m.p_idle - m.p_succ;
    m.expected_slots = expected_slots(p, params.w_min, params.m_stage);
    return m;
}

}  // namespace vfc
