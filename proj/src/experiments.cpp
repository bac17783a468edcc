#include "vfc/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <sstream>
#include <stdexcept>

namespace vfc {

namespace fs = std::filesystem;

ExperimentKind experiment_kind_from(const std::string& name) {
    if (name == "arrival-rate") return ExperimentKind::ArrivalRate;
    if (name == "delay") return ExperimentKind::Delay;
    if (name == "policy-mix") return ExperimentKind::PolicyMix;
    if (name == "reward-compare") return ExperimentKind::RewardCompare;
    if (name == "feasibility") return ExperimentKind::Feasibility;
    if (name == "simulate") return ExperimentKind::Simulate;
    throw std::invalid_argument("unknown experiment kind '" + name + "'");
}

std::string to_string(ExperimentKind kind) {
    switch (kind) {
        case ExperimentKind::ArrivalRate: return "arrival-rate";
        case ExperimentKind::Delay: return "delay";
        case ExperimentKind::PolicyMix: return "policy-mix";
        case ExperimentKind::RewardCompare: return "reward-compare";
        case ExperimentKind::Feasibility: return "feasibility";
        case ExperimentKind::Simulate: return "simulate";
    }
    return "?";
}

void ExperimentSpec::validate(const SystemConfig& base) const {
    if (k_range.empty())
        throw std::invalid_argument("ExperimentSpec: k_range must not be empty");
    for (int k : k_range)
        if (k < base.n_max)
            throw std::invalid_argument("ExperimentSpec: every K must be >= n_max");
    if (mu_t_list.empty())
        throw std::invalid_argument("ExperimentSpec: mu_t_list must not be empty");
    if (replications < 1)
        throw std::invalid_argument("ExperimentSpec: replications must be >= 1");
    if (delay_limit_ms <= 0)
        throw std::invalid_argument("ExperimentSpec: delay_limit_ms must be > 0");
    if (feasibility_scan_max < base.n_max)
        throw std::invalid_argument("ExperimentSpec: scan ceiling below n_max");
}

namespace {

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

void write_atomically(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp);
        out << content;
    }
    fs::rename(tmp, path);
}

SystemConfig with_k(const SystemConfig& base, int k) {
    SystemConfig config = base;
    config.k_max = k;
    return config;
}

SystemState empty_arrival_state(const SystemConfig& config) {
    return SystemState{config.k_max, std::vector<int>(config.n_max, 0),
                       Event::arrival()};
}

struct SolveOutput {
    TransitionTable table;
    NormalizedModel model;
    Solution optimal;
    Policy pi_star;
};

SolveOutput solve_config(const SystemConfig& config) {
    SolveOutput out;
    out.table = build_model(config);
    const SolverParams params = solver_params_for(out.table);
    out.model = normalize(out.table, params);
    out.optimal = value_iteration(out.model, params);
    out.pi_star = extract_policy(out.model, out.optimal.values);
    return out;
}

double mean_over_arrival_states(const TransitionTable& table,
                                const std::vector<double>& values) {
    double sum = 0.0;
    long count = 0;
    for (size_t i = 0; i < table.states.size(); ++i) {
        if (table.states[i].event.kind() != Event::Kind::TaskArrival) continue;
        sum += values[i];
        ++count;
    }
    return sum / count;
}

// Runs fn over the K grid concurrently; results land in K order.
template <typename Fn>
auto over_k_grid(const std::vector<int>& k_range, Fn fn)
    -> std::vector<decltype(fn(0))> {
    std::vector<std::future<decltype(fn(0))>> futures;
    futures.reserve(k_range.size());
    for (int k : k_range)
        futures.push_back(std::async(std::launch::async, fn, k));
    std::vector<decltype(fn(0))> results;
    results.reserve(k_range.size());
    for (auto& f : futures) results.push_back(f.get());
    return results;
}

}  // namespace

FeasibilityResult feasibility_bound(const SystemConfig& base, double mu_t,
                                    double delay_limit_ms, int scan_max) {
    if (delay_limit_ms <= 0)
        throw std::invalid_argument("feasibility_bound: delay limit must be > 0");
    const double limit_s = delay_limit_ms / 1e3;
    FeasibilityResult result;
    for (int k = base.n_max; k <= scan_max; ++k) {
        const DcfMetrics metrics = analyze_dcf(base.dcf, k);
        double worst = 0.0;
        for (int i = 1; i <= base.n_max; ++i)
            worst = std::max(worst,
                             metrics.task_delay_us(i) / 1e6 + 1.0 / (i * mu_t));
        if (worst > limit_s) return result;
        result.max_k = k;
    }
    result.capped = true;
    return result;
}

std::vector<double> quasi_stationary_distribution(const TransitionTable& table,
                                                  const Policy& policy,
                                                  double tol,
                                                  long max_iterations) {
    const int n = static_cast<int>(table.states.size());
    const int terminal = table.terminal_index();

    // Local uniformization rate; the dominant eigenvector does not depend
    // on it, only the convergence speed does.
    double max_sigma = 0.0;
    for (int s = 0; s < n; ++s)
        max_sigma = std::max(max_sigma, table.row(s, policy.actions[s]).sigma);
    const double y = 1.05 * max_sigma;

    std::vector<double> x(n, 1.0 / n), next(n, 0.0);
    for (long it = 0; it < max_iterations; ++it) {
        std::fill(next.begin(), next.end(), 0.0);
        for (int s = 0; s < n; ++s) {
            const ActionRow& row = table.row(s, policy.actions[s]);
            const double scale = row.sigma / y;
            next[s] += x[s] * (1.0 - scale);
            for (const Transition& t : row.successors) {
                if (t.successor == terminal) continue;  // leaked mass renormalized
                next[t.successor] += x[s] * t.probability * scale;
            }
        }
        double total = 0.0;
        for (double v : next) total += v;
        if (total <= 0.0)
            throw std::runtime_error("quasi_stationary_distribution: mass vanished");
        for (double& v : next) v /= total;
        double change = 0.0;
        for (int s = 0; s < n; ++s) change += std::abs(next[s] - x[s]);
        x.swap(next);
        if (change < tol) return x;
    }
    throw std::runtime_error("quasi_stationary_distribution: no convergence");
}

std::vector<double> action_mix(const TransitionTable& table, const Policy& policy,
                               const std::vector<double>& state_weights) {
    std::vector<double> mix(table.config.n_max + 1, 0.0);
    double total = 0.0;
    for (size_t s = 0; s < table.states.size(); ++s) {
        if (table.states[s].event.kind() != Event::Kind::TaskArrival) continue;
        const double w = state_weights[s];
        mix[policy.actions[s].value] += w;
        total += w;
    }
    if (total <= 0.0)
        throw std::runtime_error("action_mix: no weight on arrival states");
    for (double& v : mix) v /= total;
    return mix;
}

std::vector<std::string> run(const ExperimentSpec& spec, const SystemConfig& base) {
    base.validate();
    spec.validate(base);
    fs::create_directories(spec.out_dir);
    const auto path = [&](const std::string& name) {
        return (fs::path(spec.out_dir) / name).string();
    };
    std::vector<std::string> written;

    switch (spec.kind) {
        case ExperimentKind::ArrivalRate: {
            std::ostringstream csv;
            csv << "K,i,lambda_t\n";
            for (int k : spec.k_range) {
                const DcfMetrics metrics = analyze_dcf(base.dcf, k);
                for (int i = 1; i <= base.n_max; ++i)
                    csv << k << ',' << i << ',' << fmt(metrics.task_arrival_rate(i))
                        << '\n';
            }
            written.push_back(path("arrival_rate.csv"));
            write_atomically(written.back(), csv.str());
            break;
        }
        case ExperimentKind::Delay: {
            std::ostringstream csv;
            csv << "K,i,delay_ms\n";
            for (int k : spec.k_range) {
                const DcfMetrics metrics = analyze_dcf(base.dcf, k);
                for (int i = 1; i <= base.n_max; ++i) {
                    const double delay_ms =
                        metrics.task_delay_us(i) / 1e3 + 1e3 / (i * base.mu_t);
                    csv << k << ',' << i << ',' << fmt(delay_ms) << '\n';
                }
            }
            written.push_back(path("delay.csv"));
            write_atomically(written.back(), csv.str());
            break;
        }
        case ExperimentKind::PolicyMix: {
            struct Row {
                std::vector<double> weighted, unweighted;
            };
            const auto rows = over_k_grid(spec.k_range, [&](int k) {
                const SolveOutput solved = solve_config(with_k(base, k));
                const std::vector<double> qsd =
                    quasi_stationary_distribution(solved.table, solved.pi_star);
                const std::vector<double> uniform(solved.table.states.size(), 1.0);
                return Row{action_mix(solved.table, solved.pi_star, qsd),
                           action_mix(solved.table, solved.pi_star, uniform)};
            });
            std::ostringstream weighted, unweighted;
            weighted << "K,action,probability\n";
            unweighted << "K,action,probability\n";
            for (size_t idx = 0; idx < spec.k_range.size(); ++idx)
                for (int a = 0; a <= base.n_max; ++a) {
                    weighted << spec.k_range[idx] << ',' << a << ','
                             << fmt(rows[idx].weighted[a]) << '\n';
                    unweighted << spec.k_range[idx] << ',' << a << ','
                               << fmt(rows[idx].unweighted[a]) << '\n';
                }
            written.push_back(path("policy_mix.csv"));
            write_atomically(written.back(), weighted.str());
            written.push_back(path("policy_mix_unweighted.csv"));
            write_atomically(written.back(), unweighted.str());
            break;
        }
        case ExperimentKind::RewardCompare: {
            struct Row {
                double v_opt_mean, v_greedy_mean, v_opt_s0, v_greedy_s0;
            };
            const auto rows = over_k_grid(spec.k_range, [&](int k) {
                const SystemConfig config = with_k(base, k);
                const SolveOutput solved = solve_config(config);
                const SolverParams params = solver_params_for(solved.table);
                const Solution greedy = evaluate_policy(
                    solved.model, greedy_policy(solved.table), params);
                const int s0 = solved.table.index_of(empty_arrival_state(config));
                return Row{mean_over_arrival_states(solved.table, solved.optimal.values),
                           mean_over_arrival_states(solved.table, greedy.values),
                           solved.optimal.values[s0], greedy.values[s0]};
            });
            const auto improvement = [](double opt, double greedy) {
                return 100.0 * (opt - greedy) / std::abs(greedy);
            };
            std::ostringstream mean_csv, s0_csv;
            mean_csv << "K,V_optimal,V_greedy,improvement_pct\n";
            s0_csv << "K,V_optimal,V_greedy,improvement_pct\n";
            for (size_t idx = 0; idx < spec.k_range.size(); ++idx) {
                const Row& r = rows[idx];
                mean_csv << spec.k_range[idx] << ',' << fmt(r.v_opt_mean) << ','
                         << fmt(r.v_greedy_mean) << ','
                         << fmt(improvement(r.v_opt_mean, r.v_greedy_mean)) << '\n';
                s0_csv << spec.k_range[idx] << ',' << fmt(r.v_opt_s0) << ','
                       << fmt(r.v_greedy_s0) << ','
                       << fmt(improvement(r.v_opt_s0, r.v_greedy_s0)) << '\n';
            }
            written.push_back(path("reward_compare.csv"));
            write_atomically(written.back(), mean_csv.str());
            written.push_back(path("reward_compare_s0.csv"));
            write_atomically(written.back(), s0_csv.str());
            break;
        }
        case ExperimentKind::Feasibility: {
            std::ostringstream csv;
            csv << "mu_t,max_K_meeting_100ms\n";
            for (double mu_t : spec.mu_t_list) {
                SystemConfig config = base;
                config.mu_t = mu_t;
                const FeasibilityResult r = feasibility_bound(
                    config, mu_t, spec.delay_limit_ms, spec.feasibility_scan_max);
                if (r.capped)
                    std::fprintf(stderr,
                                 "feasibility: scan ceiling %d reached without a "
                                 "violation at mu_t=%g; bound reported as the ceiling\n",
                                 spec.feasibility_scan_max, mu_t);
                csv << fmt(mu_t) << ',' << r.max_k << '\n';
            }
            written.push_back(path("feasibility.csv"));
            write_atomically(written.back(), csv.str());
            break;
        }
        case ExperimentKind::Simulate: {
            const SolveOutput solved = solve_config(base);
            SimConfig sim;
            sim.seed = spec.seed;
            sim.replications = spec.replications;
            sim.horizon_discount_floor = spec.horizon_discount_floor;
            sim.initial_state = empty_arrival_state(base);
            const SimResult result = simulate(solved.table, solved.pi_star, sim);
            std::ostringstream csv;
            write_sim_dump(result, csv);
            written.push_back(path("simulate.csv"));
            write_atomically(written.back(), csv.str());
            break;
        }
    }
    return written;
}

}  // namespace vfc
