#include "vfc/solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>

namespace vfc {

SolverParams solver_params_for(const TransitionTable& table) {
    const SystemConfig& c = table.config;
    SolverParams p;
    p.alpha = c.alpha;
    p.epsilon_user = c.epsilon_user;
    p.y_rate = c.k_max * table.rates.max_task_rate +
               static_cast<double>(c.k_max) * c.n_max * c.mu_t + c.lambda_f + c.mu_f;
    p.gamma_hat = p.y_rate / (p.y_rate + c.alpha);
    for (size_t si = 0; si < table.rows.size(); ++si)
        for (const ActionRow& row : table.rows[si])
            if (row.sigma > p.y_rate)
                throw std::logic_error("solver_params_for: sigma " +
                                       std::to_string(row.sigma) + " exceeds y at " +
                                       to_string(table.states[si]));
    return p;
}

NormalizedModel normalize(const TransitionTable& table, const SolverParams& params) {
    NormalizedModel model;
    model.live_states = static_cast<int>(table.states.size());
    model.y_rate = params.y_rate;
    model.gamma_hat = params.gamma_hat;
    model.rows.resize(table.states.size());
    for (size_t si = 0; si < table.rows.size(); ++si) {
        for (const ActionRow& row : table.rows[si]) {
            if (row.sigma > params.y_rate)
                throw std::invalid_argument(
                    "normalize: y " + std::to_string(params.y_rate) + " < sigma " +
                    std::to_string(row.sigma) + " at " + to_string(table.states[si]) +
                    " a=" + to_string(row.action));
            NormalizedRow nrow;
            nrow.action = row.action;
            nrow.reward =
                row.reward * (params.alpha + row.sigma) / (params.alpha + params.y_rate);
            const double scale = row.sigma / params.y_rate;
            nrow.successors.reserve(row.successors.size() + 1);
            for (const Transition& t : row.successors)
                nrow.successors.push_back({t.successor, t.probability * scale});
            // The original chain never self-loops, so the full 1 - sigma/y
            // stays on the diagonal.
            nrow.successors.push_back({static_cast<int>(si), 1.0 - scale});
            model.rows[si].push_back(std::move(nrow));
        }
    }
    return model;
}

namespace {

double row_value(const NormalizedRow& row, const std::vector<double>& values,
                 double gamma_hat) {
    double expectation = 0.0;
    for (const Transition& t : row.successors)
        expectation += t.probability * values[t.successor];
    return row.reward + gamma_hat * expectation;
}

// Contiguous copy of the model for the sweep loops; the iteration counts
// under the y-rate discount make pointer-chasing the dominant cost.
struct FlatModel {
    std::vector<long> state_begin;  // row range per state, size n + 1
    std::vector<double> reward;     // per row
    std::vector<long> succ_begin;   // per row, size rows + 1
    std::vector<int> succ_index;
    std::vector<double> succ_prob;
};

FlatModel flatten(const NormalizedModel& model, const Policy* policy) {
    FlatModel flat;
    flat.state_begin.push_back(0);
    flat.succ_begin.push_back(0);
    for (size_t s = 0; s < model.rows.size(); ++s) {
        for (const NormalizedRow& row : model.rows[s]) {
            if (policy && !(row.action == policy->actions[s])) continue;
            flat.reward.push_back(row.reward);
            for (const Transition& t : row.successors) {
                flat.succ_index.push_back(t.successor);
                flat.succ_prob.push_back(t.probability);
            }
            flat.succ_begin.push_back(static_cast<long>(flat.succ_index.size()));
        }
        if (policy && flat.reward.size() != s + 1)
            throw std::invalid_argument("evaluate_policy: infeasible action at state " +
                                        std::to_string(s));
        flat.state_begin.push_back(static_cast<long>(flat.reward.size()));
    }
    return flat;
}

Solution sweep_to_convergence(const NormalizedModel& model, const SolverParams& params,
                              const Policy* policy) {
    const int n = model.live_states;
    const FlatModel flat = flatten(model, policy);
    std::vector<double> current(n + 1, 0.0);  // last entry: terminal, fixed 0
    std::vector<double> next(n + 1, 0.0);
    const double threshold = params.stop_threshold();
    const double gamma = model.gamma_hat;

    Solution solution;
    solution.deltas.reserve(4096);
    for (long k = 0; k < params.max_iterations; ++k) {
        double delta = 0.0;
        for (int s = 0; s < n; ++s) {
            double best = -std::numeric_limits<double>::infinity();
            for (long r = flat.state_begin[s]; r < flat.state_begin[s + 1]; ++r) {
                double expectation = 0.0;
                for (long t = flat.succ_begin[r]; t < flat.succ_begin[r + 1]; ++t)
                    expectation += flat.succ_prob[t] * current[flat.succ_index[t]];
                best = std::max(best, flat.reward[r] + gamma * expectation);
            }
            next[s] = best;
            delta = std::max(delta, std::abs(next[s] - current[s]));
        }
        current.swap(next);
        solution.deltas.push_back(delta);
        solution.iterations = k + 1;
        solution.final_delta = delta;
        if (delta < threshold) {
            solution.values = std::move(current);
            return solution;
        }
    }
    throw std::runtime_error("value iteration did not converge in " +
                             std::to_string(params.max_iterations) +
                             " iterations, last delta " +
                             std::to_string(solution.final_delta));
}

}  // namespace

Solution value_iteration(const NormalizedModel& model, const SolverParams& params) {
    return sweep_to_convergence(model, params, nullptr);
}

Policy extract_policy(const NormalizedModel& model, const std::vector<double>& values) {
    Policy policy;
    policy.tag = Policy::Tag::Optimal;
    policy.actions.reserve(model.rows.size());
    for (const auto& rows : model.rows) {
        Action best_action = rows.front().action;
        double best = row_value(rows.front(), values, model.gamma_hat);
        for (size_t i = 1; i < rows.size(); ++i) {
            const double v = row_value(rows[i], values, model.gamma_hat);
            if (v > best) {  // ties keep the smallest action index
                best = v;
                best_action = rows[i].action;
            }
        }
        policy.actions.push_back(best_action);
    }
    return policy;
}

Policy greedy_policy(const TransitionTable& table) {
    Policy policy;
    policy.tag = Policy::Tag::Greedy;
    policy.actions.reserve(table.states.size());
    for (const SystemState& s : table.states) {
        if (s.event.kind() != Event::Kind::TaskArrival) {
            policy.actions.push_back(Action::none());
            continue;
        }
        const int avail = std::min(table.config.n_max, s.available_rus());
        policy.actions.push_back(avail >= 1 ? Action::allocate(avail) : Action::drop());
    }
    return policy;
}

Solution evaluate_policy(const NormalizedModel& model, const Policy& policy,
                         const SolverParams& params) {
    if (policy.actions.size() != model.rows.size())
        throw std::invalid_argument("evaluate_policy: policy size mismatch");
    return sweep_to_convergence(model, params, &policy);
}

void write_solver_report(const TransitionTable& table, const NormalizedModel& model,
                         const Solution& solution, const Policy& policy,
                         std::ostream& out) {
    char buf[64];
    auto fmt = [&](double v) {
        std::snprintf(buf, sizeof(buf), "%.12g", v);
        return std::string(buf);
    };
    out << "iterations " << solution.iterations << '\n'
        << "final_delta " << fmt(solution.final_delta) << '\n'
        << "gamma_hat " << fmt(model.gamma_hat) << '\n'
        << "y " << fmt(model.y_rate) << '\n';
    for (size_t si = 0; si < table.states.size(); ++si)
        out << to_string(table.states[si]) << ' ' << to_string(policy.actions[si])
            << ' ' << fmt(solution.values[si]) << '\n';
}

}  // namespace vfc
