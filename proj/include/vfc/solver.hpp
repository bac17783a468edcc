#pragma once

#include "vfc/smdp.hpp"

#include <iosfwd>
#include <vector>

namespace vfc {

/**
Parameters of the uniformized value iteration: the normalization rate y
(at least every sigma in the table), the resulting discrete discount
gamma_hat = y / (y + alpha), and the stopping rule derived from the
user epsilon.
*/
struct SolverParams {
    double alpha = 0.1;
    double epsilon_user = 10.0;
    double y_rate = 0.0;
    long max_iterations = 1'000'000;
    double gamma_hat = 0.0;

    /// Sup-norm stopping threshold, epsilon * (1 - gamma) / (2 * gamma).
    double stop_threshold() const {
        return epsilon_user * (1.0 - gamma_hat) / (2.0 * gamma_hat);
    }
};

/// y = K * max lambda_t + K * N * mu_t + lambda_f + mu_f, checked against
/// every sigma in the table.
SolverParams solver_params_for(const TransitionTable& table);

/// One normalized (state, action) row: rescaled reward and a stochastic
/// successor distribution including the uniformization self-loop.
struct NormalizedRow {
    Action action;
    double reward = 0.0;  // R_hat
    std::vector<Transition> successors;
};

/**
The discrete-time model equivalent to the continuous-time table: same
value function, common discount gamma_hat, self-loop mass 1 - sigma / y
added per row. Terminal is the last index and carries value 0.
*/
struct NormalizedModel {
    int live_states = 0;  // terminal index == live_states
    double y_rate = 0.0;
    double gamma_hat = 0.0;
    std::vector<std::vector<NormalizedRow>> rows;
};

/// Throws std::invalid_argument when y < sigma(s, a) anywhere, naming the row.
NormalizedModel normalize(const TransitionTable& table, const SolverParams& params);

struct Policy {
    enum class Tag { Optimal, Greedy, Custom };
    std::vector<Action> actions;  // per live state
    Tag tag = Tag::Custom;
};

struct Solution {
    std::vector<double> values;  // live states then terminal (always 0)
    long iterations = 0;
    double final_delta = 0.0;
    std::vector<double> deltas;  // sup-norm change per iteration
};

/// Synchronous-sweep value iteration from V = 0 to the stop threshold.
/// Throws std::runtime_error when the iteration cap is hit.
Solution value_iteration(const NormalizedModel& model, const SolverParams& params);

/// Greedy action per state against a converged value function; ties break
/// to the smallest action index. Non-arrival states keep their single action.
Policy extract_policy(const NormalizedModel& model, const std::vector<double>& values);

/// Allocate as many units as possible, drop when none are free.
Policy greedy_policy(const TransitionTable& table);

/// Fixed-policy value by the same synchronous iteration and stopping rule.
Solution evaluate_policy(const NormalizedModel& model, const Policy& policy,
                         const SolverParams& params);

/// Plain-text report: iterations, final delta, gamma_hat, y, then one
/// "state action value" line per live state in canonical order.
void write_solver_report(const TransitionTable& table, const NormalizedModel& model,
                         const Solution& solution, const Policy& policy,
                         std::ostream& out);

}  // namespace vfc
