// SPDX-License-Identifier: Apache-2.0
//
// Decision layer: exhaustive-search oracle for the sum-rate problem (label
// generation and the optimal baseline), exact depth-first branch-and-bound
// for the probability surrogate, the location-only greedy baseline, and the
// end-to-end inference path.
//
// Tie-breaking is lexicographic everywhere, over the per-target SPV choice
// vector (comm targets in index order, then sensing targets), so lower SPV
// rows win ties and the oracle and the surrogate solver agree exactly.
#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "thzjcs/gnn.hpp"
#include "thzjcs/hetgraph.hpp"
#include "thzjcs/jcs.hpp"

namespace thzjcs::assign {

struct SolveResult {
    jcs::Assignment assignment;
    double objective_true = 0.0;       // sum rate, bit/s
    double objective_surrogate = 0.0;  // probability-sum value, where applicable
    bool feasible = false;
    std::vector<std::string> violations;
    std::uint64_t nodes_explored = 0;
    double wall_time_s = 0.0;  // diagnostic only, never serialized
};

// Per-SPV multi-hot labels of length L+1 derived from an assignment; the
// last class marks an SPV that serves nobody.
inline std::vector<std::vector<std::uint8_t>> labels_from_assignment(const jcs::Assignment& a) {
    const std::size_t total = a.comm_count + a.sense_count;
    std::vector<std::vector<std::uint8_t>> labels(a.spv_count,
                                                  std::vector<std::uint8_t>(total + 1, 0));
    for (std::size_t k = 0; k < a.spv_count; ++k) {
        bool any = false;
        for (std::size_t m = 0; m < a.comm_count; ++m)
            if (a.alpha(k, m)) { labels[k][m] = 1; any = true; }
        for (std::size_t n = 0; n < a.sense_count; ++n)
            if (a.beta(k, n)) { labels[k][a.comm_count + n] = 1; any = true; }
        if (!any) labels[k][total] = 1;
    }
    return labels;
}

inline jcs::Assignment assignment_from_labels(
    const std::vector<std::vector<std::uint8_t>>& labels, std::size_t comm_count,
    std::size_t sense_count) {
    jcs::Assignment a(labels.size(), comm_count, sense_count);
    for (std::size_t k = 0; k < labels.size(); ++k) {
        for (std::size_t m = 0; m < comm_count; ++m) a.set_alpha(k, m, labels[k][m]);
        for (std::size_t n = 0; n < sense_count; ++n)
            a.set_beta(k, n, labels[k][comm_count + n]);
    }
    return a;
}

struct OracleResult {
    SolveResult solve;
    std::vector<std::vector<std::uint8_t>> labels;
};

namespace detail {

// Advance a base-K odometer over targets; returns false after the last one.
inline bool next_choice(std::vector<std::size_t>& c, std::size_t base) {
    for (std::size_t i = c.size(); i-- > 0;) {
        if (++c[i] < base) return true;
        c[i] = 0;
    }
    return false;
}

inline bool mode_consistent(const std::vector<std::size_t>& choices, std::size_t comm_count) {
    // An SPV picked by both a comm target and a sensing target violates
    // single-mode operation.
    std::uint64_t comm_mask = 0, sense_mask = 0;
    for (std::size_t j = 0; j < choices.size(); ++j)
        (j < comm_count ? comm_mask : sense_mask) |= 1ull << choices[j];
    return (comm_mask & sense_mask) == 0;
}

}  // namespace detail

// Full enumeration of per-target SPV choices, filtered by mode consistency
// and the sensing SINR requirement; maximizes the sum rate. If nothing is
// feasible, the flagged result carries the best mode-consistent assignment
// (or the best assignment outright when even mode consistency is
// unsatisfiable).
inline OracleResult enumerate_optimal(const jcs::EvalContext& ctx,
                                      std::uint64_t budget = 10'000'000) {
    const auto t0 = std::chrono::steady_clock::now();
    const std::size_t k_count = ctx.spv_ids.size();
    const std::size_t m_count = ctx.comm_ids.size();
    const std::size_t n_count = ctx.sense_ids.size();
    const std::size_t targets = m_count + n_count;

    double scan = 1.0;
    for (std::size_t j = 0; j < targets; ++j) scan *= static_cast<double>(k_count);
    if (scan > static_cast<double>(budget))
        throw std::runtime_error(
            "enumerate_optimal: " + std::to_string(static_cast<std::uint64_t>(scan)) +
            " candidates exceed the budget of " + std::to_string(budget) +
            "; shrink the instance or raise the budget");

    OracleResult out;
    std::optional<double> best_feasible;
    std::optional<double> best_consistent;   // mode-consistent, sensing-infeasible
    std::optional<double> best_conflicted;   // mode-conflicted fallback
    jcs::Assignment best_feasible_a, best_consistent_a, best_conflicted_a;

    std::vector<std::size_t> choices(targets, 0);
    std::uint64_t nodes = 0;
    do {
        ++nodes;
        auto a = jcs::Assignment::from_choices(k_count, m_count, n_count, choices);
        if (!detail::mode_consistent(choices, m_count, k_count)) {
            const auto report = jcs::evaluate(ctx, a, /*allow_mode_conflict=*/true);
            if (!best_conflicted || report.objective > *best_conflicted) {
                best_conflicted = report.objective;
                best_conflicted_a = a;
            }
            continue;
        }
        const auto report = jcs::evaluate(ctx, a);
        if (report.sensing_feasible) {
            if (!best_feasible || report.objective > *best_feasible) {
                best_feasible = report.objective;
                best_feasible_a = a;
            }
        } else if (!best_consistent || report.objective > *best_consistent) {
            best_consistent = report.objective;
            best_consistent_a = a;
        }
    } while (detail::next_choice(choices, k_count));

    out.solve.nodes_explored = nodes;
    if (best_feasible) {
        out.solve.feasible = true;
        out.solve.assignment = best_feasible_a;
        out.solve.objective_true = *best_feasible;
    } else if (best_consistent) {
        out.solve.feasible = false;
        out.solve.assignment = best_consistent_a;
        out.solve.objective_true = *best_consistent;
        out.solve.violations.push_back("no assignment meets the sensing SINR requirement");
    } else {
        out.solve.feasible = false;
        out.solve.assignment = best_conflicted_a;
        out.solve.objective_true = best_conflicted.value_or(0.0);
        out.solve.violations.push_back("no mode-consistent assignment exists");
    }
    out.labels = labels_from_assignment(out.solve.assignment);
    out.solve.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return out;
}

inline OracleResult enumerate_optimal(const scenario::Topology& topo, const jcs::JcsParams& params,
                                      std::uint64_t budget = 10'000'000) {
    return enumerate_optimal(jcs::EvalContext(topo, params), budget);
}

// Surrogate objective: sum over chosen links of the post-sigmoid
// probabilities, with column m of the per-SPV probability row for comm
// target m and column |M|+n for sensing target n.
struct ProbabilityMatrix {
    std::size_t spv_count = 0;
    std::size_t class_count = 0;  // L+1
    std::vector<double> p;        // row-major

    ProbabilityMatrix() = default;
    ProbabilityMatrix(std::size_t k, std::size_t classes)
        : spv_count(k), class_count(classes), p(k * classes, 0.0) {}
    double at(std::size_t k, std::size_t c) const { return p[k * class_count + c]; }
    double& at(std::size_t k, std::size_t c) { return p[k * class_count + c]; }
};

inline double surrogate_value(const ProbabilityMatrix& probs,
                              const std::vector<std::size_t>& choices, std::size_t targets) {
    double v = 0.0;
    for (std::size_t j = 0; j < targets; ++j) v += probs.at(choices[j], j);
    return v;
}

// Exact maximizer of the surrogate objective subject to single-service,
// mode-consistency, and the sensing SINR requirement. Depth-first search
// over per-target SPV choices in lexicographic order with an admissible
// bound (sum of per-target column maxima of the remaining targets); sensing
// feasibility is evaluated at leaves. If no leaf is feasible the search is
// repeated without the SINR requirement and the result flagged.
inline SolveResult solve_surrogate(const jcs::EvalContext& ctx, const ProbabilityMatrix& probs) {
    const auto t0 = std::chrono::steady_clock::now();
    const std::size_t k_count = ctx.spv_ids.size();
    const std::size_t m_count = ctx.comm_ids.size();
    const std::size_t n_count = ctx.sense_ids.size();
    const std::size_t targets = m_count + n_count;
    if (probs.spv_count != k_count || probs.class_count != targets + 1)
        throw std::invalid_argument("solve_surrogate: probability matrix shape mismatch");

    // suffix_max[j] = sum over targets j.. of the best per-target probability
    std::vector<double> suffix_max(targets + 1, 0.0);
    for (std::size_t j = targets; j-- > 0;) {
        double best = 0.0;
        for (std::size_t k = 0; k < k_count; ++k) best = std::max(best, probs.at(k, j));
        suffix_max[j] = suffix_max[j + 1] + best;
    }

    SolveResult result;
    std::vector<std::size_t> choices(targets, 0);
    std::vector<std::uint8_t> comm_used(k_count, 0), sense_used(k_count, 0);
    std::optional<double> best;
    std::vector<std::size_t> best_choices;
    std::uint64_t nodes = 0;

    auto dfs = [&](auto&& self, std::size_t depth, double value, bool check_sensing) -> void {
        ++nodes;
        if (best && value + suffix_max[depth] <= *best) return;
        if (depth == targets) {
            auto a = jcs::Assignment::from_choices(k_count, m_count, n_count, choices);
            if (check_sensing) {
                const auto report = jcs::evaluate(ctx, a);
                if (!report.sensing_feasible) return;
            }
            if (!best || value > *best) {
                best = value;
                best_choices = choices;
            }
            return;
        }
        const bool is_comm = depth < m_count;
        for (std::size_t k = 0; k < k_count; ++k) {
            if (is_comm ? sense_used[k] : comm_used[k]) continue;  // mode conflict
            choices[depth] = k;
            auto& used = is_comm ? comm_used[k] : sense_used[k];
            const std::uint8_t prev = used;
            used = 1;
            self(self, depth + 1, value + probs.at(k, depth), check_sensing);
            used = prev;
        }
        choices[depth] = 0;
    };

    dfs(dfs, 0, 0.0, /*check_sensing=*/n_count > 0);
    result.feasible = best.has_value();
    if (!best) {
        dfs(dfs, 0, 0.0, /*check_sensing=*/false);
        result.violations.push_back("no assignment meets the sensing SINR requirement");
    }
    result.nodes_explored = nodes;
    if (!best) {
        // Only possible when even mode consistency cannot be satisfied for
        // every target (e.g. a single SPV with both target kinds).
        std::vector<std::size_t> fallback(targets, 0);
        result.assignment = jcs::Assignment::from_choices(k_count, m_count, n_count, fallback);
        result.objective_surrogate = surrogate_value(probs, fallback, targets);
        result.violations.push_back("no mode-consistent assignment exists");
        const auto report = jcs::evaluate(ctx, result.assignment, /*allow_mode_conflict=*/true);
        result.objective_true = report.objective;
    } else {
        result.assignment = jcs::Assignment::from_choices(k_count, m_count, n_count, best_choices);
        result.objective_surrogate = *best;
        result.objective_true = jcs::evaluate(ctx, result.assignment,
                                              /*allow_mode_conflict=*/false).objective;
    }
    result.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return result;
}

inline SolveResult solve_surrogate(const scenario::Topology& topo, const ProbabilityMatrix& probs,
                                   const jcs::JcsParams& params) {
    return solve_surrogate(jcs::EvalContext(topo, params), probs);
}

// Location-only greedy baseline: every target ranks SPVs by interference-free
// signal; targets are processed in descending order of margin (dB gap between
// their best and second-best available SPV, forced moves first), each taking
// its strongest available SPV, which then commits to that mode. A sensing
// target with no mode-consistent SPV left takes the strongest one anyway and
// the result is flagged.
inline SolveResult baseline_location(const jcs::EvalContext& ctx) {
    const auto t0 = std::chrono::steady_clock::now();
    const std::size_t k_count = ctx.spv_ids.size();
    const std::size_t m_count = ctx.comm_ids.size();
    const std::size_t n_count = ctx.sense_ids.size();
    const std::size_t targets = m_count + n_count;

    // Interference-free signal of SPV k toward target j.
    auto signal = [&](std::size_t k, std::size_t j) {
        const int spv = ctx.spv_ids[k];
        const double p = ctx.topo->vehicles[spv].tx_power;
        if (j < m_count) {
            const int tgt = ctx.comm_ids[j];
            return p * ctx.gain_main[spv] * ctx.gain_main[tgt] /
                   (ctx.pair_absorb(spv, tgt) * ctx.pair_spread(spv, tgt));
        }
        const int tgt = ctx.sense_ids[j - m_count];
        const double f = ctx.params.chan.carrier_frequency;
        const double c = ctx.params.chan.light_speed;
        const double d = ctx.pair_dist(spv, tgt);
        const double radar_spread =
            std::pow(4.0 * kPi, 3) * f * f * std::pow(d, 4) / (ctx.params.sensing.rcs * c * c);
        double absorb = ctx.pair_absorb(spv, tgt);
        if (ctx.params.roundtrip_absorption) absorb *= absorb;
        const double g = ctx.gain_main[spv];
        return p * g * g / (radar_spread * absorb);
    };

    std::vector<std::uint8_t> comm_used(k_count, 0), sense_used(k_count, 0), assigned(targets, 0);
    std::vector<std::size_t> choice(targets, 0);
    bool forced_conflict = false;

    for (std::size_t round = 0; round < targets; ++round) {
        // Margin of each unassigned target given current commitments.
        double best_margin = -std::numeric_limits<double>::infinity();
        std::size_t pick = targets;
        for (std::size_t j = 0; j < targets; ++j) {
            if (assigned[j]) continue;
            const bool is_comm = j < m_count;
            double s1 = 0.0, s2 = 0.0;
            for (std::size_t k = 0; k < k_count; ++k) {
                if (is_comm ? sense_used[k] : comm_used[k]) continue;
                const double s = signal(k, j);
                if (s > s1) { s2 = s1; s1 = s; }
                else if (s > s2) { s2 = s; }
            }
            double margin;
            if (s1 == 0.0) margin = -std::numeric_limits<double>::infinity();  // no SPV left
            else if (s2 == 0.0) margin = std::numeric_limits<double>::infinity();  // forced move
            else margin = linear_to_db(s1 / s2);
            if (margin > best_margin) {
                best_margin = margin;
                pick = j;
            }
        }
        if (pick == targets) {
            // Remaining targets have no mode-consistent SPV; take them in
            // index order with the strongest SPV outright.
            for (std::size_t j = 0; j < targets; ++j) {
                if (assigned[j]) continue;
                pick = j;
                break;
            }
            forced_conflict = true;
        }
        const bool is_comm = pick < m_count;
        std::size_t best_k = k_count;
        double best_s = -1.0;
        for (std::size_t k = 0; k < k_count; ++k) {
            if (!forced_conflict && (is_comm ? sense_used[k] : comm_used[k])) continue;
            const double s = signal(k, pick);
            if (s > best_s) { best_s = s; best_k = k; }
        }
        choice[pick] = best_k;
        assigned[pick] = 1;
        (is_comm ? comm_used : sense_used)[best_k] = 1;
    }

    SolveResult result;
    result.assignment = jcs::Assignment::from_choices(k_count, m_count, n_count, choice);
    const auto report = jcs::evaluate(ctx, result.assignment, /*allow_mode_conflict=*/true);
    result.objective_true = report.objective;
    result.objective_surrogate = std::numeric_limits<double>::quiet_NaN();
    result.feasible = report.feasible();
    result.violations = report.violations;
    if (!report.sensing_feasible)
        result.violations.push_back("sensing SINR requirement not met");
    result.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return result;
}

inline SolveResult baseline_location(const scenario::Topology& topo, const jcs::JcsParams& params) {
    return baseline_location(jcs::EvalContext(topo, params));
}

// End-to-end inference: build the graph, sample a neighborhood per SPV,
// encode, apply the sigmoid, and hand the probability matrix to the
// surrogate solver.
inline SolveResult decide(const scenario::Topology& topo, const gnn::GnnModel& model,
                          const gnn::GnnHyperParams& hyper, std::uint64_t sample_seed,
                          const jcs::JcsParams& params, const hetgraph::BuildOptions& graph_opt) {
    const auto graph = hetgraph::build_graph(topo, params.chan, graph_opt);
    if (graph.target_count() != model.feature_dim)
        throw std::invalid_argument("decide: model trained for L=" +
                                    std::to_string(model.feature_dim) + " but topology has L=" +
                                    std::to_string(graph.target_count()));
    const auto spvs = topo.spvs();
    ProbabilityMatrix probs(spvs.size(), graph.target_count() + 1);
    for (std::size_t k = 0; k < spvs.size(); ++k) {
        Rng rng(derive_seed(sample_seed, "decide.sample", k));
        const auto nb = hetgraph::sample_neighborhood(graph, spvs[k], hyper.sample_first,
                                                      hyper.sample_second, rng);
        const auto sample = gnn::make_sample(graph, nb);
        const auto y = gnn::predict_probabilities(model, sample);
        for (std::size_t c = 0; c < y.size(); ++c) probs.at(k, c) = y[c];
    }
    return solve_surrogate(jcs::EvalContext(topo, params), probs);
}

// --- JSON serialization -----------------------------------------------------

inline nlohmann::ordered_json to_json(const SolveResult& r) {
    nlohmann::ordered_json j;
    j["schema"] = "thzjcs.solve_result/1";
    j["assignment"] = jcs::to_json(r.assignment);
    j["objective_bps"] = r.objective_true;
    if (std::isfinite(r.objective_surrogate)) j["objective_surrogate"] = r.objective_surrogate;
    j["feasible"] = r.feasible;
    j["violations"] = r.violations;
    j["nodes_explored"] = r.nodes_explored;
    return j;
}

}  // namespace thzjcs::assign
