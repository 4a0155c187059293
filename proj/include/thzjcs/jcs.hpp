// SPDX-License-Identifier: Apache-2.0
//
// Joint communication-and-sensing link budget under a candidate assignment:
// interference, SINRs, rates, the sum-rate objective, and constraint checks.
//
// Boresight rules: an SPV's transmit boresight points at the target of each
// beam it radiates (one beam per assigned target); a communication target's
// receive boresight points at its serving SPV; sensing is monostatic, so the
// sensing SPV's receive boresight equals its transmit boresight. The echo of
// the victim's own sensing link arrives from the direction of the sensed
// target, so scattered interference is received through the main lobe.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "thzjcs/channel.hpp"
#include "thzjcs/scenario.hpp"

namespace thzjcs::jcs {

struct JcsParams {
    channel::ChannelParams chan;
    scenario::SensingParams sensing;
    // Eq-literal sensing absorption applies e^{phi d} once over the echo
    // path; enabling this switch charges both legs (e^{2 phi d}).
    bool roundtrip_absorption = false;
};

// Binary service matrices alpha (|K| x |M|) and beta (|K| x |N|).
struct Assignment {
    std::size_t spv_count = 0;
    std::size_t comm_count = 0;
    std::size_t sense_count = 0;
    std::vector<std::uint8_t> alpha_bits;  // row-major K x M
    std::vector<std::uint8_t> beta_bits;   // row-major K x N

    Assignment() = default;
    Assignment(std::size_t k, std::size_t m, std::size_t n)
        : spv_count(k), comm_count(m), sense_count(n),
          alpha_bits(k * m, 0), beta_bits(k * n, 0) {}

    std::uint8_t alpha(std::size_t k, std::size_t m) const { return alpha_bits[k * comm_count + m]; }
    std::uint8_t beta(std::size_t k, std::size_t n) const { return beta_bits[k * sense_count + n]; }
    void set_alpha(std::size_t k, std::size_t m, std::uint8_t v) { alpha_bits[k * comm_count + m] = v; }
    void set_beta(std::size_t k, std::size_t n, std::uint8_t v) { beta_bits[k * sense_count + n] = v; }

    // Build from a per-target SPV choice vector, comm targets first.
    static Assignment from_choices(std::size_t k_count, std::size_t m_count, std::size_t n_count,
                                   const std::vector<std::size_t>& choices) {
        Assignment a(k_count, m_count, n_count);
        for (std::size_t m = 0; m < m_count; ++m) a.set_alpha(choices[m], m, 1);
        for (std::size_t n = 0; n < n_count; ++n) a.set_beta(choices[m_count + n], n, 1);
        return a;
    }

    bool comm_active(std::size_t k) const {
        for (std::size_t m = 0; m < comm_count; ++m)
            if (alpha(k, m)) return true;
        return false;
    }
    bool sense_active(std::size_t k) const {
        for (std::size_t n = 0; n < sense_count; ++n)
            if (beta(k, n)) return true;
        return false;
    }

    // Violated structural constraints: per-target single service for alpha
    // and beta, and per-SPV mode consistency.
    std::vector<std::string> structural_violations() const {
        std::vector<std::string> out;
        for (std::size_t m = 0; m < comm_count; ++m) {
            std::size_t sum = 0;
            for (std::size_t k = 0; k < spv_count; ++k) sum += alpha(k, m);
            if (sum != 1)
                out.push_back("comm target " + std::to_string(m) + " has " +
                              std::to_string(sum) + " servers (single-service violated)");
        }
        for (std::size_t n = 0; n < sense_count; ++n) {
            std::size_t sum = 0;
            for (std::size_t k = 0; k < spv_count; ++k) sum += beta(k, n);
            if (sum != 1)
                out.push_back("sense target " + std::to_string(n) + " has " +
                              std::to_string(sum) + " servers (single-service violated)");
        }
        for (std::size_t k = 0; k < spv_count; ++k)
            if (comm_active(k) && sense_active(k))
                out.push_back("spv " + std::to_string(k) + " active in both modes");
        return out;
    }
};

struct ValidationError : std::runtime_error {
    std::vector<std::string> violations;
    explicit ValidationError(std::vector<std::string> v)
        : std::runtime_error("invalid assignment: " + join(v)), violations(std::move(v)) {}
    static std::string join(const std::vector<std::string>& v) {
        std::string s;
        for (const auto& x : v) { if (!s.empty()) s += "; "; s += x; }
        return s;
    }
};

struct CommLinkReport {
    std::size_t spv = 0;        // row index into the SPV list
    std::size_t target = 0;     // column index into the comm target list
    double signal = 0.0;        // W
    double interference = 0.0;  // W
    double noise = 0.0;         // W
    double sinr = 0.0;          // linear
    double rate = 0.0;          // bit/s
};

struct SenseLinkReport {
    std::size_t spv = 0;
    std::size_t target = 0;  // index into the sensing target list
    double signal = 0.0;
    double interference = 0.0;
    double noise = 0.0;
    double sinr = 0.0;
    bool meets_requirement = false;
};

struct LinkReport {
    std::vector<CommLinkReport> comm_links;
    std::vector<SenseLinkReport> sense_links;
    double objective = 0.0;  // sum of comm rates, bit/s
    bool sensing_feasible = true;
    std::vector<std::string> violations;  // structural violations, if tolerated
    bool feasible() const { return sensing_feasible && violations.empty(); }
};

// Precomputed pairwise losses and lobe classifications for one topology.
// Evaluating many assignments against one topology reuses this.
struct EvalContext {
    const scenario::Topology* topo = nullptr;
    JcsParams params;
    std::size_t v_count = 0;
    std::vector<int> spv_ids, comm_ids, sense_ids;
    std::vector<double> dist, spread, absorb, tau;  // v_count^2, by vehicle pair
    std::vector<std::uint8_t> main_lobe;            // v_count^3: [tx][bore][probe]
    std::vector<double> gain_main, gain_side;       // per vehicle

    EvalContext(const scenario::Topology& t, const JcsParams& p) : topo(&t), params(p) {
        params.chan.validate();
        params.sensing.validate();
        v_count = t.vehicles.size();
        spv_ids = t.spvs();
        comm_ids = t.comm_targets();
        sense_ids = t.sense_targets();
        dist.assign(v_count * v_count, 0.0);
        spread.assign(v_count * v_count, 0.0);
        absorb.assign(v_count * v_count, 0.0);
        tau.assign(v_count * v_count, 0.0);
        for (std::size_t a = 0; a < v_count; ++a) {
            for (std::size_t b = 0; b < v_count; ++b) {
                if (a == b) continue;
                const double d = distance(t.vehicles[a].position, t.vehicles[b].position);
                dist[a * v_count + b] = d;
                spread[a * v_count + b] = channel::spreading_loss(params.chan, d);
                absorb[a * v_count + b] = channel::absorption_loss(params.chan, d);
                tau[a * v_count + b] = 1.0 / absorb[a * v_count + b];
            }
        }
        gain_main.resize(v_count);
        gain_side.resize(v_count);
        for (std::size_t v = 0; v < v_count; ++v) {
            gain_main[v] = channel::mainlobe_gain(t.vehicles[v].antenna);
            gain_side[v] = channel::sidelobe_gain(t.vehicles[v].antenna);
        }
        main_lobe.assign(v_count * v_count * v_count, 0);
        for (std::size_t tx = 0; tx < v_count; ++tx)
            for (std::size_t bore = 0; bore < v_count; ++bore)
                for (std::size_t probe = 0; probe < v_count; ++probe) {
                    if (bore == tx || probe == tx) continue;
                    const auto lobe = scenario::lobe_class(
                        t.vehicles[tx], t.vehicles[bore].position, t.vehicles[probe].position);
                    main_lobe[(tx * v_count + bore) * v_count + probe] =
                        (lobe == scenario::Lobe::Main);
                }
    }

    double pair_dist(int a, int b) const { return dist[a * v_count + b]; }
    double pair_spread(int a, int b) const { return spread[a * v_count + b]; }
    double pair_absorb(int a, int b) const { return absorb[a * v_count + b]; }
    double pair_tau(int a, int b) const { return tau[a * v_count + b]; }

    // Gain of vehicle `v` toward `probe` when its boresight points at `bore`.
    double gain(int v, int bore, int probe) const {
        if (bore == probe) return gain_main[v];
        return main_lobe[(v * v_count + bore) * v_count + probe] ? gain_main[v] : gain_side[v];
    }
};

namespace detail {

// Direct-path interference plus absorption noise seen by `victim`, whose
// receive boresight points at `rx_bore`. One term per radiated beam (an SPV
// serving several targets transmits one beam per target, and an idle SPV
// radiates nothing). Beams of SPV row `exclude_row` are skipped: a receiver
// is not interfered by its own link's transmitter.
struct VictimField {
    double interference = 0.0;
    double noise = 0.0;
};

inline VictimField direct_field(const EvalContext& ctx, const Assignment& a,
                                int victim, int rx_bore, std::size_t exclude_row) {
    VictimField f;
    f.noise = ctx.params.chan.noise_floor;
    for (std::size_t i = 0; i < a.spv_count; ++i) {
        if (i == exclude_row) continue;
        const int iv = ctx.spv_ids[i];
        const double p = ctx.topo->vehicles[iv].tx_power;
        const double rx_gain = ctx.gain(victim, rx_bore, iv);
        const double spread = ctx.pair_spread(iv, victim);
        const double absorb = ctx.pair_absorb(iv, victim);
        const double tau = ctx.pair_tau(iv, victim);
        double gain_sum = 0.0;
        for (std::size_t m = 0; m < a.comm_count; ++m)
            if (a.alpha(i, m)) gain_sum += ctx.gain(iv, ctx.comm_ids[m], victim);
        for (std::size_t n = 0; n < a.sense_count; ++n)
            if (a.beta(i, n)) gain_sum += ctx.gain(iv, ctx.sense_ids[n], victim);
        f.interference += p * gain_sum * rx_gain / (absorb * spread);
        f.noise += p * gain_sum * rx_gain * (1.0 - tau) / spread;
    }
    return f;
}

}  // namespace detail

// Interference at comm target m for the active link k -> m.
inline double comm_interference(const EvalContext& ctx, const Assignment& a,
                                std::size_t k, std::size_t m) {
    if (!a.alpha(k, m)) throw std::logic_error("comm_interference: link not active");
    const int victim = ctx.comm_ids[m];
    const int server = ctx.spv_ids[k];
    return detail::direct_field(ctx, a, victim, server, k).interference;
}

// Interference at sensing SPV k for the active link k -> n: direct paths from
// every other beam plus the scattering paths bounced off the sensed target.
inline double sensing_interference(const EvalContext& ctx, const Assignment& a,
                                   std::size_t k, std::size_t n) {
    if (!a.beta(k, n)) throw std::logic_error("sensing_interference: link not active");
    const int receiver = ctx.spv_ids[k];
    const int target = ctx.sense_ids[n];
    double total = detail::direct_field(ctx, a, receiver, target, k).interference;

    const double f = ctx.params.chan.carrier_frequency;
    const double c = ctx.params.chan.light_speed;
    const double four_pi_cubed = std::pow(4.0 * kPi, 3);
    for (std::size_t i = 0; i < a.spv_count; ++i) {
        if (i == k) continue;
        const int iv = ctx.spv_ids[i];
        const double p = ctx.topo->vehicles[iv].tx_power;
        for (std::size_t np = 0; np < a.sense_count; ++np) {
            if (!a.beta(i, np)) continue;
            const int bore = ctx.sense_ids[np];
            const double tx_gain = ctx.gain(iv, bore, target);
            const double rx_gain = ctx.gain_main[receiver];  // echo arrives from the sensed target
            const double d_in = ctx.pair_dist(iv, target);
            const double d_kn = ctx.pair_dist(receiver, target);
            total += p * tx_gain * rx_gain * ctx.params.sensing.rcs * c * c /
                     (four_pi_cubed * f * f * d_in * d_in * d_kn * d_kn *
                      ctx.pair_absorb(iv, target) * ctx.pair_absorb(receiver, target));
        }
    }
    return total;
}

// Per-link SINR for the communication link k -> m; 0 when inactive.
inline double comm_sinr(const EvalContext& ctx, const Assignment& a,
                        std::size_t k, std::size_t m) {
    if (!a.alpha(k, m)) return 0.0;
    const int server = ctx.spv_ids[k];
    const int victim = ctx.comm_ids[m];
    const double signal = ctx.topo->vehicles[server].tx_power * ctx.gain_main[server] *
                          ctx.gain_main[victim] /
                          (ctx.pair_absorb(server, victim) * ctx.pair_spread(server, victim));
    const auto field = detail::direct_field(ctx, a, victim, server, k);
    return signal / (field.interference + field.noise);
}

// Monostatic sensing SINR for the link k -> n; 0 when inactive.
inline double sensing_sinr(const EvalContext& ctx, const Assignment& a,
                           std::size_t k, std::size_t n) {
    if (!a.beta(k, n)) return 0.0;
    const int receiver = ctx.spv_ids[k];
    const int target = ctx.sense_ids[n];
    const double f = ctx.params.chan.carrier_frequency;
    const double c = ctx.params.chan.light_speed;
    const double d = ctx.pair_dist(receiver, target);
    const double radar_spread =
        std::pow(4.0 * kPi, 3) * f * f * std::pow(d, 4) / (ctx.params.sensing.rcs * c * c);
    double absorb = ctx.pair_absorb(receiver, target);
    if (ctx.params.roundtrip_absorption) absorb *= absorb;
    const double gain = ctx.gain_main[receiver];
    const double signal =
        ctx.topo->vehicles[receiver].tx_power * gain * gain / (radar_spread * absorb);
    const double interference = sensing_interference(ctx, a, k, n);
    const auto field = detail::direct_field(ctx, a, receiver, target, k);
    return signal / (interference + field.noise);
}

// Full evaluation. Throws ValidationError on structural violations unless
// `allow_mode_conflict` is set, in which case mode-consistency violations are
// recorded in the report and the physics is still evaluated (single-service
// violations always throw).
inline LinkReport evaluate(const EvalContext& ctx, const Assignment& a,
                           bool allow_mode_conflict = false) {
    if (a.spv_count != ctx.spv_ids.size() || a.comm_count != ctx.comm_ids.size() ||
        a.sense_count != ctx.sense_ids.size())
        throw std::invalid_argument("evaluate: assignment shape does not match topology");
    auto violations = a.structural_violations();
    if (!violations.empty()) {
        const bool only_mode = std::all_of(violations.begin(), violations.end(),
                                           [](const std::string& s) {
                                               return s.find("both modes") != std::string::npos;
                                           });
        if (!(allow_mode_conflict && only_mode)) throw ValidationError(std::move(violations));
    }

    LinkReport report;
    report.violations = std::move(violations);
    const double bw = ctx.params.chan.bandwidth;
    for (std::size_t k = 0; k < a.spv_count; ++k) {
        for (std::size_t m = 0; m < a.comm_count; ++m) {
            if (!a.alpha(k, m)) continue;
            CommLinkReport link;
            link.spv = k;
            link.target = m;
            const int server = ctx.spv_ids[k];
            const int victim = ctx.comm_ids[m];
            link.signal = ctx.topo->vehicles[server].tx_power * ctx.gain_main[server] *
                          ctx.gain_main[victim] /
                          (ctx.pair_absorb(server, victim) * ctx.pair_spread(server, victim));
            const auto field = detail::direct_field(ctx, a, victim, server, k);
            link.interference = field.interference;
            link.noise = field.noise;
            link.sinr = link.signal / (link.interference + link.noise);
            link.rate = bw * std::log2(1.0 + link.sinr);
            report.objective += link.rate;
            report.comm_links.push_back(link);
        }
        for (std::size_t n = 0; n < a.sense_count; ++n) {
            if (!a.beta(k, n)) continue;
            SenseLinkReport link;
            link.spv = k;
            link.target = n;
            const int receiver = ctx.spv_ids[k];
            const int target = ctx.sense_ids[n];
            const double f = ctx.params.chan.carrier_frequency;
            const double c = ctx.params.chan.light_speed;
            const double d = ctx.pair_dist(receiver, target);
            const double radar_spread = std::pow(4.0 * kPi, 3) * f * f * std::pow(d, 4) /
                                        (ctx.params.sensing.rcs * c * c);
            double absorb = ctx.pair_absorb(receiver, target);
            if (ctx.params.roundtrip_absorption) absorb *= absorb;
            const double gain = ctx.gain_main[receiver];
            link.signal =
                ctx.topo->vehicles[receiver].tx_power * gain * gain / (radar_spread * absorb);
            link.interference = sensing_interference(ctx, a, k, n);
            const auto field = detail::direct_field(ctx, a, receiver, target, k);
            link.noise = field.noise;
            link.sinr = link.signal / (link.interference + link.noise);
            link.meets_requirement = link.sinr >= ctx.params.sensing.min_sensing_sinr;
            if (!link.meets_requirement) report.sensing_feasible = false;
            report.sense_links.push_back(link);
        }
    }
    return report;
}

inline LinkReport evaluate(const scenario::Topology& topo, const Assignment& a,
                           const JcsParams& params, bool allow_mode_conflict = false) {
    return evaluate(EvalContext(topo, params), a, allow_mode_conflict);
}

// --- JSON serialization -----------------------------------------------------

inline nlohmann::ordered_json to_json(const Assignment& a) {
    nlohmann::ordered_json j;
    j["spv_count"] = a.spv_count;
    j["comm_count"] = a.comm_count;
    j["sense_count"] = a.sense_count;
    auto& alpha = j["alpha"] = nlohmann::ordered_json::array();
    for (std::size_t k = 0; k < a.spv_count; ++k) {
        auto row = nlohmann::ordered_json::array();
        for (std::size_t m = 0; m < a.comm_count; ++m) row.push_back(static_cast<int>(a.alpha(k, m)));
        alpha.push_back(row);
    }
    auto& beta = j["beta"] = nlohmann::ordered_json::array();
    for (std::size_t k = 0; k < a.spv_count; ++k) {
        auto row = nlohmann::ordered_json::array();
        for (std::size_t n = 0; n < a.sense_count; ++n) row.push_back(static_cast<int>(a.beta(k, n)));
        beta.push_back(row);
    }
    return j;
}

inline Assignment assignment_from_json(const nlohmann::json& j) {
    Assignment a(j.at("spv_count").get<std::size_t>(), j.at("comm_count").get<std::size_t>(),
                 j.at("sense_count").get<std::size_t>());
    for (std::size_t k = 0; k < a.spv_count; ++k) {
        for (std::size_t m = 0; m < a.comm_count; ++m)
            a.set_alpha(k, m, j.at("alpha").at(k).at(m).get<int>() != 0);
        for (std::size_t n = 0; n < a.sense_count; ++n)
            a.set_beta(k, n, j.at("beta").at(k).at(n).get<int>() != 0);
    }
    return a;
}

inline nlohmann::ordered_json to_json(const LinkReport& r) {
    nlohmann::ordered_json j;
    j["schema"] = "thzjcs.link_report/1";
    j["objective_bps"] = r.objective;
    j["sensing_feasible"] = r.sensing_feasible;
    j["violations"] = r.violations;
    auto& cl = j["comm_links"] = nlohmann::ordered_json::array();
    for (const auto& l : r.comm_links)
        cl.push_back({{"spv", l.spv}, {"target", l.target}, {"signal_w", l.signal},
                      {"interference_w", l.interference}, {"noise_w", l.noise},
                      {"sinr", l.sinr}, {"sinr_db", linear_to_db(l.sinr)},
                      {"rate_bps", l.rate}});
    auto& sl = j["sense_links"] = nlohmann::ordered_json::array();
    for (const auto& l : r.sense_links)
        sl.push_back({{"spv", l.spv}, {"target", l.target}, {"signal_w", l.signal},
                      {"interference_w", l.interference}, {"noise_w", l.noise},
                      {"sinr", l.sinr}, {"sinr_db", linear_to_db(l.sinr)},
                      {"meets_requirement", l.meets_requirement}});
    return j;
}

}  // namespace thzjcs::jcs
