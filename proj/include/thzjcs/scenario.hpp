// SPDX-License-Identifier: Apache-2.0
//
// Vehicle and topology data model, boresight/lobe geometry, line-of-sight
// blocker counting, synthetic topology generation, and GPS trace ingestion.
#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "thzjcs/channel.hpp"
#include "thzjcs/common.hpp"

namespace thzjcs::scenario {

enum class Role { ServiceProvider, CommTarget, SenseTarget };

inline const char* role_name(Role r) {
    switch (r) {
        case Role::ServiceProvider: return "spv";
        case Role::CommTarget: return "comm_target";
        case Role::SenseTarget: return "sense_target";
    }
    return "?";
}

struct Vehicle {
    int id = 0;
    Role role = Role::ServiceProvider;
    Vec2 position;
    double heading = 0.0;   // rad, [0, 2*pi)
    double tx_power = 0.0;  // W; service providers only
    channel::AntennaPattern antenna;
};

struct Region {
    double width = 100.0;   // m
    double height = 100.0;  // m
};

struct SensingParams {
    double rcs = 1.0;               // m^2, per target pair (constant by default)
    double min_sensing_sinr = 2.0;  // linear (configured in dB)

    void validate() const {
        if (!(rcs > 0)) throw std::domain_error("rcs must be > 0");
        if (!(min_sensing_sinr > 0)) throw std::domain_error("min_sensing_sinr must be > 0");
    }
};

struct Topology {
    std::vector<Vehicle> vehicles;
    Region region;

    // Index lists by role, in vehicle order. Target index space is comm
    // targets first, then sensing targets.
    std::vector<int> spvs() const { return by_role(Role::ServiceProvider); }
    std::vector<int> comm_targets() const { return by_role(Role::CommTarget); }
    std::vector<int> sense_targets() const { return by_role(Role::SenseTarget); }

    std::size_t spv_count() const { return count_role(Role::ServiceProvider); }
    std::size_t comm_count() const { return count_role(Role::CommTarget); }
    std::size_t sense_count() const { return count_role(Role::SenseTarget); }
    std::size_t target_count() const { return comm_count() + sense_count(); }

    void validate(double min_spacing = 1.0) const {
        if (spv_count() < 1) throw std::domain_error("topology needs at least one service provider");
        if (target_count() < 1) throw std::domain_error("topology needs at least one target");
        for (std::size_t i = 0; i < vehicles.size(); ++i) {
            const auto& v = vehicles[i];
            if (v.position.x < 0 || v.position.x > region.width ||
                v.position.y < 0 || v.position.y > region.height)
                throw std::domain_error("vehicle outside region");
            if (!(v.heading >= 0 && v.heading < 2 * kPi))
                throw std::domain_error("heading out of [0, 2*pi)");
            for (std::size_t j = i + 1; j < vehicles.size(); ++j)
                if (distance(v.position, vehicles[j].position) < min_spacing)
                    throw std::domain_error("vehicles closer than minimum spacing");
        }
    }

  private:
    std::vector<int> by_role(Role r) const {
        std::vector<int> out;
        for (std::size_t i = 0; i < vehicles.size(); ++i)
            if (vehicles[i].role == r) out.push_back(static_cast<int>(i));
        return out;
    }
    std::size_t count_role(Role r) const {
        std::size_t n = 0;
        for (const auto& v : vehicles) n += (v.role == r);
        return n;
    }
};

struct VehicleCounts {
    std::size_t spv = 5;
    std::size_t comm = 2;
    std::size_t sense = 2;
    std::size_t total() const { return spv + comm + sense; }
};

// Uniform placement with rejection for minimum spacing; headings uniform on
// [0, 2*pi). Deterministic for a fixed seed.
inline Topology generate_topology(std::uint64_t seed, const Region& region,
                                  const VehicleCounts& counts, double min_spacing,
                                  double tx_power_w, const channel::AntennaPattern& antenna) {
    Rng rng(seed);
    Topology topo;
    topo.region = region;
    const std::size_t n = counts.total();
    const std::size_t max_tries = 1000 * std::max<std::size_t>(n, 1);
    std::size_t tries = 0;
    while (topo.vehicles.size() < n) {
        if (++tries > max_tries)
            throw std::runtime_error("generate_topology: placement failed; region too crowded");
        Vec2 p{uniform_double(rng, 0.0, region.width), uniform_double(rng, 0.0, region.height)};
        bool ok = true;
        for (const auto& v : topo.vehicles)
            if (distance(v.position, p) < min_spacing) { ok = false; break; }
        if (!ok) continue;
        Vehicle v;
        v.id = static_cast<int>(topo.vehicles.size());
        if (topo.vehicles.size() < counts.spv) v.role = Role::ServiceProvider;
        else if (topo.vehicles.size() < counts.spv + counts.comm) v.role = Role::CommTarget;
        else v.role = Role::SenseTarget;
        v.position = p;
        v.heading = uniform_double(rng, 0.0, 2.0 * kPi);
        v.tx_power = (v.role == Role::ServiceProvider) ? tx_power_w : 0.0;
        v.antenna = antenna;
        topo.vehicles.push_back(v);
    }
    topo.validate(min_spacing);
    return topo;
}

enum class Lobe { Main, Side };

// Main iff the planar angle between (tx -> boresight_target) and (tx -> probe)
// is at most theta/2. Closed boundary, with a 1e-12 rad slack for rounding.
inline Lobe lobe_class(const Vehicle& tx, const Vec2& boresight_target, const Vec2& probe) {
    const Vec2 b = boresight_target - tx.position;
    const Vec2 q = probe - tx.position;
    if (norm(b) == 0.0) throw std::domain_error("lobe_class: boresight target at transmitter");
    if (norm(q) == 0.0) throw std::domain_error("lobe_class: probe at transmitter");
    const double ang = angle_between(b, q);
    return (ang <= tx.antenna.horizontal_beamwidth / 2.0 + 1e-12) ? Lobe::Main : Lobe::Side;
}

// Number of service providers (excluding endpoints) whose perpendicular
// distance to the segment v -> target is below blocker_radius, with the
// projection strictly inside the segment.
inline int los_blocker_count(const Topology& topo, int v_idx, int target_idx,
                             double blocker_radius) {
    if (v_idx == target_idx) throw std::domain_error("los_blocker_count: identical endpoints");
    const Vec2 a = topo.vehicles[v_idx].position;
    const Vec2 b = topo.vehicles[target_idx].position;
    const Vec2 ab = b - a;
    const double len2 = dot(ab, ab);
    int count = 0;
    for (std::size_t i = 0; i < topo.vehicles.size(); ++i) {
        if (static_cast<int>(i) == v_idx || static_cast<int>(i) == target_idx) continue;
        if (topo.vehicles[i].role != Role::ServiceProvider) continue;
        const Vec2 p = topo.vehicles[i].position;
        const double t = dot(p - a, ab) / len2;
        if (!(t > 0.0 && t < 1.0)) continue;
        const Vec2 foot = a + ab * t;
        if (distance(p, foot) < blocker_radius) ++count;
    }
    return count;
}

// --- JSON serialization -----------------------------------------------------

inline nlohmann::ordered_json to_json(const Topology& topo) {
    nlohmann::ordered_json j;
    j["schema"] = "thzjcs.topology/1";
    j["region"] = {{"width_m", topo.region.width}, {"height_m", topo.region.height}};
    auto& vs = j["vehicles"] = nlohmann::ordered_json::array();
    for (const auto& v : topo.vehicles) {
        vs.push_back({{"id", v.id},
                      {"role", role_name(v.role)},
                      {"x_m", v.position.x},
                      {"y_m", v.position.y},
                      {"heading_rad", v.heading},
                      {"tx_power_w", v.tx_power}});
    }
    return j;
}

inline Topology topology_from_json(const nlohmann::json& j,
                                   const channel::AntennaPattern& antenna) {
    Topology topo;
    topo.region.width = j.at("region").at("width_m").get<double>();
    topo.region.height = j.at("region").at("height_m").get<double>();
    for (const auto& vj : j.at("vehicles")) {
        Vehicle v;
        v.id = vj.at("id").get<int>();
        const std::string role = vj.at("role").get<std::string>();
        if (role == "spv") v.role = Role::ServiceProvider;
        else if (role == "comm_target") v.role = Role::CommTarget;
        else if (role == "sense_target") v.role = Role::SenseTarget;
        else throw std::runtime_error("unknown vehicle role: " + role);
        v.position = {vj.at("x_m").get<double>(), vj.at("y_m").get<double>()};
        v.heading = vj.at("heading_rad").get<double>();
        v.tx_power = vj.at("tx_power_w").get<double>();
        v.antenna = antenna;
        topo.vehicles.push_back(v);
    }
    return topo;
}

// --- GPS trace ingestion ----------------------------------------------------

struct GpsIngestOptions {
    Region region;
    VehicleCounts counts;
    double tx_power_w = 10.0;
    channel::AntennaPattern antenna;
    double min_spacing = 1.0;
    // Reference point for the local equirectangular projection. NaN means
    // "use the minimum latitude/longitude seen in the file".
    double ref_lat = std::numeric_limits<double>::quiet_NaN();
    double ref_lon = std::numeric_limits<double>::quiet_NaN();
    double bucket_seconds = 1.0;
};

struct GpsIngestReport {
    std::vector<Topology> topologies;
    std::size_t rows_total = 0;
    std::size_t rows_malformed = 0;
    std::size_t rows_outside_region = 0;
    std::size_t duplicate_ids = 0;
    std::size_t rows_spacing_dropped = 0;
    std::size_t buckets_incomplete = 0;
    std::vector<std::string> warnings;
};

namespace detail {

struct GpsRow {
    long long id;
    double timestamp;
    double lat;
    double lon;
};

inline bool parse_gps_row(const std::string& line, GpsRow& out) {
    std::istringstream ss(line);
    std::string field;
    double vals[3];
    if (!std::getline(ss, field, ',')) return false;
    try {
        out.id = std::stoll(field);
        for (int i = 0; i < 3; ++i) {
            if (!std::getline(ss, field, ',')) return false;
            size_t pos = 0;
            vals[i] = std::stod(field, &pos);
        }
    } catch (const std::exception&) {
        return false;
    }
    out.timestamp = vals[0];
    out.lat = vals[1];
    out.lon = vals[2];
    return std::isfinite(out.timestamp) && std::isfinite(out.lat) && std::isfinite(out.lon);
}

}  // namespace detail

// CSV with header `id,timestamp,lat,lon`. Rows are grouped into fixed-width
// timestamp buckets; lat/lon are projected to local meters; roles are
// assigned by the configured counts in record order. Rows projecting outside
// the region are dropped, duplicate ids within a bucket keep the last row,
// and rows violating minimum spacing against earlier kept rows are dropped.
// Buckets that cannot fill all role quotas are skipped.
inline GpsIngestReport ingest_gps_csv(const std::string& path, const GpsIngestOptions& opt) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("ingest_gps_csv: cannot open " + path);

    GpsIngestReport report;
    std::vector<detail::GpsRow> rows;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (first) {
            first = false;
            if (line.rfind("id", 0) == 0) continue;  // header
        }
        ++report.rows_total;
        detail::GpsRow row;
        if (!detail::parse_gps_row(line, row)) {
            ++report.rows_malformed;
            if (report.warnings.size() < 20)
                report.warnings.push_back("malformed row: " + line);
            continue;
        }
        rows.push_back(row);
    }
    if (report.rows_total > 0 && report.rows_malformed * 2 > report.rows_total)
        throw std::runtime_error("ingest_gps_csv: more than half of the rows are malformed");
    if (rows.empty()) return report;

    double ref_lat = opt.ref_lat;
    double ref_lon = opt.ref_lon;
    if (std::isnan(ref_lat) || std::isnan(ref_lon)) {
        ref_lat = rows.front().lat;
        ref_lon = rows.front().lon;
        for (const auto& r : rows) {
            ref_lat = std::min(ref_lat, r.lat);
            ref_lon = std::min(ref_lon, r.lon);
        }
    }
    const double m_per_deg_lat = 111320.0;
    const double m_per_deg_lon = 111320.0 * std::cos(deg_to_rad(ref_lat));

    // Group by bucket. Ids keep their first-appearance order within the
    // bucket (role assignment is by record order); duplicates keep the last
    // row's values.
    struct Bucket {
        std::vector<long long> order;
        std::map<long long, detail::GpsRow> by_id;
    };
    std::map<long long, Bucket> buckets;
    for (const auto& r : rows) {
        const long long key = static_cast<long long>(std::floor(r.timestamp / opt.bucket_seconds));
        auto& bucket = buckets[key];
        if (bucket.by_id.count(r.id)) {
            ++report.duplicate_ids;
            if (report.warnings.size() < 20)
                report.warnings.push_back("duplicate id in bucket, keeping last row");
        } else {
            bucket.order.push_back(r.id);
        }
        bucket.by_id[r.id] = r;
    }

    for (const auto& [key, bucket] : buckets) {
        std::vector<Vec2> positions;
        for (const long long id : bucket.order) {
            const auto& r = bucket.by_id.at(id);
            const Vec2 p{(r.lon - ref_lon) * m_per_deg_lon, (r.lat - ref_lat) * m_per_deg_lat};
            if (p.x < 0 || p.x > opt.region.width || p.y < 0 || p.y > opt.region.height) {
                ++report.rows_outside_region;
                continue;
            }
            bool ok = true;
            for (const auto& q : positions)
                if (distance(p, q) < opt.min_spacing) { ok = false; break; }
            if (!ok) { ++report.rows_spacing_dropped; continue; }
            positions.push_back(p);
            if (positions.size() == opt.counts.total()) break;
        }
        if (positions.size() < opt.counts.total()) {
            ++report.buckets_incomplete;
            continue;
        }
        Topology topo;
        topo.region = opt.region;
        for (std::size_t i = 0; i < positions.size(); ++i) {
            Vehicle v;
            v.id = static_cast<int>(i);
            if (i < opt.counts.spv) v.role = Role::ServiceProvider;
            else if (i < opt.counts.spv + opt.counts.comm) v.role = Role::CommTarget;
            else v.role = Role::SenseTarget;
            v.position = positions[i];
            v.heading = 0.0;
            v.tx_power = (v.role == Role::ServiceProvider) ? opt.tx_power_w : 0.0;
            v.antenna = opt.antenna;
            topo.vehicles.push_back(v);
        }
        report.topologies.push_back(std::move(topo));
    }
    return report;
}

}  // namespace thzjcs::scenario
