#include "mardpg/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace mardpg {

namespace {

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

constexpr const char* kHeader =
    "run_id,seed,policy_main,policy_inshop,gmv_main,gmv_inshop,gmv_total,clicks,purchases,"
    "sessions";

}  // namespace

double gmv_gap(double gmv_x, double gmv_y) {
    if (gmv_y == 0.0) {
        throw std::runtime_error("gmv_gap: undefined baseline (GMV(y) = 0)");
    }
    return (gmv_x - gmv_y) / gmv_y;
}

double gmv_gap(const MetricsRecord& x, const MetricsRecord& y) {
    return gmv_gap(x.gmv_total, y.gmv_total);
}

std::string metrics_to_csv(const std::vector<MetricsRecord>& records) {
    std::string out = std::string(kHeader) + "\n";
    for (const MetricsRecord& r : records) {
        out += r.run_id + "," + std::to_string(r.seed) + "," + r.policy_main + "," +
               r.policy_inshop + "," + fmt(r.gmv_main) + "," + fmt(r.gmv_inshop) + "," +
               fmt(r.gmv_total) + "," + std::to_string(r.clicks) + "," +
               std::to_string(r.purchases) + "," + std::to_string(r.sessions) + "\n";
    }
    return out;
}

void write_metrics_csv(const std::vector<MetricsRecord>& records, const std::string& path) {
    if (records.empty()) {
        throw std::invalid_argument("write_metrics_csv: no records");
    }
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("write_metrics_csv: cannot open " + path);
    }
    out << metrics_to_csv(records);
    if (!out) {
        throw std::runtime_error("write_metrics_csv: write failed for " + path);
    }
}

std::vector<MetricsRecord> parse_metrics_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != kHeader) {
        throw std::runtime_error("parse_metrics_csv: unexpected header");
    }
    std::vector<MetricsRecord> records;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string field;
        std::vector<std::string> fields;
        while (std::getline(ss, field, ',')) fields.push_back(field);
        if (fields.size() != 10) {
            throw std::runtime_error("parse_metrics_csv: malformed row: " + line);
        }
        MetricsRecord r;
        r.run_id = fields[0];
        r.seed = std::stoull(fields[1]);
        r.policy_main = fields[2];
        r.policy_inshop = fields[3];
        r.gmv_main = std::stod(fields[4]);
        r.gmv_inshop = std::stod(fields[5]);
        r.gmv_total = std::stod(fields[6]);
        r.clicks = std::stol(fields[7]);
        r.purchases = std::stol(fields[8]);
        r.sessions = std::stol(fields[9]);
        records.push_back(std::move(r));
    }
    return records;
}

std::vector<MetricsRecord> read_metrics_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("read_metrics_csv: cannot open " + path);
    }
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_metrics_csv(buffer.str());
}

std::string metrics_summary(const std::vector<MetricsRecord>& records) {
    if (records.empty()) {
        throw std::invalid_argument("metrics_summary: no records");
    }
    struct Accum {
        double main = 0.0, inshop = 0.0, total = 0.0;
        long clicks = 0, purchases = 0, sessions = 0, runs = 0;
    };
    std::vector<std::string> order;
    std::map<std::string, Accum> pairs;
    for (const MetricsRecord& r : records) {
        const std::string key = r.policy_main + "+" + r.policy_inshop;
        if (!pairs.count(key)) order.push_back(key);
        Accum& acc = pairs[key];
        acc.main += r.gmv_main;
        acc.inshop += r.gmv_inshop;
        acc.total += r.gmv_total;
        acc.clicks += r.clicks;
        acc.purchases += r.purchases;
        acc.sessions += r.sessions;
        acc.runs += 1;
    }

    const std::string baseline_key = "EW+EW";
    const bool have_baseline = pairs.count(baseline_key) > 0;

    std::string out = "policy_pair runs mean_gmv_main mean_gmv_inshop mean_gmv_total "
                      "gap_main gap_inshop gap_total clicks purchases sessions\n";
    for (const std::string& key : order) {
        const Accum& acc = pairs[key];
        const double inv = 1.0 / static_cast<double>(acc.runs);
        out += key + " " + std::to_string(acc.runs) + " " + fmt(acc.main * inv) + " " +
               fmt(acc.inshop * inv) + " " + fmt(acc.total * inv);
        if (have_baseline) {
            const Accum& base = pairs.at(baseline_key);
            const double binv = 1.0 / static_cast<double>(base.runs);
            out += " " + fmt(gmv_gap(acc.main * inv, base.main * binv));
            out += " " + fmt(gmv_gap(acc.inshop * inv, base.inshop * binv));
            out += " " + fmt(gmv_gap(acc.total * inv, base.total * binv));
        } else {
            out += " na na na";
        }
        out += " " + std::to_string(acc.clicks) + " " + std::to_string(acc.purchases) + " " +
               std::to_string(acc.sessions) + "\n";
    }
    return out;
}

void write_metrics_summary(const std::vector<MetricsRecord>& records, const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("write_metrics_summary: cannot open " + path);
    }
    out << metrics_summary(records);
}

}  // namespace mardpg
