#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace mardpg {

struct MetricsRecord {
    std::string run_id;
    uint64_t seed = 0;
    std::string policy_main;
    std::string policy_inshop;
    double gmv_main = 0.0;
    double gmv_inshop = 0.0;
    double gmv_total = 0.0;
    long clicks = 0;
    long purchases = 0;
    long sessions = 0;
};

// Relative GMV growth of x over y: (GMV(x) - GMV(y)) / GMV(y).
double gmv_gap(double gmv_x, double gmv_y);  // throws when GMV(y) == 0
double gmv_gap(const MetricsRecord& x, const MetricsRecord& y);

// CSV with the fixed header
//   run_id,seed,policy_main,policy_inshop,gmv_main,gmv_inshop,gmv_total,clicks,purchases,sessions
// Numbers are printed with %.17g, so a reload reproduces the records exactly
// and identical inputs give byte-identical files.
std::string metrics_to_csv(const std::vector<MetricsRecord>& records);
void write_metrics_csv(const std::vector<MetricsRecord>& records, const std::string& path);
std::vector<MetricsRecord> parse_metrics_csv(const std::string& text);
std::vector<MetricsRecord> read_metrics_csv(const std::string& path);

// Per-pair means plus gap columns against the EW+EW rows, one table row per
// policy pair. Everything here is recomputable from the CSV alone.
std::string metrics_summary(const std::vector<MetricsRecord>& records);
void write_metrics_summary(const std::vector<MetricsRecord>& records, const std::string& path);

}  // namespace mardpg
