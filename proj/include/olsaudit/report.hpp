#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "olsaudit/data.hpp"
#include "olsaudit/types.hpp"

namespace audit {

// One bound produced by one method, or a skip marker explaining why the
// method produced nothing on this dataset.
struct ReportEntry {
    std::string method;
    bool skipped = false;
    std::string note;  // skip reason, empty otherwise
    BoundType bound_type = BoundType::Lower;
    int value = 0;
    std::vector<int> removal_set;  // populated for upper bounds and exact sets
    double runtime_ms = 0.0;
    bool verified = false;
    std::string qualifier;
};

struct AuditReport {
    int schema_version = 1;
    std::string data_label;
    std::string dataset_hash;  // FNV-1a over a canonical serialization
    int n = 0;
    int d = 0;
    std::string target_name;
    std::string response_name;
    int orientation = 1;  // -1 when responses were negated to orient the target
    std::vector<double> beta_full;  // fit of the data as loaded
    std::vector<ReportEntry> entries;
    std::optional<int> stability_lb;  // max over lower/exact bounds
    std::optional<int> stability_ub;  // min over verified upper/exact bounds
};

struct AuditOptions {
    std::vector<std::string> methods;  // empty: amip, greedy, exact-binary, spectral
    double time_limit_s = 10.0;
    double beta_box = -1.0;  // nonpositive: automatic
    int max_k = 3;           // oracle search depth
    bool parallel = false;
    std::uint64_t seed = 13;  // randomized-verification seed
    std::string data_label;
};

// Row-removal audit of a generic dataset. Orientation is applied here: the
// methods all run on data whose target coefficient starts nonnegative.
// Throws std::logic_error if the finished report violates the lower/upper
// sandwich, since that can only mean a defective bound.
AuditReport run_audit(const Dataset& ds, const AuditOptions& opts);

// Pair-removal audit of a difference-in-differences panel. Row-removal
// methods are recorded as skipped.
AuditReport run_audit_did(const DiDData& panel, const AuditOptions& opts);

std::string report_to_json(const AuditReport& report);
std::string render_table(const AuditReport& report);

std::uint64_t fnv1a_hash(const std::string& bytes);
std::string dataset_hash(const Dataset& ds);

}  // namespace audit
