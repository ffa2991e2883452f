#include "olsaudit/report.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <future>
#include <stdexcept>

#include <json.hpp>

#include "olsaudit/bnb.hpp"
#include "olsaudit/exact_binary.hpp"
#include "olsaudit/exact_did.hpp"
#include "olsaudit/influence.hpp"
#include "olsaudit/oracle.hpp"
#include "olsaudit/spectral.hpp"

namespace audit {

namespace {

const std::vector<std::string> kAllMethods = {"amip",     "greedy",     "exact-binary",
                                              "exact-did", "spectral",   "miqcp-frac",
                                              "miqcp-int", "oracle"};
const std::vector<std::string> kDefaultMethods = {"amip", "greedy", "exact-binary", "spectral"};

std::string fmt(const char* pattern, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, pattern, v);
    return buf;
}

ReportEntry skip_entry(const std::string& method, const std::string& note) {
    ReportEntry e;
    e.method = method;
    e.skipped = true;
    e.note = note;
    return e;
}

ReportEntry cert_entry(const StabilityCertificate& cert) {
    ReportEntry e;
    e.method = cert.method;
    e.bound_type = cert.bound_type;
    e.value = cert.value;
    e.removal_set = cert.removal_set;
    e.verified = cert.verified;
    e.qualifier = cert.qualifier;
    return e;
}

// Kept-group means decide a DiD flip: the interaction coefficient equals the
// treated minus control mean of the per-pair deltas.
bool did_removal_flips(const DiDView& view, const std::vector<int>& removal) {
    std::vector<char> removed(view.N, 0);
    for (int i : removal) removed[i] = 1;
    double st = 0.0, sc = 0.0;
    long nt = 0, nc = 0;
    for (int p = 0; p < static_cast<int>(view.idx_treated.size()); ++p) {
        if (removed[view.idx_treated[p]]) continue;
        st += view.deltas_treated(p);
        ++nt;
    }
    for (int p = 0; p < static_cast<int>(view.idx_control.size()); ++p) {
        if (removed[view.idx_control[p]]) continue;
        sc += view.deltas_control(p);
        ++nc;
    }
    if (nt == 0 || nc == 0) return false;
    return st / nt - sc / nc <= 0.0;
}

std::vector<ReportEntry> run_method(const std::string& name, const Dataset& ds,
                                    const AuditOptions& opts) {
    std::vector<ReportEntry> out;
    if (name == "amip") {
        if (auto cert = amip_upper_bound(ds))
            out.push_back(cert_entry(*cert));
        else
            out.push_back(skip_entry(name, "no sign flip found along the influence prefix"));
    } else if (name == "greedy") {
        if (auto cert = greedy_resolve_upper_bound(ds))
            out.push_back(cert_entry(*cert));
        else
            out.push_back(skip_entry(name, "no sign flip found by iterated removal"));
    } else if (name == "exact-binary") {
        try {
            const BinaryTreatmentView view = binary_view(ds);
            const BinaryAuditResult r = audit_binary(view);
            ReportEntry e;
            e.method = name;
            if (r.k) {
                e.bound_type = BoundType::Exact;
                e.value = *r.k;
                e.removal_set = r.removal;
                e.verified = removal_flips(ds, r.removal);
            } else {
                e.bound_type = BoundType::Lower;
                e.value = ds.n() - 1;
                e.verified = true;
                e.qualifier = "no sign flip achievable by any row removal";
            }
            out.push_back(std::move(e));
        } catch (const NotBinaryTreatment& ex) {
            out.push_back(skip_entry(name, ex.what()));
        } catch (const EmptyGroup& ex) {
            out.push_back(skip_entry(name, ex.what()));
        }
    } else if (name == "exact-did") {
        out.push_back(
            skip_entry(name, "requires a difference-in-differences panel (use --did)"));
    } else if (name == "spectral") {
        try {
            const SpectralCertificate cert = spectral_lower_bound(ds);
            ReportEntry e;
            e.method = name;
            e.bound_type = BoundType::Lower;
            e.value = cert.lower_bound;
            e.verified = verify_envelope_constants(ds, cert.c1, cert.c2, 200, opts.seed);
            e.qualifier = "epsilon=" + fmt("%.6g", cert.epsilon) + " c1=" +
                          fmt("%.6g", cert.c1) + " c2=" + fmt("%.6g", cert.c2);
            out.push_back(std::move(e));
        } catch (const SingularCovariance& ex) {
            out.push_back(skip_entry(name, ex.what()));
        }
    } else if (name == "miqcp-frac" || name == "miqcp-int") {
        MiqcpOptions mo;
        mo.mode = name == "miqcp-int" ? MiqcpMode::Integral : MiqcpMode::Fractional;
        mo.box = opts.beta_box;
        mo.time_limit_s = opts.time_limit_s;
        try {
            const MiqcpAudit a = miqcp_audit(ds, mo);
            out.push_back(cert_entry(a.lower));
            if (a.upper) out.push_back(cert_entry(*a.upper));
        } catch (const TooLarge& ex) {
            out.push_back(skip_entry(name, ex.what()));
        }
    } else if (name == "oracle") {
        try {
            const auto k = brute_force_stability(ds, opts.max_k);
            ReportEntry e;
            e.method = name;
            if (k) {
                e.bound_type = BoundType::Exact;
                e.value = *k;
                e.verified = true;
                e.qualifier = "exhaustive enumeration";
            } else {
                e.bound_type = BoundType::Lower;
                e.value = opts.max_k + 1;
                e.verified = true;
                e.qualifier = "no sign flip within " + std::to_string(opts.max_k) +
                              " removals";
            }
            out.push_back(std::move(e));
        } catch (const TooLarge& ex) {
            out.push_back(skip_entry(name, ex.what()));
        }
    } else {
        throw std::invalid_argument("unknown method: " + name);
    }
    return out;
}

void finish_summary(AuditReport& rep) {
    for (const ReportEntry& e : rep.entries) {
        if (e.skipped) continue;
        if (e.bound_type == BoundType::Upper &&
            static_cast<int>(e.removal_set.size()) != e.value)
            throw std::logic_error("report invariant: removal set size must equal the bound");
        if (e.bound_type == BoundType::Lower || e.bound_type == BoundType::Exact) {
            if (!rep.stability_lb || e.value > *rep.stability_lb) rep.stability_lb = e.value;
        }
        if (e.verified &&
            (e.bound_type == BoundType::Upper || e.bound_type == BoundType::Exact)) {
            if (!rep.stability_ub || e.value < *rep.stability_ub) rep.stability_ub = e.value;
        }
    }
    if (rep.stability_lb && rep.stability_ub && *rep.stability_lb > *rep.stability_ub)
        throw std::logic_error("audit sandwich violated: lower bound " +
                               std::to_string(*rep.stability_lb) + " exceeds upper bound " +
                               std::to_string(*rep.stability_ub));
}

std::vector<std::string> pick_methods(const AuditOptions& opts) {
    const std::vector<std::string>& methods =
        opts.methods.empty() ? kDefaultMethods : opts.methods;
    for (const std::string& m : methods) {
        if (std::find(kAllMethods.begin(), kAllMethods.end(), m) == kAllMethods.end())
            throw std::invalid_argument("unknown method: " + m);
    }
    return methods;
}

}  // namespace

std::uint64_t fnv1a_hash(const std::string& bytes) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string dataset_hash(const Dataset& ds) {
    std::string blob;
    blob.reserve(static_cast<size_t>(ds.n()) * (ds.d() + 1) * 20 + 32);
    char buf[64];
    for (int i = 0; i < ds.n(); ++i) {
        for (int j = 0; j < ds.d(); ++j) {
            std::snprintf(buf, sizeof buf, "%.17g,", ds.X(i, j));
            blob += buf;
        }
        std::snprintf(buf, sizeof buf, "%.17g\n", ds.y(i));
        blob += buf;
    }
    blob += "target=" + std::to_string(ds.target);
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(fnv1a_hash(blob)));
    return buf;
}

AuditReport run_audit(const Dataset& raw, const AuditOptions& opts) {
    AuditReport rep;
    rep.data_label = opts.data_label;
    rep.n = raw.n();
    rep.d = raw.d();
    rep.target_name = raw.column_names[raw.target];
    rep.response_name = raw.response_name;
    rep.dataset_hash = dataset_hash(raw);
    const Vector beta_raw = ols_fit(raw.X, raw.y);
    rep.beta_full.assign(beta_raw.data(), beta_raw.data() + beta_raw.size());

    const auto [ds, orientation] = orient_dataset(raw);
    rep.orientation = orientation;

    const std::vector<std::string> methods = pick_methods(opts);

    std::vector<std::vector<ReportEntry>> per_method(methods.size());
    const auto timed = [&](const std::string& name) {
        const auto t0 = std::chrono::steady_clock::now();
        std::vector<ReportEntry> entries = run_method(name, ds, opts);
        const double ms =
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
                .count();
        for (ReportEntry& e : entries) e.runtime_ms = ms;
        return entries;
    };
    if (opts.parallel) {
        std::vector<std::future<std::vector<ReportEntry>>> jobs;
        jobs.reserve(methods.size());
        for (const std::string& m : methods)
            jobs.push_back(std::async(std::launch::async, timed, m));
        for (size_t i = 0; i < jobs.size(); ++i) per_method[i] = jobs[i].get();
    } else {
        for (size_t i = 0; i < methods.size(); ++i) per_method[i] = timed(methods[i]);
    }
    for (auto& entries : per_method)
        for (ReportEntry& e : entries) rep.entries.push_back(std::move(e));

    finish_summary(rep);
    return rep;
}

AuditReport run_audit_did(const DiDData& panel, const AuditOptions& opts) {
    AuditReport rep;
    rep.data_label = opts.data_label;
    const int N = static_cast<int>(panel.before.size());
    rep.n = N;
    rep.d = 4;
    rep.target_name = "did-interaction";
    rep.response_name = "after-before";

    std::vector<char> is_treated(N, 0);
    for (int i : panel.treated) {
        if (i >= 0 && i < N) is_treated[i] = 1;
    }

    {
        std::string blob;
        char buf[96];
        for (int i = 0; i < N; ++i) {
            std::snprintf(buf, sizeof buf, "%.17g,%.17g,%d\n", panel.before(i), panel.after(i),
                          is_treated[i] ? 1 : 0);
            blob += buf;
        }
        std::snprintf(buf, sizeof buf, "%016llx",
                      static_cast<unsigned long long>(fnv1a_hash(blob)));
        rep.dataset_hash = buf;
    }

    const DiDView view = did_view(panel.before, panel.after, panel.treated);
    rep.orientation = view.orientation;

    // Saturated two-group two-period fit, in the column order
    // (intercept, after, treated, after*treated).
    {
        double cb = 0, ca = 0, tbm = 0, tam = 0;
        const long nt = static_cast<long>(view.idx_treated.size());
        const long nc = static_cast<long>(view.idx_control.size());
        for (int i = 0; i < N; ++i) {
            if (is_treated[i]) {
                tbm += panel.before(i);
                tam += panel.after(i);
            } else {
                cb += panel.before(i);
                ca += panel.after(i);
            }
        }
        cb /= nc;
        ca /= nc;
        tbm /= nt;
        tam /= nt;
        rep.beta_full = {cb, ca - cb, tbm - cb, (tam - tbm) - (ca - cb)};
    }

    const std::vector<std::string> methods =
        opts.methods.empty() ? std::vector<std::string>{"exact-did"} : opts.methods;
    for (const std::string& m : methods) {
        if (std::find(kAllMethods.begin(), kAllMethods.end(), m) == kAllMethods.end())
            throw std::invalid_argument("unknown method: " + m);
    }

    for (const std::string& name : methods) {
        const auto t0 = std::chrono::steady_clock::now();
        ReportEntry e;
        e.method = name;
        if (name == "exact-did") {
            const DiDAuditResult r = audit_did(view);
            if (r.k) {
                e.bound_type = BoundType::Exact;
                e.value = *r.k;
                e.removal_set = r.removal;
                e.verified = did_removal_flips(view, r.removal);
                e.qualifier = "removals are before/after pairs";
            } else {
                e.bound_type = BoundType::Lower;
                e.value = N - 1;
                e.verified = true;
                e.qualifier = "no sign flip achievable by any pair removal";
            }
        } else if (name == "oracle") {
            const auto k = brute_force_did(view, opts.max_k);
            if (k) {
                e.bound_type = BoundType::Exact;
                e.value = *k;
                e.verified = true;
                e.qualifier = "exhaustive enumeration over pairs";
            } else {
                e.bound_type = BoundType::Lower;
                e.value = opts.max_k + 1;
                e.verified = true;
                e.qualifier =
                    "no sign flip within " + std::to_string(opts.max_k) + " pair removals";
            }
        } else {
            e = skip_entry(name, "row-removal method; this audit removes before/after pairs");
        }
        e.runtime_ms =
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
                .count();
        rep.entries.push_back(std::move(e));
    }

    finish_summary(rep);
    return rep;
}

std::string report_to_json(const AuditReport& rep) {
    nlohmann::json j;
    j["schema_version"] = rep.schema_version;
    j["dataset"] = {
        {"label", rep.data_label},   {"hash", rep.dataset_hash},
        {"n", rep.n},                {"d", rep.d},
        {"target", rep.target_name}, {"response", rep.response_name},
        {"orientation", rep.orientation},
    };
    j["beta_full"] = rep.beta_full;
    nlohmann::json entries = nlohmann::json::array();
    for (const ReportEntry& e : rep.entries) {
        nlohmann::json je;
        je["method"] = e.method;
        if (e.skipped) {
            je["skipped"] = true;
            je["note"] = e.note;
        } else {
            je["bound_type"] = e.bound_type == BoundType::Lower
                                   ? "lower"
                                   : (e.bound_type == BoundType::Upper ? "upper" : "exact");
            je["value"] = e.value;
            if (!e.removal_set.empty() || e.bound_type == BoundType::Upper)
                je["removal_set"] = e.removal_set;
            je["runtime_ms"] = e.runtime_ms;
            je["verified"] = e.verified;
            if (!e.qualifier.empty()) je["qualifier"] = e.qualifier;
        }
        entries.push_back(std::move(je));
    }
    j["entries"] = std::move(entries);
    nlohmann::json summary = nlohmann::json::object();
    if (rep.stability_lb) summary["stability_lb"] = *rep.stability_lb;
    if (rep.stability_ub) summary["stability_ub"] = *rep.stability_ub;
    j["summary"] = std::move(summary);
    return j.dump(2) + "\n";
}

std::string render_table(const AuditReport& rep) {
    std::string out;
    char line[256];
    std::snprintf(line, sizeof line, "dataset   %s  (hash %s)\n",
                  rep.data_label.empty() ? "<unnamed>" : rep.data_label.c_str(),
                  rep.dataset_hash.c_str());
    out += line;
    std::snprintf(line, sizeof line, "shape     n=%d d=%d  target=%s  orientation=%+d\n", rep.n,
                  rep.d, rep.target_name.c_str(), rep.orientation);
    out += line;
    if (!rep.beta_full.empty()) {
        out += "beta_full";
        for (double b : rep.beta_full) {
            std::snprintf(line, sizeof line, " %.6g", b);
            out += line;
        }
        out += "\n";
    }
    out += "\n";
    std::snprintf(line, sizeof line, "%-14s %-7s %7s %9s %12s  %s\n", "method", "bound", "value",
                  "verified", "runtime_ms", "notes");
    out += line;
    for (const ReportEntry& e : rep.entries) {
        if (e.skipped) {
            std::snprintf(line, sizeof line, "%-14s %-7s %7s %9s %12s  %s\n", e.method.c_str(),
                          "skip", "-", "-", "-", e.note.c_str());
            out += line;
            continue;
        }
        const char* bound = e.bound_type == BoundType::Lower
                                ? "lower"
                                : (e.bound_type == BoundType::Upper ? "upper" : "exact");
        std::snprintf(line, sizeof line, "%-14s %-7s %7d %9s %12.2f  %s\n", e.method.c_str(),
                      bound, e.value, e.verified ? "yes" : "no", e.runtime_ms,
                      e.qualifier.c_str());
        out += line;
    }
    out += "\nstability range [";
    out += rep.stability_lb ? std::to_string(*rep.stability_lb) : "-";
    out += ", ";
    out += rep.stability_ub ? std::to_string(*rep.stability_ub) : "-";
    out += "]\n";
    return out;
}

}  // namespace audit
