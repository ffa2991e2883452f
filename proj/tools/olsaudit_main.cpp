#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "olsaudit/bnb.hpp"
#include "olsaudit/data.hpp"
#include "olsaudit/oracle.hpp"
#include "olsaudit/report.hpp"

namespace {

std::vector<std::string> split_methods(const std::string& csv) {
    std::vector<std::string> out;
    size_t start = 0;
    while (start <= csv.size()) {
        const size_t comma = csv.find(',', start);
        const size_t end = comma == std::string::npos ? csv.size() : comma;
        if (end > start) out.push_back(csv.substr(start, end - start));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return out;
}

void write_text_file(const std::string& path, const std::string& body) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw audit::IoError("cannot open for writing: " + path);
    f.write(body.data(), static_cast<std::streamsize>(body.size()));
    if (!f) throw audit::IoError("write failed: " + path);
}

struct CommonFlags {
    std::string data_path;
    std::string did_path;
    std::string target = "treatment";
    std::string response = "y";
    bool intercept = true;
};

void add_data_flags(CLI::App* cmd, CommonFlags& flags, bool with_did) {
    cmd->add_option("--data", flags.data_path, "CSV with predictors and a response column");
    if (with_did)
        cmd->add_option("--did", flags.did_path,
                        "difference-in-differences CSV (id,before,after,treated)");
    cmd->add_option("--target", flags.target, "audited predictor column")
        ->capture_default_str();
    cmd->add_option("--response", flags.response, "response column")->capture_default_str();
    cmd->add_flag("--intercept,!--no-intercept", flags.intercept,
                  "append an all-ones intercept column (default on)");
}

audit::Dataset load_dataset(const CommonFlags& flags) {
    if (flags.data_path.empty())
        throw std::invalid_argument("--data is required for this command");
    return audit::load_csv(flags.data_path, flags.target, flags.response, flags.intercept);
}

int cmd_audit(const CommonFlags& flags, const audit::AuditOptions& opts,
              const std::string& out_path) {
    audit::AuditReport report;
    if (!flags.did_path.empty() && !flags.data_path.empty())
        throw std::invalid_argument("--data and --did are mutually exclusive");
    if (!flags.did_path.empty()) {
        const audit::DiDData panel = audit::load_did_csv(flags.did_path);
        report = audit::run_audit_did(panel, opts);
    } else {
        const audit::Dataset ds = load_dataset(flags);
        report = audit::run_audit(ds, opts);
    }
    std::cout << audit::render_table(report);
    if (!out_path.empty()) write_text_file(out_path, audit::report_to_json(report));
    return 0;
}

int cmd_generate(const std::string& kind, int n, std::uint64_t seed,
                 const std::string& out_path) {
    audit::Dataset ds;
    if (kind == "synth2d")
        ds = audit::synth_2d(n, seed);
    else if (kind == "synth4d")
        ds = audit::synth_4d(n, seed);
    else
        throw std::invalid_argument("generate kind must be synth2d or synth4d");
    audit::write_csv(out_path, ds);
    std::cout << "wrote " << out_path << " (n=" << n << ", kind=" << kind << ")\n";
    return 0;
}

int cmd_oracle(const CommonFlags& flags, int max_k) {
    std::optional<int> k;
    if (!flags.did_path.empty()) {
        const audit::DiDData panel = audit::load_did_csv(flags.did_path);
        const audit::DiDView view =
            audit::did_view(panel.before, panel.after, panel.treated);
        k = audit::brute_force_did(view, max_k);
    } else {
        const audit::Dataset raw = load_dataset(flags);
        const auto [ds, orient] = audit::orient_dataset(raw);
        (void)orient;
        k = audit::brute_force_stability(ds, max_k);
    }
    if (k)
        std::cout << "stability " << *k << "\n";
    else
        std::cout << "no sign flip within " << max_k << " removals\n";
    return 0;
}

int cmd_export_mps(const CommonFlags& flags, const std::string& mode_name, double beta_box,
                   bool safeguard, const std::string& out_path) {
    const audit::Dataset raw = load_dataset(flags);
    const auto [ds, orientation] = audit::orient_dataset(raw);
    (void)orientation;
    audit::MiqcpMode mode;
    if (mode_name == "frac")
        mode = audit::MiqcpMode::Fractional;
    else if (mode_name == "int")
        mode = audit::MiqcpMode::Integral;
    else
        throw std::invalid_argument("--mode must be frac or int");
    double box = beta_box;
    if (box <= 0.0) {
        const audit::Vector beta = audit::ols_fit(ds.X, ds.y);
        box = 1e3 * std::max(1.0, beta.cwiseAbs().maxCoeff());
    }
    const audit::BilinearModel model = audit::build_model(ds, mode, box, safeguard);
    audit::export_mps(model, out_path);
    std::cout << "wrote " << out_path << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"olsaudit: bound how many sample removals can flip an OLS coefficient"};
    app.require_subcommand(1);

    CommonFlags audit_flags;
    std::string methods_csv, audit_out;
    double time_limit = 10.0, beta_box = -1.0;
    std::uint64_t seed = 13;
    int max_k = 3;
    bool parallel = false;
    CLI::App* c_audit = app.add_subcommand("audit", "run bounding methods and emit a report");
    add_data_flags(c_audit, audit_flags, true);
    c_audit->add_option("--methods", methods_csv,
                        "comma list: amip,greedy,exact-binary,exact-did,spectral,miqcp-frac,"
                        "miqcp-int,oracle");
    c_audit->add_option("--time-limit-s", time_limit, "branch-and-bound budget per mode")
        ->capture_default_str();
    c_audit->add_option("--beta-box", beta_box, "coefficient box half-width (auto if <= 0)")
        ->capture_default_str();
    c_audit->add_option("--seed", seed, "randomized-verification seed")->capture_default_str();
    c_audit->add_option("--max-k", max_k, "oracle search depth")->capture_default_str();
    c_audit->add_flag("--parallel", parallel, "run independent methods concurrently");
    c_audit->add_option("--out", audit_out, "write the JSON report here");

    std::string gen_kind, gen_out;
    int gen_n = 100;
    std::uint64_t gen_seed = 1;
    CLI::App* c_gen = app.add_subcommand("generate", "write a synthetic dataset CSV");
    c_gen->add_option("kind", gen_kind, "synth2d or synth4d")->required();
    c_gen->add_option("--n", gen_n, "sample count")->capture_default_str();
    c_gen->add_option("--seed", gen_seed, "generator seed")->capture_default_str();
    c_gen->add_option("--out", gen_out, "output CSV path")->required();

    CommonFlags oracle_flags;
    int oracle_max_k = 3;
    CLI::App* c_oracle = app.add_subcommand("oracle", "exhaustive stability search");
    add_data_flags(c_oracle, oracle_flags, true);
    c_oracle->add_option("--max-k", oracle_max_k, "largest removal size to try")
        ->capture_default_str();

    CommonFlags mps_flags;
    std::string mps_mode = "frac", mps_out;
    double mps_box = -1.0;
    bool mps_safeguard = false;
    CLI::App* c_mps = app.add_subcommand("export-mps", "write the bilinear program as MPS");
    add_data_flags(c_mps, mps_flags, false);
    c_mps->add_option("--mode", mps_mode, "frac or int")->capture_default_str();
    c_mps->add_option("--beta-box", mps_box, "coefficient box half-width (auto if <= 0)")
        ->capture_default_str();
    c_mps->add_flag("--safeguard", mps_safeguard, "add the |w|_1 >= 1 constraint");
    c_mps->add_option("--out", mps_out, "output MPS path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*c_audit) {
            audit::AuditOptions opts;
            opts.methods = split_methods(methods_csv);
            opts.time_limit_s = time_limit;
            opts.beta_box = beta_box;
            opts.seed = seed;
            opts.max_k = max_k;
            opts.parallel = parallel;
            opts.data_label =
                !audit_flags.did_path.empty() ? audit_flags.did_path : audit_flags.data_path;
            return cmd_audit(audit_flags, opts, audit_out);
        }
        if (*c_gen) return cmd_generate(gen_kind, gen_n, gen_seed, gen_out);
        if (*c_oracle) return cmd_oracle(oracle_flags, oracle_max_k);
        if (*c_mps) return cmd_export_mps(mps_flags, mps_mode, mps_box, mps_safeguard, mps_out);
    } catch (const audit::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const audit::MissingColumn& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const audit::IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const audit::NotBinaryTreatment& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const audit::EmptyGroup& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const audit::NotSymmetric& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const audit::SingularCovariance& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const audit::TooLarge& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    }
    return 0;
}
