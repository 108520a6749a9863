// dlnlab: train deep linear networks on synthetic nearly-orthonormal data,
// measure per-layer compression/discrimination, audit the trained-weight
// assumptions, and evaluate the quantitative layerwise bounds.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dlnlab/harness.hpp"
#include "dlnlab/io_util.hpp"
#include "dlnlab/svd.hpp"

namespace {

using namespace dlnlab;

struct CommonOpts {
    std::string config_path;
    std::map<std::string, std::string> overrides;  // flag key -> raw value
};

// Registers --config plus the shared experiment flags; values are kept raw
// and applied through the same parser as the config file, so flags override
// file entries with identical validation.
void add_common(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("--config", opts.config_path, "key=value config file");
    static const std::vector<std::pair<std::string, std::string>> flags = {
        {"--seed", "seed"},           {"--K", "K"},
        {"--n", "n"},                 {"--d", "d"},
        {"--L", "L"},                 {"--xi", "xi"},
        {"--eta", "eta"},             {"--tol", "tol"},
        {"--max-iters", "max_iters"}, {"--log-every", "log_every"},
        {"--activation", "activation"}, {"--init", "init"},
        {"--out", "out"},             {"--jobs", "jobs"}};
    for (const auto& [flag, key] : flags) {
        cmd->add_option_function<std::string>(
            flag,
            [&opts, key = key](const std::string& v) { opts.overrides[key] = v; },
            "overrides config key '" + key + "'");
    }
}

ExperimentConfig build_config(const CommonOpts& opts) {
    ExperimentConfig cfg;
    if (!opts.config_path.empty()) cfg = parse_config_file(opts.config_path);
    for (const auto& [key, value] : opts.overrides)
        apply_config_entry(cfg, key, value, "--" + key);
    return cfg;
}

template <typename T>
std::vector<T> parse_list(const std::string& csv, const std::string& what) {
    std::vector<T> out;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        std::istringstream is(item);
        T v;
        if (!(is >> v)) throw std::invalid_argument(what + ": bad list entry '" + item + "'");
        out.push_back(v);
    }
    if (out.empty()) throw std::invalid_argument(what + ": empty list");
    return out;
}

void print_audit(const OrthogonalityAudit& a) {
    std::printf("theta_hat=%s  max_norm_dev=%s  max_inner=%s  compliant=%s\n",
                fmt_double(a.theta_hat).c_str(), fmt_double(a.max_norm_dev).c_str(),
                fmt_double(a.max_inner).c_str(), a.compliant ? "yes" : "no");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"deep linear network compression/discrimination lab"};
    app.require_subcommand(1);

    CommonOpts opts;
    std::string data_path, net_path, out_file;
    std::string widths_csv = "50,100,200", depths_csv = "3,4,5", seeds_csv = "1,2,3,4,5,6,7,8,9,10";
    std::string xis_csv = "0.1,0.3,0.5";
    double eps_arg = 0.3, theta_arg = 0.0, delta_arg = 0.0;
    bool have_theta_delta = false;

    auto* cmd_gen = app.add_subcommand("gen-data", "generate a dataset and audit it");
    add_common(cmd_gen, opts);
    cmd_gen->add_option("--data-out", out_file, "dataset output file (binary)");

    auto* cmd_train = app.add_subcommand("train", "train a network, save checkpoint + trajectory");
    add_common(cmd_train, opts);
    cmd_train->add_option("--data", data_path, "dataset file (otherwise generated from config)");

    auto* cmd_metrics = app.add_subcommand("metrics", "layer metrics of a saved network");
    add_common(cmd_metrics, opts);
    cmd_metrics->add_option("--net", net_path, "network checkpoint")->required();
    cmd_metrics->add_option("--data", data_path, "dataset file")->required();

    auto* cmd_audit = app.add_subcommand("audit", "assumption audit of a saved network");
    add_common(cmd_audit, opts);
    cmd_audit->add_option("--net", net_path, "network checkpoint")->required();
    cmd_audit->add_option("--data", data_path, "dataset file")->required();

    auto* cmd_bounds = app.add_subcommand("bounds", "evaluate the compression-ratio envelope");
    add_common(cmd_bounds, opts);
    cmd_bounds->add_option("--eps", eps_arg, "epsilon (middle singular value level)");
    auto* topt = cmd_bounds->add_option("--theta", theta_arg, "theta for the D_l bound");
    cmd_bounds->add_option("--delta", delta_arg, "delta for the D_l bound")->needs(topt);

    auto* cmd_run = app.add_subcommand("run", "full single-run pipeline");
    add_common(cmd_run, opts);

    auto* cmd_sweep = app.add_subcommand("sweep-assumptions",
                                         "train a (d, L, seed) grid and aggregate residuals");
    add_common(cmd_sweep, opts);
    cmd_sweep->add_option("--widths", widths_csv, "comma list of widths d");
    cmd_sweep->add_option("--depths", depths_csv, "comma list of depths L");
    cmd_sweep->add_option("--seeds", seeds_csv, "comma list of seeds");

    auto* cmd_fig = app.add_subcommand("figure-bounds", "bound figures for a list of xi values");
    add_common(cmd_fig, opts);
    cmd_fig->add_option("--xis", xis_csv, "comma list of initialization scales");

    CLI11_PARSE(app, argc, argv);

    try {
        ExperimentConfig cfg = build_config(opts);

        if (cmd_gen->parsed()) {
            const Dataset ds = generate(cfg.d, cfg.K, cfg.n, cfg.seed);
            print_audit(measure_theta(ds));
            if (out_file.empty()) {
                const std::string out = resolve_out_dir(cfg);
                std::filesystem::create_directories(out);
                out_file = out + "/dataset.bin";
            }
            save_dataset(ds, out_file);
            std::printf("wrote %s (d=%zu K=%zu n=%zu)\n", out_file.c_str(), ds.d, ds.K, ds.n);
        } else if (cmd_train->parsed()) {
            const Dataset ds = data_path.empty() ? generate(cfg.d, cfg.K, cfg.n, cfg.seed)
                                                 : load_dataset(data_path);
            Architecture arch(cfg.L, ds.d, ds.K, cfg.activation);
            const Network net0 = cfg.init == InitMode::Orthogonal
                                     ? init_orthogonal(arch, cfg.xi, cfg.seed)
                                     : init_uniform_kaiming(arch, cfg.seed);
            TrainConfig tc{cfg.eta, cfg.tol, cfg.max_iters, cfg.log_every};
            const TrainResult tr = train(net0, ds, tc);
            const std::string out = resolve_out_dir(cfg);
            std::filesystem::create_directories(out);
            save_network(tr.net, out + "/network.bin");
            write_trajectory_csv(tr, out + "/trajectory.csv");
            std::printf("converged=%s iters=%zu final_loss=%s -> %s/{network.bin,trajectory.csv}\n",
                        tr.converged ? "yes" : "no", tr.iters, fmt_double(tr.final_loss).c_str(),
                        out.c_str());
        } else if (cmd_metrics->parsed()) {
            const Dataset ds = load_dataset(data_path);
            const Network net = load_network(net_path);
            const auto rows = layer_sweep(net, ds);
            const std::string out = resolve_out_dir(cfg);
            std::filesystem::create_directories(out);
            write_metrics_csv(rows, out + "/metrics.csv");
            for (const LayerMetrics& m : rows)
                std::printf("layer %zu: C=%s D=%s rank=%zu\n", m.layer, fmt_double(m.C).c_str(),
                            fmt_double(m.D).c_str(), m.num_rank);
        } else if (cmd_audit->parsed()) {
            const Dataset ds = load_dataset(data_path);
            const Network net = load_network(net_path);
            const AssumptionParams p = extract_params(net, ds);
            const ResidualMetrics rm = residual_metrics(net, ds);
            const HypothesisReport hyp = hypothesis_check(p, ds.n, ds.K, net.arch.L);
            std::printf("delta_hat=%s eps_hat=%s rho_hat=%s theta_hat=%s interior_bal_max=%s\n",
                        fmt_double(p.delta_hat).c_str(), fmt_double(p.eps_hat).c_str(),
                        fmt_double(p.rho_hat).c_str(), fmt_double(p.theta_hat).c_str(),
                        fmt_double(p.interior_bal_max).c_str());
            std::printf("min_norm=%s avg_bal=%s sv_var=%s hypothesis_ok=%s\n",
                        fmt_double(rm.min_norm).c_str(), fmt_double(rm.avg_bal).c_str(),
                        fmt_double(rm.sv_var).c_str(), hyp.ok ? "yes" : "no");
            auto checks = audit_spectrum(ds);
            const auto wchecks = audit_spectra(net, ds);
            checks.insert(checks.end(), wchecks.begin(), wchecks.end());
            const std::string out = resolve_out_dir(cfg);
            std::filesystem::create_directories(out);
            std::ofstream os(out + "/audit.json");
            os << checks_to_json(checks) << "\n";
            std::printf("wrote %s/audit.json\n", out.c_str());
        } else if (cmd_bounds->parsed()) {
            have_theta_delta = topt->count() > 0;
            TheoryBounds b = compression_bounds(cfg.n, cfg.K, cfg.L, eps_arg);
            std::printf("c1=%s c2=%s\n", fmt_double(b.c1).c_str(), fmt_double(b.c2).c_str());
            std::printf("C1/C0 in [%s, %s]\n", fmt_double(b.ratio_lower_first).c_str(),
                        fmt_double(b.ratio_upper_first).c_str());
            std::printf("C_{l+1}/C_l in [%s, %s]\n", fmt_double(b.ratio_lower).c_str(),
                        fmt_double(b.ratio_upper).c_str());
            if (have_theta_delta) {
                for (std::size_t l = 1; l < cfg.L; ++l)
                    std::printf("D_%zu >= %s\n", l,
                                fmt_double(discrimination_bound(theta_arg, delta_arg, eps_arg,
                                                                cfg.n, cfg.K, cfg.L, l))
                                    .c_str());
            }
        } else if (cmd_run->parsed()) {
            const RunReport report = run_single(cfg);
            std::printf("converged=%s iters=%zu final_loss=%s theta_hat=%s verdict=%s\n",
                        report.converged ? "yes" : "no", report.iters,
                        fmt_double(report.final_loss).c_str(),
                        fmt_double(report.data_audit.theta_hat).c_str(),
                        report.verdict_status.c_str());
            std::printf("outputs in %s: metrics.csv bounds.csv report.json trajectory.csv\n",
                        resolve_out_dir(cfg).c_str());
        } else if (cmd_sweep->parsed()) {
            const auto widths = parse_list<std::size_t>(widths_csv, "--widths");
            const auto depths = parse_list<std::size_t>(depths_csv, "--depths");
            const auto seeds = parse_list<std::uint64_t>(seeds_csv, "--seeds");
            const std::string out = resolve_out_dir(cfg);
            const auto rows = run_assumption_sweep(widths, depths, cfg.xi, seeds, cfg, out);
            for (const SweepRow& r : rows)
                std::printf("d=%zu L=%zu min_norm=%s avg_bal=%s sv_var=%s runs=%zu failed=%zu\n",
                            r.d, r.L, fmt_double(r.min_norm_mean).c_str(),
                            fmt_double(r.avg_bal_mean).c_str(), fmt_double(r.sv_var_mean).c_str(),
                            r.runs, r.failed);
            std::printf("wrote %s/assumptions.csv\n", out.c_str());
        } else if (cmd_fig->parsed()) {
            const auto xis = parse_list<double>(xis_csv, "--xis");
            std::vector<ExperimentConfig> cfgs;
            for (double xi : xis) {
                ExperimentConfig c = cfg;
                c.xi = xi;
                cfgs.push_back(c);
            }
            const std::string out = resolve_out_dir(cfg);
            const auto files = run_bound_figure(cfgs, out);
            for (const std::string& f : files) std::printf("wrote %s\n", f.c_str());
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
