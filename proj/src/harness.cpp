#include "dlnlab/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "dlnlab/io_util.hpp"

namespace dlnlab {

namespace {

using nlohmann::json;

const char* kValidKeys =
    "seed, K, n, d, L, xi, eta, tol, max_iters, log_every, activation, init, out, jobs";

std::uint64_t parse_u64(const std::string& v, const std::string& where) {
    std::size_t pos = 0;
    std::uint64_t out = 0;
    try {
        out = std::stoull(v, &pos);
    } catch (const std::exception&) {
        throw std::invalid_argument(where + ": expected an unsigned integer, got '" + v + "'");
    }
    if (pos != v.size())
        throw std::invalid_argument(where + ": expected an unsigned integer, got '" + v + "'");
    return out;
}

double parse_f64(const std::string& v, const std::string& where) {
    std::size_t pos = 0;
    double out = 0.0;
    try {
        out = std::stod(v, &pos);
    } catch (const std::exception&) {
        throw std::invalid_argument(where + ": expected a number, got '" + v + "'");
    }
    if (pos != v.size())
        throw std::invalid_argument(where + ": expected a number, got '" + v + "'");
    return out;
}

template <typename Fn>
auto stage(const char* name, Fn&& fn) {
    try {
        return fn();
    } catch (const std::exception& e) {
        throw std::runtime_error(std::string("pipeline stage '") + name + "': " + e.what());
    }
}

json checks_json(const std::vector<SpectrumCheck>& checks) {
    json arr = json::array();
    for (const SpectrumCheck& c : checks) {
        json o;
        o["name"] = c.name;
        o["lhs"] = c.lhs;
        o["rhs"] = c.rhs;
        o["pass"] = c.pass;
        o["margin"] = c.margin;
        arr.push_back(o);
    }
    return arr;
}

std::string activation_name(Activation a) {
    return a == Activation::ReLU ? "relu" : "linear";
}

std::string init_name(InitMode m) {
    return m == InitMode::UniformKaiming ? "uniform_kaiming" : "orthogonal";
}

}  // namespace

void apply_config_entry(ExperimentConfig& cfg, const std::string& key,
                        const std::string& value, const std::string& where) {
    if (key == "seed") cfg.seed = parse_u64(value, where);
    else if (key == "K") cfg.K = parse_u64(value, where);
    else if (key == "n") cfg.n = parse_u64(value, where);
    else if (key == "d") cfg.d = parse_u64(value, where);
    else if (key == "L") cfg.L = parse_u64(value, where);
    else if (key == "xi") cfg.xi = parse_f64(value, where);
    else if (key == "eta") cfg.eta = parse_f64(value, where);
    else if (key == "tol") cfg.tol = parse_f64(value, where);
    else if (key == "max_iters") cfg.max_iters = parse_u64(value, where);
    else if (key == "log_every") cfg.log_every = parse_u64(value, where);
    else if (key == "jobs") cfg.jobs = parse_u64(value, where);
    else if (key == "out") cfg.out_dir = value;
    else if (key == "activation") {
        if (value == "linear") cfg.activation = Activation::Linear;
        else if (value == "relu") cfg.activation = Activation::ReLU;
        else throw std::invalid_argument(where + ": activation must be 'linear' or 'relu'");
    } else if (key == "init") {
        if (value == "orthogonal") cfg.init = InitMode::Orthogonal;
        else if (value == "uniform_kaiming") cfg.init = InitMode::UniformKaiming;
        else
            throw std::invalid_argument(where +
                                        ": init must be 'orthogonal' or 'uniform_kaiming'");
    } else {
        throw std::invalid_argument(where + ": unknown key '" + key +
                                    "' (valid keys: " + kValidKeys + ")");
    }
}

ExperimentConfig parse_config_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("parse_config_file: cannot open " + path);
    ExperimentConfig cfg;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos) continue;
        const auto last = line.find_last_not_of(" \t\r");
        line = line.substr(first, last - first + 1);
        const std::size_t eq = line.find('=');
        const std::string where = path + ":" + std::to_string(lineno);
        if (eq == std::string::npos)
            throw std::invalid_argument(where + ": expected key=value, got '" + line + "'");
        auto strip = [](std::string s) {
            const auto a = s.find_first_not_of(" \t");
            const auto b = s.find_last_not_of(" \t");
            return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
        };
        apply_config_entry(cfg, strip(line.substr(0, eq)), strip(line.substr(eq + 1)), where);
    }
    return cfg;
}

std::string resolve_out_dir(const ExperimentConfig& cfg) {
    if (!cfg.out_dir.empty()) return cfg.out_dir;
    if (const char* env = std::getenv("DLNLAB_OUT"); env && *env) return env;
    return "dlnlab_out";
}

RunReport run_single_on(const ExperimentConfig& cfg, const Dataset& ds, bool write_files) {
    RunReport report;
    report.config = cfg;

    report.data_audit = stage("audit-data", [&] { return measure_theta(ds); });
    report.data_spectrum = stage("audit-data", [&] { return audit_spectrum(ds); });

    const Architecture arch(cfg.L, cfg.d, cfg.K, cfg.activation);
    const Network net0 = stage("init", [&] {
        return cfg.init == InitMode::Orthogonal ? init_orthogonal(arch, cfg.xi, cfg.seed)
                                                : init_uniform_kaiming(arch, cfg.seed);
    });

    TrainConfig tc;
    tc.eta = cfg.eta;
    tc.tol = cfg.tol;
    tc.max_iters = cfg.max_iters;
    tc.log_every = cfg.log_every;
    const TrainResult tr = stage("train", [&] { return train(net0, ds, tc); });
    report.iters = tr.iters;
    report.final_loss = tr.final_loss;
    report.converged = tr.converged;

    report.layers = stage("layer-sweep", [&] { return layer_sweep(tr.net, ds); });

    report.theory_applicable = cfg.activation == Activation::Linear && cfg.d > 2 * cfg.K;
    if (report.theory_applicable) {
        stage("theory-audit", [&] {
            report.assumptions.params = extract_params(tr.net, ds);
            const ResidualMetrics rm = residual_metrics(tr.net, ds);
            report.assumptions.min_norm_residual = rm.min_norm;
            report.assumptions.avg_balancedness = rm.avg_bal;
            report.assumptions.sv_variance = rm.sv_var;
            report.assumptions.hypothesis =
                hypothesis_check(report.assumptions.params, cfg.n, cfg.K, cfg.L);
            report.assumptions.spectra = audit_spectra(tr.net, ds);
            report.assumptions.spectra_ok = true;
            for (const SpectrumCheck& c : report.assumptions.spectra)
                report.assumptions.spectra_ok = report.assumptions.spectra_ok && c.pass;
            return 0;
        });
        stage("bounds", [&] {
            const AssumptionParams& p = report.assumptions.params;
            report.bounds = compression_bounds(cfg.n, cfg.K, cfg.L, p.eps_hat);
            for (std::size_t l = 1; l < cfg.L; ++l)
                report.bounds.d_lower.push_back(discrimination_bound(
                    p.theta_hat, p.delta_hat, p.eps_hat, cfg.n, cfg.K, cfg.L, l));
            return 0;
        });
        stage("verdicts", [&] {
            bool all_contained = true;
            for (std::size_t l = 1; l < cfg.L; ++l) {
                LayerVerdict v;
                v.layer = l;
                v.ratio_measured = report.layers[l].C / report.layers[l - 1].C;
                v.ratio_lower =
                    (l == 1) ? report.bounds.ratio_lower_first : report.bounds.ratio_lower;
                v.ratio_upper =
                    (l == 1) ? report.bounds.ratio_upper_first : report.bounds.ratio_upper;
                v.contained = v.ratio_lower <= v.ratio_measured && v.ratio_measured <= v.ratio_upper;
                v.d_bound = report.bounds.d_lower[l - 1];
                v.d_measured = report.layers[l].D;
                v.d_ok = v.d_bound <= 0.0 || v.d_measured >= v.d_bound;
                all_contained = all_contained && v.contained && v.d_ok;
                report.verdicts.push_back(v);
            }
            report.verdict_status = !report.assumptions.hypothesis.ok ? "hypotheses-unmet"
                                    : all_contained                   ? "contained"
                                                                      : "violated";
            return 0;
        });
    } else {
        report.verdict_status = "not-applicable";
    }

    if (write_files) {
        const std::string out = resolve_out_dir(cfg);
        std::filesystem::create_directories(out);
        stage("write-outputs", [&] {
            write_metrics_csv(report.layers, out + "/metrics.csv");
            write_trajectory_csv(tr, out + "/trajectory.csv");
            write_bounds_csv(report, out + "/bounds.csv");
            write_report_json(report, out + "/report.json");
            return 0;
        });
    }
    return report;
}

RunReport run_single(const ExperimentConfig& cfg) {
    const Dataset ds = stage("generate", [&] { return generate(cfg.d, cfg.K, cfg.n, cfg.seed); });
    return run_single_on(cfg, ds, true);
}

void write_bounds_csv(const RunReport& report, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("write_bounds_csv: cannot open " + path);
    os << "layer,ratio_measured,ratio_lower,ratio_upper,ratio_contained,d_bound,d_measured,d_ok\n";
    for (const LayerVerdict& v : report.verdicts) {
        os << v.layer << ',' << fmt_double(v.ratio_measured) << ',' << fmt_double(v.ratio_lower)
           << ',' << fmt_double(v.ratio_upper) << ',' << (v.contained ? 1 : 0) << ','
           << fmt_double(v.d_bound) << ',' << fmt_double(v.d_measured) << ',' << (v.d_ok ? 1 : 0)
           << "\n";
    }
    if (!os) throw std::runtime_error("write_bounds_csv: write failed for " + path);
}

void write_report_json(const RunReport& report, const std::string& path) {
    json j;
    const ExperimentConfig& c = report.config;
    j["config"] = {{"seed", c.seed},        {"K", c.K},
                   {"n", c.n},              {"d", c.d},
                   {"L", c.L},              {"xi", c.xi},
                   {"eta", c.eta},          {"tol", c.tol},
                   {"max_iters", c.max_iters}, {"log_every", c.log_every},
                   {"activation", activation_name(c.activation)},
                   {"init", init_name(c.init)}};
    j["data_audit"] = {{"theta_hat", report.data_audit.theta_hat},
                       {"max_norm_dev", report.data_audit.max_norm_dev},
                       {"max_inner", report.data_audit.max_inner},
                       {"compliant", report.data_audit.compliant}};
    j["data_spectrum"] = checks_json(report.data_spectrum);
    j["train"] = {{"iters", report.iters},
                  {"final_loss", report.final_loss},
                  {"converged", report.converged}};
    json layers = json::array();
    for (const LayerMetrics& m : report.layers)
        layers.push_back({{"layer", m.layer},
                          {"tr_sigma_w", m.tr_sigma_w},
                          {"tr_sigma_b", m.tr_sigma_b},
                          {"C", m.C},
                          {"D", m.D},
                          {"num_rank", m.num_rank}});
    j["layers"] = layers;
    j["verdict_status"] = report.verdict_status;
    if (report.theory_applicable) {
        const AssumptionReport& a = report.assumptions;
        json conds = json::array();
        for (const ConditionMargin& cm : a.hypothesis.conditions)
            conds.push_back({{"name", cm.name}, {"value", cm.value}, {"limit", cm.limit},
                             {"ok", cm.ok}});
        j["assumptions"] = {{"delta_hat", a.params.delta_hat},
                            {"eps_hat", a.params.eps_hat},
                            {"rho_hat", a.params.rho_hat},
                            {"theta_hat", a.params.theta_hat},
                            {"interior_bal_max", a.params.interior_bal_max},
                            {"min_norm_residual", a.min_norm_residual},
                            {"avg_balancedness", a.avg_balancedness},
                            {"sv_variance", a.sv_variance},
                            {"hypothesis_ok", a.hypothesis.ok},
                            {"hypothesis_conditions", conds},
                            {"spectra_ok", a.spectra_ok}};
        j["weight_spectrum"] = checks_json(a.spectra);
        json verdicts = json::array();
        for (const LayerVerdict& v : report.verdicts)
            verdicts.push_back({{"layer", v.layer},
                                {"ratio_measured", v.ratio_measured},
                                {"ratio_lower", v.ratio_lower},
                                {"ratio_upper", v.ratio_upper},
                                {"contained", v.contained},
                                {"d_bound", v.d_bound},
                                {"d_measured", v.d_measured},
                                {"d_ok", v.d_ok}});
        j["bounds"] = {{"c1", report.bounds.c1},
                       {"c2", report.bounds.c2},
                       {"ratio_lower_first", report.bounds.ratio_lower_first},
                       {"ratio_upper_first", report.bounds.ratio_upper_first},
                       {"ratio_lower", report.bounds.ratio_lower},
                       {"ratio_upper", report.bounds.ratio_upper}};
        j["verdicts"] = verdicts;
    }
    std::ofstream os(path);
    if (!os) throw std::runtime_error("write_report_json: cannot open " + path);
    os << j.dump(2) << "\n";
    if (!os) throw std::runtime_error("write_report_json: write failed for " + path);
}

std::vector<SweepRow> run_assumption_sweep(const std::vector<std::size_t>& widths,
                                           const std::vector<std::size_t>& depths, double xi,
                                           const std::vector<std::uint64_t>& seeds,
                                           const ExperimentConfig& base,
                                           const std::string& out_dir) {
    struct Cell {
        std::size_t d, L;
    };
    std::vector<Cell> cells;
    for (std::size_t d : widths)
        for (std::size_t L : depths) cells.push_back({d, L});

    auto run_one = [&](std::size_t d, std::size_t L, std::uint64_t seed)
        -> std::optional<ResidualMetrics> {
        const Dataset ds = generate(d, base.K, base.n, seed);
        const Architecture arch(L, d, base.K, Activation::Linear);
        const Network net0 = init_orthogonal(arch, xi, seed);
        TrainConfig tc;
        tc.eta = base.eta;
        tc.tol = base.tol;
        tc.max_iters = base.max_iters;
        tc.log_every = base.log_every;
        const TrainResult tr = train(net0, ds, tc);
        if (!tr.converged) return std::nullopt;
        return residual_metrics(tr.net, ds);
    };

    std::vector<SweepRow> rows;
    const std::size_t jobs = std::max<std::size_t>(1, base.jobs);
    for (const Cell& cell : cells) {
        std::vector<std::optional<ResidualMetrics>> results(seeds.size());
        for (std::size_t begin = 0; begin < seeds.size(); begin += jobs) {
            const std::size_t end = std::min(begin + jobs, seeds.size());
            std::vector<std::future<std::optional<ResidualMetrics>>> futs;
            for (std::size_t i = begin; i < end; ++i)
                futs.push_back(std::async(std::launch::async, run_one, cell.d, cell.L, seeds[i]));
            for (std::size_t i = begin; i < end; ++i) results[i] = futs[i - begin].get();
        }
        SweepRow row;
        row.d = cell.d;
        row.L = cell.L;
        for (const auto& r : results) {
            if (!r) {
                ++row.failed;
                continue;
            }
            row.min_norm_mean += r->min_norm;
            row.avg_bal_mean += r->avg_bal;
            row.sv_var_mean += r->sv_var;
            ++row.runs;
        }
        if (row.runs > 0) {
            row.min_norm_mean /= static_cast<double>(row.runs);
            row.avg_bal_mean /= static_cast<double>(row.runs);
            row.sv_var_mean /= static_cast<double>(row.runs);
        }
        rows.push_back(row);
    }

    std::filesystem::create_directories(out_dir);
    std::ofstream os(out_dir + "/assumptions.csv");
    if (!os) throw std::runtime_error("run_assumption_sweep: cannot open " + out_dir +
                                      "/assumptions.csv");
    os << "d,L,min_norm_mean,avg_bal_mean,sv_var_mean,runs\n";
    for (const SweepRow& r : rows)
        os << r.d << ',' << r.L << ',' << fmt_double(r.min_norm_mean) << ','
           << fmt_double(r.avg_bal_mean) << ',' << fmt_double(r.sv_var_mean) << ',' << r.runs
           << "\n";
    return rows;
}

namespace {

// Minimal line-chart SVG: axes, polylines, small legend. Data is mapped into
// a fixed 640x480 canvas.
struct SvgSeries {
    std::string label;
    std::string color;
    std::string dash;  // empty for solid
    std::vector<double> xs, ys;
};

void write_svg_chart(const std::string& path, const std::string& title,
                     const std::vector<SvgSeries>& series) {
    double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
    for (const SvgSeries& s : series)
        for (std::size_t i = 0; i < s.xs.size(); ++i) {
            if (!std::isfinite(s.ys[i])) continue;
            xmin = std::min(xmin, s.xs[i]);
            xmax = std::max(xmax, s.xs[i]);
            ymin = std::min(ymin, s.ys[i]);
            ymax = std::max(ymax, s.ys[i]);
        }
    if (xmin > xmax) { xmin = 0; xmax = 1; }
    if (ymin > ymax) { ymin = 0; ymax = 1; }
    if (xmax == xmin) xmax = xmin + 1;
    if (ymax == ymin) ymax = ymin + 1;
    const double W = 640, H = 480, ml = 70, mr = 20, mt = 40, mb = 50;
    auto px = [&](double x) { return ml + (x - xmin) / (xmax - xmin) * (W - ml - mr); };
    auto py = [&](double y) { return H - mb - (y - ymin) / (ymax - ymin) * (H - mt - mb); };

    std::ofstream os(path);
    if (!os) throw std::runtime_error("write_svg_chart: cannot open " + path);
    os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
       << "\" viewBox=\"0 0 " << W << " " << H << "\">\n";
    os << "<rect width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n";
    os << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">"
       << title << "</text>\n";
    os << "<line x1=\"" << ml << "\" y1=\"" << H - mb << "\" x2=\"" << W - mr << "\" y2=\""
       << H - mb << "\" stroke=\"black\"/>\n";
    os << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\"" << H - mb
       << "\" stroke=\"black\"/>\n";
    os << "<text x=\"" << ml << "\" y=\"" << H - mb + 18 << "\" font-size=\"11\">"
       << fmt_double(xmin) << "</text>\n";
    os << "<text x=\"" << W - mr << "\" y=\"" << H - mb + 18
       << "\" text-anchor=\"end\" font-size=\"11\">" << fmt_double(xmax) << "</text>\n";
    os << "<text x=\"" << ml - 6 << "\" y=\"" << H - mb
       << "\" text-anchor=\"end\" font-size=\"11\">" << fmt_double(ymin) << "</text>\n";
    os << "<text x=\"" << ml - 6 << "\" y=\"" << mt + 4
       << "\" text-anchor=\"end\" font-size=\"11\">" << fmt_double(ymax) << "</text>\n";
    double ly = mt + 10;
    for (const SvgSeries& s : series) {
        os << "<polyline fill=\"none\" stroke=\"" << s.color << "\"";
        if (!s.dash.empty()) os << " stroke-dasharray=\"" << s.dash << "\"";
        os << " stroke-width=\"1.5\" points=\"";
        for (std::size_t i = 0; i < s.xs.size(); ++i) {
            if (!std::isfinite(s.ys[i])) continue;
            os << px(s.xs[i]) << ',' << py(s.ys[i]) << ' ';
        }
        os << "\"/>\n";
        os << "<line x1=\"" << W - 180 << "\" y1=\"" << ly << "\" x2=\"" << W - 150 << "\" y2=\""
           << ly << "\" stroke=\"" << s.color << "\"";
        if (!s.dash.empty()) os << " stroke-dasharray=\"" << s.dash << "\"";
        os << "/>\n";
        os << "<text x=\"" << W - 144 << "\" y=\"" << ly + 4 << "\" font-size=\"11\">" << s.label
           << "</text>\n";
        ly += 16;
    }
    os << "</svg>\n";
    if (!os) throw std::runtime_error("write_svg_chart: write failed for " + path);
}

}  // namespace

std::vector<std::string> run_bound_figure(const std::vector<ExperimentConfig>& cfgs,
                                          const std::string& out_dir) {
    std::filesystem::create_directories(out_dir);
    std::vector<std::string> files;
    for (const ExperimentConfig& cfg : cfgs) {
        ExperimentConfig c = cfg;
        c.out_dir = out_dir;
        const Dataset ds = generate(c.d, c.K, c.n, c.seed);
        const RunReport report = run_single_on(c, ds, false);

        std::ostringstream tagos;
        tagos << "xi" << c.xi << "_seed" << c.seed;
        const std::string tag = tagos.str();

        // Compression panel: log10 C_l and the envelope anchored at C_1.
        const std::size_t L = c.L;
        std::vector<double> lx, lc, lo, hi, dlx, dly, dbound;
        for (std::size_t l = 0; l < L; ++l) {
            lx.push_back(static_cast<double>(l));
            lc.push_back(std::log10(report.layers[l].C));
        }
        const double c1v = report.layers[1].C;
        for (std::size_t l = 1; l < L; ++l) {
            const double steps = static_cast<double>(l - 1);
            lo.push_back(std::log10(c1v) + steps * std::log10(report.bounds.ratio_lower));
            hi.push_back(std::log10(c1v) + steps * std::log10(report.bounds.ratio_upper));
        }
        const std::string ccsv = out_dir + "/compression_" + tag + ".csv";
        {
            std::ofstream os(ccsv);
            os << "layer,C,log10_C,envelope_lower,envelope_upper\n";
            for (std::size_t l = 0; l < L; ++l) {
                os << l << ',' << fmt_double(report.layers[l].C) << ',' << fmt_double(lc[l]);
                if (l >= 1)
                    os << ',' << fmt_double(std::pow(10.0, lo[l - 1])) << ','
                       << fmt_double(std::pow(10.0, hi[l - 1]));
                else
                    os << ",,";
                os << "\n";
            }
        }
        std::vector<double> lx1(lx.begin() + 1, lx.end());
        write_svg_chart(out_dir + "/compression_" + tag + ".svg",
                        "log10 C_l per layer (" + tag + ")",
                        {{"log10 C_l", "#1f77b4", "", lx, lc},
                         {"envelope lower", "#2ca02c", "6,4", lx1, lo},
                         {"envelope upper", "#ff7f0e", "6,4", lx1, hi}});

        // Discrimination panel: D_l and the explicit lower bound.
        for (std::size_t l = 0; l < L; ++l) {
            dlx.push_back(static_cast<double>(l));
            dly.push_back(report.layers[l].D);
        }
        for (std::size_t l = 1; l < L; ++l) dbound.push_back(report.bounds.d_lower[l - 1]);
        const std::string dcsv = out_dir + "/discrimination_" + tag + ".csv";
        {
            std::ofstream os(dcsv);
            os << "layer,D,bound\n";
            for (std::size_t l = 0; l < L; ++l) {
                os << l << ',' << fmt_double(dly[l]);
                if (l >= 1) os << ',' << fmt_double(dbound[l - 1]);
                else os << ',';
                os << "\n";
            }
        }
        write_svg_chart(out_dir + "/discrimination_" + tag + ".svg",
                        "D_l per layer (" + tag + ")",
                        {{"D_l", "#1f77b4", "", dlx, dly},
                         {"lower bound", "#2ca02c", "6,4",
                          std::vector<double>(dlx.begin() + 1, dlx.end()), dbound}});

        files.push_back(ccsv);
        files.push_back(out_dir + "/compression_" + tag + ".svg");
        files.push_back(dcsv);
        files.push_back(out_dir + "/discrimination_" + tag + ".svg");
    }
    return files;
}

}  // namespace dlnlab
