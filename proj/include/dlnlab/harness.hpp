#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dlnlab/dataset.hpp"
#include "dlnlab/metrics.hpp"
#include "dlnlab/network.hpp"
#include "dlnlab/theory.hpp"
#include "dlnlab/training.hpp"

namespace dlnlab {

struct ExperimentConfig {
    std::uint64_t seed = 42;
    std::size_t K = 3;
    std::size_t n = 10;
    std::size_t d = 50;
    std::size_t L = 6;
    double xi = 0.3;
    double eta = 0.1;
    double tol = 1e-11;
    std::size_t max_iters = 10'000'000;
    std::size_t log_every = 1000;
    Activation activation = Activation::Linear;
    InitMode init = InitMode::Orthogonal;
    std::string out_dir;  // empty: DLNLAB_OUT, else "./dlnlab_out"
    std::size_t jobs = 1;
};

// Per-layer verdict: the measured compression ratio C_l / C_{l-1} against its
// envelope, and the discrimination bound at layer l.
struct LayerVerdict {
    std::size_t layer = 0;
    double ratio_measured = 0.0;
    double ratio_lower = 0.0;
    double ratio_upper = 0.0;
    bool contained = false;
    double d_bound = 0.0;
    double d_measured = 0.0;
    bool d_ok = false;  // d_measured >= d_bound or the bound is vacuous
};

struct RunReport {
    ExperimentConfig config;
    OrthogonalityAudit data_audit;
    std::vector<SpectrumCheck> data_spectrum;
    std::size_t iters = 0;
    double final_loss = 0.0;
    bool converged = false;
    std::vector<LayerMetrics> layers;
    bool theory_applicable = false;  // Linear nets only
    AssumptionReport assumptions;
    TheoryBounds bounds;
    std::vector<LayerVerdict> verdicts;
    std::string verdict_status;  // "contained" | "violated" | "hypotheses-unmet" | "not-applicable"
};

// key=value file, '#' comments, unknown keys rejected with the valid list,
// malformed lines reported with their line number.
ExperimentConfig parse_config_file(const std::string& path);

// Apply "key=value" override (same keys as the file format).
void apply_config_entry(ExperimentConfig& cfg, const std::string& key,
                        const std::string& value, const std::string& where);

std::string resolve_out_dir(const ExperimentConfig& cfg);

// generate -> audit -> init -> train -> layer sweep -> theory audit ->
// bounds -> verdicts. Writes metrics.csv, bounds.csv, report.json and
// trajectory.csv into out_dir (created if missing). Module errors are
// rethrown with the pipeline stage name prefixed.
RunReport run_single(const ExperimentConfig& cfg);

// As run_single but on a caller-provided dataset (no files written unless
// out_dir is non-empty).
RunReport run_single_on(const ExperimentConfig& cfg, const Dataset& ds, bool write_files);

// Trains every (d, L, seed) combination at the given xi and aggregates the
// trained-weight residuals per (d, L) into out_dir/assumptions.csv with
// header d,L,min_norm_mean,avg_bal_mean,sv_var_mean,runs. Non-converged runs
// are excluded from the means; their count is reported on the returned rows.
struct SweepRow {
    std::size_t d = 0, L = 0;
    double min_norm_mean = 0.0, avg_bal_mean = 0.0, sv_var_mean = 0.0;
    std::size_t runs = 0;         // converged runs entering the means
    std::size_t failed = 0;       // non-converged runs
};
std::vector<SweepRow> run_assumption_sweep(const std::vector<std::size_t>& widths,
                                           const std::vector<std::size_t>& depths, double xi,
                                           const std::vector<std::uint64_t>& seeds,
                                           const ExperimentConfig& base,
                                           const std::string& out_dir);

// Per config: a semilog compression panel (C_l with its envelope lines
// anchored at the measured C_1) and a discrimination panel (D_l with the
// explicit lower bound), each as one CSV plus one self-contained SVG.
std::vector<std::string> run_bound_figure(const std::vector<ExperimentConfig>& cfgs,
                                          const std::string& out_dir);

void write_report_json(const RunReport& report, const std::string& path);
void write_bounds_csv(const RunReport& report, const std::string& path);

}  // namespace dlnlab
