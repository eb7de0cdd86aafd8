#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "spectralseq/dataset.hpp"
#include "spectralseq/models.hpp"
#include "spectralseq/training.hpp"

namespace spectralseq {

/// Fixed physics setups the generators and benchmarks run on.
struct CaseProfile {
    std::string name;
    double x0, x1, y0, y1;
    double nu;
    double t_end;
    std::size_t n_frames;
    std::size_t t_in, t_out;
    double dt_solver; // 0: solver picks (wave)
};

CaseProfile case_profile(const std::string& name);

/// n_sims trajectories of the named case on an n x n grid. Per-sim seeds
/// are seed + sim_index, so generation order cannot change the data.
TrajectoryDataset generate_case(const std::string& case_name, std::size_t n_sims,
                                std::size_t grid_n, std::uint64_t seed);

struct BenchmarkSpec {
    std::string case_name = "wave";
    std::vector<ArchKind> archs{ArchKind::FNO2d, ArchKind::FRNN};
    std::vector<double> noise_levels{0.0, 0.05, 0.1, 0.25};
    std::size_t grid_n = 32;
    std::size_t n_train = 100;
    std::size_t n_test = 20;
    std::size_t epochs = 200;
    std::size_t batch = 10;
    std::size_t width = 16;
    std::size_t modes = 8;
    double lr = 1e-3;
    std::uint64_t seed = 2024;
    std::string data_path; // pre-generated dataset; empty -> generate
    std::string out_dir = ".";
    std::size_t parallel = 1; // benchmark cells (arch x case) run k at a time
    bool verbose = false;

    void validate() const;
};

/// Desk-scale defaults: small grid, few sims, short training; enough to
/// reproduce the qualitative noise trends on one machine.
BenchmarkSpec desk_benchmark(const std::string& case_name);
/// Full-scale settings matching the reference experiments.
BenchmarkSpec paper_benchmark(const std::string& case_name);

struct BenchmarkRow {
    std::string case_name;
    std::string arch;
    double noise = 0.0;
    double mse = 0.0;
    std::size_t params = 0;
    double train_seconds = 0.0;
};

struct BenchmarkResult {
    std::vector<BenchmarkRow> rows;
    std::string csv_path;
    std::string svg_path;
};

/// Trains each architecture once on clean data, then evaluates the rollout
/// MSE at every noise level (inputs corrupted, targets clean). Writes
/// results.csv and a log10(MSE)-vs-noise scatter SVG into out_dir.
BenchmarkResult run_benchmark(const BenchmarkSpec& spec);

std::string benchmark_csv(const std::vector<BenchmarkRow>& rows);
std::string benchmark_svg(const std::vector<BenchmarkRow>& rows);

} // namespace spectralseq
