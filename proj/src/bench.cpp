#include "spectralseq/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <thread>

#include "spectralseq/solvers.hpp"

namespace spectralseq {

CaseProfile case_profile(const std::string& name) {
    if (name == "wave")
        return {"wave", -1.0, 1.0, -1.0, 1.0, 1.0, 1.0, 50, 20, 30, 0.0};
    if (name == "ns_laminar")
        return {"ns_laminar", 0.0, 1.0, 0.0, 1.0, 1e-3, 39.0, 40, 20, 20, 1e-3};
    if (name == "ns_turbulent")
        return {"ns_turbulent", 0.0, 1.0, 0.0, 1.0, 1e-5, 19.0, 20, 10, 10, 1e-3};
    throw ConfigError("unknown case: " + name + " (expected wave, ns_laminar or ns_turbulent)");
}

TrajectoryDataset generate_case(const std::string& case_name, std::size_t n_sims,
                                std::size_t grid_n, std::uint64_t seed) {
    if (n_sims < 1) throw ConfigError("need at least one sim");
    CaseProfile cp = case_profile(case_name);
    GridCoords grid{grid_n, grid_n, cp.x0, cp.x1, cp.y0, cp.y1};

    TrajectoryDataset ds;
    ds.frames = Tensor({n_sims, cp.n_frames, grid_n, grid_n});
    std::size_t per_sim = cp.n_frames * grid_n * grid_n;

    if (case_name == "wave") {
        Tensor ics = lhs_sample(n_sims, {{10.0, 100.0}, {-0.5, 0.5}, {-0.5, 0.5}}, seed);
        for (std::size_t s = 0; s < n_sims; ++s) {
            WaveIc ic{ics(s, std::size_t{0}), ics(s, std::size_t{1}), ics(s, std::size_t{2})};
            WaveResult wr = solve_wave(wave_initial_condition(ic, grid), cp.nu, grid, cp.t_end,
                                       cp.n_frames);
            std::copy(wr.frames.data(), wr.frames.data() + per_sim,
                      ds.frames.data() + s * per_sim);
        }
    } else {
        Tensor f = ns_forcing(grid);
        for (std::size_t s = 0; s < n_sims; ++s) {
            Rng rng(seed + s);
            Tensor w0 = gaussian_random_field(grid, 2.5, 7.0, rng);
            Tensor traj = solve_navier_stokes(w0, f, cp.nu, grid, cp.t_end, cp.n_frames,
                                              cp.dt_solver);
            std::copy(traj.data(), traj.data() + per_sim, ds.frames.data() + s * per_sim);
        }
    }
    ds.meta = {{"case", cp.name},       {"nu", cp.nu},       {"t_end", cp.t_end},
               {"n_frames", cp.n_frames}, {"grid", grid_n},  {"seed", seed},
               {"t_in", cp.t_in},       {"t_out", cp.t_out}, {"x0", cp.x0},
               {"x1", cp.x1},           {"y0", cp.y0},       {"y1", cp.y1}};
    return ds;
}

void BenchmarkSpec::validate() const {
    case_profile(case_name);
    if (archs.empty()) throw ConfigError("benchmark needs at least one architecture");
    if (noise_levels.empty()) throw ConfigError("benchmark needs at least one noise level");
    for (double n : noise_levels)
        if (n < 0.0) throw ConfigError("noise levels must be >= 0");
    if (n_train < 1 || n_test < 1) throw ConfigError("need train and test sims");
    if (epochs < 1) throw ConfigError("need at least one epoch");
}

BenchmarkSpec desk_benchmark(const std::string& case_name) {
    BenchmarkSpec s;
    s.case_name = case_name;
    return s;
}

BenchmarkSpec paper_benchmark(const std::string& case_name) {
    BenchmarkSpec s;
    s.case_name = case_name;
    s.grid_n = 64;
    s.n_train = 800;
    s.n_test = 200;
    s.epochs = 1000;
    s.batch = 50;
    s.width = 32;
    s.modes = 16;
    return s;
}

std::string benchmark_csv(const std::vector<BenchmarkRow>& rows) {
    std::string out = "case,arch,noise,mse,params,train_seconds\n";
    char buf[256];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%s,%s,%.10g,%.10g,%zu,%.3f\n", r.case_name.c_str(),
                      r.arch.c_str(), r.noise, r.mse, r.params, r.train_seconds);
        out += buf;
    }
    return out;
}

std::string benchmark_svg(const std::vector<BenchmarkRow>& rows) {
    constexpr double w = 640, h = 440, ml = 70, mr = 150, mt = 30, mb = 50;
    double nmax = 0.0, ymin = 0.0, ymax = -30.0;
    for (const auto& r : rows) {
        nmax = std::max(nmax, r.noise);
        double ly = std::log10(std::max(r.mse, 1e-30));
        ymin = std::min(ymin, ly);
        ymax = std::max(ymax, ly);
    }
    if (nmax == 0.0) nmax = 1.0;
    ymin = std::floor(ymin) - 0.5;
    ymax = std::ceil(ymax) + 0.5;
    auto px = [&](double n) { return ml + n / nmax * (w - ml - mr); };
    auto py = [&](double ly) { return h - mb - (ly - ymin) / (ymax - ymin) * (h - mt - mb); };

    const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#8c564b"};
    std::vector<std::string> archs;
    for (const auto& r : rows)
        if (std::find(archs.begin(), archs.end(), r.arch) == archs.end()) archs.push_back(r.arch);

    char buf[512];
    std::string svg;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"440\" "
           "viewBox=\"0 0 640 440\">\n";
    svg += "<rect width=\"640\" height=\"440\" fill=\"white\"/>\n";
    std::snprintf(buf, sizeof buf,
                  "<line x1=\"%.1f\" y1=\"%.1f\" x2=\"%.1f\" y2=\"%.1f\" stroke=\"black\"/>\n",
                  ml, h - mb, w - mr, h - mb);
    svg += buf;
    std::snprintf(buf, sizeof buf,
                  "<line x1=\"%.1f\" y1=\"%.1f\" x2=\"%.1f\" y2=\"%.1f\" stroke=\"black\"/>\n",
                  ml, mt, ml, h - mb);
    svg += buf;
    svg += "<text x=\"320\" y=\"430\" text-anchor=\"middle\" font-size=\"14\">noise variance "
           "N</text>\n";
    svg += "<text x=\"18\" y=\"220\" text-anchor=\"middle\" font-size=\"14\" "
           "transform=\"rotate(-90 18 220)\">log10 rollout MSE</text>\n";
    for (double ly = std::ceil(ymin); ly <= ymax; ly += 1.0) {
        std::snprintf(buf, sizeof buf,
                      "<line x1=\"%.1f\" y1=\"%.1f\" x2=\"%.1f\" y2=\"%.1f\" stroke=\"#ddd\"/>"
                      "<text x=\"%.1f\" y=\"%.1f\" text-anchor=\"end\" font-size=\"11\">%g"
                      "</text>\n",
                      ml, py(ly), w - mr, py(ly), ml - 6, py(ly) + 4, ly);
        svg += buf;
    }
    for (std::size_t a = 0; a < archs.size(); ++a) {
        const char* col = colors[a % 5];
        std::string prev;
        double px0 = 0, py0 = 0;
        bool has_prev = false;
        for (const auto& r : rows) {
            if (r.arch != archs[a]) continue;
            double x = px(r.noise), y = py(std::log10(std::max(r.mse, 1e-30)));
            if (has_prev) {
                std::snprintf(buf, sizeof buf,
                              "<line x1=\"%.1f\" y1=\"%.1f\" x2=\"%.1f\" y2=\"%.1f\" "
                              "stroke=\"%s\" stroke-width=\"1.5\"/>\n",
                              px0, py0, x, y, col);
                svg += buf;
            }
            std::snprintf(buf, sizeof buf,
                          "<circle cx=\"%.1f\" cy=\"%.1f\" r=\"4\" fill=\"%s\"/>\n", x, y, col);
            svg += buf;
            px0 = x;
            py0 = y;
            has_prev = true;
        }
        std::snprintf(buf, sizeof buf,
                      "<circle cx=\"%.1f\" cy=\"%.1f\" r=\"4\" fill=\"%s\"/>"
                      "<text x=\"%.1f\" y=\"%.1f\" font-size=\"12\">%s</text>\n",
                      w - mr + 16, mt + 20.0 * double(a) + 10, col, w - mr + 26,
                      mt + 20.0 * double(a) + 14, archs[a].c_str());
        svg += buf;
    }
    svg += "</svg>\n";
    return svg;
}

BenchmarkResult run_benchmark(const BenchmarkSpec& spec) {
    spec.validate();
    CaseProfile cp = case_profile(spec.case_name);

    TrajectoryDataset full;
    if (!spec.data_path.empty()) {
        full = load_dataset(spec.data_path);
        if (full.meta.value("case", std::string()) != spec.case_name)
            throw ConfigError("dataset at " + spec.data_path + " is not case " + spec.case_name);
    } else {
        full = generate_case(spec.case_name, spec.n_train + spec.n_test, spec.grid_n, spec.seed);
    }
    if (full.n_sims() < spec.n_train + spec.n_test)
        throw ConfigError("dataset has " + std::to_string(full.n_sims()) + " sims, need " +
                          std::to_string(spec.n_train + spec.n_test));
    auto [train_ds, rest] = split_dataset(full, spec.n_train);
    TrajectoryDataset test_ds = rest;
    if (rest.n_sims() > spec.n_test) test_ds = split_dataset(rest, spec.n_test).first;

    BenchmarkResult res;
    std::vector<std::vector<BenchmarkRow>> per_arch(spec.archs.size());
    auto run_cell = [&](std::size_t a) {
        ArchKind arch = spec.archs[a];
        ModelConfig cfg;
        cfg.arch = arch;
        cfg.width = spec.width;
        cfg.m1 = spec.modes;
        cfg.m2 = spec.modes;
        cfg.t_in = cp.t_in;
        cfg.t_out = cp.t_out;
        cfg.nx = train_ds.nx();
        cfg.ny = train_ds.ny();
        cfg.x0 = cp.x0;
        cfg.x1 = cp.x1;
        cfg.y0 = cp.y0;
        cfg.y1 = cp.y1;
        Model m = build_model(cfg, spec.seed + 101 * (a + 1));

        TrainConfig tc;
        tc.epochs = spec.epochs;
        tc.batch_size = spec.batch;
        tc.lr = spec.lr;
        tc.verbose = spec.verbose;
        if (!spec.out_dir.empty()) {
            std::filesystem::create_directories(spec.out_dir);
            tc.metrics_path = spec.out_dir + "/train_" + arch_name(arch) + ".csv";
            std::filesystem::remove(tc.metrics_path);
            tc.checkpoint_path = spec.out_dir + "/model_" + arch_name(arch) + ".ckpt";
        }
        auto t0 = std::chrono::steady_clock::now();
        TrainResult tr = train(m, train_ds, test_ds, tc);
        double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

        RolloutFn fn = [&m](const Tensor& w, std::size_t t) { return rollout(m, w, t); };
        for (double noise : spec.noise_levels) {
            BenchmarkRow row;
            row.case_name = spec.case_name;
            row.arch = arch_name(arch);
            row.noise = noise;
            row.mse = eval_dataset_mse(fn, test_ds, cfg.t_in, cfg.t_out, tr.norm, noise,
                                       spec.seed + 7777);
            row.params = count_params(m);
            row.train_seconds = secs;
            per_arch[a].push_back(row);
            if (spec.verbose)
                std::printf("%s %s N=%.3g mse=%.6g\n", spec.case_name.c_str(),
                            arch_name(arch).c_str(), noise, row.mse);
        }
    };

    if (spec.parallel <= 1) {
        for (std::size_t a = 0; a < spec.archs.size(); ++a) run_cell(a);
    } else {
        // Cells share only the read-only datasets; result order stays the
        // arch order regardless of which thread finishes first.
        std::vector<std::exception_ptr> errs(spec.archs.size());
        for (std::size_t at = 0; at < spec.archs.size(); at += spec.parallel) {
            std::vector<std::thread> pool;
            for (std::size_t a = at; a < std::min(at + spec.parallel, spec.archs.size()); ++a)
                pool.emplace_back([&, a] {
                    try {
                        run_cell(a);
                    } catch (...) {
                        errs[a] = std::current_exception();
                    }
                });
            for (auto& t : pool) t.join();
        }
        for (auto& e : errs)
            if (e) std::rethrow_exception(e);
    }
    for (auto& rows : per_arch)
        for (auto& r : rows) res.rows.push_back(std::move(r));

    if (!spec.out_dir.empty()) {
        std::filesystem::create_directories(spec.out_dir);
        res.csv_path = spec.out_dir + "/results.csv";
        res.svg_path = spec.out_dir + "/results.svg";
        std::ofstream(res.csv_path) << benchmark_csv(res.rows);
        std::ofstream(res.svg_path) << benchmark_svg(res.rows);
    }
    return res;
}

} // namespace spectralseq
