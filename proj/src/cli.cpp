#include "spectralseq/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "spectralseq/bench.hpp"

namespace spectralseq {

using nlohmann::json;

std::string default_data_dir() {
    const char* env = std::getenv("SPECTRALSEQ_DATA_DIR");
    return env && *env ? std::string(env) : std::string(".");
}

std::string dataset_default_path(const std::string& case_name, std::size_t grid_n) {
    return default_data_dir() + "/" + case_name + "_g" + std::to_string(grid_n) + ".ds";
}

namespace {

struct GenOpts {
    std::string case_name = "wave";
    std::size_t sims = 10;
    std::size_t grid = 32;
    std::uint64_t seed = 2024;
    std::string out;
};

struct TrainOpts {
    std::string arch = "fno";
    std::string case_name;
    std::string data;
    std::string out = "run";
    std::size_t epochs = 200, batch = 10, width = 16, modes = 8;
    std::size_t grid = 32;
    std::size_t train_sims = 0; // 0: hold out 1/6 of the sims for testing
    std::size_t t_in = 0, t_out = 0; // 0: from dataset metadata
    std::size_t eval_every = 0, ckpt_every = 0;
    double lr = 1e-3, noise = 0.0;
    std::uint64_t seed = 2024;
    bool teacher_forced = false, resume = false, freeze_spectral = false;
    bool resample_noise = false, verbose = false;
};

struct EvalOpts {
    std::string ckpt, data, out;
    double noise = 0.0;
    std::uint64_t seed = 2024;
    std::size_t skip_sims = 0;
};

struct BenchOpts {
    std::string case_name = "wave";
    std::string profile = "desk";
    std::string data, out;
    std::vector<std::string> archs;
    std::vector<double> noise;
    std::size_t grid = 0, train_sims = 0, test_sims = 0, epochs = 0, batch = 0;
    std::size_t width = 0, modes = 0, parallel = 1;
    double lr = 0.0;
    std::uint64_t seed = 2024;
    bool verbose = false;
};

/// Pulls --config <file> (any position) out of args and returns the parsed
/// JSON object, so flag parsing later sees neither token.
json extract_config(std::vector<std::string>& args) {
    std::string path;
    for (std::size_t i = 0; i < args.size();) {
        if (args[i] == "--config") {
            if (i + 1 >= args.size()) throw ConfigError("--config needs a file argument");
            path = args[i + 1];
            args.erase(args.begin() + long(i), args.begin() + long(i) + 2);
        } else if (args[i].rfind("--config=", 0) == 0) {
            path = args[i].substr(9);
            args.erase(args.begin() + long(i));
        } else {
            ++i;
        }
    }
    if (path.empty()) return json::object();
    std::ifstream is(path);
    if (!is) throw IoError("cannot open config file: " + path);
    try {
        return json::parse(is);
    } catch (const json::exception& e) {
        throw FormatError("config file " + path + " is not valid JSON: " + e.what());
    }
}

void apply_config(const json& cfg, GenOpts& g, TrainOpts& t, EvalOpts& e, BenchOpts& b) {
    for (auto it = cfg.begin(); it != cfg.end(); ++it) {
        const std::string& k = it.key();
        const json& v = it.value();
        bool known = false;
        auto set_sz = [&](std::size_t& dst) { dst = v.get<std::size_t>(); known = true; };
        auto set_u64 = [&](std::uint64_t& dst) { dst = v.get<std::uint64_t>(); known = true; };
        auto set_d = [&](double& dst) { dst = v.get<double>(); known = true; };
        auto set_s = [&](std::string& dst) { dst = v.get<std::string>(); known = true; };
        auto set_b = [&](bool& dst) { dst = v.get<bool>(); known = true; };
        if (k == "case") { set_s(g.case_name); t.case_name = g.case_name; b.case_name = g.case_name; }
        else if (k == "sims") set_sz(g.sims);
        else if (k == "grid") { set_sz(g.grid); t.grid = g.grid; b.grid = g.grid; }
        else if (k == "seed") { set_u64(g.seed); t.seed = g.seed; e.seed = g.seed; b.seed = g.seed; }
        else if (k == "out") { set_s(g.out); t.out = g.out; e.out = g.out; b.out = g.out; }
        else if (k == "arch") set_s(t.arch);
        else if (k == "archs") { b.archs = v.get<std::vector<std::string>>(); known = true; }
        else if (k == "data") { set_s(t.data); e.data = t.data; b.data = t.data; }
        else if (k == "epochs") { set_sz(t.epochs); b.epochs = t.epochs; }
        else if (k == "batch") { set_sz(t.batch); b.batch = t.batch; }
        else if (k == "lr") { set_d(t.lr); b.lr = t.lr; }
        else if (k == "noise") {
            if (v.is_array()) b.noise = v.get<std::vector<double>>();
            else { t.noise = v.get<double>(); e.noise = t.noise; }
            known = true;
        }
        else if (k == "width") { set_sz(t.width); b.width = t.width; }
        else if (k == "modes") { set_sz(t.modes); b.modes = t.modes; }
        else if (k == "train_sims") { set_sz(t.train_sims); b.train_sims = t.train_sims; }
        else if (k == "test_sims") set_sz(b.test_sims);
        else if (k == "t_in") set_sz(t.t_in);
        else if (k == "t_out") set_sz(t.t_out);
        else if (k == "eval_every") set_sz(t.eval_every);
        else if (k == "ckpt_every") set_sz(t.ckpt_every);
        else if (k == "teacher_forced") set_b(t.teacher_forced);
        else if (k == "resume") set_b(t.resume);
        else if (k == "freeze_spectral") set_b(t.freeze_spectral);
        else if (k == "resample_noise") set_b(t.resample_noise);
        else if (k == "verbose") { set_b(t.verbose); b.verbose = t.verbose; }
        else if (k == "ckpt") set_s(e.ckpt);
        else if (k == "skip_sims") set_sz(e.skip_sims);
        else if (k == "profile") set_s(b.profile);
        else if (k == "parallel") set_sz(b.parallel);
        if (!known) throw ConfigError("unknown config key: " + k);
    }
}

void write_manifest(const std::string& dir, const json& m) {
    std::filesystem::create_directories(dir);
    std::ofstream os(dir + "/manifest.json");
    if (!os) throw IoError("cannot write manifest in " + dir);
    os << m.dump(2) << "\n";
}

int cmd_generate(const GenOpts& o) {
    std::string out = o.out.empty() ? dataset_default_path(o.case_name, o.grid) : o.out;
    TrajectoryDataset ds = generate_case(o.case_name, o.sims, o.grid, o.seed);
    if (auto parent = std::filesystem::path(out).parent_path(); !parent.empty())
        std::filesystem::create_directories(parent);
    save_dataset(out, ds);
    double lo = ds.frames[0], hi = ds.frames[0];
    for (std::size_t i = 1; i < ds.frames.size(); ++i) {
        lo = std::min(lo, ds.frames[i]);
        hi = std::max(hi, ds.frames[i]);
    }
    std::printf("wrote %s: %zu sims x %zu frames on %zux%zu, field range [%.6g, %.6g]\n",
                out.c_str(), ds.n_sims(), ds.n_frames(), ds.nx(), ds.ny(), lo, hi);
    return 0;
}

ModelConfig config_for_dataset(ArchKind arch, const TrajectoryDataset& ds, std::size_t width,
                               std::size_t modes, std::size_t t_in, std::size_t t_out) {
    ModelConfig cfg;
    cfg.arch = arch;
    cfg.width = width;
    cfg.m1 = modes;
    cfg.m2 = modes;
    cfg.nx = ds.nx();
    cfg.ny = ds.ny();
    cfg.t_in = t_in ? t_in : ds.meta.value("t_in", std::size_t{0});
    cfg.t_out = t_out ? t_out : ds.meta.value("t_out", std::size_t{0});
    if (cfg.t_in == 0 || cfg.t_out == 0)
        throw ConfigError("dataset metadata lacks t_in/t_out; pass --t-in and --t-out");
    cfg.x0 = ds.meta.value("x0", 0.0);
    cfg.x1 = ds.meta.value("x1", 1.0);
    cfg.y0 = ds.meta.value("y0", 0.0);
    cfg.y1 = ds.meta.value("y1", 1.0);
    return cfg;
}

int cmd_train(const TrainOpts& o) {
    std::string data = o.data;
    if (data.empty()) {
        if (o.case_name.empty()) throw ConfigError("train needs --data or --case");
        data = dataset_default_path(o.case_name, o.grid);
    }
    TrajectoryDataset full = load_dataset(data);
    std::size_t n_train = o.train_sims ? o.train_sims
                                       : std::max<std::size_t>(1, full.n_sims() * 5 / 6);
    auto [train_ds, test_ds] = split_dataset(full, n_train);

    std::string ckpt_path = o.out + "/model.ckpt";
    Model m{{}, {}};
    std::size_t start_epoch = 0;
    std::vector<std::pair<std::string, Tensor>> adam_state;
    if (o.resume) {
        std::vector<std::pair<std::string, Tensor>> extras;
        m = load_checkpoint(ckpt_path, &extras, &start_epoch);
        adam_state = std::move(extras);
    } else {
        ModelConfig cfg = config_for_dataset(arch_from_name(o.arch), full, o.width, o.modes,
                                             o.t_in, o.t_out);
        cfg.freeze_spectral = o.freeze_spectral;
        m = build_model(cfg, o.seed);
    }

    TrainConfig tc;
    tc.epochs = o.epochs;
    tc.start_epoch = start_epoch;
    tc.batch_size = o.batch;
    tc.lr = o.lr;
    tc.teacher_forced = o.teacher_forced;
    tc.noise = o.noise;
    tc.resample_noise = o.resample_noise;
    tc.noise_seed = o.seed + 555;
    tc.shuffle_seed = o.seed + 111;
    tc.eval_every = o.eval_every;
    tc.checkpoint_every = o.ckpt_every;
    tc.metrics_path = o.out + "/metrics.csv";
    tc.checkpoint_path = ckpt_path;
    tc.verbose = o.verbose;

    std::filesystem::create_directories(o.out);
    if (!o.resume) std::filesystem::remove(tc.metrics_path);
    write_manifest(o.out, json{{"command", "train"},
                               {"data", data},
                               {"arch", arch_name(m.cfg.arch)},
                               {"config", config_to_json(m.cfg)},
                               {"epochs", o.epochs},
                               {"start_epoch", start_epoch},
                               {"batch", o.batch},
                               {"lr", o.lr},
                               {"noise", o.noise},
                               {"resample_noise", o.resample_noise},
                               {"teacher_forced", o.teacher_forced},
                               {"train_sims", n_train},
                               {"test_sims", full.n_sims() - n_train},
                               {"seed", o.seed}});

    TrainResult res = train(m, train_ds, test_ds, tc, &adam_state);
    std::printf("trained %s to epoch %zu, final test MSE %.6g; checkpoint at %s\n",
                arch_name(m.cfg.arch).c_str(), tc.epochs, res.final_test_mse, ckpt_path.c_str());
    return 0;
}

int cmd_eval(const EvalOpts& o) {
    if (o.ckpt.empty() || o.data.empty()) throw ConfigError("eval needs --ckpt and --data");
    std::vector<std::pair<std::string, Tensor>> extras;
    Model m = load_checkpoint(o.ckpt, &extras, nullptr);
    Normalizer norm = Normalizer::from_extras(extras);
    TrajectoryDataset ds = load_dataset(o.data);
    if (o.skip_sims > 0) ds = split_dataset(ds, o.skip_sims).second;
    if (ds.nx() != m.cfg.nx || ds.ny() != m.cfg.ny)
        throw ConfigError("dataset grid does not match the checkpointed model");

    RolloutFn fn = [&m](const Tensor& w, std::size_t t) { return rollout(m, w, t); };
    double v = eval_dataset_mse(fn, ds, m.cfg.t_in, m.cfg.t_out, norm, o.noise, o.seed + 555);

    json report{{"mse", v},          {"noise", o.noise},   {"n_sims", ds.n_sims()},
                {"t_in", m.cfg.t_in}, {"t_out", m.cfg.t_out}, {"arch", arch_name(m.cfg.arch)},
                {"ckpt", o.ckpt},    {"data", o.data}};
    std::printf("%s on %zu sims at N=%g: rollout MSE %.6g over %zu frames\n",
                arch_name(m.cfg.arch).c_str(), ds.n_sims(), o.noise, v, m.cfg.t_out);
    std::printf("%s\n", report.dump().c_str());
    if (!o.out.empty()) {
        std::filesystem::create_directories(o.out);
        std::ofstream(o.out + "/report.json") << report.dump(2) << "\n";
        write_manifest(o.out, json{{"command", "eval"},
                                   {"ckpt", o.ckpt},
                                   {"data", o.data},
                                   {"noise", o.noise},
                                   {"skip_sims", o.skip_sims},
                                   {"seed", o.seed}});
    }
    return 0;
}

int cmd_benchmark(const BenchOpts& o) {
    BenchmarkSpec spec = o.profile == "paper" ? paper_benchmark(o.case_name)
                                              : desk_benchmark(o.case_name);
    if (!o.archs.empty()) {
        spec.archs.clear();
        for (const auto& a : o.archs) spec.archs.push_back(arch_from_name(a));
    }
    if (!o.noise.empty()) spec.noise_levels = o.noise;
    if (o.grid) spec.grid_n = o.grid;
    if (o.train_sims) spec.n_train = o.train_sims;
    if (o.test_sims) spec.n_test = o.test_sims;
    if (o.epochs) spec.epochs = o.epochs;
    if (o.batch) spec.batch = o.batch;
    if (o.width) spec.width = o.width;
    if (o.modes) spec.modes = o.modes;
    if (o.lr > 0.0) spec.lr = o.lr;
    spec.parallel = o.parallel;
    spec.seed = o.seed;
    spec.data_path = o.data;
    spec.out_dir = o.out.empty() ? "bench_" + o.case_name : o.out;
    spec.verbose = o.verbose;

    json archs_j = json::array();
    for (auto a : spec.archs) archs_j.push_back(arch_name(a));
    write_manifest(spec.out_dir, json{{"command", "benchmark"},
                                      {"case", spec.case_name},
                                      {"archs", archs_j},
                                      {"noise_levels", spec.noise_levels},
                                      {"grid", spec.grid_n},
                                      {"train_sims", spec.n_train},
                                      {"test_sims", spec.n_test},
                                      {"epochs", spec.epochs},
                                      {"batch", spec.batch},
                                      {"width", spec.width},
                                      {"modes", spec.modes},
                                      {"lr", spec.lr},
                                      {"parallel", spec.parallel},
                                      {"profile", o.profile},
                                      {"data", spec.data_path},
                                      {"seed", spec.seed}});

    BenchmarkResult res = run_benchmark(spec);
    std::printf("%s", benchmark_csv(res.rows).c_str());
    std::printf("results: %s, scatter: %s\n", res.csv_path.c_str(), res.svg_path.c_str());
    return 0;
}

} // namespace

int run_cli(std::vector<std::string> args) {
    GenOpts g;
    TrainOpts t;
    EvalOpts e;
    BenchOpts b;
    try {
        json cfg = extract_config(args);
        apply_config(cfg, g, t, e, b);
    } catch (const std::exception& ex) {
        std::fprintf(stderr, "error: %s\n", ex.what());
        return 2;
    }

    CLI::App app{"Fourier-layer sequence models for gridded physics data", "spectralseq"};
    app.require_subcommand(1);
    std::string config_dummy;

    CLI::App* cg = app.add_subcommand("generate", "simulate a PDE case and write a dataset");
    cg->add_option("--case", g.case_name, "wave | ns_laminar | ns_turbulent")
        ->capture_default_str();
    cg->add_option("--sims", g.sims, "number of simulations")->capture_default_str();
    cg->add_option("--grid", g.grid, "grid resolution n (n x n)")->capture_default_str();
    cg->add_option("--seed", g.seed, "generation seed")->capture_default_str();
    cg->add_option("--out", g.out, "output file (default: data dir convention)");
    cg->add_option("--config", config_dummy, "JSON config file (defaults < config < flags)");

    CLI::App* ct = app.add_subcommand("train", "train a model on a dataset");
    ct->add_option("--arch", t.arch, "fno | frnn | rnn | crnn")->capture_default_str();
    ct->add_option("--case", t.case_name, "case for the default dataset path");
    ct->add_option("--data", t.data, "dataset file");
    ct->add_option("--grid", t.grid, "grid for the default dataset path")->capture_default_str();
    ct->add_option("--out", t.out, "run directory")->capture_default_str();
    ct->add_option("--epochs", t.epochs, "total epochs")->capture_default_str();
    ct->add_option("--batch", t.batch, "batch size")->capture_default_str();
    ct->add_option("--lr", t.lr, "initial learning rate")->capture_default_str();
    ct->add_option("--noise", t.noise, "training noise variance")->capture_default_str();
    ct->add_option("--width", t.width, "model width / hidden channels")->capture_default_str();
    ct->add_option("--modes", t.modes, "retained Fourier modes per axis")->capture_default_str();
    ct->add_option("--train-sims", t.train_sims, "sims used for training (rest held out)");
    ct->add_option("--t-in", t.t_in, "input window length (default: dataset metadata)");
    ct->add_option("--t-out", t.t_out, "rollout length (default: dataset metadata)");
    ct->add_option("--eval-every", t.eval_every, "epochs between test evaluations");
    ct->add_option("--ckpt-every", t.ckpt_every, "epochs between checkpoint rewrites");
    ct->add_option("--seed", t.seed, "init/shuffle/noise seed")->capture_default_str();
    ct->add_flag("--teacher-forced", t.teacher_forced, "feed true frames during training");
    ct->add_flag("--resume", t.resume, "continue from the run directory's checkpoint");
    ct->add_flag("--freeze-spectral", t.freeze_spectral, "exclude spectral weights from updates");
    ct->add_flag("--resample-noise", t.resample_noise, "redraw training noise every epoch");
    ct->add_flag("--verbose", t.verbose, "per-epoch progress lines");
    ct->add_option("--config", config_dummy, "JSON config file (defaults < config < flags)");

    CLI::App* ce = app.add_subcommand("eval", "evaluate a checkpoint's noisy-input rollout");
    ce->add_option("--ckpt", e.ckpt, "checkpoint file")->required();
    ce->add_option("--data", e.data, "dataset file")->required();
    ce->add_option("--noise", e.noise, "input noise variance N")->capture_default_str();
    ce->add_option("--skip-sims", e.skip_sims, "drop this many leading (training) sims");
    ce->add_option("--seed", e.seed, "noise seed")->capture_default_str();
    ce->add_option("--out", e.out, "directory for report.json");
    ce->add_option("--config", config_dummy, "JSON config file (defaults < config < flags)");

    CLI::App* cb = app.add_subcommand("benchmark", "train archs and sweep noise levels");
    cb->add_option("--case", b.case_name, "wave | ns_laminar | ns_turbulent")
        ->capture_default_str();
    cb->add_option("--arch", b.archs, "architecture (repeatable)");
    cb->add_option("--noise", b.noise, "noise level (repeatable)");
    cb->add_option("--profile", b.profile, "desk | paper")
        ->check(CLI::IsMember({"desk", "paper"}))
        ->capture_default_str();
    cb->add_option("--grid", b.grid, "override grid resolution");
    cb->add_option("--train-sims", b.train_sims, "override training sims");
    cb->add_option("--test-sims", b.test_sims, "override test sims");
    cb->add_option("--epochs", b.epochs, "override epochs");
    cb->add_option("--batch", b.batch, "override batch size");
    cb->add_option("--width", b.width, "override model width");
    cb->add_option("--modes", b.modes, "override retained modes");
    cb->add_option("--lr", b.lr, "override learning rate");
    cb->add_option("--parallel", b.parallel, "benchmark cells run k at a time")
        ->capture_default_str();
    cb->add_option("--data", b.data, "pre-generated dataset file");
    cb->add_option("--out", b.out, "output directory (default bench_<case>)");
    cb->add_option("--seed", b.seed, "benchmark seed")->capture_default_str();
    cb->add_flag("--verbose", b.verbose, "progress lines");
    cb->add_option("--config", config_dummy, "JSON config file (defaults < config < flags)");

    std::reverse(args.begin(), args.end());
    try {
        app.parse(args);
    } catch (const CLI::ParseError& ex) {
        // CLI11's per-error exit codes collapse onto the documented contract:
        // 0 for --help, 1 for any usage error.
        return app.exit(ex) == 0 ? 0 : 1;
    }

    try {
        if (app.got_subcommand(cg)) return cmd_generate(g);
        if (app.got_subcommand(ct)) return cmd_train(t);
        if (app.got_subcommand(ce)) return cmd_eval(e);
        if (app.got_subcommand(cb)) return cmd_benchmark(b);
    } catch (const NumericsError& ex) {
        std::fprintf(stderr, "error: %s\n", ex.what());
        return 3;
    } catch (const std::exception& ex) {
        std::fprintf(stderr, "error: %s\n", ex.what());
        return 2;
    }
    return 1;
}

} // namespace spectralseq
