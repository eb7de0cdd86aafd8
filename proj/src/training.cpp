#include "spectralseq/training.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>

namespace spectralseq {

Normalizer Normalizer::fit(const Tensor& frames) {
    if (frames.rank() != 4) throw ShapeError("normalizer fit expects (n_sims, n_frames, nx, ny)");
    std::size_t s = frames.dim(0), f = frames.dim(1), nx = frames.dim(2), ny = frames.dim(3);
    std::size_t pooled = s * f;
    Normalizer n;
    n.mean = Tensor({nx, ny}, 0.0);
    n.stddev = Tensor({nx, ny}, 0.0);
    for (std::size_t p = 0; p < pooled; ++p)
        for (std::size_t q = 0; q < nx * ny; ++q) n.mean[q] += frames[p * nx * ny + q];
    for (std::size_t q = 0; q < nx * ny; ++q) n.mean[q] /= double(pooled);
    for (std::size_t p = 0; p < pooled; ++p)
        for (std::size_t q = 0; q < nx * ny; ++q) {
            double d = frames[p * nx * ny + q] - n.mean[q];
            n.stddev[q] += d * d;
        }
    for (std::size_t q = 0; q < nx * ny; ++q)
        n.stddev[q] = std::max(std::sqrt(n.stddev[q] / double(pooled)), 1e-8);
    return n;
}

namespace {

void check_grid(const Tensor& stat, std::size_t nx, std::size_t ny, const char* what) {
    if (stat.dim(0) != nx || stat.dim(1) != ny)
        throw ShapeError(std::string(what) + ": normalizer grid " + stat.shape_str() +
                         " does not match data " + std::to_string(nx) + "x" + std::to_string(ny));
}

} // namespace

Tensor Normalizer::normalize_fields(const Tensor& x) const {
    if (x.rank() != 4) throw ShapeError("normalize expects (B, nx, ny, C)");
    check_grid(mean, x.dim(1), x.dim(2), "normalize");
    std::size_t b = x.dim(0), nx = x.dim(1), ny = x.dim(2), c = x.dim(3);
    Tensor y = x;
    for (std::size_t i = 0; i < b; ++i)
        for (std::size_t q = 0; q < nx * ny; ++q)
            for (std::size_t k = 0; k < c; ++k) {
                std::size_t at = (i * nx * ny + q) * c + k;
                y[at] = (y[at] - mean[q]) / stddev[q];
            }
    return y;
}

Tensor Normalizer::denormalize_fields(const Tensor& x) const {
    if (x.rank() != 4) throw ShapeError("denormalize expects (B, nx, ny, C)");
    check_grid(mean, x.dim(1), x.dim(2), "denormalize");
    std::size_t b = x.dim(0), nx = x.dim(1), ny = x.dim(2), c = x.dim(3);
    Tensor y = x;
    for (std::size_t i = 0; i < b; ++i)
        for (std::size_t q = 0; q < nx * ny; ++q)
            for (std::size_t k = 0; k < c; ++k) {
                std::size_t at = (i * nx * ny + q) * c + k;
                y[at] = y[at] * stddev[q] + mean[q];
            }
    return y;
}

Tensor Normalizer::normalize_dataset(const Tensor& frames) const {
    if (frames.rank() != 4) throw ShapeError("normalize_dataset expects (n_sims, n_frames, nx, ny)");
    check_grid(mean, frames.dim(2), frames.dim(3), "normalize_dataset");
    std::size_t pooled = frames.dim(0) * frames.dim(1), grid = frames.dim(2) * frames.dim(3);
    Tensor y = frames;
    for (std::size_t p = 0; p < pooled; ++p)
        for (std::size_t q = 0; q < grid; ++q) {
            std::size_t at = p * grid + q;
            y[at] = (y[at] - mean[q]) / stddev[q];
        }
    return y;
}

std::vector<std::pair<std::string, Tensor>> Normalizer::to_extras() const {
    return {{"normalizer.mean", mean}, {"normalizer.std", stddev}};
}

Normalizer Normalizer::from_extras(const std::vector<std::pair<std::string, Tensor>>& extras) {
    Normalizer n;
    bool got_mean = false, got_std = false;
    for (const auto& [name, t] : extras) {
        if (name == "normalizer.mean") {
            n.mean = t;
            got_mean = true;
        } else if (name == "normalizer.std") {
            n.stddev = t;
            got_std = true;
        }
    }
    if (!got_mean || !got_std) throw FormatError("checkpoint lacks normalizer statistics");
    return n;
}

double mse(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "mse");
    double s = kernels::sum_sq_diff(a.data(), b.data(), a.size());
    return s / double(a.size());
}

Adam::Adam(ParamStore& ps, AdamConfig cfg, std::vector<std::string> frozen)
    : ps_(&ps), cfg_(cfg), frozen_(frozen.begin(), frozen.end()) {
    for (const auto& name : frozen) ps.require(name);
    m_.reserve(ps.size());
    v_.reserve(ps.size());
    for (std::size_t i = 0; i < ps.size(); ++i) {
        m_.emplace_back(ps.entry(i).value.dims(), 0.0);
        v_.emplace_back(ps.entry(i).value.dims(), 0.0);
    }
}

void Adam::step(double lr) {
    ++t_;
    double bc1 = 1.0 - std::pow(cfg_.beta1, double(t_));
    double bc2 = 1.0 - std::pow(cfg_.beta2, double(t_));
    for (std::size_t i = 0; i < ps_->size(); ++i) {
        ParamStore::Entry& e = ps_->entry(i);
        if (frozen_.count(e.name)) continue;
        Tensor& m = m_[i];
        Tensor& v = v_[i];
        for (std::size_t k = 0; k < e.value.size(); ++k) {
            double g = e.grad[k];
            m[k] = cfg_.beta1 * m[k] + (1.0 - cfg_.beta1) * g;
            v[k] = cfg_.beta2 * v[k] + (1.0 - cfg_.beta2) * g * g;
            e.value[k] -= lr * (m[k] / bc1) / (std::sqrt(v[k] / bc2) + cfg_.eps);
        }
    }
}

std::vector<std::pair<std::string, Tensor>> Adam::state_extras() const {
    std::vector<std::pair<std::string, Tensor>> out;
    out.emplace_back("adam.t", Tensor({1}, double(t_)));
    for (std::size_t i = 0; i < ps_->size(); ++i) {
        out.emplace_back("adam.m." + ps_->entry(i).name, m_[i]);
        out.emplace_back("adam.v." + ps_->entry(i).name, v_[i]);
    }
    return out;
}

void Adam::load_state_extras(const std::vector<std::pair<std::string, Tensor>>& extras) {
    bool any = false;
    for (const auto& [name, t] : extras) {
        if (name == "adam.t") {
            t_ = std::size_t(t[0]);
            any = true;
            continue;
        }
        Tensor* slot = nullptr;
        std::string pname;
        if (name.rfind("adam.m.", 0) == 0) pname = name.substr(7);
        else if (name.rfind("adam.v.", 0) == 0) pname = name.substr(7);
        else continue;
        int id = ps_->find(pname);
        if (id < 0) throw FormatError("optimizer state for unknown parameter: " + pname);
        slot = name[5] == 'm' ? &m_[std::size_t(id)] : &v_[std::size_t(id)];
        if (!slot->same_shape(t))
            throw FormatError("optimizer state " + name + " has shape " + t.shape_str() +
                              ", expected " + slot->shape_str());
        *slot = t;
        any = true;
    }
    (void)any;
}

double step_lr(double lr0, std::size_t epoch, double decay, std::size_t every) {
    if (every == 0) throw ConfigError("lr schedule period must be >= 1");
    return lr0 * std::pow(decay, double(epoch / every));
}

namespace {

constexpr std::size_t kEvalChunk = 10;

/// Per-sim corruption in normalized space. One stream per (sim, epoch):
/// window block first, then (for training) the target block.
void corrupt_batch(Batch& b, double variance, std::uint64_t seed, std::size_t epoch,
                   bool targets_too) {
    if (variance == 0.0) return;
    if (variance < 0.0) throw ConfigError("noise variance must be >= 0");
    double sd = std::sqrt(variance);
    std::size_t wlen = b.window.size() / b.sims.size();
    std::size_t tlen = b.targets.size() / b.sims.size();
    for (std::size_t s = 0; s < b.sims.size(); ++s) {
        Rng rng(noise_stream_seed(seed, b.sims[s], epoch));
        double* w = b.window.data() + s * wlen;
        for (std::size_t i = 0; i < wlen; ++i) w[i] += rng.normal(0.0, sd);
        if (!targets_too) continue;
        double* t = b.targets.data() + s * tlen;
        for (std::size_t i = 0; i < tlen; ++i) t[i] += rng.normal(0.0, sd);
    }
}

} // namespace

double eval_dataset_mse(const RolloutFn& fn, const TrajectoryDataset& ds, std::size_t t_in,
                        std::size_t t_out, const Normalizer& norm, double noise_variance,
                        std::uint64_t noise_seed) {
    double total = 0.0;
    std::size_t count = 0;
    for (std::size_t at = 0; at < ds.n_sims(); at += kEvalChunk) {
        std::vector<std::size_t> sims;
        for (std::size_t s = at; s < std::min(at + kEvalChunk, ds.n_sims()); ++s) sims.push_back(s);
        Batch b = make_batch(ds.frames, sims, t_in, t_out);
        Tensor clean_targets = b.targets;
        b.window = norm.normalize_fields(b.window);
        corrupt_batch(b, noise_variance, noise_seed, 0, false);
        Tensor pred = fn(b.window, t_out);
        if (!pred.same_shape(clean_targets))
            throw ShapeError("rollout returned " + pred.shape_str() + ", expected " +
                             clean_targets.shape_str());
        pred = norm.denormalize_fields(pred);
        total += kernels::sum_sq_diff(pred.data(), clean_targets.data(), pred.size());
        count += pred.size();
    }
    return total / double(count);
}

TrainResult train(Model& m, const TrajectoryDataset& train_ds, const TrajectoryDataset& test_ds,
                  const TrainConfig& tc, std::vector<std::pair<std::string, Tensor>>* adam_state) {
    const ModelConfig& cfg = m.cfg;
    if (train_ds.nx() != cfg.nx || train_ds.ny() != cfg.ny)
        throw ConfigError("training data grid " + std::to_string(train_ds.nx()) + "x" +
                          std::to_string(train_ds.ny()) + " does not match the model");
    if (train_ds.n_frames() < cfg.t_in + cfg.t_out)
        throw ConfigError("sims are too short for t_in + t_out");
    if (tc.start_epoch > tc.epochs) throw ConfigError("start_epoch is past the last epoch");

    TrainResult res;
    res.norm = Normalizer::fit(train_ds.frames);
    Tensor norm_train = res.norm.normalize_dataset(train_ds.frames);

    std::vector<std::string> frozen = cfg.freeze_spectral ? spectral_param_names(m)
                                                          : std::vector<std::string>{};
    Adam adam(m.params, {}, frozen);
    if (adam_state && !adam_state->empty()) adam.load_state_extras(*adam_state);

    std::FILE* csv = nullptr;
    if (!tc.metrics_path.empty()) {
        bool fresh = !std::filesystem::exists(tc.metrics_path) ||
                     std::filesystem::file_size(tc.metrics_path) == 0;
        csv = std::fopen(tc.metrics_path.c_str(), "a");
        if (!csv) throw IoError("cannot open metrics file: " + tc.metrics_path);
        if (fresh) std::fprintf(csv, "epoch,lr,train_loss,test_mse,wall_ms\n");
    }

    auto eval_model = [&](double noise_var) {
        RolloutFn fn = [&m](const Tensor& w, std::size_t t) { return rollout(m, w, t); };
        return eval_dataset_mse(fn, test_ds, cfg.t_in, cfg.t_out, res.norm, noise_var,
                                tc.noise_seed);
    };

    auto save = [&](std::size_t done_epochs) {
        if (tc.checkpoint_path.empty()) return;
        auto extras = res.norm.to_extras();
        for (auto& kv : adam.state_extras()) extras.push_back(std::move(kv));
        save_checkpoint(tc.checkpoint_path, m, extras, done_epochs);
    };

    double nan = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t e = tc.start_epoch; e < tc.epochs; ++e) {
        auto t0 = std::chrono::steady_clock::now();
        double lr = step_lr(tc.lr, e, tc.lr_decay, tc.lr_every);
        double epoch_loss = 0.0;
        auto batches = epoch_batches(train_ds.n_sims(), tc.batch_size, tc.shuffle_seed, e);
        for (std::size_t bi = 0; bi < batches.size(); ++bi) {
            Batch b = make_batch(norm_train, batches[bi], cfg.t_in, cfg.t_out);
            corrupt_batch(b, tc.noise, tc.noise_seed, tc.resample_noise ? e : 0, true);
            m.params.zero_grad();
            Graph g(&m.params);
            int loss = build_rollout_loss(g, m, b.window, b.targets, tc.teacher_forced);
            double lv = g.scalar(loss);
            if (!std::isfinite(lv)) {
                if (csv) std::fclose(csv);
                throw NumericsError("training diverged: non-finite loss at epoch " +
                                    std::to_string(e) + ", batch " + std::to_string(bi) +
                                    ", lr " + std::to_string(lr));
            }
            g.backward(loss);
            adam.step(lr);
            epoch_loss += lv * double(b.sims.size());
        }
        EpochStats st;
        st.epoch = e;
        st.lr = lr;
        st.train_loss = epoch_loss / double(train_ds.n_sims());
        bool last = e + 1 == tc.epochs;
        bool do_eval = last || (tc.eval_every > 0 && (e + 1) % tc.eval_every == 0);
        st.test_mse = do_eval ? eval_model(0.0) : nan;
        st.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                               t0)
                         .count();
        if (csv) {
            std::fprintf(csv, "%zu,%.10g,%.10g,%.10g,%.3f\n", st.epoch, st.lr, st.train_loss,
                         st.test_mse, st.wall_ms);
            std::fflush(csv);
        }
        if (tc.verbose)
            std::printf("epoch %zu lr %.3g train %.6g test %.6g (%.0f ms)\n", st.epoch, st.lr,
                        st.train_loss, st.test_mse, st.wall_ms);
        if (last) res.final_test_mse = st.test_mse;
        res.history.push_back(st);
        if (tc.checkpoint_every > 0 && (e + 1) % tc.checkpoint_every == 0 && !last)
            save(e + 1);
    }
    if (tc.start_epoch >= tc.epochs) res.final_test_mse = eval_model(0.0);
    save(tc.epochs);
    if (adam_state) *adam_state = adam.state_extras();
    if (csv) std::fclose(csv);
    return res;
}

} // namespace spectralseq
