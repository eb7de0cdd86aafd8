#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "spectralseq/dataset.hpp"
#include "spectralseq/models.hpp"

namespace spectralseq {

/// Per-grid-point statistics pooled over sims and frames. Fields are
/// normalized pointwise; the std is floored so constant pixels stay finite.
struct Normalizer {
    Tensor mean{std::vector<std::size_t>{1, 1}};
    Tensor stddev{std::vector<std::size_t>{1, 1}};

    static Normalizer fit(const Tensor& frames); // (n_sims, n_frames, nx, ny)

    Tensor normalize_fields(const Tensor& x) const;   // (B, nx, ny, C)
    Tensor denormalize_fields(const Tensor& x) const; // (B, nx, ny, C)
    Tensor normalize_dataset(const Tensor& frames) const;

    std::vector<std::pair<std::string, Tensor>> to_extras() const;
    static Normalizer from_extras(const std::vector<std::pair<std::string, Tensor>>& extras);
};

double mse(const Tensor& a, const Tensor& b);

struct AdamConfig {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

/// Adam over a ParamStore's gradient buffers. Names in `frozen` keep their
/// values and accumulate no moments.
class Adam {
public:
    explicit Adam(ParamStore& ps, AdamConfig cfg = {}, std::vector<std::string> frozen = {});

    void step(double lr);
    std::size_t steps_taken() const { return t_; }

    /// Moment tensors and step counter, named for checkpoint extras; loading
    /// them makes a resumed run bit-identical to an uninterrupted one.
    std::vector<std::pair<std::string, Tensor>> state_extras() const;
    void load_state_extras(const std::vector<std::pair<std::string, Tensor>>& extras);

private:
    ParamStore* ps_;
    AdamConfig cfg_;
    std::unordered_set<std::string> frozen_;
    std::vector<Tensor> m_, v_;
    std::size_t t_ = 0;
};

/// lr0 * decay^floor(epoch / every)
double step_lr(double lr0, std::size_t epoch, double decay = 0.9, std::size_t every = 100);

struct TrainConfig {
    std::size_t epochs = 200;
    std::size_t start_epoch = 0;
    std::size_t batch_size = 10;
    double lr = 1e-3;
    double lr_decay = 0.9;
    std::size_t lr_every = 100;
    bool teacher_forced = false;
    double noise = 0.0; // training-noise variance, applied in normalized space
    bool resample_noise = false; // false: one fixed corruption per sim; true: fresh per epoch
    std::uint64_t noise_seed = 1234;
    std::uint64_t shuffle_seed = 77;
    std::size_t eval_every = 0;      // 0: test MSE only after the last epoch
    std::string metrics_path;        // csv; appended to when resuming
    std::string checkpoint_path;     // rewritten every checkpoint_every epochs and at the end
    std::size_t checkpoint_every = 0;
    bool verbose = false;
};

struct EpochStats {
    std::size_t epoch = 0;
    double lr = 0.0;
    double train_loss = 0.0; // normalized space, mean over sims of the summed per-step MSE
    double test_mse = 0.0;   // physical space, NaN on epochs where eval was skipped
    double wall_ms = 0.0;
};

struct TrainResult {
    std::vector<EpochStats> history;
    Normalizer norm;
    double final_test_mse = 0.0;
};

using RolloutFn = std::function<Tensor(const Tensor& window, std::size_t t_out)>;

/// Autoregressive evaluation over a whole dataset: windows are normalized,
/// corrupted with per-sim noise (inputs only), rolled out, denormalized and
/// scored against the clean targets.
double eval_dataset_mse(const RolloutFn& fn, const TrajectoryDataset& ds, std::size_t t_in,
                        std::size_t t_out, const Normalizer& norm, double noise_variance,
                        std::uint64_t noise_seed);

/// Full training loop. Training noise corrupts inputs and targets; the
/// adam_state extras (if non-null) are loaded before and overwritten after,
/// which is what makes checkpoint resume exact.
TrainResult train(Model& m, const TrajectoryDataset& train_ds, const TrajectoryDataset& test_ds,
                  const TrainConfig& tc,
                  std::vector<std::pair<std::string, Tensor>>* adam_state = nullptr);

} // namespace spectralseq
