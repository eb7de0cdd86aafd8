#pragma once

#include <json.hpp>

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "spectralseq/layers.hpp"

namespace spectralseq {

enum class ArchKind { FNO2d, FRNN, CRNN, RNN };

std::string arch_name(ArchKind a);
ArchKind arch_from_name(const std::string& s);

struct ModelConfig {
    ArchKind arch = ArchKind::FNO2d;
    std::size_t width = 32;
    std::size_t m1 = 16, m2 = 16;
    std::size_t n_layers = 4;      // stacked Fourier layers (FNO) / RNN core layers (CRNN)
    std::size_t n_cells = 2;       // stacked cells (FRNN / RNN)
    std::size_t t_in = 20, t_out = 30, step = 1;
    std::size_t nx = 64, ny = 64;
    double x0 = 0.0, x1 = 1.0, y0 = 0.0, y1 = 1.0;
    std::size_t crnn_hidden = 256;
    bool zero_spectral_init = false;
    bool freeze_spectral = false;

    void validate() const;
    GridCoords grid() const { return GridCoords{nx, ny, x0, x1, y0, y1}; }
};

nlohmann::json config_to_json(const ModelConfig& c);
ModelConfig config_from_json(const nlohmann::json& j);

struct Model {
    ModelConfig cfg;
    ParamStore params;
};

Model build_fno2d(const ModelConfig& cfg, std::uint64_t seed);
Model build_frnn(const ModelConfig& cfg, std::uint64_t seed);
Model build_crnn(const ModelConfig& cfg, std::uint64_t seed);
Model build_rnn(const ModelConfig& cfg, std::uint64_t seed);
Model build_model(const ModelConfig& cfg, std::uint64_t seed);

std::size_t count_params(const Model& m);

/// Names of the spectral weight tensors (Rx/Rh/R); what freeze_spectral
/// excludes from optimization.
std::vector<std::string> spectral_param_names(const Model& m);

/// Rollout loss graph for one batch: autoregressive (default) or
/// teacher-forced. window (B, nx, ny, t_in), targets (B, nx, ny, t_out),
/// both in normalized space. Returns the scalar loss node, the sum over
/// the t_out steps of the per-step MSE.
int build_rollout_loss(Graph& g, const Model& m, const Tensor& window, const Tensor& targets,
                       bool teacher_forced);

/// Inference rollout: predicts t_out frames from the input window,
/// feeding predictions back. Output (B, nx, ny, t_out).
Tensor rollout(const Model& m, const Tensor& window, std::size_t t_out);

/// Protocol drivers, exposed for testing against stub models.
/// step: (B, nx, ny, t_in) window -> (B, nx, ny, 1) prediction.
Tensor rollout_window(const std::function<Tensor(const Tensor&)>& step, const Tensor& window,
                      std::size_t t_out);
/// feed: one (B, nx, ny, 1) frame -> (B, nx, ny, 1) prediction; the callee
/// owns any recurrent state. Frames of the window are fed one at a time,
/// warm-up outputs are discarded except the last.
Tensor rollout_recurrent(const std::function<Tensor(const Tensor&)>& feed, const Tensor& window,
                         std::size_t t_out);

/// Checkpoint container: versioned magic, JSON config + epoch, then
/// (name, shape, dtype, little-endian payload) entries. Extra entries ride
/// along untouched (normalizer statistics and the like).
void save_checkpoint(const std::string& path, const Model& m,
                     const std::vector<std::pair<std::string, Tensor>>& extras, std::size_t epoch);
Model load_checkpoint(const std::string& path, std::vector<std::pair<std::string, Tensor>>* extras,
                      std::size_t* epoch);

} // namespace spectralseq
