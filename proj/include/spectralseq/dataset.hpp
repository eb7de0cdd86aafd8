#pragma once

#include <json.hpp>

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "spectralseq/rng.hpp"
#include "spectralseq/tensor.hpp"

namespace spectralseq {

/// A set of simulated trajectories on a fixed grid.
/// frames is (n_sims, n_frames, nx, ny); meta carries provenance
/// (case name, solver parameters, seed) and travels with the file.
struct TrajectoryDataset {
    Tensor frames{std::vector<std::size_t>{1, 1, 1, 1}};
    nlohmann::json meta = nlohmann::json::object();

    std::size_t n_sims() const { return frames.dim(0); }
    std::size_t n_frames() const { return frames.dim(1); }
    std::size_t nx() const { return frames.dim(2); }
    std::size_t ny() const { return frames.dim(3); }
};

void save_dataset(const std::string& path, const TrajectoryDataset& ds);
TrajectoryDataset load_dataset(const std::string& path);

/// First n_train sims / remaining sims, in stored order.
std::pair<TrajectoryDataset, TrajectoryDataset> split_dataset(const TrajectoryDataset& ds,
                                                              std::size_t n_train);

/// x + Gaussian noise of the given variance, elementwise. variance == 0
/// returns x unchanged and consumes no draws; variance < 0 is an error.
Tensor add_noise(const Tensor& x, double variance, Rng& rng);

/// Seed for the noise stream of one sim in one epoch. Pinning the stream
/// to (sim, epoch) makes corruption independent of batch composition.
std::uint64_t noise_stream_seed(std::uint64_t base, std::size_t sim, std::size_t epoch);

/// Shuffled sim indices for one epoch, cut into batches (last one may be
/// short). The order depends only on (seed, epoch).
std::vector<std::vector<std::size_t>> epoch_batches(std::size_t n_sims, std::size_t batch_size,
                                                    std::uint64_t seed, std::size_t epoch);

struct Batch {
    Tensor window;  // (B, nx, ny, t_in)
    Tensor targets; // (B, nx, ny, t_out)
    std::vector<std::size_t> sims;
};

/// Gathers sims from a (n_sims, n_frames, nx, ny) tensor into model-layout
/// windows: frames [0, t_in) and targets [t_in, t_in + t_out).
Batch make_batch(const Tensor& frames, const std::vector<std::size_t>& sims, std::size_t t_in,
                 std::size_t t_out);

} // namespace spectralseq
