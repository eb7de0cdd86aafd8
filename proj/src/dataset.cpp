#include "spectralseq/dataset.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include "spectralseq/errors.hpp"

static_assert(std::endian::native == std::endian::little,
              "on-disk formats are little-endian; big-endian hosts unsupported");

namespace spectralseq {

namespace {

constexpr char kMagic[8] = {'F', 'R', 'N', 'N', 'D', 'A', 'T', 'A'};
constexpr std::uint8_t kVersion = 1;
constexpr std::uint64_t kDtypeFloat64 = 1;

void write_u64(std::ostream& os, std::uint64_t v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

std::uint64_t read_u64(std::istream& is) {
    std::uint64_t v = 0;
    is.read(reinterpret_cast<char*>(&v), sizeof v);
    if (!is) throw TruncationError("dataset ended mid-field");
    return v;
}

} // namespace

void save_dataset(const std::string& path, const TrajectoryDataset& ds) {
    if (ds.frames.rank() != 4)
        throw ShapeError("dataset frames must be rank 4, got " + ds.frames.shape_str());
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("cannot open dataset for writing: " + path);
    os.write(kMagic, sizeof kMagic);
    os.put(char(kVersion));
    for (std::size_t d = 0; d < 4; ++d) write_u64(os, ds.frames.dim(d));
    write_u64(os, kDtypeFloat64);
    os.write(reinterpret_cast<const char*>(ds.frames.data()),
             std::streamsize(ds.frames.size() * sizeof(double)));
    std::string meta = ds.meta.dump();
    write_u64(os, meta.size());
    os.write(meta.data(), std::streamsize(meta.size()));
    if (!os) throw IoError("write failed for dataset: " + path);
}

TrajectoryDataset load_dataset(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open dataset: " + path);
    char magic[sizeof kMagic];
    is.read(magic, sizeof magic);
    if (!is) throw TruncationError("dataset shorter than its magic");
    if (std::memcmp(magic, kMagic, sizeof magic) != 0)
        throw FormatError("not a dataset file: " + path);
    int version = is.get();
    if (version == std::char_traits<char>::eof()) throw TruncationError("dataset has no version byte");
    if (version != kVersion)
        throw FormatError("unsupported dataset version " + std::to_string(version));
    std::vector<std::size_t> dims(4);
    for (auto& d : dims) {
        d = read_u64(is);
        if (d == 0) throw FormatError("dataset has a zero dimension");
    }
    if (read_u64(is) != kDtypeFloat64) throw FormatError("dataset has unknown dtype tag");
    TrajectoryDataset ds;
    ds.frames = Tensor(dims);
    is.read(reinterpret_cast<char*>(ds.frames.data()),
            std::streamsize(ds.frames.size() * sizeof(double)));
    if (!is) throw TruncationError("dataset payload is shorter than its dims declare");
    std::uint64_t meta_len = read_u64(is);
    std::string meta(meta_len, '\0');
    is.read(meta.data(), std::streamsize(meta_len));
    if (!is) throw TruncationError("dataset ended inside its metadata");
    try {
        ds.meta = nlohmann::json::parse(meta);
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("dataset metadata is not valid JSON: ") + e.what());
    }
    return ds;
}

std::pair<TrajectoryDataset, TrajectoryDataset> split_dataset(const TrajectoryDataset& ds,
                                                              std::size_t n_train) {
    if (n_train == 0 || n_train >= ds.n_sims())
        throw ConfigError("split needs 0 < n_train < n_sims, got " + std::to_string(n_train) +
                          " of " + std::to_string(ds.n_sims()));
    std::size_t per_sim = ds.n_frames() * ds.nx() * ds.ny();
    TrajectoryDataset a, b;
    a.meta = ds.meta;
    b.meta = ds.meta;
    a.frames = Tensor({n_train, ds.n_frames(), ds.nx(), ds.ny()});
    b.frames = Tensor({ds.n_sims() - n_train, ds.n_frames(), ds.nx(), ds.ny()});
    std::memcpy(a.frames.data(), ds.frames.data(), n_train * per_sim * sizeof(double));
    std::memcpy(b.frames.data(), ds.frames.data() + n_train * per_sim,
                (ds.n_sims() - n_train) * per_sim * sizeof(double));
    return {std::move(a), std::move(b)};
}

Tensor add_noise(const Tensor& x, double variance, Rng& rng) {
    if (variance < 0.0) throw ConfigError("noise variance must be >= 0");
    Tensor y = x;
    if (variance == 0.0) return y;
    double sd = std::sqrt(variance);
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += rng.normal(0.0, sd);
    return y;
}

std::uint64_t noise_stream_seed(std::uint64_t base, std::size_t sim, std::size_t epoch) {
    std::uint64_t z = base + 0x9E3779B97F4A7C15ull * (sim + 1) + 0xBF58476D1CE4E5B9ull * epoch;
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ull;
    z ^= z >> 27;
    return z;
}

std::vector<std::vector<std::size_t>> epoch_batches(std::size_t n_sims, std::size_t batch_size,
                                                    std::uint64_t seed, std::size_t epoch) {
    if (batch_size == 0) throw ConfigError("batch size must be >= 1");
    if (n_sims == 0) throw ConfigError("no sims to batch");
    std::vector<std::size_t> order(n_sims);
    for (std::size_t i = 0; i < n_sims; ++i) order[i] = i;
    Rng rng(noise_stream_seed(seed, 0, epoch));
    rng.shuffle(order);
    std::vector<std::vector<std::size_t>> batches;
    for (std::size_t at = 0; at < n_sims; at += batch_size) {
        std::size_t end = std::min(at + batch_size, n_sims);
        batches.emplace_back(order.begin() + long(at), order.begin() + long(end));
    }
    return batches;
}

Batch make_batch(const Tensor& frames, const std::vector<std::size_t>& sims, std::size_t t_in,
                 std::size_t t_out) {
    if (frames.rank() != 4) throw ShapeError("frames must be (n_sims, n_frames, nx, ny)");
    std::size_t nf = frames.dim(1), nx = frames.dim(2), ny = frames.dim(3);
    if (t_in + t_out > nf)
        throw ConfigError("t_in + t_out = " + std::to_string(t_in + t_out) + " exceeds the " +
                          std::to_string(nf) + " frames per sim");
    if (sims.empty()) throw ConfigError("cannot gather an empty batch");
    std::size_t b = sims.size();
    Batch out{Tensor({b, nx, ny, t_in}), Tensor({b, nx, ny, t_out}), sims};
    for (std::size_t s = 0; s < b; ++s) {
        if (sims[s] >= frames.dim(0)) throw ShapeError("sim index out of range");
        for (std::size_t i = 0; i < nx; ++i)
            for (std::size_t j = 0; j < ny; ++j) {
                for (std::size_t t = 0; t < t_in; ++t)
                    out.window(s, i, j, t) = frames(sims[s], t, i, j);
                for (std::size_t t = 0; t < t_out; ++t)
                    out.targets(s, i, j, t) = frames(sims[s], t_in + t, i, j);
            }
    }
    return out;
}

} // namespace spectralseq
