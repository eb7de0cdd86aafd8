#include "spectralseq/models.hpp"

#include <json.hpp>

#include <bit>
#include <cmath>
#include <cstring>
#include <deque>
#include <fstream>

#include "spectralseq/rng.hpp"

static_assert(std::endian::native == std::endian::little,
              "on-disk formats are little-endian; big-endian hosts unsupported");

namespace spectralseq {

using nlohmann::json;

std::string arch_name(ArchKind a) {
    switch (a) {
        case ArchKind::FNO2d: return "fno";
        case ArchKind::FRNN: return "frnn";
        case ArchKind::CRNN: return "crnn";
        case ArchKind::RNN: return "rnn";
    }
    return "?";
}

ArchKind arch_from_name(const std::string& s) {
    if (s == "fno" || s == "fno2d") return ArchKind::FNO2d;
    if (s == "frnn") return ArchKind::FRNN;
    if (s == "crnn") return ArchKind::CRNN;
    if (s == "rnn") return ArchKind::RNN;
    throw ConfigError("unknown architecture: " + s);
}

void ModelConfig::validate() const {
    if (step != 1) throw ConfigError("step size must be 1");
    if (t_in < 1 || t_out < 1) throw ConfigError("t_in and t_out must be >= 1");
    if (width < 1) throw ConfigError("width must be >= 1");
    if (nx < 2 || ny < 2) throw ConfigError("grid must be at least 2x2");
    if (arch == ArchKind::FNO2d && n_layers < 1)
        throw ConfigError("need at least one fourier layer");
    if (arch == ArchKind::FNO2d || arch == ArchKind::FRNN) {
        if (m1 < 1 || m2 < 1) throw ConfigError("mode counts must be >= 1");
        if (m1 > nx / 2 || m2 > ny / 2 + 1)
            throw ConfigError("modes (" + std::to_string(m1) + "," + std::to_string(m2) +
                              ") exceed Nyquist for grid " + std::to_string(nx) + "x" +
                              std::to_string(ny));
    }
    if (arch == ArchKind::FRNN || arch == ArchKind::RNN) {
        if (n_cells < 1) throw ConfigError("need at least one cell");
        if (width < 3) throw ConfigError("recurrent width must be >= 3 for hidden-state init");
    }
    if (arch == ArchKind::CRNN) {
        if (nx != ny) throw ConfigError("crnn expects a square grid");
        std::size_t s = nx;
        while (s > 4 && s % 2 == 0) s /= 2;
        if (s != 4) throw ConfigError("crnn grid must be 4 * 2^k, got " + std::to_string(nx));
        if (n_layers < 1) throw ConfigError("need at least one recurrent layer");
    }
}

namespace {

void init_xavier(Rng& rng, Tensor& t, std::size_t fan_in, std::size_t fan_out) {
    double limit = std::sqrt(6.0 / double(fan_in + fan_out));
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = rng.uniform(-limit, limit);
}

// Reference spectral-weight convention: uniform in [0, 1/(c_in*c_out))
// on both the real and imaginary components.
void init_spectral(Rng& rng, Tensor& t, std::size_t c_in, std::size_t c_out, bool zero) {
    if (zero) {
        t.fill(0.0);
        return;
    }
    double scale = 1.0 / (double(c_in) * double(c_out));
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = rng.uniform(0.0, scale);
}

void add_pointwise(ParamStore& ps, Rng& rng, const std::string& name, std::size_t c_in,
                   std::size_t c_out) {
    Tensor w({c_in, c_out});
    init_xavier(rng, w, c_in, c_out);
    ps.add(name + ".w", std::move(w));
    ps.add(name + ".b", Tensor({c_out}, 0.0));
}

void add_spectral(ParamStore& ps, Rng& rng, const std::string& name, std::size_t m1,
                  std::size_t m2, std::size_t c_in, std::size_t c_out, bool zero) {
    Tensor r({2, m1, m2, c_in, c_out, 2});
    init_spectral(rng, r, c_in, c_out, zero);
    ps.add(name, std::move(r));
}

void add_conv(ParamStore& ps, Rng& rng, const std::string& name, std::size_t k, std::size_t c_in,
              std::size_t c_out) {
    Tensor w({k, k, c_in, c_out});
    init_xavier(rng, w, k * k * c_in, k * k * c_out);
    ps.add(name + ".k", std::move(w));
    ps.add(name + ".b", Tensor({c_out}, 0.0));
}

// CRNN spatial reduction: stride-2 kernel-5 convolutions from the input
// grid down to 4x4, channel schedule 16/32/64 then 64 repeated.
std::vector<std::size_t> crnn_channels(std::size_t nx) {
    std::vector<std::size_t> ch;
    std::size_t s = nx, c = 16;
    while (s > 4) {
        ch.push_back(std::min<std::size_t>(c, 64));
        c *= 2;
        s /= 2;
    }
    return ch;
}

constexpr std::size_t kProjWidth = 128;
constexpr std::size_t kConvK = 5;

} // namespace

Model build_fno2d(const ModelConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    if (cfg.arch != ArchKind::FNO2d) throw ConfigError("build_fno2d: wrong arch in config");
    Model m{cfg, {}};
    Rng rng(seed);
    add_pointwise(m.params, rng, "lift", cfg.t_in + 2, cfg.width);
    for (std::size_t l = 0; l < cfg.n_layers; ++l) {
        std::string base = "fl" + std::to_string(l);
        add_spectral(m.params, rng, base + ".r", cfg.m1, cfg.m2, cfg.width, cfg.width,
                     cfg.zero_spectral_init);
        add_pointwise(m.params, rng, base, cfg.width, cfg.width);
    }
    add_pointwise(m.params, rng, "proj1", cfg.width, kProjWidth);
    add_pointwise(m.params, rng, "proj2", kProjWidth, 1);
    return m;
}

Model build_frnn(const ModelConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    if (cfg.arch != ArchKind::FRNN) throw ConfigError("build_frnn: wrong arch in config");
    Model m{cfg, {}};
    Rng rng(seed);
    add_pointwise(m.params, rng, "lift", 3, cfg.width);
    for (std::size_t c = 0; c < cfg.n_cells; ++c) {
        std::string base = "cell" + std::to_string(c);
        add_spectral(m.params, rng, base + ".rx", cfg.m1, cfg.m2, cfg.width, cfg.width,
                     cfg.zero_spectral_init);
        add_spectral(m.params, rng, base + ".rh", cfg.m1, cfg.m2, cfg.width, cfg.width,
                     cfg.zero_spectral_init);
        add_pointwise(m.params, rng, base + ".x", cfg.width, cfg.width);
        add_pointwise(m.params, rng, base + ".h", cfg.width, cfg.width);
    }
    add_pointwise(m.params, rng, "proj", cfg.width, 1);
    return m;
}

Model build_rnn(const ModelConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    if (cfg.arch != ArchKind::RNN) throw ConfigError("build_rnn: wrong arch in config");
    Model m{cfg, {}};
    Rng rng(seed);
    add_pointwise(m.params, rng, "lift", 3, cfg.width);
    for (std::size_t c = 0; c < cfg.n_cells; ++c) {
        std::string base = "cell" + std::to_string(c);
        add_pointwise(m.params, rng, base + ".x", cfg.width, cfg.width);
        add_pointwise(m.params, rng, base + ".h", cfg.width, cfg.width);
    }
    add_pointwise(m.params, rng, "proj", cfg.width, 1);
    return m;
}

Model build_crnn(const ModelConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    if (cfg.arch != ArchKind::CRNN) throw ConfigError("build_crnn: wrong arch in config");
    Model m{cfg, {}};
    Rng rng(seed);
    std::vector<std::size_t> ch = crnn_channels(cfg.nx);
    std::size_t c_prev = 1;
    for (std::size_t i = 0; i < ch.size(); ++i) {
        add_conv(m.params, rng, "enc" + std::to_string(i), kConvK, c_prev, ch[i]);
        c_prev = ch[i];
    }
    std::size_t flat = 4 * 4 * c_prev;
    add_pointwise(m.params, rng, "enc_fc", flat, cfg.crnn_hidden);
    for (std::size_t l = 0; l < cfg.n_layers; ++l) {
        std::string base = "rnn" + std::to_string(l);
        add_pointwise(m.params, rng, base + ".x", cfg.crnn_hidden, cfg.crnn_hidden);
        add_pointwise(m.params, rng, base + ".h", cfg.crnn_hidden, cfg.crnn_hidden);
    }
    add_pointwise(m.params, rng, "dec_fc", cfg.crnn_hidden, flat);
    for (std::size_t i = 0; i < ch.size(); ++i) {
        std::size_t c_out = i + 1 < ch.size() ? ch[ch.size() - 2 - i] : 1;
        add_conv(m.params, rng, "dec" + std::to_string(i), kConvK, c_prev, c_out);
        c_prev = c_out;
    }
    return m;
}

Model build_model(const ModelConfig& cfg, std::uint64_t seed) {
    switch (cfg.arch) {
        case ArchKind::FNO2d: return build_fno2d(cfg, seed);
        case ArchKind::FRNN: return build_frnn(cfg, seed);
        case ArchKind::CRNN: return build_crnn(cfg, seed);
        case ArchKind::RNN: return build_rnn(cfg, seed);
    }
    throw ConfigError("build_model: bad arch");
}

std::size_t count_params(const Model& m) { return m.params.scalar_count(); }

std::vector<std::string> spectral_param_names(const Model& m) {
    std::vector<std::string> names;
    if (m.cfg.arch == ArchKind::FNO2d)
        for (std::size_t l = 0; l < m.cfg.n_layers; ++l) names.push_back("fl" + std::to_string(l) + ".r");
    if (m.cfg.arch == ArchKind::FRNN)
        for (std::size_t c = 0; c < m.cfg.n_cells; ++c) {
            names.push_back("cell" + std::to_string(c) + ".rx");
            names.push_back("cell" + std::to_string(c) + ".rh");
        }
    return names;
}

namespace {

Tensor frame_slice(const Tensor& t, std::size_t k) {
    std::size_t b = t.dim(0), nx = t.dim(1), ny = t.dim(2), nt = t.dim(3);
    Tensor f({b, nx, ny, 1});
    for (std::size_t p = 0; p < b * nx * ny; ++p) f[p] = t[p * nt + k];
    return f;
}

// Recurrent step state: node ids of the per-cell hidden states.
struct RecurrentState {
    std::vector<int> hidden;
};

int frnn_like_feed(Graph& g, const Model& m, RecurrentState& st, int frame, int coords,
                   bool spectral) {
    const ModelConfig& c = m.cfg;
    int x = g.concat_c({frame, coords});
    int y = g.pointwise_linear(x, g.param("lift.w"), g.param("lift.b"));
    for (std::size_t i = 0; i < c.n_cells; ++i) {
        std::string base = "cell" + std::to_string(i);
        kernels::Act act = (i + 1 == c.n_cells) ? kernels::Act::Tanh : kernels::Act::Relu;
        CellOut out{};
        if (spectral)
            out = frnn_cell_step(g, y, st.hidden[i], g.param(base + ".rx"), g.param(base + ".rh"),
                                 g.param(base + ".x.w"), g.param(base + ".x.b"),
                                 g.param(base + ".h.w"), g.param(base + ".h.b"), c.m1, c.m2, act);
        else
            out = rnn_cell_step(g, y, st.hidden[i], g.param(base + ".x.w"), g.param(base + ".x.b"),
                                g.param(base + ".h.w"), g.param(base + ".h.b"), act);
        st.hidden[i] = out.h;
        y = out.y;
    }
    return g.pointwise_linear(y, g.param("proj.w"), g.param("proj.b"));
}

int crnn_feed(Graph& g, const Model& m, RecurrentState& st, int frame) {
    const ModelConfig& c = m.cfg;
    std::vector<std::size_t> ch = crnn_channels(c.nx);
    int x = frame;
    for (std::size_t i = 0; i < ch.size(); ++i) {
        std::string base = "enc" + std::to_string(i);
        x = g.activation(g.conv2d(x, g.param(base + ".k"), g.param(base + ".b"), 2, 2),
                         kernels::Act::Relu);
    }
    std::size_t batch = g.value(frame).dim(0);
    std::size_t flat = g.value(x).size() / batch;
    x = g.reshape(x, {batch, 1, 1, flat});
    x = g.activation(g.pointwise_linear(x, g.param("enc_fc.w"), g.param("enc_fc.b")),
                     kernels::Act::Relu);
    for (std::size_t l = 0; l < c.n_layers; ++l) {
        std::string base = "rnn" + std::to_string(l);
        kernels::Act act = (l + 1 == c.n_layers) ? kernels::Act::Tanh : kernels::Act::Relu;
        CellOut out = rnn_cell_step(g, x, st.hidden[l], g.param(base + ".x.w"),
                                    g.param(base + ".x.b"), g.param(base + ".h.w"),
                                    g.param(base + ".h.b"), act);
        st.hidden[l] = out.h;
        x = out.y;
    }
    x = g.activation(g.pointwise_linear(x, g.param("dec_fc.w"), g.param("dec_fc.b")),
                     kernels::Act::Relu);
    std::size_t side = 4, c_first = flat / 16;
    x = g.reshape(x, {batch, side, side, c_first});
    for (std::size_t i = 0; i < ch.size(); ++i) {
        std::string base = "dec" + std::to_string(i);
        x = g.conv_t2d(x, g.param(base + ".k"), g.param(base + ".b"), 2, 2, 1);
        if (i + 1 < ch.size()) x = g.activation(x, kernels::Act::Relu);
    }
    return x;
}

int recurrent_feed(Graph& g, const Model& m, RecurrentState& st, int frame, int coords) {
    switch (m.cfg.arch) {
        case ArchKind::FRNN: return frnn_like_feed(g, m, st, frame, coords, true);
        case ArchKind::RNN: return frnn_like_feed(g, m, st, frame, coords, false);
        case ArchKind::CRNN: return crnn_feed(g, m, st, frame);
        default: throw ConfigError("not a recurrent architecture");
    }
}

RecurrentState recurrent_init(Graph& g, const Model& m, const Tensor& window) {
    RecurrentState st;
    if (m.cfg.arch == ArchKind::CRNN) {
        for (std::size_t l = 0; l < m.cfg.n_layers; ++l)
            st.hidden.push_back(g.input(Tensor({window.dim(0), 1, 1, m.cfg.crnn_hidden}, 0.0)));
    } else {
        Tensor h0 = init_hidden(window, m.cfg.width, m.cfg.grid());
        for (std::size_t c = 0; c < m.cfg.n_cells; ++c) st.hidden.push_back(g.input(h0));
    }
    return st;
}

int fno_predict(Graph& g, const Model& m, const std::vector<int>& frames, int coords) {
    const ModelConfig& c = m.cfg;
    std::vector<int> parts(frames.end() - long(c.t_in), frames.end());
    parts.push_back(coords);
    int x = g.concat_c(parts);
    x = g.pointwise_linear(x, g.param("lift.w"), g.param("lift.b"));
    for (std::size_t l = 0; l < c.n_layers; ++l) {
        std::string base = "fl" + std::to_string(l);
        kernels::Act act = (l + 1 == c.n_layers) ? kernels::Act::Identity : kernels::Act::Relu;
        x = fourier_layer(g, x, g.param(base + ".r"), g.param(base + ".w"), g.param(base + ".b"),
                          c.m1, c.m2, act);
    }
    x = g.activation(g.pointwise_linear(x, g.param("proj1.w"), g.param("proj1.b")),
                     kernels::Act::Relu);
    return g.pointwise_linear(x, g.param("proj2.w"), g.param("proj2.b"));
}

void check_window(const Model& m, const Tensor& window) {
    if (window.rank() != 4 || window.dim(3) != m.cfg.t_in)
        throw ShapeError("window must be (batch, nx, ny, t_in), got " + window.shape_str());
    if (window.dim(1) != m.cfg.nx || window.dim(2) != m.cfg.ny)
        throw ShapeError("window grid " + window.shape_str() + " does not match model (" +
                         std::to_string(m.cfg.nx) + "x" + std::to_string(m.cfg.ny) + ")");
}

} // namespace

int build_rollout_loss(Graph& g, const Model& m, const Tensor& window, const Tensor& targets,
                       bool teacher_forced) {
    check_window(m, window);
    if (targets.rank() != 4 || targets.dim(3) != m.cfg.t_out)
        throw ShapeError("targets must be (batch, nx, ny, t_out), got " + targets.shape_str());
    std::size_t batch = window.dim(0);
    int coords = g.input(m.cfg.grid().coord_channels(batch));
    std::vector<int> losses;

    if (m.cfg.arch == ArchKind::FNO2d) {
        std::vector<int> frames;
        for (std::size_t k = 0; k < m.cfg.t_in; ++k) frames.push_back(g.input(frame_slice(window, k)));
        for (std::size_t k = 0; k < m.cfg.t_out; ++k) {
            int pred = fno_predict(g, m, frames, coords);
            Tensor tk = frame_slice(targets, k);
            losses.push_back(g.mse_loss(pred, tk));
            frames.push_back(teacher_forced ? g.input(std::move(tk)) : pred);
        }
    } else {
        RecurrentState st = recurrent_init(g, m, window);
        int cur = -1;
        for (std::size_t t = 0; t < m.cfg.t_in; ++t)
            cur = recurrent_feed(g, m, st, g.input(frame_slice(window, t)), coords);
        for (std::size_t k = 0; k < m.cfg.t_out; ++k) {
            Tensor tk = frame_slice(targets, k);
            losses.push_back(g.mse_loss(cur, tk));
            if (k + 1 < m.cfg.t_out)
                cur = recurrent_feed(g, m, st,
                                     teacher_forced ? g.input(std::move(tk)) : cur, coords);
        }
    }
    return g.addn(losses);
}

Tensor rollout_window(const std::function<Tensor(const Tensor&)>& step, const Tensor& window,
                      std::size_t t_out) {
    if (window.rank() != 4) throw ShapeError("rollout window must be rank 4");
    std::size_t b = window.dim(0), nx = window.dim(1), ny = window.dim(2), t_in = window.dim(3);
    std::deque<Tensor> frames;
    for (std::size_t k = 0; k < t_in; ++k) frames.push_back(frame_slice(window, k));
    Tensor out({b, nx, ny, t_out});
    for (std::size_t k = 0; k < t_out; ++k) {
        Tensor win({b, nx, ny, t_in});
        for (std::size_t j = 0; j < t_in; ++j) {
            const Tensor& f = frames[j];
            for (std::size_t p = 0; p < b * nx * ny; ++p) win[p * t_in + j] = f[p];
        }
        Tensor pred = step(win);
        if (pred.rank() != 4 || pred.dim(3) != 1 || pred.dim(0) != b)
            throw ShapeError("rollout step must return (batch, nx, ny, 1)");
        for (std::size_t p = 0; p < b * nx * ny; ++p) out[p * t_out + k] = pred[p];
        frames.pop_front();
        frames.push_back(std::move(pred));
    }
    return out;
}

Tensor rollout_recurrent(const std::function<Tensor(const Tensor&)>& feed, const Tensor& window,
                         std::size_t t_out) {
    if (window.rank() != 4) throw ShapeError("rollout window must be rank 4");
    std::size_t b = window.dim(0), nx = window.dim(1), ny = window.dim(2), t_in = window.dim(3);
    Tensor pred({1});
    for (std::size_t t = 0; t < t_in; ++t) pred = feed(frame_slice(window, t));
    Tensor out({b, nx, ny, t_out});
    for (std::size_t k = 0; k < t_out; ++k) {
        if (pred.rank() != 4 || pred.dim(3) != 1 || pred.dim(0) != b)
            throw ShapeError("rollout feed must return (batch, nx, ny, 1)");
        for (std::size_t p = 0; p < b * nx * ny; ++p) out[p * t_out + k] = pred[p];
        if (k + 1 < t_out) pred = feed(pred);
    }
    return out;
}

Tensor rollout(const Model& m, const Tensor& window, std::size_t t_out) {
    check_window(m, window);
    // Evaluation never runs backward, so the const_cast below cannot
    // touch stored gradients.
    Model& mm = const_cast<Model&>(m);
    std::size_t batch = window.dim(0);
    Tensor coords = m.cfg.grid().coord_channels(batch);

    if (m.cfg.arch == ArchKind::FNO2d) {
        auto step = [&](const Tensor& win) {
            Graph g(&mm.params);
            std::vector<int> frames;
            for (std::size_t k = 0; k < m.cfg.t_in; ++k)
                frames.push_back(g.input(frame_slice(win, k)));
            return g.value(fno_predict(g, m, frames, g.input(coords)));
        };
        return rollout_window(step, window, t_out);
    }

    // Recurrent models carry hidden state between steps as plain tensors
    // so each step runs on a fresh single-frame graph.
    std::vector<Tensor> hidden;
    if (m.cfg.arch == ArchKind::CRNN) {
        hidden.assign(m.cfg.n_layers, Tensor({batch, 1, 1, m.cfg.crnn_hidden}, 0.0));
    } else {
        Tensor h0 = init_hidden(window, m.cfg.width, m.cfg.grid());
        hidden.assign(m.cfg.n_cells, h0);
    }
    auto feed = [&](const Tensor& frame) {
        Graph g(&mm.params);
        RecurrentState st;
        for (const Tensor& h : hidden) st.hidden.push_back(g.input(h));
        int pred = recurrent_feed(g, m, st, g.input(frame), g.input(coords));
        for (std::size_t i = 0; i < hidden.size(); ++i) hidden[i] = g.value(st.hidden[i]);
        return g.value(pred);
    };
    return rollout_recurrent(feed, window, t_out);
}

json config_to_json(const ModelConfig& c) {
    return json{{"arch", arch_name(c.arch)}, {"width", c.width},     {"m1", c.m1},
                {"m2", c.m2},                {"n_layers", c.n_layers}, {"n_cells", c.n_cells},
                {"t_in", c.t_in},            {"t_out", c.t_out},     {"step", c.step},
                {"nx", c.nx},                {"ny", c.ny},           {"x0", c.x0},
                {"x1", c.x1},                {"y0", c.y0},           {"y1", c.y1},
                {"crnn_hidden", c.crnn_hidden},
                {"zero_spectral_init", c.zero_spectral_init},
                {"freeze_spectral", c.freeze_spectral}};
}

ModelConfig config_from_json(const json& j) {
    ModelConfig c;
    c.arch = arch_from_name(j.at("arch").get<std::string>());
    c.width = j.at("width").get<std::size_t>();
    c.m1 = j.at("m1").get<std::size_t>();
    c.m2 = j.at("m2").get<std::size_t>();
    c.n_layers = j.at("n_layers").get<std::size_t>();
    c.n_cells = j.at("n_cells").get<std::size_t>();
    c.t_in = j.at("t_in").get<std::size_t>();
    c.t_out = j.at("t_out").get<std::size_t>();
    c.step = j.at("step").get<std::size_t>();
    c.nx = j.at("nx").get<std::size_t>();
    c.ny = j.at("ny").get<std::size_t>();
    c.x0 = j.at("x0").get<double>();
    c.x1 = j.at("x1").get<double>();
    c.y0 = j.at("y0").get<double>();
    c.y1 = j.at("y1").get<double>();
    c.crnn_hidden = j.at("crnn_hidden").get<std::size_t>();
    c.zero_spectral_init = j.at("zero_spectral_init").get<bool>();
    c.freeze_spectral = j.at("freeze_spectral").get<bool>();
    return c;
}

namespace {

constexpr char kCkptMagic[9] = {'F', 'R', 'N', 'N', 'C', 'K', 'P', 'T', '\x01'};

void write_u64(std::ostream& os, std::uint64_t v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

std::uint64_t read_u64(std::istream& is) {
    std::uint64_t v = 0;
    is.read(reinterpret_cast<char*>(&v), sizeof v);
    if (!is) throw TruncationError("checkpoint ended mid-field");
    return v;
}

void write_entry(std::ostream& os, const std::string& name, const Tensor& t) {
    write_u64(os, name.size());
    os.write(name.data(), std::streamsize(name.size()));
    write_u64(os, t.rank());
    for (std::size_t d = 0; d < t.rank(); ++d) write_u64(os, t.dim(d));
    write_u64(os, 1); // dtype tag: float64
    os.write(reinterpret_cast<const char*>(t.data()), std::streamsize(t.size() * sizeof(double)));
}

std::pair<std::string, Tensor> read_entry(std::istream& is) {
    std::uint64_t name_len = read_u64(is);
    if (name_len > 4096) throw FormatError("checkpoint entry name is implausibly long");
    std::string name(name_len, '\0');
    is.read(name.data(), std::streamsize(name_len));
    std::uint64_t rank = read_u64(is);
    if (rank == 0 || rank > 8) throw FormatError("checkpoint entry has bad rank");
    std::vector<std::size_t> dims(rank);
    for (auto& d : dims) d = read_u64(is);
    std::uint64_t dtype = read_u64(is);
    if (dtype != 1) throw FormatError("checkpoint entry has unknown dtype tag");
    Tensor t(dims);
    is.read(reinterpret_cast<char*>(t.data()), std::streamsize(t.size() * sizeof(double)));
    if (!is) throw TruncationError("checkpoint ended mid-entry: " + name);
    return {std::move(name), std::move(t)};
}

} // namespace

void save_checkpoint(const std::string& path, const Model& m,
                     const std::vector<std::pair<std::string, Tensor>>& extras,
                     std::size_t epoch) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("cannot open checkpoint for writing: " + path);
    os.write(kCkptMagic, sizeof kCkptMagic);
    json header{{"config", config_to_json(m.cfg)}, {"epoch", epoch}};
    std::string hs = header.dump();
    write_u64(os, hs.size());
    os.write(hs.data(), std::streamsize(hs.size()));
    write_u64(os, m.params.size() + extras.size());
    for (std::size_t i = 0; i < m.params.size(); ++i) {
        const auto& e = m.params.entry(i);
        write_entry(os, e.name, e.value);
    }
    for (const auto& [name, t] : extras) write_entry(os, name, t);
    if (!os) throw IoError("write failed for checkpoint: " + path);
}

Model load_checkpoint(const std::string& path, std::vector<std::pair<std::string, Tensor>>* extras,
                      std::size_t* epoch) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open checkpoint: " + path);
    char magic[sizeof kCkptMagic];
    is.read(magic, sizeof magic);
    if (!is) throw TruncationError("checkpoint shorter than its magic");
    if (std::memcmp(magic, kCkptMagic, sizeof magic) != 0)
        throw FormatError("not a checkpoint file: " + path);
    std::uint64_t hlen = read_u64(is);
    std::string hs(hlen, '\0');
    is.read(hs.data(), std::streamsize(hlen));
    if (!is) throw TruncationError("checkpoint ended inside its header");
    json header;
    try {
        header = json::parse(hs);
    } catch (const json::exception& e) {
        throw FormatError(std::string("checkpoint header is not valid JSON: ") + e.what());
    }
    ModelConfig cfg = config_from_json(header.at("config"));
    if (epoch) *epoch = header.at("epoch").get<std::size_t>();

    Model m = build_model(cfg, 0);
    std::uint64_t n = read_u64(is);
    std::size_t matched = 0;
    for (std::uint64_t i = 0; i < n; ++i) {
        auto [name, t] = read_entry(is);
        int id = m.params.find(name);
        if (id >= 0) {
            ParamStore::Entry& e = m.params.entry(std::size_t(id));
            if (!e.value.same_shape(t))
                throw FormatError("checkpoint entry " + name + " has shape " + t.shape_str() +
                                  ", model expects " + e.value.shape_str());
            e.value = std::move(t);
            ++matched;
        } else if (extras) {
            extras->emplace_back(std::move(name), std::move(t));
        }
    }
    if (matched != m.params.size())
        throw FormatError("checkpoint is missing " + std::to_string(m.params.size() - matched) +
                          " model parameter(s)");
    return m;
}

} // namespace spectralseq
