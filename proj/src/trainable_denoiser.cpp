#include "padam/trainable_denoiser.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "padam/errors.hpp"
#include "padam/rng.hpp"

namespace padam {

namespace {

double silu(double x) { return x / (1.0 + std::exp(-x)); }

double silu_prime(double x) {
    const double s = 1.0 / (1.0 + std::exp(-x));
    return s * (1.0 + x * (1.0 - s));
}

// y = W x + b, W row-major [n_out][n_in].
void affine(const double* w, const double* b, const double* x, double* y, int n_out, int n_in) {
    for (int o = 0; o < n_out; ++o) {
        const double* row = w + static_cast<std::size_t>(o) * n_in;
        double acc = b[o];
        for (int i = 0; i < n_in; ++i) acc += row[i] * x[i];
        y[o] = acc;
    }
}

// dx += W^T dy; dW += dy x^T; db += dy.
void affine_backward(const double* w, const double* x, const double* dy, double* dx, double* dw,
                     double* db, int n_out, int n_in) {
    for (int o = 0; o < n_out; ++o) {
        const double g = dy[o];
        if (db) db[o] += g;
        const double* row = w + static_cast<std::size_t>(o) * n_in;
        double* grow = dw ? dw + static_cast<std::size_t>(o) * n_in : nullptr;
        for (int i = 0; i < n_in; ++i) {
            if (grow) grow[i] += g * x[i];
            if (dx) dx[i] += row[i] * g;
        }
    }
}

} // namespace

double edm_lambda(double sigma, double sigma_data) {
    const double p = sigma * sigma_data;
    return (sigma * sigma + sigma_data * sigma_data) / (p * p);
}

// Flat parameter vector layout.
struct TrainableDenoiser::Layout {
    int d_in = 0;   // pooled flattened size (3 * ph * pw)
    int width = 0;
    int blocks = 0;
    int n_classes = 0;

    std::size_t w_in, b_in;       // width x d_in, width
    std::size_t w_sig, b_sig;     // width x width, width
    std::size_t class_emb;        // n_classes x width
    std::size_t blocks_off;       // per block: W1, b1, W2, b2
    std::size_t w_out, b_out;     // d_in x width, d_in
    std::size_t total = 0;

    std::size_t block_stride() const {
        return 2 * static_cast<std::size_t>(width) * width + 2 * static_cast<std::size_t>(width);
    }
    std::size_t w1(int k) const { return blocks_off + k * block_stride(); }
    std::size_t b1(int k) const { return w1(k) + static_cast<std::size_t>(width) * width; }
    std::size_t w2(int k) const { return b1(k) + width; }
    std::size_t b2(int k) const { return w2(k) + static_cast<std::size_t>(width) * width; }

    static Layout make(int d_in, int width, int blocks, int n_classes) {
        Layout l;
        l.d_in = d_in;
        l.width = width;
        l.blocks = blocks;
        l.n_classes = n_classes;
        std::size_t off = 0;
        l.w_in = off; off += static_cast<std::size_t>(width) * d_in;
        l.b_in = off; off += width;
        l.w_sig = off; off += static_cast<std::size_t>(width) * width;
        l.b_sig = off; off += width;
        l.class_emb = off; off += static_cast<std::size_t>(n_classes) * width;
        l.blocks_off = off; off += blocks * l.block_stride();
        l.w_out = off; off += static_cast<std::size_t>(d_in) * width;
        l.b_out = off; off += d_in;
        l.total = off;
        return l;
    }
};

namespace {

// One layout per (d_in, width, blocks, n_classes); tiny, so recompute freely.
TrainableDenoiser::Layout make_layout_for(const TrainableDenoiser::Arch& a, int d_in) {
    return TrainableDenoiser::Layout::make(d_in, a.hidden, a.blocks, a.n_classes);
}

} // namespace

struct ForwardCache {
    std::vector<double> z;    // pooled input
    std::vector<double> emb;  // sinusoidal noise embedding
    std::vector<double> a0;   // stem output
    std::vector<std::vector<double>> h_in;  // block inputs
    std::vector<std::vector<double>> t1;    // block pre-activations
    std::vector<std::vector<double>> s1;    // block activations
    std::vector<double> h;    // final residual stream
    std::vector<double> hs;   // silu(h)
};

TrainableDenoiser::TrainableDenoiser(const Arch& arch, std::uint64_t init_seed) : arch_(arch) {
    if (arch_.hidden < 2 || arch_.hidden % 2 != 0)
        throw std::invalid_argument("TrainableDenoiser: hidden width must be even and >= 2");
    pool_ = 1;
    int h = arch_.field_h, w = arch_.field_w;
    while (h > 16 && w > 16 && h % 2 == 0 && w % 2 == 0) {
        h /= 2;
        w /= 2;
        pool_ *= 2;
    }
    ph_ = h;
    pw_ = w;

    const Layout l = make_layout_for(arch_, 3 * ph_ * pw_);
    theta_.assign(l.total, 0.0);

    // Kaiming-style uniform init, deterministic in the seed.
    SeededRng rng(init_seed);
    auto fill = [&](std::size_t off, int n_out, int n_in) {
        const double bound = std::sqrt(6.0 / n_in);
        for (std::size_t k = 0; k < static_cast<std::size_t>(n_out) * n_in; ++k)
            theta_[off + k] = rng.uniform(-bound, bound);
    };
    fill(l.w_in, l.width, l.d_in);
    fill(l.w_sig, l.width, l.width);
    for (std::size_t k = 0; k < static_cast<std::size_t>(l.n_classes) * l.width; ++k)
        theta_[l.class_emb + k] = 0.05 * rng.normal();
    for (int b = 0; b < l.blocks; ++b) {
        fill(l.w1(b), l.width, l.width);
        // W2 starts small so untrained blocks are near-identity.
        const double bound = 0.1 * std::sqrt(6.0 / l.width);
        for (std::size_t k = 0; k < static_cast<std::size_t>(l.width) * l.width; ++k)
            theta_[l.w2(b) + k] = rng.uniform(-bound, bound);
    }
    fill(l.w_out, l.d_in, l.width);
}

std::vector<double> TrainableDenoiser::run_core(const std::vector<double>& zin, int class_id,
                                                double sigma, ForwardCache* cache) const {
    const Layout l = make_layout_for(arch_, 3 * ph_ * pw_);
    if (class_id < 0 || class_id >= arch_.n_classes)
        throw std::invalid_argument("TrainableDenoiser: class id out of range");

    // Pool each channel by block averaging.
    const int H = arch_.field_h, W = arch_.field_w, f = pool_;
    std::vector<double> z(static_cast<std::size_t>(3) * ph_ * pw_, 0.0);
    const double inv_f2 = 1.0 / (f * f);
    for (int c = 0; c < 3; ++c)
        for (int j = 0; j < ph_; ++j)
            for (int i = 0; i < pw_; ++i) {
                double acc = 0.0;
                for (int dj = 0; dj < f; ++dj)
                    for (int di = 0; di < f; ++di)
                        acc += zin[(static_cast<std::size_t>(c) * H + (j * f + dj)) * W + i * f + di];
                z[(static_cast<std::size_t>(c) * ph_ + j) * pw_ + i] = acc * inv_f2;
            }

    // Sinusoidal embedding of c_noise = ln(sigma)/4.
    const double c_noise = 0.25 * std::log(sigma);
    const int half = l.width / 2;
    std::vector<double> emb(l.width);
    for (int k = 0; k < half; ++k) {
        const double freq = std::pow(1000.0, static_cast<double>(k) / half);
        emb[k] = std::sin(c_noise * freq);
        emb[half + k] = std::cos(c_noise * freq);
    }

    std::vector<double> a0(l.width);
    affine(&theta_[l.w_in], &theta_[l.b_in], z.data(), a0.data(), l.width, l.d_in);
    std::vector<double> sig_proj(l.width);
    affine(&theta_[l.w_sig], &theta_[l.b_sig], emb.data(), sig_proj.data(), l.width, l.width);
    const double* cemb = &theta_[l.class_emb + static_cast<std::size_t>(class_id) * l.width];
    for (int k = 0; k < l.width; ++k) a0[k] += sig_proj[k] + cemb[k];

    std::vector<double> h = a0;
    std::vector<double> t1(l.width), s1(l.width), t2(l.width);
    if (cache) {
        cache->z = z;
        cache->emb = emb;
        cache->a0 = a0;
        cache->h_in.clear();
        cache->t1.clear();
        cache->s1.clear();
    }
    for (int b = 0; b < l.blocks; ++b) {
        if (cache) cache->h_in.push_back(h);
        affine(&theta_[l.w1(b)], &theta_[l.b1(b)], h.data(), t1.data(), l.width, l.width);
        for (int k = 0; k < l.width; ++k) s1[k] = silu(t1[k]);
        affine(&theta_[l.w2(b)], &theta_[l.b2(b)], s1.data(), t2.data(), l.width, l.width);
        for (int k = 0; k < l.width; ++k) h[k] += t2[k];
        if (cache) {
            cache->t1.push_back(t1);
            cache->s1.push_back(s1);
        }
    }

    std::vector<double> hs(l.width);
    for (int k = 0; k < l.width; ++k) hs[k] = silu(h[k]);
    if (cache) {
        cache->h = h;
        cache->hs = hs;
    }

    std::vector<double> o(l.d_in);
    affine(&theta_[l.w_out], &theta_[l.b_out], hs.data(), o.data(), l.d_in, l.width);

    // Upsample by replication back to the field resolution.
    std::vector<double> raw(static_cast<std::size_t>(3) * H * W);
    for (int c = 0; c < 3; ++c)
        for (int j = 0; j < H; ++j)
            for (int i = 0; i < W; ++i)
                raw[(static_cast<std::size_t>(c) * H + j) * W + i] =
                    o[(static_cast<std::size_t>(c) * ph_ + j / f) * pw_ + i / f];
    return raw;
}

Field TrainableDenoiser::evaluate(const Field& x, double sigma, int class_id) const {
    if (sigma <= 0.0) throw std::invalid_argument("TrainableDenoiser: sigma must be positive");
    if (x.grid.ny != arch_.field_h || x.grid.nx != arch_.field_w || x.n_channels != 3)
        throw std::invalid_argument("TrainableDenoiser: field shape does not match the architecture");

    const double sd = arch_.sigma_data;
    const double s2 = sigma * sigma, d2 = sd * sd;
    const double c_skip = d2 / (s2 + d2);
    const double c_out = sigma * sd / std::sqrt(s2 + d2);
    const double c_in = 1.0 / std::sqrt(s2 + d2);

    std::vector<double> zin(x.data.size());
    for (std::size_t k = 0; k < zin.size(); ++k) zin[k] = c_in * x.data[k];
    const std::vector<double> raw = run_core(zin, class_id, sigma, nullptr);

    Field out(x.grid, 3);
    for (std::size_t k = 0; k < out.data.size(); ++k)
        out.data[k] = c_skip * x.data[k] + c_out * raw[k];
    return out;
}

double TrainableDenoiser::item_loss_grad(const std::vector<double>& x0,
                                         const std::vector<double>& y, int class_id, double sigma,
                                         std::vector<double>* grad) const {
    const Layout l = make_layout_for(arch_, 3 * ph_ * pw_);
    const int H = arch_.field_h, W = arch_.field_w, f = pool_;
    const std::size_t dim = static_cast<std::size_t>(3) * H * W;
    if (x0.size() != dim || y.size() != dim)
        throw std::invalid_argument("item_loss_grad: field size mismatch");
    if (grad && grad->size() != theta_.size())
        throw std::invalid_argument("item_loss_grad: grad buffer size mismatch");

    const double sd = arch_.sigma_data;
    const double s2 = sigma * sigma, d2 = sd * sd;
    const double c_skip = d2 / (s2 + d2);
    const double c_out = sigma * sd / std::sqrt(s2 + d2);
    const double c_in = 1.0 / std::sqrt(s2 + d2);
    const double lambda = edm_lambda(sigma, sd);

    std::vector<double> zin(dim);
    for (std::size_t k = 0; k < dim; ++k) zin[k] = c_in * y[k];

    ForwardCache cache;
    const std::vector<double> raw = run_core(zin, class_id, sigma, &cache);

    double loss = 0.0;
    std::vector<double> d_raw(dim);
    for (std::size_t k = 0; k < dim; ++k) {
        const double dk = c_skip * y[k] + c_out * raw[k] - x0[k];
        loss += dk * dk;
        d_raw[k] = 2.0 * lambda * c_out * dk;
    }
    loss *= lambda;
    if (!grad) return loss;

    // Adjoint of replication-upsample: sum the replicas.
    std::vector<double> d_o(l.d_in, 0.0);
    for (int c = 0; c < 3; ++c)
        for (int j = 0; j < H; ++j)
            for (int i = 0; i < W; ++i)
                d_o[(static_cast<std::size_t>(c) * ph_ + j / f) * pw_ + i / f] +=
                    d_raw[(static_cast<std::size_t>(c) * H + j) * W + i];

    std::vector<double> d_hs(l.width, 0.0);
    affine_backward(&theta_[l.w_out], cache.hs.data(), d_o.data(), d_hs.data(), &(*grad)[l.w_out],
                    &(*grad)[l.b_out], l.d_in, l.width);

    std::vector<double> dh(l.width);
    for (int k = 0; k < l.width; ++k) dh[k] = d_hs[k] * silu_prime(cache.h[k]);

    std::vector<double> d_s1(l.width), d_t1(l.width), dh_add(l.width);
    for (int b = l.blocks - 1; b >= 0; --b) {
        std::fill(d_s1.begin(), d_s1.end(), 0.0);
        affine_backward(&theta_[l.w2(b)], cache.s1[b].data(), dh.data(), d_s1.data(),
                        &(*grad)[l.w2(b)], &(*grad)[l.b2(b)], l.width, l.width);
        for (int k = 0; k < l.width; ++k) d_t1[k] = d_s1[k] * silu_prime(cache.t1[b][k]);
        std::fill(dh_add.begin(), dh_add.end(), 0.0);
        affine_backward(&theta_[l.w1(b)], cache.h_in[b].data(), d_t1.data(), dh_add.data(),
                        &(*grad)[l.w1(b)], &(*grad)[l.b1(b)], l.width, l.width);
        for (int k = 0; k < l.width; ++k) dh[k] += dh_add[k];
    }

    // Stem: a0 = W_in z + b_in + W_sig emb + b_sig + class_emb[c].
    affine_backward(&theta_[l.w_in], cache.z.data(), dh.data(), nullptr, &(*grad)[l.w_in],
                    &(*grad)[l.b_in], l.width, l.d_in);
    affine_backward(&theta_[l.w_sig], cache.emb.data(), dh.data(), nullptr, &(*grad)[l.w_sig],
                    &(*grad)[l.b_sig], l.width, l.width);
    double* dce = &(*grad)[l.class_emb + static_cast<std::size_t>(class_id) * l.width];
    for (int k = 0; k < l.width; ++k) dce[k] += dh[k];

    return loss;
}

double dsm_loss(const Denoiser& d, std::span<const Field> x0, std::span<const int> class_ids,
                std::span<const double> sigmas, std::span<const Field> noise, double sigma_data) {
    if (x0.size() != class_ids.size() || x0.size() != sigmas.size() || x0.size() != noise.size())
        throw std::invalid_argument("dsm_loss: batch arrays must have equal length");
    if (x0.empty()) throw std::invalid_argument("dsm_loss: empty batch");
    double total = 0.0;
    for (std::size_t b = 0; b < x0.size(); ++b) {
        if (sigmas[b] <= 0.0) throw std::invalid_argument("dsm_loss: sigma draws must be positive");
        Field noisy = x0[b];
        for (std::size_t k = 0; k < noisy.data.size(); ++k) noisy.data[k] += noise[b].data[k];
        const Field den = d.evaluate(noisy, sigmas[b], class_ids[b]);
        double sq = 0.0;
        for (std::size_t k = 0; k < den.data.size(); ++k) {
            const double e = den.data[k] - x0[b].data[k];
            sq += e * e;
        }
        total += edm_lambda(sigmas[b], sigma_data) * sq;
    }
    return total / static_cast<double>(x0.size());
}

void TrainConfig::validate() const {
    if (steps < 1) throw std::invalid_argument("TrainConfig: steps must be >= 1");
    if (batch < 1) throw std::invalid_argument("TrainConfig: batch must be >= 1");
    if (p_std <= 0.0) throw std::invalid_argument("TrainConfig: p_std must be positive");
    if (lr <= 0.0) throw std::invalid_argument("TrainConfig: lr must be positive");
}

TrainResult train_denoiser(const Dataset& ds, const TrainConfig& cfg) {
    cfg.validate();
    if (ds.samples.empty()) throw std::invalid_argument("train_denoiser: dataset is empty");

    TrainableDenoiser::Arch arch;
    arch.field_h = ds.grid.ny;
    arch.field_w = ds.grid.nx;
    arch.n_classes = ds.registry.size();
    arch.hidden = cfg.hidden;
    arch.blocks = cfg.blocks;
    arch.sigma_data = ds.sigma_data;

    auto den = std::make_shared<TrainableDenoiser>(arch, derive_seed(cfg.seed, 0xA11C));

    // Normalized training vectors.
    std::vector<std::vector<double>> bank;
    std::vector<int> bank_class;
    for (const auto& s : ds.samples) {
        Field x = s.x;
        ds.norm.normalize(s.class_id, x);
        bank.push_back(std::move(x.data));
        bank_class.push_back(s.class_id);
    }

    std::vector<double>& theta = den->params();
    std::vector<double> grad(theta.size(), 0.0);
    std::vector<double> m(theta.size(), 0.0), v(theta.size(), 0.0);
    const double beta1 = 0.9, beta2 = 0.999, adam_eps = 1e-8;

    SeededRng rng(derive_seed(cfg.seed, 0x7541));
    std::vector<double> noisy(bank[0].size());
    TrainResult result;
    result.loss_trace.reserve(cfg.steps);

    for (long step = 0; step < cfg.steps; ++step) {
        std::fill(grad.begin(), grad.end(), 0.0);
        double loss = 0.0;
        for (int b = 0; b < cfg.batch; ++b) {
            const std::size_t pick = rng.below(bank.size());
            const double sigma = std::exp(cfg.p_mean + cfg.p_std * rng.normal());
            const std::vector<double>& x0 = bank[pick];
            for (std::size_t k = 0; k < x0.size(); ++k) noisy[k] = x0[k] + sigma * rng.normal();
            loss += den->item_loss_grad(x0, noisy, bank_class[pick], sigma, &grad);
        }
        loss /= cfg.batch;
        if (!std::isfinite(loss)) throw DivergenceError("train_denoiser: non-finite loss", step);
        result.loss_trace.push_back(loss);

        const double t = static_cast<double>(step) / std::max<long>(1, cfg.steps - 1);
        const double lr_t =
            cfg.lr * (cfg.lr_min_frac + (1.0 - cfg.lr_min_frac) * 0.5 * (1.0 + std::cos(3.14159265358979324 * t)));
        const double bc1 = 1.0 - std::pow(beta1, step + 1);
        const double bc2 = 1.0 - std::pow(beta2, step + 1);
        const double inv_batch = 1.0 / cfg.batch;
        for (std::size_t k = 0; k < theta.size(); ++k) {
            const double g = grad[k] * inv_batch;
            m[k] = beta1 * m[k] + (1.0 - beta1) * g;
            v[k] = beta2 * v[k] + (1.0 - beta2) * g * g;
            theta[k] -= lr_t * (m[k] / bc1) / (std::sqrt(v[k] / bc2) + adam_eps);
        }
    }

    result.denoiser = den;
    return result;
}

// --- checkpoint io ---------------------------------------------------------

namespace {

void put_u32(std::ostream& out, std::uint32_t v) {
    char b[4];
    for (int k = 0; k < 4; ++k) b[k] = static_cast<char>((v >> (8 * k)) & 0xff);
    out.write(b, 4);
}

std::uint32_t get_u32(std::istream& in, const char* what) {
    unsigned char b[4];
    if (!in.read(reinterpret_cast<char*>(b), 4))
        throw FormatError(std::string("checkpoint: truncated reading ") + what);
    std::uint32_t v = 0;
    for (int k = 0; k < 4; ++k) v |= std::uint32_t(b[k]) << (8 * k);
    return v;
}

} // namespace

void TrainableDenoiser::save(const std::string& path, const std::string& registry_hash) const {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError("checkpoint: cannot open for writing: " + path);
    out.write("PADC", 4);
    put_u32(out, 1); // version

    std::ostringstream m;
    m << "field_h=" << arch_.field_h << "\n";
    m << "field_w=" << arch_.field_w << "\n";
    m << "n_classes=" << arch_.n_classes << "\n";
    m << "hidden=" << arch_.hidden << "\n";
    m << "blocks=" << arch_.blocks << "\n";
    char sd[40];
    std::snprintf(sd, sizeof(sd), "%.17g", arch_.sigma_data);
    m << "sigma_data=" << sd << "\n";
    m << "registry_hash=" << registry_hash << "\n";
    const std::string meta = m.str();
    put_u32(out, static_cast<std::uint32_t>(meta.size()));
    out.write(meta.data(), static_cast<std::streamsize>(meta.size()));

    put_u32(out, static_cast<std::uint32_t>(theta_.size()));
    for (double p : theta_) {
        const float f = static_cast<float>(p);
        std::uint32_t bits;
        std::memcpy(&bits, &f, 4);
        put_u32(out, bits);
    }
    if (!out) throw FormatError("checkpoint: write failed: " + path);
}

std::unique_ptr<TrainableDenoiser> TrainableDenoiser::load(const std::string& path,
                                                           std::string* registry_hash) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("checkpoint: cannot open for reading: " + path);
    char magic[4];
    if (!in.read(magic, 4) || std::string(magic, 4) != "PADC")
        throw FormatError("checkpoint: bad magic", 0);
    if (get_u32(in, "version") != 1) throw FormatError("checkpoint: unsupported version", 4);

    const std::uint32_t meta_len = get_u32(in, "metadata length");
    std::string meta(meta_len, '\0');
    if (!in.read(meta.data(), meta_len)) throw FormatError("checkpoint: truncated metadata");

    Arch arch;
    std::string rhash;
    std::istringstream ms(meta);
    std::string line;
    while (std::getline(ms, line)) {
        const auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        const std::string key = line.substr(0, eq), val = line.substr(eq + 1);
        if (key == "field_h") arch.field_h = std::stoi(val);
        else if (key == "field_w") arch.field_w = std::stoi(val);
        else if (key == "n_classes") arch.n_classes = std::stoi(val);
        else if (key == "hidden") arch.hidden = std::stoi(val);
        else if (key == "blocks") arch.blocks = std::stoi(val);
        else if (key == "sigma_data") arch.sigma_data = std::stod(val);
        else if (key == "registry_hash") rhash = val;
    }
    if (registry_hash) *registry_hash = rhash;

    auto den = std::make_unique<TrainableDenoiser>(arch, 0);
    const std::uint32_t n = get_u32(in, "parameter count");
    if (n != den->theta_.size())
        throw FormatError("checkpoint: parameter count does not match the architecture");
    for (std::uint32_t k = 0; k < n; ++k) {
        const std::uint32_t bits = get_u32(in, "theta");
        float f;
        std::memcpy(&f, &bits, 4);
        den->theta_[k] = f;
    }
    return den;
}

} // namespace padam
