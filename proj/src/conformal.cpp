#include "padam/conformal.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "padam/errors.hpp"

namespace padam {

EnsembleStats ensemble_stats(std::span<const Field> members) {
    if (members.size() < 2)
        throw std::invalid_argument("ensemble_stats: need at least two members");
    const std::size_t dim = members[0].data.size();
    for (const Field& f : members)
        if (f.data.size() != dim) throw std::invalid_argument("ensemble_stats: shape mismatch");

    EnsembleStats st;
    st.members = static_cast<int>(members.size());
    st.mean = Field(members[0].grid, members[0].n_channels);
    st.stdev = Field(members[0].grid, members[0].n_channels);

    const double inv_m = 1.0 / st.members;
    for (const Field& f : members)
        for (std::size_t k = 0; k < dim; ++k) st.mean.data[k] += f.data[k] * inv_m;
    for (const Field& f : members)
        for (std::size_t k = 0; k < dim; ++k) {
            const double d = f.data[k] - st.mean.data[k];
            st.stdev.data[k] += d * d;
        }
    const double inv_m1 = 1.0 / (st.members - 1);
    for (std::size_t k = 0; k < dim; ++k) st.stdev.data[k] = std::sqrt(st.stdev.data[k] * inv_m1);
    return st;
}

Field nonconformity(const Field& z_true, const EnsembleStats& stats, double floor) {
    if (z_true.data.size() != stats.mean.data.size())
        throw std::invalid_argument("nonconformity: shape mismatch");
    if (!(floor > 0.0)) throw std::invalid_argument("nonconformity: floor must be positive");
    Field s(z_true.grid, z_true.n_channels);
    for (std::size_t k = 0; k < s.data.size(); ++k)
        s.data[k] = std::abs(z_true.data[k] - stats.mean.data[k]) /
                    std::max(stats.stdev.data[k], floor);
    return s;
}

double calibrate(std::span<const double> pooled_scores, double alpha) {
    if (pooled_scores.empty()) throw std::invalid_argument("calibrate: empty score set");
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("calibrate: alpha must lie in (0, 1)");
    for (double s : pooled_scores)
        if (!std::isfinite(s)) throw std::invalid_argument("calibrate: scores must be finite");

    const long n = static_cast<long>(pooled_scores.size());
    const long rank = static_cast<long>(std::ceil((n + 1) * (1.0 - alpha)));
    if (rank > n) return std::numeric_limits<double>::infinity();

    std::vector<double> sorted(pooled_scores.begin(), pooled_scores.end());
    std::sort(sorted.begin(), sorted.end());
    return sorted[rank - 1];
}

std::pair<Field, Field> conformal_interval(const EnsembleStats& stats, double q_hat, double floor) {
    if (q_hat < 0.0) throw std::invalid_argument("conformal_interval: q_hat must be >= 0");
    Field lo(stats.mean.grid, stats.mean.n_channels);
    Field hi(stats.mean.grid, stats.mean.n_channels);
    for (std::size_t k = 0; k < lo.data.size(); ++k) {
        const double half = q_hat * std::max(stats.stdev.data[k], floor);
        lo.data[k] = stats.mean.data[k] - half;
        hi.data[k] = stats.mean.data[k] + half;
    }
    return {lo, hi};
}

double picp(const Field& truth, const Field& lo, const Field& hi) {
    if (truth.data.size() != lo.data.size() || truth.data.size() != hi.data.size())
        throw std::invalid_argument("picp: shape mismatch");
    long covered = 0;
    for (std::size_t k = 0; k < truth.data.size(); ++k)
        if (lo.data[k] <= truth.data[k] && truth.data[k] <= hi.data[k]) ++covered;
    return 100.0 * static_cast<double>(covered) / static_cast<double>(truth.data.size());
}

std::uint64_t score_digest(std::span<const double> scores) {
    std::vector<double> sorted(scores.begin(), scores.end());
    std::sort(sorted.begin(), sorted.end());
    std::uint64_t h = 1469598103934665603ULL;
    for (double s : sorted) {
        std::uint64_t bits;
        std::memcpy(&bits, &s, 8);
        for (int b = 0; b < 8; ++b) {
            h ^= (bits >> (8 * b)) & 0xff;
            h *= 1099511628211ULL;
        }
    }
    return h;
}

void CalibrationRecord::save(const std::string& path) const {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw FormatError("CalibrationRecord: cannot open for writing: " + path);
    char buf[64];
    out << "class=" << class_id << "\n";
    out << "task=" << task << "\n";
    std::snprintf(buf, sizeof(buf), "%.17g", alpha);
    out << "alpha=" << buf << "\n";
    out << "n_pool=" << n_pool << "\n";
    out << "n_instances=" << n_instances << "\n";
    out << "members=" << members << "\n";
    std::snprintf(buf, sizeof(buf), "%.17g", fraction);
    out << "fraction=" << buf << "\n";
    std::snprintf(buf, sizeof(buf), "%.17g", q_hat);
    out << "q_hat=" << buf << "\n";
    std::snprintf(buf, sizeof(buf), "%.17g", sigma_floor);
    out << "sigma_floor=" << buf << "\n";
    out << "score_digest=" << score_digest << "\n";
    out << "config_hash=" << config_hash << "\n";
    out << "seed=" << seed << "\n";
}

CalibrationRecord CalibrationRecord::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("CalibrationRecord: cannot open for reading: " + path);
    CalibrationRecord r;
    std::string line;
    while (std::getline(in, line)) {
        const auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        const std::string key = line.substr(0, eq), val = line.substr(eq + 1);
        if (key == "class") r.class_id = std::stoi(val);
        else if (key == "task") r.task = val;
        else if (key == "alpha") r.alpha = std::stod(val);
        else if (key == "n_pool") r.n_pool = std::stol(val);
        else if (key == "n_instances") r.n_instances = std::stoi(val);
        else if (key == "members") r.members = std::stoi(val);
        else if (key == "fraction") r.fraction = std::stod(val);
        else if (key == "q_hat") r.q_hat = std::stod(val);
        else if (key == "sigma_floor") r.sigma_floor = std::stod(val);
        else if (key == "score_digest") r.score_digest = std::stoull(val);
        else if (key == "config_hash") r.config_hash = val;
        else if (key == "seed") r.seed = std::stoull(val);
        else throw FormatError("CalibrationRecord: unknown key " + key);
    }
    return r;
}

} // namespace padam
