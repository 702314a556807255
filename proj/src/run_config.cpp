#include "padam/run_config.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "padam/errors.hpp"

namespace padam {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

} // namespace

const std::map<std::string, std::string>& RunConfig::defaults() {
    static const std::map<std::string, std::string> d = {
        {"grid.solver_nx", "64"},
        {"grid.prior_nx", "32"},
        {"solver.cfl", "0.5"},
        {"solver.max_steps", "2000000"},
        {"dataset.investigation", "unified"},
        {"dataset.n_per_class", "200"},
        {"dataset.seed", "1"},
        {"prior.kind", "oracle"},          // oracle | trainable
        {"prior.checkpoint", ""},
        {"sampler.sigma_min", "0.002"},
        {"sampler.sigma_max", "80"},
        {"sampler.rho", "3"},
        {"sampler.steps", "64"},
        {"guidance.zeta_sparse", "4"},
        {"guidance.zeta_full", "4"},
        {"guidance.jacobian", "exact_oracle"}, // exact_oracle | identity
        {"guidance.hard_replace", "true"},
        {"conformal.alpha", "0.05"},
        {"conformal.members", "6"},
        {"conformal.n_cal", "50"},
        {"conformal.sigma_floor_rel", "1e-6"},
        {"selection.repeats", "10"},
        {"selection.tie_rel", "0.01"},
        {"train.steps", "2000"},
        {"train.batch", "16"},
        {"train.lr", "0.001"},
        {"train.hidden", "512"},
        {"train.blocks", "4"},
        {"output.precision", "10"},
    };
    return d;
}

RunConfig::RunConfig() : values_(defaults()) {}

RunConfig RunConfig::from_text(const std::string& text) {
    RunConfig cfg;
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        if (t.front() == '[') {
            if (t.back() != ']')
                throw FormatError("config: malformed section header at line " + std::to_string(lineno));
            section = trim(t.substr(1, t.size() - 2));
            continue;
        }
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw FormatError("config: expected key = value at line " + std::to_string(lineno));
        const std::string key = trim(t.substr(0, eq));
        const std::string value = trim(t.substr(eq + 1));
        if (section.empty())
            throw FormatError("config: key outside any [section] at line " + std::to_string(lineno));
        cfg.set(section + "." + key, value);
    }
    return cfg;
}

RunConfig RunConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("config: cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return from_text(ss.str());
}

void RunConfig::set(const std::string& dotted_key, const std::string& value) {
    if (!defaults().count(dotted_key))
        throw std::invalid_argument("config: unknown key '" + dotted_key + "'");
    values_[dotted_key] = value;
}

const std::string& RunConfig::get(const std::string& dotted_key) const {
    auto it = values_.find(dotted_key);
    if (it == values_.end())
        throw std::invalid_argument("config: unknown key '" + dotted_key + "'");
    return it->second;
}

double RunConfig::get_double(const std::string& k) const { return std::stod(get(k)); }
int RunConfig::get_int(const std::string& k) const { return std::stoi(get(k)); }
long RunConfig::get_long(const std::string& k) const { return std::stol(get(k)); }

bool RunConfig::get_bool(const std::string& k) const {
    const std::string& v = get(k);
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw std::invalid_argument("config: key '" + k + "' is not a boolean: " + v);
}

std::string RunConfig::canonical() const {
    std::ostringstream out;
    for (const auto& [k, v] : values_) out << k << "=" << v << "\n";
    return out.str();
}

std::string RunConfig::hash() const { return fnv1a_hex(canonical()); }

std::string fnv1a_hex(const std::string& bytes) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

} // namespace padam
