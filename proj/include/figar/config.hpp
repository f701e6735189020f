#pragma once

#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "figar/a3c.hpp"
#include "figar/ddpg.hpp"
#include "figar/repetition.hpp"
#include "figar/trpo.hpp"

namespace figar {

// ----------------------------------------------------------- key-value parsing

/// Sectioned key = value text ("ini" shape). '#' and ';' start comments,
/// whitespace is trimmed, keys are unique per section.
class KeyValueConfig {
public:
    static KeyValueConfig parse(std::istream& in) {
        KeyValueConfig cfg;
        std::string line, section;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            std::string s = strip(line);
            if (s.empty() || s[0] == '#' || s[0] == ';') continue;
            if (s.front() == '[') {
                if (s.back() != ']') fail(lineno, "unterminated section header");
                section = strip(s.substr(1, s.size() - 2));
                if (section.empty()) fail(lineno, "empty section name");
                cfg.sections_[section];  // section may legitimately stay empty
                continue;
            }
            auto eq = s.find('=');
            if (eq == std::string::npos) fail(lineno, "expected key = value");
            std::string key = strip(s.substr(0, eq));
            std::string value = strip(s.substr(eq + 1));
            if (key.empty()) fail(lineno, "empty key");
            auto& sec = cfg.sections_[section];
            if (sec.count(key)) fail(lineno, "duplicate key '" + key + "'");
            sec[key] = value;
        }
        return cfg;
    }

    static KeyValueConfig parse_text(const std::string& text) {
        std::istringstream ss(text);
        return parse(ss);
    }

    static KeyValueConfig load(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw std::runtime_error("cannot open config: " + path);
        return parse(in);
    }

    bool has_section(const std::string& s) const { return sections_.count(s) > 0; }

    bool has(const std::string& section, const std::string& key) const {
        auto it = sections_.find(section);
        return it != sections_.end() && it->second.count(key) > 0;
    }

    const std::string& get(const std::string& section, const std::string& key) const {
        auto it = sections_.find(section);
        if (it == sections_.end() || !it->second.count(key)) {
            throw std::invalid_argument("missing config key: " + section + "." + key);
        }
        return it->second.at(key);
    }

    const std::map<std::string, std::map<std::string, std::string>>& sections() const {
        return sections_;
    }

private:
    static std::string strip(const std::string& s) {
        std::size_t b = s.find_first_not_of(" \t\r\n");
        if (b == std::string::npos) return "";
        std::size_t e = s.find_last_not_of(" \t\r\n");
        return s.substr(b, e - b + 1);
    }

    [[noreturn]] static void fail(int lineno, const std::string& msg) {
        throw std::invalid_argument("config line " + std::to_string(lineno) + ": " + msg);
    }

    std::map<std::string, std::map<std::string, std::string>> sections_;
};

// -------------------------------------------------------------- typed reading

namespace detail {

inline double to_double(const std::string& section, const std::string& key, const std::string& v) {
    std::size_t pos = 0;
    double out;
    try {
        out = std::stod(v, &pos);
    } catch (const std::exception&) {
        throw std::invalid_argument("config " + section + "." + key + ": not a number: '" + v + "'");
    }
    if (pos != v.size()) {
        throw std::invalid_argument("config " + section + "." + key + ": trailing junk in '" + v + "'");
    }
    return out;
}

inline long long to_int(const std::string& section, const std::string& key, const std::string& v) {
    std::size_t pos = 0;
    long long out;
    try {
        out = std::stoll(v, &pos);
    } catch (const std::exception&) {
        throw std::invalid_argument("config " + section + "." + key + ": not an integer: '" + v + "'");
    }
    if (pos != v.size()) {
        throw std::invalid_argument("config " + section + "." + key + ": trailing junk in '" + v + "'");
    }
    return out;
}

inline bool to_bool(const std::string& section, const std::string& key, const std::string& v) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw std::invalid_argument("config " + section + "." + key + ": not a bool: '" + v + "'");
}

}  // namespace detail

// ----------------------------------------------------------- experiment config

/// Fully resolved experiment description. Every field has a default, so a
/// serialized config round-trips: parse(serialize(c)) == c.
struct ExperimentConfig {
    std::string algorithm = "figar-a3c";  // figar-{a3c,trpo,ddpg} or baseline-*
    std::string env_name = "corridor";    // corridor | chainswitch | pointmass
    int env_length = 10;
    double p_slip = 0.2;                  // chainswitch only
    int max_steps = 500;
    std::string variant = "figar-10";     // repetition-set name
    std::uint64_t master_seed = 0;
    int eval_episodes = 100;
    double gamma = 0.99;
    bool shared_trunk = false;
    std::vector<int> hidden{16};

    A3cConfig a3c;
    TrpoConfig trpo;
    DdpgConfig ddpg;

    bool is_baseline() const { return algorithm.rfind("baseline-", 0) == 0; }

    std::string family() const {  // a3c | trpo | ddpg
        auto dash = algorithm.rfind('-');
        return algorithm.substr(dash + 1);
    }

    /// Baselines always run over the singleton set {1}.
    RepetitionSet repetition_set() const {
        if (is_baseline()) return make_repetition_set("singleton(1)", master_seed);
        return make_repetition_set(variant, master_seed);
    }
};

namespace detail {

/// Shortest round-trip decimal form (doubles must re-parse exactly).
inline std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline std::string join_ints(const std::vector<int>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ',';
        out += std::to_string(v[i]);
    }
    return out;
}

inline std::vector<int> split_ints(const std::string& section, const std::string& key,
                                   const std::string& v) {
    std::vector<int> out;
    std::stringstream ss(v);
    std::string tok;
    while (std::getline(ss, tok, ',')) out.push_back(static_cast<int>(to_int(section, key, tok)));
    if (out.empty()) throw std::invalid_argument("config " + section + "." + key + ": empty list");
    return out;
}

/// Applies one known key, or throws on an unknown one. The long if-chain
/// keeps the whole schema in one place.
inline void apply_key(ExperimentConfig& c, const std::string& sec, const std::string& key,
                      const std::string& v) {
    auto bad_key = [&]() {
        throw std::invalid_argument("unknown config key: " + sec + "." + key);
    };
    if (sec == "experiment") {
        if (key == "algorithm") {
            static const char* names[] = {"figar-a3c", "figar-trpo", "figar-ddpg",
                                          "baseline-a3c", "baseline-trpo", "baseline-ddpg"};
            bool ok = false;
            for (const char* n : names) ok = ok || v == n;
            if (!ok) throw std::invalid_argument("experiment.algorithm: unknown algorithm '" + v + "'");
            c.algorithm = v;
        } else if (key == "env") {
            if (v != "corridor" && v != "chainswitch" && v != "pointmass") {
                throw std::invalid_argument("experiment.env: unknown environment '" + v + "'");
            }
            c.env_name = v;
        } else if (key == "env_length") c.env_length = static_cast<int>(to_int(sec, key, v));
        else if (key == "p_slip") c.p_slip = to_double(sec, key, v);
        else if (key == "max_steps") c.max_steps = static_cast<int>(to_int(sec, key, v));
        else if (key == "repetition_set") c.variant = v;
        else if (key == "master_seed") c.master_seed = static_cast<std::uint64_t>(to_int(sec, key, v));
        else if (key == "eval_episodes") c.eval_episodes = static_cast<int>(to_int(sec, key, v));
        else if (key == "gamma") c.gamma = to_double(sec, key, v);
        else if (key == "shared_trunk") c.shared_trunk = to_bool(sec, key, v);
        else if (key == "hidden") c.hidden = split_ints(sec, key, v);
        else bad_key();
    } else if (sec == "a3c") {
        if (key == "n") c.a3c.n = static_cast<int>(to_int(sec, key, v));
        else if (key == "entropy_beta") c.a3c.entropy_beta = to_double(sec, key, v);
        else if (key == "lr") c.a3c.lr = to_double(sec, key, v);
        else if (key == "total_decision_steps") c.a3c.total_decision_steps = static_cast<std::uint64_t>(to_int(sec, key, v));
        else if (key == "warmup_fraction") c.a3c.warmup_fraction = to_double(sec, key, v);
        else if (key == "warmup_fixed_repetition") c.a3c.warmup_fixed_repetition = static_cast<int>(to_int(sec, key, v));
        else if (key == "num_workers") c.a3c.num_workers = static_cast<int>(to_int(sec, key, v));
        else if (key == "literal_recurrence") c.a3c.literal_recurrence = to_bool(sec, key, v);
        else if (key == "log_every") c.a3c.log_every = static_cast<std::uint64_t>(to_int(sec, key, v));
        else bad_key();
    } else if (sec == "trpo") {
        if (key == "beta_ar") c.trpo.beta_ar = to_double(sec, key, v);
        else if (key == "beta_kl") c.trpo.beta_kl = to_double(sec, key, v);
        else if (key == "delta") c.trpo.delta = to_double(sec, key, v);
        else if (key == "cg_iters") c.trpo.cg_iters = static_cast<int>(to_int(sec, key, v));
        else if (key == "cg_damping") c.trpo.cg_damping = to_double(sec, key, v);
        else if (key == "backtrack_ratio") c.trpo.backtrack_ratio = to_double(sec, key, v);
        else if (key == "max_backtracks") c.trpo.max_backtracks = static_cast<int>(to_int(sec, key, v));
        else if (key == "improvement_steps") c.trpo.improvement_steps = static_cast<int>(to_int(sec, key, v));
        else if (key == "k_min") c.trpo.k_min = static_cast<int>(to_int(sec, key, v));
        else if (key == "k_max") c.trpo.k_max = static_cast<int>(to_int(sec, key, v));
        else if (key == "fvp_eps") c.trpo.fvp_eps = to_double(sec, key, v);
        else bad_key();
    } else if (sec == "ddpg") {
        if (key == "replay_capacity") c.ddpg.replay_capacity = static_cast<std::size_t>(to_int(sec, key, v));
        else if (key == "tau") c.ddpg.tau = to_double(sec, key, v);
        else if (key == "batch_size") c.ddpg.batch_size = static_cast<int>(to_int(sec, key, v));
        else if (key == "actor_lr") c.ddpg.actor_lr = to_double(sec, key, v);
        else if (key == "critic_lr") c.ddpg.critic_lr = to_double(sec, key, v);
        else if (key == "ou_theta") c.ddpg.ou.theta = to_double(sec, key, v);
        else if (key == "ou_sigma") c.ddpg.ou.sigma = to_double(sec, key, v);
        else if (key == "ou_mu") c.ddpg.ou.mu = to_double(sec, key, v);
        else if (key == "eps_start") c.ddpg.eps_start = to_double(sec, key, v);
        else if (key == "eps_end") c.ddpg.eps_end = to_double(sec, key, v);
        else if (key == "eps_steps") c.ddpg.eps_steps = static_cast<std::uint64_t>(to_int(sec, key, v));
        else if (key == "total_train_steps") c.ddpg.total_train_steps = static_cast<std::uint64_t>(to_int(sec, key, v));
        else if (key == "hidden") c.ddpg.hidden = split_ints(sec, key, v);
        else if (key == "log_every") c.ddpg.log_every = static_cast<std::uint64_t>(to_int(sec, key, v));
        else bad_key();
    } else {
        throw std::invalid_argument("unknown config section: [" + sec + "]");
    }
}

}  // namespace detail

/// Builds an ExperimentConfig from parsed text, rejecting unknown sections
/// and keys. The [manifest] section (written by the runner) is skipped so a
/// manifest file is itself a loadable config. FIGAR_SEED, when set,
/// overrides experiment.master_seed.
inline ExperimentConfig experiment_from_config(const KeyValueConfig& kv) {
    ExperimentConfig c;
    // trainer gammas always track the experiment-level gamma
    for (const auto& [sec, keys] : kv.sections()) {
        if (sec == "manifest") continue;
        if (sec.empty() && keys.empty()) continue;
        for (const auto& [key, value] : keys) detail::apply_key(c, sec, key, value);
    }
    c.a3c.gamma = c.gamma;
    c.trpo.gamma = c.gamma;
    c.ddpg.gamma = c.gamma;
    if (const char* env_seed = std::getenv("FIGAR_SEED")) {
        c.master_seed = static_cast<std::uint64_t>(
            detail::to_int("experiment", "master_seed", env_seed));
    }
    if (c.eval_episodes < 1) throw std::invalid_argument("experiment.eval_episodes must be >= 1");
    if (c.gamma <= 0.0 || c.gamma > 1.0) throw std::invalid_argument("experiment.gamma out of (0,1]");
    (void)c.repetition_set();  // validates the variant name eagerly
    return c;
}

inline ExperimentConfig load_experiment_config(const std::string& path) {
    return experiment_from_config(KeyValueConfig::load(path));
}

/// Serializes with every default materialized; the output parses back to
/// an identical config (manifest reproducibility contract).
inline std::string serialize_experiment_config(const ExperimentConfig& c) {
    std::ostringstream out;
    out << "[experiment]\n";
    out << "algorithm = " << c.algorithm << "\n";
    out << "env = " << c.env_name << "\n";
    out << "env_length = " << c.env_length << "\n";
    out << "p_slip = " << detail::fmt_double(c.p_slip) << "\n";
    out << "max_steps = " << c.max_steps << "\n";
    out << "repetition_set = " << c.variant << "\n";
    out << "master_seed = " << c.master_seed << "\n";
    out << "eval_episodes = " << c.eval_episodes << "\n";
    out << "gamma = " << detail::fmt_double(c.gamma) << "\n";
    out << "shared_trunk = " << (c.shared_trunk ? "true" : "false") << "\n";
    out << "hidden = " << detail::join_ints(c.hidden) << "\n";
    out << "\n[a3c]\n";
    out << "n = " << c.a3c.n << "\n";
    out << "entropy_beta = " << detail::fmt_double(c.a3c.entropy_beta) << "\n";
    out << "lr = " << detail::fmt_double(c.a3c.lr) << "\n";
    out << "total_decision_steps = " << c.a3c.total_decision_steps << "\n";
    out << "warmup_fraction = " << detail::fmt_double(c.a3c.warmup_fraction) << "\n";
    out << "warmup_fixed_repetition = " << c.a3c.warmup_fixed_repetition << "\n";
    out << "num_workers = " << c.a3c.num_workers << "\n";
    out << "literal_recurrence = " << (c.a3c.literal_recurrence ? "true" : "false") << "\n";
    out << "log_every = " << c.a3c.log_every << "\n";
    out << "\n[trpo]\n";
    out << "beta_ar = " << detail::fmt_double(c.trpo.beta_ar) << "\n";
    out << "beta_kl = " << detail::fmt_double(c.trpo.beta_kl) << "\n";
    out << "delta = " << detail::fmt_double(c.trpo.delta) << "\n";
    out << "cg_iters = " << c.trpo.cg_iters << "\n";
    out << "cg_damping = " << detail::fmt_double(c.trpo.cg_damping) << "\n";
    out << "backtrack_ratio = " << detail::fmt_double(c.trpo.backtrack_ratio) << "\n";
    out << "max_backtracks = " << c.trpo.max_backtracks << "\n";
    out << "improvement_steps = " << c.trpo.improvement_steps << "\n";
    out << "k_min = " << c.trpo.k_min << "\n";
    out << "k_max = " << c.trpo.k_max << "\n";
    out << "fvp_eps = " << detail::fmt_double(c.trpo.fvp_eps) << "\n";
    out << "\n[ddpg]\n";
    out << "replay_capacity = " << c.ddpg.replay_capacity << "\n";
    out << "tau = " << detail::fmt_double(c.ddpg.tau) << "\n";
    out << "batch_size = " << c.ddpg.batch_size << "\n";
    out << "actor_lr = " << detail::fmt_double(c.ddpg.actor_lr) << "\n";
    out << "critic_lr = " << detail::fmt_double(c.ddpg.critic_lr) << "\n";
    out << "ou_theta = " << detail::fmt_double(c.ddpg.ou.theta) << "\n";
    out << "ou_sigma = " << detail::fmt_double(c.ddpg.ou.sigma) << "\n";
    out << "ou_mu = " << detail::fmt_double(c.ddpg.ou.mu) << "\n";
    out << "eps_start = " << detail::fmt_double(c.ddpg.eps_start) << "\n";
    out << "eps_end = " << detail::fmt_double(c.ddpg.eps_end) << "\n";
    out << "eps_steps = " << c.ddpg.eps_steps << "\n";
    out << "total_train_steps = " << c.ddpg.total_train_steps << "\n";
    out << "hidden = " << detail::join_ints(c.ddpg.hidden) << "\n";
    out << "log_every = " << c.ddpg.log_every << "\n";
    return out.str();
}

}  // namespace figar
