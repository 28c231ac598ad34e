#include "hornguide/config.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace hornguide {

std::uint64_t fnv1a64(const std::string& s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string hex64(std::uint64_t v) {
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

Params Params::defaults() {
    Params p;
    auto& kv = p.kv_;
    kv["seed"] = "42";
    kv["np"] = "20";
    kv["nc"] = "200";
    kv["nv"] = "10";
    kv["ma"] = "2";
    kv["kb_count"] = "5";
    kv["kb_size"] = "250";
    kv["fact_fraction"] = "0.8";
    kv["max_body_len"] = "2";
    kv["max_new_facts"] = "20000";
    kv["n_train"] = "100";
    kv["n_test"] = "100";
    kv["var_sub_prob"] = "0.5";
    kv["n_triplets"] = "100000";
    kv["tpa"] = "20";
    kv["mix_easy"] = "0.40";
    kv["mix_medium"] = "0.50";
    kv["mix_hard"] = "0.10";
    kv["repeat_chance"] = "0.15";
    kv["epochs"] = "100";
    kv["batch_size"] = "128";
    kv["learning_rate"] = "0.001";
    kv["margin"] = "1.0";
    kv["hard_period"] = "10";
    kv["hard_fraction"] = "0.5";
    kv["scorer_epochs"] = "30";
    kv["scorer_learning_rate"] = "0.1";
    kv["scorer_batch_size"] = "128";
    kv["depth_limit"] = "5";
    kv["node_cap"] = "1000000";
    kv["rule_repr"] = "head";
    kv["variable_mode"] = "identity";
    kv["repeated_terms"] = "on";
    kv["balanced_triplets"] = "on";
    kv["hard_samples"] = "on";
    kv["holdout_triplets"] = "2000";
    kv["tv_bins"] = "50";
    kv["n_embeddings"] = "5";
    kv["jobs"] = "0";
    kv["run_name"] = "run";
    return p;
}

std::vector<std::string> Params::preset_names() { return {"desk", "kb250", "kb375", "kb500"}; }

Params Params::preset(const std::string& name) {
    Params p = defaults();
    auto& kv = p.kv_;
    if (name == "kb250") {
        kv["kb_size"] = "250";
        kv["nc"] = "200";
        kv["n_triplets"] = "100000";
        kv["run_name"] = "kb250";
    } else if (name == "kb375") {
        kv["kb_size"] = "375";
        kv["nc"] = "300";
        kv["n_triplets"] = "200000";
        kv["run_name"] = "kb375";
    } else if (name == "kb500") {
        kv["kb_size"] = "500";
        kv["nc"] = "400";
        kv["n_triplets"] = "200000";
        kv["run_name"] = "kb500";
    } else if (name == "desk") {
        // Shrunk so the full acceptance run finishes on one machine.
        kv["kb_count"] = "3";
        kv["kb_size"] = "250";
        kv["nc"] = "200";
        kv["n_train"] = "25";
        kv["n_test"] = "25";
        kv["n_triplets"] = "20000";
        kv["node_cap"] = "100000";
        kv["epochs"] = "30";
        kv["learning_rate"] = "0.02";
        kv["holdout_triplets"] = "1000";
        kv["n_embeddings"] = "2";
        kv["run_name"] = "desk";
    } else {
        throw ConfigError("unknown preset: " + name);
    }
    return p;
}

void Params::load_file(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot read config file: " + path.string());
    std::string line;
    while (std::getline(is, line)) {
        auto first = line.find_first_not_of(" \t");
        if (first == std::string::npos) continue;
        if (line[first] == '#' || line[first] == '%') continue;
        set_pair(line);
    }
}

void Params::set(const std::string& key, const std::string& value) {
    if (!kv_.count(key)) throw ConfigError("unknown config key: " + key);
    kv_[key] = value;
}

void Params::set_pair(const std::string& pair) {
    auto eq = pair.find('=');
    if (eq == std::string::npos) throw ConfigError("expected key=value, got: " + pair);
    auto trim = [](std::string s) {
        auto b = s.find_first_not_of(" \t\r\n");
        auto e = s.find_last_not_of(" \t\r\n");
        return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    set(trim(pair.substr(0, eq)), trim(pair.substr(eq + 1)));
}

bool Params::has(const std::string& key) const { return kv_.count(key) != 0; }

std::string Params::gets(const std::string& key) const {
    auto it = kv_.find(key);
    if (it == kv_.end()) throw ConfigError("missing config key: " + key);
    return it->second;
}

int Params::geti(const std::string& key) const {
    try {
        return std::stoi(gets(key));
    } catch (const std::exception&) {
        throw ConfigError("config key " + key + " is not an integer: " + gets(key));
    }
}

long long Params::getll(const std::string& key) const {
    try {
        return std::stoll(gets(key));
    } catch (const std::exception&) {
        throw ConfigError("config key " + key + " is not an integer: " + gets(key));
    }
}

double Params::getd(const std::string& key) const {
    try {
        return std::stod(gets(key));
    } catch (const std::exception&) {
        throw ConfigError("config key " + key + " is not a number: " + gets(key));
    }
}

bool Params::getb(const std::string& key) const {
    std::string v = gets(key);
    std::transform(v.begin(), v.end(), v.begin(), ::tolower);
    if (v == "on" || v == "true" || v == "1" || v == "yes") return true;
    if (v == "off" || v == "false" || v == "0" || v == "no") return false;
    throw ConfigError("config key " + key + " is not a boolean: " + v);
}

std::uint64_t Params::getu(const std::string& key) const {
    try {
        return std::stoull(gets(key));
    } catch (const std::exception&) {
        throw ConfigError("config key " + key + " is not an integer: " + gets(key));
    }
}

std::string Params::canonical() const {
    std::ostringstream os;
    for (const auto& [k, v] : kv_) os << k << '=' << v << '\n';
    return os.str();
}

std::string Params::hash_hex() const { return hex64(fnv1a64(canonical())); }

}  // namespace hornguide
