#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "hornguide/errors.hpp"

namespace hornguide {

// Flat key=value configuration with preset and CLI overrides. The sorted
// canonical serialization feeds the config hash embedded in artifacts.
class Params {
public:
    static Params defaults();
    // desk | kb250 | kb375 | kb500, applied on top of defaults.
    static Params preset(const std::string& name);
    static std::vector<std::string> preset_names();

    void load_file(const std::filesystem::path& path);
    void set(const std::string& key, const std::string& value);
    // "key=value" form
    void set_pair(const std::string& pair);

    bool has(const std::string& key) const;
    std::string gets(const std::string& key) const;
    int geti(const std::string& key) const;
    long long getll(const std::string& key) const;
    double getd(const std::string& key) const;
    bool getb(const std::string& key) const;  // on/off, true/false, 1/0
    std::uint64_t getu(const std::string& key) const;

    std::string canonical() const;
    std::string hash_hex() const;

    const std::map<std::string, std::string>& entries() const { return kv_; }

private:
    std::map<std::string, std::string> kv_;
};

std::uint64_t fnv1a64(const std::string& s);
std::string hex64(std::uint64_t v);

}  // namespace hornguide
