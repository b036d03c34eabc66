#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace projgeo {

// Diff-friendly key-value report: `key = value` lines with '#' comments.
// Reruns with the same configuration are byte-identical except for the
// timestamp comment.
class Report {
public:
    explicit Report(std::string subcommand);

    void kv(const std::string& key, const std::string& value);
    void kv(const std::string& key, const char* value);
    void kv(const std::string& key, double value);
    void kv(const std::string& key, int value);
    void kv(const std::string& key, unsigned value);
    void kv(const std::string& key, bool value);
    void comment(const std::string& text);

    std::string str(bool with_timestamp = true) const;

    static std::string format_double(double v);

private:
    std::string subcommand_;
    std::vector<std::string> lines_;
};

std::uint64_t fnv1a64(const std::string& bytes);
std::string hash_hex(const std::string& bytes);
std::string hash_file_hex(const std::string& path);

}  // namespace projgeo
