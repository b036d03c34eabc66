#include "projgeo/report.hpp"

#include <cstdio>
#include <ctime>
#include <fstream>
#include <sstream>

#include "projgeo/errors.hpp"
#include "projgeo/version.hpp"

namespace projgeo {

Report::Report(std::string subcommand) : subcommand_(std::move(subcommand)) {
    lines_.push_back("tool = projgeo");
    lines_.push_back(std::string("tool_version = ") + kVersion);
    lines_.push_back("subcommand = " + subcommand_);
}

void Report::kv(const std::string& key, const std::string& value) {
    lines_.push_back(key + " = " + value);
}
void Report::kv(const std::string& key, const char* value) { kv(key, std::string(value)); }
void Report::kv(const std::string& key, double value) { kv(key, format_double(value)); }
void Report::kv(const std::string& key, int value) { kv(key, std::to_string(value)); }
void Report::kv(const std::string& key, unsigned value) { kv(key, std::to_string(value)); }
void Report::kv(const std::string& key, bool value) {
    kv(key, value ? std::string("true") : std::string("false"));
}
void Report::comment(const std::string& text) { lines_.push_back("# " + text); }

std::string Report::format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

std::string Report::str(bool with_timestamp) const {
    std::ostringstream os;
    os << "# projgeo " << subcommand_ << " report\n";
    if (with_timestamp) {
        std::time_t now = std::time(nullptr);
        char buf[64];
        std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
        os << "# generated: " << buf << "\n";
    }
    for (const auto& line : lines_) os << line << "\n";
    return os.str();
}

std::uint64_t fnv1a64(const std::string& bytes) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string hash_hex(const std::string& bytes) {
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(fnv1a64(bytes)));
    return buf;
}

std::string hash_file_hex(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open '" + path + "' for hashing");
    std::ostringstream os;
    os << in.rdbuf();
    return hash_hex(os.str());
}

}  // namespace projgeo
