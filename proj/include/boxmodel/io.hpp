#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace boxmodel::io {

using Json = nlohmann::ordered_json;

inline constexpr const char* kFormatVersion = "boxmodel-artifact/1";

std::uint64_t fnv1a64(std::string_view bytes);
std::string hex64(std::uint64_t x);

/// %.17g; non-finite values print as inf, -inf, nan.
std::string format_double(double x);

/// Deterministic JSON text: keys in insertion order, doubles through format_double,
/// non-finite doubles as the strings "inf", "-inf", "nan". indent < 0 gives the compact form.
std::string dump(const Json& j, int indent = 2);

/// Number or one of the non-finite strings written by dump.
double to_double(const Json& j);

/// One table with a comment line "# format=... manifest=fnv1a64:..." in front of the column names.
class Csv {
public:
    Csv(std::string digest, std::vector<std::string> columns);

    template <class... T>
    void row(const T&... cells) {
        std::vector<std::string> r{cell(cells)...};
        add(std::move(r));
    }
    void add(std::vector<std::string> cells);
    std::string str() const;

    static std::string cell(double x) { return format_double(x); }
    static std::string cell(int x) { return std::to_string(x); }
    static std::string cell(long x) { return std::to_string(x); }
    static std::string cell(unsigned x) { return std::to_string(x); }
    static std::string cell(unsigned long x) { return std::to_string(x); }
    static std::string cell(unsigned long long x) { return std::to_string(x); }
    static std::string cell(bool x) { return x ? "1" : "0"; }
    static std::string cell(const std::string& x) { return x; }
    static std::string cell(const char* x) { return x; }

private:
    std::string digest_;
    std::vector<std::string> columns_;
    std::vector<std::vector<std::string>> rows_;
};

/// Writes through a temporary file and a rename, so readers never see a partial file.
void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

}  // namespace boxmodel::io
