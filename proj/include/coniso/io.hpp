#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace coniso {

// 17 significant digits, enough to round-trip any double; keeps CSV bodies
// byte-identical across runs of the same build.
std::string format_float(double x);

// Write-to-temp then rename, so no output file is ever observed half-written.
void write_text_atomic(const std::filesystem::path& path, const std::string& content);
void write_json_atomic(const std::filesystem::path& path, const nlohmann::json& doc);

// Minimal comma-separated table with a header row; cells are preformatted.
class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}
    void add_row(std::vector<std::string> cells);
    std::string body() const;
    void write(const std::filesystem::path& path) const { write_text_atomic(path, body()); }

private:
    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

}  // namespace coniso
