#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace darkspace::cli {

inline constexpr int kSchemaVersion = 1;

/// Shortest representation that round-trips (at most 17 significant digits).
std::string format_double(double v);

class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

    void add_row(const std::vector<double>& values);
    std::size_t rows() const { return rows_.size(); }
    /// Comma-separated, '\n' line endings, header first.
    std::string str() const;

private:
    std::vector<std::string> header_;
    std::vector<std::vector<double>> rows_;
};

/// Collects artifacts in memory and writes them into one directory, each via
/// a temporary file and a rename.
class ArtifactWriter {
public:
    explicit ArtifactWriter(std::filesystem::path dir) : dir_(std::move(dir)) {}

    void stage(const std::string& name, std::string content);
    void stage_json(const std::string& name, const nlohmann::json& j);
    /// Writes everything staged. Returns the written paths.
    std::vector<std::filesystem::path> commit();

    const std::filesystem::path& dir() const { return dir_; }

private:
    std::filesystem::path dir_;
    std::vector<std::pair<std::string, std::string>> staged_;
};

/// Writes `content` to dir/name through dir/.name.tmp and a rename.
std::filesystem::path write_atomic(const std::filesystem::path& dir, const std::string& name,
                                   const std::string& content);

std::string gnuplot_trajectory_script(const std::string& csv_name);
std::string gnuplot_sweep_script(const std::string& csv_name);

}  // namespace darkspace::cli
