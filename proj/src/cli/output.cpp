#include "darkspace/cli/output.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <system_error>

#include "darkspace/linalg.hpp"

namespace darkspace::cli {

namespace fs = std::filesystem;

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

void CsvTable::add_row(const std::vector<double>& values) {
    if (values.size() != header_.size()) throw Error("CsvTable: row width does not match header");
    rows_.push_back(values);
}

std::string CsvTable::str() const {
    std::string out;
    for (std::size_t i = 0; i < header_.size(); ++i) {
        if (i) out += ',';
        out += header_[i];
    }
    out += '\n';
    for (const auto& row : rows_) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out += ',';
            out += format_double(row[i]);
        }
        out += '\n';
    }
    return out;
}

fs::path write_atomic(const fs::path& dir, const std::string& name, const std::string& content) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw Error("cannot create output directory '" + dir.string() + "': " + ec.message());
    const fs::path target = dir / name;
    const fs::path tmp = dir / ("." + name + ".tmp");
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write '" + tmp.string() + "'");
        out << content;
        out.flush();
        if (!out) throw Error("short write to '" + tmp.string() + "'");
    }
    fs::rename(tmp, target, ec);
    if (ec) {
        fs::remove(tmp);
        throw Error("cannot rename into '" + target.string() + "': " + ec.message());
    }
    return target;
}

void ArtifactWriter::stage(const std::string& name, std::string content) {
    staged_.emplace_back(name, std::move(content));
}

void ArtifactWriter::stage_json(const std::string& name, const nlohmann::json& j) {
    stage(name, j.dump(2) + "\n");
}

std::vector<fs::path> ArtifactWriter::commit() {
    std::vector<fs::path> written;
    for (const auto& [name, content] : staged_) written.push_back(write_atomic(dir_, name, content));
    staged_.clear();
    return written;
}

std::string gnuplot_trajectory_script(const std::string& csv_name) {
    return "set datafile separator ','\n"
           "set key autotitle columnhead\n"
           "set xlabel 'tau'\n"
           "set multiplot layout 2,1\n"
           "plot '" + csv_name + "' using 1:2 with lines\n"
           "set logscale y\n"
           "plot '" + csv_name + "' using 1:8 with lines\n"
           "unset multiplot\n";
}

std::string gnuplot_sweep_script(const std::string& csv_name) {
    return "set datafile separator ','\n"
           "set key autotitle columnhead\n"
           "set logscale xy\n"
           "set xlabel 'gammaT'\n"
           "plot '" + csv_name + "' using 1:2 with linespoints, '' using 1:3 with lines, "
           "'' using 1:4 with lines, '' using 1:5 with linespoints\n";
}

}  // namespace darkspace::cli
