#include "sabrfem/csv.hpp"

#include <charconv>
#include <cmath>

#include "sabrfem/errors.hpp"

namespace sabrfem {

CsvWriter::CsvWriter(const std::string& path) : path_(path), out_(path, std::ios::binary | std::ios::trunc) {
    if (!out_) throw IoError("cannot open " + path + " for writing");
}

std::string CsvWriter::format(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::string CsvWriter::quote(const std::string& field) {
    if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
    std::string q = "\"";
    for (char c : field) {
        if (c == '"') q += '"';
        q += c;
    }
    return q + "\"";
}

void CsvWriter::row(const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) out_ << ',';
        out_ << quote(fields[i]);
    }
    out_ << '\n';
}

void CsvWriter::row(const std::vector<double>& values) {
    std::vector<std::string> f;
    f.reserve(values.size());
    for (double v : values) f.push_back(format(v));
    row(f);
}

void CsvWriter::close() {
    out_.flush();
    if (!out_) throw IoError("write failed for " + path_);
    out_.close();
}

void write_csv_report(const ConvergenceReport& report, const std::string& path) {
    CsvWriter w(path);
    w.row(std::vector<std::string>{"level_or_k", "error_H", "error_energy", "fitted_slope"});
    for (std::size_t i = 0; i < report.grid.size(); ++i) {
        w.row(std::vector<double>{report.grid[i], report.error_h[i], report.error_energy[i], report.slope_h});
    }
    w.close();
}

void write_surface_csv(const PriceSurface& s, const std::string& path) {
    CsvWriter w(path);
    w.row(std::vector<std::string>{"x", "y", "value"});
    const std::size_t ny = s.y_nodes.size();
    for (std::size_t i = 0; i < s.x_nodes.size(); ++i)
        for (std::size_t j = 0; j < ny; ++j) {
            w.row(std::vector<double>{s.x_nodes[i], s.y_nodes[j], s.values[static_cast<Eigen::Index>(i * ny + j)]});
        }
    w.close();
}

void write_mass_table_csv(const MassAtZeroResult& r, const std::string& path) {
    CsvWriter w(path);
    w.row(std::vector<std::string>{"eps", "value"});
    for (std::size_t i = 0; i < r.eps.size(); ++i) w.row(std::vector<double>{r.eps[i], r.values[i]});
    w.close();
}

}  // namespace sabrfem
