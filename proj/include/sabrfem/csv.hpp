#pragma once

// CSV output: header row, '.' decimal point, LF line ends, fields quoted
// only when they contain a comma, quote or line break.

#include <fstream>
#include <string>
#include <vector>

#include "sabrfem/pricing.hpp"
#include "sabrfem/studies.hpp"

namespace sabrfem {

class CsvWriter {
public:
    /// Opens (truncates) the file; throws IoError.
    explicit CsvWriter(const std::string& path);

    void row(const std::vector<std::string>& fields);
    void row(const std::vector<double>& values);
    /// Flushes and checks the stream; throws IoError.
    void close();

    static std::string format(double v);
    static std::string quote(const std::string& field);

private:
    std::string path_;
    std::ofstream out_;
};

/// Columns: level_or_k, error_H, error_energy, fitted_slope (the H-norm
/// least-squares slope, repeated on every row).
void write_csv_report(const ConvergenceReport& report, const std::string& path);

/// Long format (x, y, value), x-major.
void write_surface_csv(const PriceSurface& surface, const std::string& path);

/// Columns: eps, value.
void write_mass_table_csv(const MassAtZeroResult& result, const std::string& path);

}  // namespace sabrfem
