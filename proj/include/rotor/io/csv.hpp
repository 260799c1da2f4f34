#pragma once

#include <array>
#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include "rotor/energy_series.hpp"
#include "rotor/errors.hpp"
#include "rotor/quantum.hpp"

namespace rotor::io {

// I/O failure (unwritable directory, malformed input file). Exit code 4.
class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

// Shortest round-trip representation; identical config always produces
// identical bytes.
inline std::string format_double(double v) {
    std::array<char, 40> buf{};
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    if (ec != std::errc()) throw IoError("format_double failed");
    return std::string(buf.data(), ptr);
}

inline std::ofstream open_output(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    return out;
}

// Energy CSV: kick_index plus one or two energy columns. All quantities
// are dimensionless scaled energies.
inline void write_energy_csv(const std::filesystem::path& path, const EnergySeries* quantum,
                             const EnergySeries* classical) {
    if (!quantum && !classical) throw ParameterError("write_energy_csv: no series given");
    auto out = open_output(path);
    out << "# scaled rotational energy after each kick; all quantities dimensionless\n";
    out << "kick_index";
    if (quantum) out << ",E_q";
    if (classical) out << ",E_c";
    out << "\n";
    const std::size_t rows = quantum ? quantum->values.size() : classical->values.size();
    if (quantum && classical && classical->values.size() != rows)
        throw ParameterError("write_energy_csv: series lengths differ");
    for (std::size_t n = 0; n < rows; ++n) {
        out << n;
        if (quantum) out << ',' << format_double(quantum->values[n]);
        if (classical) out << ',' << format_double(classical->values[n]);
        out << '\n';
    }
    if (!out) throw IoError("write failed: " + path.string());
}

// Momentum distribution CSV: one row per ladder index (2B rows).
inline void write_distribution_csv(const std::filesystem::path& path,
                                   const MomentumDistribution& dist) {
    auto out = open_output(path);
    out << "# momentum distribution P(m); m is the ladder index (physical momentum m/M), P dimensionless\n";
    out << "m,P_m\n";
    for (std::int64_t m = dist.min_m(); m <= dist.max_m(); ++m)
        out << m << ',' << format_double(dist.at(m)) << '\n';
    if (!out) throw IoError("write failed: " + path.string());
}

// Poincare-section CSV: (theta mod 2pi, L mod 2pi) pairs.
inline void write_section_csv(const std::filesystem::path& path,
                              const std::vector<std::array<double, 2>>& cloud) {
    auto out = open_output(path);
    out << "# Poincare section points, coordinates reduced mod 2*pi; dimensionless\n";
    out << "theta_mod,L_mod\n";
    for (const auto& p : cloud)
        out << format_double(p[0]) << ',' << format_double(p[1]) << '\n';
    if (!out) throw IoError("write failed: " + path.string());
}

// Loaded CSV table: column name -> values. Lines starting with '#' are
// comments; the first non-comment line names the columns.
struct CsvTable {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> data; // data[col][row]

    std::optional<std::size_t> column_index(const std::string& name) const {
        for (std::size_t i = 0; i < columns.size(); ++i)
            if (columns[i] == name) return i;
        return std::nullopt;
    }
};

inline CsvTable read_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path.string());
    CsvTable table;
    std::string line;
    bool header_seen = false;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        std::stringstream row(line);
        std::string cell;
        if (!header_seen) {
            while (std::getline(row, cell, ',')) table.columns.push_back(cell);
            table.data.resize(table.columns.size());
            header_seen = true;
            continue;
        }
        std::size_t col = 0;
        while (std::getline(row, cell, ',')) {
            if (col >= table.columns.size()) throw IoError("ragged CSV row in " + path.string());
            double v = 0.0;
            auto [p, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
            if (ec != std::errc() || p != cell.data() + cell.size())
                throw IoError("bad numeric cell '" + cell + "' in " + path.string());
            table.data[col].push_back(v);
            ++col;
        }
        if (col != table.columns.size()) throw IoError("ragged CSV row in " + path.string());
    }
    if (!header_seen) throw IoError("no header row in " + path.string());
    return table;
}

} // namespace rotor::io
