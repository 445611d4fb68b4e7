#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "biphoton/density_matrix.hpp"
#include "biphoton/errors.hpp"
#include "biphoton/tomography.hpp"

namespace biphoton {

/// Shortest round-trippable decimal form; keeps text output deterministic.
inline std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    double back = 0.0;
    std::sscanf(buf, "%lf", &back);
    if (back == v) {
        for (int prec = 1; prec < 17; ++prec) {
            char shorter[40];
            std::snprintf(shorter, sizeof(shorter), "%.*g", prec, v);
            std::sscanf(shorter, "%lf", &back);
            if (back == v) return shorter;
        }
    }
    return buf;
}

/// CSV with a single leading `# key=value ...` metadata comment, then one
/// header line, then data rows.
class CsvWriter {
  public:
    CsvWriter(const std::string& path, const std::string& config_hash,
              std::optional<std::uint64_t> seed)
        : out_(path) {
        if (!out_) throw std::runtime_error("cannot open output file '" + path + "'");
        out_ << "# config_hash=" << config_hash;
        if (seed) out_ << " seed=" << *seed;
        out_ << "\n";
    }

    void header(const std::vector<std::string>& cols) { line(cols); }

    void row(const std::vector<std::string>& cells) { line(cells); }

    void row_numeric(const std::vector<double>& vals) {
        std::vector<std::string> cells;
        cells.reserve(vals.size());
        for (double v : vals) cells.push_back(fmt_double(v));
        line(cells);
    }

  private:
    void line(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out_ << ",";
            out_ << cells[i];
        }
        out_ << "\n";
    }
    std::ofstream out_;
};

inline nlohmann::json density_matrix_to_json(const TwoQubitDensityMatrix& rho) {
    nlohmann::json m = nlohmann::json::array();
    for (int r = 0; r < 4; ++r) {
        nlohmann::json row = nlohmann::json::array();
        for (int c = 0; c < 4; ++c)
            row.push_back({rho.m(r, c).real(), rho.m(r, c).imag()});
        m.push_back(row);
    }
    return {{"basis", {"HH", "HV", "VH", "VV"}}, {"matrix", m}};
}

inline TwoQubitDensityMatrix density_matrix_from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("matrix"))
        throw ConfigError("state.matrix", "missing density-matrix payload");
    if (j.contains("basis")) {
        const std::vector<std::string> want{"HH", "HV", "VH", "VV"};
        std::vector<std::string> got = j.at("basis").get<std::vector<std::string>>();
        if (got != want) throw ConfigError("state.basis", "expected [HH,HV,VH,VV]");
    }
    const nlohmann::json& m = j.at("matrix");
    if (!m.is_array() || m.size() != 4) throw ConfigError("state.matrix", "expected 4 rows");
    TwoQubitDensityMatrix rho;
    for (int r = 0; r < 4; ++r) {
        const nlohmann::json& row = m.at(r);
        if (!row.is_array() || row.size() != 4)
            throw ConfigError("state.matrix", "expected 4 columns per row");
        for (int c = 0; c < 4; ++c) {
            const nlohmann::json& cell = row.at(c);
            if (!cell.is_array() || cell.size() != 2 || !cell.at(0).is_number() ||
                !cell.at(1).is_number())
                throw ConfigError("state.matrix", "each entry must be a [re, im] pair");
            rho.m(r, c) = Complex(cell.at(0).get<double>(), cell.at(1).get<double>());
        }
    }
    return rho;
}

inline TwoQubitDensityMatrix read_density_matrix(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("state", "cannot open '" + path + "'");
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("state", std::string("parse error: ") + e.what());
    }
    return density_matrix_from_json(j);
}

inline void write_json_file(const std::string& path, const nlohmann::json& j) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open output file '" + path + "'");
    out << j.dump(2) << "\n";
}

inline void write_counts_csv(const std::string& path, const std::string& config_hash,
                             std::uint64_t seed, const std::vector<CountRecord>& records) {
    const auto& settings = canonical_settings();
    CsvWriter csv(path, config_hash, seed);
    csv.header({"setting_id", "ket_arm1", "ket_arm2", "counts", "accidentals", "time_s"});
    for (const auto& rec : records) {
        const auto& s = settings.at(static_cast<std::size_t>(rec.setting_id - 1));
        csv.row({std::to_string(rec.setting_id), std::string(1, s.arm1), std::string(1, s.arm2),
                 fmt_double(rec.counts), fmt_double(rec.accidentals), fmt_double(rec.time_s)});
    }
}

/// Reads a counts CSV produced by write_counts_csv (comment and header lines
/// are skipped; analyzer columns are ignored, the setting id is authoritative).
inline std::vector<CountRecord> read_counts_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("counts", "cannot open '" + path + "'");
    std::vector<CountRecord> records;
    std::string line;
    bool header_seen = false;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (!header_seen) { // single header line follows the metadata comment
            header_seen = true;
            continue;
        }
        std::istringstream ss(line);
        std::string cell;
        std::vector<std::string> cells;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (cells.size() != 6)
            throw ConfigError("counts", "expected 6 columns, got " +
                                            std::to_string(cells.size()));
        CountRecord rec;
        try {
            rec.setting_id = std::stoi(cells[0]);
            rec.counts = std::stod(cells[3]);
            rec.accidentals = std::stod(cells[4]);
            rec.time_s = std::stod(cells[5]);
        } catch (const std::exception&) {
            throw ConfigError("counts", "malformed row: " + line);
        }
        records.push_back(rec);
    }
    if (records.empty()) throw ConfigError("counts", "no data rows in '" + path + "'");
    return records;
}

} // namespace biphoton
