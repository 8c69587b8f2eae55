#pragma once

// Patients x patterns indicator matrix joined with survival outcomes.

#include <cstdint>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ctpm/csv.hpp"
#include "ctpm/encoding.hpp"
#include "ctpm/error.hpp"
#include "ctpm/miner.hpp"

namespace ctpm {

struct BinaryDesignMatrix {
    std::vector<std::string> patient_ids;
    std::vector<SurvivalOutcome> outcomes;
    std::vector<std::string> columns;  ///< P1, P2, ...
    std::vector<std::string> keys;     ///< canonical pattern key per column
    std::vector<std::uint8_t> cells;   ///< row-major, rows() x cols()

    std::size_t rows() const noexcept { return patient_ids.size(); }
    std::size_t cols() const noexcept { return columns.size(); }

    std::uint8_t at(std::size_t r, std::size_t c) const { return cells[r * cols() + c]; }
    std::uint8_t& at(std::size_t r, std::size_t c) { return cells[r * cols() + c]; }

    std::size_t column_sum(std::size_t c) const {
        std::size_t n = 0;
        for (std::size_t r = 0; r < rows(); ++r) n += at(r, c);
        return n;
    }

    /// Rows `idx`, in that order.
    BinaryDesignMatrix subset(const std::vector<std::size_t>& idx) const {
        BinaryDesignMatrix m;
        m.columns = columns;
        m.keys = keys;
        m.cells.reserve(idx.size() * cols());
        for (auto r : idx) {
            m.patient_ids.push_back(patient_ids[r]);
            m.outcomes.push_back(outcomes[r]);
            m.cells.insert(m.cells.end(), cells.begin() + static_cast<std::ptrdiff_t>(r * cols()),
                           cells.begin() + static_cast<std::ptrdiff_t>((r + 1) * cols()));
        }
        return m;
    }

    bool operator==(const BinaryDesignMatrix&) const = default;
};

inline std::string column_name(std::size_t index) { return "P" + std::to_string(index + 1); }

/// One row per sequence, one column per pattern in result order. Checks each
/// column sum against the pattern's reported carrier count.
inline BinaryDesignMatrix build_matrix(const std::vector<PatternResult>& patterns, const SequenceDatabase& db) {
    BinaryDesignMatrix m;
    for (std::size_t j = 0; j < patterns.size(); ++j) {
        m.columns.push_back(column_name(j));
        m.keys.push_back(patterns[j].key);
    }
    m.cells.assign(db.size() * patterns.size(), 0);
    for (std::size_t i = 0; i < db.size(); ++i) {
        const auto& seq = db.sequences[i];
        m.patient_ids.push_back(seq.patient_id);
        m.outcomes.push_back(seq.outcome);
        for (std::size_t j = 0; j < patterns.size(); ++j) m.at(i, j) = contains(seq, patterns[j].pattern) ? 1 : 0;
    }
    for (std::size_t j = 0; j < patterns.size(); ++j)
        if (m.column_sum(j) != patterns[j].stats.carriers())
            throw ValidationError("column " + m.columns[j] + " sums to " + std::to_string(m.column_sum(j)) +
                                  " but the miner reported " + std::to_string(patterns[j].stats.carriers()) +
                                  " carriers");
    return m;
}

inline void write_matrix_csv(const BinaryDesignMatrix& m, std::ostream& out) {
    std::vector<std::string> row = {"patient_id", "time", "event"};
    row.insert(row.end(), m.columns.begin(), m.columns.end());
    csv::write_row(out, row);
    for (std::size_t r = 0; r < m.rows(); ++r) {
        row = {m.patient_ids[r], csv::format_double(m.outcomes[r].time), m.outcomes[r].event ? "1" : "0"};
        for (std::size_t c = 0; c < m.cols(); ++c) row.push_back(m.at(r, c) ? "1" : "0");
        csv::write_row(out, row);
    }
}

inline nlohmann::json matrix_sidecar(const BinaryDesignMatrix& m) {
    auto cols = nlohmann::json::array();
    for (std::size_t c = 0; c < m.cols(); ++c) cols.push_back({{"column", m.columns[c]}, {"key", m.keys[c]}});
    return {{"columns", std::move(cols)}};
}

inline BinaryDesignMatrix read_matrix_csv(std::istream& in, const nlohmann::json& sidecar) {
    BinaryDesignMatrix m;
    try {
        for (const auto& c : sidecar.at("columns")) {
            m.columns.push_back(c.at("column").get<std::string>());
            m.keys.push_back(c.at("key").get<std::string>());
        }
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("matrix sidecar: ") + e.what());
    }

    std::size_t line_no = 0;
    std::vector<std::string> header = {"patient_id", "time", "event"};
    header.insert(header.end(), m.columns.begin(), m.columns.end());
    csv::expect_header(in, header, line_no);

    std::string line;
    while (csv::next_line(in, line, line_no)) {
        auto f = csv::split(line, line_no);
        if (f.size() != header.size()) throw ParseError("expected " + std::to_string(header.size()) + " fields", line_no);
        auto time = csv::parse_double(f[1]);
        if (!time) throw ParseError("bad time '" + f[1] + "'", line_no);
        if (f[2] != "0" && f[2] != "1") throw ParseError("event must be 0 or 1", line_no);
        m.patient_ids.push_back(f[0]);
        m.outcomes.push_back({*time, f[2] == "1"});
        for (std::size_t c = 3; c < f.size(); ++c) {
            if (f[c] != "0" && f[c] != "1") throw ParseError("cell must be 0 or 1", line_no);
            m.cells.push_back(f[c] == "1" ? 1 : 0);
        }
    }
    return m;
}

}  // namespace ctpm
