#pragma once

// Raw SRAM power-up dumps -> per-cell error counts.
//
// Raw dump layout (LF line endings):
//
//   device_id,c,m_total           header
//   <row 1>                       one evaluation of all c cells
//   ...
//   <row m_total>
//
// A row is either c characters from {0,1} (text encoding) or ceil(c/4) hex
// digits, most significant bit first, with unused low bits of the last digit
// set to zero (hex encoding).
//
// Derived-counts CSV:
//
//   device_id,cell_index,error_count,trials
//   dev0,0,3,290
//   ...

#include <cstdint>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "spuf/estimators.hpp"

namespace spuf::ingest {

enum class RawEncoding { Auto, Text, Hex };

struct EvaluationMatrix {
    std::string device_id;
    std::size_t cells = 0;
    std::size_t rows = 0;
    std::vector<std::uint8_t> bits;  // row-major, rows x cells

    std::uint8_t at(std::size_t row, std::size_t cell) const { return bits[row * cells + cell]; }
};

struct CellSummary {
    double bit_weight = 0.0;  // fraction of ones
    std::uint8_t stable_state = 0;
    std::uint32_t error_count = 0;
    std::uint32_t trials = 0;
};

/// Throws ParseError (with the 1-based line number) on a missing or malformed
/// header, ragged rows, non-binary symbols or a row count that disagrees with
/// the header. Auto picks text when a row has exactly c characters and hex
/// when it has ceil(c/4).
EvaluationMatrix parse_evaluations(std::istream& in, RawEncoding encoding = RawEncoding::Auto);

void write_evaluations(std::ostream& out, const EvaluationMatrix& mat, RawEncoding encoding);

/// Drops the first `skip` evaluations. Throws std::invalid_argument if skip >= rows.
EvaluationMatrix discard_aging(const EvaluationMatrix& mat, std::size_t skip);

/// Majority stable state per cell (ties go to 0) and the error count against it.
std::vector<CellSummary> summarize_cells(const EvaluationMatrix& mat);

void write_counts_csv(std::ostream& out, std::span<const est::DeviceCounts> devices);

/// Reads one or more devices from a counts CSV; rows of one device must be
/// contiguous and cell indices must run 0, 1, 2, ... Throws ParseError.
std::vector<est::DeviceCounts> read_counts_csv(std::istream& in);

est::DeviceCounts to_counts(const std::string& device_id, std::span<const CellSummary> cells);

}  // namespace spuf::ingest
