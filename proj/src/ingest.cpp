#include "spuf/ingest.hpp"

#include <charconv>
#include <stdexcept>

namespace spuf::ingest {

namespace {

constexpr const char* kCountsHeader = "device_id,cell_index,error_count,trials";

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += ch;
        }
    }
    out.push_back(cur);
    return out;
}

template <typename T>
bool parse_uint(const std::string& s, T& out) {
    if (s.empty()) return false;
    auto res = std::from_chars(s.data(), s.data() + s.size(), out);
    return res.ec == std::errc{} && res.ptr == s.data() + s.size();
}

bool next_line(std::istream& in, std::string& line, std::size_t& lineno) {
    if (!std::getline(in, line)) return false;
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return true;
}

int hex_value(char ch) {
    if (ch >= '0' && ch <= '9') return ch - '0';
    if (ch >= 'a' && ch <= 'f') return ch - 'a' + 10;
    if (ch >= 'A' && ch <= 'F') return ch - 'A' + 10;
    return -1;
}

}  // namespace

EvaluationMatrix parse_evaluations(std::istream& in, RawEncoding encoding) {
    std::string line;
    std::size_t lineno = 0;
    if (!next_line(in, line, lineno) || line.empty()) throw ParseError("missing header 'device_id,c,m_total'", 1);
    const auto head = split(line, ',');
    EvaluationMatrix mat;
    if (head.size() != 3 || head[0].empty() || !parse_uint(head[1], mat.cells) || !parse_uint(head[2], mat.rows) ||
        mat.cells == 0) {
        throw ParseError("malformed header, expected 'device_id,c,m_total'", lineno);
    }
    mat.device_id = head[0];
    mat.bits.reserve(mat.cells * mat.rows);

    const std::size_t hex_len = (mat.cells + 3) / 4;
    std::size_t seen = 0;
    while (next_line(in, line, lineno)) {
        if (line.empty()) continue;
        if (seen == mat.rows) throw ParseError("more evaluation rows than the header declares", lineno);

        RawEncoding enc = encoding;
        if (enc == RawEncoding::Auto) {
            const bool binary = line.find_first_not_of("01") == std::string::npos;
            if (line.size() == mat.cells && (binary || line.size() != hex_len)) {
                enc = RawEncoding::Text;
            } else if (line.size() == hex_len) {
                enc = RawEncoding::Hex;
            } else {
                throw ParseError("row length " + std::to_string(line.size()) + " matches neither " +
                                     std::to_string(mat.cells) + " bits nor " + std::to_string(hex_len) + " hex digits",
                                 lineno);
            }
        }

        if (enc == RawEncoding::Text) {
            if (line.size() != mat.cells) {
                throw ParseError("row has " + std::to_string(line.size()) + " cells, expected " +
                                     std::to_string(mat.cells),
                                 lineno);
            }
            for (char ch : line) {
                if (ch != '0' && ch != '1') throw ParseError(std::string("non-binary symbol '") + ch + "'", lineno);
                mat.bits.push_back(static_cast<std::uint8_t>(ch - '0'));
            }
        } else {
            if (line.size() != hex_len) {
                throw ParseError("hex row has " + std::to_string(line.size()) + " digits, expected " +
                                     std::to_string(hex_len),
                                 lineno);
            }
            for (std::size_t d = 0; d < hex_len; ++d) {
                const int v = hex_value(line[d]);
                if (v < 0) throw ParseError(std::string("non-hex symbol '") + line[d] + "'", lineno);
                for (int bit = 3; bit >= 0; --bit) {
                    const std::size_t cell = d * 4 + static_cast<std::size_t>(3 - bit);
                    const auto b = static_cast<std::uint8_t>((v >> bit) & 1);
                    if (cell < mat.cells) {
                        mat.bits.push_back(b);
                    } else if (b) {
                        throw ParseError("nonzero padding bits in last hex digit", lineno);
                    }
                }
            }
        }
        ++seen;
    }
    if (seen != mat.rows) {
        throw ParseError("header declares " + std::to_string(mat.rows) + " evaluations, found " + std::to_string(seen),
                         lineno);
    }
    return mat;
}

void write_evaluations(std::ostream& out, const EvaluationMatrix& mat, RawEncoding encoding) {
    out << mat.device_id << ',' << mat.cells << ',' << mat.rows << '\n';
    static constexpr char kHex[] = "0123456789ABCDEF";
    for (std::size_t r = 0; r < mat.rows; ++r) {
        if (encoding == RawEncoding::Hex) {
            for (std::size_t d = 0; d * 4 < mat.cells; ++d) {
                int v = 0;
                for (std::size_t b = 0; b < 4; ++b) {
                    const std::size_t cell = d * 4 + b;
                    v = (v << 1) | (cell < mat.cells ? mat.at(r, cell) : 0);
                }
                out << kHex[v];
            }
        } else {
            for (std::size_t c = 0; c < mat.cells; ++c) out << static_cast<char>('0' + mat.at(r, c));
        }
        out << '\n';
    }
}

EvaluationMatrix discard_aging(const EvaluationMatrix& mat, std::size_t skip) {
    if (skip >= mat.rows) {
        throw std::invalid_argument("discard_aging: skipping " + std::to_string(skip) + " of " +
                                    std::to_string(mat.rows) + " evaluations leaves none");
    }
    EvaluationMatrix out;
    out.device_id = mat.device_id;
    out.cells = mat.cells;
    out.rows = mat.rows - skip;
    out.bits.assign(mat.bits.begin() + static_cast<std::ptrdiff_t>(skip * mat.cells), mat.bits.end());
    return out;
}

std::vector<CellSummary> summarize_cells(const EvaluationMatrix& mat) {
    if (mat.rows == 0) throw std::invalid_argument("summarize_cells: no evaluations");
    std::vector<std::uint32_t> ones(mat.cells, 0);
    for (std::size_t r = 0; r < mat.rows; ++r) {
        for (std::size_t c = 0; c < mat.cells; ++c) ones[c] += mat.at(r, c);
    }
    std::vector<CellSummary> out(mat.cells);
    const auto m = static_cast<std::uint32_t>(mat.rows);
    for (std::size_t c = 0; c < mat.cells; ++c) {
        auto& s = out[c];
        s.trials = m;
        s.bit_weight = static_cast<double>(ones[c]) / static_cast<double>(m);
        // strict majority of ones; a tie goes to state 0
        s.stable_state = 2 * ones[c] > m ? 1 : 0;
        s.error_count = s.stable_state ? m - ones[c] : ones[c];
    }
    return out;
}

est::DeviceCounts to_counts(const std::string& device_id, std::span<const CellSummary> cells) {
    est::DeviceCounts dev;
    dev.device_id = device_id;
    dev.cells.reserve(cells.size());
    for (const auto& c : cells) dev.cells.push_back({c.error_count, c.trials});
    return dev;
}

void write_counts_csv(std::ostream& out, std::span<const est::DeviceCounts> devices) {
    out << kCountsHeader << '\n';
    for (const auto& dev : devices) {
        for (std::size_t j = 0; j < dev.cells.size(); ++j) {
            out << dev.device_id << ',' << j << ',' << dev.cells[j].x << ',' << dev.cells[j].m << '\n';
        }
    }
}

std::vector<est::DeviceCounts> read_counts_csv(std::istream& in) {
    std::string line;
    std::size_t lineno = 0;
    if (!next_line(in, line, lineno) || line != kCountsHeader) {
        throw ParseError(std::string("expected header '") + kCountsHeader + "'", 1);
    }
    std::vector<est::DeviceCounts> out;
    while (next_line(in, line, lineno)) {
        if (line.empty()) continue;
        const auto f = split(line, ',');
        std::size_t index = 0;
        est::CellCounts c;
        if (f.size() != 4 || f[0].empty() || !parse_uint(f[1], index) || !parse_uint(f[2], c.x) ||
            !parse_uint(f[3], c.m)) {
            throw ParseError("malformed counts row", lineno);
        }
        if (c.m == 0) throw ParseError("zero trials", lineno);
        if (c.x > c.m) throw ParseError("error_count exceeds trials", lineno);
        if (out.empty() || out.back().device_id != f[0]) {
            for (const auto& d : out) {
                if (d.device_id == f[0]) throw ParseError("rows of device '" + f[0] + "' are not contiguous", lineno);
            }
            out.push_back({f[0], {}});
        }
        auto& dev = out.back();
        if (index != dev.cells.size()) throw ParseError("cell_index out of sequence", lineno);
        dev.cells.push_back(c);
    }
    return out;
}

}  // namespace spuf::ingest
