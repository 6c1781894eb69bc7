#include <doctest.h>

#include <random>
#include <sstream>

#include "spuf/ingest.hpp"

using namespace spuf;
using namespace spuf::ingest;

namespace {

EvaluationMatrix random_matrix(std::size_t cells, std::size_t rows, std::uint64_t seed) {
    Rng rng(seed);
    std::bernoulli_distribution coin(0.3);
    EvaluationMatrix m{"chip", cells, rows, {}};
    for (std::size_t i = 0; i < cells * rows; ++i) m.bits.push_back(coin(rng) ? 1 : 0);
    return m;
}

EvaluationMatrix parse(const std::string& text, RawEncoding enc = RawEncoding::Auto) {
    std::istringstream in(text);
    return parse_evaluations(in, enc);
}

}  // namespace

TEST_CASE("text and hex encodings") {
    const auto t = parse("d1,5,3\n10110\n00110\n10111\n");
    CHECK(t.device_id == "d1");
    CHECK(t.cells == 5);
    CHECK(t.rows == 3);
    CHECK(t.at(0, 0) == 1);
    CHECK(t.at(1, 0) == 0);
    CHECK(t.at(2, 4) == 1);

    // 10110 -> 1011 0000 -> "b0"
    const auto h = parse("d1,5,3\nb0\n30\nb8\n");
    CHECK(h.bits == t.bits);

    for (auto enc : {RawEncoding::Text, RawEncoding::Hex}) {
        for (std::size_t cells : {1u, 4u, 7u, 33u}) {
            const auto m = random_matrix(cells, 9, cells);
            std::ostringstream out;
            write_evaluations(out, m, enc);
            const auto back = parse(out.str(), enc);
            CHECK(back.bits == m.bits);
            CHECK(back.device_id == m.device_id);
        }
    }
}

TEST_CASE("CRLF and blank lines are tolerated") {
    const auto t = parse("d,2,2\r\n01\r\n\r\n11\r\n");
    CHECK(t.rows == 2);
    CHECK(t.at(1, 1) == 1);
}

TEST_CASE("malformed dumps") {
    auto line_of = [](const std::string& text) {
        try {
            parse(text);
        } catch (const ParseError& e) {
            return e.line();
        }
        return std::size_t{999};
    };
    CHECK(line_of("") == 1);
    CHECK(line_of("d,x,3\n") == 1);
    CHECK(line_of("d,4,2\n0101\n010\n") == 3);
    CHECK(line_of("d,4,2\n0101\n01x1\n") == 3);
    CHECK(line_of("d,4,1\n0101\n0101\n") == 3);
    CHECK_THROWS_AS(parse("d,4,3\n0101\n0101\n"), ParseError);
    // hex padding bits must be zero
    CHECK_THROWS_AS(parse("d,5,1\nb1\n", RawEncoding::Hex), ParseError);
    CHECK_THROWS_AS(parse("d,8,1\ng0\n", RawEncoding::Hex), ParseError);
}

TEST_CASE("summaries and the tie rule") {
    // columns: (1,0,1,0) tie; (1,1,1,0) stable 1; (0,0,0,0)
    const auto m = parse("d,3,4\n110\n010\n110\n000\n");
    const auto s = summarize_cells(m);
    CHECK(s[0].bit_weight == 0.5);
    CHECK(s[0].stable_state == 0);
    CHECK(s[0].error_count == 2);
    CHECK(s[1].stable_state == 1);
    CHECK(s[1].error_count == 1);
    CHECK(s[2].error_count == 0);
    for (const auto& c : s) CHECK(c.trials == 4);
}

TEST_CASE("error counts never exceed half the trials") {
    for (std::size_t rows : {1u, 2u, 7u, 10u}) {
        const auto m = random_matrix(50, rows, rows + 100);
        for (const auto& c : summarize_cells(m)) CHECK(2 * c.error_count <= c.trials);
    }
}

TEST_CASE("complementing every bit swaps labels only") {
    auto m = random_matrix(40, 11, 7);
    const auto a = summarize_cells(m);
    for (auto& b : m.bits) b ^= 1;
    const auto b = summarize_cells(m);
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].error_count == b[i].error_count);
        CHECK(a[i].trials == b[i].trials);
        CHECK(a[i].stable_state != b[i].stable_state);
    }
}

TEST_CASE("aging window") {
    const auto m = random_matrix(20, 12, 8);
    const auto tail = discard_aging(m, 5);
    CHECK(tail.rows == 7);
    EvaluationMatrix direct{"chip", 20, 7, std::vector<std::uint8_t>(m.bits.begin() + 5 * 20, m.bits.end())};
    const auto x = summarize_cells(tail);
    const auto y = summarize_cells(direct);
    for (std::size_t i = 0; i < x.size(); ++i) {
        CHECK(x[i].error_count == y[i].error_count);
        CHECK(x[i].stable_state == y[i].stable_state);
    }
    CHECK_THROWS_AS(discard_aging(m, 12), std::invalid_argument);
}

TEST_CASE("counts CSV round trip") {
    std::vector<est::DeviceCounts> devs{{"a", {{0, 10}, {3, 10}}}, {"b", {{1, 290}, {0, 290}, {145, 290}}}};
    std::ostringstream out;
    write_counts_csv(out, devs);
    CHECK(out.str().rfind("device_id,cell_index,error_count,trials\na,0,0,10\n", 0) == 0);
    std::istringstream in(out.str());
    const auto back = read_counts_csv(in);
    REQUIRE(back.size() == 2);
    CHECK(back[1].device_id == "b");
    CHECK(back[1].cells[2].x == 145);
    CHECK(back[1].cells[2].m == 290);

    auto bad = [](const std::string& s) {
        std::istringstream i(s);
        return read_counts_csv(i);
    };
    CHECK_THROWS_AS(bad("device_id,cell_index,error_count,trials\na,1,0,10\n"), ParseError);
    CHECK_THROWS_AS(bad("device_id,cell_index,error_count,trials\na,0,11,10\n"), ParseError);
    CHECK_THROWS_AS(bad("device_id,cell_index,error_count,trials\na,0,1,10\nb,0,1,10\na,1,1,10\n"), ParseError);
    CHECK_THROWS_AS(bad("wrong,header\n"), ParseError);
}

TEST_CASE("summaries become counts") {
    const auto m = parse("d,3,4\n110\n010\n110\n000\n");
    const auto c = to_counts("d", summarize_cells(m));
    CHECK(c.device_id == "d");
    REQUIRE(c.cells.size() == 3);
    CHECK(c.cells[0].x == 2);
    CHECK(c.cells[1].m == 4);
}
