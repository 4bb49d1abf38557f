#ifndef TELEPLAN_STATEIO_HPP
#define TELEPLAN_STATEIO_HPP

#include <cctype>
#include <charconv>
#include <sstream>
#include <string>
#include <vector>

#include "teleplan/errors.hpp"
#include "teleplan/isometry.hpp"
#include "teleplan/state.hpp"

namespace teleplan {

// Amplitude file format (factor dimensions of any size, unlike the DSL):
//   dims d0 d1 ... ; owner p0 p1 ...
//   <index> <re> <im>
// One line per nonzero amplitude, indices in mixed radix with factor 0 most
// significant; unlisted indices are zero. '#' comments and blank lines are
// allowed.

namespace ioutil {

/// Shortest decimal form that parses back to exactly the same double.
inline std::string fmt_exact(double v) {
    if (v == 0.0) v = 0.0;
    char buf[40];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

struct LineTokens {
    int line = 0;
    std::vector<std::string> tokens;
    std::vector<int> cols;
};

inline std::vector<LineTokens> tokenize_lines(const std::string& text) {
    std::vector<LineTokens> out;
    std::istringstream in(text);
    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        LineTokens lt;
        lt.line = line;
        std::size_t i = 0;
        while (i < raw.size()) {
            if (raw[i] == '#') break;
            if (std::isspace(static_cast<unsigned char>(raw[i]))) {
                ++i;
                continue;
            }
            const std::size_t start = i;
            while (i < raw.size() && !std::isspace(static_cast<unsigned char>(raw[i])) &&
                   raw[i] != '#')
                ++i;
            lt.tokens.push_back(raw.substr(start, i - start));
            lt.cols.push_back(static_cast<int>(start) + 1);
        }
        if (!lt.tokens.empty()) out.push_back(std::move(lt));
    }
    return out;
}

inline long long parse_int(const LineTokens& lt, std::size_t idx,
                           const std::string& what) {
    const std::string& tok = lt.tokens[idx];
    try {
        std::size_t used = 0;
        const long long v = std::stoll(tok, &used);
        if (used != tok.size()) throw std::invalid_argument(tok);
        return v;
    } catch (const std::exception&) {
        throw ParseError(lt.line, lt.cols[idx], "expected an integer " + what, tok);
    }
}

inline double parse_real(const LineTokens& lt, std::size_t idx,
                         const std::string& what) {
    const std::string& tok = lt.tokens[idx];
    try {
        std::size_t used = 0;
        const double v = std::stod(tok, &used);
        if (used != tok.size()) throw std::invalid_argument(tok);
        return v;
    } catch (const std::exception&) {
        throw ParseError(lt.line, lt.cols[idx], "expected a number " + what, tok);
    }
}

} // namespace ioutil

inline std::string write_amplitude_text(const StateTensor& st) {
    std::string out = "dims";
    for (int d : st.factor_dims) out += " " + std::to_string(d);
    out += " ; owner";
    for (int p : st.factor_owner) out += " " + std::to_string(p);
    out += "\n";
    for (std::size_t idx = 0; idx < st.total_dim(); ++idx) {
        const cplx a = st.amplitudes[idx];
        if (a.real() == 0.0 && a.imag() == 0.0) continue;
        out += std::to_string(idx) + " " + ioutil::fmt_exact(a.real()) + " " +
               ioutil::fmt_exact(a.imag()) + "\n";
    }
    return out;
}

inline StateTensor read_amplitude_text(const std::string& text,
                                       bool renormalize = false,
                                       std::size_t max_amplitudes = kDefaultMaxAmplitudes) {
    const auto lines = ioutil::tokenize_lines(text);
    if (lines.empty()) throw ParseError(1, 1, "empty amplitude file");
    const auto& head = lines.front();
    if (head.tokens.front() != "dims")
        throw ParseError(head.line, head.cols.front(), "expected 'dims' header",
                         head.tokens.front());
    std::vector<int> dims, owner;
    std::size_t i = 1;
    while (i < head.tokens.size() && head.tokens[i] != ";") {
        const long long d = ioutil::parse_int(head, i, "dimension");
        if (d < 2 || d > 1'000'000)
            throw ParseError(head.line, head.cols[i], "dimension out of range",
                             head.tokens[i]);
        dims.push_back(static_cast<int>(d));
        ++i;
    }
    if (i >= head.tokens.size())
        throw ParseError(head.line, head.cols.back(), "expected ';' then 'owner'");
    ++i; // ';'
    if (i >= head.tokens.size() || head.tokens[i] != "owner")
        throw ParseError(head.line, i < head.tokens.size() ? head.cols[i] : 1,
                         "expected 'owner'");
    ++i;
    while (i < head.tokens.size()) {
        const long long p = ioutil::parse_int(head, i, "party index");
        if (p < 0 || p > 1000)
            throw ParseError(head.line, head.cols[i], "party index out of range",
                             head.tokens[i]);
        owner.push_back(static_cast<int>(p));
        ++i;
    }
    if (dims.empty())
        throw ParseError(head.line, 1, "no factor dimensions declared");
    if (dims.size() != owner.size())
        throw ParseError(head.line, 1, "dims and owner lists differ in length");

    std::size_t total;
    try {
        total = checked_total_dim(dims, max_amplitudes);
    } catch (const DimensionLimitError&) {
        throw;
    } catch (const std::exception& e) {
        throw ParseError(head.line, 1, e.what());
    }
    std::vector<cplx> amps(total, cplx(0.0, 0.0));
    std::vector<bool> seen(total, false);
    for (std::size_t l = 1; l < lines.size(); ++l) {
        const auto& lt = lines[l];
        if (lt.tokens.size() != 3)
            throw ParseError(lt.line, lt.cols.front(),
                             "expected '<index> <re> <im>'", lt.tokens.front());
        const long long idx = ioutil::parse_int(lt, 0, "amplitude index");
        if (idx < 0 || static_cast<std::size_t>(idx) >= total)
            throw ParseError(lt.line, lt.cols[0], "amplitude index out of range",
                             lt.tokens[0]);
        if (seen[static_cast<std::size_t>(idx)])
            throw ParseError(lt.line, lt.cols[0], "duplicate amplitude index",
                             lt.tokens[0]);
        seen[static_cast<std::size_t>(idx)] = true;
        amps[static_cast<std::size_t>(idx)] =
            cplx(ioutil::parse_real(lt, 1, "(real part)"),
                 ioutil::parse_real(lt, 2, "(imaginary part)"));
    }
    try {
        return make_state(std::move(dims), std::move(owner), std::move(amps),
                          {.renormalize = renormalize,
                           .max_amplitudes = max_amplitudes});
    } catch (const DimensionLimitError&) {
        throw;
    } catch (const std::invalid_argument& e) {
        throw ParseError(head.line, 1, e.what());
    }
}

// Embedding file format, one block per party:
//   isometry <party-name> <input-dim> <output-dim>...
//   <index> <re> <im>
// Matrix entries are column-major (index = column * D + row, D the output
// dimension); unlisted entries are zero.

inline std::string write_embeddings_text(const std::vector<IsometrySpec>& specs,
                                         const StateTensor& st) {
    std::string out;
    for (const IsometrySpec& spec : specs) {
        out += "isometry " + st.party_name(spec.party) + " " +
               std::to_string(spec.input_dim);
        for (int d : spec.output_factor_dims) out += " " + std::to_string(d);
        out += "\n";
        const Eigen::Index rows = spec.columns.rows();
        for (Eigen::Index col = 0; col < spec.columns.cols(); ++col)
            for (Eigen::Index row = 0; row < rows; ++row) {
                const cplx v = spec.columns(row, col);
                if (v.real() == 0.0 && v.imag() == 0.0) continue;
                out += std::to_string(col * rows + row) + " " +
                       ioutil::fmt_exact(v.real()) + " " + ioutil::fmt_exact(v.imag()) + "\n";
            }
    }
    return out;
}

inline std::vector<IsometrySpec> read_embeddings_text(const std::string& text,
                                                      const StateTensor& st) {
    const auto lines = ioutil::tokenize_lines(text);
    std::vector<IsometrySpec> specs;
    IsometrySpec* current = nullptr;
    long long current_rows = 0;
    for (const auto& lt : lines) {
        if (lt.tokens.front() == "isometry") {
            if (lt.tokens.size() < 4)
                throw ParseError(lt.line, lt.cols.front(),
                                 "expected 'isometry <party> <d> <out-dims...>'");
            IsometrySpec spec;
            const std::string& name = lt.tokens[1];
            spec.party = st.party_index(name);
            if (spec.party < 0)
                throw ParseError(lt.line, lt.cols[1], "unknown party", name);
            spec.input_dim = static_cast<int>(ioutil::parse_int(lt, 2, "input dimension"));
            long long rows = 1;
            for (std::size_t i = 3; i < lt.tokens.size(); ++i) {
                const long long d = ioutil::parse_int(lt, i, "output dimension");
                if (d < 2)
                    throw ParseError(lt.line, lt.cols[i],
                                     "output dimension must be >= 2", lt.tokens[i]);
                spec.output_factor_dims.push_back(static_cast<int>(d));
                rows *= d;
            }
            if (spec.input_dim < 1 || rows < spec.input_dim)
                throw ParseError(lt.line, lt.cols[2],
                                 "output dimension below input dimension");
            spec.columns = Eigen::MatrixXcd::Zero(rows, spec.input_dim);
            specs.push_back(std::move(spec));
            current = &specs.back();
            current_rows = rows;
            continue;
        }
        if (!current)
            throw ParseError(lt.line, lt.cols.front(),
                             "expected an 'isometry' header first",
                             lt.tokens.front());
        if (lt.tokens.size() != 3)
            throw ParseError(lt.line, lt.cols.front(),
                             "expected '<index> <re> <im>'", lt.tokens.front());
        const long long idx = ioutil::parse_int(lt, 0, "entry index");
        const long long entries = current_rows * current->input_dim;
        if (idx < 0 || idx >= entries)
            throw ParseError(lt.line, lt.cols[0], "entry index out of range",
                             lt.tokens[0]);
        current->columns(idx % current_rows, idx / current_rows) =
            cplx(ioutil::parse_real(lt, 1, "(real part)"),
                 ioutil::parse_real(lt, 2, "(imaginary part)"));
    }
    return specs;
}

} // namespace teleplan

#endif
