#ifndef TELEPLAN_PARSE_HPP
#define TELEPLAN_PARSE_HPP

#include <cctype>
#include <charconv>
#include <cmath>
#include <complex>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "teleplan/errors.hpp"
#include "teleplan/state.hpp"
#include "teleplan/stateio.hpp"

namespace teleplan {

// --------------------------------------------------------------------------
// State description language
//
//   source := header ";" expr | expr
//   header := "parties" (NAME ":" INT)+
//   expr   := ["-"] term (("+"|"-") term)*
//   term   := [scalar "*"?] atom | atom
//   atom   := primary ("(x)" primary)*
//   primary:= ket | family "(" args ")" | "(" expr ")"
//   ket    := "|" DIGIT+ ">"
//   family := "ghz" | "toast" | "schmidt" | "epr" | "pairs" | "etoast"
//   scalar := part ["/" part] ["i"] | "i"        part := NUMBER | "sqrt(" NUMBER ")"
//
// "#" starts a comment to end of line; whitespace is insignificant. A scalar
// with the "i" suffix is imaginary, so a complex amplitude is written as two
// terms sharing one ket. Ket digits are single characters 0-9; factors of
// dimension > 10 use the amplitude file format instead (see stateio).
// --------------------------------------------------------------------------

struct SrcPos {
    int line = 1;
    int col = 1;
};

struct FamilyArg {
    enum class Kind { Number, Name, Pair };
    Kind kind = Kind::Number;
    double number = 0.0;
    std::string name;   // Name, Pair first endpoint
    std::string second; // Pair second endpoint
    SrcPos pos;
};

struct ExprNode;
using ExprPtr = std::shared_ptr<const ExprNode>;

struct ExprNode {
    enum class Kind { Ket, Family, Scaled, Sum, Tensor };
    Kind kind = Kind::Ket;
    SrcPos pos;
    std::string digits;            // Ket
    std::string family;            // Family
    std::vector<FamilyArg> args;   // Family
    cplx coeff{1.0, 0.0};          // Scaled
    std::vector<ExprPtr> children; // Scaled (1), Sum / Tensor (>= 2)
    std::vector<int> signs;        // Sum: +1 / -1 per child
};

struct HeaderEntry {
    std::string party;
    int dim = 2;
    SrcPos pos;
};

/// Parse result: optional party header plus the expression tree.
struct StateExpr {
    std::optional<std::vector<HeaderEntry>> header;
    ExprPtr root;
};

namespace dsl {

struct Token {
    enum class Kind {
        Ident, Number, Ket, LParen, RParen, Plus, Minus, Star, Slash,
        Colon, Semi, Comma, Tensor, End
    };
    Kind kind = Kind::End;
    std::string text;
    double number = 0.0;
    bool is_int = false;
    SrcPos pos;
};

inline std::vector<Token> lex(const std::string& text) {
    std::vector<Token> out;
    std::size_t i = 0;
    int line = 1, col = 1;
    auto advance = [&](std::size_t k = 1) {
        for (std::size_t j = 0; j < k; ++j, ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
    };
    while (i < text.size()) {
        const char c = text[i];
        if (c == '#') {
            while (i < text.size() && text[i] != '\n') advance();
            continue;
        }
        if (std::isspace(static_cast<unsigned char>(c))) {
            advance();
            continue;
        }
        Token tok;
        tok.pos = {line, col};
        if (std::isdigit(static_cast<unsigned char>(c)) ||
            (c == '.' && i + 1 < text.size() &&
             std::isdigit(static_cast<unsigned char>(text[i + 1])))) {
            std::size_t j = i;
            bool is_int = true;
            while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
            if (j < text.size() && text[j] == '.') {
                is_int = false;
                ++j;
                while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
            }
            if (j < text.size() && (text[j] == 'e' || text[j] == 'E')) {
                std::size_t k = j + 1;
                if (k < text.size() && (text[k] == '+' || text[k] == '-')) ++k;
                if (k < text.size() && std::isdigit(static_cast<unsigned char>(text[k]))) {
                    is_int = false;
                    j = k;
                    while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
                }
            }
            tok.kind = Token::Kind::Number;
            tok.text = text.substr(i, j - i);
            tok.number = std::strtod(tok.text.c_str(), nullptr);
            tok.is_int = is_int;
            advance(j - i);
            out.push_back(std::move(tok));
            continue;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t j = i;
            while (j < text.size() && (std::isalnum(static_cast<unsigned char>(text[j])) ||
                                       text[j] == '_'))
                ++j;
            tok.kind = Token::Kind::Ident;
            tok.text = text.substr(i, j - i);
            advance(j - i);
            out.push_back(std::move(tok));
            continue;
        }
        if (c == '|') {
            std::size_t j = i + 1;
            std::string digits;
            while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j])))
                digits += text[j++];
            if (j >= text.size() || text[j] != '>')
                throw ParseError(line, col,
                                 digits.empty() ? "empty or unterminated ket"
                                                : "unterminated ket (expected '>')");
            if (digits.empty())
                throw ParseError(line, col, "ket needs at least one digit");
            tok.kind = Token::Kind::Ket;
            tok.text = digits;
            advance(j + 1 - i);
            out.push_back(std::move(tok));
            continue;
        }
        if (c == '(') {
            if (i + 2 < text.size() && text[i + 1] == 'x' && text[i + 2] == ')') {
                tok.kind = Token::Kind::Tensor;
                tok.text = "(x)";
                advance(3);
            } else {
                tok.kind = Token::Kind::LParen;
                tok.text = "(";
                advance();
            }
            out.push_back(std::move(tok));
            continue;
        }
        switch (c) {
            case ')': tok.kind = Token::Kind::RParen; break;
            case '+': tok.kind = Token::Kind::Plus; break;
            case '-': tok.kind = Token::Kind::Minus; break;
            case '*': tok.kind = Token::Kind::Star; break;
            case '/': tok.kind = Token::Kind::Slash; break;
            case ':': tok.kind = Token::Kind::Colon; break;
            case ';': tok.kind = Token::Kind::Semi; break;
            case ',': tok.kind = Token::Kind::Comma; break;
            default:
                throw ParseError(line, col, "unexpected character",
                                 std::string(1, c));
        }
        tok.text = std::string(1, c);
        advance();
        out.push_back(std::move(tok));
    }
    Token end;
    end.kind = Token::Kind::End;
    end.pos = {line, col};
    out.push_back(std::move(end));
    return out;
}

class Parser {
public:
    explicit Parser(const std::string& text) : tokens_(lex(text)) {}

    StateExpr parse_source() {
        StateExpr result;
        if (peek().kind == Token::Kind::Ident && peek().text == "parties") {
            result.header = parse_header();
            expect(Token::Kind::Semi, "expected ';' after the party header");
        }
        result.root = parse_expr();
        if (peek().kind != Token::Kind::End)
            fail("unexpected token after expression");
        return result;
    }

private:
    std::vector<Token> tokens_;
    std::size_t pos_ = 0;

    const Token& peek(std::size_t ahead = 0) const {
        const std::size_t idx = std::min(pos_ + ahead, tokens_.size() - 1);
        return tokens_[idx];
    }
    const Token& take() { return tokens_[std::min(pos_++, tokens_.size() - 1)]; }
    [[noreturn]] void fail(const std::string& msg) const {
        const Token& t = peek();
        throw ParseError(t.pos.line, t.pos.col, msg, t.text);
    }
    const Token& expect(Token::Kind kind, const std::string& msg) {
        if (peek().kind != kind) fail(msg);
        return take();
    }

    std::vector<HeaderEntry> parse_header() {
        take(); // "parties"
        std::vector<HeaderEntry> entries;
        while (peek().kind == Token::Kind::Ident) {
            HeaderEntry entry;
            entry.pos = peek().pos;
            entry.party = take().text;
            expect(Token::Kind::Colon, "expected ':' after party name");
            const Token& dim = peek();
            if (dim.kind != Token::Kind::Number || !dim.is_int)
                fail("expected an integer dimension");
            entry.dim = static_cast<int>(dim.number);
            take();
            entries.push_back(std::move(entry));
        }
        if (entries.empty()) fail("expected at least one 'NAME:DIM' entry");
        return entries;
    }

    bool starts_scalar() const {
        const Token& t = peek();
        if (t.kind == Token::Kind::Number) return true;
        return t.kind == Token::Kind::Ident && (t.text == "sqrt" || t.text == "i");
    }

    double parse_scalar_part() {
        if (peek().kind == Token::Kind::Ident && peek().text == "sqrt") {
            take();
            expect(Token::Kind::LParen, "expected '(' after sqrt");
            double sign = 1.0;
            if (peek().kind == Token::Kind::Minus) {
                take();
                sign = -1.0;
            }
            const Token& num = peek();
            if (num.kind != Token::Kind::Number) fail("expected a number inside sqrt");
            const double value = sign * num.number;
            if (value < 0.0) fail("sqrt of a negative number");
            take();
            expect(Token::Kind::RParen, "expected ')' after sqrt argument");
            return std::sqrt(value);
        }
        const Token& num = peek();
        if (num.kind != Token::Kind::Number) fail("expected a number");
        take();
        return num.number;
    }

    /// scalar := part ["/" part] ["i"] | "i"; optional leading '-' when
    /// `allow_sign` (family arguments).
    cplx parse_scalar(bool allow_sign, bool allow_imaginary) {
        double sign = 1.0;
        if (allow_sign && peek().kind == Token::Kind::Minus) {
            take();
            sign = -1.0;
        }
        double value;
        if (peek().kind == Token::Kind::Ident && peek().text == "i") {
            if (!allow_imaginary) fail("imaginary scalar not allowed here");
            take();
            return cplx(0.0, sign);
        }
        value = parse_scalar_part();
        if (peek().kind == Token::Kind::Slash) {
            take();
            const double denom = parse_scalar_part();
            if (denom == 0.0) fail("division by zero");
            value /= denom;
        }
        if (peek().kind == Token::Kind::Ident && peek().text == "i") {
            if (!allow_imaginary) fail("imaginary scalar not allowed here");
            take();
            return cplx(0.0, sign * value);
        }
        return cplx(sign * value, 0.0);
    }

    ExprPtr parse_expr() {
        int sign = 1;
        if (peek().kind == Token::Kind::Minus) {
            take();
            sign = -1;
        }
        auto node = std::make_shared<ExprNode>();
        node->kind = ExprNode::Kind::Sum;
        node->pos = peek().pos;
        node->children.push_back(parse_term());
        node->signs.push_back(sign);
        while (peek().kind == Token::Kind::Plus || peek().kind == Token::Kind::Minus) {
            const int s = peek().kind == Token::Kind::Plus ? 1 : -1;
            take();
            node->children.push_back(parse_term());
            node->signs.push_back(s);
        }
        if (node->children.size() == 1 && node->signs[0] == 1)
            return node->children[0];
        return node;
    }

    /// Parenthesized scalar coefficient, e.g. "(1/2)|00>". Backtracks when
    /// the parentheses turn out to hold a subexpression instead.
    std::optional<cplx> try_paren_scalar() {
        if (peek().kind != Token::Kind::LParen) return std::nullopt;
        const std::size_t saved = pos_;
        take();
        if (!starts_scalar() && peek().kind != Token::Kind::Minus) {
            pos_ = saved;
            return std::nullopt;
        }
        try {
            const cplx value = parse_scalar(true, true);
            if (peek().kind == Token::Kind::RParen) {
                take();
                const Token::Kind next = peek().kind;
                if (next == Token::Kind::Star || next == Token::Kind::Ket ||
                    next == Token::Kind::Ident || next == Token::Kind::LParen)
                    return value;
            }
        } catch (const ParseError&) {
        }
        pos_ = saved;
        return std::nullopt;
    }

    ExprPtr parse_term() {
        const SrcPos pos = peek().pos;
        if (const std::optional<cplx> paren = try_paren_scalar()) {
            auto node = std::make_shared<ExprNode>();
            node->kind = ExprNode::Kind::Scaled;
            node->pos = pos;
            node->coeff = *paren;
            if (peek().kind == Token::Kind::Star) take();
            node->children.push_back(parse_atom());
            return node;
        }
        if (starts_scalar()) {
            auto node = std::make_shared<ExprNode>();
            node->kind = ExprNode::Kind::Scaled;
            node->pos = pos;
            node->coeff = parse_scalar(false, true);
            if (peek().kind == Token::Kind::Star) take();
            node->children.push_back(parse_atom());
            return node;
        }
        return parse_atom();
    }

    ExprPtr parse_atom() {
        ExprPtr first = parse_primary();
        if (peek().kind != Token::Kind::Tensor) return first;
        auto node = std::make_shared<ExprNode>();
        node->kind = ExprNode::Kind::Tensor;
        node->pos = first->pos;
        node->children.push_back(std::move(first));
        while (peek().kind == Token::Kind::Tensor) {
            take();
            node->children.push_back(parse_primary());
        }
        return node;
    }

    ExprPtr parse_primary() {
        const Token& t = peek();
        if (t.kind == Token::Kind::Ket) {
            auto node = std::make_shared<ExprNode>();
            node->kind = ExprNode::Kind::Ket;
            node->pos = t.pos;
            node->digits = t.text;
            take();
            return node;
        }
        if (t.kind == Token::Kind::Ident) return parse_family();
        if (t.kind == Token::Kind::LParen) {
            take();
            ExprPtr inner = parse_expr();
            expect(Token::Kind::RParen, "expected ')'");
            return inner;
        }
        fail("expected a ket, family call, or '('");
    }

    ExprPtr parse_family() {
        auto node = std::make_shared<ExprNode>();
        node->kind = ExprNode::Kind::Family;
        node->pos = peek().pos;
        node->family = take().text;
        const bool known = node->family == "ghz" || node->family == "toast" ||
                           node->family == "schmidt" || node->family == "epr" ||
                           node->family == "pairs" || node->family == "etoast";
        if (!known)
            throw ParseError(node->pos.line, node->pos.col, "unknown family",
                             node->family);
        expect(Token::Kind::LParen, "expected '(' after family name");
        if (node->family == "epr" || node->family == "pairs") {
            while (true) {
                FamilyArg arg;
                arg.pos = peek().pos;
                if (peek().kind != Token::Kind::Ident) fail("expected a party name");
                arg.name = take().text;
                if (node->family == "pairs") {
                    arg.kind = FamilyArg::Kind::Pair;
                    expect(Token::Kind::Minus, "expected '-' between pair endpoints");
                    if (peek().kind != Token::Kind::Ident) fail("expected a party name");
                    arg.second = take().text;
                } else {
                    arg.kind = FamilyArg::Kind::Name;
                }
                node->args.push_back(std::move(arg));
                if (peek().kind != Token::Kind::Comma) break;
                take();
            }
        } else {
            while (true) {
                FamilyArg arg;
                arg.pos = peek().pos;
                arg.kind = FamilyArg::Kind::Number;
                const cplx v = parse_scalar(true, false);
                arg.number = v.real();
                node->args.push_back(std::move(arg));
                if (peek().kind != Token::Kind::Comma) break;
                take();
            }
        }
        expect(Token::Kind::RParen, "expected ')' after family arguments");
        validate_arity(*node);
        return node;
    }

    void validate_arity(const ExprNode& node) const {
        const std::size_t n = node.args.size();
        auto bad = [&](const std::string& msg) {
            throw ParseError(node.pos.line, node.pos.col, msg, node.family);
        };
        if (node.family == "ghz" && (n < 1 || n > 2)) bad("ghz expects (N) or (N, k)");
        if (node.family == "toast" && n != 1) bad("toast expects (N)");
        if (node.family == "etoast" && n != 1) bad("etoast expects (eps)");
        if (node.family == "schmidt" && n < 3)
            bad("schmidt expects (N, a0, a1, ...) with at least two coefficients");
        if (node.family == "epr" && n != 2) bad("epr expects (X, Y)");
    }
};

} // namespace dsl

/// Parse DSL text into an expression tree. No state is constructed yet.
inline StateExpr parse(const std::string& text) {
    dsl::Parser parser(text);
    return parser.parse_source();
}

namespace dsl {

struct KetPoly {
    int length = 0;
    std::map<std::string, cplx> terms;
};

using Value = std::variant<KetPoly, StateTensor>;

[[noreturn]] inline void fail_at(const SrcPos& pos, const std::string& msg,
                                 const std::string& token = {}) {
    throw ParseError(pos.line, pos.col, msg, token);
}

inline int require_int(const FamilyArg& arg, const std::string& what) {
    const double r = std::round(arg.number);
    if (std::abs(arg.number - r) > 1e-9)
        fail_at(arg.pos, what + " must be an integer");
    return static_cast<int>(r);
}

inline StateTensor build_family(const ExprNode& node) {
    try {
        if (node.family == "ghz") {
            const int n = require_int(node.args[0], "ghz party count");
            const int k = node.args.size() > 1
                              ? require_int(node.args[1], "ghz level count")
                              : 2;
            return ghz(n, k);
        }
        if (node.family == "toast")
            return toast(require_int(node.args[0], "toast party count"));
        if (node.family == "etoast") return epsilon_toast(node.args[0].number);
        if (node.family == "schmidt") {
            const int n = require_int(node.args[0], "schmidt party count");
            std::vector<double> coeffs;
            for (std::size_t i = 1; i < node.args.size(); ++i)
                coeffs.push_back(node.args[i].number);
            return schmidt_state(n, coeffs);
        }
        // epr / pairs: parties named by first appearance.
        std::vector<std::string> names;
        auto party_of = [&names](const std::string& name) {
            for (std::size_t p = 0; p < names.size(); ++p)
                if (names[p] == name) return static_cast<int>(p);
            names.push_back(name);
            return static_cast<int>(names.size() - 1);
        };
        std::vector<PartyPair> pairs;
        if (node.family == "epr") {
            pairs.push_back({party_of(node.args[0].name),
                             party_of(node.args[1].name)});
        } else {
            for (const FamilyArg& arg : node.args)
                pairs.push_back({party_of(arg.name), party_of(arg.second)});
        }
        return pair_graph_state(static_cast<int>(names.size()), pairs,
                                {.party_names = names});
    } catch (const DimensionLimitError&) {
        throw;
    } catch (const std::invalid_argument& e) {
        fail_at(node.pos, e.what(), node.family);
    }
}

inline Value eval(const ExprNode& node) {
    switch (node.kind) {
        case ExprNode::Kind::Ket: {
            KetPoly poly;
            poly.length = static_cast<int>(node.digits.size());
            poly.terms[node.digits] = cplx(1.0, 0.0);
            return poly;
        }
        case ExprNode::Kind::Family:
            return build_family(node);
        case ExprNode::Kind::Scaled: {
            Value child = eval(*node.children[0]);
            if (!std::holds_alternative<KetPoly>(child))
                fail_at(node.pos, "a family state cannot be scaled");
            KetPoly poly = std::get<KetPoly>(std::move(child));
            for (auto& [digits, amp] : poly.terms) amp *= node.coeff;
            return poly;
        }
        case ExprNode::Kind::Sum: {
            KetPoly acc;
            bool first = true;
            for (std::size_t i = 0; i < node.children.size(); ++i) {
                Value child = eval(*node.children[i]);
                if (!std::holds_alternative<KetPoly>(child))
                    fail_at(node.children[i]->pos,
                            "a family state cannot be combined in a sum");
                KetPoly poly = std::get<KetPoly>(std::move(child));
                const double sign = node.signs[i] > 0 ? 1.0 : -1.0;
                if (first) {
                    acc.length = poly.length;
                    first = false;
                } else if (acc.length != poly.length) {
                    fail_at(node.children[i]->pos, "ket length mismatch in sum");
                }
                for (const auto& [digits, amp] : poly.terms)
                    acc.terms[digits] += sign * amp;
            }
            return acc;
        }
        case ExprNode::Kind::Tensor: {
            KetPoly acc;
            acc.terms[""] = cplx(1.0, 0.0);
            for (const ExprPtr& child : node.children) {
                Value v = eval(*child);
                if (!std::holds_alternative<KetPoly>(v))
                    fail_at(child->pos,
                            "a family state cannot be combined in a tensor product");
                const KetPoly& rhs = std::get<KetPoly>(v);
                KetPoly next;
                next.length = acc.length + rhs.length;
                for (const auto& [ld, lv] : acc.terms)
                    for (const auto& [rd, rv] : rhs.terms)
                        next.terms[ld + rd] += lv * rv;
                acc = std::move(next);
            }
            return acc;
        }
    }
    fail_at(node.pos, "internal: unhandled node kind");
}

inline void collect_kets(const ExprNode& node,
                         std::vector<const ExprNode*>& out) {
    if (node.kind == ExprNode::Kind::Ket) out.push_back(&node);
    for (const ExprPtr& child : node.children) collect_kets(*child, out);
}

inline bool contains_family(const ExprNode& node) {
    if (node.kind == ExprNode::Kind::Family) return true;
    for (const ExprPtr& child : node.children)
        if (contains_family(*child)) return true;
    return false;
}

} // namespace dsl

/// Build the state a parsed expression describes. Family calls delegate to
/// the statekit builders; explicit amplitudes must already be normalized
/// (within the make_state tolerance).
inline StateTensor elaborate(const StateExpr& expr) {
    const ExprNode& root = *expr.root;

    // Factor list from the header, if any.
    std::vector<int> header_dims;
    std::vector<std::string> header_factor_party;
    if (expr.header) {
        for (const HeaderEntry& entry : *expr.header) {
            if (entry.dim < 2)
                dsl::fail_at(entry.pos, "party dimension must be >= 2", entry.party);
            if (entry.dim > 10)
                dsl::fail_at(entry.pos,
                             "dimension > 10 requires the amplitude file format",
                             entry.party);
            header_dims.push_back(entry.dim);
            header_factor_party.push_back(entry.party);
        }
    }

    if (dsl::contains_family(root)) {
        dsl::Value value = dsl::eval(root);
        if (!std::holds_alternative<StateTensor>(value))
            dsl::fail_at(root.pos, "internal: family expression did not yield a state");
        StateTensor st = std::get<StateTensor>(std::move(value));
        if (expr.header) {
            // The header must describe exactly the family's factor structure.
            for (const std::string& declared : header_factor_party) {
                if (st.party_index(declared) < 0)
                    dsl::fail_at(expr.header->front().pos,
                                 "party " + declared + " owns no factor", declared);
            }
            if (header_dims.size() != static_cast<std::size_t>(st.num_factors()))
                dsl::fail_at(expr.header->front().pos,
                             "header factor count does not match the family state");
            for (int f = 0; f < st.num_factors(); ++f) {
                if (header_dims[f] != st.factor_dims[f] ||
                    header_factor_party[f] != st.party_name(st.factor_owner[f]))
                    dsl::fail_at((*expr.header)[f].pos,
                                 "header entry does not match the family state",
                                 header_factor_party[f]);
            }
        }
        return st;
    }

    // Ket expression: determine the factor list, validate digits, assemble.
    std::vector<const ExprNode*> kets;
    dsl::collect_kets(root, kets);
    if (kets.empty()) dsl::fail_at(root.pos, "expression contains no kets");

    std::vector<int> dims;
    std::vector<std::string> factor_party;
    if (expr.header) {
        dims = header_dims;
        factor_party = header_factor_party;
    } else {
        // Default: one qubit party per ket position. Tensor products build
        // longer strings, so infer the length from the evaluated expression
        // below; for digit validation use the per-position default of 2.
    }

    dsl::Value value = dsl::eval(root);
    dsl::KetPoly poly = std::get<dsl::KetPoly>(std::move(value));
    if (!expr.header) {
        dims.assign(poly.length, 2);
        for (int f = 0; f < poly.length; ++f) factor_party.push_back(party_label(f));
    }
    if (poly.length != static_cast<int>(dims.size())) {
        const ExprNode* witness = kets.front();
        dsl::fail_at(witness->pos,
                     "ket length " + std::to_string(poly.length) +
                         " does not match the declared " +
                         std::to_string(dims.size()) + " factors",
                     witness->digits);
    }
    // Tensor products shift ket positions, so digits are validated on the
    // assembled strings; the error points at a ket containing the digit.
    for (const auto& entry : poly.terms) {
        const std::string& digits = entry.first;
        for (int f = 0; f < poly.length; ++f) {
            if (digits[f] - '0' < dims[f]) continue;
            const ExprNode* witness = kets.front();
            for (const ExprNode* ket : kets)
                if (ket->digits.find(digits[f]) != std::string::npos) {
                    witness = ket;
                    break;
                }
            dsl::fail_at(witness->pos,
                         "digit " + std::string(1, digits[f]) +
                             " exceeds dimension " + std::to_string(dims[f]) +
                             " of factor " + std::to_string(f + 1),
                         digits);
        }
    }

    // Party list: unique names in order of first appearance.
    std::vector<std::string> party_names;
    std::vector<int> owner;
    for (const std::string& name : factor_party) {
        int idx = -1;
        for (std::size_t p = 0; p < party_names.size(); ++p)
            if (party_names[p] == name) idx = static_cast<int>(p);
        if (idx < 0) {
            party_names.push_back(name);
            idx = static_cast<int>(party_names.size()) - 1;
        }
        owner.push_back(idx);
    }

    std::vector<std::size_t> weight(dims.size(), 1);
    for (int f = static_cast<int>(dims.size()) - 2; f >= 0; --f)
        weight[f] = weight[f + 1] * static_cast<std::size_t>(dims[f + 1]);
    std::size_t total = 1;
    for (int d : dims) total *= static_cast<std::size_t>(d);
    std::vector<cplx> amps(total, cplx(0.0, 0.0));
    for (const auto& [digits, amp] : poly.terms) {
        std::size_t idx = 0;
        for (int f = 0; f < poly.length; ++f)
            idx += static_cast<std::size_t>(digits[f] - '0') * weight[f];
        amps[idx] += amp;
    }
    try {
        return make_state(std::move(dims), std::move(owner), std::move(amps),
                          {.party_names = party_names});
    } catch (const DimensionLimitError&) {
        throw;
    } catch (const std::invalid_argument& e) {
        dsl::fail_at(root.pos, e.what());
    }
}

namespace dsl {

/// Shortest decimal form that parses back to exactly the same double.
inline std::string format_double(double v) {
    if (v == 0.0) v = 0.0; // normalize -0
    char buf[40];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

} // namespace dsl

/// Serialize a state to text that parses back to the same state (amplitudes
/// within 1e-12). States with a factor dimension > 10 fall back to the
/// amplitude file format, which parse_state_text also accepts.
inline std::string render(const StateTensor& st) {
    for (int d : st.factor_dims)
        if (d > 10) return write_amplitude_text(st);

    std::string out = "parties";
    for (int f = 0; f < st.num_factors(); ++f)
        out += " " + st.party_name(st.factor_owner[f]) + ":" +
               std::to_string(st.factor_dims[f]);
    out += "; ";

    std::string digits(st.factor_dims.size(), '0');
    bool first = true;
    for (std::size_t idx = 0; idx < st.total_dim(); ++idx) {
        std::size_t rem = idx;
        for (int f = st.num_factors() - 1; f >= 0; --f) {
            digits[f] = static_cast<char>('0' + rem % st.factor_dims[f]);
            rem /= st.factor_dims[f];
        }
        const cplx amp = st.amplitudes[idx];
        for (int part = 0; part < 2; ++part) {
            const double v = part == 0 ? amp.real() : amp.imag();
            if (v == 0.0) continue;
            if (first) {
                out += v < 0 ? "-" : "";
                first = false;
            } else {
                out += v < 0 ? " - " : " + ";
            }
            out += dsl::format_double(std::abs(v));
            if (part == 1) out += "i";
            out += "|" + digits + ">";
        }
    }
    return out;
}

/// Universal text entry point: amplitude files (leading "dims") or DSL.
inline StateTensor parse_state_text(const std::string& text) {
    std::size_t i = 0;
    while (i < text.size()) {
        if (text[i] == '#') {
            while (i < text.size() && text[i] != '\n') ++i;
        } else if (std::isspace(static_cast<unsigned char>(text[i]))) {
            ++i;
        } else {
            break;
        }
    }
    if (text.compare(i, 5, "dims ") == 0 || text.compare(i, 5, "dims\t") == 0)
        return read_amplitude_text(text);
    return elaborate(parse(text));
}

} // namespace teleplan

#endif
