#pragma once

#include <cctype>
#include <charconv>
#include <cmath>
#include <functional>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "numq/error.hpp"

namespace numq {

// Compiled arithmetic/boolean expression over the variables `value` and
// `timestamp`. Grammar (loosest binding first):
//
//   or    := and ('||' and)*
//   and   := cmp ('&&' cmp)*
//   cmp   := add (('<'|'<='|'>'|'>='|'=='|'!=') add)?
//   add   := mul (('+'|'-') mul)*
//   mul   := unary (('*'|'/') unary)*
//   unary := ('-'|'!') unary | primary
//   primary := number | 'value' | 'timestamp' | 'abs' '(' or ')' | '(' or ')'
//
// Booleans are 0/1 doubles; any comparison involving NaN is false. Evaluation
// is total over finite inputs: it never throws.
class Expression {
public:
    using EvalFn = std::function<double(double value, double timestamp)>;

    static Expression compile(std::string source) {
        Parser parser(source);
        EvalFn fn = parser.parse_or();
        parser.skip_ws();
        if (!parser.at_end())
            throw ConfigError("expression: unexpected trailing input in '" + source + "'");
        return Expression(std::move(source), std::move(fn));
    }

    double eval(double value, double timestamp) const { return fn_(value, timestamp); }
    bool truthy(double value, double timestamp) const {
        const double r = eval(value, timestamp);
        return std::isfinite(r) ? r != 0.0 : !std::isnan(r);
    }
    const std::string& source() const { return source_; }

private:
    Expression(std::string source, EvalFn fn) : source_(std::move(source)), fn_(std::move(fn)) {}

    struct Parser {
        std::string_view s;
        std::size_t pos = 0;

        explicit Parser(std::string_view src) : s(src) {}

        void skip_ws() {
            while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
        }
        bool at_end() const { return pos >= s.size(); }
        bool consume(std::string_view token) {
            skip_ws();
            if (s.substr(pos, token.size()) != token) return false;
            pos += token.size();
            return true;
        }
        char peek() {
            skip_ws();
            return at_end() ? '\0' : s[pos];
        }

        EvalFn parse_or() {
            EvalFn lhs = parse_and();
            while (consume("||")) {
                EvalFn rhs = parse_and();
                lhs = [lhs, rhs](double v, double t) {
                    return (lhs(v, t) != 0.0 || rhs(v, t) != 0.0) ? 1.0 : 0.0;
                };
            }
            return lhs;
        }

        EvalFn parse_and() {
            EvalFn lhs = parse_cmp();
            while (consume("&&")) {
                EvalFn rhs = parse_cmp();
                lhs = [lhs, rhs](double v, double t) {
                    return (lhs(v, t) != 0.0 && rhs(v, t) != 0.0) ? 1.0 : 0.0;
                };
            }
            return lhs;
        }

        EvalFn parse_cmp() {
            EvalFn lhs = parse_add();
            skip_ws();
            // Two-character operators before their one-character prefixes.
            static constexpr std::string_view ops[] = {"<=", ">=", "==", "!=", "<", ">"};
            for (std::string_view op : ops) {
                if (consume(op)) {
                    EvalFn rhs = parse_add();
                    std::string opname(op);
                    return [lhs, rhs, opname](double v, double t) {
                        const double a = lhs(v, t), b = rhs(v, t);
                        bool r = false;
                        if (opname == "<=") r = a <= b;
                        else if (opname == ">=") r = a >= b;
                        else if (opname == "==") r = a == b;
                        else if (opname == "!=") r = a != b;
                        else if (opname == "<") r = a < b;
                        else r = a > b;
                        return r ? 1.0 : 0.0;
                    };
                }
            }
            return lhs;
        }

        EvalFn parse_add() {
            EvalFn lhs = parse_mul();
            for (;;) {
                if (consume("+")) {
                    EvalFn rhs = parse_mul();
                    lhs = [lhs, rhs](double v, double t) { return lhs(v, t) + rhs(v, t); };
                } else if (peek() == '-' && !at_end()) {
                    ++pos;
                    EvalFn rhs = parse_mul();
                    lhs = [lhs, rhs](double v, double t) { return lhs(v, t) - rhs(v, t); };
                } else {
                    return lhs;
                }
            }
        }

        EvalFn parse_mul() {
            EvalFn lhs = parse_unary();
            for (;;) {
                if (consume("*")) {
                    EvalFn rhs = parse_unary();
                    lhs = [lhs, rhs](double v, double t) { return lhs(v, t) * rhs(v, t); };
                } else if (consume("/")) {
                    EvalFn rhs = parse_unary();
                    lhs = [lhs, rhs](double v, double t) { return lhs(v, t) / rhs(v, t); };
                } else {
                    return lhs;
                }
            }
        }

        EvalFn parse_unary() {
            if (consume("!")) {
                EvalFn inner = parse_unary();
                return [inner](double v, double t) { return inner(v, t) == 0.0 ? 1.0 : 0.0; };
            }
            if (peek() == '-') {
                ++pos;
                EvalFn inner = parse_unary();
                return [inner](double v, double t) { return -inner(v, t); };
            }
            return parse_primary();
        }

        EvalFn parse_primary() {
            skip_ws();
            if (at_end()) throw ConfigError("expression: unexpected end of input");
            const char c = s[pos];
            if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
            if (std::isalpha(static_cast<unsigned char>(c))) {
                std::size_t start = pos;
                while (pos < s.size() &&
                       (std::isalnum(static_cast<unsigned char>(s[pos])) || s[pos] == '_'))
                    ++pos;
                const std::string_view name = s.substr(start, pos - start);
                if (name == "value") return [](double v, double) { return v; };
                if (name == "timestamp") return [](double, double t) { return t; };
                if (name == "abs") {
                    if (!consume("(")) throw ConfigError("expression: expected '(' after abs");
                    EvalFn inner = parse_or();
                    if (!consume(")")) throw ConfigError("expression: expected ')'");
                    return [inner](double v, double t) { return std::fabs(inner(v, t)); };
                }
                throw ConfigError("expression: unknown identifier '" + std::string(name) + "'");
            }
            if (c == '(') {
                ++pos;
                EvalFn inner = parse_or();
                if (!consume(")")) throw ConfigError("expression: expected ')'");
                return inner;
            }
            throw ConfigError(std::string("expression: unexpected character '") + c + "'");
        }

        EvalFn parse_number() {
            std::size_t start = pos;
            while (pos < s.size() &&
                   (std::isdigit(static_cast<unsigned char>(s[pos])) || s[pos] == '.' ||
                    s[pos] == 'e' || s[pos] == 'E' ||
                    ((s[pos] == '+' || s[pos] == '-') && pos > start &&
                     (s[pos - 1] == 'e' || s[pos - 1] == 'E'))))
                ++pos;
            double v = 0;
            auto res = std::from_chars(s.data() + start, s.data() + pos, v);
            if (res.ec != std::errc() || res.ptr != s.data() + pos)
                throw ConfigError("expression: bad numeric literal '" +
                                  std::string(s.substr(start, pos - start)) + "'");
            return [v](double, double) { return v; };
        }
    };

    std::string source_;
    EvalFn fn_;
};

}  // namespace numq
