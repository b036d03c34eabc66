#include <cctype>
#include <charconv>
#include <string>
#include <string_view>

#include "projgeo/expr.hpp"

namespace projgeo {

namespace {

class Parser {
public:
    explicit Parser(std::string_view s) : s_(s) {}

    Expr run() {
        Expr e = expr();
        skip_ws();
        if (!eof()) fail("unexpected trailing input");
        return e;
    }

private:
    std::string_view s_;
    std::size_t pos_ = 0;

    bool eof() const { return pos_ >= s_.size(); }
    char peek() const { return eof() ? '\0' : s_[pos_]; }
    char get() { return s_[pos_++]; }

    void skip_ws() {
        while (!eof() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }

    [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, pos_); }
    [[noreturn]] void fail_at(const std::string& msg, std::size_t at) const {
        throw ParseError(msg, at);
    }

    bool accept(char c) {
        skip_ws();
        if (!eof() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    void expect(char c, const char* what) {
        skip_ws();
        if (eof() || s_[pos_] != c) fail(std::string("expected '") + c + "' " + what);
        ++pos_;
    }

    Expr expr() {
        skip_ws();
        bool negate = false;
        if (accept('-'))
            negate = true;
        else
            accept('+');
        Expr t = term();
        if (negate) t = Expr::neg(std::move(t));
        for (;;) {
            skip_ws();
            if (accept('+')) {
                t = std::move(t) + term();
            } else if (accept('-')) {
                t = std::move(t) - term();
            } else {
                return t;
            }
        }
    }

    Expr term() {
        Expr f = factor();
        for (;;) {
            skip_ws();
            if (accept('*')) {
                f = std::move(f) * factor();
            } else if (accept('/')) {
                f = std::move(f) / factor();
            } else {
                return f;
            }
        }
    }

    Expr factor() {
        Expr a = atom();
        skip_ws();
        if (accept('^')) return exponent(std::move(a));
        return a;
    }

    Expr exponent(Expr base) {
        skip_ws();
        if (accept('(')) {
            long p = integer();
            skip_ws();
            if (accept('/')) {
                long q = integer();
                if (q == 0) fail("zero denominator in rational exponent");
                expect(')', "after rational exponent");
                return Expr::pow_rat(std::move(base), p, q);
            }
            expect(')', "after exponent");
            return Expr::pow_int(std::move(base), p);
        }
        return Expr::pow_int(std::move(base), integer());
    }

    long integer() {
        skip_ws();
        std::size_t start = pos_;
        if (!eof() && (s_[pos_] == '-' || s_[pos_] == '+')) ++pos_;
        std::size_t digits = pos_;
        while (!eof() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
        if (pos_ == digits) fail_at("expected integer exponent", start);
        long v = 0;
        auto res = std::from_chars(s_.data() + start, s_.data() + pos_, v);
        if (res.ec != std::errc()) fail_at("invalid integer", start);
        return v;
    }

    Expr atom() {
        skip_ws();
        if (eof()) fail("unexpected end of input");
        char c = peek();
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
        if (accept('(')) {
            Expr e = expr();
            expect(')', "to close group");
            return e;
        }
        fail(std::string("unexpected character '") + c + "'");
    }

    Expr number() {
        std::size_t start = pos_;
        while (!eof() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
        if (!eof() && s_[pos_] == '.') {
            ++pos_;
            while (!eof() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
        }
        // Scientific suffix only when an exponent digit actually follows.
        if (!eof() && (s_[pos_] == 'e' || s_[pos_] == 'E')) {
            std::size_t mark = pos_;
            ++pos_;
            if (!eof() && (s_[pos_] == '+' || s_[pos_] == '-')) ++pos_;
            if (!eof() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
                while (!eof() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
            } else {
                pos_ = mark;
            }
        }
        double v = 0.0;
        auto res = std::from_chars(s_.data() + start, s_.data() + pos_, v);
        if (res.ec != std::errc() || res.ptr != s_.data() + pos_)
            fail_at("invalid number", start);
        return Expr::constant(v);
    }

    Expr identifier() {
        std::size_t start = pos_;
        while (!eof() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_'))
            ++pos_;
        std::string name(s_.substr(start, pos_ - start));
        skip_ws();
        if (peek() == '(') {
            ++pos_;
            Expr arg = expr();
            expect(')', "to close call");
            if (name == "exp") return Expr::exp(std::move(arg));
            if (name == "ln") return Expr::ln(std::move(arg));
            if (name == "atan") return Expr::atan(std::move(arg));
            fail_at("unknown function name '" + name + "'", start);
        }
        if (name == "x") return Expr::x();
        if (name == "y") return Expr::y();
        return Expr::parameter(std::move(name));
    }
};

}  // namespace

Expr parse_expr(std::string_view text) { return Parser(text).run(); }

}  // namespace projgeo
