#include <algorithm>
#include <cctype>
#include <fstream>
#include <functional>
#include <sstream>

#include "graphmend/gdc.hpp"

namespace graphmend {

bool GdcQuery::operator==(const GdcQuery& o) const {
    auto np = [](const NodePattern& a, const NodePattern& b) {
        return a.var == b.var && a.label == b.label;
    };
    auto rp = [](const RelPattern& a, const RelPattern& b) {
        return a.var == b.var && a.type == b.type && a.src == b.src && a.dst == b.dst;
    };
    auto pp = [](const PropertyPredicate& a, const PropertyPredicate& b) {
        return a.var == b.var && a.key == b.key && a.op == b.op && a.value == b.value;
    };
    return std::equal(node_patterns.begin(), node_patterns.end(), o.node_patterns.begin(),
                      o.node_patterns.end(), np) &&
           std::equal(rel_patterns.begin(), rel_patterns.end(), o.rel_patterns.begin(),
                      o.rel_patterns.end(), rp) &&
           std::equal(predicates.begin(), predicates.end(), o.predicates.begin(),
                      o.predicates.end(), pp);
}

namespace {

enum class Tok {
    Ident, LParen, RParen, LBracket, RBracket, Colon, Comma, Dash, Arrow, LeftArrow,
    Dot, Eq, Neq, Star, Str, Num, Semicolon, End,
};

struct Token {
    Tok kind;
    std::string text;
    int line;
    int col;
};

const char* tok_name(Tok t) {
    switch (t) {
        case Tok::Ident: return "identifier";
        case Tok::LParen: return "'('";
        case Tok::RParen: return "')'";
        case Tok::LBracket: return "'['";
        case Tok::RBracket: return "']'";
        case Tok::Colon: return "':'";
        case Tok::Comma: return "','";
        case Tok::Dash: return "'-'";
        case Tok::Arrow: return "'->'";
        case Tok::LeftArrow: return "'<-'";
        case Tok::Dot: return "'.'";
        case Tok::Eq: return "'='";
        case Tok::Neq: return "'<>'";
        case Tok::Star: return "'*'";
        case Tok::Str: return "string";
        case Tok::Num: return "number";
        case Tok::Semicolon: return "';'";
        case Tok::End: return "end of input";
    }
    return "?";
}

class Lexer {
public:
    explicit Lexer(const std::string& text) : text_(text) {}

    std::vector<Token> run() {
        std::vector<Token> out;
        while (true) {
            skip_ws();
            int line = line_, col = col_;
            if (pos_ >= text_.size()) {
                out.push_back({Tok::End, "", line, col});
                break;
            }
            char c = text_[pos_];
            if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
                std::string id;
                while (pos_ < text_.size() &&
                       (std::isalnum(static_cast<unsigned char>(text_[pos_])) ||
                        text_[pos_] == '_')) {
                    id += text_[pos_];
                    advance();
                }
                out.push_back({Tok::Ident, id, line, col});
            } else if (std::isdigit(static_cast<unsigned char>(c))) {
                std::string num;
                while (pos_ < text_.size() &&
                       (std::isdigit(static_cast<unsigned char>(text_[pos_])) ||
                        text_[pos_] == '.')) {
                    num += text_[pos_];
                    advance();
                }
                out.push_back({Tok::Num, num, line, col});
            } else if (c == '\'' || c == '"') {
                char quote = c;
                advance();
                std::string s;
                while (pos_ < text_.size() && text_[pos_] != quote) {
                    s += text_[pos_];
                    advance();
                }
                if (pos_ >= text_.size())
                    throw SyntaxError("unterminated string literal", line, col);
                advance();
                out.push_back({Tok::Str, s, line, col});
            } else {
                switch (c) {
                    case '(': push(out, Tok::LParen, "(", line, col); break;
                    case ')': push(out, Tok::RParen, ")", line, col); break;
                    case '[': push(out, Tok::LBracket, "[", line, col); break;
                    case ']': push(out, Tok::RBracket, "]", line, col); break;
                    case ':': push(out, Tok::Colon, ":", line, col); break;
                    case ',': push(out, Tok::Comma, ",", line, col); break;
                    case '.': push(out, Tok::Dot, ".", line, col); break;
                    case '=': push(out, Tok::Eq, "=", line, col); break;
                    case '*': push(out, Tok::Star, "*", line, col); break;
                    case ';': push(out, Tok::Semicolon, ";", line, col); break;
                    case '-':
                        advance();
                        if (pos_ < text_.size() && text_[pos_] == '>') {
                            advance();
                            out.push_back({Tok::Arrow, "->", line, col});
                        } else {
                            out.push_back({Tok::Dash, "-", line, col});
                        }
                        continue;
                    case '<':
                        advance();
                        if (pos_ < text_.size() && text_[pos_] == '>') {
                            advance();
                            out.push_back({Tok::Neq, "<>", line, col});
                        } else if (pos_ < text_.size() && text_[pos_] == '-') {
                            advance();
                            out.push_back({Tok::LeftArrow, "<-", line, col});
                        } else {
                            throw UnsupportedFeature(
                                "comparison operator '<' is outside the supported subset");
                        }
                        continue;
                    case '>':
                        throw UnsupportedFeature(
                            "comparison operator '>' is outside the supported subset");
                    default:
                        throw SyntaxError(std::string("unexpected character '") + c + "'",
                                          line, col);
                }
            }
        }
        return out;
    }

private:
    void push(std::vector<Token>& out, Tok k, const char* t, int line, int col) {
        out.push_back({k, t, line, col});
        advance();
    }
    void skip_ws() {
        while (pos_ < text_.size() &&
               std::isspace(static_cast<unsigned char>(text_[pos_])))
            advance();
    }
    void advance() {
        if (text_[pos_] == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        ++pos_;
    }

    const std::string& text_;
    std::size_t pos_ = 0;
    int line_ = 1;
    int col_ = 1;
};

std::string upper(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
    return s;
}

const char* kUnsupportedKeywords[] = {
    "OPTIONAL", "WITH", "CREATE", "MERGE", "DELETE", "DETACH", "SET", "REMOVE",
    "UNWIND", "CALL", "ORDER", "SKIP", "LIMIT", "UNION", "COUNT", "COLLECT", "OR", "NOT",
};

class Parser {
public:
    explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

    GdcQuery parse() {
        GdcQuery q;
        expect_keyword("MATCH");
        parse_path(q);
        while (peek().kind == Tok::Comma) {
            next();
            parse_path(q);
        }
        if (is_keyword("WHERE")) {
            next();
            q.predicates.push_back(parse_predicate());
            while (is_keyword("AND")) {
                next();
                q.predicates.push_back(parse_predicate());
            }
        }
        expect_keyword("RETURN");
        if (peek().kind != Tok::Star)
            throw UnsupportedFeature("only `RETURN *` is supported");
        next();
        if (peek().kind == Tok::Semicolon) next();
        if (peek().kind != Tok::End)
            throw SyntaxError("expected end of query", peek().line, peek().col);
        q.connected = compute_connected(q);
        return q;
    }

private:
    const Token& peek(std::size_t ahead = 0) const {
        std::size_t i = std::min(pos_ + ahead, toks_.size() - 1);
        return toks_[i];
    }
    Token next() { return toks_[std::min(pos_++, toks_.size() - 1)]; }

    bool is_keyword(const char* kw) const {
        return peek().kind == Tok::Ident && upper(peek().text) == kw;
    }
    void expect_keyword(const char* kw) {
        const Token& t = peek();
        if (t.kind == Tok::Ident) {
            std::string u = upper(t.text);
            for (const char* bad : kUnsupportedKeywords)
                if (u == bad)
                    throw UnsupportedFeature("keyword " + u +
                                             " is outside the supported subset");
        }
        if (!is_keyword(kw))
            throw SyntaxError(std::string("expected ") + kw + ", got " + tok_name(t.kind),
                              t.line, t.col);
        next();
    }
    Token expect(Tok k) {
        const Token& t = peek();
        if (t.kind != k)
            throw SyntaxError(std::string("expected ") + tok_name(k) + ", got " +
                                  tok_name(t.kind),
                              t.line, t.col);
        return next();
    }

    std::string check_var_name(const Token& t) {
        std::string u = upper(t.text);
        for (const char* bad : kUnsupportedKeywords)
            if (u == bad)
                throw UnsupportedFeature("keyword " + u + " is outside the supported subset");
        return t.text;
    }

    // (var:Label), both parts optional
    std::string parse_node_pattern(GdcQuery& q) {
        expect(Tok::LParen);
        std::string var;
        std::optional<std::string> label;
        if (peek().kind == Tok::Ident) var = check_var_name(next());
        if (peek().kind == Tok::Colon) {
            next();
            label = expect(Tok::Ident).text;
        }
        expect(Tok::RParen);
        if (var.empty()) var = "_n" + std::to_string(anon_counter_++);
        q.node_patterns.push_back({var, label});
        return var;
    }

    void parse_path(GdcQuery& q) {
        std::string prev = parse_node_pattern(q);
        while (peek().kind == Tok::Dash || peek().kind == Tok::LeftArrow) {
            if (peek().kind == Tok::LeftArrow)
                throw UnsupportedFeature(
                    "right-to-left relationships are outside the supported subset");
            next();
            expect(Tok::LBracket);
            if (peek().kind == Tok::Star)
                throw UnsupportedFeature(
                    "variable-length relationships are outside the supported subset");
            std::string var;
            std::optional<std::string> type;
            if (peek().kind == Tok::Ident) var = check_var_name(next());
            if (peek().kind == Tok::Colon) {
                next();
                type = expect(Tok::Ident).text;
            }
            if (peek().kind == Tok::Star)
                throw UnsupportedFeature(
                    "variable-length relationships are outside the supported subset");
            const Token& rb = peek();
            expect(Tok::RBracket);
            if (peek().kind == Tok::Dash)
                throw UnsupportedFeature(
                    "undirected relationships are outside the supported subset");
            if (peek().kind != Tok::Arrow)
                throw SyntaxError("expected '->' after relationship pattern", rb.line, rb.col);
            next();
            if (var.empty()) var = "_r" + std::to_string(anon_counter_++);
            for (const auto& r : q.rel_patterns)
                if (r.var == var)
                    throw SyntaxError("duplicate relationship variable " + var, rb.line,
                                      rb.col);
            std::string dst = parse_node_pattern(q);
            q.rel_patterns.push_back({var, type, prev, dst});
            prev = dst;
        }
    }

    PropertyPredicate parse_predicate() {
        Token var = expect(Tok::Ident);
        expect(Tok::Dot);
        Token key = expect(Tok::Ident);
        PredicateOp op;
        if (peek().kind == Tok::Eq) {
            op = PredicateOp::Eq;
        } else if (peek().kind == Tok::Neq) {
            op = PredicateOp::Neq;
        } else {
            throw UnsupportedFeature("only '=' and '<>' predicates are supported");
        }
        next();
        return {check_var_name(var), key.text, op, parse_literal()};
    }

    PropertyValue parse_literal() {
        const Token& t = peek();
        if (t.kind == Tok::Str) return PropertyValue{next().text};
        bool neg = false;
        if (t.kind == Tok::Dash) {
            neg = true;
            next();
        }
        const Token& n = peek();
        if (n.kind == Tok::Num) {
            std::string txt = next().text;
            if (txt.find('.') != std::string::npos) {
                double d = std::stod(txt);
                return PropertyValue{neg ? -d : d};
            }
            std::int64_t i = std::stoll(txt);
            return PropertyValue{neg ? -i : i};
        }
        if (n.kind == Tok::Ident) {
            std::string u = upper(n.text);
            if (u == "TRUE") {
                next();
                return PropertyValue{true};
            }
            if (u == "FALSE") {
                next();
                return PropertyValue{false};
            }
        }
        throw SyntaxError("expected literal", n.line, n.col);
    }

    static bool compute_connected(const GdcQuery& q) {
        std::map<std::string, std::string> parent;
        std::function<std::string(const std::string&)> find =
            [&](const std::string& x) -> std::string {
            auto it = parent.find(x);
            if (it == parent.end()) {
                parent[x] = x;
                return x;
            }
            if (it->second == x) return x;
            return it->second = find(it->second);
        };
        auto unite = [&](const std::string& a, const std::string& b) {
            parent[find(a)] = find(b);
        };
        for (const auto& np : q.node_patterns) find(np.var);
        for (const auto& rp : q.rel_patterns) unite(rp.src, rp.dst);
        std::string root;
        for (const auto& np : q.node_patterns) {
            std::string r = find(np.var);
            if (root.empty()) root = r;
            else if (r != root) return false;
        }
        return true;
    }

    std::vector<Token> toks_;
    std::size_t pos_ = 0;
    int anon_counter_ = 0;
};

}  // namespace

GdcQuery parse_gdc(const std::string& text) {
    GdcQuery q = Parser(Lexer(text).run()).parse();
    q.source_text = text;
    return q;
}

ConstraintFile parse_constraint_file(const std::string& text) {
    ConstraintFile cf;
    std::istringstream in(text);
    std::string line;
    std::string query_text;
    bool in_header = true;
    auto trim = [](std::string s) {
        auto issp = [](unsigned char c) { return std::isspace(c) != 0; };
        while (!s.empty() && issp(s.front())) s.erase(s.begin());
        while (!s.empty() && issp(s.back())) s.pop_back();
        return s;
    };
    while (std::getline(in, line)) {
        std::string t = trim(line);
        if (in_header && t.rfind("--", 0) == 0) {
            std::string body = trim(t.substr(2));
            if (body.rfind("name:", 0) == 0) {
                cf.name = trim(body.substr(5));
            } else if (body.rfind("template:", 0) == 0) {
                if (!cf.template_text.empty()) cf.template_text += "\n";
                cf.template_text += trim(body.substr(9));
            }
            continue;
        }
        if (!t.empty()) in_header = false;
        if (!in_header) query_text += line + "\n";
    }
    cf.query = parse_gdc(trim(query_text));
    return cf;
}

ConstraintFile load_constraint_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open constraint file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_constraint_file(ss.str());
}

}  // namespace graphmend
