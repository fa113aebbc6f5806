#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>

#include "uc/error.hpp"
#include "uc/milp.hpp"

namespace uc {

namespace {

constexpr std::size_t kMaxNameLength = 255;
constexpr int kTermsPerLine = 8;

std::string number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// LP names: [A-Za-z_][A-Za-z0-9_]*, must not look like a number or exponent.
std::string sanitize(const std::string& raw, const char* fallback_prefix, std::size_t index) {
    std::string name;
    name.reserve(raw.size());
    for (char c : raw) name.push_back(std::isalnum(static_cast<unsigned char>(c)) || c == '_' ? c : '_');
    if (name.empty()) name = std::string(fallback_prefix) + std::to_string(index);
    if (std::isdigit(static_cast<unsigned char>(name[0])) || name[0] == 'e' || name[0] == 'E') {
        name = std::string(fallback_prefix) + "_" + name;
    }
    if (name.size() > kMaxNameLength) name.resize(kMaxNameLength);
    return name;
}

std::vector<std::string> unique_names(const std::vector<std::string>& raw, const char* prefix) {
    std::vector<std::string> out;
    std::set<std::string> used;
    out.reserve(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) {
        auto name = sanitize(raw[i], prefix, i);
        if (used.count(name)) {
            const auto suffix = "_" + std::to_string(i);
            if (name.size() + suffix.size() > kMaxNameLength) name.resize(kMaxNameLength - suffix.size());
            name += suffix;
        }
        used.insert(name);
        out.push_back(std::move(name));
    }
    return out;
}

void write_terms(std::ostringstream& out, const std::vector<Term>& terms, const std::vector<std::string>& names) {
    int on_line = 0;
    bool first = true;
    for (const auto& t : terms) {
        if (on_line == kTermsPerLine) {
            out << "\n  ";
            on_line = 0;
        }
        const double c = t.coef;
        if (first) {
            out << (c < 0 ? "- " : "") << number(std::abs(c)) << ' ' << names[t.var.index];
        } else {
            out << (c < 0 ? " - " : " + ") << number(std::abs(c)) << ' ' << names[t.var.index];
        }
        first = false;
        ++on_line;
    }
}

}  // namespace

std::string export_lp(const Model& model) {
    std::vector<std::string> raw_vars, raw_cons;
    for (const auto& v : model.variables()) raw_vars.push_back(v.name);
    for (const auto& c : model.constraints()) raw_cons.push_back(c.name);
    const auto vars = unique_names(raw_vars, "v");
    const auto cons = unique_names(raw_cons, "c");

    std::ostringstream out;
    out << "\\ exported by uc\n";
    out << "Minimize\n obj: ";
    const auto& obj = model.objective();
    if (obj.terms().empty() && !vars.empty()) {
        out << "0 " << vars[0];
    } else {
        write_terms(out, obj.terms(), vars);
    }
    if (obj.constant() != 0.0) out << (obj.constant() < 0 ? " - " : " + ") << number(std::abs(obj.constant()));
    out << "\nSubject To\n";
    for (std::size_t i = 0; i < model.num_constraints(); ++i) {
        const auto& c = model.constraints()[i];
        out << ' ' << cons[i] << ": ";
        if (c.terms.empty()) {
            out << "0 " << (vars.empty() ? std::string("v0") : vars[0]);
        } else {
            write_terms(out, c.terms, vars);
        }
        switch (c.sense) {
        case Sense::le: out << " <= "; break;
        case Sense::ge: out << " >= "; break;
        case Sense::eq: out << " = "; break;
        }
        out << number(c.rhs) << '\n';
    }
    out << "Bounds\n";
    std::vector<std::size_t> binaries;
    for (std::size_t j = 0; j < model.num_variables(); ++j) {
        const auto& v = model.variable(j);
        const auto& name = vars[j];
        if (v.kind == VarKind::binary) binaries.push_back(j);
        const bool default_bounds =
            v.kind == VarKind::binary ? (v.lb == 0.0 && v.ub == 1.0) : (v.lb == 0.0 && v.ub == kInf);
        if (default_bounds) continue;
        if (v.lb == v.ub) {
            out << ' ' << name << " = " << number(v.lb) << '\n';
        } else if (v.lb == -kInf && v.ub == kInf) {
            out << ' ' << name << " free\n";
        } else if (v.ub == kInf) {
            out << ' ' << name << " >= " << number(v.lb) << '\n';
        } else if (v.lb == -kInf) {
            out << " -inf <= " << name << " <= " << number(v.ub) << '\n';
        } else {
            out << ' ' << number(v.lb) << " <= " << name << " <= " << number(v.ub) << '\n';
        }
    }
    if (!binaries.empty()) {
        out << "Binaries\n";
        for (auto j : binaries) out << ' ' << vars[j] << '\n';
    }
    out << "End\n";
    return out.str();
}

namespace {

enum class Section { none, objective, constraints, bounds, binaries, end };

struct Token {
    enum Kind { number, name, op, colon } kind;
    std::string text;
    double value = 0.0;
};

bool is_name_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool is_name_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' || c == '[' || c == ']';
}

std::string lower(std::string s) {
    for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

std::vector<Token> tokenize(const std::string& line) {
    std::vector<Token> tokens;
    std::size_t i = 0;
    while (i < line.size()) {
        const char c = line[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
        } else if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            char* end = nullptr;
            const double v = std::strtod(line.c_str() + i, &end);
            const auto len = static_cast<std::size_t>(end - (line.c_str() + i));
            if (len == 0) throw Error(ErrorCode::parse, "LP: bad number near '" + line.substr(i) + "'");
            tokens.push_back({Token::number, line.substr(i, len), v});
            i += len;
        } else if (is_name_start(c)) {
            std::size_t j = i;
            while (j < line.size() && is_name_char(line[j])) ++j;
            auto text = line.substr(i, j - i);
            const auto l = lower(text);
            if (l == "inf" || l == "infinity") {
                tokens.push_back({Token::number, text, kInf});
            } else {
                tokens.push_back({Token::name, text});
            }
            i = j;
        } else if (c == ':') {
            tokens.push_back({Token::colon, ":"});
            ++i;
        } else if (c == '<' || c == '>' || c == '=') {
            std::string op(1, c);
            if (i + 1 < line.size() && (line[i + 1] == '=' || line[i + 1] == '<' || line[i + 1] == '>')) op += line[++i];
            ++i;
            if (op == "<" || op == "=<") op = "<=";
            if (op == ">" || op == "=>") op = ">=";
            tokens.push_back({Token::op, op});
        } else if (c == '+' || c == '-') {
            tokens.push_back({Token::op, std::string(1, c)});
            ++i;
        } else {
            throw Error(ErrorCode::parse, std::string("LP: unexpected character '") + c + "'");
        }
    }
    return tokens;
}

class LpReader {
public:
    Model read(std::string_view text) {
        std::istringstream in{std::string(text)};
        std::string line;
        Section section = Section::none;
        std::vector<Token> pending;  // objective / constraint tokens accumulate across lines
        while (std::getline(in, line)) {
            if (auto pos = line.find('\\'); pos != std::string::npos) line.resize(pos);
            const auto trimmed = lower(trim(line));
            if (trimmed.empty()) continue;
            const auto next = section_keyword(trimmed);
            if (next != Section::none) {
                flush(section, pending);
                section = next;
                if (section == Section::end) break;
                continue;
            }
            switch (section) {
            case Section::objective:
            case Section::constraints: {
                auto toks = tokenize(line);
                pending.insert(pending.end(), toks.begin(), toks.end());
                if (section == Section::constraints) drain_constraints(pending);
                break;
            }
            case Section::bounds: parse_bound(tokenize(line)); break;
            case Section::binaries:
                for (const auto& tok : tokenize(line)) {
                    if (tok.kind != Token::name) throw Error(ErrorCode::parse, "LP: expected variable name in Binaries");
                    binaries_.insert(var(tok.text));
                }
                break;
            default: throw Error(ErrorCode::parse, "LP: content outside of any section: " + line);
            }
        }
        flush(section, pending);
        return build();
    }

private:
    static std::string trim(const std::string& s) {
        const auto b = s.find_first_not_of(" \t\r");
        if (b == std::string::npos) return {};
        const auto e = s.find_last_not_of(" \t\r");
        return s.substr(b, e - b + 1);
    }

    static Section section_keyword(const std::string& l) {
        if (l == "minimize" || l == "minimum" || l == "min") return Section::objective;
        if (l == "maximize" || l == "max") throw Error(ErrorCode::parse, "LP: maximization is not supported");
        if (l == "subject to" || l == "such that" || l == "st" || l == "s.t.") return Section::constraints;
        if (l == "bounds" || l == "bound") return Section::bounds;
        if (l == "binaries" || l == "binary" || l == "bin") return Section::binaries;
        if (l == "generals" || l == "general" || l == "gen") throw Error(ErrorCode::parse, "LP: general integers are not supported");
        if (l == "end") return Section::end;
        return Section::none;
    }

    std::size_t var(const std::string& name) {
        auto [it, inserted] = index_.try_emplace(name, names_.size());
        if (inserted) {
            names_.push_back(name);
            lb_.push_back(0.0);
            ub_.push_back(kInf);
        }
        return it->second;
    }

    // Parses "[label:] terms" and returns the position after the terms.
    std::size_t parse_terms(const std::vector<Token>& toks, std::size_t i, std::vector<std::pair<std::size_t, double>>& terms,
                            double& constant) {
        while (i < toks.size()) {
            double sign = 1.0;
            bool saw_sign = false;
            while (i < toks.size() && toks[i].kind == Token::op && (toks[i].text == "+" || toks[i].text == "-")) {
                if (toks[i].text == "-") sign = -sign;
                saw_sign = true;
                ++i;
            }
            if (i >= toks.size()) {
                if (saw_sign) throw Error(ErrorCode::parse, "LP: dangling sign");
                break;
            }
            if (toks[i].kind == Token::number) {
                const double coef = sign * toks[i].value;
                if (i + 1 < toks.size() && toks[i + 1].kind == Token::name) {
                    terms.emplace_back(var(toks[i + 1].text), coef);
                    i += 2;
                } else {
                    constant += coef;
                    ++i;
                }
            } else if (toks[i].kind == Token::name) {
                terms.emplace_back(var(toks[i].text), sign);
                ++i;
            } else {
                if (saw_sign) throw Error(ErrorCode::parse, "LP: sign without operand");
                break;
            }
        }
        return i;
    }

    static std::size_t skip_label(const std::vector<Token>& toks, std::size_t i, std::string& label) {
        if (i + 1 < toks.size() && toks[i].kind == Token::name && toks[i + 1].kind == Token::colon) {
            label = toks[i].text;
            return i + 2;
        }
        return i;
    }

    void drain_constraints(std::vector<Token>& toks) {
        // A constraint is complete once "<sense> <rhs>" has been seen.
        for (;;) {
            std::size_t sense_pos = toks.size();
            for (std::size_t j = 0; j < toks.size(); ++j) {
                if (toks[j].kind == Token::op && (toks[j].text == "<=" || toks[j].text == ">=" || toks[j].text == "=")) {
                    sense_pos = j;
                    break;
                }
            }
            if (sense_pos == toks.size()) return;
            std::size_t rhs_pos = sense_pos + 1;
            double rhs_sign = 1.0;
            while (rhs_pos < toks.size() && toks[rhs_pos].kind == Token::op &&
                   (toks[rhs_pos].text == "+" || toks[rhs_pos].text == "-")) {
                if (toks[rhs_pos].text == "-") rhs_sign = -rhs_sign;
                ++rhs_pos;
            }
            if (rhs_pos >= toks.size()) return;  // rhs on the next line
            if (toks[rhs_pos].kind != Token::number) throw Error(ErrorCode::parse, "LP: constraint rhs must be a number");

            std::string label;
            std::size_t i = skip_label(toks, 0, label);
            std::vector<std::pair<std::size_t, double>> terms;
            double constant = 0.0;
            i = parse_terms(toks, i, terms, constant);
            if (i != sense_pos) throw Error(ErrorCode::parse, "LP: malformed constraint '" + label + "'");
            const auto& s = toks[sense_pos].text;
            const Sense sense = s == "<=" ? Sense::le : (s == ">=" ? Sense::ge : Sense::eq);
            rows_.push_back({std::move(label), std::move(terms), sense, rhs_sign * toks[rhs_pos].value - constant});
            toks.erase(toks.begin(), toks.begin() + static_cast<std::ptrdiff_t>(rhs_pos + 1));
        }
    }

    void flush(Section section, std::vector<Token>& pending) {
        if (section == Section::objective) {
            std::string label;
            std::size_t i = skip_label(pending, 0, label);
            i = parse_terms(pending, i, objective_, objective_constant_);
            if (i != pending.size()) throw Error(ErrorCode::parse, "LP: malformed objective");
            has_objective_ = true;
        } else if (section == Section::constraints && !pending.empty()) {
            throw Error(ErrorCode::parse, "LP: incomplete constraint at end of section");
        }
        pending.clear();
    }

    void parse_bound(const std::vector<Token>& t) {
        auto num = [&](std::size_t i, double& v) -> std::size_t {
            double sign = 1.0;
            while (i < t.size() && t[i].kind == Token::op && (t[i].text == "-" || t[i].text == "+")) {
                if (t[i].text == "-") sign = -sign;
                ++i;
            }
            if (i >= t.size() || t[i].kind != Token::number) throw Error(ErrorCode::parse, "LP: bad bound");
            v = sign * t[i].value;
            return i + 1;
        };
        if (t.size() == 2 && t[0].kind == Token::name && t[1].kind == Token::name && lower(t[1].text) == "free") {
            const auto j = var(t[0].text);
            lb_[j] = -kInf;
            ub_[j] = kInf;
            return;
        }
        if (!t.empty() && t[0].kind == Token::name) {
            // x <op> v
            const auto j = var(t[0].text);
            if (t.size() < 3 || t[1].kind != Token::op) throw Error(ErrorCode::parse, "LP: bad bound for " + t[0].text);
            double v = 0.0;
            if (num(2, v) != t.size()) throw Error(ErrorCode::parse, "LP: trailing tokens in bound");
            if (t[1].text == "<=") ub_[j] = v;
            else if (t[1].text == ">=") lb_[j] = v;
            else lb_[j] = ub_[j] = v;
            return;
        }
        // v1 <= x [<= v2]
        double lo = 0.0;
        std::size_t i = num(0, lo);
        if (i + 1 >= t.size() || t[i].kind != Token::op || t[i + 1].kind != Token::name) {
            throw Error(ErrorCode::parse, "LP: bad bound");
        }
        const std::string op = t[i].text;
        const auto j = var(t[i + 1].text);
        i += 2;
        if (op == "<=") lb_[j] = lo;
        else if (op == ">=") ub_[j] = lo;
        else lb_[j] = ub_[j] = lo;
        if (i < t.size()) {
            if (t[i].kind != Token::op || t[i].text != "<=") throw Error(ErrorCode::parse, "LP: bad double-sided bound");
            double hi = 0.0;
            if (num(i + 1, hi) != t.size()) throw Error(ErrorCode::parse, "LP: trailing tokens in bound");
            ub_[j] = hi;
        }
    }

    Model build() {
        if (!has_objective_) throw Error(ErrorCode::parse, "LP: missing objective section");
        Model model;
        std::vector<VarId> ids;
        for (std::size_t j = 0; j < names_.size(); ++j) {
            double lb = lb_[j], ub = ub_[j];
            VarKind kind = VarKind::continuous;
            if (binaries_.count(j)) {
                kind = VarKind::binary;
                lb = std::max(lb, 0.0);
                ub = std::min(ub, 1.0);
            }
            ids.push_back(model.add_variable(kind, lb, ub, names_[j]));
        }
        LinExpr obj(objective_constant_);
        for (const auto& [j, c] : objective_) obj.add(ids[j], c);
        model.set_objective(std::move(obj));
        for (auto& row : rows_) {
            LinExpr e;
            for (const auto& [j, c] : row.terms) e.add(ids[j], c);
            model.add_constraint(std::move(e), row.sense, row.rhs, row.name);
        }
        return model;
    }

    struct Row {
        std::string name;
        std::vector<std::pair<std::size_t, double>> terms;
        Sense sense;
        double rhs;
    };

    std::unordered_map<std::string, std::size_t> index_;
    std::vector<std::string> names_;
    std::vector<double> lb_, ub_;
    std::set<std::size_t> binaries_;
    std::vector<std::pair<std::size_t, double>> objective_;
    double objective_constant_ = 0.0;
    bool has_objective_ = false;
    std::vector<Row> rows_;
};

}  // namespace

Model read_lp(std::string_view text) { return LpReader().read(text); }

}  // namespace uc
