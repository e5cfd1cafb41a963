#include "rwre/config.hpp"

#include <cctype>
#include <sstream>

namespace rwre::exp {

namespace {

using nlohmann::json;

struct Cursor {
    const std::string& s;
    size_t i = 0;
    int line = 0;

    [[noreturn]] void fail(const std::string& msg) const {
        std::ostringstream os;
        os << "config line " << line << ": " << msg;
        throw ConfigError(os.str());
    }
    bool done() const { return i >= s.size(); }
    char peek() const { return s[i]; }
    void skip_space() {
        while (!done() && (s[i] == ' ' || s[i] == '\t')) ++i;
    }
};

json parse_value(Cursor& c);

json parse_string(Cursor& c) {
    ++c.i;  // opening quote
    std::string out;
    while (!c.done() && c.peek() != '"') {
        if (c.peek() == '\\') {
            ++c.i;
            if (c.done()) c.fail("dangling escape");
            switch (c.peek()) {
                case 'n': out += '\n'; break;
                case 't': out += '\t'; break;
                case '"': out += '"'; break;
                case '\\': out += '\\'; break;
                default: c.fail("unsupported escape");
            }
            ++c.i;
        } else {
            out += c.s[c.i];
            ++c.i;
        }
    }
    if (c.done()) c.fail("unterminated string");
    ++c.i;  // closing quote
    return json(out);
}

json parse_number_or_word(Cursor& c) {
    const size_t start = c.i;
    while (!c.done() && (std::isalnum(static_cast<unsigned char>(c.peek())) ||
                         c.peek() == '+' || c.peek() == '-' ||
                         c.peek() == '.' || c.peek() == '_'))
        ++c.i;
    std::string tok = c.s.substr(start, c.i - start);
    if (tok.empty()) c.fail("expected a value");
    if (tok == "true") return json(true);
    if (tok == "false") return json(false);
    std::string digits;
    for (char ch : tok)
        if (ch != '_') digits += ch;
    try {
        size_t used = 0;
        if (digits.find('.') == std::string::npos &&
            digits.find('e') == std::string::npos &&
            digits.find('E') == std::string::npos) {
            if (!digits.empty() && digits[0] == '-') {
                const long long v = std::stoll(digits, &used);
                if (used == digits.size()) return json(v);
            } else {
                const unsigned long long v = std::stoull(digits, &used);
                if (used == digits.size()) return json(v);
            }
        }
        const double v = std::stod(digits, &used);
        if (used == digits.size()) return json(v);
    } catch (const std::exception&) {
    }
    c.fail("cannot parse value '" + tok + "'");
}

json parse_array(Cursor& c) {
    ++c.i;  // '['
    json arr = json::array();
    c.skip_space();
    if (!c.done() && c.peek() == ']') {
        ++c.i;
        return arr;
    }
    while (true) {
        c.skip_space();
        arr.push_back(parse_value(c));
        c.skip_space();
        if (c.done()) c.fail("unterminated array");
        if (c.peek() == ',') {
            ++c.i;
            continue;
        }
        if (c.peek() == ']') {
            ++c.i;
            return arr;
        }
        c.fail("expected ',' or ']' in array");
    }
}

std::string parse_key(Cursor& c) {
    const size_t start = c.i;
    while (!c.done() && (std::isalnum(static_cast<unsigned char>(c.peek())) ||
                         c.peek() == '_' || c.peek() == '-'))
        ++c.i;
    if (c.i == start) c.fail("expected a key");
    return c.s.substr(start, c.i - start);
}

json parse_table(Cursor& c) {
    ++c.i;  // '{'
    json obj = json::object();
    c.skip_space();
    if (!c.done() && c.peek() == '}') {
        ++c.i;
        return obj;
    }
    while (true) {
        c.skip_space();
        const std::string key = parse_key(c);
        c.skip_space();
        if (c.done() || c.peek() != '=') c.fail("expected '=' in table");
        ++c.i;
        c.skip_space();
        obj[key] = parse_value(c);
        c.skip_space();
        if (c.done()) c.fail("unterminated table");
        if (c.peek() == ',') {
            ++c.i;
            continue;
        }
        if (c.peek() == '}') {
            ++c.i;
            return obj;
        }
        c.fail("expected ',' or '}' in table");
    }
}

json parse_value(Cursor& c) {
    c.skip_space();
    if (c.done()) c.fail("expected a value");
    const char ch = c.peek();
    if (ch == '"') return parse_string(c);
    if (ch == '[') return parse_array(c);
    if (ch == '{') return parse_table(c);
    return parse_number_or_word(c);
}

}  // namespace

ParsedConfig parse_config_text(const std::string& text) {
    // JSON alternative encoding: body starts with '{'.
    size_t first = text.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && text[first] == '{') {
        ParsedConfig cfg;
        try {
            cfg.values = nlohmann::json::parse(text);
        } catch (const nlohmann::json::parse_error& e) {
            throw ConfigError(std::string("json config: ") + e.what());
        }
        if (!cfg.values.is_object())
            throw ConfigError("json config must be an object");
        return cfg;
    }

    ParsedConfig cfg;
    cfg.values = nlohmann::json::object();
    std::istringstream is(text);
    std::string raw;
    int lineno = 0;
    while (std::getline(is, raw)) {
        ++lineno;
        if (!raw.empty() && raw.back() == '\r') raw.pop_back();
        // Strip comments outside strings.
        bool in_string = false;
        std::string line;
        for (char ch : raw) {
            if (ch == '"') in_string = !in_string;
            if (ch == '#' && !in_string) break;
            line += ch;
        }
        Cursor c{line, 0, lineno};
        c.skip_space();
        if (c.done()) continue;
        const std::string key = parse_key(c);
        c.skip_space();
        if (c.done() || c.peek() != '=') c.fail("expected '=' after key");
        ++c.i;
        c.skip_space();
        const json value = parse_value(c);
        c.skip_space();
        if (!c.done()) c.fail("trailing characters after value");
        if (cfg.values.contains(key)) c.fail("duplicate key '" + key + "'");
        cfg.values[key] = value;
        cfg.key_lines[key] = lineno;
    }
    return cfg;
}

EnvironmentLaw law_from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("kind"))
        throw ConfigError("law must be a table with a 'kind' field");
    const std::string kind = j.at("kind").get<std::string>();
    for (const auto& [key, value] : j.items()) {
        static const std::map<std::string, std::vector<std::string>> allowed =
            {{"deterministic", {"kind", "p"}},
             {"finite", {"kind", "atoms"}},
             {"uniform", {"kind", "lo", "hi", "delta"}}};
        const auto it = allowed.find(kind);
        if (it == allowed.end())
            throw ConfigError("unknown law kind '" + kind + "'");
        bool ok = false;
        for (const auto& k : it->second) ok = ok || k == key;
        if (!ok) throw ConfigError("unknown law key '" + key + "'");
    }
    try {
        if (kind == "deterministic")
            return EnvironmentLaw::deterministic(j.at("p").get<double>());
        if (kind == "finite") {
            std::vector<ProbabilityAtom> atoms;
            for (const auto& pair : j.at("atoms")) {
                if (!pair.is_array() || pair.size() != 2)
                    throw ConfigError("finite law atoms must be [p, weight]");
                atoms.push_back(
                    {pair[0].get<double>(), pair[1].get<double>()});
            }
            return EnvironmentLaw::finite_support(std::move(atoms));
        }
        const double delta = j.contains("delta")
                                 ? j.at("delta").get<double>()
                                 : kDefaultEllipticity;
        return EnvironmentLaw::uniform_interval(j.at("lo").get<double>(),
                                                j.at("hi").get<double>(),
                                                delta);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("law: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("law: ") + e.what());
    }
}

nlohmann::json law_to_json(const EnvironmentLaw& law) {
    nlohmann::json j;
    if (law.is_deterministic()) {
        j["kind"] = "deterministic";
        j["p"] = law.det().p;
    } else if (law.is_finite_support()) {
        j["kind"] = "finite";
        auto atoms = nlohmann::json::array();
        for (const auto& a : law.finite().atoms)
            atoms.push_back({a.p, a.weight});
        j["atoms"] = atoms;
    } else {
        j["kind"] = "uniform";
        j["lo"] = law.uniform().lo;
        j["hi"] = law.uniform().hi;
        j["delta"] = law.uniform().delta;
    }
    return j;
}

}  // namespace rwre::exp
