#include "vizrec/config.hpp"

#include <charconv>
#include <cmath>
#include <variant>

#include <fmt/format.h>

#include "vizrec/error.hpp"
#include "vizrec/model_io.hpp"
#include "vizrec/scoring.hpp"

namespace vizrec::config {

namespace {

using Member = std::variant<std::string RunConfig::*, int RunConfig::*, unsigned RunConfig::*, double RunConfig::*,
                            bool RunConfig::*, std::optional<std::uint64_t> RunConfig::*,
                            std::vector<std::string> RunConfig::*>;

struct Key {
    std::string_view name;
    Member member;
};

// Emission order.
const std::vector<Key>& keys() {
    static const std::vector<Key> k{
        {"repo", &RunConfig::repo},
        {"bundle", &RunConfig::bundle},
        {"seed", &RunConfig::seed},
        {"workers", &RunConfig::workers},
        {"stopwords", &RunConfig::stopwords},
        {"word_vectors", &RunConfig::word_vectors},
        {"facet_model", &RunConfig::facet_model},
        {"similar_data_model", &RunConfig::similar_data_model},
        {"lda_iterations", &RunConfig::lda_iterations},
        {"lda_infer_iterations", &RunConfig::lda_infer_iterations},
        {"lda_alpha", &RunConfig::lda_alpha},
        {"neighbors_per_facet", &RunConfig::neighbors_per_facet},
        {"related_low", &RunConfig::related_low},
        {"related_high", &RunConfig::related_high},
        {"versions_low", &RunConfig::versions_low},
        {"versions_high", &RunConfig::versions_high},
        {"similar_data_low", &RunConfig::similar_data_low},
        {"similar_data_high", &RunConfig::similar_data_high},
        {"minhash", &RunConfig::minhash},
        {"minhash_threshold", &RunConfig::minhash_threshold},
        {"host", &RunConfig::host},
        {"port", &RunConfig::port},
        {"cors_origin", &RunConfig::cors_origin},
        {"models", &RunConfig::models},
        {"eval_unit", &RunConfig::eval_unit},
        {"triplets", &RunConfig::triplets},
        {"strata_k", &RunConfig::strata_k},
        {"triplets_path", &RunConfig::triplets_path},
        {"judgements", &RunConfig::judgements},
        {"gold", &RunConfig::gold},
        {"exclusions", &RunConfig::exclusions},
        {"report", &RunConfig::report},
    };
    return k;
}

const Key* find_key(std::string_view name) {
    for (const auto& k : keys()) {
        if (k.name == name) return &k;
    }
    return nullptr;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::string quote(std::string_view s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '\n') {
            out += "\\n";
            continue;
        }
        if (c == '"' || c == '\\') out += '\\';
        out += c;
    }
    return out + '"';
}

class ValueParser {
public:
    ValueParser(std::string_view text, std::size_t line, bool bare_strings)
        : s_(text), line_(line), bare_(bare_strings) {}

    [[noreturn]] void fail(const std::string& what) const {
        throw Error(ErrorCode::InvalidConfig, fmt::format("line {}: {}", line_, what));
    }

    std::string string_value() {
        skip_ws();
        if (pos_ < s_.size() && s_[pos_] == '"') return quoted();
        if (!bare_) fail("expected a quoted string");
        auto rest = trim(s_.substr(pos_));
        pos_ = s_.size();
        return std::string(rest);
    }

    std::string quoted() {
        std::string out;
        ++pos_;
        while (pos_ < s_.size() && s_[pos_] != '"') {
            if (s_[pos_] == '\\') {
                if (++pos_ >= s_.size()) break;
                const char c = s_[pos_++];
                if (c == 'n') {
                    out += '\n';
                    continue;
                }
                if (c != '"' && c != '\\') fail(fmt::format("unsupported escape '\\{}'", c));
                out += c;
                continue;
            }
            out += s_[pos_++];
        }
        if (pos_ >= s_.size()) fail("unterminated string");
        ++pos_;
        return out;
    }

    std::string_view word() {
        skip_ws();
        const auto start = pos_;
        while (pos_ < s_.size() && s_[pos_] != ' ' && s_[pos_] != '\t' && s_[pos_] != '#' && s_[pos_] != ',' &&
               s_[pos_] != ']') {
            ++pos_;
        }
        return s_.substr(start, pos_ - start);
    }

    template <typename T>
    T integer() {
        const auto w = word();
        T v{};
        auto [end, ec] = std::from_chars(w.data(), w.data() + w.size(), v);
        if (w.empty() || ec != std::errc() || end != w.data() + w.size()) fail(fmt::format("bad integer '{}'", w));
        return v;
    }

    double real() {
        const auto w = word();
        double v = 0.0;
        auto [end, ec] = std::from_chars(w.data(), w.data() + w.size(), v);
        if (w.empty() || ec != std::errc() || end != w.data() + w.size() || !std::isfinite(v)) {
            fail(fmt::format("bad number '{}'", w));
        }
        return v;
    }

    bool boolean() {
        const auto w = word();
        if (w == "true") return true;
        if (w == "false") return false;
        fail(fmt::format("expected true or false, got '{}'", w));
    }

    std::vector<std::string> list() {
        skip_ws();
        if (pos_ >= s_.size() || s_[pos_] != '[') {
            if (!bare_) fail("expected a [list]");
            // Bare override form: comma-separated words.
            std::vector<std::string> out;
            std::string_view rest = trim(s_.substr(pos_));
            pos_ = s_.size();
            while (!rest.empty()) {
                const auto comma = rest.find(',');
                auto item = trim(rest.substr(0, comma));
                if (!item.empty()) out.emplace_back(item);
                if (comma == std::string_view::npos) break;
                rest = rest.substr(comma + 1);
            }
            return out;
        }
        ++pos_;
        std::vector<std::string> out;
        skip_ws();
        if (pos_ < s_.size() && s_[pos_] == ']') {
            ++pos_;
            return out;
        }
        while (true) {
            skip_ws();
            if (pos_ >= s_.size() || s_[pos_] != '"') fail("list items must be quoted strings");
            out.push_back(quoted());
            skip_ws();
            if (pos_ < s_.size() && s_[pos_] == ',') {
                ++pos_;
                continue;
            }
            if (pos_ < s_.size() && s_[pos_] == ']') {
                ++pos_;
                return out;
            }
            fail("expected ',' or ']' in list");
        }
    }

    void finish() {
        skip_ws();
        if (pos_ < s_.size() && s_[pos_] != '#') fail(fmt::format("unexpected trailing text '{}'", s_.substr(pos_)));
    }

private:
    void skip_ws() {
        while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t' || s_[pos_] == '\r')) ++pos_;
    }

    std::string_view s_;
    std::size_t pos_ = 0;
    std::size_t line_;
    bool bare_;
};

void assign(RunConfig& cfg, const Key& key, std::string_view value, std::size_t line, bool bare) {
    ValueParser p(value, line, bare);
    std::visit(
        [&](auto member) {
            using T = std::remove_reference_t<decltype(cfg.*member)>;
            if constexpr (std::is_same_v<T, std::string>) {
                cfg.*member = p.string_value();
            } else if constexpr (std::is_same_v<T, int>) {
                cfg.*member = p.integer<int>();
            } else if constexpr (std::is_same_v<T, unsigned>) {
                cfg.*member = p.integer<unsigned>();
            } else if constexpr (std::is_same_v<T, double>) {
                cfg.*member = p.real();
            } else if constexpr (std::is_same_v<T, bool>) {
                cfg.*member = p.boolean();
            } else if constexpr (std::is_same_v<T, std::optional<std::uint64_t>>) {
                cfg.*member = p.integer<std::uint64_t>();
            } else {
                cfg.*member = p.list();
            }
        },
        key.member);
    p.finish();
}

}  // namespace

similarity::FacetConfig RunConfig::facet(similarity::Facet f) const {
    auto fc = similarity::default_facet(f);
    switch (f) {
    case similarity::Facet::Related:
        fc.low = related_low;
        fc.high = related_high;
        break;
    case similarity::Facet::Versions:
        fc.low = versions_low;
        fc.high = versions_high;
        break;
    case similarity::Facet::SimilarData:
        fc.low = similar_data_low;
        fc.high = similar_data_high;
        break;
    }
    return fc;
}

RunConfig parse(std::string_view text) {
    RunConfig cfg;
    std::size_t line_no = 0;
    while (!text.empty()) {
        const auto nl = text.find('\n');
        auto line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        ++line_no;
        line = trim(line);
        if (line.empty() || line.front() == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw Error(ErrorCode::InvalidConfig, fmt::format("line {}: expected key = value", line_no));
        }
        const auto name = trim(line.substr(0, eq));
        const auto* key = find_key(name);
        if (!key) throw Error(ErrorCode::InvalidConfig, fmt::format("line {}: unknown key '{}'", line_no, name));
        assign(cfg, *key, line.substr(eq + 1), line_no, false);
    }
    return cfg;
}

RunConfig load(const std::filesystem::path& path) {
    std::string bytes;
    try {
        bytes = io::read_file_bytes(path);
    } catch (const Error&) {
        throw Error(ErrorCode::InvalidConfig, "cannot read config file " + path.string());
    }
    return parse(bytes);
}

std::string emit(const RunConfig& cfg) {
    std::string out;
    for (const auto& key : keys()) {
        std::visit(
            [&](auto member) {
                const auto& v = cfg.*member;
                using T = std::remove_cvref_t<decltype(v)>;
                if constexpr (std::is_same_v<T, std::string>) {
                    out += fmt::format("{} = {}\n", key.name, quote(v));
                } else if constexpr (std::is_same_v<T, bool>) {
                    out += fmt::format("{} = {}\n", key.name, v ? "true" : "false");
                } else if constexpr (std::is_same_v<T, std::optional<std::uint64_t>>) {
                    if (v) out += fmt::format("{} = {}\n", key.name, *v);
                } else if constexpr (std::is_same_v<T, std::vector<std::string>>) {
                    std::string items;
                    for (std::size_t i = 0; i < v.size(); ++i) items += (i ? ", " : "") + quote(v[i]);
                    out += fmt::format("{} = [{}]\n", key.name, items);
                } else {
                    out += fmt::format("{} = {}\n", key.name, v);
                }
            },
            key.member);
    }
    return out;
}

void set_value(RunConfig& config, std::string_view key, std::string_view value) {
    const auto* k = find_key(key);
    if (!k) throw Error(ErrorCode::InvalidConfig, fmt::format("unknown key '{}'", key));
    assign(config, *k, value, 0, true);
}

void validate(const RunConfig& cfg, bool require_seed) {
    auto fail = [](const std::string& msg) { throw Error(ErrorCode::InvalidConfig, msg); };
    if (require_seed && !cfg.seed) fail("seed is required; set `seed = <integer>` or pass --seed");
    for (auto f : similarity::kAllFacets) {
        const auto fc = cfg.facet(f);
        const auto name = similarity::to_string(f);
        if (fc.low < 0.0 || fc.low > 1.0 || fc.high < 0.0 || fc.high > 1.0) {
            fail(fmt::format("{} thresholds must lie in [0, 1]", name));
        }
        if (fc.low >= fc.high) fail(fmt::format("{} threshold low must be below high", name));
    }
    if (cfg.neighbors_per_facet < 1) fail("neighbors_per_facet must be positive");
    if (cfg.lda_iterations < 1 || cfg.lda_infer_iterations < 1) fail("LDA iteration counts must be positive");
    if (cfg.triplets < 1) fail("triplets must be positive");
    if (cfg.strata_k < 2) fail("strata_k must be at least 2");
    if (cfg.port < 0 || cfg.port > 65535) fail("port must be in [0, 65535]");
    if (cfg.minhash_threshold < 0.0 || cfg.minhash_threshold > 1.0) fail("minhash_threshold must lie in [0, 1]");
    if (cfg.eval_unit != "all_text" && cfg.eval_unit != "sheet") fail("eval_unit must be all_text or sheet");
    for (const auto* tag : {&cfg.facet_model, &cfg.similar_data_model}) {
        if (!scoring::parse_model_tag(*tag)) fail(fmt::format("unknown model tag '{}'", *tag));
    }
    for (const auto& tag : cfg.models) {
        if (!scoring::parse_model_tag(tag)) fail(fmt::format("unknown model tag '{}'", tag));
    }
}

}  // namespace vizrec::config
