#include "lasted/harness/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>

#include "lasted/error.hpp"

namespace lasted::harness {

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(std::string_view text) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= text.size()) {
        const auto comma = text.find(',', start);
        const auto item = trim(text.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
        if (!item.empty()) out.push_back(item);
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

std::uint64_t to_u64(std::string_view key, std::string_view v) {
    std::uint64_t out = 0;
    const auto [end, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || end != v.data() + v.size()) {
        throw ArgumentError("config '" + std::string(key) + "': expected a non-negative integer, got '" +
                            std::string(v) + "'");
    }
    return out;
}

double to_double(std::string_view key, std::string_view v) {
    const std::string s(v);
    char* end = nullptr;
    const double out = std::strtod(s.c_str(), &end);
    if (s.empty() || end != s.c_str() + s.size() || !std::isfinite(out)) {
        throw ArgumentError("config '" + std::string(key) + "': expected a number, got '" + s + "'");
    }
    return out;
}

bool to_bool(std::string_view key, std::string_view v) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw ArgumentError("config '" + std::string(key) + "': expected true/false, got '" +
                        std::string(v) + "'");
}

std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

template <typename T, typename F>
std::string join(const std::vector<T>& items, F&& f) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i) out += ',';
        out += f(items[i]);
    }
    return out;
}

struct Field {
    const char* name;
    std::function<std::string(const RunConfig&)> get;
    std::function<void(RunConfig&, std::string_view)> set;
};

#define LASTED_SIZE_FIELD(member)                                                  \
    Field {                                                                        \
        #member, [](const RunConfig& c) { return std::to_string(c.member); },      \
            [](RunConfig& c, std::string_view v) { c.member = to_u64(#member, v); } \
    }
#define LASTED_DOUBLE_FIELD(member)                                                   \
    Field {                                                                           \
        #member, [](const RunConfig& c) { return fmt_double(c.member); },             \
            [](RunConfig& c, std::string_view v) { c.member = to_double(#member, v); } \
    }
#define LASTED_STRING_FIELD(member)                                                \
    Field {                                                                        \
        #member, [](const RunConfig& c) { return c.member; },                      \
            [](RunConfig& c, std::string_view v) { c.member = std::string(v); }    \
    }
#define LASTED_DOUBLE_LIST_FIELD(member)                                               \
    Field {                                                                            \
        #member, [](const RunConfig& c) { return join(c.member, fmt_double); },        \
            [](RunConfig& c, std::string_view v) {                                     \
                c.member.clear();                                                      \
                for (const auto& s : split_list(v)) c.member.push_back(to_double(#member, s)); \
            }                                                                          \
    }

const std::vector<Field>& fields() {
    static const std::vector<Field> table{
        LASTED_SIZE_FIELD(seed),
        Field{"labels", [](const RunConfig& c) { return std::string(labels::strategy_name(c.labels)); },
              [](RunConfig& c, std::string_view v) { c.labels = labels::parse_strategy(v); }},
        Field{"paradigm", [](const RunConfig& c) { return baselines::paradigm_name(c.paradigm); },
              [](RunConfig& c, std::string_view v) { c.paradigm = baselines::parse_paradigm(v); }},
        LASTED_STRING_FIELD(data_dir),
        LASTED_STRING_FIELD(anchor_dir),
        LASTED_STRING_FIELD(out_dir),
        LASTED_SIZE_FIELD(train_per_category),
        LASTED_SIZE_FIELD(val_per_category),
        LASTED_SIZE_FIELD(test_per_category),
        LASTED_SIZE_FIELD(unseen_per_category),
        LASTED_SIZE_FIELD(image_size),
        LASTED_DOUBLE_FIELD(artifact_amplitude),
        LASTED_SIZE_FIELD(patch),
        LASTED_SIZE_FIELD(batch_size),
        LASTED_SIZE_FIELD(embed_dim),
        LASTED_SIZE_FIELD(text_dim),
        Field{"channels",
              [](const RunConfig& c) {
                  return join(c.channels, [](std::size_t v) { return std::to_string(v); });
              },
              [](RunConfig& c, std::string_view v) {
                  c.channels.clear();
                  for (const auto& s : split_list(v)) c.channels.push_back(to_u64("channels", s));
              }},
        LASTED_SIZE_FIELD(epochs),
        LASTED_SIZE_FIELD(max_steps),
        LASTED_DOUBLE_FIELD(learning_rate),
        LASTED_DOUBLE_FIELD(lr_decay),
        LASTED_SIZE_FIELD(lr_patience),
        LASTED_DOUBLE_FIELD(augment_probability),
        LASTED_SIZE_FIELD(n_pos),
        LASTED_SIZE_FIELD(n_neg),
        LASTED_SIZE_FIELD(val_pairs),
        LASTED_SIZE_FIELD(anchor_size),
        LASTED_SIZE_FIELD(anchor_seed),
        Field{"threshold", [](const RunConfig& c) { return c.threshold.str(); },
              [](RunConfig& c, std::string_view v) { c.threshold = identify::DecisionThreshold::parse(v); }},
        Field{"predict_labels", [](const RunConfig& c) { return std::string(c.predict_labels ? "true" : "false"); },
              [](RunConfig& c, std::string_view v) { c.predict_labels = to_bool("predict_labels", v); }},
        Field{"sweep_sizes",
              [](const RunConfig& c) {
                  return join(c.sweep_sizes, [](std::size_t v) { return std::to_string(v); });
              },
              [](RunConfig& c, std::string_view v) {
                  c.sweep_sizes.clear();
                  for (const auto& s : split_list(v)) c.sweep_sizes.push_back(to_u64("sweep_sizes", s));
              }},
        LASTED_SIZE_FIELD(sweep_repeats),
        Field{"sweep_split", [](const RunConfig& c) { return data::split_name(c.sweep_split); },
              [](RunConfig& c, std::string_view v) { c.sweep_split = parse_split(v); }},
        LASTED_DOUBLE_LIST_FIELD(jpeg_grid),
        LASTED_DOUBLE_LIST_FIELD(blur_grid),
        LASTED_DOUBLE_LIST_FIELD(noise_grid),
        LASTED_DOUBLE_LIST_FIELD(downsample_grid),
        Field{"ablation_strategies",
              [](const RunConfig& c) {
                  return join(c.ablation_strategies,
                              [](labels::LabelStrategy s) { return std::string(labels::strategy_name(s)); });
              },
              [](RunConfig& c, std::string_view v) {
                  c.ablation_strategies.clear();
                  for (const auto& s : split_list(v)) c.ablation_strategies.push_back(labels::parse_strategy(s));
              }},
    };
    return table;
}

#undef LASTED_SIZE_FIELD
#undef LASTED_DOUBLE_FIELD
#undef LASTED_STRING_FIELD
#undef LASTED_DOUBLE_LIST_FIELD

}  // namespace

data::Split parse_split(std::string_view name) {
    for (data::Split s : data::kSplits) {
        if (data::split_name(s) == name) return s;
    }
    throw ArgumentError("unknown split '" + std::string(name) + "'");
}

void set_value(RunConfig& cfg, std::string_view key, std::string_view value) {
    for (const auto& f : fields()) {
        if (key == f.name) {
            f.set(cfg, trim(value));
            return;
        }
    }
    throw ArgumentError("unknown config key '" + std::string(key) + "'");
}

void apply_text(RunConfig& cfg, std::string_view text) {
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t number = 0;
    while (std::getline(in, line)) {
        ++number;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        const auto body = trim(line);
        if (body.empty()) continue;
        const auto eq = body.find('=');
        if (eq == std::string::npos) {
            throw ArgumentError("config line " + std::to_string(number) + ": expected 'key = value'");
        }
        set_value(cfg, trim(std::string_view(body).substr(0, eq)), std::string_view(body).substr(eq + 1));
    }
}

void apply_file(RunConfig& cfg, const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ArgumentError("cannot read config file " + path.string());
    std::ostringstream text;
    text << in.rdbuf();
    apply_text(cfg, text.str());
}

RunConfig parse_config(std::string_view text) {
    RunConfig cfg;
    apply_text(cfg, text);
    return cfg;
}

std::string to_text(const RunConfig& cfg) {
    std::string out;
    for (const auto& f : fields()) {
        out += f.name;
        out += " = ";
        out += f.get(cfg);
        out += '\n';
    }
    return out;
}

std::string config_hash(const RunConfig& cfg) {
    RunConfig hashed = cfg;
    hashed.out_dir.clear();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : to_text(hashed)) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::size_t class_count(const RunConfig& cfg) { return labels::label_count(cfg.labels); }

void validate(const RunConfig& cfg) {
    const std::size_t c = class_count(cfg);
    if (cfg.batch_size == 0 || cfg.batch_size % c != 0) {
        throw ArgumentError("batch_size " + std::to_string(cfg.batch_size) +
                            " must be a positive multiple of the label count " + std::to_string(c));
    }
    const auto enc = encoder_config(cfg);
    if (cfg.patch < enc.min_input) {
        throw ArgumentError("patch must be at least " + std::to_string(enc.min_input));
    }
    if (cfg.data_dir.empty() && cfg.image_size < cfg.patch) {
        throw ArgumentError("image_size must be at least patch");
    }
    if (cfg.channels.empty() || cfg.embed_dim == 0 || cfg.text_dim == 0) {
        throw ArgumentError("channels, embed_dim and text_dim must be non-empty/positive");
    }
    if (cfg.epochs == 0) throw ArgumentError("epochs must be positive");
    if (!(cfg.learning_rate > 0.0) || !(cfg.lr_decay > 0.0 && cfg.lr_decay <= 1.0)) {
        throw ArgumentError("learning_rate must be > 0 and lr_decay in (0, 1]");
    }
    if (!(cfg.augment_probability >= 0.0 && cfg.augment_probability <= 1.0)) {
        throw ArgumentError("augment_probability must lie in [0, 1]");
    }
    if (cfg.n_pos == 0 || cfg.n_neg == 0 || cfg.val_pairs == 0 || cfg.anchor_size == 0) {
        throw ArgumentError("n_pos, n_neg, val_pairs and anchor_size must be positive");
    }
    if (cfg.artifact_amplitude < 0.0 || cfg.artifact_amplitude > 1.0) {
        throw ArgumentError("artifact_amplitude must lie in [0, 1]");
    }
}

encoders::EncoderConfig encoder_config(const RunConfig& cfg) {
    encoders::EncoderConfig enc;
    enc.channels = cfg.channels;
    enc.embed_dim = cfg.embed_dim;
    enc.text_dim = cfg.text_dim;
    return enc;
}

data::ToyDatasetSpec toy_spec(const RunConfig& cfg) {
    data::ToyDatasetSpec spec;
    spec.master_seed = cfg.seed;
    spec.image_size = cfg.image_size;
    spec.train_per_category = cfg.train_per_category;
    spec.val_per_category = cfg.val_per_category;
    spec.test_per_category = cfg.test_per_category;
    spec.unseen_per_category = cfg.unseen_per_category;
    spec.toy.artifact_amplitude = cfg.artifact_amplitude;
    return spec;
}

data::AugmentPolicy augment_policy(const RunConfig& cfg) {
    data::AugmentPolicy policy;
    policy.probability = cfg.augment_probability;
    return policy;
}

}  // namespace lasted::harness
