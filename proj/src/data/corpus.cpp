#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include "lasted/data/data.hpp"
#include "lasted/error.hpp"

namespace fs = std::filesystem;

namespace lasted::data {

std::string category_dir(Category category) {
    switch (category) {
        case Category::RealPhoto: return "real_photo";
        case Category::RealPainting: return "real_painting";
        case Category::SyntheticPhoto: return "synthetic_photo";
        case Category::SyntheticPainting: return "synthetic_painting";
    }
    return "?";
}

Category parse_category_dir(std::string_view name) {
    for (Category c : kCategories) {
        if (category_dir(c) == name) return c;
    }
    throw DataError("unknown category directory '" + std::string(name) + "'");
}

labels::Authenticity authenticity_of(Category category) {
    return category == Category::RealPhoto || category == Category::RealPainting
               ? labels::Authenticity::Real
               : labels::Authenticity::Synthetic;
}

labels::Medium medium_of(Category category) {
    return category == Category::RealPhoto || category == Category::SyntheticPhoto
               ? labels::Medium::Photo
               : labels::Medium::Painting;
}

Category category_of(labels::Authenticity authenticity, labels::Medium medium) {
    const bool real = authenticity == labels::Authenticity::Real;
    if (medium == labels::Medium::Photo) return real ? Category::RealPhoto : Category::SyntheticPhoto;
    return real ? Category::RealPainting : Category::SyntheticPainting;
}

std::string split_name(Split split) {
    switch (split) {
        case Split::Train: return "train";
        case Split::Val: return "val";
        case Split::Test: return "test";
        case Split::TestUnseen: return "test_unseen";
    }
    return "?";
}

std::size_t Corpus::count(Category category) const {
    return static_cast<std::size_t>(std::count_if(
        samples.begin(), samples.end(), [&](const ImageSample& s) { return s.category() == category; }));
}

std::vector<std::size_t> Corpus::indices_of(Category category) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (samples[i].category() == category) out.push_back(i);
    }
    return out;
}

const Corpus& Dataset::split(Split s) const {
    switch (s) {
        case Split::Train: return train;
        case Split::Val: return val;
        case Split::Test: return test;
        case Split::TestUnseen: return test_unseen;
    }
    return train;
}

namespace {

struct MetaEntry {
    std::string generator_id;
    std::uint64_t seed = 0;
};

std::map<std::string, MetaEntry> read_meta(const fs::path& path) {
    std::map<std::string, MetaEntry> out;
    std::ifstream in(path);
    if (!in) throw DataError("cannot read " + path.string());
    std::string line;
    std::size_t number = 0;
    while (std::getline(in, line)) {
        ++number;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::istringstream fields(line);
        std::string name, generator, seed;
        if (!std::getline(fields, name, '\t') || !std::getline(fields, generator, '\t') ||
            !std::getline(fields, seed, '\t')) {
            throw DataError(path.string() + ":" + std::to_string(number) +
                            ": expected filename<TAB>generator_id<TAB>seed");
        }
        try {
            std::size_t used = 0;
            const auto value = std::stoull(seed, &used);
            if (used != seed.size()) throw std::invalid_argument(seed);
            out[name] = {generator, value};
        } catch (const std::logic_error&) {
            throw DataError(path.string() + ":" + std::to_string(number) + ": bad seed '" + seed + "'");
        }
    }
    return out;
}

}  // namespace

Corpus load_corpus(const fs::path& root) {
    if (!fs::is_directory(root)) {
        throw DataError("corpus root is not a directory: " + root.string());
    }
    std::vector<fs::path> dirs;
    for (const auto& entry : fs::directory_iterator(root)) {
        if (entry.is_directory()) dirs.push_back(entry.path());
    }
    std::sort(dirs.begin(), dirs.end());
    Corpus corpus;
    for (const auto& dir : dirs) {
        const Category category = parse_category_dir(dir.filename().string());
        std::map<std::string, MetaEntry> meta;
        std::vector<fs::path> files;
        for (const auto& entry : fs::directory_iterator(dir)) {
            const auto name = entry.path().filename().string();
            if (name == "meta.tsv") {
                meta = read_meta(entry.path());
            } else if (entry.path().extension() == ".ppm") {
                files.push_back(entry.path());
            } else if (name.empty() || name[0] != '.') {
                throw DataError("unsupported file in corpus: " + entry.path().string());
            }
        }
        if (files.empty()) {
            throw DataError("category " + category_dir(category) + " empty: " + dir.string());
        }
        std::sort(files.begin(), files.end());
        for (const auto& file : files) {
            ImageSample sample;
            sample.pixels = read_ppm(file);
            sample.authenticity = authenticity_of(category);
            sample.medium = medium_of(category);
            sample.generator_id =
                sample.authenticity == labels::Authenticity::Real ? "none" : "unknown";
            if (auto it = meta.find(file.filename().string()); it != meta.end()) {
                sample.generator_id = it->second.generator_id;
                sample.seed = it->second.seed;
            }
            corpus.samples.push_back(std::move(sample));
        }
    }
    if (corpus.samples.empty()) {
        throw DataError("no category directories under " + root.string());
    }
    return corpus;
}

void write_corpus(const fs::path& root, const Corpus& corpus) {
    for (Category c : kCategories) {
        const auto indices = corpus.indices_of(c);
        if (indices.empty()) continue;
        const fs::path dir = root / category_dir(c);
        fs::create_directories(dir);
        std::ofstream meta(dir / "meta.tsv");
        std::size_t n = 0;
        for (std::size_t i : indices) {
            std::ostringstream name;
            name << category_dir(c) << '_';
            name.width(5);
            name.fill('0');
            name << n++ << ".ppm";
            const auto& s = corpus.samples[i];
            write_ppm(dir / name.str(), s.pixels);
            meta << name.str() << '\t' << s.generator_id << '\t' << s.seed << '\n';
        }
        if (!meta) throw DataError("cannot write " + (dir / "meta.tsv").string());
    }
}

void write_dataset(const fs::path& root, const Dataset& dataset) {
    for (Split s : kSplits) {
        const auto& corpus = dataset.split(s);
        if (!corpus.samples.empty()) write_corpus(root / split_name(s), corpus);
    }
}

Dataset load_dataset(const fs::path& root) {
    Dataset out;
    out.train = load_corpus(root / split_name(Split::Train));
    out.val = load_corpus(root / split_name(Split::Val));
    out.test = load_corpus(root / split_name(Split::Test));
    if (fs::exists(root / split_name(Split::TestUnseen))) {
        out.test_unseen = load_corpus(root / split_name(Split::TestUnseen));
    }
    return out;
}

}  // namespace lasted::data
