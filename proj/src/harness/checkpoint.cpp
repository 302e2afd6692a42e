#include "lasted/harness/checkpoint.hpp"

#include <zlib.h>

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <map>

#include "lasted/error.hpp"

namespace lasted::harness {

std::vector<encoders::NamedTensor> Model::named_parameters() const {
    auto out = image.named_parameters();
    if (config.paradigm == baselines::Paradigm::Lasted) {
        for (auto& p : text.named_parameters()) out.push_back(std::move(p));
    }
    if (head) {
        for (auto& p : head->named_parameters()) out.push_back(std::move(p));
    }
    return out;
}

std::vector<ad::Tensor> Model::trainable() const {
    std::vector<ad::Tensor> out;
    for (auto& [name, t] : named_parameters()) out.push_back(t);
    if (config.paradigm == baselines::Paradigm::Lasted) out.push_back(temperature.log_inverse);
    return out;
}

Model init_model(const RunConfig& cfg) {
    labels::LabelSet set(cfg.labels);
    auto [image, text] = encoders::init_params(cfg.seed, encoder_config(cfg), set.vocab().size());
    Model m{cfg, std::move(image), std::move(text), contrastive::Temperature::from_inverse(), std::nullopt};
    if (cfg.paradigm == baselines::Paradigm::Classification) {
        m.head = baselines::init_classification_head(cfg.seed, cfg.embed_dim, class_count(cfg));
    }
    return m;
}

void round_to_float(Model& model) {
    auto round_tensor = [](ad::Tensor& t) {
        for (double& v : t.mutable_data()) v = static_cast<double>(static_cast<float>(v));
    };
    for (auto& [name, t] : model.named_parameters()) round_tensor(t);
    round_tensor(model.temperature.log_inverse);
}

Model clone(const Model& model) {
    Model copy = init_model(model.config);
    auto src = model.named_parameters();
    auto dst = copy.named_parameters();
    for (std::size_t i = 0; i < src.size(); ++i) {
        auto values = src[i].second.data();
        std::copy(values.begin(), values.end(), dst[i].second.mutable_data().begin());
    }
    copy.temperature.log_inverse.mutable_data()[0] = model.temperature.log_inverse.item();
    return copy;
}

namespace {

class Writer {
public:
    void u32(std::uint32_t v) {
        for (int i = 0; i < 4; ++i) bytes_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
    }
    void u64(std::uint64_t v) {
        for (int i = 0; i < 8; ++i) bytes_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
    }
    void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
    void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
    void raw(const std::string& s) { bytes_ += s; }
    std::string& bytes() { return bytes_; }

private:
    std::string bytes_;
};

class Reader {
public:
    Reader(const std::string& bytes, std::size_t end, const std::filesystem::path& path)
        : bytes_(bytes), end_(end), path_(path) {}

    std::uint32_t u32() { return static_cast<std::uint32_t>(take(4)); }
    std::uint64_t u64() { return take(8); }
    double f64() { return std::bit_cast<double>(u64()); }
    float f32() { return std::bit_cast<float>(u32()); }
    std::string raw(std::size_t n) {
        need(n);
        std::string out = bytes_.substr(pos_, n);
        pos_ += n;
        return out;
    }
    std::size_t pos() const { return pos_; }

private:
    void need(std::size_t n) {
        if (n > end_ - pos_) {
            throw DataError("truncated checkpoint " + path_.string() + ": needed " +
                            std::to_string(n) + " bytes at offset " + std::to_string(pos_));
        }
    }
    std::uint64_t take(int n) {
        need(static_cast<std::size_t>(n));
        std::uint64_t v = 0;
        for (int i = 0; i < n; ++i) {
            v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
        }
        pos_ += static_cast<std::size_t>(n);
        return v;
    }

    const std::string& bytes_;
    std::size_t end_;
    std::size_t pos_ = 0;
    const std::filesystem::path& path_;
};

std::uint32_t crc_of(const std::string& bytes, std::size_t n) {
    return static_cast<std::uint32_t>(
        crc32(0L, reinterpret_cast<const Bytef*>(bytes.data()), static_cast<uInt>(n)));
}

constexpr std::size_t kHeaderSize = 4 + 4 + 8;

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const Model& model) {
    Writer w;
    w.raw("LSTD");
    w.u32(kCheckpointVersion);
    w.u64(0);  // file size, patched below
    // The snapshot omits out_dir so reruns into another directory stay
    // byte-identical.
    RunConfig snapshot = model.config;
    snapshot.out_dir.clear();
    const std::string config = to_text(snapshot);
    w.u32(static_cast<std::uint32_t>(config.size()));
    w.raw(config);
    w.f64(model.temperature.log_inverse.item());
    const auto params = model.named_parameters();
    w.u32(static_cast<std::uint32_t>(params.size()));
    for (const auto& [name, t] : params) {
        w.u32(static_cast<std::uint32_t>(name.size()));
        w.raw(name);
        w.u32(static_cast<std::uint32_t>(t.rank()));
        for (std::size_t d : t.shape()) w.u64(d);
        for (double v : t.data()) w.f32(static_cast<float>(v));
    }
    auto& bytes = w.bytes();
    const std::uint64_t total = bytes.size() + 4;
    for (int i = 0; i < 8; ++i) bytes[8 + i] = static_cast<char>((total >> (8 * i)) & 0xff);
    w.u32(crc_of(bytes, bytes.size()));

    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw DataError("cannot write checkpoint " + path.string());
}

Model load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open checkpoint " + path.string());
    const std::string bytes{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
    if (bytes.size() < 4 || bytes.compare(0, 4, "LSTD") != 0) {
        throw DataError("not a checkpoint (bad magic): " + path.string());
    }
    Reader header(bytes, std::min(bytes.size(), kHeaderSize), path);
    header.raw(4);
    const std::uint32_t version = header.u32();
    if (version != kCheckpointVersion) {
        throw DataError("unsupported version " + std::to_string(version) + " in checkpoint " +
                        path.string() + " (expected " + std::to_string(kCheckpointVersion) + ")");
    }
    const std::uint64_t declared = header.u64();
    if (bytes.size() < declared) {
        throw DataError("truncated checkpoint " + path.string() + ": " + std::to_string(bytes.size()) +
                        " of " + std::to_string(declared) + " bytes");
    }
    if (bytes.size() != declared || declared < kHeaderSize + 4) {
        throw DataError("checkpoint size mismatch in " + path.string() + ": header says " +
                        std::to_string(declared) + " bytes, file has " + std::to_string(bytes.size()));
    }
    const std::size_t crc_offset = bytes.size() - 4;
    Reader tail(bytes, bytes.size(), path);
    tail.raw(crc_offset);
    const std::uint32_t stored = tail.u32();
    const std::uint32_t computed = crc_of(bytes, crc_offset);
    if (stored != computed) {
        char buf[160];
        std::snprintf(buf, sizeof buf, "checksum mismatch at offset %zu: stored %08x, computed %08x",
                      crc_offset, stored, computed);
        throw DataError(std::string(buf) + " in " + path.string());
    }

    Reader r(bytes, crc_offset, path);
    r.raw(kHeaderSize);
    const std::string config = r.raw(r.u32());
    Model model = init_model(parse_config(config));
    model.temperature.log_inverse.mutable_data()[0] = r.f64();
    std::map<std::string, ad::Tensor> expected;
    for (auto& [name, t] : model.named_parameters()) expected.emplace(name, t);
    const std::uint32_t count = r.u32();
    if (count != expected.size()) {
        throw DataError("checkpoint " + path.string() + " holds " + std::to_string(count) +
                        " tensors, configuration expects " + std::to_string(expected.size()));
    }
    for (std::uint32_t i = 0; i < count; ++i) {
        const std::string name = r.raw(r.u32());
        auto it = expected.find(name);
        if (it == expected.end()) {
            throw DataError("unexpected tensor '" + name + "' in checkpoint " + path.string());
        }
        ad::Tensor& t = it->second;
        const std::uint32_t rank = r.u32();
        ad::Shape shape(rank);
        for (auto& d : shape) d = r.u64();
        if (shape != t.shape()) {
            throw DataError("tensor '" + name + "' has shape " + ad::shape_str(shape) +
                            ", expected " + ad::shape_str(t.shape()));
        }
        for (double& v : t.mutable_data()) v = static_cast<double>(r.f32());
    }
    if (r.pos() != crc_offset) {
        throw DataError("trailing bytes before checksum in checkpoint " + path.string());
    }
    return model;
}

}  // namespace lasted::harness
