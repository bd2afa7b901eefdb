#include "cgtrace/checkpoint.hpp"

#include <cstring>
#include <fstream>

#include "cgtrace/errors.hpp"

namespace cgtrace {

namespace {

constexpr char kMagic[4] = {'C', 'G', 'T', '1'};

void put_u32(std::vector<uint8_t>& buf, uint32_t v) {
    for (int i = 0; i < 4; ++i) buf.push_back(static_cast<uint8_t>(v >> (8 * i)));
}

void put_u64(std::vector<uint8_t>& buf, uint64_t v) {
    for (int i = 0; i < 8; ++i) buf.push_back(static_cast<uint8_t>(v >> (8 * i)));
}

void put_f32(std::vector<uint8_t>& buf, float v) {
    uint32_t bits;
    std::memcpy(&bits, &v, 4);
    put_u32(buf, bits);
}

void put_f64(std::vector<uint8_t>& buf, double v) {
    uint64_t bits;
    std::memcpy(&bits, &v, 8);
    put_u64(buf, bits);
}

void put_string(std::vector<uint8_t>& buf, const std::string& s) {
    put_u32(buf, static_cast<uint32_t>(s.size()));
    buf.insert(buf.end(), s.begin(), s.end());
}

struct Reader {
    const std::vector<uint8_t>& buf;
    size_t pos = 0;

    void need(size_t n) const {
        if (pos + n > buf.size()) throw IoError("checkpoint: truncated file");
    }
    uint32_t u32() {
        need(4);
        uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(buf[pos + i]) << (8 * i);
        pos += 4;
        return v;
    }
    uint64_t u64() {
        need(8);
        uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(buf[pos + i]) << (8 * i);
        pos += 8;
        return v;
    }
    float f32() {
        const uint32_t bits = u32();
        float v;
        std::memcpy(&v, &bits, 4);
        return v;
    }
    double f64() {
        const uint64_t bits = u64();
        double v;
        std::memcpy(&v, &bits, 8);
        return v;
    }
    std::string str() {
        const uint32_t n = u32();
        need(n);
        std::string s(buf.begin() + pos, buf.begin() + pos + n);
        pos += n;
        return s;
    }
};

}  // namespace

uint32_t crc32(const uint8_t* data, size_t n) {
    static uint32_t table[256];
    static bool built = false;
    if (!built) {
        for (uint32_t i = 0; i < 256; ++i) {
            uint32_t c = i;
            for (int k = 0; k < 8; ++k) c = (c & 1) ? 0xEDB88320u ^ (c >> 1) : c >> 1;
            table[i] = c;
        }
        built = true;
    }
    uint32_t c = 0xFFFFFFFFu;
    for (size_t i = 0; i < n; ++i) c = table[(c ^ data[i]) & 0xFF] ^ (c >> 8);
    return c ^ 0xFFFFFFFFu;
}

void ModelCheckpoint::add_tensor(const std::string& name, const Tensor& t) {
    Entry e;
    e.name = name;
    e.shape.assign(t.shape().begin(), t.shape().end());
    e.values.reserve(t.numel());
    const double* d = t.data();
    for (int64_t i = 0; i < t.numel(); ++i) e.values.push_back(static_cast<float>(d[i]));
    tensors.push_back(std::move(e));
}

void ModelCheckpoint::add_buffer(const std::string& name, const std::vector<double>& v) {
    Entry e;
    e.name = name;
    e.shape = {static_cast<int64_t>(v.size())};
    e.values.assign(v.begin(), v.end());
    tensors.push_back(std::move(e));
}

const ModelCheckpoint::Entry* ModelCheckpoint::find(const std::string& name) const {
    for (const auto& e : tensors)
        if (e.name == name) return &e;
    return nullptr;
}

void ModelCheckpoint::load_into(const std::string& name, Tensor& t) const {
    const Entry* e = find(name);
    if (!e) throw IoError("checkpoint: missing tensor '" + name + "'");
    const std::vector<int64_t> want(t.shape().begin(), t.shape().end());
    if (e->shape != want)
        throw DimensionError("checkpoint: shape mismatch for tensor '" + name + "'");
    double* d = t.data();
    for (size_t i = 0; i < e->values.size(); ++i) d[i] = e->values[i];
}

void ModelCheckpoint::load_into(const std::string& name, std::vector<double>& v) const {
    const Entry* e = find(name);
    if (!e) throw IoError("checkpoint: missing tensor '" + name + "'");
    if (e->shape.size() != 1 || e->shape[0] != static_cast<int64_t>(v.size()))
        throw DimensionError("checkpoint: shape mismatch for tensor '" + name + "'");
    v.assign(e->values.begin(), e->values.end());
}

void save_checkpoint(const ModelCheckpoint& ckpt, const std::string& path) {
    std::vector<uint8_t> payload;
    put_u32(payload, ckpt.version);
    put_u64(payload, ckpt.seed);
    put_string(payload, ckpt.config_text);
    put_u32(payload, static_cast<uint32_t>(ckpt.metrics.size()));
    for (const auto& [name, value] : ckpt.metrics) {
        put_string(payload, name);
        put_f64(payload, value);
    }
    put_u32(payload, static_cast<uint32_t>(ckpt.tensors.size()));
    for (const auto& e : ckpt.tensors) {
        put_string(payload, e.name);
        put_u32(payload, static_cast<uint32_t>(e.shape.size()));
        int64_t numel = 1;
        for (int64_t d : e.shape) {
            put_u64(payload, static_cast<uint64_t>(d));
            numel *= d;
        }
        if (numel != static_cast<int64_t>(e.values.size()))
            throw DimensionError("checkpoint: entry '" + e.name + "' shape/value mismatch");
        for (float v : e.values) put_f32(payload, v);
    }

    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write checkpoint: " + path);
    out.write(kMagic, 4);
    out.write(reinterpret_cast<const char*>(payload.data()),
              static_cast<std::streamsize>(payload.size()));
    std::vector<uint8_t> tail;
    put_u32(tail, crc32(payload.data(), payload.size()));
    out.write(reinterpret_cast<const char*>(tail.data()), 4);
    if (!out) throw IoError("failed writing checkpoint: " + path);
}

ModelCheckpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open checkpoint: " + path);
    std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                               std::istreambuf_iterator<char>());
    if (bytes.size() < 8 || std::memcmp(bytes.data(), kMagic, 4) != 0)
        throw IoError("checkpoint: bad magic (not a CGT1 file)");

    std::vector<uint8_t> payload(bytes.begin() + 4, bytes.end() - 4);
    uint32_t stored = 0;
    for (int i = 0; i < 4; ++i)
        stored |= static_cast<uint32_t>(bytes[bytes.size() - 4 + i]) << (8 * i);
    if (crc32(payload.data(), payload.size()) != stored)
        throw IoError("checkpoint: integrity check failed (bad CRC)");

    Reader r{payload};
    ModelCheckpoint ckpt;
    ckpt.version = r.u32();
    if (ckpt.version != 1)
        throw IoError("checkpoint: unsupported version " + std::to_string(ckpt.version));
    ckpt.seed = r.u64();
    ckpt.config_text = r.str();
    const uint32_t nmetrics = r.u32();
    for (uint32_t i = 0; i < nmetrics; ++i) {
        std::string name = r.str();
        const double v = r.f64();
        ckpt.metrics.emplace_back(std::move(name), v);
    }
    const uint32_t ntensors = r.u32();
    for (uint32_t i = 0; i < ntensors; ++i) {
        ModelCheckpoint::Entry e;
        e.name = r.str();
        const uint32_t rank = r.u32();
        int64_t numel = 1;
        for (uint32_t d = 0; d < rank; ++d) {
            e.shape.push_back(static_cast<int64_t>(r.u64()));
            if (e.shape.back() < 0 || numel > (1LL << 40))
                throw IoError("checkpoint: implausible tensor shape");
            numel *= std::max<int64_t>(e.shape.back(), 0);
        }
        e.values.reserve(static_cast<size_t>(numel));
        for (int64_t v = 0; v < numel; ++v) e.values.push_back(r.f32());
        ckpt.tensors.push_back(std::move(e));
    }
    return ckpt;
}

}  // namespace cgtrace
