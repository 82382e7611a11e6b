#include "hoidist/numcore/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include <json.hpp>

namespace numcore {

namespace {

using nlohmann::json;

void put_u64_le(std::ostream& os, uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i)
        b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
    os.write(reinterpret_cast<const char*>(b), 8);
}

uint64_t get_u64_le(std::istream& is) {
    unsigned char b[8];
    is.read(reinterpret_cast<char*>(b), 8);
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i)
        v |= static_cast<uint64_t>(b[i]) << (8 * i);
    return v;
}

void put_f64_le(std::ostream& os, double d) {
    put_u64_le(os, std::bit_cast<uint64_t>(d));
}

double get_f64_le(std::istream& is) {
    return std::bit_cast<double>(get_u64_le(is));
}

}  // namespace

void save_checkpoint(const ParamStore& store, const std::string& path) {
    json tensors = json::array();
    uint64_t off = 0;
    for (const auto& [name, t] : store.entries()) {
        json e;
        e["name"] = name;
        e["shape"] = t.shape();
        e["dtype"] = "f64";
        e["byte_offset"] = off;
        tensors.push_back(e);
        off += static_cast<uint64_t>(t.numel()) * 8;
    }
    json header;
    header["seed"] = store.rng_seed();
    header["tensors"] = tensors;
    const std::string hs = header.dump();

    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f)
        throw hoidist::ConfigError("cannot open checkpoint for writing: " + path);
    put_u64_le(f, hs.size());
    f.write(hs.data(), static_cast<std::streamsize>(hs.size()));
    for (const auto& [name, t] : store.entries())
        for (double v : t.data())
            put_f64_le(f, v);
    if (!f)
        throw hoidist::ConfigError("checkpoint write failed: " + path);
}

void load_checkpoint(ParamStore& store, const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f)
        throw hoidist::ConfigError("cannot open checkpoint: " + path);
    f.seekg(0, std::ios::end);
    const uint64_t file_size = static_cast<uint64_t>(f.tellg());
    f.seekg(0);
    if (file_size < 8)
        throw hoidist::ConfigError("checkpoint truncated: " + path);
    const uint64_t hlen = get_u64_le(f);
    if (8 + hlen > file_size)
        throw hoidist::ConfigError("checkpoint header overruns file: " + path);
    std::string hs(hlen, '\0');
    f.read(hs.data(), static_cast<std::streamsize>(hlen));
    json header = json::parse(hs);

    store.set_rng_seed(header.at("seed").get<uint64_t>());
    const uint64_t blob_base = 8 + hlen;
    uint64_t expected_off = 0;
    for (const auto& e : header.at("tensors")) {
        const std::string name = e.at("name").get<std::string>();
        const Shape shape = e.at("shape").get<Shape>();
        if (e.at("dtype").get<std::string>() != "f64")
            throw hoidist::ConfigError("unsupported dtype in checkpoint entry " + name);
        const uint64_t off = e.at("byte_offset").get<uint64_t>();
        if (off != expected_off)
            throw hoidist::ConfigError("checkpoint offset mismatch at " + name);
        Tensor t = store.get(name);
        if (t.shape() != shape)
            throw hoidist::ConfigError("checkpoint shape mismatch for " + name + ": file " +
                                       shape_str(shape) + " vs store " + shape_str(t.shape()));
        const uint64_t nbytes = static_cast<uint64_t>(t.numel()) * 8;
        if (blob_base + off + nbytes > file_size)
            throw hoidist::ConfigError("checkpoint blob overruns file at " + name);
        f.seekg(static_cast<std::streamoff>(blob_base + off));
        for (auto& v : t.raw()->value)
            v = get_f64_le(f);
        expected_off = off + nbytes;
    }
    if (blob_base + expected_off != file_size)
        throw hoidist::ConfigError("checkpoint trailing bytes or missing data: " + path);
}

}  // namespace numcore
