#include "kmoco/net/cascade.hpp"

#include <cstring>
#include <fstream>
#include <stdexcept>

namespace kmoco::net {

namespace {

constexpr char kMagic[5] = {'M', 'K', 'W', 'T', '1'};

void write_u8(std::ostream& out, unsigned v) { out.put(static_cast<char>(v & 0xff)); }

void write_u16(std::ostream& out, unsigned v) {
    out.put(static_cast<char>(v & 0xff));
    out.put(static_cast<char>((v >> 8) & 0xff));
}

void write_u32(std::ostream& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.put(static_cast<char>((v >> (8 * i)) & 0xff));
}

void write_f32(std::ostream& out, float v) {
    std::uint32_t bits;
    std::memcpy(&bits, &v, 4);
    write_u32(out, bits);
}

unsigned read_u8(std::istream& in) {
    const int c = in.get();
    if (c < 0) throw std::runtime_error("weights: truncated file");
    return static_cast<unsigned>(c);
}

unsigned read_u16(std::istream& in) {
    const unsigned lo = read_u8(in);
    return lo | (read_u8(in) << 8);
}

std::uint32_t read_u32(std::istream& in) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(read_u8(in)) << (8 * i);
    return v;
}

float read_f32(std::istream& in) {
    const std::uint32_t bits = read_u32(in);
    float v;
    std::memcpy(&v, &bits, 4);
    return v;
}

} // namespace

void save_weights(const Weights& w, std::ostream& out) {
    out.write(kMagic, 5);
    write_u32(out, 1); // version
    write_u32(out, static_cast<std::uint32_t>(w.config.n_units));
    write_u32(out, static_cast<std::uint32_t>(w.config.resnet_filters));
    write_u32(out, static_cast<std::uint32_t>(w.config.resnet_layers));
    write_u32(out, static_cast<std::uint32_t>(w.config.unet_levels));
    write_u32(out, static_cast<std::uint32_t>(w.config.unet_base_filters));
    write_u32(out, static_cast<std::uint32_t>(w.config.unet_max_filters));
    write_u32(out, static_cast<std::uint32_t>(w.config.kernel_size));
    write_f32(out, static_cast<float>(w.config.leaky_slope));
    write_u8(out, w.variant == Variant::TwoBranch ? 0 : 1);
    write_u32(out, static_cast<std::uint32_t>(w.entries.size()));
    for (const Weights::Entry& e : w.entries) {
        write_u16(out, static_cast<unsigned>(e.name.size()));
        out.write(e.name.data(), static_cast<std::streamsize>(e.name.size()));
        write_u8(out, static_cast<unsigned>(e.shape.size()));
        for (int d : e.shape) write_u32(out, static_cast<std::uint32_t>(d));
        for (double v : e.data) write_f32(out, static_cast<float>(v));
    }
}

void save_weights_file(const Weights& w, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("weights: cannot write " + path);
    save_weights(w, f);
    if (!f) throw std::runtime_error("weights: write failed for " + path);
}

Weights load_weights(std::istream& in) {
    char magic[5];
    in.read(magic, 5);
    if (in.gcount() != 5 || std::memcmp(magic, kMagic, 5) != 0)
        throw std::runtime_error("weights: bad magic (expected MKWT1)");
    const std::uint32_t version = read_u32(in);
    if (version != 1)
        throw std::runtime_error("weights: unsupported version " + std::to_string(version));

    NetworkConfig cfg;
    cfg.n_units = static_cast<int>(read_u32(in));
    cfg.resnet_filters = static_cast<int>(read_u32(in));
    cfg.resnet_layers = static_cast<int>(read_u32(in));
    cfg.unet_levels = static_cast<int>(read_u32(in));
    cfg.unet_base_filters = static_cast<int>(read_u32(in));
    cfg.unet_max_filters = static_cast<int>(read_u32(in));
    cfg.kernel_size = static_cast<int>(read_u32(in));
    cfg.leaky_slope = read_f32(in);
    const unsigned variant_byte = read_u8(in);
    if (variant_byte > 1) throw std::runtime_error("weights: bad variant byte");

    Weights w = init_weights_zero(cfg, variant_byte == 0 ? Variant::TwoBranch
                                                         : Variant::SingleBranch);
    const std::uint32_t n_tensors = read_u32(in);
    if (n_tensors != w.entries.size())
        throw std::runtime_error("weights: tensor count does not match the config echo");
    for (std::uint32_t i = 0; i < n_tensors; ++i) {
        const unsigned name_len = read_u16(in);
        std::string name(name_len, '\0');
        in.read(name.data(), name_len);
        if (in.gcount() != static_cast<std::streamsize>(name_len))
            throw std::runtime_error("weights: truncated tensor name");
        Weights::Entry& e = w.entries[i];
        if (e.name != name)
            throw std::runtime_error("weights: unexpected tensor '" + name + "'");
        const unsigned ndim = read_u8(in);
        if (ndim != e.shape.size()) throw std::runtime_error("weights: rank mismatch for " + name);
        for (unsigned d = 0; d < ndim; ++d) {
            if (read_u32(in) != static_cast<std::uint32_t>(e.shape[d]))
                throw std::runtime_error("weights: shape mismatch for " + name);
        }
        for (double& v : e.data) v = read_f32(in);
    }
    return w;
}

Weights load_weights_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("weights: cannot open " + path);
    return load_weights(f);
}

} // namespace kmoco::net
