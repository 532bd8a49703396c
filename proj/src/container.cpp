#include "kmoco/dataset.hpp"

#include <zlib.h>

#include <cstring>
#include <fstream>
#include <stdexcept>

namespace kmoco {

namespace {

constexpr char kDatasetMagic[5] = {'M', 'K', 'S', 'P', '1'};
constexpr char kImageMagic[5] = {'M', 'K', 'I', 'M', '1'};

// Stream writer that tracks a CRC32 over everything written since reset.
class CrcWriter {
public:
    explicit CrcWriter(std::ostream& out) : out_(out) {}

    void reset_crc() { crc_ = crc32(0L, Z_NULL, 0); }
    std::uint32_t crc() const { return static_cast<std::uint32_t>(crc_); }

    void bytes(const void* p, std::size_t n) {
        out_.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
        crc_ = crc32(crc_, static_cast<const Bytef*>(p), static_cast<uInt>(n));
    }
    void u8(unsigned v) {
        const unsigned char b = static_cast<unsigned char>(v);
        bytes(&b, 1);
    }
    void u32(std::uint32_t v) {
        unsigned char b[4];
        for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
        bytes(b, 4);
    }
    void u64(std::uint64_t v) {
        unsigned char b[8];
        for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
        bytes(b, 8);
    }
    void f32(float v) {
        std::uint32_t bits;
        std::memcpy(&bits, &v, 4);
        u32(bits);
    }
    void f64(double v) {
        std::uint64_t bits;
        std::memcpy(&bits, &v, 8);
        u64(bits);
    }
    // raw u32 outside the checksummed region (the checksum itself)
    void crc_field(std::uint32_t v) {
        unsigned char b[4];
        for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
        out_.write(reinterpret_cast<const char*>(b), 4);
    }

    bool good() const { return static_cast<bool>(out_); }

private:
    std::ostream& out_;
    uLong crc_ = crc32(0L, Z_NULL, 0);
};

class CrcReader {
public:
    explicit CrcReader(std::istream& in) : in_(in) {}

    void reset_crc() { crc_ = crc32(0L, Z_NULL, 0); }

    void bytes(void* p, std::size_t n) {
        in_.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
        if (in_.gcount() != static_cast<std::streamsize>(n))
            throw std::runtime_error("dataset: truncated file");
        crc_ = crc32(crc_, static_cast<const Bytef*>(p), static_cast<uInt>(n));
    }
    unsigned u8() {
        unsigned char b;
        bytes(&b, 1);
        return b;
    }
    std::uint32_t u32() {
        unsigned char b[4];
        bytes(b, 4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
        return v;
    }
    std::uint64_t u64() {
        unsigned char b[8];
        bytes(b, 8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
        return v;
    }
    float f32() {
        const std::uint32_t bits = u32();
        float v;
        std::memcpy(&v, &bits, 4);
        return v;
    }
    double f64() {
        const std::uint64_t bits = u64();
        double v;
        std::memcpy(&v, &bits, 8);
        return v;
    }
    void check_crc(const char* what) {
        const uLong expect = crc_;
        unsigned char b[4];
        in_.read(reinterpret_cast<char*>(b), 4);
        if (in_.gcount() != 4) throw std::runtime_error("dataset: truncated file");
        std::uint32_t stored = 0;
        for (int i = 0; i < 4; ++i) stored |= static_cast<std::uint32_t>(b[i]) << (8 * i);
        if (stored != static_cast<std::uint32_t>(expect))
            throw std::runtime_error(std::string("dataset: CRC mismatch in ") + what);
    }

private:
    std::istream& in_;
    uLong crc_ = crc32(0L, Z_NULL, 0);
};

void write_plane(CrcWriter& w, const ComplexImage& img) {
    for (const cplx& v : img.data()) {
        w.f32(static_cast<float>(v.real()));
        w.f32(static_cast<float>(v.imag()));
    }
}

ComplexImage read_plane(CrcReader& r, int h, int width) {
    ComplexImage img(h, width);
    for (cplx& v : img.data()) {
        const float re = r.f32();
        const float im = r.f32();
        v = cplx(re, im);
    }
    return img;
}

} // namespace

void save_dataset(const Dataset& ds, std::ostream& out) {
    CrcWriter w(out);
    out.write(kDatasetMagic, 5);
    w.reset_crc();
    // version participates in the header checksum
    w.u32(1);
    w.u8(static_cast<unsigned>(ds.order.kind()));
    w.u32(static_cast<std::uint32_t>(ds.order.n_columns()));
    w.u32(static_cast<std::uint32_t>(ds.order.length()));
    for (const ScanOrder::Timing& e : ds.order.timings())
        w.u32(static_cast<std::uint32_t>(e.column));
    w.u32(static_cast<std::uint32_t>(ds.height));
    w.u32(static_cast<std::uint32_t>(ds.maps.n_coils()));
    for (const ComplexImage& m : ds.maps.maps) write_plane(w, m);
    w.u32(static_cast<std::uint32_t>(ds.samples.size()));
    w.crc_field(w.crc());

    for (const TrainSample& s : ds.samples) {
        w.reset_crc();
        w.u64(s.seed);
        w.u8(static_cast<unsigned>(s.trace.timings.size()));
        for (std::size_t i = 0; i < s.trace.timings.size(); ++i) {
            w.u32(static_cast<std::uint32_t>(s.trace.timings[i]));
            w.f64(s.trace.transforms[i].angle);
            w.f64(s.trace.transforms[i].shift_x);
            w.f64(s.trace.transforms[i].shift_y);
        }
        w.bytes(s.mask.bits.data(), s.mask.bits.size());
        for (const ComplexImage& plane : s.k_cor.planes) write_plane(w, plane);
        write_plane(w, s.y_dp);
        w.crc_field(w.crc());
    }
    if (!w.good()) throw std::runtime_error("dataset: write failed");
}

void save_dataset_file(const Dataset& ds, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("dataset: cannot write " + path);
    save_dataset(ds, f);
}

Dataset load_dataset(std::istream& in) {
    char magic[5];
    in.read(magic, 5);
    if (in.gcount() != 5 || std::memcmp(magic, kDatasetMagic, 5) != 0)
        throw std::runtime_error("dataset: bad magic (expected MKSP1)");

    CrcReader r(in);
    r.reset_crc();
    const std::uint32_t version = r.u32();
    if (version != 1)
        throw std::runtime_error("dataset: unsupported version " + std::to_string(version));

    const unsigned kind_byte = r.u8();
    if (kind_byte > 3) throw std::runtime_error("dataset: bad scan-order kind");
    const int width = static_cast<int>(r.u32());
    const int order_len = static_cast<int>(r.u32());
    if (width <= 0 || order_len <= 0 || order_len > width)
        throw std::runtime_error("dataset: invalid order dimensions");
    std::vector<ScanOrder::Timing> timings(order_len);
    for (int t = 0; t < order_len; ++t) timings[t] = {t, static_cast<int>(r.u32())};

    Dataset ds;
    ds.order = ScanOrder(static_cast<ScanOrder::Kind>(kind_byte), width, std::move(timings));
    ds.height = static_cast<int>(r.u32());
    const int n_coils = static_cast<int>(r.u32());
    if (ds.height <= 0 || n_coils <= 0) throw std::runtime_error("dataset: invalid dimensions");
    for (int i = 0; i < n_coils; ++i) ds.maps.maps.push_back(read_plane(r, ds.height, width));
    const std::uint32_t n_samples = r.u32();
    r.check_crc("header");

    ds.samples.reserve(n_samples);
    for (std::uint32_t si = 0; si < n_samples; ++si) {
        r.reset_crc();
        TrainSample s;
        s.seed = r.u64();
        const unsigned n_motions = r.u8();
        if (n_motions < 1 || n_motions > 3)
            throw std::runtime_error("dataset: sample must carry 1..3 motions");
        for (unsigned i = 0; i < n_motions; ++i) {
            const int t = static_cast<int>(r.u32());
            RigidTransform tr;
            tr.angle = r.f64();
            tr.shift_x = r.f64();
            tr.shift_y = r.f64();
            s.trace.timings.push_back(t);
            s.trace.transforms.push_back(tr);
        }
        s.mask.bits.resize(width);
        r.bytes(s.mask.bits.data(), s.mask.bits.size());
        for (unsigned char b : s.mask.bits) {
            if (b > 1) throw std::runtime_error("dataset: mask bits must be 0/1");
        }
        s.k_cor.order = ds.order;
        for (int i = 0; i < n_coils; ++i)
            s.k_cor.planes.push_back(read_plane(r, ds.height, width));
        s.y_dp = read_plane(r, ds.height, width);
        r.check_crc("sample record");
        ds.samples.push_back(std::move(s));
    }
    return ds;
}

Dataset load_dataset_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("dataset: cannot open " + path);
    return load_dataset(f);
}

void save_image_file(const ComplexImage& img, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("image: cannot write " + path);
    CrcWriter w(f);
    f.write(kImageMagic, 5);
    w.reset_crc();
    w.u32(1);
    w.u32(static_cast<std::uint32_t>(img.height()));
    w.u32(static_cast<std::uint32_t>(img.width()));
    write_plane(w, img);
    w.crc_field(w.crc());
    if (!w.good()) throw std::runtime_error("image: write failed for " + path);
}

ComplexImage load_image_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("image: cannot open " + path);
    char magic[5];
    f.read(magic, 5);
    if (f.gcount() != 5 || std::memcmp(magic, kImageMagic, 5) != 0)
        throw std::runtime_error("image: bad magic (expected MKIM1)");
    CrcReader r(f);
    r.reset_crc();
    const std::uint32_t version = r.u32();
    if (version != 1) throw std::runtime_error("image: unsupported version");
    const int h = static_cast<int>(r.u32());
    const int w = static_cast<int>(r.u32());
    if (h <= 0 || w <= 0) throw std::runtime_error("image: invalid dimensions");
    ComplexImage img = read_plane(r, h, w);
    r.check_crc("image");
    return img;
}

} // namespace kmoco
