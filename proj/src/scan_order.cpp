#include "kmoco/scan_order.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace kmoco {

namespace {

int expected_width(ScanOrder::Kind kind) {
    switch (kind) {
        case ScanOrder::Kind::FS256: return 256;
        case ScanOrder::Kind::FS260: return 260;
        case ScanOrder::Kind::US260: return 260;
        case ScanOrder::Kind::Custom: return -1;
    }
    return -1;
}

} // namespace

ScanOrder::ScanOrder(Kind kind, int n_columns, std::vector<Timing> timings)
    : kind_(kind), n_columns_(n_columns), timings_(std::move(timings)) {
    validate();
}

void ScanOrder::validate() {
    if (n_columns_ <= 0) throw std::invalid_argument("ScanOrder: width must be positive");
    if (timings_.empty()) throw std::invalid_argument("ScanOrder: empty timing list");

    std::vector<unsigned char> seen_col(n_columns_, 0);
    std::vector<unsigned char> seen_t(timings_.size(), 0);
    for (const Timing& e : timings_) {
        if (e.t < 0 || e.t >= static_cast<int>(timings_.size()))
            throw std::invalid_argument("ScanOrder: timings must be exactly 0..len-1");
        if (seen_t[e.t]) throw std::invalid_argument("ScanOrder: duplicate timing " + std::to_string(e.t));
        seen_t[e.t] = 1;
        if (e.column < 0 || e.column >= n_columns_)
            throw std::invalid_argument("ScanOrder: column out of range");
        if (seen_col[e.column])
            throw std::invalid_argument("ScanOrder: column " + std::to_string(e.column) + " listed twice");
        seen_col[e.column] = 1;
    }
    std::sort(timings_.begin(), timings_.end(),
              [](const Timing& a, const Timing& b) { return a.t < b.t; });

    const bool fs = kind_ == Kind::FS256 || kind_ == Kind::FS260;
    if (fs && length() != n_columns_)
        throw std::invalid_argument("ScanOrder: fully-sampled kind must cover every column");
    if (kind_ == Kind::US260 && length() != 133)
        throw std::invalid_argument("ScanOrder: US260 must acquire exactly 133 columns");

    t_center_ = -1;
    for (const Timing& e : timings_) {
        if (e.column == center_column()) {
            t_center_ = e.t;
            break;
        }
    }
    if (fs && t_center_ < 0)
        throw std::invalid_argument("ScanOrder: missing zero-frequency column in FS kind");
}

std::vector<unsigned char> ScanOrder::sample_set() const {
    std::vector<unsigned char> s(n_columns_, 0);
    for (const Timing& e : timings_) s[e.column] = 1;
    return s;
}

std::string ScanOrder::kind_name(Kind k) {
    switch (k) {
        case Kind::FS256: return "FS256";
        case Kind::FS260: return "FS260";
        case Kind::US260: return "US260";
        case Kind::Custom: return "Custom";
    }
    return "Custom";
}

ScanOrder::Kind ScanOrder::kind_from_name(const std::string& name) {
    if (name == "FS256") return Kind::FS256;
    if (name == "FS260") return Kind::FS260;
    if (name == "US260") return Kind::US260;
    if (name == "Custom") return Kind::Custom;
    throw std::invalid_argument("ScanOrder: unknown kind '" + name + "'");
}

std::vector<int> columns_by_center_rank(int width) {
    if (width <= 0) throw std::invalid_argument("columns_by_center_rank: width must be positive");
    const int center = width / 2;
    std::vector<int> cols;
    cols.reserve(width);
    cols.push_back(center);
    for (int d = 1; static_cast<int>(cols.size()) < width; ++d) {
        if (center + d < width) cols.push_back(center + d);
        if (center - d >= 0) cols.push_back(center - d);
    }
    return cols;
}

std::vector<int> center_rank_of_column(int width) {
    const std::vector<int> cols = columns_by_center_rank(width);
    std::vector<int> rank(width, -1);
    for (int r = 0; r < width; ++r) rank[cols[r]] = r;
    return rank;
}

ScanOrder make_full_order(int width) {
    const std::vector<int> cols = columns_by_center_rank(width);
    std::vector<ScanOrder::Timing> timings(width);
    for (int t = 0; t < width; ++t) timings[t] = {t, cols[t]};
    ScanOrder::Kind kind = ScanOrder::Kind::Custom;
    if (width == 256) kind = ScanOrder::Kind::FS256;
    if (width == 260) kind = ScanOrder::Kind::FS260;
    return ScanOrder(kind, width, std::move(timings));
}

ScanOrder make_undersampled_order(int width, int dense_ranks, int outer_columns) {
    if (dense_ranks <= 0 || outer_columns <= 0 || dense_ranks + outer_columns > width)
        throw std::invalid_argument("make_undersampled_order: infeasible column counts");
    const std::vector<int> cols = columns_by_center_rank(width);
    const int outer_span = width - dense_ranks;
    std::vector<int> ranks;
    ranks.reserve(dense_ranks + outer_columns);
    for (int r = 0; r < dense_ranks; ++r) ranks.push_back(r);
    for (int j = 0; j < outer_columns; ++j) {
        const int offset = static_cast<int>(std::llround(
            static_cast<double>(j) * outer_span / outer_columns));
        const int rank = dense_ranks + offset;
        if (rank >= width) throw std::invalid_argument("make_undersampled_order: rank overflow");
        ranks.push_back(rank);
    }
    std::vector<ScanOrder::Timing> timings(ranks.size());
    for (std::size_t t = 0; t < ranks.size(); ++t)
        timings[t] = {static_cast<int>(t), cols[ranks[t]]};
    ScanOrder::Kind kind = ScanOrder::Kind::Custom;
    if (width == 260 && dense_ranks == 64 && outer_columns == 69) kind = ScanOrder::Kind::US260;
    return ScanOrder(kind, width, std::move(timings));
}

ScanOrder build_scan_order(ScanOrder::Kind kind, int width) {
    const int need = expected_width(kind);
    if (need > 0 && width != need)
        throw std::invalid_argument("build_scan_order: kind " + ScanOrder::kind_name(kind) +
                                    " requires width " + std::to_string(need));
    switch (kind) {
        case ScanOrder::Kind::FS256:
        case ScanOrder::Kind::FS260: return make_full_order(width);
        case ScanOrder::Kind::US260: return make_undersampled_order(260, 64, 69);
        case ScanOrder::Kind::Custom:
            throw std::invalid_argument("build_scan_order: Custom orders come from files");
    }
    throw std::invalid_argument("build_scan_order: unsupported kind");
}

ScanOrder load_scan_order(std::istream& in) {
    std::string header;
    if (!std::getline(in, header)) throw std::invalid_argument("scan order: empty file");
    std::istringstream hs(header);
    std::string magic, version, kind_kv, width_kv;
    hs >> magic >> version >> kind_kv >> width_kv;
    if (magic != "scanorder" || version != "v1")
        throw std::invalid_argument("scan order: bad header '" + header + "'");
    if (kind_kv.rfind("kind=", 0) != 0 || width_kv.rfind("width=", 0) != 0)
        throw std::invalid_argument("scan order: header must carry kind= and width=");
    const ScanOrder::Kind kind = ScanOrder::kind_from_name(kind_kv.substr(5));
    const int width = std::stoi(width_kv.substr(6));

    std::vector<ScanOrder::Timing> timings;
    std::string line;
    int prev_t = -1;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        int t = 0, col = 0;
        char comma = 0;
        if (!(ls >> t >> comma >> col) || comma != ',')
            throw std::invalid_argument("scan order: bad line '" + line + "'");
        if (t <= prev_t) throw std::invalid_argument("scan order: timings must ascend");
        prev_t = t;
        timings.push_back({t, col});
    }
    return ScanOrder(kind, width, std::move(timings));
}

ScanOrder load_scan_order_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("scan order: cannot open " + path);
    return load_scan_order(f);
}

void save_scan_order(const ScanOrder& order, std::ostream& out) {
    out << "scanorder v1 kind=" << ScanOrder::kind_name(order.kind())
        << " width=" << order.n_columns() << "\n";
    for (const ScanOrder::Timing& e : order.timings()) out << e.t << "," << e.column << "\n";
}

void save_scan_order_file(const ScanOrder& order, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("scan order: cannot write " + path);
    save_scan_order(order, f);
}

} // namespace kmoco
