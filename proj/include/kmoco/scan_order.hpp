#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace kmoco {

// A scan order maps acquisition timings to k-space column (phase-encode)
// indices. Timings are exactly 0..len-1 and both sides are injective;
// fully-sampled kinds cover every column exactly once.
class ScanOrder {
public:
    enum class Kind { FS256, FS260, US260, Custom };

    struct Timing {
        int t;
        int column;
    };

    ScanOrder() = default;
    ScanOrder(Kind kind, int n_columns, std::vector<Timing> timings);

    Kind kind() const { return kind_; }
    int n_columns() const { return n_columns_; }
    int length() const { return static_cast<int>(timings_.size()); }
    const std::vector<Timing>& timings() const { return timings_; }

    // Acquisition time of the zero-frequency column, or -1 when that column
    // is never acquired (possible for Custom orders only).
    int t_center() const { return t_center_; }

    int column_at(int t) const { return timings_[t].column; }
    int center_column() const { return n_columns_ / 2; }

    // Columns actually acquired, as a per-column 0/1 vector of length n_columns.
    std::vector<unsigned char> sample_set() const;

    static std::string kind_name(Kind k);
    static Kind kind_from_name(const std::string& name);

private:
    void validate();

    Kind kind_ = Kind::Custom;
    int n_columns_ = 0;
    std::vector<Timing> timings_;
    int t_center_ = -1;
};

// Built-in deterministic constructions. Columns are ranked by distance from
// the zero-frequency column (ties toward the positive side); FS kinds acquire
// rank r at time t = r (strict center-out), US260 keeps ranks 0..63 plus 69
// outer columns at evenly spaced rank offsets, again acquired center-out.
ScanOrder build_scan_order(ScanOrder::Kind kind, int width);

// Width-generic analogs used for desk-scale experiments (Custom kind unless
// the parameters coincide with a built-in).
ScanOrder make_full_order(int width);
ScanOrder make_undersampled_order(int width, int dense_ranks, int outer_columns);

// Distance-from-center ranking shared by order construction and DP scoring:
// rank 0 is the zero-frequency column, ties broken toward the positive side.
std::vector<int> columns_by_center_rank(int width);
std::vector<int> center_rank_of_column(int width);

// Text format: `scanorder v1 kind=<...> width=<N>` header, then one
// `t,column` line per acquisition, ascending t.
ScanOrder load_scan_order(std::istream& in);
ScanOrder load_scan_order_file(const std::string& path);
void save_scan_order(const ScanOrder& order, std::ostream& out);
void save_scan_order_file(const ScanOrder& order, const std::string& path);

} // namespace kmoco
