#pragma once

#include <Eigen/Dense>

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace sfcast {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Mask = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

// One original series in natural units. NaN values mark missing samples.
struct RawSeries {
    std::string id;
    std::vector<double> values;
    std::size_t start_offset = 0; // position of values[0] within its first period
};

// Placement of one original series inside the stacked matrix: its year
// columns are [first_column, first_column + years).
struct SeriesBlock {
    std::string id;
    std::size_t first_column = 0;
    std::size_t years = 0;
    std::size_t start_offset = 0;
    std::size_t length = 0; // raw sample count, padding excluded
};

class SeriesYearIndex {
public:
    struct Entry {
        std::string series_id;
        std::size_t year; // 1-based
        std::size_t column;
    };

    SeriesYearIndex() = default;
    // Blocks must tile columns 0..N-1 contiguously in order.
    explicit SeriesYearIndex(std::vector<SeriesBlock> blocks);

    const std::vector<SeriesBlock>& blocks() const { return blocks_; }
    std::vector<Entry> entries() const;
    std::size_t columns() const { return column_block_.size(); }

    const SeriesBlock* find(std::string_view id) const;
    const SeriesBlock& block(std::string_view id) const; // throws not-found
    const SeriesBlock& block_of_column(std::size_t column) const;
    std::size_t block_position_of_column(std::size_t column) const { return column_block_.at(column); }

private:
    std::vector<SeriesBlock> blocks_;
    std::unordered_map<std::string, std::size_t> by_id_;
    std::vector<std::size_t> column_block_;
};

// The T x N year-stacked matrix. Unobserved cells hold 0 and mask=false.
struct ProfileMatrix {
    Matrix data;
    Mask mask;
    std::size_t period = 0;
    SeriesYearIndex index;

    Eigen::Index rows() const { return data.rows(); }
    Eigen::Index cols() const { return data.cols(); }
    std::size_t observed_count() const { return static_cast<std::size_t>(mask.count()); }

    // Same matrix with a different observation mask (must be a subset check-free copy).
    ProfileMatrix with_mask(Mask new_mask) const;
};

struct StandardizationStats {
    double mean = 0.0;
    double std = 1.0;
};

ProfileMatrix reorganize(std::span<const RawSeries> series, std::size_t period);

// Inverse of reorganize for one series; unobserved in-extent samples come back as NaN.
std::vector<double> flatten(const ProfileMatrix& pm, std::string_view series_id);

// Zero mean, unit sample standard deviation over the finite values.
std::pair<RawSeries, StandardizationStats> standardize(const RawSeries& series);
double destandardize(double value, const StandardizationStats& stats);

// Re-lays out a daily-style series so that every period of length `period`
// starts on `target`. `calendar_start` is the date of values[0]. Inserted
// cells are NaN (unobserved); leading ones become start_offset.
RawSeries align_to_weekday(const RawSeries& series, std::chrono::weekday target,
                           std::chrono::year_month_day calendar_start, std::size_t period);

// Long-format text: header `series_id,t,value`. Series appear in first-seen
// order; gaps in t become NaN. `offsets` (from the optional sidecar) sets start_offset.
std::vector<RawSeries> read_long_format(std::istream& in,
                                        const std::unordered_map<std::string, std::size_t>& offsets = {});
std::unordered_map<std::string, std::size_t> read_offsets(std::istream& in);

// "SFPM" binary container.
std::string encode_profile_matrix(const ProfileMatrix& pm);
ProfileMatrix decode_profile_matrix(std::string bytes);
void save_profile_matrix(const ProfileMatrix& pm, const std::filesystem::path& path);
ProfileMatrix load_profile_matrix(const std::filesystem::path& path);

// Debug dump: `column,series_id,year,row,value,observed`.
void write_profile_text(const ProfileMatrix& pm, std::ostream& out);

} // namespace sfcast
