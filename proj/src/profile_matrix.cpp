#include "sfcast/profile_matrix.hpp"

#include "sfcast/binary_io.hpp"
#include "sfcast/error.hpp"

#include <cmath>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>

namespace sfcast {

namespace {

constexpr std::uint32_t kProfileVersion = 1;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, ',')) {
        while (!field.empty() && (field.back() == '\r' || field.back() == ' ')) field.pop_back();
        while (!field.empty() && field.front() == ' ') field.erase(field.begin());
        fields.push_back(field);
    }
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    return fields;
}

} // namespace

SeriesYearIndex::SeriesYearIndex(std::vector<SeriesBlock> blocks) : blocks_(std::move(blocks)) {
    std::size_t next = 0;
    for (std::size_t b = 0; b < blocks_.size(); ++b) {
        const auto& blk = blocks_[b];
        if (blk.first_column != next || blk.years == 0)
            throw Error(ErrorCode::invalid_argument, "series blocks must tile columns contiguously");
        if (!by_id_.emplace(blk.id, b).second)
            throw Error(ErrorCode::invalid_argument, "duplicate series id '" + blk.id + "'");
        column_block_.insert(column_block_.end(), blk.years, b);
        next += blk.years;
    }
}

std::vector<SeriesYearIndex::Entry> SeriesYearIndex::entries() const {
    std::vector<Entry> out;
    out.reserve(columns());
    for (const auto& blk : blocks_)
        for (std::size_t u = 0; u < blk.years; ++u) out.push_back({blk.id, u + 1, blk.first_column + u});
    return out;
}

const SeriesBlock* SeriesYearIndex::find(std::string_view id) const {
    auto it = by_id_.find(std::string(id));
    return it == by_id_.end() ? nullptr : &blocks_[it->second];
}

const SeriesBlock& SeriesYearIndex::block(std::string_view id) const {
    if (const auto* blk = find(id)) return *blk;
    throw Error(ErrorCode::not_found, "unknown series '" + std::string(id) + "'");
}

const SeriesBlock& SeriesYearIndex::block_of_column(std::size_t column) const {
    if (column >= column_block_.size()) throw Error(ErrorCode::shape_error, "column out of range");
    return blocks_[column_block_[column]];
}

ProfileMatrix ProfileMatrix::with_mask(Mask new_mask) const {
    if (new_mask.rows() != mask.rows() || new_mask.cols() != mask.cols())
        throw Error(ErrorCode::shape_error, "mask shape mismatch");
    ProfileMatrix out = *this;
    out.mask = std::move(new_mask);
    return out;
}

ProfileMatrix reorganize(std::span<const RawSeries> series, std::size_t period) {
    if (period < 2) throw Error(ErrorCode::invalid_period, "period must be at least 2");
    if (series.empty()) throw Error(ErrorCode::empty_input, "no series given");

    std::vector<SeriesBlock> blocks;
    blocks.reserve(series.size());
    std::size_t n_cols = 0;
    for (const auto& s : series) {
        if (s.values.empty()) throw Error(ErrorCode::empty_input, "series '" + s.id + "' is empty");
        if (s.start_offset >= period)
            throw Error(ErrorCode::invalid_argument, "series '" + s.id + "' start_offset >= period");
        std::size_t extent = s.start_offset + s.values.size();
        std::size_t years = (extent + period - 1) / period;
        blocks.push_back({s.id, n_cols, years, s.start_offset, s.values.size()});
        n_cols += years;
    }

    ProfileMatrix pm;
    pm.period = period;
    pm.data = Matrix::Zero(static_cast<Eigen::Index>(period), static_cast<Eigen::Index>(n_cols));
    pm.mask = Mask::Constant(pm.data.rows(), pm.data.cols(), false);
    for (std::size_t b = 0; b < series.size(); ++b) {
        const auto& s = series[b];
        for (std::size_t t = 0; t < s.values.size(); ++t) {
            double v = s.values[t];
            if (!std::isfinite(v)) continue;
            std::size_t pos = s.start_offset + t;
            auto row = static_cast<Eigen::Index>(pos % period);
            auto col = static_cast<Eigen::Index>(blocks[b].first_column + pos / period);
            pm.data(row, col) = v;
            pm.mask(row, col) = true;
        }
    }
    pm.index = SeriesYearIndex(std::move(blocks));
    return pm;
}

std::vector<double> flatten(const ProfileMatrix& pm, std::string_view series_id) {
    const auto& blk = pm.index.block(series_id);
    std::vector<double> out;
    out.reserve(blk.length);
    for (std::size_t t = 0; t < blk.length; ++t) {
        std::size_t pos = blk.start_offset + t;
        auto row = static_cast<Eigen::Index>(pos % pm.period);
        auto col = static_cast<Eigen::Index>(blk.first_column + pos / pm.period);
        out.push_back(pm.mask(row, col) ? pm.data(row, col) : kNaN);
    }
    return out;
}

std::pair<RawSeries, StandardizationStats> standardize(const RawSeries& series) {
    double sum = 0.0;
    std::size_t n = 0;
    for (double v : series.values)
        if (std::isfinite(v)) {
            sum += v;
            ++n;
        }
    if (n < 2) throw Error(ErrorCode::degenerate_series, "series '" + series.id + "' has fewer than 2 values");
    double mean = sum / static_cast<double>(n);
    double ss = 0.0;
    for (double v : series.values)
        if (std::isfinite(v)) ss += (v - mean) * (v - mean);
    double sd = std::sqrt(ss / static_cast<double>(n - 1));
    if (!(sd > 0.0)) throw Error(ErrorCode::degenerate_series, "series '" + series.id + "' has zero variance");

    RawSeries out = series;
    for (double& v : out.values)
        if (std::isfinite(v)) v = (v - mean) / sd;
    return {std::move(out), StandardizationStats{mean, sd}};
}

double destandardize(double value, const StandardizationStats& stats) { return value * stats.std + stats.mean; }

RawSeries align_to_weekday(const RawSeries& series, std::chrono::weekday target,
                           std::chrono::year_month_day calendar_start, std::size_t period) {
    if (!calendar_start.ok()) throw Error(ErrorCode::invalid_argument, "invalid calendar date");
    if (period < 7) throw Error(ErrorCode::invalid_period, "weekday alignment needs period >= 7");

    std::chrono::weekday first{std::chrono::sys_days{calendar_start}};
    auto lead = static_cast<std::size_t>((first - target).count());
    // Slots at or beyond `usable` in each period are padding, so the next
    // period again opens on the target weekday.
    std::size_t usable = period / 7 * 7;

    RawSeries out;
    out.id = series.id;
    out.start_offset = lead;
    out.values.reserve(series.values.size() + series.values.size() / usable + 1);
    std::size_t pos = lead;
    for (double v : series.values) {
        while (pos % period >= usable) {
            out.values.push_back(kNaN);
            ++pos;
        }
        out.values.push_back(v);
        ++pos;
    }
    return out;
}

std::unordered_map<std::string, std::size_t> read_offsets(std::istream& in) {
    std::unordered_map<std::string, std::size_t> out;
    std::string line;
    if (!std::getline(in, line)) return out;
    auto header = split_csv_line(line);
    if (header.size() != 2 || header[0] != "series_id" || header[1] != "start_offset")
        throw Error(ErrorCode::format_error, "offset sidecar header must be series_id,start_offset");
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") continue;
        auto f = split_csv_line(line);
        if (f.size() != 2) throw Error(ErrorCode::format_error, "bad sidecar line: " + line);
        try {
            out[f[0]] = std::stoull(f[1]);
        } catch (const std::exception&) {
            throw Error(ErrorCode::format_error, "bad start_offset: " + line);
        }
    }
    return out;
}

std::vector<RawSeries> read_long_format(std::istream& in,
                                        const std::unordered_map<std::string, std::size_t>& offsets) {
    std::string line;
    if (!std::getline(in, line)) throw Error(ErrorCode::empty_input, "series file is empty");
    auto header = split_csv_line(line);
    if (header.size() != 3 || header[0] != "series_id" || header[1] != "t" || header[2] != "value")
        throw Error(ErrorCode::format_error, "series header must be series_id,t,value");

    std::vector<std::string> order;
    std::unordered_map<std::string, std::map<std::size_t, double>> samples;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        auto f = split_csv_line(line);
        if (f.size() != 3) throw Error(ErrorCode::format_error, "line " + std::to_string(line_no) + ": expected 3 fields");
        std::size_t t;
        double v;
        try {
            t = std::stoull(f[1]);
            v = f[2].empty() ? kNaN : std::stod(f[2]);
        } catch (const std::exception&) {
            throw Error(ErrorCode::format_error, "line " + std::to_string(line_no) + ": bad number");
        }
        auto [it, inserted] = samples.try_emplace(f[0]);
        if (inserted) order.push_back(f[0]);
        if (!it->second.emplace(t, v).second)
            throw Error(ErrorCode::format_error, "line " + std::to_string(line_no) + ": duplicate (series_id, t)");
    }
    if (order.empty()) throw Error(ErrorCode::empty_input, "series file has no rows");

    std::vector<RawSeries> out;
    out.reserve(order.size());
    for (const auto& id : order) {
        const auto& m = samples.at(id);
        std::size_t t0 = m.begin()->first;
        std::size_t t1 = m.rbegin()->first;
        RawSeries s;
        s.id = id;
        s.values.assign(t1 - t0 + 1, kNaN);
        for (const auto& [t, v] : m) s.values[t - t0] = v;
        if (auto it = offsets.find(id); it != offsets.end()) s.start_offset = it->second;
        out.push_back(std::move(s));
    }
    return out;
}

std::string encode_profile_matrix(const ProfileMatrix& pm) {
    io::ByteWriter w;
    w.magic("SFPM");
    w.u32(kProfileVersion);
    w.u64(static_cast<std::uint64_t>(pm.rows()));
    w.u64(static_cast<std::uint64_t>(pm.cols()));
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> row_major = pm.data;
    w.f64s(std::span<const double>(row_major.data(), static_cast<std::size_t>(row_major.size())));
    std::vector<std::uint8_t> bits((static_cast<std::size_t>(pm.mask.size()) + 7) / 8, 0);
    std::size_t k = 0;
    for (Eigen::Index r = 0; r < pm.mask.rows(); ++r)
        for (Eigen::Index c = 0; c < pm.mask.cols(); ++c, ++k)
            if (pm.mask(r, c)) bits[k / 8] |= static_cast<std::uint8_t>(1u << (k % 8));
    w.raw(bits);
    const auto& blocks = pm.index.blocks();
    w.u64(blocks.size());
    for (const auto& b : blocks) {
        w.str(b.id);
        w.u64(b.start_offset);
        w.u64(b.length);
        w.u64(b.years);
    }
    return w.bytes();
}

ProfileMatrix decode_profile_matrix(std::string bytes) {
    io::ByteReader r(std::move(bytes));
    r.expect_magic("SFPM");
    if (auto v = r.u32(); v != kProfileVersion)
        throw Error(ErrorCode::format_error, "unsupported SFPM version " + std::to_string(v));
    auto rows = static_cast<Eigen::Index>(r.u64());
    auto cols = static_cast<Eigen::Index>(r.u64());
    if (rows < 2) throw Error(ErrorCode::format_error, "SFPM period < 2");
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> row_major(rows, cols);
    r.f64s(std::span<double>(row_major.data(), static_cast<std::size_t>(row_major.size())));
    std::vector<std::uint8_t> bits((static_cast<std::size_t>(rows * cols) + 7) / 8);
    r.raw(bits);

    ProfileMatrix pm;
    pm.period = static_cast<std::size_t>(rows);
    pm.data = row_major;
    pm.mask = Mask(rows, cols);
    std::size_t k = 0;
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index c = 0; c < cols; ++c, ++k) pm.mask(i, c) = (bits[k / 8] >> (k % 8)) & 1u;

    std::vector<SeriesBlock> blocks(r.u64());
    std::size_t next = 0;
    for (auto& b : blocks) {
        b.id = r.str();
        b.start_offset = r.u64();
        b.length = r.u64();
        b.years = r.u64();
        b.first_column = next;
        next += b.years;
    }
    if (!r.at_end()) throw Error(ErrorCode::format_error, "trailing bytes in SFPM container");
    pm.index = SeriesYearIndex(std::move(blocks));
    if (pm.index.columns() != static_cast<std::size_t>(cols))
        throw Error(ErrorCode::format_error, "SFPM index does not cover all columns");
    return pm;
}

void save_profile_matrix(const ProfileMatrix& pm, const std::filesystem::path& path) {
    io::write_atomic(path, encode_profile_matrix(pm));
}

ProfileMatrix load_profile_matrix(const std::filesystem::path& path) {
    return decode_profile_matrix(io::read_file(path));
}

void write_profile_text(const ProfileMatrix& pm, std::ostream& out) {
    out << "column,series_id,year,row,value,observed\n";
    out.precision(17);
    for (const auto& e : pm.index.entries()) {
        auto c = static_cast<Eigen::Index>(e.column);
        for (Eigen::Index j = 0; j < pm.rows(); ++j)
            out << e.column << ',' << e.series_id << ',' << e.year << ',' << j << ',' << pm.data(j, c) << ','
                << (pm.mask(j, c) ? 1 : 0) << '\n';
    }
}

} // namespace sfcast
