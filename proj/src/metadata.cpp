#include "sfcast/metadata.hpp"

#include "sfcast/binary_io.hpp"
#include "sfcast/error.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace sfcast {

namespace {
constexpr std::uint32_t kMetadataVersion = 1;
}

double MetadataMatrix::nnz_ratio() const {
    double cells = static_cast<double>(features.rows()) * static_cast<double>(features.cols());
    return cells == 0.0 ? 0.0 : static_cast<double>(features.nonZeros()) / cells;
}

MetadataMatrix tfidf_featurize(std::span<const Document> docs) {
    if (docs.size() < 2) throw Error(ErrorCode::insufficient_corpus, "TF-IDF needs at least 2 documents");

    std::unordered_set<std::string> seen_ids;
    std::map<std::string, std::size_t> df;
    std::vector<std::map<std::string, std::size_t>> counts(docs.size());
    for (std::size_t d = 0; d < docs.size(); ++d) {
        if (!seen_ids.insert(docs[d].series_id).second)
            throw Error(ErrorCode::invalid_argument, "duplicate document for '" + docs[d].series_id + "'");
        for (const auto& tok : docs[d].tokens) ++counts[d][tok];
        for (const auto& [tok, _] : counts[d]) ++df[tok];
    }

    MetadataMatrix out;
    std::unordered_map<std::string, Eigen::Index> term_row;
    for (const auto& [tok, n] : df)
        if (n >= 2) {
            term_row.emplace(tok, static_cast<Eigen::Index>(out.vocab.size()));
            out.vocab.push_back(tok);
        }

    const double n_docs = static_cast<double>(docs.size());
    std::vector<Eigen::Triplet<double>> triplets;
    for (std::size_t d = 0; d < docs.size(); ++d) {
        out.column_ids.push_back(docs[d].series_id);
        for (const auto& [tok, tf] : counts[d]) {
            auto it = term_row.find(tok);
            if (it == term_row.end()) continue;
            double w = static_cast<double>(tf) * std::log(n_docs / static_cast<double>(df.at(tok)));
            if (w != 0.0) triplets.emplace_back(it->second, static_cast<Eigen::Index>(d), w);
        }
    }
    out.features.resize(static_cast<Eigen::Index>(out.vocab.size()), static_cast<Eigen::Index>(docs.size()));
    out.features.setFromTriplets(triplets.begin(), triplets.end());
    out.features.makeCompressed();
    return out;
}

MetadataMatrix replicate_for_years(const MetadataMatrix& per_series, const SeriesYearIndex& index) {
    std::unordered_map<std::string, Eigen::Index> col_of;
    for (std::size_t c = 0; c < per_series.column_ids.size(); ++c)
        col_of.emplace(per_series.column_ids[c], static_cast<Eigen::Index>(c));

    MetadataMatrix out;
    out.vocab = per_series.vocab;
    std::vector<Eigen::Triplet<double>> triplets;
    for (const auto& blk : index.blocks()) {
        auto it = col_of.find(blk.id);
        if (it == col_of.end()) throw Error(ErrorCode::metadata_missing, "no metadata for series '" + blk.id + "'");
        for (std::size_t u = 0; u < blk.years; ++u) {
            auto col = static_cast<Eigen::Index>(blk.first_column + u);
            for (SparseMatrix::InnerIterator e(per_series.features, it->second); e; ++e)
                triplets.emplace_back(e.row(), col, e.value());
            out.column_ids.push_back(blk.id);
        }
    }
    out.features.resize(per_series.dim(), static_cast<Eigen::Index>(index.columns()));
    out.features.setFromTriplets(triplets.begin(), triplets.end());
    out.features.makeCompressed();
    return out;
}

MetadataMatrix per_series(const MetadataMatrix& replicated, const SeriesYearIndex& index) {
    if (replicated.cols() != static_cast<Eigen::Index>(index.columns()))
        throw Error(ErrorCode::shape_error, "metadata columns do not match the profile index");
    MetadataMatrix out;
    out.vocab = replicated.vocab;
    std::vector<Eigen::Triplet<double>> triplets;
    Eigen::Index c = 0;
    for (const auto& blk : index.blocks()) {
        for (SparseMatrix::InnerIterator e(replicated.features, static_cast<Eigen::Index>(blk.first_column)); e; ++e)
            triplets.emplace_back(e.row(), c, e.value());
        out.column_ids.push_back(blk.id);
        ++c;
    }
    out.features.resize(replicated.dim(), c);
    out.features.setFromTriplets(triplets.begin(), triplets.end());
    out.features.makeCompressed();
    return out;
}

std::vector<Document> read_documents_jsonl(std::istream& in) {
    std::vector<Document> docs;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            auto j = nlohmann::json::parse(line);
            docs.push_back({j.at("series_id").get<std::string>(), j.at("tokens").get<std::vector<std::string>>()});
        } catch (const nlohmann::json::exception& e) {
            throw Error(ErrorCode::format_error, "metadata line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return docs;
}

std::string encode_metadata(const MetadataMatrix& meta) {
    SparseMatrix m = meta.features;
    m.makeCompressed();
    io::ByteWriter w;
    w.magic("SFSM");
    w.u32(kMetadataVersion);
    w.u64(static_cast<std::uint64_t>(m.rows()));
    w.u64(static_cast<std::uint64_t>(m.cols()));
    w.u64(static_cast<std::uint64_t>(m.nonZeros()));
    for (Eigen::Index c = 0; c <= m.cols(); ++c) w.u64(static_cast<std::uint64_t>(m.outerIndexPtr()[c]));
    for (Eigen::Index k = 0; k < m.nonZeros(); ++k) w.u64(static_cast<std::uint64_t>(m.innerIndexPtr()[k]));
    w.f64s(std::span<const double>(m.valuePtr(), static_cast<std::size_t>(m.nonZeros())));
    for (const auto& id : meta.column_ids) w.str(id);
    return w.bytes();
}

MetadataMatrix decode_metadata(std::string bytes) {
    io::ByteReader r(std::move(bytes));
    r.expect_magic("SFSM");
    if (auto v = r.u32(); v != kMetadataVersion)
        throw Error(ErrorCode::format_error, "unsupported SFSM version " + std::to_string(v));
    auto rows = static_cast<Eigen::Index>(r.u64());
    auto cols = static_cast<Eigen::Index>(r.u64());
    auto nnz = static_cast<Eigen::Index>(r.u64());
    std::vector<std::uint64_t> outer(static_cast<std::size_t>(cols) + 1);
    for (auto& o : outer) o = r.u64();
    std::vector<std::uint64_t> inner(static_cast<std::size_t>(nnz));
    for (auto& i : inner) i = r.u64();
    std::vector<double> values(static_cast<std::size_t>(nnz));
    r.f64s(values);
    if (outer.front() != 0 || outer.back() != static_cast<std::uint64_t>(nnz))
        throw Error(ErrorCode::format_error, "SFSM column pointers are inconsistent");

    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(values.size());
    for (Eigen::Index c = 0; c < cols; ++c) {
        if (outer[c + 1] < outer[c]) throw Error(ErrorCode::format_error, "SFSM column pointers decrease");
        for (auto k = outer[c]; k < outer[c + 1]; ++k) {
            if (inner[k] >= static_cast<std::uint64_t>(rows) || !std::isfinite(values[k]))
                throw Error(ErrorCode::format_error, "SFSM entry out of range or non-finite");
            triplets.emplace_back(static_cast<Eigen::Index>(inner[k]), c, values[k]);
        }
    }
    MetadataMatrix meta;
    meta.features.resize(rows, cols);
    meta.features.setFromTriplets(triplets.begin(), triplets.end());
    meta.features.makeCompressed();
    meta.column_ids.reserve(static_cast<std::size_t>(cols));
    for (Eigen::Index c = 0; c < cols; ++c) meta.column_ids.push_back(r.str());
    if (!r.at_end()) throw Error(ErrorCode::format_error, "trailing bytes in SFSM container");
    return meta;
}

void save_metadata(const MetadataMatrix& meta, const std::filesystem::path& matrix_path,
                   const std::filesystem::path& vocab_path) {
    io::write_atomic(matrix_path, encode_metadata(meta));
    if (!vocab_path.empty()) {
        std::string text;
        for (const auto& term : meta.vocab) text += term + '\n';
        io::write_atomic(vocab_path, text);
    }
}

MetadataMatrix load_metadata(const std::filesystem::path& matrix_path, const std::filesystem::path& vocab_path) {
    MetadataMatrix meta = decode_metadata(io::read_file(matrix_path));
    if (!vocab_path.empty() && std::filesystem::exists(vocab_path)) {
        std::istringstream in(io::read_file(vocab_path));
        std::string term;
        while (std::getline(in, term)) meta.vocab.push_back(term);
        if (static_cast<Eigen::Index>(meta.vocab.size()) != meta.dim())
            throw Error(ErrorCode::format_error, "vocabulary size does not match metadata rows");
    }
    return meta;
}

} // namespace sfcast
