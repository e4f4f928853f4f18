#pragma once

#include "sfcast/profile_matrix.hpp"

#include <Eigen/SparseCore>

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace sfcast {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor>;
using SparseVector = Eigen::SparseVector<double>;

// Pre-tokenized, lowercased text describing one series.
struct Document {
    std::string series_id;
    std::vector<std::string> tokens;
};

// m x C sparse feature matrix; column c belongs to series column_ids[c].
// Either one column per series, or one per year-column after replication.
struct MetadataMatrix {
    SparseMatrix features;
    std::vector<std::string> vocab;
    std::vector<std::string> column_ids;

    Eigen::Index dim() const { return features.rows(); }
    Eigen::Index cols() const { return features.cols(); }
    double nnz_ratio() const;
    SparseVector column(Eigen::Index c) const { return features.col(c); }
};

// tf = raw count, idf = ln(n_docs / df); terms with df < 2 are dropped and
// the vocabulary is sorted lexicographically. Columns follow input order.
MetadataMatrix tfidf_featurize(std::span<const Document> docs);

// One bitwise-identical copy of each series' vector per year-column.
MetadataMatrix replicate_for_years(const MetadataMatrix& per_series, const SeriesYearIndex& index);

// First column of every series block; undoes replicate_for_years.
MetadataMatrix per_series(const MetadataMatrix& replicated, const SeriesYearIndex& index);

// JSON lines: {"series_id": "...", "tokens": ["...", ...]}
std::vector<Document> read_documents_jsonl(std::istream& in);

// "SFSM" container: CSC index arrays + values + column ids.
std::string encode_metadata(const MetadataMatrix& meta);
MetadataMatrix decode_metadata(std::string bytes);
void save_metadata(const MetadataMatrix& meta, const std::filesystem::path& matrix_path,
                   const std::filesystem::path& vocab_path);
MetadataMatrix load_metadata(const std::filesystem::path& matrix_path, const std::filesystem::path& vocab_path = {});

} // namespace sfcast
