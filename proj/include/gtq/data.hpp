#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gtq/tensor.hpp"

namespace gtq {

// Immutable after construction; shared read-only across evaluation threads.
struct Dataset {
    std::string name;
    ad::Tensor features; // rows x s_in
    std::vector<int> labels;
    int n_classes = 0;
    std::vector<double> feature_means, feature_stds; // train-fit; empty if raw
    std::vector<int> train_idx, test_idx, val_idx;

    std::size_t rows() const { return features.rows(); }
    std::size_t s_in() const { return features.cols(); }
    std::vector<double> row(int i) const;
    std::vector<int> class_counts() const;
};

// Canonical 150x4 iris table embedded in the artifact; no split applied.
Dataset load_iris();

struct ColumnSpec {
    enum class Kind { Numeric, Binary, Categorical };
    std::string name;
    Kind kind = Kind::Numeric;
};

// Declares column names/types and the label column for load_csv.
struct CsvSchema {
    std::string dataset_name;
    std::vector<ColumnSpec> columns;
    std::string label_column;
};

CsvSchema load_schema(const std::string& path); // JSON file
CsvSchema schema_from_json_text(const std::string& text);

// Comma-separated with header row, '.' decimal. Numeric columns pass
// through, binary columns become 0/1 ordinal, categorical columns one-hot
// (categories in sorted order). Label values map to 0..C-1 in sorted order.
Dataset load_csv(const std::string& path, const CsvSchema& schema);

// Big-endian IDX pair (images magic 0x803, labels 0x801) -> flattened
// [0,1]-scaled pixel rows plus raw digit labels.
struct IdxPair {
    ad::Tensor features;
    std::vector<int> digits;
    std::size_t image_side = 0;
};
IdxPair load_idx_pair(const std::string& image_path, const std::string& label_path);

// Assembles train/test from the two IDX pairs, keeps only `digits`
// (relabeled 0..C-1 in the given order), and subsamples the splits
// (0 = keep all). Subsampling only shrinks the split it touches.
Dataset load_mnist_subset(const std::string& train_image_path,
                          const std::string& train_label_path,
                          const std::string& test_image_path,
                          const std::string& test_label_path,
                          const std::vector<int>& digits = {1, 2, 3},
                          int test_subsample = 150, int train_subsample = 0,
                          std::uint64_t seed = 0);

// Stratified split preserving class ratios within one sample per class,
// then z-score standardization fit on the train rows only (constant
// columns keep std 1). val_frac > 0 carves a validation split out of train.
void split_standardize(Dataset& d, double test_frac, std::uint64_t seed,
                       double val_frac = 0.0);

} // namespace gtq
