#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "bigat/dataset.hpp"
#include "bigat/model.hpp"
#include "bigat/train.hpp"

namespace bigat {

// rows = true class, cols = predicted class
struct ConfusionMatrix {
    std::size_t k = 3;
    std::vector<std::size_t> counts;  // k x k, row-major

    explicit ConfusionMatrix(std::size_t classes = 3) : k(classes), counts(classes * classes, 0) {}

    std::size_t& at(std::size_t t, std::size_t p) { return counts[t * k + p]; }
    std::size_t at(std::size_t t, std::size_t p) const { return counts[t * k + p]; }
    std::size_t total() const;
    void add(int true_class, int predicted);
};

double accuracy(const ConfusionMatrix& cm);
// Unweighted class mean of 2PR/(P+R); 0/0 precision, recall, or F1 counts as 0.
double macro_f1(const ConfusionMatrix& cm);
// Mean per-class recall over classes present in the true labels.
double balanced_accuracy(const ConfusionMatrix& cm);
// Per-class recall; -1 marks a class absent from the true labels.
std::vector<double> per_class_accuracy(const ConfusionMatrix& cm);

// Disjoint test folds over labeled nodes; per-class counts across folds
// differ by at most one. Classes with fewer than k members are spread
// best-effort.
std::vector<std::vector<std::size_t>> stratified_kfold(const std::vector<int>& labels,
                                                       std::size_t k, std::uint64_t seed);

struct MetricSummary {
    double mean = 0.0;
    double stddev = 0.0;
};

struct VariantReport {
    std::map<std::string, MetricSummary> metrics;  // accuracy, macro_f1, balanced_accuracy
    std::vector<double> per_class;                 // mean per-class recall
    std::size_t runs = 0;
    std::size_t failed_runs = 0;
};

struct CvConfig {
    std::size_t folds = 5;
    std::size_t repeats = 6;
    std::uint64_t base_seed = 42;
    std::size_t jobs = 1;
    TrainConfig train;
};

struct CvReport {
    std::map<std::string, VariantReport> variants;
    CvConfig config;

    std::string to_json() const;
    std::string to_table() const;
};

// Full protocol: per (repeat, fold) split -> standardize on training stats ->
// K-means on training nodes -> train M_cluster -> infer test clusters ->
// train each variant -> score on the test fold.
CvReport run_cv(const EventDataset& ds, const std::vector<Variant>& variants,
                const CvConfig& cfg);

}  // namespace bigat
