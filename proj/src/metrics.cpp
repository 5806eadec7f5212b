#include "bigat/metrics.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <future>
#include <iomanip>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "bigat/errors.hpp"
#include "bigat/rng.hpp"

namespace bigat {

std::size_t ConfusionMatrix::total() const {
    return std::accumulate(counts.begin(), counts.end(), std::size_t{0});
}

void ConfusionMatrix::add(int true_class, int predicted) {
    if (true_class < 0 || predicted < 0 || static_cast<std::size_t>(true_class) >= k ||
        static_cast<std::size_t>(predicted) >= k)
        throw DataError("ConfusionMatrix: class out of range");
    ++at(true_class, predicted);
}

namespace {

void check_nonempty(const ConfusionMatrix& cm) {
    if (cm.total() == 0) throw DataError("metric on empty confusion matrix");
}

}  // namespace

double accuracy(const ConfusionMatrix& cm) {
    check_nonempty(cm);
    std::size_t diag = 0;
    for (std::size_t c = 0; c < cm.k; ++c) diag += cm.at(c, c);
    return static_cast<double>(diag) / static_cast<double>(cm.total());
}

double macro_f1(const ConfusionMatrix& cm) {
    check_nonempty(cm);
    double sum = 0.0;
    for (std::size_t c = 0; c < cm.k; ++c) {
        std::size_t true_c = 0, pred_c = 0;
        for (std::size_t j = 0; j < cm.k; ++j) {
            true_c += cm.at(c, j);
            pred_c += cm.at(j, c);
        }
        const double tp = static_cast<double>(cm.at(c, c));
        const double prec = pred_c > 0 ? tp / static_cast<double>(pred_c) : 0.0;
        const double rec = true_c > 0 ? tp / static_cast<double>(true_c) : 0.0;
        sum += (prec + rec) > 0.0 ? 2.0 * prec * rec / (prec + rec) : 0.0;
    }
    return sum / static_cast<double>(cm.k);
}

std::vector<double> per_class_accuracy(const ConfusionMatrix& cm) {
    check_nonempty(cm);
    std::vector<double> recalls(cm.k, -1.0);
    for (std::size_t c = 0; c < cm.k; ++c) {
        std::size_t true_c = 0;
        for (std::size_t j = 0; j < cm.k; ++j) true_c += cm.at(c, j);
        if (true_c > 0)
            recalls[c] = static_cast<double>(cm.at(c, c)) / static_cast<double>(true_c);
    }
    return recalls;
}

double balanced_accuracy(const ConfusionMatrix& cm) {
    const auto recalls = per_class_accuracy(cm);
    double sum = 0.0;
    std::size_t present = 0;
    for (double r : recalls) {
        if (r >= 0.0) {
            sum += r;
            ++present;
        }
    }
    return sum / static_cast<double>(present);
}

std::vector<std::vector<std::size_t>> stratified_kfold(const std::vector<int>& labels,
                                                       std::size_t k, std::uint64_t seed) {
    if (k < 2) throw ConfigError("stratified_kfold: k must be >= 2");
    std::map<int, std::vector<std::size_t>> by_class;
    for (std::size_t v = 0; v < labels.size(); ++v)
        if (labels[v] >= 0) by_class[labels[v]].push_back(v);
    if (by_class.empty()) throw DataError("stratified_kfold: no labeled nodes");

    Rng rng(seed);
    std::vector<std::vector<std::size_t>> folds(k);
    std::size_t class_idx = 0;
    for (auto& [cls, members] : by_class) {
        std::shuffle(members.begin(), members.end(), rng);
        // round-robin deal, offset per class so small classes rotate over folds
        for (std::size_t i = 0; i < members.size(); ++i)
            folds[(i + class_idx) % k].push_back(members[i]);
        ++class_idx;
    }
    for (auto& f : folds) std::sort(f.begin(), f.end());
    return folds;
}

namespace {

struct RunMetrics {
    double accuracy = 0.0;
    double macro_f1 = 0.0;
    double balanced = 0.0;
    std::vector<double> per_class;  // -1 where absent
    bool failed = false;
};

// one (repeat, fold) split: shared preprocessing, then every variant
std::vector<RunMetrics> run_fold(const EventDataset& ds, const std::vector<Variant>& variants,
                                 const CvConfig& cfg, std::size_t repeat, std::size_t fold,
                                 const std::vector<std::size_t>& test_nodes) {
    const std::vector<int> labels = ds.labels();
    TrainMask train_mask(ds.n(), false);
    for (std::size_t v = 0; v < ds.n(); ++v) train_mask[v] = labels[v] >= 0;
    for (std::size_t v : test_nodes) train_mask[v] = false;

    // transductive: features of all nodes visible, statistics from training nodes only
    Standardizer std_rec = fit_standardizer(ds, train_mask);
    const Matrix x = std_rec.apply(ds.features);

    std::vector<std::size_t> train_nodes;
    for (std::size_t v = 0; v < ds.n(); ++v)
        if (train_mask[v]) train_nodes.push_back(v);

    // unsupervised pre-training on the training nodes
    const auto sev = severity_features(ds, train_nodes);
    const KmeansResult km =
        kmeans(sev, 2, 10, 100, derive_seed(cfg.base_seed, repeat, fold, 0x10));
    const ClusterAssignment partial = assign_clusters(km, train_nodes, ds.n());

    TrainConfig tc = cfg.train;
    tc.seed = derive_seed(cfg.base_seed, repeat, fold, 0x20);
    BigatModel cluster_model =
        train_cluster_model(x, ds.graph, partial, train_mask, tc, ds.features.cols);
    const ClusterAssignment clusters = infer_clusters(cluster_model, x, ds.graph, partial);

    // hide test labels from training; reveal only for scoring
    std::vector<int> train_labels = labels;
    for (std::size_t v : test_nodes) train_labels[v] = -1;

    std::vector<RunMetrics> out;
    for (std::size_t vi = 0; vi < variants.size(); ++vi) {
        RunMetrics rm;
        try {
            ModelConfig mc;
            mc.input_dim = ds.features.cols;
            mc.variant = variants[vi];
            mc.seed = derive_seed(cfg.base_seed, repeat, fold, 0x30 + vi);
            TrainConfig vtc = cfg.train;
            vtc.seed = mc.seed;
            BigatModel model = init_params(mc);
            train_model(model, x, ds.graph, clusters, train_labels, train_mask, vtc);
            const std::vector<int> pred = predict(forward(model, x, ds.graph, clusters));
            ConfusionMatrix cm(3);
            for (std::size_t v : test_nodes) cm.add(labels[v], pred[v]);
            rm.accuracy = accuracy(cm);
            rm.macro_f1 = macro_f1(cm);
            rm.balanced = balanced_accuracy(cm);
            rm.per_class = per_class_accuracy(cm);
        } catch (const std::exception&) {
            rm.failed = true;
        }
        out.push_back(std::move(rm));
    }
    return out;
}

MetricSummary summarize(const std::vector<double>& xs) {
    MetricSummary s;
    if (xs.empty()) return s;
    s.mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
    double var = 0.0;
    for (double v : xs) var += (v - s.mean) * (v - s.mean);
    s.stddev = std::sqrt(var / static_cast<double>(xs.size()));
    return s;
}

}  // namespace

CvReport run_cv(const EventDataset& ds, const std::vector<Variant>& variants,
                const CvConfig& cfg) {
    const std::vector<int> labels = ds.labels();

    // split every repeat up front; fold jobs are then independent
    struct Job {
        std::size_t repeat, fold;
        std::vector<std::size_t> test_nodes;
    };
    std::vector<Job> jobs;
    for (std::size_t r = 0; r < cfg.repeats; ++r) {
        const auto folds = stratified_kfold(labels, cfg.folds, derive_seed(cfg.base_seed, r));
        for (std::size_t f = 0; f < cfg.folds; ++f) jobs.push_back({r, f, folds[f]});
    }

    std::vector<std::vector<RunMetrics>> results(jobs.size());
    const std::size_t n_workers = std::max<std::size_t>(1, cfg.jobs);
    if (n_workers == 1) {
        for (std::size_t j = 0; j < jobs.size(); ++j)
            results[j] = run_fold(ds, variants, cfg, jobs[j].repeat, jobs[j].fold,
                                  jobs[j].test_nodes);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::future<void>> workers;
        for (std::size_t w = 0; w < n_workers; ++w) {
            workers.push_back(std::async(std::launch::async, [&] {
                for (std::size_t j = next.fetch_add(1); j < jobs.size(); j = next.fetch_add(1))
                    results[j] = run_fold(ds, variants, cfg, jobs[j].repeat, jobs[j].fold,
                                          jobs[j].test_nodes);
            }));
        }
        for (auto& w : workers) w.get();
    }

    // deterministic merge in (repeat, fold) order
    CvReport report;
    report.config = cfg;
    for (std::size_t vi = 0; vi < variants.size(); ++vi) {
        VariantReport vr;
        std::vector<double> acc, f1, bal;
        std::vector<double> pc_sum(3, 0.0);
        std::vector<std::size_t> pc_cnt(3, 0);
        for (std::size_t j = 0; j < jobs.size(); ++j) {
            const RunMetrics& rm = results[j][vi];
            ++vr.runs;
            if (rm.failed) {
                ++vr.failed_runs;
                continue;
            }
            acc.push_back(rm.accuracy);
            f1.push_back(rm.macro_f1);
            bal.push_back(rm.balanced);
            for (std::size_t c = 0; c < 3; ++c) {
                if (rm.per_class[c] >= 0.0) {
                    pc_sum[c] += rm.per_class[c];
                    ++pc_cnt[c];
                }
            }
        }
        vr.metrics["accuracy"] = summarize(acc);
        vr.metrics["macro_f1"] = summarize(f1);
        vr.metrics["balanced_accuracy"] = summarize(bal);
        for (std::size_t c = 0; c < 3; ++c)
            vr.per_class.push_back(pc_cnt[c] ? pc_sum[c] / static_cast<double>(pc_cnt[c]) : -1.0);
        report.variants[variant_name(variants[vi])] = std::move(vr);
    }
    return report;
}

std::string CvReport::to_json() const {
    nlohmann::json j;
    j["config"] = {{"folds", config.folds},
                   {"repeats", config.repeats},
                   {"base_seed", config.base_seed},
                   {"learning_rate", config.train.learning_rate},
                   {"epochs", config.train.epochs}};
    for (const auto& [name, vr] : variants) {
        nlohmann::json v;
        for (const auto& [metric, s] : vr.metrics)
            v[metric] = {{"mean", s.mean}, {"std", s.stddev}};
        v["per_class"] = {{"short", vr.per_class[0]},
                          {"medium", vr.per_class[1]},
                          {"long", vr.per_class[2]}};
        v["runs"] = vr.runs;
        v["failed_runs"] = vr.failed_runs;
        j["variants"][name] = std::move(v);
    }
    return j.dump(2) + "\n";
}

std::string CvReport::to_table() const {
    std::ostringstream os;
    os << std::left << std::setw(10) << "model" << std::right << std::setw(18) << "accuracy"
       << std::setw(18) << "macro_f1" << std::setw(18) << "balanced_acc" << std::setw(8)
       << "runs" << std::setw(8) << "failed" << "\n";
    auto cell = [](const MetricSummary& s) {
        std::ostringstream c;
        c << std::fixed << std::setprecision(3) << s.mean << " +-" << std::setprecision(3)
          << s.stddev;
        return c.str();
    };
    for (const auto& [name, vr] : variants) {
        os << std::left << std::setw(10) << name << std::right << std::setw(18)
           << cell(vr.metrics.at("accuracy")) << std::setw(18) << cell(vr.metrics.at("macro_f1"))
           << std::setw(18) << cell(vr.metrics.at("balanced_accuracy")) << std::setw(8) << vr.runs
           << std::setw(8) << vr.failed_runs << "\n";
    }
    os << "\nper-class accuracy (recall):\n";
    os << std::left << std::setw(10) << "model" << std::right << std::setw(10) << "short"
       << std::setw(10) << "medium" << std::setw(10) << "long" << "\n";
    for (const auto& [name, vr] : variants) {
        os << std::left << std::setw(10) << name << std::right << std::fixed
           << std::setprecision(3);
        for (double pc : vr.per_class)
            os << std::setw(10) << pc;
        os << "\n";
    }
    return os.str();
}

}  // namespace bigat
