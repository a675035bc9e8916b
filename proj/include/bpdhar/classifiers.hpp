#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "errors.hpp"
#include "labels.hpp"
#include "parallel.hpp"
#include "random.hpp"
#include "text.hpp"

namespace bpdhar {

enum class ClassifierKind { majority, naive_bayes, svm };

inline constexpr std::array<ClassifierKind, 3> kAllClassifierKinds = {ClassifierKind::majority,
                                                                      ClassifierKind::naive_bayes, ClassifierKind::svm};

inline constexpr std::string_view name_of(ClassifierKind k) noexcept {
    switch (k) {
        case ClassifierKind::majority: return "majority";
        case ClassifierKind::naive_bayes: return "naive_bayes";
        case ClassifierKind::svm: return "svm";
    }
    return "?";
}

inline std::optional<ClassifierKind> parse_classifier_kind(std::string_view s) noexcept {
    for (auto k : kAllClassifierKinds)
        if (name_of(k) == s) return k;
    return std::nullopt;
}

/// Dense row-major matrix of feature rows.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

    static Matrix from_rows(const std::vector<std::vector<double>>& rows) {
        Matrix m(rows.size(), rows.empty() ? 0 : rows.front().size());
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (rows[i].size() != m.cols) throw ArgumentError("ragged rows");
            std::copy(rows[i].begin(), rows[i].end(), m.data.begin() + static_cast<std::ptrdiff_t>(i * m.cols));
        }
        return m;
    }

    std::span<const double> row(std::size_t i) const { return {data.data() + i * cols, cols}; }
    std::span<double> row(std::size_t i) { return {data.data() + i * cols, cols}; }
};

// ---------------------------------------------------------------------------
// Parameters per kind

struct MajorityParams {
    Label label = Label::normal;

    friend bool operator==(const MajorityParams&, const MajorityParams&) = default;
};

struct NaiveBayesParams {
    std::vector<double> prior;               // per class in classes_seen order
    std::vector<std::vector<double>> mean;   // class x feature
    std::vector<std::vector<double>> var;    // class x feature, floored
    double var_floor = 0.0;

    /// log prior - 1/2 sum log(2 pi var), per class. Derived from the fields above.
    std::vector<double> log_norm;
    std::vector<std::vector<double>> inv_var;

    void finalize() {
        log_norm.assign(prior.size(), 0.0);
        inv_var.assign(prior.size(), {});
        for (std::size_t c = 0; c < prior.size(); ++c) {
            double s = std::log(prior[c]);
            inv_var[c].resize(var[c].size());
            for (std::size_t j = 0; j < var[c].size(); ++j) {
                s -= 0.5 * std::log(2.0 * std::numbers::pi * var[c][j]);
                inv_var[c][j] = 1.0 / var[c][j];
            }
            log_norm[c] = s;
        }
    }

    friend bool operator==(const NaiveBayesParams& a, const NaiveBayesParams& b) {
        return a.prior == b.prior && a.mean == b.mean && a.var == b.var && a.var_floor == b.var_floor;
    }
};

struct SvmParams {
    std::vector<double> feature_mean;
    std::vector<double> feature_scale;
    std::vector<std::vector<double>> weights;  // class x feature; empty for a single-class model
    std::vector<double> bias;

    friend bool operator==(const SvmParams&, const SvmParams&) = default;
};

struct SvmOptions {
    double lambda = 1e-4;
    int epochs = 20;
};

/// Per-epoch training objective lambda/2 |w|^2 + mean hinge, one row per one-vs-rest class.
struct SvmTrace {
    std::vector<std::vector<double>> objective;
};

class TrainedClassifier {
public:
    using Params = std::variant<MajorityParams, NaiveBayesParams, SvmParams>;

    TrainedClassifier() = default;
    TrainedClassifier(ClassifierKind kind, std::size_t dim, std::vector<Label> classes, Params params)
        : kind_(kind), dim_(dim), classes_(std::move(classes)), params_(std::move(params)) {}

    ClassifierKind kind() const noexcept { return kind_; }
    std::size_t dim() const noexcept { return dim_; }
    /// Labels seen during training, ascending canonical order.
    const std::vector<Label>& classes_seen() const noexcept { return classes_; }
    const Params& params() const noexcept { return params_; }

    bool is_constant() const noexcept { return classes_.size() == 1 || kind_ == ClassifierKind::majority; }

    /// Naive Bayes class posteriors, parallel to classes_seen().
    std::vector<double> posterior(std::span<const double> x) const {
        check_dim(x);
        if (!std::holds_alternative<NaiveBayesParams>(params_))
            throw ArgumentError("posterior is only defined for naive Bayes");
        auto post = log_joint(x);
        const double top = *std::max_element(post.begin(), post.end());
        double total = 0.0;
        for (double& v : post) total += (v = std::exp(v - top));
        for (double& v : post) v /= total;
        return post;
    }

    /// One-vs-rest scores of the SVM, parallel to classes_seen().
    std::vector<double> svm_scores(std::span<const double> x) const {
        check_dim(x);
        const auto* svm = std::get_if<SvmParams>(&params_);
        if (!svm) throw ArgumentError("scores are only defined for the SVM");
        std::vector<double> scores(svm->weights.size());
        for (std::size_t c = 0; c < svm->weights.size(); ++c) {
            double s = svm->bias[c];
            for (std::size_t j = 0; j < dim_; ++j)
                s += svm->weights[c][j] * (x[j] - svm->feature_mean[j]) / svm->feature_scale[j];
            scores[c] = s;
        }
        return scores;
    }

    Label predict(std::span<const double> x) const {
        check_dim(x);
        if (classes_.size() == 1) return classes_.front();
        switch (kind_) {
            case ClassifierKind::majority:
                return std::get<MajorityParams>(params_).label;
            case ClassifierKind::naive_bayes:
                return classes_[argmax(log_joint(x))];
            case ClassifierKind::svm:
                return classes_[argmax(svm_scores(x))];
        }
        return classes_.front();
    }

    friend bool operator==(const TrainedClassifier&, const TrainedClassifier&) = default;

private:
    void check_dim(std::span<const double> x) const {
        if (x.size() != dim_)
            throw ArgumentError("expected " + std::to_string(dim_) + " features, got " + std::to_string(x.size()));
    }

    /// log prior + log likelihood per class.
    std::vector<double> log_joint(std::span<const double> x) const {
        const auto& nb = std::get<NaiveBayesParams>(params_);
        std::vector<double> lp(classes_.size());
        for (std::size_t c = 0; c < classes_.size(); ++c) {
            const double* mean = nb.mean[c].data();
            const double* iv = nb.inv_var[c].data();
            double q = 0.0;
            for (std::size_t j = 0; j < dim_; ++j) {
                const double d = x[j] - mean[j];
                q += d * d * iv[j];
            }
            lp[c] = nb.log_norm[c] - 0.5 * q;
        }
        return lp;
    }

    /// First maximum: classes are in canonical order, so ties go to the lowest label index.
    static std::size_t argmax(const std::vector<double>& v) {
        std::size_t best = 0;
        for (std::size_t i = 1; i < v.size(); ++i)
            if (v[i] > v[best]) best = i;
        return best;
    }

    ClassifierKind kind_ = ClassifierKind::majority;
    std::size_t dim_ = 0;
    std::vector<Label> classes_;
    Params params_;
};

// ---------------------------------------------------------------------------
// Training

namespace detail {

inline std::vector<Label> distinct_labels(std::span<const Label> y) {
    std::array<bool, kLabelCount> seen{};
    for (Label l : y) seen[static_cast<std::size_t>(index_of(l))] = true;
    std::vector<Label> out;
    for (std::size_t i = 0; i < kLabelCount; ++i)
        if (seen[i]) out.push_back(static_cast<Label>(i));
    return out;
}

inline Label modal_label(std::span<const Label> y) {
    LabelCounts counts{};
    for (Label l : y) ++counts[static_cast<std::size_t>(index_of(l))];
    std::size_t best = 0;
    for (std::size_t i = 1; i < kLabelCount; ++i)
        if (counts[i] > counts[best]) best = i;
    return static_cast<Label>(best);
}

inline NaiveBayesParams fit_naive_bayes(const Matrix& x, std::span<const Label> y, const std::vector<Label>& classes) {
    const std::size_t d = x.cols;
    NaiveBayesParams p;
    // Floor: 1e-9 times the largest per-feature variance of the whole training set.
    double max_var = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
        double mean = 0.0;
        for (std::size_t i = 0; i < x.rows; ++i) mean += x.row(i)[j];
        mean /= static_cast<double>(x.rows);
        double var = 0.0;
        for (std::size_t i = 0; i < x.rows; ++i) {
            const double t = x.row(i)[j] - mean;
            var += t * t;
        }
        max_var = std::max(max_var, var / static_cast<double>(x.rows));
    }
    p.var_floor = max_var > 0.0 ? 1e-9 * max_var : 1e-9;

    std::array<int, kLabelCount> slot{};
    slot.fill(-1);
    for (std::size_t c = 0; c < classes.size(); ++c) slot[static_cast<std::size_t>(index_of(classes[c]))] = static_cast<int>(c);
    const std::size_t k = classes.size();
    std::vector<double> count(k, 0.0);
    p.mean.assign(k, std::vector<double>(d, 0.0));
    p.var.assign(k, std::vector<double>(d, 0.0));
    for (std::size_t i = 0; i < x.rows; ++i) {
        const auto c = static_cast<std::size_t>(slot[static_cast<std::size_t>(index_of(y[i]))]);
        count[c] += 1.0;
        for (std::size_t j = 0; j < d; ++j) p.mean[c][j] += x.row(i)[j];
    }
    for (std::size_t c = 0; c < k; ++c)
        for (double& m : p.mean[c]) m /= count[c];
    for (std::size_t i = 0; i < x.rows; ++i) {
        const auto c = static_cast<std::size_t>(slot[static_cast<std::size_t>(index_of(y[i]))]);
        for (std::size_t j = 0; j < d; ++j) {
            const double t = x.row(i)[j] - p.mean[c][j];
            p.var[c][j] += t * t;
        }
    }
    for (std::size_t c = 0; c < k; ++c)
        for (double& v : p.var[c]) v = std::max(v / count[c], p.var_floor);
    p.prior.resize(k);
    for (std::size_t c = 0; c < k; ++c) p.prior[c] = count[c] / static_cast<double>(x.rows);
    p.finalize();
    return p;
}

/// Pegasos on standardized rows with a constant 1 appended for the bias.
/// w is held as scale * v so the shrink step is O(1).
inline std::vector<double> pegasos_binary(const Matrix& z, std::span<const double> target, std::uint64_t seed,
                                          const SvmOptions& opt, std::vector<double>* objective_trace) {
    const std::size_t n = z.rows;
    const std::size_t d = z.cols;
    std::vector<double> v(d + 1, 0.0);
    double scale = 1.0;
    double v_norm2 = 0.0;
    const double radius2 = 1.0 / opt.lambda;
    Rng rng(seed);
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::uint64_t t = 0;

    auto dot = [&](std::size_t i) {
        const double* row = z.row(i).data();
        const double* w = v.data();
        double s0 = v[d], s1 = 0.0, s2 = 0.0, s3 = 0.0;
        std::size_t j = 0;
        for (; j + 4 <= d; j += 4) {
            s0 += w[j] * row[j];
            s1 += w[j + 1] * row[j + 1];
            s2 += w[j + 2] * row[j + 2];
            s3 += w[j + 3] * row[j + 3];
        }
        for (; j < d; ++j) s0 += w[j] * row[j];
        return (s0 + s1) + (s2 + s3);
    };
    std::vector<double> row_norm2(n, 1.0);
    for (std::size_t i = 0; i < n; ++i)
        for (double e : z.row(i)) row_norm2[i] += e * e;

    for (int epoch = 0; epoch < opt.epochs; ++epoch) {
        rng.shuffle(order);
        for (std::size_t i : order) {
            ++t;
            const double eta = 1.0 / (opt.lambda * static_cast<double>(t));
            const double vx = dot(i);
            const double margin = target[i] * scale * vx;
            const double shrink = 1.0 - eta * opt.lambda;
            if (shrink <= 0.0) {
                std::fill(v.begin(), v.end(), 0.0);
                scale = 1.0;
                v_norm2 = 0.0;
            } else {
                scale *= shrink;
            }
            if (margin < 1.0) {
                const double step = eta * target[i] / scale;
                const double* row = z.row(i).data();
                const double vx_now = shrink <= 0.0 ? 0.0 : vx;
                double* w = v.data();
                for (std::size_t j = 0; j < d; ++j) w[j] += step * row[j];
                v[d] += step;
                v_norm2 += 2.0 * step * vx_now + step * step * row_norm2[i];
            }
            const double w_norm2 = scale * scale * v_norm2;
            if (w_norm2 > radius2) scale *= std::sqrt(radius2 / w_norm2);
            if (scale < 1e-10) {
                for (double& e : v) e *= scale;
                v_norm2 *= scale * scale;
                scale = 1.0;
            }
        }
        if (objective_trace) {
            double hinge = 0.0;
            for (std::size_t i = 0; i < n; ++i) hinge += std::max(0.0, 1.0 - target[i] * scale * dot(i));
            objective_trace->push_back(0.5 * opt.lambda * scale * scale * v_norm2 + hinge / static_cast<double>(n));
        }
    }
    for (double& e : v) e *= scale;
    return v;
}

inline SvmParams fit_svm(const Matrix& x, std::span<const Label> y, const std::vector<Label>& classes,
                         std::uint64_t seed, const SvmOptions& opt, SvmTrace* trace) {
    const std::size_t d = x.cols;
    SvmParams p;
    p.feature_mean.assign(d, 0.0);
    p.feature_scale.assign(d, 1.0);
    for (std::size_t i = 0; i < x.rows; ++i)
        for (std::size_t j = 0; j < d; ++j) p.feature_mean[j] += x.row(i)[j];
    for (double& m : p.feature_mean) m /= static_cast<double>(x.rows);
    std::vector<double> var(d, 0.0);
    for (std::size_t i = 0; i < x.rows; ++i)
        for (std::size_t j = 0; j < d; ++j) {
            const double t = x.row(i)[j] - p.feature_mean[j];
            var[j] += t * t;
        }
    for (std::size_t j = 0; j < d; ++j) {
        const double s = std::sqrt(var[j] / static_cast<double>(x.rows));
        p.feature_scale[j] = s > 0.0 ? s : 1.0;
    }
    if (classes.size() < 2) return p;

    Matrix z(x.rows, d);
    for (std::size_t i = 0; i < x.rows; ++i)
        for (std::size_t j = 0; j < d; ++j) z.row(i)[j] = (x.row(i)[j] - p.feature_mean[j]) / p.feature_scale[j];

    std::vector<double> target(x.rows);
    for (const Label c : classes) {
        for (std::size_t i = 0; i < x.rows; ++i) target[i] = y[i] == c ? 1.0 : -1.0;
        std::vector<double>* obj = nullptr;
        if (trace) obj = &trace->objective.emplace_back();
        auto w = pegasos_binary(z, target, derive_seed(seed, "svm-ovr", static_cast<std::uint64_t>(index_of(c))), opt, obj);
        p.bias.push_back(w.back());
        w.pop_back();
        p.weights.push_back(std::move(w));
    }
    return p;
}

}  // namespace detail

/// Trains one classifier. Single-class data always yields a constant classifier.
inline TrainedClassifier train(ClassifierKind kind, const Matrix& x, std::span<const Label> y, std::uint64_t seed,
                               const SvmOptions& svm = {}, SvmTrace* trace = nullptr) {
    if (x.rows == 0 || y.empty()) throw ArgumentError("cannot train on empty data");
    if (x.rows != y.size()) throw ArgumentError("feature rows and labels differ in count");
    for (double v : x.data)
        if (!std::isfinite(v)) throw ArgumentError("non-finite training feature");
    auto classes = detail::distinct_labels(y);
    switch (kind) {
        case ClassifierKind::majority:
            return {kind, x.cols, std::move(classes), MajorityParams{detail::modal_label(y)}};
        case ClassifierKind::naive_bayes: {
            auto p = detail::fit_naive_bayes(x, y, classes);
            return {kind, x.cols, std::move(classes), std::move(p)};
        }
        case ClassifierKind::svm: {
            auto p = detail::fit_svm(x, y, classes, seed, svm, trace);
            return {kind, x.cols, std::move(classes), std::move(p)};
        }
    }
    throw ArgumentError("unknown classifier kind");
}

/// Rows of `x` selected by `rows`.
inline Matrix gather_rows(const Matrix& x, std::span<const std::size_t> rows) {
    Matrix out(rows.size(), x.cols);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto src = x.row(rows[i]);
        std::copy(src.begin(), src.end(), out.row(i).begin());
    }
    return out;
}

// ---------------------------------------------------------------------------
// Per-BPD banks

class BpdClassifierBank {
public:
    BpdClassifierBank() = default;
    BpdClassifierBank(ClassifierKind kind, std::map<int, TrainedClassifier> by_bpd)
        : kind_(kind), by_bpd_(std::move(by_bpd)) {}

    ClassifierKind kind() const noexcept { return kind_; }
    const std::map<int, TrainedClassifier>& classifiers() const noexcept { return by_bpd_; }
    bool contains(int bpd) const { return by_bpd_.contains(bpd); }

    const TrainedClassifier& at(int bpd) const {
        auto it = by_bpd_.find(bpd);
        if (it == by_bpd_.end()) throw MissingBpdError(bpd);
        return it->second;
    }

    /// Throws MissingBpdError for a BPD without training data; callers decide on the fallback.
    Label predict(std::span<const double> x, int bpd) const { return at(bpd).predict(x); }

    friend bool operator==(const BpdClassifierBank&, const BpdClassifierBank&) = default;

private:
    ClassifierKind kind_ = ClassifierKind::majority;
    std::map<int, TrainedClassifier> by_bpd_;
};

/// Trains one classifier per BPD present in `bpd`, every one with the same seed.
inline BpdClassifierBank train_bank(ClassifierKind kind, const Matrix& x, std::span<const Label> y,
                                    std::span<const int> bpd, std::uint64_t seed, unsigned jobs = 1,
                                    const SvmOptions& svm = {}) {
    if (x.rows == 0) throw ArgumentError("cannot train a bank on empty data");
    if (bpd.size() != x.rows || y.size() != x.rows) throw ArgumentError("bank inputs differ in length");
    std::map<int, std::vector<std::size_t>> partitions;
    for (std::size_t i = 0; i < bpd.size(); ++i) partitions[bpd[i]].push_back(i);
    std::vector<int> keys;
    for (const auto& [d, rows] : partitions) keys.push_back(d);
    std::vector<TrainedClassifier> trained(keys.size());
    parallel_for(keys.size(), jobs, [&](std::size_t i) {
        const auto& rows = partitions.at(keys[i]);
        std::vector<Label> labels(rows.size());
        for (std::size_t r = 0; r < rows.size(); ++r) labels[r] = y[rows[r]];
        trained[i] = train(kind, gather_rows(x, rows), labels, seed, svm);
    });
    std::map<int, TrainedClassifier> by_bpd;
    for (std::size_t i = 0; i < keys.size(); ++i) by_bpd.emplace(keys[i], std::move(trained[i]));
    return {kind, std::move(by_bpd)};
}

// ---------------------------------------------------------------------------
// Text serialization
//
//   bpdhar-bank 1
//   kind <majority|naive_bayes|svm>
//   dim <D>
//   bpds <count>
//   then per BPD, ascending:
//     bpd <d>
//     classes <n> <label index>...
//     majority:    label <index>
//     naive_bayes: floor <v>, then per class: prior <p> / mean <D values> / var <D values>
//     svm:         center <D values> / scale <D values>, then per class (only when n > 1):
//                  bias <b> / weights <D values>
//   end

namespace detail {

inline void write_values(std::ostream& out, std::string_view key, std::span<const double> values) {
    out << key;
    for (double v : values) out << ' ' << text::format_double(v);
    out << '\n';
}

class TokenReader {
public:
    explicit TokenReader(std::istream& in) : reader_(in, "bank") {}

    std::vector<std::string_view> line(std::string_view key, std::size_t min_fields = 1) {
        std::string raw;
        do {
            if (!reader_.next(raw)) reader_.fail("unexpected end of file, expected '" + std::string(key) + "'");
        } while (text::trim(raw).empty());
        current_ = raw;
        fields_.clear();
        for (auto f : text::split(current_, ' '))
            if (!f.empty()) fields_.push_back(f);
        if (fields_.empty() || fields_.front() != key || fields_.size() < min_fields)
            reader_.fail("expected '" + std::string(key) + "'");
        return fields_;
    }

    template <typename T>
    T number(std::string_view s) {
        auto v = text::parse_number<T>(s);
        if (!v) reader_.fail("malformed number '" + std::string(s) + "'");
        return *v;
    }

    std::vector<double> values(std::string_view key, std::size_t count) {
        auto f = line(key);
        if (f.size() != count + 1) reader_.fail("expected " + std::to_string(count) + " values after " + std::string(key));
        std::vector<double> out(count);
        for (std::size_t i = 0; i < count; ++i) out[i] = number<double>(f[i + 1]);
        return out;
    }

    [[noreturn]] void fail(const std::string& what) { reader_.fail(what); }

private:
    text::LineReader reader_;
    std::string current_;
    std::vector<std::string_view> fields_;
};

}  // namespace detail

inline void save_bank(std::ostream& out, const BpdClassifierBank& bank) {
    out << "bpdhar-bank 1\n";
    out << "kind " << name_of(bank.kind()) << '\n';
    const std::size_t dim = bank.classifiers().empty() ? 0 : bank.classifiers().begin()->second.dim();
    out << "dim " << dim << '\n';
    out << "bpds " << bank.classifiers().size() << '\n';
    for (const auto& [d, c] : bank.classifiers()) {
        out << "bpd " << d << '\n';
        out << "classes " << c.classes_seen().size();
        for (Label l : c.classes_seen()) out << ' ' << index_of(l);
        out << '\n';
        std::visit(
            [&](const auto& p) {
                using P = std::decay_t<decltype(p)>;
                if constexpr (std::is_same_v<P, MajorityParams>) {
                    out << "label " << index_of(p.label) << '\n';
                } else if constexpr (std::is_same_v<P, NaiveBayesParams>) {
                    out << "floor " << text::format_double(p.var_floor) << '\n';
                    for (std::size_t k = 0; k < p.prior.size(); ++k) {
                        out << "prior " << text::format_double(p.prior[k]) << '\n';
                        detail::write_values(out, "mean", p.mean[k]);
                        detail::write_values(out, "var", p.var[k]);
                    }
                } else {
                    detail::write_values(out, "center", p.feature_mean);
                    detail::write_values(out, "scale", p.feature_scale);
                    for (std::size_t k = 0; k < p.weights.size(); ++k) {
                        out << "bias " << text::format_double(p.bias[k]) << '\n';
                        detail::write_values(out, "weights", p.weights[k]);
                    }
                }
            },
            c.params());
    }
    out << "end\n";
}

inline BpdClassifierBank load_bank(std::istream& in) {
    detail::TokenReader r(in);
    auto header = r.line("bpdhar-bank", 2);
    if (header[1] != "1") r.fail("unsupported bank format version");
    auto kind = parse_classifier_kind(r.line("kind", 2)[1]);
    if (!kind) r.fail("unknown classifier kind");
    const auto dim = r.number<std::size_t>(r.line("dim", 2)[1]);
    const auto count = r.number<std::size_t>(r.line("bpds", 2)[1]);
    std::map<int, TrainedClassifier> by_bpd;
    for (std::size_t b = 0; b < count; ++b) {
        const int d = r.number<int>(r.line("bpd", 2)[1]);
        auto cf = r.line("classes", 2);
        const auto n = r.number<std::size_t>(cf[1]);
        if (n == 0 || cf.size() != n + 2) r.fail("malformed class list");
        std::vector<Label> classes;
        for (std::size_t i = 0; i < n; ++i) {
            const int idx = r.number<int>(cf[i + 2]);
            if (idx < 0 || idx >= static_cast<int>(kLabelCount)) r.fail("label index out of range");
            classes.push_back(static_cast<Label>(idx));
        }
        TrainedClassifier::Params params;
        switch (*kind) {
            case ClassifierKind::majority: {
                const int idx = r.number<int>(r.line("label", 2)[1]);
                if (idx < 0 || idx >= static_cast<int>(kLabelCount)) r.fail("label index out of range");
                params = MajorityParams{static_cast<Label>(idx)};
                break;
            }
            case ClassifierKind::naive_bayes: {
                NaiveBayesParams p;
                p.var_floor = r.number<double>(r.line("floor", 2)[1]);
                for (std::size_t k = 0; k < n; ++k) {
                    p.prior.push_back(r.number<double>(r.line("prior", 2)[1]));
                    p.mean.push_back(r.values("mean", dim));
                    p.var.push_back(r.values("var", dim));
                }
                p.finalize();
                params = std::move(p);
                break;
            }
            case ClassifierKind::svm: {
                SvmParams p;
                p.feature_mean = r.values("center", dim);
                p.feature_scale = r.values("scale", dim);
                if (n > 1)
                    for (std::size_t k = 0; k < n; ++k) {
                        p.bias.push_back(r.number<double>(r.line("bias", 2)[1]));
                        p.weights.push_back(r.values("weights", dim));
                    }
                params = std::move(p);
                break;
            }
        }
        if (!by_bpd.emplace(d, TrainedClassifier(*kind, dim, std::move(classes), std::move(params))).second)
            r.fail("duplicate bpd " + std::to_string(d));
    }
    r.line("end");
    return {*kind, std::move(by_bpd)};
}

}  // namespace bpdhar
