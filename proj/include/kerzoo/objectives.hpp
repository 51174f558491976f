#pragma once

// Forward-only loss oracles with known structure. Each objective exposes
// eval(theta, batch) for the optimizers, and exact_grad(theta, batch) for
// validation only; optimizers see objectives through forward_only<>.

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "kerzoo/random.hpp"
#include "kerzoo/vector_ops.hpp"

namespace kerzoo {

template <class O>
concept forward_objective = requires(const O& o, std::span<const double> theta, std::size_t b) {
  { o.dim() } -> std::convertible_to<std::size_t>;
  { o.batch_count() } -> std::convertible_to<std::size_t>;
  { o.eval(theta, b) } -> std::convertible_to<double>;
};

template <class O>
concept gradient_objective =
    forward_objective<O> && requires(const O& o, std::span<const double> theta, std::size_t b) {
      { o.exact_grad(theta, b) } -> std::convertible_to<dvec>;
    };

/// Narrows any objective to its forward interface. Optimizer code paths only
/// ever hold one of these, so exact gradients are unreachable from them.
template <forward_objective O>
class forward_only {
 public:
  explicit forward_only(const O& objective) : objective_(&objective) {}
  std::size_t dim() const { return objective_->dim(); }
  std::size_t batch_count() const { return objective_->batch_count(); }
  double eval(std::span<const double> theta, std::size_t batch) const {
    return objective_->eval(theta, batch);
  }

 private:
  const O* objective_;
};

/// Mean loss over all batches.
template <forward_objective O>
double full_loss(const O& o, std::span<const double> theta) {
  const std::size_t nb = o.batch_count();
  double sum = 0.0;
  for (std::size_t b = 0; b < nb; ++b) sum += o.eval(theta, b);
  return sum / static_cast<double>(nb);
}

template <gradient_objective O>
dvec full_grad(const O& o, std::span<const double> theta) {
  const std::size_t nb = o.batch_count();
  dvec g(o.dim(), 0.0);
  for (std::size_t b = 0; b < nb; ++b) {
    const dvec gb = o.exact_grad(theta, b);
    for (std::size_t k = 0; k < g.size(); ++k) g[k] += gb[k];
  }
  for (double& v : g) v /= static_cast<double>(nb);
  return g;
}

namespace detail {

inline void check_theta(std::span<const double> theta, std::size_t d, const char* who) {
  require_same_size(theta.size(), d, who);
}

inline void check_batch(std::size_t b, std::size_t count) {
  if (b >= count)
    throw std::out_of_range("batch id " + std::to_string(b) + " out of range (" +
                            std::to_string(count) + " batches)");
}

inline double softplus(double z) noexcept {
  return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z)));
}

inline double sigmoid(double z) noexcept {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

}  // namespace detail

/// L(theta) = 1/2 theta^T A theta with A = Q diag(lambda) Q^T, lambda
/// log-spaced in [1, condition_number], Q a seeded random rotation.
class quadratic {
 public:
  quadratic(std::size_t d, double condition_number, std::uint64_t seed)
      : d_(d), condition_number_(condition_number) {
    if (d == 0) throw std::invalid_argument("quadratic: dimension must be >= 1");
    if (!(condition_number >= 1.0)) throw std::invalid_argument("quadratic: condition_number must be >= 1");
    eigenvalues_.resize(d);
    for (std::size_t k = 0; k < d; ++k)
      eigenvalues_[k] = d == 1 ? 1.0
                               : std::pow(condition_number, static_cast<double>(k) /
                                                                static_cast<double>(d - 1));
    rotated_ = condition_number != 1.0;
    if (rotated_) build_rotation(seed);
  }

  std::size_t dim() const noexcept { return d_; }
  std::size_t batch_count() const noexcept { return 1; }
  std::optional<double> optimum() const noexcept { return 0.0; }
  std::optional<int> polynomial_degree() const noexcept { return 2; }
  const dvec& eigenvalues() const noexcept { return eigenvalues_; }

  double eval(std::span<const double> theta, std::size_t batch) const {
    detail::check_theta(theta, d_, "quadratic");
    detail::check_batch(batch, 1);
    double sum = 0.0;
    for (std::size_t k = 0; k < d_; ++k) {
      const double c = coordinate(theta, k);
      sum += eigenvalues_[k] * c * c;
    }
    return 0.5 * sum;
  }

  dvec exact_grad(std::span<const double> theta, std::size_t batch) const {
    detail::check_theta(theta, d_, "quadratic");
    detail::check_batch(batch, 1);
    dvec g(d_, 0.0);
    for (std::size_t k = 0; k < d_; ++k) {
      const double c = eigenvalues_[k] * coordinate(theta, k);
      if (!rotated_) {
        g[k] = c;
        continue;
      }
      for (std::size_t j = 0; j < d_; ++j) g[j] += c * basis_[k * d_ + j];
    }
    return g;
  }

 private:
  // q_k^T theta, or theta_k when unrotated.
  double coordinate(std::span<const double> theta, std::size_t k) const {
    if (!rotated_) return theta[k];
    return dot(std::span<const double>(basis_.data() + k * d_, d_), theta);
  }

  // Rows of basis_ are an orthonormal basis from modified Gram-Schmidt
  // (two passes) on a seeded Gaussian matrix.
  void build_rotation(std::uint64_t seed) {
    basis_.resize(d_ * d_);
    for (std::size_t k = 0; k < d_; ++k) {
      std::span<double> row(basis_.data() + k * d_, d_);
      fill_gaussian(counter_stream(seed, k, stream::rotation), row);
    }
    for (std::size_t k = 0; k < d_; ++k) {
      std::span<double> row(basis_.data() + k * d_, d_);
      for (int pass = 0; pass < 2; ++pass) {
        for (std::size_t j = 0; j < k; ++j) {
          std::span<const double> prev(basis_.data() + j * d_, d_);
          const double proj = dot(prev, row);
          for (std::size_t i = 0; i < d_; ++i) row[i] -= proj * prev[i];
        }
      }
      const double n = norm(row);
      for (double& v : row) v /= n;
    }
  }

  std::size_t d_;
  double condition_number_;
  dvec eigenvalues_;
  dvec basis_;
  bool rotated_ = false;
};

/// L(theta) = sum_k c1_k theta_k + c3_k theta_k^3 + c5_k theta_k^5. A probe
/// with constant third (and fifth) derivatives.
class odd_poly {
 public:
  odd_poly(dvec c1, dvec c3, dvec c5 = {})
      : c1_(std::move(c1)), c3_(std::move(c3)), c5_(std::move(c5)) {
    if (c1_.empty()) throw std::invalid_argument("odd_poly: empty coefficient vector");
    if (c5_.empty()) c5_.assign(c1_.size(), 0.0);
    require_same_size(c3_.size(), c1_.size(), "odd_poly c3");
    require_same_size(c5_.size(), c1_.size(), "odd_poly c5");
  }

  std::size_t dim() const noexcept { return c1_.size(); }
  std::size_t batch_count() const noexcept { return 1; }
  std::optional<double> optimum() const noexcept { return std::nullopt; }
  std::optional<int> polynomial_degree() const noexcept {
    const auto nonzero = [](const dvec& c) {
      return std::any_of(c.begin(), c.end(), [](double v) { return v != 0.0; });
    };
    if (nonzero(c5_)) return 5;
    if (nonzero(c3_)) return 3;
    return 1;
  }

  double eval(std::span<const double> theta, std::size_t batch) const {
    detail::check_theta(theta, dim(), "odd_poly");
    detail::check_batch(batch, 1);
    double sum = 0.0;
    for (std::size_t k = 0; k < dim(); ++k) {
      const double x = theta[k];
      const double x2 = x * x;
      sum += x * (c1_[k] + x2 * (c3_[k] + x2 * c5_[k]));
    }
    return sum;
  }

  dvec exact_grad(std::span<const double> theta, std::size_t batch) const {
    detail::check_theta(theta, dim(), "odd_poly");
    detail::check_batch(batch, 1);
    dvec g(dim());
    for (std::size_t k = 0; k < dim(); ++k) {
      const double x2 = theta[k] * theta[k];
      g[k] = c1_[k] + x2 * (3.0 * c3_[k] + x2 * 5.0 * c5_[k]);
    }
    return g;
  }

 private:
  dvec c1_, c3_, c5_;
};

/// Chained Rosenbrock, minimizer (1, ..., 1).
class rosenbrock {
 public:
  explicit rosenbrock(std::size_t d) : d_(d) {
    if (d < 2) throw std::invalid_argument("rosenbrock: dimension must be >= 2");
  }

  std::size_t dim() const noexcept { return d_; }
  std::size_t batch_count() const noexcept { return 1; }
  std::optional<double> optimum() const noexcept { return 0.0; }
  std::optional<int> polynomial_degree() const noexcept { return 4; }

  double eval(std::span<const double> x, std::size_t batch) const {
    detail::check_theta(x, d_, "rosenbrock");
    detail::check_batch(batch, 1);
    double sum = 0.0;
    for (std::size_t i = 0; i + 1 < d_; ++i) {
      const double a = x[i + 1] - x[i] * x[i];
      const double b = 1.0 - x[i];
      sum += 100.0 * a * a + b * b;
    }
    return sum;
  }

  dvec exact_grad(std::span<const double> x, std::size_t batch) const {
    detail::check_theta(x, d_, "rosenbrock");
    detail::check_batch(batch, 1);
    dvec g(d_, 0.0);
    for (std::size_t i = 0; i + 1 < d_; ++i) {
      const double a = x[i + 1] - x[i] * x[i];
      g[i] += -400.0 * x[i] * a - 2.0 * (1.0 - x[i]);
      g[i + 1] += 200.0 * a;
    }
    return g;
  }

 private:
  std::size_t d_;
};

/// Row-major sample matrix with integer labels, sharded into contiguous
/// batches of batch_size (the last shard may be shorter).
struct labeled_dataset {
  std::size_t features = 0;
  dvec x;
  std::vector<int> y;
  std::size_t batch_size = 1;

  std::size_t samples() const noexcept { return y.size(); }
  std::size_t batch_count() const noexcept { return (samples() + batch_size - 1) / batch_size; }
  std::pair<std::size_t, std::size_t> shard(std::size_t b) const {
    detail::check_batch(b, batch_count());
    return {b * batch_size, std::min(samples(), (b + 1) * batch_size)};
  }
  std::span<const double> row(std::size_t i) const {
    return {x.data() + i * features, features};
  }
};

/// Gaussian class blobs: sample i has label i % classes and features
/// center[label] + N(0, I). Centers are seeded Gaussian directions scaled to
/// norm `separation`; with two classes they are +/- the same direction.
inline labeled_dataset make_blobs(std::size_t features, std::size_t classes, std::size_t samples,
                                  std::size_t batch_size, double separation, std::uint64_t seed) {
  if (batch_size == 0 || batch_size > samples)
    throw std::invalid_argument("dataset: need 1 <= batch_size <= samples");
  if (classes < 2) throw std::invalid_argument("dataset: need at least two classes");
  std::vector<dvec> centers(classes, dvec(features));
  for (std::size_t c = 0; c < classes; ++c) {
    if (classes == 2 && c == 1) {
      for (std::size_t k = 0; k < features; ++k) centers[1][k] = -centers[0][k];
      break;
    }
    fill_gaussian(counter_stream(seed, c, stream::dataset), centers[c]);
    const double n = norm(centers[c]);
    for (double& v : centers[c]) v *= separation / n;
  }
  labeled_dataset data;
  data.features = features;
  data.batch_size = batch_size;
  data.x.resize(samples * features);
  data.y.resize(samples);
  dvec noise(features);
  for (std::size_t i = 0; i < samples; ++i) {
    const int label = static_cast<int>(i % classes);
    fill_gaussian(counter_stream(seed, classes + i, stream::dataset), noise);
    for (std::size_t k = 0; k < features; ++k)
      data.x[i * features + k] = centers[label][k] + noise[k];
    data.y[i] = label;
  }
  return data;
}

/// Binary cross-entropy of a linear classifier p = sigmoid(theta^T x) over
/// two Gaussian blobs. Batch b is shard b of the dataset.
class logistic_synth {
 public:
  logistic_synth(std::size_t d, std::size_t n_samples, std::size_t batch_size, std::uint64_t seed,
                 double separation = 2.0)
      : data_(make_blobs(d, 2, n_samples, batch_size, separation, seed)) {
    if (d == 0) throw std::invalid_argument("logistic_synth: dimension must be >= 1");
  }

  std::size_t dim() const noexcept { return data_.features; }
  std::size_t batch_count() const noexcept { return data_.batch_count(); }
  std::optional<double> optimum() const noexcept { return std::nullopt; }
  std::optional<int> polynomial_degree() const noexcept { return std::nullopt; }
  const labeled_dataset& data() const noexcept { return data_; }

  double eval(std::span<const double> theta, std::size_t batch) const {
    detail::check_theta(theta, dim(), "logistic_synth");
    const auto [lo, hi] = data_.shard(batch);
    double sum = 0.0;
    for (std::size_t i = lo; i < hi; ++i) {
      const double z = dot(theta, data_.row(i));
      sum += detail::softplus(z) - data_.y[i] * z;
    }
    return sum / static_cast<double>(hi - lo);
  }

  dvec exact_grad(std::span<const double> theta, std::size_t batch) const {
    detail::check_theta(theta, dim(), "logistic_synth");
    const auto [lo, hi] = data_.shard(batch);
    dvec g(dim(), 0.0);
    for (std::size_t i = lo; i < hi; ++i) {
      const auto x = data_.row(i);
      const double r = detail::sigmoid(dot(theta, x)) - data_.y[i];
      for (std::size_t k = 0; k < g.size(); ++k) g[k] += r * x[k];
    }
    for (double& v : g) v /= static_cast<double>(hi - lo);
    return g;
  }

 private:
  labeled_dataset data_;
};

/// One-hidden-layer tanh network with softmax cross-entropy.
///
/// Parameter layout is layer-major; each layer stores its weight matrix
/// [outputs x inputs] row-major followed by its bias vector:
///   W1 (hidden x inputs), b1 (hidden), W2 (classes x hidden), b2 (classes).
class tiny_mlp {
 public:
  static constexpr std::size_t max_parameters = 10000;

  tiny_mlp(std::size_t inputs, std::size_t hidden, std::size_t classes, std::uint64_t dataset_seed,
           std::size_t n_samples, std::size_t batch_size, double separation = 2.0)
      : inputs_(inputs), hidden_(hidden), classes_(classes) {
    if (inputs == 0 || hidden == 0) throw std::invalid_argument("tiny_mlp: empty layer");
    if (parameter_count(inputs, hidden, classes) > max_parameters)
      throw std::invalid_argument("tiny_mlp: more than 10^4 parameters");
    data_ = make_blobs(inputs, classes, n_samples, batch_size, separation, dataset_seed);
  }

  static constexpr std::size_t parameter_count(std::size_t in, std::size_t h, std::size_t out) {
    return (in + 1) * h + (h + 1) * out;
  }

  std::size_t dim() const noexcept { return parameter_count(inputs_, hidden_, classes_); }
  std::size_t batch_count() const noexcept { return data_.batch_count(); }
  std::optional<double> optimum() const noexcept { return std::nullopt; }
  std::optional<int> polynomial_degree() const noexcept { return std::nullopt; }
  const labeled_dataset& data() const noexcept { return data_; }

  double eval(std::span<const double> theta, std::size_t batch) const {
    detail::check_theta(theta, dim(), "tiny_mlp");
    const auto [lo, hi] = data_.shard(batch);
    dvec act(hidden_), logits(classes_);
    double sum = 0.0;
    for (std::size_t i = lo; i < hi; ++i) {
      forward(theta, data_.row(i), act, logits);
      sum += log_sum_exp(logits) - logits[static_cast<std::size_t>(data_.y[i])];
    }
    return sum / static_cast<double>(hi - lo);
  }

  dvec exact_grad(std::span<const double> theta, std::size_t batch) const {
    detail::check_theta(theta, dim(), "tiny_mlp");
    const auto [lo, hi] = data_.shard(batch);
    const std::size_t w2_off = (inputs_ + 1) * hidden_;
    const std::size_t b2_off = w2_off + classes_ * hidden_;
    const std::size_t b1_off = inputs_ * hidden_;
    dvec g(dim(), 0.0);
    dvec act(hidden_), logits(classes_), dlogit(classes_), dpre(hidden_);
    for (std::size_t i = lo; i < hi; ++i) {
      const auto x = data_.row(i);
      forward(theta, x, act, logits);
      const double lse = log_sum_exp(logits);
      for (std::size_t c = 0; c < classes_; ++c)
        dlogit[c] = std::exp(logits[c] - lse) - (static_cast<int>(c) == data_.y[i] ? 1.0 : 0.0);
      for (std::size_t h = 0; h < hidden_; ++h) {
        double back = 0.0;
        for (std::size_t c = 0; c < classes_; ++c) {
          g[w2_off + c * hidden_ + h] += dlogit[c] * act[h];
          back += theta[w2_off + c * hidden_ + h] * dlogit[c];
        }
        dpre[h] = back * (1.0 - act[h] * act[h]);
      }
      for (std::size_t c = 0; c < classes_; ++c) g[b2_off + c] += dlogit[c];
      for (std::size_t h = 0; h < hidden_; ++h) {
        for (std::size_t k = 0; k < inputs_; ++k) g[h * inputs_ + k] += dpre[h] * x[k];
        g[b1_off + h] += dpre[h];
      }
    }
    for (double& v : g) v /= static_cast<double>(hi - lo);
    return g;
  }

 private:
  void forward(std::span<const double> theta, std::span<const double> x, dvec& act,
               dvec& logits) const {
    const std::size_t b1_off = inputs_ * hidden_;
    const std::size_t w2_off = (inputs_ + 1) * hidden_;
    const std::size_t b2_off = w2_off + classes_ * hidden_;
    for (std::size_t h = 0; h < hidden_; ++h) {
      double pre = theta[b1_off + h];
      for (std::size_t k = 0; k < inputs_; ++k) pre += theta[h * inputs_ + k] * x[k];
      act[h] = std::tanh(pre);
    }
    for (std::size_t c = 0; c < classes_; ++c) {
      double z = theta[b2_off + c];
      for (std::size_t h = 0; h < hidden_; ++h) z += theta[w2_off + c * hidden_ + h] * act[h];
      logits[c] = z;
    }
  }

  static double log_sum_exp(const dvec& z) {
    const double m = *std::max_element(z.begin(), z.end());
    double s = 0.0;
    for (double v : z) s += std::exp(v - m);
    return m + std::log(s);
  }

  std::size_t inputs_, hidden_, classes_;
  labeled_dataset data_;
};

/// Runtime-selected objective for the config-driven harness.
class any_objective {
 public:
  using variant_type = std::variant<quadratic, odd_poly, rosenbrock, logistic_synth, tiny_mlp>;

  template <class O>
    requires std::constructible_from<variant_type, O>
  any_objective(O o) : impl_(std::move(o)) {}

  std::size_t dim() const {
    return std::visit([](const auto& o) -> std::size_t { return o.dim(); }, impl_);
  }
  std::size_t batch_count() const {
    return std::visit([](const auto& o) -> std::size_t { return o.batch_count(); }, impl_);
  }
  double eval(std::span<const double> theta, std::size_t b) const {
    return std::visit([&](const auto& o) { return o.eval(theta, b); }, impl_);
  }
  dvec exact_grad(std::span<const double> theta, std::size_t b) const {
    return std::visit([&](const auto& o) { return o.exact_grad(theta, b); }, impl_);
  }
  std::optional<double> optimum() const {
    return std::visit([](const auto& o) { return o.optimum(); }, impl_);
  }
  std::optional<int> polynomial_degree() const {
    return std::visit([](const auto& o) { return o.polynomial_degree(); }, impl_);
  }
  const labeled_dataset* dataset() const {
    if (const auto* l = std::get_if<logistic_synth>(&impl_)) return &l->data();
    if (const auto* m = std::get_if<tiny_mlp>(&impl_)) return &m->data();
    return nullptr;
  }
  const variant_type& get() const noexcept { return impl_; }

 private:
  variant_type impl_;
};

/// L* when the objective knows it.
template <forward_objective O>
std::optional<double> known_optimum(const O& o) {
  if constexpr (requires { o.optimum(); })
    return o.optimum();
  else
    return std::nullopt;
}

template <forward_objective O>
std::optional<int> known_polynomial_degree(const O& o) {
  if constexpr (requires { o.polynomial_degree(); })
    return o.polynomial_degree();
  else
    return std::nullopt;
}

}  // namespace kerzoo
