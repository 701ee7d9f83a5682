#include "imb/loss.hpp"

#include <algorithm>
#include <cmath>

#include "imb/error.hpp"

namespace imb {

namespace {

struct RowStats {
  std::vector<double> p;
  double log_p_true = 0.0;
  double one_minus_p = 0.0;  // sum of the other probabilities, exact near p = 1
};

RowStats row_stats(std::span<const double> z, std::uint32_t y) {
  const double zmax = *std::max_element(z.begin(), z.end());
  RowStats s;
  s.p.resize(z.size());
  double denom = 0.0;
  for (std::size_t j = 0; j < z.size(); ++j) {
    s.p[j] = std::exp(z[j] - zmax);
    denom += s.p[j];
  }
  for (std::size_t j = 0; j < z.size(); ++j) {
    s.p[j] /= denom;
    if (j != y) s.one_minus_p += s.p[j];
  }
  s.log_p_true = std::max(z[y] - zmax - std::log(denom), std::log(kMinProbability));
  return s;
}

void check_batch(const Tensor& logits, std::span<const std::uint32_t> labels) {
  if (logits.rank() != 2) throw ValidationError("logits must be (batch, classes)");
  if (logits.dim(0) != labels.size())
    throw ValidationError("logit rows and label count differ");
  for (auto y : labels)
    if (y >= logits.dim(1)) throw ValidationError("label out of range for logits");
}

}  // namespace

std::vector<double> softmax(std::span<const double> logits) {
  if (logits.empty()) return {};
  const double zmax = *std::max_element(logits.begin(), logits.end());
  std::vector<double> p(logits.size());
  double denom = 0.0;
  for (std::size_t j = 0; j < p.size(); ++j) {
    p[j] = std::exp(logits[j] - zmax);
    denom += p[j];
  }
  for (auto& v : p) v /= denom;
  return p;
}

Tensor softmax_rows(const Tensor& logits) {
  if (logits.rank() != 2) throw ValidationError("softmax_rows expects (batch, classes)");
  Tensor out(logits.shape());
  const std::size_t k = logits.dim(1);
  for (std::size_t b = 0; b < logits.dim(0); ++b) {
    const auto p = softmax(logits.values().subspan(b * k, k));
    std::copy(p.begin(), p.end(), out.data() + b * k);
  }
  return out;
}

LossValue cross_entropy(const Tensor& logits, std::span<const std::uint32_t> labels) {
  check_batch(logits, labels);
  const std::size_t n = logits.dim(0), k = logits.dim(1);
  LossValue out{0.0, Tensor(logits.shape())};
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t b = 0; b < n; ++b) {
    const auto s = row_stats(logits.values().subspan(b * k, k), labels[b]);
    out.loss += -s.log_p_true;
    for (std::size_t j = 0; j < k; ++j)
      out.grad[b * k + j] = (s.p[j] - (j == labels[b] ? 1.0 : 0.0)) * inv_n;
  }
  out.loss *= inv_n;
  return out;
}

LossValue focal(const Tensor& logits, std::span<const std::uint32_t> labels,
                const FocalParams& params) {
  check_batch(logits, labels);
  if (!(params.gamma >= 0.0) || !std::isfinite(params.gamma))
    throw ValidationError("focal gamma must be finite and >= 0");
  const std::size_t n = logits.dim(0), k = logits.dim(1);
  if (!params.alpha.empty() && params.alpha.size() != k)
    throw ValidationError("focal alpha needs one weight per class");

  const double gamma = params.gamma;
  LossValue out{0.0, Tensor(logits.shape())};
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t b = 0; b < n; ++b) {
    const auto y = labels[b];
    const double alpha = params.alpha.empty() ? 1.0 : params.alpha[y];
    const auto s = row_stats(logits.values().subspan(b * k, k), y);
    const double q = s.one_minus_p;
    const double p = s.p[y];
    const double modulator = std::pow(q, gamma);
    out.loss += -alpha * modulator * s.log_p_true;

    // dL/dz_j = -alpha [q^g - g p q^(g-1) log p] (onehot_j - p_j)
    double log_term = 0.0;
    if (gamma != 0.0 && q > 0.0) log_term = gamma * p * std::pow(q, gamma - 1.0) * s.log_p_true;
    const double coeff = -alpha * (modulator - log_term) * inv_n;
    for (std::size_t j = 0; j < k; ++j)
      out.grad[b * k + j] = coeff * ((j == y ? 1.0 : 0.0) - s.p[j]);
  }
  out.loss *= inv_n;
  return out;
}

double focal_term(double p_true, double gamma, double alpha) {
  const double p = std::max(p_true, kMinProbability);
  return -alpha * std::pow(1.0 - p_true, gamma) * std::log(p);
}

}  // namespace imb
