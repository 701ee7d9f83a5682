#include "imb/oversample.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "imb/error.hpp"
#include "imb/knn.hpp"

namespace imb {

Tensor interpolate(const Tensor& parent, const Tensor& neighbor, double lambda,
                   const std::vector<double>* jitter) {
  if (parent.shape() != neighbor.shape())
    throw ValidationError("interpolation endpoints differ in shape");
  if (jitter && jitter->size() != parent.size())
    throw ValidationError("jitter length does not match sample size");
  Tensor x(parent.shape());
  for (std::size_t j = 0; j < x.size(); ++j) {
    x[j] = parent[j] + lambda * (neighbor[j] - parent[j]);
    if (jitter) x[j] = x[j] + (*jitter)[j];
  }
  return x;
}

std::vector<std::size_t> largest_remainder(const std::vector<double>& weights,
                                           std::size_t total) {
  const std::size_t n = weights.size();
  if (n == 0) {
    if (total != 0) throw ValidationError("cannot allocate to zero recipients");
    return {};
  }
  double sum = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w))
      throw ValidationError("allocation weights must be finite and non-negative");
    sum += w;
  }
  std::vector<double> quota(n);
  for (std::size_t i = 0; i < n; ++i)
    quota[i] = sum > 0.0 ? weights[i] / sum * static_cast<double>(total)
                         : static_cast<double>(total) / static_cast<double>(n);

  std::vector<std::size_t> out(n);
  std::vector<double> frac(n);
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = static_cast<std::size_t>(std::floor(quota[i]));
    frac[i] = quota[i] - std::floor(quota[i]);
    assigned += out[i];
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](auto a, auto b) { return frac[a] > frac[b]; });
  for (std::size_t r = 0; assigned < total; ++r, ++assigned) ++out[order[r % n]];
  return out;
}

namespace {

std::size_t majority_count(const Dataset& ds) {
  const auto hist = class_histogram(ds);
  return hist.empty() ? 0 : *std::max_element(hist.begin(), hist.end());
}

void check_class_size(std::size_t members, std::size_t k, std::size_t cls) {
  if (k == 0) throw ValidationError("oversampling needs k >= 1");
  if (members <= k)
    throw ValidationError("class " + std::to_string(cls) + " has " +
                          std::to_string(members) + " samples; need more than k = " +
                          std::to_string(k));
}

// k nearest same-class neighbors for every member, in member order.
std::vector<std::vector<std::size_t>> same_class_neighbors(
    const Dataset& ds, const std::vector<std::size_t>& members, std::size_t k) {
  std::vector<std::vector<std::size_t>> out;
  out.reserve(members.size());
  for (auto i : members) out.push_back(knn_among(ds.samples, members, i, k));
  return out;
}

std::vector<double> class_feature_std(const Dataset& ds,
                                      const std::vector<std::size_t>& members) {
  const std::size_t d = ds.samples.front().size();
  std::vector<double> mean(d, 0.0), var(d, 0.0);
  for (auto i : members)
    for (std::size_t j = 0; j < d; ++j) mean[j] += ds.samples[i][j];
  for (auto& m : mean) m /= static_cast<double>(members.size());
  for (auto i : members)
    for (std::size_t j = 0; j < d; ++j) {
      const double diff = ds.samples[i][j] - mean[j];
      var[j] += diff * diff;
    }
  for (auto& v : var) v = std::sqrt(v / static_cast<double>(members.size()));
  return var;
}

}  // namespace

Resampled smote(const Dataset& ds, const SmoteParams& p, RngStream& stream) {
  ds.validate();
  Resampled out{ds, {}};
  const auto members = class_members(ds);
  const auto target = majority_count(ds);

  for (std::size_t c = 0; c < members.size(); ++c) {
    const auto& idx = members[c];
    if (idx.empty() || idx.size() >= target) continue;
    check_class_size(idx.size(), p.k, c);
    const auto neighbors = same_class_neighbors(ds, idx, p.k);
    for (std::size_t made = idx.size(); made < target; ++made) {
      const auto pick = stream.uniform_index(idx.size());
      const auto parent = idx[pick];
      const auto nn = neighbors[pick][stream.uniform_index(p.k)];
      const double lambda = stream.uniform(0.0, 1.0);
      out.data.samples.push_back(interpolate(ds.samples[parent], ds.samples[nn], lambda));
      out.data.labels.push_back(static_cast<std::uint32_t>(c));
      out.log.entries.push_back(
          {"smote", static_cast<std::uint32_t>(c), parent, nn, lambda, std::nullopt});
    }
  }
  return out;
}

std::vector<double> adasyn_ratios(const Dataset& ds, std::uint32_t cls, std::size_t k) {
  if (k == 0 || k >= ds.size())
    throw ValidationError("adasyn needs 0 < k < number of samples");
  std::vector<double> r;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    if (ds.labels[i] != cls) continue;
    const auto nn = knn_indices(ds.samples, i, k);
    const auto foreign = std::count_if(nn.begin(), nn.end(),
                                       [&](auto j) { return ds.labels[j] != cls; });
    r.push_back(static_cast<double>(foreign) / static_cast<double>(k));
  }
  return r;
}

Resampled adasyn(const Dataset& ds, const AdasynParams& p, RngStream& stream) {
  ds.validate();
  if (!(p.beta > 0.0 && p.beta <= 1.0)) throw ValidationError("adasyn beta must lie in (0, 1]");
  if (!(p.jitter_scale >= 0.0) || !std::isfinite(p.jitter_scale))
    throw ValidationError("adasyn jitter scale must be finite and non-negative");
  Resampled out{ds, {}};
  const auto members = class_members(ds);
  const auto n_major = majority_count(ds);

  for (std::size_t c = 0; c < members.size(); ++c) {
    const auto& idx = members[c];
    if (idx.empty() || idx.size() >= n_major) continue;
    check_class_size(idx.size(), p.k, c);

    const auto gap = static_cast<double>(n_major - idx.size());
    const auto total = static_cast<std::size_t>(std::llround(p.beta * gap));
    const auto ratios = adasyn_ratios(ds, static_cast<std::uint32_t>(c), p.k);
    const double ratio_sum = std::accumulate(ratios.begin(), ratios.end(), 0.0);
    const bool uniform = ratio_sum == 0.0;
    const auto counts = largest_remainder(ratios, total);

    const auto neighbors = same_class_neighbors(ds, idx, p.k);
    const auto sd = class_feature_std(ds, idx);
    const char* method = uniform ? "adasyn_uniform" : "adasyn";

    for (std::size_t m = 0; m < idx.size(); ++m) {
      for (std::size_t g = 0; g < counts[m]; ++g) {
        const auto parent = idx[m];
        const auto nn = neighbors[m][stream.uniform_index(p.k)];
        const double lambda = stream.uniform(0.0, 1.0);
        std::vector<double> jitter(sd.size());
        for (std::size_t j = 0; j < sd.size(); ++j)
          jitter[j] = p.jitter_scale * sd[j] * stream.normal();
        out.data.samples.push_back(
            interpolate(ds.samples[parent], ds.samples[nn], lambda, &jitter));
        out.data.labels.push_back(static_cast<std::uint32_t>(c));
        out.log.entries.push_back(
            {method, static_cast<std::uint32_t>(c), parent, nn, lambda, std::move(jitter)});
      }
    }
  }
  return out;
}

Dataset replay(const Dataset& original, const ResampleLog& log) {
  Dataset out = original;
  for (const auto& e : log.entries) {
    if (e.parent >= original.size())
      throw ValidationError("log parent index out of range");
    const Tensor& parent = original.samples[e.parent];
    Tensor x;
    if (e.method == "smote" || e.method == "adasyn" || e.method == "adasyn_uniform") {
      if (!e.neighbor || *e.neighbor >= original.size())
        throw ValidationError("interpolation entry without a valid neighbor");
      x = interpolate(parent, original.samples[*e.neighbor], e.lambda,
                      e.jitter ? &*e.jitter : nullptr);
    } else if (e.method.starts_with("augment_")) {
      x = apply_transform(parent, {transform_kind_from_string(e.method.substr(8)), e.lambda});
    } else if (e.method == "jitter") {
      if (!e.jitter || e.jitter->size() != parent.size())
        throw ValidationError("jitter entry without a matching jitter vector");
      x = parent;
      for (std::size_t j = 0; j < x.size(); ++j) x[j] = x[j] + (*e.jitter)[j];
    } else {
      throw ValidationError("unknown resample method '" + e.method + "'");
    }
    out.samples.push_back(std::move(x));
    out.labels.push_back(e.cls);
  }
  return out;
}

}  // namespace imb
