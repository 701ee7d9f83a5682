// Acceptance run: one PASS/FAIL line per criterion. `--only N` runs a single
// criterion; the exit status is nonzero when any selected criterion fails.
#include <openssl/evp.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include "gradcheck.hpp"
#include "imb/experiment.hpp"
#include "imb/knn.hpp"
#include "imb/loss.hpp"
#include "imb/metrics.hpp"
#include "imb/model.hpp"
#include "imb/oversample.hpp"
#include "oracles.hpp"

using namespace imb;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

std::string fmt(double v) {
  std::ostringstream s;
  s << std::setprecision(6) << v;
  return s.str();
}

Dataset embedding_blobs(std::vector<std::size_t> counts, std::size_t dim, double sep,
                        std::uint64_t seed) {
  BlobSpec spec;
  spec.class_counts = std::move(counts);
  spec.dimension = dim;
  spec.separation = sep;
  spec.sigma = 1.0;
  auto rng = make_rng(seed);
  return synth_blobs(spec, rng);
}

Tensor uniform_tensor(Shape shape, RngStream& rng, double lo, double hi) {
  Tensor t(std::move(shape));
  for (auto& v : t.values()) v = rng.uniform(lo, hi);
  return t;
}

std::vector<std::uint32_t> random_labels(RngStream& rng, std::size_t n, std::size_t k) {
  std::vector<std::uint32_t> y(n);
  for (auto& v : y) v = static_cast<std::uint32_t>(rng.uniform_index(k));
  return y;
}

// 1. CNN head parameter count.
Outcome architecture_fingerprint() {
  const auto count = build_cnn_head(128, 1, 4, make_rng(0)).parameter_count();
  return {count == 438788, "parameters=" + std::to_string(count) + " expected=438788"};
}

// 2. Focal loss with gamma 0 and unit alpha equals cross-entropy.
Outcome focal_ce_reduction() {
  auto rng = make_rng(2);
  double worst = 0.0;
  for (int b = 0; b < 1000; ++b) {
    const auto z = uniform_tensor({8, 4}, rng, -5, 5);
    const auto y = random_labels(rng, 8, 4);
    worst = std::max(worst, std::abs(focal(z, y, {0.0, {1, 1, 1, 1}}).loss - cross_entropy(z, y).loss));
  }
  return {worst <= 1e-12, "max |focal - ce| = " + fmt(worst)};
}

// 3. Loss and layer gradients against central differences.
Outcome gradient_suite() {
  auto rng = make_rng(3);
  double loss_worst = 0.0;
  auto check_loss = [&](const std::function<LossValue(const Tensor&, const std::vector<std::uint32_t>&)>& f) {
    for (int t = 0; t < 20; ++t) {
      auto z = uniform_tensor({5, 4}, rng, -5, 5);
      const auto y = random_labels(rng, 5, 4);
      const auto g = f(z, y).grad;
      for (std::size_t i = 0; i < z.size(); ++i) {
        const double fd = oracle::central_difference([&] { return f(z, y).loss; }, z[i], 1e-5);
        loss_worst = std::max(loss_worst, oracle::relative_error(g[i], fd, 1e-4));
      }
    }
  };
  check_loss([](const Tensor& z, const auto& y) { return cross_entropy(z, y); });
  for (double gamma : {0.5, 1.0, 2.0})
    check_loss([gamma](const Tensor& z, const auto& y) { return focal(z, y, {gamma, {}}); });

  auto randomize_biases = [&](Model& m) {
    auto p = m.params();
    for (std::size_t i = 1; i < p.size(); i += 2)
      for (auto& v : p[i].values()) v = rng.uniform(-0.1, 0.1);
    m.set_params(std::move(p));
  };

  auto dense = build_mlp_head(7, 4, make_rng(1));
  randomize_biases(dense);
  const auto dense_r = oracle::gradient_check(dense, uniform_tensor({5, 7}, rng, -1, 1),
                                              uniform_tensor({5, 4}, rng, -1, 1), 1e-4, 1e-6, 100000, rng);

  const LayerSpec conv{LayerKind::conv2d, 4, Activation::relu}, pool{LayerKind::maxpool, 0, Activation::none},
      flat{LayerKind::flatten, 0, Activation::none};
  Model stack({12, 12, 1},
              {conv, pool, {LayerKind::conv2d, 6, Activation::relu}, pool, flat,
               {LayerKind::dense, 5, Activation::relu}, {LayerKind::dense, 4, Activation::softmax}},
              make_rng(2));
  randomize_biases(stack);
  const auto stack_r = oracle::gradient_check(stack, uniform_tensor({4, 12, 12, 1}, rng, 0, 1),
                                              uniform_tensor({4, 4}, rng, -1, 1), 1e-4, 1e-6, 100000, rng);

  auto head = build_cnn_head(kMinCnnSide, 1, 4, make_rng(3));
  randomize_biases(head);
  const auto head_r = oracle::gradient_check(head, uniform_tensor({4, kMinCnnSide, kMinCnnSide, 1}, rng, 0, 1),
                                             uniform_tensor({4, 4}, rng, -1, 1), 1e-4, 1e-6, 300, rng);

  const bool kinks_rare = dense_r.kinks * 50 < dense_r.checked && stack_r.kinks * 50 < stack_r.checked &&
                          head_r.kinks * 50 < head_r.checked;
  const bool pass = loss_worst < 1e-6 && dense_r.worst < 1e-6 && stack_r.worst < 1e-3 &&
                    head_r.worst < 1e-3 && kinks_rare;
  return {pass, "loss=" + fmt(loss_worst) + " dense=" + fmt(dense_r.worst) + " conv12=" + fmt(stack_r.worst) +
                    " cnn_head18=" + fmt(head_r.worst) + " kinks_skipped=" +
                    std::to_string(dense_r.kinks + stack_r.kinks + head_r.kinks) + "/" +
                    std::to_string(dense_r.checked + stack_r.checked + head_r.checked + dense_r.kinks +
                                   stack_r.kinks + head_r.kinks)};
}

// 4. SMOTE balance and exact reconstruction from the log.
Outcome smote_geometry() {
  const auto ds = embedding_blobs({176, 127, 86, 34}, 8, 3.0, 4);
  auto rng = make_rng(4);
  const auto out = smote(ds, {}, rng);
  const bool balanced = class_histogram(out.data) == std::vector<std::size_t>{176, 176, 176, 176};
  bool exact = out.log.size() == out.data.size() - ds.size();
  bool lambda_ok = true;
  for (std::size_t s = 0; exact && s < out.log.size(); ++s) {
    const auto& e = out.log.entries[s];
    lambda_ok = lambda_ok && e.lambda >= 0.0 && e.lambda < 1.0;
    const auto& x = out.data.samples[ds.size() + s];
    const auto& p = ds.samples[e.parent];
    const auto& q = ds.samples[*e.neighbor];
    for (std::size_t j = 0; j < x.size(); ++j) exact = exact && x[j] == p[j] + e.lambda * (q[j] - p[j]);
  }
  return {balanced && exact && lambda_ok, std::string("balanced=") + (balanced ? "yes" : "no") +
                                              " reconstruct=" + (exact ? "exact" : "mismatch") +
                                              " lambda_range=" + (lambda_ok ? "ok" : "bad") +
                                              " synthetic=" + std::to_string(out.log.size())};
}

// 5. ADASYN per-class totals and per-member allocation.
Outcome adasyn_allocation() {
  bool ok = true;
  std::size_t classes = 0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto ds = embedding_blobs({176, 127, 86, 34}, 4, 1.5, 50 + seed);
    auto rng = make_rng(seed);
    const auto out = adasyn(ds, {5, 1.0, 0.01}, rng);
    const auto members = class_members(ds);
    for (std::uint32_t c = 1; c < 4; ++c) {
      std::vector<std::size_t> got(members[c].size(), 0);
      std::size_t total = 0;
      for (const auto& e : out.log.entries)
        if (e.cls == c) {
          ++total;
          ++got[static_cast<std::size_t>(std::find(members[c].begin(), members[c].end(), e.parent) -
                                         members[c].begin())];
        }
      const auto expect = oracle::brute_allocation(adasyn_ratios(ds, c, 5), 176 - members[c].size());
      ok = ok && total == 176 - members[c].size() && got == expect;
      ++classes;
    }
  }
  return {ok, std::to_string(classes) + " minority classes checked against brute-force allocation"};
}

// 6. k-NN against a quadratic oracle, with ties.
Outcome knn_oracle() {
  auto rng = make_rng(6);
  std::vector<Tensor> pts;
  for (int i = 0; i < 500; ++i) {
    Tensor t({3});
    for (auto& v : t.values()) v = static_cast<double>(rng.uniform_index(6));
    pts.push_back(std::move(t));
  }
  std::size_t mismatches = 0;
  for (std::size_t k : {1u, 3u, 5u})
    for (std::size_t q = 0; q < pts.size(); ++q) mismatches += knn_indices(pts, q, k) != oracle::brute_knn(pts, q, k);
  return {mismatches == 0, "queries=1500 mismatches=" + std::to_string(mismatches)};
}

// 7. Confusion matrix and metric formulas against brute-force tallies.
Outcome metrics_oracle() {
  auto rng = make_rng(7);
  double worst = 0.0;
  bool counts_ok = true;
  for (int f = 0; f < 1000; ++f) {
    const std::size_t n = 20 + rng.uniform_index(200);
    const auto truth = random_labels(rng, n, 4), pred = random_labels(rng, n, 4);
    const auto cm = confusion(pred, truth, 4);
    const auto ref = oracle::brute_confusion(pred, truth, 4);
    for (std::size_t t = 0; t < 4; ++t)
      for (std::size_t p = 0; p < 4; ++p) counts_ok = counts_ok && cm.at(t, p) == ref[t][p];
    const auto r = report(cm);
    double trace = 0.0;
    for (std::size_t c = 0; c < 4; ++c) {
      double tp = static_cast<double>(ref[c][c]), fp = 0, fn = 0;
      for (std::size_t o = 0; o < 4; ++o)
        if (o != c) {
          fp += static_cast<double>(ref[o][c]);
          fn += static_cast<double>(ref[c][o]);
        }
      trace += tp;
      const double p = tp + fp > 0 ? tp / (tp + fp) : 0.0;
      const double rc = tp + fn > 0 ? tp / (tp + fn) : 0.0;
      const double f1 = p + rc > 0 ? 2 * p * rc / (p + rc) : 0.0;
      const auto& m = r.for_class(c);
      worst = std::max({worst, std::abs(m.precision - p), std::abs(m.recall - rc), std::abs(m.f1 - f1)});
    }
    worst = std::max(worst, std::abs(r.accuracy - trace / static_cast<double>(n)));
  }
  double uniform_gap = 0.0;
  for (int f = 0; f < 100; ++f) {
    std::vector<std::uint32_t> truth;
    const std::size_t per = 1 + rng.uniform_index(30);
    for (std::uint32_t c = 0; c < 4; ++c) truth.insert(truth.end(), per, c);
    const auto r = report(confusion(random_labels(rng, truth.size(), 4), truth, 4));
    uniform_gap = std::max(uniform_gap, std::abs(r.balanced_accuracy - r.accuracy));
  }
  return {counts_ok && worst <= 1e-12 && uniform_gap <= 1e-12,
          std::string("counts=") + (counts_ok ? "exact" : "mismatch") + " formula_err=" + fmt(worst) +
              " balanced_vs_plain=" + fmt(uniform_gap)};
}

// Fixture for 8: paper class counts and ratio 1760/341, moderate overlap.
ExperimentConfig imbalance_fixture() {
  ExperimentConfig cfg;
  cfg.dataset.kind = DatasetSource::Kind::blob;
  cfg.dataset.blob.class_counts = {1760, 1265, 858, 341};
  cfg.dataset.blob.dimension = 8;
  cfg.dataset.blob.separation = 2.0;
  cfg.dataset.blob.sigma = 1.0;
  cfg.models = {ModelKind::mlp_head};
  cfg.approaches = {kAllApproaches, kAllApproaches + 5};
  for (std::uint64_t s = 0; s < 10; ++s) cfg.seeds.push_back(s);
  cfg.epochs = 8;
  cfg.default_lr = 1e-3;
  return cfg;
}

// 8. Minority recall of each imbalance approach against plain CE.
Outcome imbalance_benefit() {
  const auto cfg = imbalance_fixture();
  const auto rows = run_grid(cfg);
  const std::uint32_t minority = 3;
  auto recall = [&](Approach a, std::uint64_t seed) {
    for (const auto& r : rows)
      if (r.approach == a && r.seed == seed) return r.metrics.for_class(minority).recall;
    return -1.0;
  };
  bool pass = true;
  std::string detail;
  for (auto a : {Approach::augment, Approach::smote, Approach::adasyn, Approach::focal}) {
    int wins = 0;
    for (auto s : cfg.seeds) wins += recall(a, s) >= recall(Approach::ce, s);
    pass = pass && wins >= 7;
    detail += to_string(a) + "=" + std::to_string(wins) + "/10 ";
  }
  double ce = 0.0;
  for (auto s : cfg.seeds) ce += recall(Approach::ce, s);
  return {pass, detail + "(ce mean minority recall " + fmt(ce / 10) + ")"};
}

// 9. Byte-identical reruns and single-cell reproduction.
Outcome determinism() {
  auto cfg = imbalance_fixture();
  cfg.seeds = {11, 12};
  cfg.epochs = 3;
  auto serialize = [](const std::vector<ResultRow>& rows) {
    std::string s;
    for (const auto& r : rows) s += to_json_line(r) + "\n";
    return s;
  };
  const auto a = run_grid(cfg, 1);
  const auto b = run_grid(cfg, 4);
  const bool same = serialize(a) == serialize(b);
  const auto& pick = a[7];
  const bool cell = to_json_line(run_cell(cfg, pick.model, pick.approach, pick.seed)) == to_json_line(pick);
  return {same && cell, std::string("rerun=") + (same ? "identical" : "differs") +
                            " single_cell=" + (cell ? "identical" : "differs")};
}

std::string sha256_hex(const std::vector<std::uint8_t>& bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr);
  std::ostringstream s;
  for (unsigned int i = 0; i < len; ++i) s << std::hex << std::setw(2) << std::setfill('0') << int(md[i]);
  return s.str();
}

// 10. Test split unchanged by every approach arm, on image and embedding data.
Outcome test_hygiene() {
  bool ok = true;
  std::size_t arms = 0;
  auto image_cfg = parse_config(R"({
    "dataset": {"kind": "blob", "blob": {"counts": [40, 24, 16, 12], "side": 20, "sep": 1.0, "sigma": 0.1}},
    "models": ["cnn_head", "mlp_head"], "approaches": ["ce"], "seeds": [1],
    "train": {"epochs": 1}, "image": {"side": 20}})");
  auto embed_cfg = imbalance_fixture();
  embed_cfg.epochs = 1;
  for (const auto* cfg : {&image_cfg, &embed_cfg}) {
    const auto data = materialize_dataset(*cfg, 1);
    for (auto m : cfg->models)
      for (auto a : kAllApproaches) {
        CellTrace trace;
        run_cell(*cfg, data, m, a, 1, &trace);
        ok = ok && sha256_hex(serialize_samples(trace.test_before)) == sha256_hex(serialize_samples(trace.test_after));
        ++arms;
      }
  }
  return {ok, std::to_string(arms) + " arms compared by SHA-256"};
}

// 11. Held-out accuracy on separable embeddings.
Outcome separable_sanity() {
  ExperimentConfig cfg;
  cfg.dataset.kind = DatasetSource::Kind::blob;
  cfg.dataset.blob.class_counts = {25, 25, 25, 25};
  cfg.dataset.blob.dimension = 4;
  cfg.dataset.blob.separation = 10.0;
  cfg.dataset.blob.sigma = 1.0;
  cfg.models = {ModelKind::mlp_head};
  cfg.epochs = 12;
  cfg.default_lr = 1e-3;

  // Separability certificate: every class is perceptron-separable from the rest.
  const auto data = materialize_dataset(cfg, 0);
  bool separable = true;
  for (std::uint32_t c = 0; c < 4; ++c) {
    std::vector<std::vector<double>> x;
    std::vector<int> y;
    for (std::size_t i = 0; i < data.size(); ++i) {
      x.emplace_back(data.samples[i].values().begin(), data.samples[i].values().end());
      y.push_back(data.labels[i] == c ? 1 : -1);
    }
    separable = separable && oracle::perceptron_separates(x, y);
  }
  const auto row = run_cell(cfg, data, ModelKind::mlp_head, Approach::ce, 0);
  return {separable && row.metrics.accuracy >= 0.95,
          std::string("separable=") + (separable ? "yes" : "no") + " test_accuracy=" + fmt(row.metrics.accuracy)};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<const char*, Outcome (*)()>> criteria{
      {"architecture fingerprint", architecture_fingerprint},
      {"focal-CE reduction", focal_ce_reduction},
      {"gradient suite", gradient_suite},
      {"SMOTE geometry and balance", smote_geometry},
      {"ADASYN allocation", adasyn_allocation},
      {"k-NN oracle", knn_oracle},
      {"metrics oracle", metrics_oracle},
      {"imbalance benefit", imbalance_benefit},
      {"determinism", determinism},
      {"test-set hygiene", test_hygiene},
      {"separable-fixture sanity", separable_sanity},
  };
  std::size_t only = 0;
  if (argc == 3 && std::string(argv[1]) == "--only") only = std::strtoul(argv[2], nullptr, 10);
  if (argc != 1 && (only == 0 || only > criteria.size())) {
    std::fprintf(stderr, "usage: %s [--only 1..%zu]\n", argv[0], criteria.size());
    return 2;
  }

  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    if (only && only != i + 1) continue;
    Outcome o{false, ""};
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += !o.pass;
    std::printf("%s %2zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
