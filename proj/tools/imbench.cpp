// imbench: datasets, resampling and the model x approach benchmark grid.
//
// Exit codes: 0 success, 1 validation error, 2 I/O error.

#include <CLI11.hpp>
#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "imb/augment.hpp"
#include "imb/dataset.hpp"
#include "imb/dataset_dir.hpp"
#include "imb/error.hpp"
#include "imb/experiment.hpp"
#include "imb/oversample.hpp"
#include "imb/report.hpp"

namespace fs = std::filesystem;

namespace {

std::vector<std::size_t> parse_counts(const std::string& text) {
  std::vector<std::size_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      const long long v = std::stoll(item, &used);
      if (used != item.size() || v <= 0) throw std::invalid_argument(item);
      out.push_back(static_cast<std::size_t>(v));
    } catch (const std::exception&) {
      throw imb::ValidationError("bad class count '" + item + "'");
    }
  }
  return out;
}

std::vector<std::string> split_names(const std::string& text, char sep = ',') {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(item);
  return out;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw imb::IoError(imb::IoError::Kind::open_failed, "cannot write " + path.string());
  out << text;
  if (!out) throw imb::IoError(imb::IoError::Kind::open_failed, "write failed: " + path.string());
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw imb::IoError(imb::IoError::Kind::open_failed, "cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw imb::IoError(imb::IoError::Kind::open_failed, "cannot create " + dir.string());
}

std::string histogram_text(const imb::Dataset& ds) {
  std::string out;
  const auto hist = imb::class_histogram(ds);
  for (std::size_t c = 0; c < hist.size(); ++c)
    out += ds.class_names[c] + " " + std::to_string(hist[c]) + "\n";
  return out;
}

struct Options {
  std::uint64_t seed = 0;
  std::string out;
  std::string in;

  // dataset synth
  std::string counts;
  std::size_t side = 28;
  std::size_t dim = 8;
  double sep = 1.0;
  double sigma = 0.1;
  std::string names;

  // dataset split
  double fraction = 0.9;
  bool unstratified = false;

  // resample
  std::size_t k = 5;
  double beta = 1.0;
  double jitter = -1.0;

  // benchmark / report
  std::string config;
  std::string cell;
  std::size_t threads = 0;
  std::string format = "md";
};

int run(int argc, char** argv) {
  CLI::App app{"Imbalanced-classification toolkit and benchmark harness"};
  app.require_subcommand(1);
  Options o;

  auto add_common = [&](CLI::App* cmd, bool out_required) {
    cmd->add_option("--seed", o.seed, "Master seed");
    auto* opt = cmd->add_option("--out", o.out, "Output path");
    if (out_required) opt->required();
  };

  auto* dataset = app.add_subcommand("dataset", "Create or inspect datasets");
  dataset->require_subcommand(1);
  auto* synth = dataset->add_subcommand("synth", "Write a synthetic Gaussian-blob dataset");
  synth->add_option("--counts", o.counts, "Comma-separated class counts")->required();
  synth->add_option("--side", o.side, "Image side (default 28); writes an IDX pair");
  auto* dim_opt = synth->add_option("--dim", o.dim, "Write FEMB embeddings of this dimension");
  auto* sep_opt = synth->add_option("--sep", o.sep, "Class center separation (1.0 images, 3.0 embeddings)");
  auto* sigma_opt = synth->add_option("--sigma", o.sigma, "Noise std (0.1 images, 1.0 embeddings)");
  synth->add_option("--names", o.names, "Comma-separated class names");
  add_common(synth, true);

  auto* info = dataset->add_subcommand("info", "Print the class histogram");
  info->add_option("--in", o.in, "Dataset directory")->required();
  add_common(info, false);

  auto* split = dataset->add_subcommand("split", "Train/test split into OUT/train and OUT/test");
  split->add_option("--in", o.in, "Dataset directory")->required();
  split->add_option("--fraction", o.fraction, "Train fraction");
  split->add_flag("--unstratified", o.unstratified, "Global instead of per-class split");
  add_common(split, true);

  auto* resample = app.add_subcommand("resample", "Balance a dataset to its majority class");
  resample->require_subcommand(1);
  std::string method;
  for (const char* name : {"smote", "adasyn", "augment"}) {
    auto* cmd = resample->add_subcommand(name, std::string("Oversample with ") + name);
    cmd->add_option("--in", o.in, "Dataset directory")->required();
    cmd->add_option("--k", o.k, "Neighbor count (smote, adasyn)");
    cmd->add_option("--beta", o.beta, "Balance level (adasyn)");
    cmd->add_option("--jitter", o.jitter, "Jitter scale (adasyn, augment on embeddings)");
    add_common(cmd, true);
    cmd->callback([&method, name] { method = name; });
  }

  auto* bench = app.add_subcommand("benchmark", "Run a model x approach x seed grid");
  bench->add_option("--config", o.config, "Experiment config JSON")->required();
  bench->add_option("--cell", o.cell, "Run a single cell: model/approach/seed");
  bench->add_option("--threads", o.threads, "Worker threads (default IMB_BENCH_THREADS or cores)");
  add_common(bench, true);

  auto* rep = app.add_subcommand("report", "Render results.jsonl as a table");
  rep->add_option("--in", o.in, "results.jsonl")->required();
  rep->add_option("--format", o.format, "md | csv");
  add_common(rep, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  if (synth->parsed()) {
    imb::BlobSpec spec;
    spec.class_counts = parse_counts(o.counts);
    const bool embeddings = dim_opt->count() > 0;
    spec.image_side = embeddings ? 0 : o.side;
    spec.dimension = o.dim;
    spec.separation = sep_opt->count() || !embeddings ? o.sep : 3.0;
    spec.sigma = sigma_opt->count() || !embeddings ? o.sigma : 1.0;
    imb::RngStream rng = imb::make_rng(o.seed).derive("blob");
    imb::Dataset ds = imb::synth_blobs(spec, rng);
    if (!o.names.empty()) {
      auto names = split_names(o.names);
      if (names.size() != ds.num_classes())
        throw imb::ValidationError("--names needs one name per class");
      ds.class_names = std::move(names);
    }
    imb::store_dataset_dir(o.out, ds);
    std::cout << histogram_text(ds);
    return 0;
  }
  if (info->parsed()) {
    const auto ds = imb::load_dataset_dir(o.in);
    std::cout << "kind " << imb::to_string(ds.kind) << "\nsamples " << ds.size()
              << "\nshape " << imb::shape_to_string(ds.sample_shape()) << "\n"
              << histogram_text(ds);
    return 0;
  }
  if (split->parsed()) {
    const auto ds = imb::load_dataset_dir(o.in);
    const auto parts = imb::stratified_split(ds, {o.fraction, !o.unstratified, o.seed});
    imb::store_dataset_dir(fs::path(o.out) / "train", parts.train);
    imb::store_dataset_dir(fs::path(o.out) / "test", parts.test);
    std::cout << "train " << parts.train.size() << "\ntest " << parts.test.size() << "\n";
    return 0;
  }
  if (resample->parsed()) {
    const auto ds = imb::load_dataset_dir(o.in);
    imb::RngStream rng = imb::make_rng(o.seed).derive("resample/" + method);
    imb::Resampled result;
    if (method == "smote") {
      result = imb::smote(ds, {o.k}, rng);
    } else if (method == "adasyn") {
      imb::AdasynParams p{o.k, o.beta, 0.01};
      if (o.jitter >= 0.0) p.jitter_scale = o.jitter;
      result = imb::adasyn(ds, p, rng);
    } else if (ds.kind == imb::DataKind::image) {
      result = imb::balance_by_augmentation(ds, rng);
    } else {
      result = imb::balance_by_jitter(ds, rng, o.jitter >= 0.0 ? o.jitter : 0.1);
    }
    imb::store_dataset_dir(o.out, result.data);
    write_text(fs::path(o.out) / "log.jsonl", imb::to_jsonl(result.log));
    std::cout << histogram_text(result.data);
    return 0;
  }
  if (bench->parsed()) {
    const auto cfg = imb::load_config(o.config);
    ensure_dir(o.out);
    std::vector<imb::ResultRow> rows;
    if (!o.cell.empty()) {
      const auto parts = split_names(o.cell, '/');
      if (parts.size() != 3) throw imb::ValidationError("--cell expects model/approach/seed");
      std::uint64_t seed = 0;
      const auto& text = parts[2];
      const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), seed);
      if (text.empty() || ec != std::errc{} || end != text.data() + text.size())
        throw imb::ValidationError("bad seed '" + text + "'");
      rows.push_back(imb::run_cell(cfg, imb::model_kind_from_string(parts[0]),
                                   imb::approach_from_string(parts[1]), seed));
    } else {
      rows = imb::run_grid(cfg, o.threads);
    }
    std::string lines, timings;
    for (const auto& r : rows) {
      lines += imb::to_json_line(r) + "\n";
      timings += "{\"model\":\"" + imb::to_string(r.model) + "\",\"approach\":\"" +
                 imb::to_string(r.approach) + "\",\"seed\":" + std::to_string(r.seed) +
                 ",\"seconds\":" + imb::format_number(r.seconds) + "}\n";
    }
    const fs::path out(o.out);
    write_text(out / "results.jsonl", lines);
    write_text(out / "timings.jsonl", timings);
    write_text(out / "report.md", imb::render_report(rows, imb::ReportFormat::markdown));
    write_text(out / "report.csv", imb::render_report(rows, imb::ReportFormat::csv));
    std::cout << imb::render_accuracy_grid(rows, imb::ReportFormat::markdown);
    return 0;
  }
  if (rep->parsed()) {
    std::vector<imb::ResultRow> rows;
    std::stringstream in(read_text(o.in));
    std::string line;
    while (std::getline(in, line))
      if (!line.empty()) rows.push_back(imb::row_from_json_line(line));
    const auto text = imb::render_report(rows, imb::report_format_from_string(o.format));
    if (o.out.empty()) {
      std::cout << text;
    } else {
      write_text(o.out, text);
    }
    return 0;
  }
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const imb::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const imb::IoError& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return 2;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
