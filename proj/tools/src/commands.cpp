#include "sliceset/cli/commands.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <json.hpp>

#include "sliceset/cli/checks.hpp"
#include "sliceset/config_io.hpp"
#include "sliceset/dataset.hpp"
#include "sliceset/errors.hpp"
#include "sliceset/init.hpp"
#include "sliceset/nifti.hpp"

namespace sliceset::cli {

namespace fs = std::filesystem;

namespace {

// Exclusive marker so two runs never write into one directory at once.
class DirectoryLock {
 public:
  explicit DirectoryLock(const fs::path& dir) : path_(dir / ".sliceset.lock") {
    std::FILE* f = std::fopen(path_.c_str(), "wx");
    if (!f) {
      throw std::runtime_error("output directory " + dir.string() + " is locked by another run (remove " +
                               path_.string() + " if it is stale)");
    }
    std::fclose(f);
  }
  ~DirectoryLock() {
    std::error_code ec;
    fs::remove(path_, ec);
  }
  DirectoryLock(const DirectoryLock&) = delete;
  DirectoryLock& operator=(const DirectoryLock&) = delete;

 private:
  fs::path path_;
};

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << text;
  if (!text.empty() && text.back() != '\n') f << '\n';
}

bool binary_targets(std::span<const Volume> volumes) {
  return std::all_of(volumes.begin(), volumes.end(), [](const Volume& v) { return v.target == 0.0 || v.target == 1.0; });
}

void check_task_fits(Task task, std::span<const Volume> volumes, const std::string& what) {
  const bool binary = binary_targets(volumes);
  if (task == Task::classification && !binary) {
    throw ConfigError(what + ": classification model, but the manifest has targets other than 0/1");
  }
  if (task == Task::regression && binary) {
    throw ConfigError(what + ": regression model, but the manifest holds 0/1 classification labels");
  }
}

void check_uniform_extents(std::span<const Volume> volumes, const Extents& expected, const std::string& what) {
  for (const auto& v : volumes) {
    if (v.extents != expected) {
      throw ShapeError(what + ": volume " + v.subject_id + " has extents " + std::to_string(v.extents[0]) + "x" +
                       std::to_string(v.extents[1]) + "x" + std::to_string(v.extents[2]) +
                       ", expected all volumes to match the first");
    }
  }
}

std::vector<ManifestEntry> manifest_rows(const std::vector<ManifestEntry>& all, const DatasetSplit& split,
                                         const fs::path& base) {
  std::vector<ManifestEntry> rows;
  for (auto i : split.records) {
    ManifestEntry e = all[i];
    if (fs::path(e.path).is_relative()) e.path = fs::absolute(base / e.path).lexically_normal().string();
    rows.push_back(e);
  }
  return rows;
}

std::string format_metric(const std::string& name, double value, Task task) {
  std::ostringstream os;
  os << std::fixed;
  if (task == Task::classification) {
    os << std::setprecision(2) << name << " " << 100.0 * value;
  } else {
    os << std::setprecision(4) << name << " " << value;
  }
  return os.str();
}

}  // namespace

int cmd_synth(const SynthOptions& options, std::ostream& out) {
  validate(options.spec);
  const fs::path dir = options.output_dir;
  fs::create_directories(dir);
  const auto volumes = generate_synthetic(options.spec);
  std::vector<ManifestEntry> rows(volumes.size());
  const std::string ext = options.gzip ? ".nii.gz" : ".nii";
  for (std::size_t i = 0; i < volumes.size(); ++i) {
    const std::string name = volumes[i].subject_id + ext;
    save_nifti(volumes[i], dir / name);
    rows[i] = {name, volumes[i].subject_id, volumes[i].target};
  }
  write_manifest(dir / "manifest.json", rows);
  out << "wrote " << volumes.size() << " " << task_name(options.spec.task) << " volumes to " << dir.string() << "\n";
  if (options.spec.task == Task::regression) {
    const auto [lo, hi] = blob_centre_range(options.spec);
    out << "target range [" << options.spec.target_offset + options.spec.target_slope * static_cast<double>(lo) << ", "
        << options.spec.target_offset + options.spec.target_slope * static_cast<double>(hi) << "]\n";
  }
  if (options.split) {
    const auto splits = make_splits(volumes, *options.split, options.split_seed);
    for (const auto* s : {&splits.train, &splits.validation, &splits.test}) {
      std::vector<ManifestEntry> part;
      for (auto i : s->records) part.push_back(rows[i]);
      write_manifest(dir / (s->name + "_manifest.json"), part);
      out << s->name << ": " << part.size() << " volumes\n";
    }
  }
  return kExitOk;
}

void apply_overrides(RunConfig& c, const TrainOverrides& o) {
  if (o.epochs) c.train.epochs = *o.epochs;
  if (o.batch_size) c.train.batch_size = *o.batch_size;
  if (o.seeds) c.seeds = *o.seeds;
  if (o.seed) c.train.seed = *o.seed;
  if (o.width) c.model.encoder.width = *o.width;
  if (o.input_channels) c.model.encoder.input_channels = *o.input_channels;
  if (o.learning_rate) c.optimizer.learning_rate = *o.learning_rate;
  if (o.optimizer) c.optimizer.kind = parse_optimizer(*o.optimizer, "--optimizer");
  if (o.loss) c.loss = parse_loss(*o.loss, "--loss");
  if (o.encoder) c.model.encoder.kind = parse_encoder(*o.encoder, "--encoder");
  if (o.aggregator) c.model.aggregator.kind = parse_aggregator(*o.aggregator, "--aggregator");
  if (o.axis) c.model.axis = parse_axis(*o.axis, "--axis");
  if (o.task) c.model.task = parse_task(*o.task, "--task");
  if (o.output_dir) c.output_dir = *o.output_dir;
  if (o.pretrained) c.pretrained = *o.pretrained;
  if (o.stem_adapter) c.stem_adapter = parse_stem_adapter(*o.stem_adapter, "--stem-adapter");
  if (o.manifest) {
    c.data.manifest = *o.manifest;
    c.data.train.clear();
    c.data.validation.clear();
    c.data.test.clear();
  }
  if (o.train) c.data.train = *o.train;
  if (o.validation) c.data.validation = *o.validation;
  if (o.test) c.data.test = *o.test;
  if ((o.train || o.validation || o.test) && !o.manifest) c.data.manifest.clear();
  if (o.positional) c.model.positional = *o.positional;
  if (o.freeze_batchnorm) c.train.freeze_batchnorm = *o.freeze_batchnorm;
}

int cmd_train(RunConfig config, std::ostream& out) {
  resolve(config);
  const fs::path dir = config.output_dir;
  fs::create_directories(dir);
  DirectoryLock lock(dir);

  std::vector<Volume> train_set, validation_set, test_set;
  if (!config.data.manifest.empty()) {
    const fs::path manifest = config.data.manifest;
    const auto all = load_manifest_volumes(manifest, config.data.normalize);
    const auto rows = read_manifest(manifest);
    const auto splits = make_splits(all, config.data.split, config.data.split_seed);
    train_set = gather(all, splits.train);
    validation_set = gather(all, splits.validation);
    test_set = gather(all, splits.test);
    for (const auto* s : {&splits.train, &splits.validation, &splits.test}) {
      write_manifest(dir / (s->name + "_manifest.json"), manifest_rows(rows, *s, manifest.parent_path()));
    }
  } else {
    train_set = load_manifest_volumes(config.data.train, config.data.normalize);
    validation_set = load_manifest_volumes(config.data.validation, config.data.normalize);
    test_set = load_manifest_volumes(config.data.test, config.data.normalize);
  }
  if (train_set.empty() || validation_set.empty() || test_set.empty()) throw ConfigError("data: a split is empty");
  const Extents extents = train_set.front().extents;
  check_uniform_extents(train_set, extents, "train split");
  check_uniform_extents(validation_set, extents, "validation split");
  check_uniform_extents(test_set, extents, "test split");
  check_task_fits(config.model.task, train_set, "train split");

  config.model = config_for_extents(config.model, extents);
  write_text(dir / "resolved_config.json", to_json(config));
  out << "resolved config written to " << (dir / "resolved_config.json").string() << "\n";
  out << "data: " << train_set.size() << " train, " << validation_set.size() << " validation, " << test_set.size()
      << " test volumes; " << config.model.num_slices << " " << axis_name(config.model.axis) << " slices each\n";

  std::optional<WeightArchive> pretrained;
  if (!config.pretrained.empty()) pretrained = WeightArchive::load(config.pretrained);

  std::vector<EvalReport> reports;
  for (std::size_t s = 0; s < config.seeds; ++s) {
    const std::uint64_t seed = config.train.seed + s;
    const fs::path run_dir = config.seeds > 1 ? dir / ("seed-" + std::to_string(seed)) : dir;
    fs::create_directories(run_dir);
    Model model(config.model);
    he_init(model, seed);
    if (pretrained) {
      ImportOptions import_options;
      import_options.stem_adapter = config.stem_adapter;
      const auto report = import_encoder(model, *pretrained, import_options);
      out << report.to_text();
    }
    out << "seed " << seed << ": " << model.parameter_count() << " trainable parameters\n";

    TrainConfig train_config = config.train;
    train_config.seed = seed;
    std::ofstream log(run_dir / "train_log.jsonl", std::ios::trunc);
    if (!log) throw std::runtime_error("cannot write " + (run_dir / "train_log.jsonl").string());
    const auto metric = std::string(selection_metric_name(train_config.selection_metric));
    const auto result = train(model, train_set, validation_set, train_config, config.optimizer, [&](const EpochRecord& r) {
      log << to_jsonl(r) << "\n" << std::flush;
      out << "seed " << seed << " epoch " << r.epoch << "/" << train_config.epochs << "  train_loss " << r.train_loss
          << "  val_" << format_metric(metric, r.val_metric, config.model.task) << "  " << std::lround(r.wall_ms)
          << " ms\n";
    });
    result.best.weights.save(run_dir / "checkpoint.ssnw");
    const auto report = evaluate(model, test_set);
    write_text(run_dir / "test_report.json", to_json(report));
    out << "seed " << seed << ": best epoch " << result.best.epoch << " (val " << metric << " "
        << result.best.val_metric << "); test";
    for (const auto& name : metric_names(report.task)) out << "  " << format_metric(name, metric_value(report, name), report.task);
    out << "\n";
    reports.push_back(report);
  }

  if (reports.size() > 1) {
    const auto summary = aggregate(reports);
    write_text(dir / "aggregate_report.json", to_json(summary));
    out << "test metrics over " << summary.runs << " seeds (mean +/- std):\n";
    for (const auto& m : summary.metrics) {
      const double k = summary.task == Task::classification ? 100.0 : 1.0;
      out << "  " << m.name << " " << std::fixed << std::setprecision(summary.task == Task::classification ? 2 : 4)
          << k * m.mean << " +/- " << k * m.stddev << std::defaultfloat << "\n";
    }
  }
  return kExitOk;
}

int cmd_eval(const EvalOptions& options, std::ostream& out) {
  if (options.checkpoints.empty()) throw ConfigError("--checkpoint: at least one is required");
  if (options.manifest.empty()) throw ConfigError("--manifest: required");
  const auto volumes = load_manifest_volumes(options.manifest, options.normalize);
  if (volumes.empty()) throw ConfigError("--manifest: no volumes");
  std::vector<EvalReport> reports;
  for (const auto& path : options.checkpoints) {
    Model model = model_from_archive(WeightArchive::load(path));
    check_task_fits(model.config().task, volumes, path);
    reports.push_back(evaluate(model, volumes));
  }
  std::string text;
  if (reports.size() == 1) {
    text = to_json(reports.front(), options.percent);
  } else {
    text = to_json(aggregate(reports), options.percent);
  }
  out << text << "\n";
  if (!options.output.empty()) write_text(options.output, text);
  return kExitOk;
}

int cmd_export_weights(const ExportOptions& options, std::ostream& out) {
  if (options.output.empty()) throw ConfigError("--output: required");
  if (options.pretrain_2d == !options.checkpoint.empty()) {
    throw ConfigError("export-weights: give exactly one of --checkpoint or --pretrain-2d");
  }
  WeightArchive archive;
  if (options.pretrain_2d) {
    const auto images = generate_synthetic_2d(options.images);
    const auto result = pretrain_2d(images, options.pretrain);
    out << "pretrained " << encoder_name(options.pretrain.encoder.kind) << " on " << images.size() << " images ("
        << images.height << "x" << images.width << ") for " << options.pretrain.epochs
        << " epochs; final loss " << result.epoch_loss.back() << ", train accuracy " << result.train_accuracy << "\n";
    archive = result.archive;
  } else {
    const auto source = WeightArchive::load(options.checkpoint);
    if (!options.encoder_only) {
      archive = source;
    } else {
      for (const auto& [name, t] : source.entries()) {
        if (name.starts_with("encoder.")) archive.put(name, t.shape, t.values);
      }
      for (const auto& [k, v] : source.metadata()) archive.metadata()[k] = v;
      archive.metadata().erase("model_config");
    }
  }
  archive.save(options.output);
  out << "wrote " << archive.size() << " entries to " << options.output << "\n";
  return kExitOk;
}

int cmd_import_weights(const ImportOptionsCli& options, std::ostream& out) {
  if (options.archive.empty()) throw ConfigError("--archive: required");
  if (options.output.empty()) throw ConfigError("--output: required");
  RunConfig config = options.config.empty() ? RunConfig{} : load_run_config(options.config);
  apply_overrides(config, options.overrides);
  if (options.num_slices) config.model.num_slices = *options.num_slices;
  Model model(config.model);
  he_init(model, options.seed);
  ImportOptions import_options;
  import_options.stem_adapter = config.stem_adapter;
  const auto report = import_encoder(model, WeightArchive::load(options.archive), import_options);
  out << report.to_text();
  export_model(model).save(options.output);
  out << "wrote initialized model to " << options.output << "\n";
  return kExitOk;
}

int cmd_check(const std::string& suite, std::uint64_t seed, std::ostream& out) {
  const auto result = run_check(suite, seed);
  out << result.to_text();
  return result.passed() ? kExitOk : kExitFailed;
}

}  // namespace sliceset::cli
