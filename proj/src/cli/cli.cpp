#include "eegscreen/cli/cli.hpp"

#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <Eigen/Core>
#include <json.hpp>

#include "eegscreen/error.hpp"
#include "eegscreen/evaluation.hpp"
#include "eegscreen/importance.hpp"
#include "eegscreen/manifest.hpp"
#include "eegscreen/parallel.hpp"
#include "eegscreen/pipeline.hpp"
#include "eegscreen/scalogram_io.hpp"
#include "eegscreen/service/server.hpp"
#include "eegscreen/synth.hpp"
#include "eegscreen/weights_io.hpp"

#ifndef EEGSCREEN_VERSION
#define EEGSCREEN_VERSION "0.0.0"
#endif

namespace eegscreen::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path resolve(const std::string& p) {
  fs::path path(p);
  if (path.is_relative()) {
    if (const char* root = std::getenv(kDataDirEnv); root && *root) return fs::path(root) / path;
  }
  return path;
}

void make_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(Errc::Io, "cannot create " + dir.string() + ": " + ec.message());
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw Error(Errc::Io, "cannot write " + path.string());
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::MissingFile, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json read_json(const fs::path& path) {
  try {
    return json::parse(read_text(path));
  } catch (const json::exception& e) {
    throw Error(Errc::BadFormat, path.string() + ": " + e.what());
  }
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

// Reproducibility stamp: command line plus the effective configuration.
// Deliberately free of timestamps so reruns compare equal.
void write_stamp(const fs::path& dir, const std::vector<std::string>& args, const std::string& command,
                 const json& config) {
  json stamp = {{"tool", "eegscreen"},
                {"version", EEGSCREEN_VERSION},
                {"command", command},
                {"argv", std::vector<std::string>(args.begin() + 1, args.end())},
                {"config", config},
                {"threads", num_threads()},
                {"libraries",
                 {{"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                std::to_string(EIGEN_MINOR_VERSION)},
                  {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                        std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                        std::to_string(NLOHMANN_JSON_VERSION_PATCH)}}}};
  write_json(dir / "stamp.json", stamp);
}

// Segments on disk are EEG-CSV files plus an index that restores their
// position within the source recording.
Recording segment_as_recording(const Segment& s) {
  Recording r;
  r.subject_id = s.subject_id;
  r.label = s.label;
  r.sample_rate_hz = s.sample_rate_hz;
  r.n_samples = s.n_samples;
  r.data = s.data;
  return r;
}

std::string segment_filename(const Segment& s) {
  std::ostringstream name;
  name << s.subject_id << '_' << std::setw(4) << std::setfill('0') << s.segment_index << ".csv";
  return name.str();
}

std::vector<Segment> load_segment_dir(const fs::path& dir) {
  const json index = read_json(dir / "segments.json");
  std::vector<Segment> out;
  for (const auto& e : index.at("entries")) {
    const Recording r = load_recording(dir / e.at("path").get<std::string>());
    Segment s;
    s.subject_id = e.at("subject_id").get<std::string>();
    s.label = static_cast<Label>(e.at("label").get<int>());
    s.segment_index = e.at("segment_index").get<std::size_t>();
    s.start_sample = e.at("start_sample").get<std::size_t>();
    s.sample_rate_hz = r.sample_rate_hz;
    s.n_samples = r.n_samples;
    s.data = r.data;
    out.push_back(std::move(s));
  }
  return out;
}

PipelineConfig pipeline_in(const fs::path& dir) {
  const fs::path p = dir / "pipeline.json";
  return fs::exists(p) ? pipeline_config_from_json(read_json(p)) : PipelineConfig{};
}

std::vector<SubjectLabel> subjects_of(const std::vector<Scalogram>& data) {
  std::map<std::string, Label> seen;
  for (const auto& s : data) {
    auto [it, inserted] = seen.emplace(s.subject_id, s.label);
    if (!inserted && it->second != s.label)
      throw Error(Errc::BadLabel, "subject " + s.subject_id + " has segments with different labels");
  }
  std::vector<SubjectLabel> out;
  for (const auto& [id, label] : seen) out.push_back({id, label});
  return out;
}

std::vector<Scalogram> fold_test_set(const std::vector<Scalogram>& data, const FoldPlan& plan, std::size_t fold) {
  std::vector<Scalogram> out;
  for (const auto& s : data) {
    auto it = plan.assignments.find(fold_key(s, plan.granularity));
    if (it == plan.assignments.end()) throw Error(Errc::BadConfig, "fold plan has no entry for " + s.subject_id);
    if (it->second == fold) out.push_back(s);
  }
  return out;
}

std::string fold_file(const std::string& stem, std::size_t fold, const std::string& ext) {
  return stem + "_fold" + std::to_string(fold) + ext;
}

struct ModelOptions {
  double width = 0.25;
  std::size_t epochs = 10;
  std::size_t batch = 32;
  double lr = 1e-3;
  std::uint64_t seed = 0;
};

void add_model_options(CLI::App* cmd, ModelOptions& o) {
  cmd->add_option("--width", o.width, "Width factor applied to stage widths 64/128/256/512")->capture_default_str();
  cmd->add_option("--epochs", o.epochs, "Training epochs")->capture_default_str();
  cmd->add_option("--batch-size", o.batch, "Mini-batch size")->capture_default_str();
  cmd->add_option("--lr", o.lr, "Adam learning rate")->capture_default_str();
  cmd->add_option("--seed", o.seed, "Seed for initialisation, shuffling and folds")->capture_default_str();
}

ModelConfig model_config_for(const ModelOptions& o, const std::vector<Scalogram>& data) {
  if (data.empty()) throw Error(Errc::EmptyDataset, "no scalograms found");
  return ModelConfig::with_width_factor(o.width, data.front().n_scales, data.front().n_times);
}

TrainConfig train_config_for(const ModelOptions& o) {
  TrainConfig t;
  t.epochs = o.epochs;
  t.batch_size = o.batch;
  t.lr = o.lr;
  t.seed = o.seed;
  return t;
}

json options_json(const ModelOptions& o) {
  return {{"width", o.width}, {"epochs", o.epochs}, {"batch_size", o.batch}, {"lr", o.lr}, {"seed", o.seed}};
}

std::string importance_text(const ImportanceResult& r) {
  std::ostringstream out;
  out << "Baseline accuracy: " << std::fixed << std::setprecision(4) << r.baseline_accuracy << "\n";
  out << std::left << std::setw(8) << "Channel" << std::right << std::setw(12) << "Mean drop" << std::setw(12)
      << "Std" << "\n";
  for (const auto& c : r.per_channel) {
    out << std::left << std::setw(8) << channel_name(c.channel) << std::right << std::setw(12) << c.mean_drop
        << std::setw(12) << c.std_drop << "\n";
  }
  return out.str();
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"EEG scalogram ADHD screening pipeline", "eegscreen"};
  app.require_subcommand(1);
  std::size_t threads = 1;
  app.add_option("--threads", threads, "Worker threads (results do not depend on this)")->capture_default_str();

  // synth
  auto* synth_cmd = app.add_subcommand("synth", "Generate the planted-signal dataset");
  SynthConfig synth_cfg;
  std::string synth_out;
  synth_cmd->add_option("--out", synth_out, "Output directory")->required();
  synth_cmd->add_option("--subjects", synth_cfg.n_subjects, "Number of subjects (half ADHD)")->capture_default_str();
  synth_cmd->add_option("--seed", synth_cfg.seed, "Generator seed")->capture_default_str();
  synth_cmd->add_option("--duration", synth_cfg.duration_s, "Recording length in seconds")->capture_default_str();
  synth_cmd->add_option("--amplitude", synth_cfg.signal_amplitude_uv, "Planted 8 Hz amplitude in microvolts")
      ->capture_default_str();

  // preprocess
  auto* pre_cmd = app.add_subcommand("preprocess", "Band-pass filter and segment recordings");
  PipelineConfig pipe;
  std::string pre_manifest, pre_out;
  pre_cmd->add_option("--manifest", pre_manifest, "Dataset manifest")->required();
  pre_cmd->add_option("--out", pre_out, "Output directory")->required();
  pre_cmd->add_option("--low", pipe.low_hz, "Pass-band low edge, Hz")->capture_default_str();
  pre_cmd->add_option("--high", pipe.high_hz, "Pass-band high edge, Hz")->capture_default_str();
  pre_cmd->add_option("--window", pipe.segments.window_s, "Window length, s")->capture_default_str();
  pre_cmd->add_option("--hop", pipe.segments.hop_s, "Hop between windows, s")->capture_default_str();

  // scalogram
  auto* sc_cmd = app.add_subcommand("scalogram", "Compute SCLG scalograms from segments");
  std::string sc_segments, sc_manifest, sc_out;
  auto* sc_seg_opt = sc_cmd->add_option("--segments", sc_segments, "Directory written by preprocess");
  auto* sc_man_opt = sc_cmd->add_option("--manifest", sc_manifest, "Run preprocess in memory from a manifest instead");
  sc_seg_opt->excludes(sc_man_opt);
  sc_cmd->add_option("--out", sc_out, "Output directory")->required();
  sc_cmd->add_option("--scales", pipe.n_scales, "Number of log-spaced scales")->capture_default_str();
  sc_cmd->add_option("--omega0", pipe.wavelet.omega0, "Morlet centre angular frequency")->capture_default_str();

  // train
  auto* train_cmd = app.add_subcommand("train", "Train a classifier on a scalogram directory");
  ModelOptions train_opts;
  std::string train_in, train_out;
  train_cmd->add_option("--scalograms", train_in, "SCLG directory")->required();
  train_cmd->add_option("--out", train_out, "Output directory")->required();
  add_model_options(train_cmd, train_opts);

  // evaluate
  auto* eval_cmd = app.add_subcommand("evaluate", "Subject-grouped k-fold cross-validation");
  ModelOptions eval_opts;
  std::string eval_in, eval_out, eval_gran = "subject";
  std::size_t eval_k = 5;
  eval_cmd->add_option("--scalograms", eval_in, "SCLG directory")->required();
  eval_cmd->add_option("--out", eval_out, "Output directory")->required();
  eval_cmd->add_option("--k", eval_k, "Number of folds")->capture_default_str();
  eval_cmd->add_option("--granularity", eval_gran, "Fold unit")
      ->check(CLI::IsMember({"subject", "segment"}))
      ->capture_default_str();
  add_model_options(eval_cmd, eval_opts);

  // importance
  auto* imp_cmd = app.add_subcommand("importance", "Per-channel permutation importance");
  std::string imp_in, imp_out, imp_model, imp_plan, imp_eval, imp_mode = "shuffle";
  std::size_t imp_repeats = 19;
  std::uint64_t imp_seed = 0;
  std::optional<std::size_t> imp_fold;
  imp_cmd->add_option("--scalograms", imp_in, "SCLG directory")->required();
  imp_cmd->add_option("--out", imp_out, "Output directory")->required();
  auto* imp_eval_opt = imp_cmd->add_option("--eval-dir", imp_eval, "Directory written by evaluate (uses its fold models)");
  auto* imp_model_opt = imp_cmd->add_option("--model", imp_model, "WGTS model");
  imp_eval_opt->excludes(imp_model_opt);
  imp_cmd->add_option("--fold-plan", imp_plan, "Fold plan; with --fold restricts the test set")->excludes(imp_eval_opt);
  imp_cmd->add_option("--fold", imp_fold, "Fold index (default with --eval-dir: every fold)");
  imp_cmd->add_option("--repeats", imp_repeats, "Perturbations per channel")->capture_default_str();
  imp_cmd->add_option("--mode", imp_mode, "Perturbation")
      ->check(CLI::IsMember({"shuffle", "noise"}))
      ->capture_default_str();
  imp_cmd->add_option("--seed", imp_seed, "Perturbation seed")->capture_default_str();

  // report
  auto* rep_cmd = app.add_subcommand("report", "Print a stored evaluation or importance result");
  std::string rep_eval, rep_imp;
  auto* rep_eval_opt = rep_cmd->add_option("--eval-dir", rep_eval, "Directory written by evaluate");
  auto* rep_imp_opt = rep_cmd->add_option("--importance", rep_imp, "importance JSON file");
  rep_eval_opt->excludes(rep_imp_opt);

  // serve
  auto* serve_cmd = app.add_subcommand("serve", "Start the screening HTTP service");
  screening::ServerConfig srv;
  std::vector<std::string> serve_models;
  std::string serve_data, serve_static;
  serve_cmd->add_option("--host", srv.host, "Bind address")->capture_default_str();
  serve_cmd->add_option("--port", srv.port, "Port")->capture_default_str();
  serve_cmd->add_option("--data-dir", serve_data, "Session log directory (default: in memory)");
  serve_cmd->add_option("--static-dir", serve_static, "Directory served at /");
  serve_cmd->add_option("--model", serve_models, "Model as id=path or path (id 'default'); repeatable");
  serve_cmd->add_option("--min-accuracy", srv.thresholds.min_accuracy, "Summary accuracy threshold")
      ->capture_default_str();
  serve_cmd->add_option("--max-median-rt", srv.thresholds.max_median_rt_ms, "Summary median RT threshold, ms")
      ->capture_default_str();

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kValidationError;
  }

  try {
    if (threads == 0) throw Error(Errc::BadConfig, "--threads must be >= 1");
    set_num_threads(threads);

    if (*synth_cmd) {
      const fs::path dir = resolve(synth_out);
      make_dir(dir);
      const auto recs = synthesize_dataset(synth_cfg);
      DatasetManifest m;
      for (const auto& r : recs) {
        const fs::path file = dir / (r.subject_id + ".csv");
        save_recording(file, r);
        m.entries.push_back({file, r.subject_id, r.label});
      }
      save_manifest(dir / "manifest.json", m);
      json signal_channels = json::array();
      for (Channel c : synth_cfg.signal_channels) signal_channels.push_back(std::string(channel_name(c)));
      write_stamp(dir, args, "synth",
                  {{"subjects", synth_cfg.n_subjects},
                   {"seed", synth_cfg.seed},
                   {"duration_s", synth_cfg.duration_s},
                   {"sample_rate_hz", synth_cfg.sample_rate_hz},
                   {"signal_hz", synth_cfg.signal_hz},
                   {"signal_amplitude_uv", synth_cfg.signal_amplitude_uv},
                   {"signal_channels", signal_channels}});
      out << "wrote " << recs.size() << " recordings to " << dir.string() << "\n";
      return kOk;
    }

    if (*pre_cmd) {
      const fs::path dir = resolve(pre_out);
      make_dir(dir);
      const auto m = load_manifest(resolve(pre_manifest));
      json entries = json::array();
      std::size_t n = 0;
      for (const auto& e : m.entries) {
        Recording rec = load_recording(e.path);
        rec.subject_id = e.subject_id;
        rec.label = e.label;
        for (const auto& s : preprocess_recording(rec, pipe)) {
          const std::string name = segment_filename(s);
          save_recording(dir / name, segment_as_recording(s));
          entries.push_back({{"path", name},
                             {"subject_id", s.subject_id},
                             {"label", static_cast<int>(s.label)},
                             {"segment_index", s.segment_index},
                             {"start_sample", s.start_sample}});
          ++n;
        }
      }
      write_json(dir / "segments.json", {{"entries", entries}});
      write_json(dir / "pipeline.json", to_json(pipe));
      write_stamp(dir, args, "preprocess", to_json(pipe));
      out << "wrote " << n << " segments to " << dir.string() << "\n";
      return kOk;
    }

    if (*sc_cmd) {
      if (sc_segments.empty() == sc_manifest.empty())
        throw Error(Errc::BadConfig, "give exactly one of --segments or --manifest");
      const fs::path dir = resolve(sc_out);
      make_dir(dir);
      std::vector<Scalogram> all;
      if (!sc_segments.empty()) {
        const fs::path seg_dir = resolve(sc_segments);
        const PipelineConfig stored = pipeline_in(seg_dir);
        pipe.low_hz = stored.low_hz;
        pipe.high_hz = stored.high_hz;
        pipe.segments = stored.segments;
        all = scalograms_from_segments(load_segment_dir(seg_dir), pipe);
      } else {
        for (const auto& e : load_manifest(resolve(sc_manifest)).entries) {
          Recording rec = load_recording(e.path);
          rec.subject_id = e.subject_id;
          rec.label = e.label;
          auto part = scalograms_from_recording(rec, pipe);
          all.insert(all.end(), std::make_move_iterator(part.begin()), std::make_move_iterator(part.end()));
        }
      }
      for (const auto& s : all) save_scalogram(dir / scalogram_filename(s), s);
      write_json(dir / "pipeline.json", to_json(pipe));
      write_stamp(dir, args, "scalogram", to_json(pipe));
      out << "wrote " << all.size() << " scalograms to " << dir.string() << "\n";
      return kOk;
    }

    if (*train_cmd) {
      const fs::path in = resolve(train_in), dir = resolve(train_out);
      const auto data = load_scalogram_dir(in);
      const ModelConfig mc = model_config_for(train_opts, data);
      make_dir(dir);
      ResNet model(mc, derive_seed(train_opts.seed, 0x1417));
      const auto result = train(model, data, train_config_for(train_opts));
      save_weights(dir / "model.wgts", model, {{"pipeline", to_json(pipeline_in(in))}, {"train", options_json(train_opts)}});
      write_text(dir / "train_log.jsonl", training_log_jsonl(result.log));
      write_stamp(dir, args, "train", {{"model", to_json(mc)}, {"train", options_json(train_opts)}});
      const auto& last = result.log.back();
      out << "epoch " << last.epoch << " loss " << last.mean_loss << " train_acc " << last.train_acc << "\n";
      return kOk;
    }

    if (*eval_cmd) {
      const fs::path in = resolve(eval_in), dir = resolve(eval_out);
      const auto data = load_scalogram_dir(in);
      const ModelConfig mc = model_config_for(eval_opts, data);
      const FoldPlan plan = eval_gran == "subject" ? make_folds(subjects_of(data), eval_k, eval_opts.seed)
                                                   : make_segment_folds(data, eval_k, eval_opts.seed);
      make_dir(dir);
      const CvResult cv = cross_validate(data, plan, mc, train_config_for(eval_opts));
      const json pipeline = to_json(pipeline_in(in));
      for (const auto& f : cv.folds) {
        save_weights(dir / fold_file("model", f.fold, ".wgts"), *f.model,
                     {{"pipeline", pipeline}, {"fold", f.fold}, {"train", options_json(eval_opts)}});
        write_text(dir / fold_file("train_log", f.fold, ".jsonl"), training_log_jsonl(f.log));
      }
      write_json(dir / "fold_plan.json", to_json(plan));
      write_json(dir / "report.json", to_json(cv));
      const std::string table = "Segment level\n" + format_table(cv.segment_aggregate) + "\nSubject level (majority vote)\n" +
                                format_table(cv.subject_aggregate);
      write_text(dir / "report.txt", table);
      write_stamp(dir, args, "evaluate",
                  {{"model", to_json(mc)}, {"train", options_json(eval_opts)}, {"k", eval_k}, {"granularity", eval_gran}});
      out << table;
      return kOk;
    }

    if (*imp_cmd) {
      const fs::path dir = resolve(imp_out);
      const auto data = load_scalogram_dir(resolve(imp_in));
      const PerturbMode mode = parse_perturb_mode(imp_mode);
      make_dir(dir);
      json summary = {{"mode", imp_mode}, {"repeats", imp_repeats}, {"seed", imp_seed}, {"folds", json::array()}};
      auto run_one = [&](const fs::path& model_path, const std::vector<Scalogram>& test, const std::string& stem,
                         std::optional<std::size_t> fold) {
        const LoadedModel lm = load_weights(model_path);
        const ImportanceResult r = channel_importance(*lm.model, test, imp_repeats, mode, imp_seed);
        json j = to_json(r);
        if (fold) j["fold"] = *fold;
        write_json(dir / (stem + ".json"), j);
        write_text(dir / (stem + ".csv"), importance_csv(r));
        json ranking = json::array();
        for (Channel c : r.ranking()) ranking.push_back(std::string(channel_name(c)));
        summary["folds"].push_back({{"fold", fold ? json(*fold) : json(nullptr)},
                                    {"baseline_accuracy", r.baseline_accuracy},
                                    {"ranking", ranking}});
        if (fold) out << "fold " << *fold << "\n";
        out << importance_text(r);
      };
      if (!imp_eval.empty()) {
        const fs::path eval_dir = resolve(imp_eval);
        const FoldPlan plan = fold_plan_from_json(read_json(eval_dir / "fold_plan.json"));
        std::vector<std::size_t> folds;
        if (imp_fold) {
          if (*imp_fold >= plan.k) throw Error(Errc::BadConfig, "--fold out of range");
          folds.push_back(*imp_fold);
        } else {
          for (std::size_t f = 0; f < plan.k; ++f) folds.push_back(f);
        }
        for (std::size_t f : folds)
          run_one(eval_dir / fold_file("model", f, ".wgts"), fold_test_set(data, plan, f),
                  fold_file("importance", f, ""), f);
      } else {
        if (imp_model.empty()) throw Error(Errc::BadConfig, "give --model or --eval-dir");
        if (!imp_plan.empty() != imp_fold.has_value())
          throw Error(Errc::BadConfig, "--fold-plan and --fold go together");
        std::vector<Scalogram> test = data;
        if (imp_fold) {
          const FoldPlan plan = fold_plan_from_json(read_json(resolve(imp_plan)));
          test = fold_test_set(data, plan, *imp_fold);
        }
        run_one(resolve(imp_model), test, "importance", imp_fold);
      }
      write_json(dir / "importance_summary.json", summary);
      write_stamp(dir, args, "importance", {{"mode", imp_mode}, {"repeats", imp_repeats}, {"seed", imp_seed}});
      return kOk;
    }

    if (*rep_cmd) {
      if (!rep_eval.empty()) {
        const json j = read_json(resolve(rep_eval) / "report.json");
        out << "Segment level\n"
            << format_table(metrics_report_from_json(j.at("aggregate").at("segment"))) << "\nSubject level (majority vote)\n"
            << format_table(metrics_report_from_json(j.at("aggregate").at("subject")));
        return kOk;
      }
      if (!rep_imp.empty()) {
        const json j = read_json(resolve(rep_imp));
        ImportanceResult r;
        r.baseline_accuracy = j.at("baseline_accuracy").get<double>();
        for (const auto& name : j.at("ranking")) {
          const auto& c = j.at("per_channel").at(name.get<std::string>());
          r.per_channel.push_back({normalize_channel_name(name.get<std::string>()), c.at("mean_drop").get<double>(),
                                   c.at("std_drop").get<double>(), c.at("repeats").get<std::size_t>()});
        }
        out << importance_text(r);
        return kOk;
      }
      throw Error(Errc::BadConfig, "give --eval-dir or --importance");
    }

    if (*serve_cmd) {
      if (!serve_data.empty()) srv.data_dir = resolve(serve_data);
      if (!serve_static.empty()) srv.static_dir = resolve(serve_static);
      screening::ScreeningServer server(srv);
      for (const auto& spec : serve_models) {
        const auto eq = spec.find('=');
        const std::string id = eq == std::string::npos ? "default" : spec.substr(0, eq);
        const std::string path = eq == std::string::npos ? spec : spec.substr(eq + 1);
        server.load_model(id, resolve(path));
      }
      out << "listening on http://" << srv.host << ":" << srv.port << "\n" << std::flush;
      if (!server.listen()) throw Error(Errc::Io, "cannot listen on " + srv.host + ":" + std::to_string(srv.port));
      return kOk;
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return is_validation_error(e.code()) ? kValidationError : kRuntimeError;
  } catch (const json::exception& e) {
    err << "error: malformed JSON: " << e.what() << "\n";
    return kValidationError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kRuntimeError;
  }
  err << app.help();
  return kValidationError;
}

int run(int argc, const char* const* argv) {
  std::vector<std::string> args(argv, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace eegscreen::cli
