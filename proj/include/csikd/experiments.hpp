#pragma once

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <thread>

#include <json.hpp>

#include "csikd/bench.hpp"
#include "csikd/flops.hpp"
#include "csikd/report.hpp"
#include "csikd/train.hpp"

namespace csikd {

// ---------------------------------------------------------------------------
// Desk-scale experiment suite: datasets, the four training regimes, the
// sequential-training baseline, the generalization recipe, hyperparameter
// sweeps, FLOPs/NMSE/timing tables, and a machine-readable summary.
// Wall-clock measurements land in files marked non-deterministic; every
// other artifact is byte-reproducible for a fixed seed.
// ---------------------------------------------------------------------------

struct SuiteScale {
  SplitCounts counts{4000, 1000, 1000};
  SplitCounts gen_counts{2000, 500, 500};
  SplitCounts sweep_counts{800, 200, 200};
  int n_t = 32;
  int n_c = 32;
  int n_s = 128;
  int crblock_width = 8;
  int teacher_epochs = 30;
  int student_epochs = 26;
  int encoder_kd_epochs = 26;
  int fine_tune_budget = 4;
  int sweep_epochs = 8;
  int batch_size = 50;
  int patience = 1000;  // desk runs usually exhaust their epoch budget
  int bench_repetitions = 300;
  int bench_warmups = 30;

  static SuiteScale desk() { return {}; }

  // Smoke-test scale: minutes-level full pipeline on tiny dimensions.
  static SuiteScale tiny() {
    SuiteScale s;
    s.counts = {240, 60, 60};
    s.gen_counts = {160, 40, 40};
    s.sweep_counts = {120, 30, 30};
    s.n_t = 8;
    s.n_c = 8;
    s.n_s = 8;
    s.crblock_width = 4;
    s.teacher_epochs = 6;
    s.student_epochs = 5;
    s.encoder_kd_epochs = 5;
    s.fine_tune_budget = 1;
    s.sweep_epochs = 2;
    s.batch_size = 32;
    s.bench_repetitions = 20;
    s.bench_warmups = 4;
    return s;
  }
};

struct SuiteOptions {
  std::string out_dir;
  SuiteScale scale = SuiteScale::desk();
  int seeds = 3;
  std::uint64_t base_seed = 1000;
  int workers = 2;
  bool with_sweeps = true;
  bool with_generalization = true;
  bool with_bench = true;
  // When set, the variant-KD stages run as separate invocations of this
  // binary, exchanging nothing but the pair files on disk.
  std::string self_exe;
  bool quiet = false;
};

// LOS desk scenario (dataset 1) and its NLOS counterpart (dataset 2). The
// moderate K-factor and wide angle/delay spreads keep the min-max
// normalized dynamic range trainable at desk sample counts.
inline ScenarioConfig desk_scenario_los(int n_t, int n_c, std::uint64_t seed) {
  ScenarioConfig sc;
  sc.n_tx_antennas = n_t;
  sc.n_subcarriers = n_c;
  sc.n_clusters = 8;
  sc.n_subpaths_per_cluster = 10;
  sc.center_frequency = 2.655e9;
  sc.bandwidth = 70e6;
  sc.antenna_spacing_over_wavelength = 0.5;
  sc.los = true;
  sc.rician_k_factor_db = 3.0;
  sc.angle_spread = 0.3;
  sc.max_delay = 300e-9;
  sc.seed = seed;
  return sc;
}

inline ScenarioConfig desk_scenario_nlos(int n_t, int n_c, std::uint64_t seed) {
  ScenarioConfig sc = desk_scenario_los(n_t, n_c, seed);
  sc.los = false;
  return sc;
}

// Union of two generation scenarios: raw samples are interleaved per split
// (all of a's, then all of b's), and the normalization is recomputed over
// the combined training split.
inline CsiDataset build_mixed_dataset(const ScenarioConfig& a, const ScenarioConfig& b,
                                      const SplitCounts& counts_each) {
  a.validate();
  b.validate();
  if (a.n_tx_antennas != b.n_tx_antennas || a.n_subcarriers != b.n_subcarriers)
    throw std::invalid_argument("build_mixed_dataset: dimension mismatch");
  CsiDataset ds;
  ds.scenario = a;
  ds.n_train = 2 * counts_each.train;
  ds.n_val = 2 * counts_each.val;
  ds.n_test = 2 * counts_each.test;
  auto append = [&](const ScenarioConfig& sc, std::uint64_t begin, std::uint64_t count) {
    for (std::uint64_t i = 0; i < count; ++i)
      ds.samples.push_back(generate_angular_delay_sample(sc, begin + i));
  };
  // train: a then b; same for val and test
  append(a, 0, counts_each.train);
  append(b, 0, counts_each.train);
  append(a, counts_each.train, counts_each.val);
  append(b, counts_each.train, counts_each.val);
  append(a, counts_each.train + counts_each.val, counts_each.test);
  append(b, counts_each.train + counts_each.val, counts_each.test);

  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (std::uint64_t i = 0; i < ds.n_train; ++i)
    for (double v : ds.samples[i].values) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  ds.meta = {lo, hi, "train"};
  ds.meta.validate();
  for (std::uint64_t i = 0; i < ds.samples.size(); ++i) {
    const bool is_val = i >= ds.n_train && i < ds.n_train + ds.n_val;
    const bool is_test = i >= ds.n_train + ds.n_val;
    for (double& v : ds.samples[i].values) {
      double x = ds.meta.normalize(v);
      if (x < 0.0 || x > 1.0) {
        if (is_val) ++ds.clamped_val;
        if (is_test) ++ds.clamped_test;
        x = std::clamp(x, 0.0, 1.0);
      }
      v = x;
    }
    ds.samples[i].normalized = true;
  }
  return ds;
}

// --- per-seed results ---------------------------------------------------------

struct RegimeOutcome {
  double nmse_db = std::numeric_limits<double>::quiet_NaN();
  double nmse_linear = std::numeric_limits<double>::quiet_NaN();
  double wall_seconds = 0.0;
  int epochs = 0;
  int best_epoch = 0;
  double best_val_loss = std::numeric_limits<double>::quiet_NaN();
};

struct SeedResults {
  std::uint64_t seed = 0;
  RegimeOutcome teacher, vanilla, aekd, ekd_distill, ekd_finetuned, variant, sequential;
  double ekd_total_wall = 0.0;
  double predicted_speedup = 0.0;
  double measured_speedup = 0.0;
  // generalization
  RegimeOutcome gen_teacher_d2, gen_vanilla_d2, gen_variant_d2;
  RegimeOutcome gen_vanilla_d1, gen_variant_d1;
};

struct SuiteSummary {
  std::vector<SeedResults> seeds;
  std::int64_t flops_student_encoder_116 = 0;
  std::int64_t flops_student_encoder_132 = 0;
  std::int64_t flops_teacher_encoder = 0;
  std::int64_t flops_decoder = 0;
  double bench_student_median = 0.0;
  double bench_teacher_median = 0.0;
  std::vector<std::pair<double, double>> alpha_sweep;        // alpha -> nmse db
  std::vector<std::pair<double, double>> temperature_sweep;  // t -> nmse db
};

inline double median3(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v[v.size() / 2];
}

namespace detail {

inline void fill_outcome(RegimeOutcome& o, const TrainReport& r) {
  o.nmse_db = r.final_nmse_db;
  o.nmse_linear = r.final_nmse_linear;
  o.wall_seconds = r.wall_seconds;
  o.epochs = r.epochs_run();
  o.best_epoch = r.best_epoch;
  o.best_val_loss = r.best_val_loss;
}

inline void write_report_files(const std::string& dir, const TrainReport& r,
                               const std::string& name) {
  std::ofstream js(dir + "/" + name + "_report.json");
  js << train_report_to_json(r).dump(2) << "\n";
  CsvTable losses;
  losses.header = {"epoch", "train_loss", "val_loss"};
  for (std::size_t i = 0; i < r.train_losses.size(); ++i)
    losses.add_row({std::to_string(i + 1), csv_f64(r.train_losses[i]), csv_f64(r.val_losses[i])});
  losses.save(dir + "/" + name + "_losses.csv");
}

inline void save_model(const Model& m, const std::string& path, const CheckpointMeta& meta) {
  save_checkpoint(m, path, meta);
  std::ofstream spec(path + ".spec.json");
  spec << model_spec_to_json(m.spec()).dump(2) << "\n";
}

inline int run_command(const std::string& cmd) {
  const int rc = std::system(cmd.c_str());
  return rc;
}

}  // namespace detail

// Loads a checkpoint along with the spec JSON stored next to it.
inline Model load_model_with_spec(const std::string& ckpt_path, CheckpointMeta* meta = nullptr) {
  std::ifstream spec_in(ckpt_path + ".spec.json");
  if (!spec_in)
    throw std::runtime_error("missing model spec sidecar: " + ckpt_path + ".spec.json");
  nlohmann::json j;
  spec_in >> j;
  return load_checkpoint(model_spec_from_json(j), ckpt_path, meta);
}

// --- the suite ------------------------------------------------------------------

class DeskSuite {
public:
  explicit DeskSuite(SuiteOptions opt) : opt_(std::move(opt)), scale_(opt_.scale) {}

  SuiteSummary run() {
    namespace fs = std::filesystem;
    fs::create_directories(opt_.out_dir + "/datasets");
    fs::create_directories(opt_.out_dir + "/reports");

    build_datasets();

    SuiteSummary summary;
    summary.seeds.resize(static_cast<std::size_t>(opt_.seeds));
    {
      std::vector<std::function<void()>> tasks;
      for (int i = 0; i < opt_.seeds; ++i) {
        summary.seeds[static_cast<std::size_t>(i)].seed = opt_.base_seed + static_cast<std::uint64_t>(i);
        tasks.push_back([this, &summary, i] { run_seed_chain(summary.seeds[static_cast<std::size_t>(i)]); });
        if (opt_.with_generalization)
          tasks.push_back([this, &summary, i] { run_generalization_chain(summary.seeds[static_cast<std::size_t>(i)]); });
      }
      run_tasks(tasks);
    }

    fill_flops(summary);
    if (opt_.with_bench) run_bench(summary);
    if (opt_.with_sweeps) run_sweeps(summary);
    write_reports(summary);
    return summary;
  }

private:
  void log(const std::string& msg) {
    if (opt_.quiet) return;
    std::lock_guard<std::mutex> lock(log_mutex_);
    std::fprintf(stderr, "[suite] %s\n", msg.c_str());
  }

  void run_tasks(std::vector<std::function<void()>>& tasks) {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    std::mutex err_mutex;
    std::string first_error;
    const int workers = std::max(1, std::min<int>(opt_.workers, static_cast<int>(tasks.size())));
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (;;) {
          const std::size_t i = next.fetch_add(1);
          if (i >= tasks.size()) return;
          try {
            tasks[i]();
          } catch (const std::exception& e) {
            std::lock_guard<std::mutex> lock(err_mutex);
            if (first_error.empty()) first_error = e.what();
          }
        }
      });
    }
    for (auto& t : pool) t.join();
    if (!first_error.empty()) throw std::runtime_error(first_error);
  }

  TrainConfig config_for(int max_epochs, std::uint64_t seed) const {
    TrainConfig cfg = TrainConfig::desk(max_epochs, seed);
    cfg.batch_size = scale_.batch_size;
    cfg.patience = scale_.patience;
    return cfg;
  }

  void build_datasets() {
    log("building datasets");
    sc_d1_ = desk_scenario_los(scale_.n_t, scale_.n_c, 20251);
    sc_d2_ = desk_scenario_nlos(scale_.n_t, scale_.n_c, 20252);
    d1_ = build_dataset(sc_d1_, scale_.counts);
    save_dataset(d1_, opt_.out_dir + "/datasets/d1.csid");
    if (opt_.with_generalization) {
      gen_d1_ = build_dataset(sc_d1_, scale_.gen_counts);
      gen_d2_ = build_dataset(sc_d2_, scale_.gen_counts);
      gen_mixed_ = build_mixed_dataset(sc_d1_, sc_d2_, scale_.gen_counts);
      save_dataset(gen_d1_, opt_.out_dir + "/datasets/gen_d1.csid");
      save_dataset(gen_d2_, opt_.out_dir + "/datasets/gen_d2.csid");
      save_dataset(gen_mixed_, opt_.out_dir + "/datasets/gen_mixed.csid");
    }
    if (opt_.with_sweeps) {
      ScenarioConfig sweep_sc = sc_d1_;
      sweep_sc.seed = 20253;
      sweep_ds_ = build_dataset(sweep_sc, scale_.sweep_counts);
      save_dataset(sweep_ds_, opt_.out_dir + "/datasets/sweep.csid");
    }
  }

  std::string seed_dir(const std::string& regime, std::uint64_t seed) const {
    const std::string dir = opt_.out_dir + "/runs/" + regime + "/seed" + std::to_string(seed);
    std::filesystem::create_directories(dir);
    return dir;
  }

  ModelSpec student_enc_spec() const {
    return build_student_encoder(scale_.n_t, scale_.n_c, scale_.n_s);
  }
  ModelSpec teacher_enc_spec() const {
    return build_teacher_encoder(scale_.n_t, scale_.n_c, scale_.n_s);
  }
  ModelSpec decoder_spec() const {
    return build_decoder(scale_.n_t, scale_.n_c, scale_.n_s, scale_.crblock_width);
  }

  // teacher -> vanilla -> autoencoder KD -> encoder KD -> variant ->
  // sequential, all on dataset 1 with one training seed.
  void run_seed_chain(SeedResults& out) {
    const std::uint64_t seed = out.seed;
    log("seed " + std::to_string(seed) + ": teacher");
    AutoencoderResult teacher = [&] {
      Autoencoder init = make_autoencoder(teacher_enc_spec(), decoder_spec(), seed, d1_.meta);
      auto res = train_vanilla(std::move(init), d1_, config_for(scale_.teacher_epochs, seed));
      return res;
    }();
    {
      const std::string dir = seed_dir("teacher", seed);
      detail::save_model(teacher.model.encoder, dir + "/enc.ckpt", teacher.meta);
      detail::save_model(teacher.model.decoder, dir + "/dec.ckpt", teacher.meta);
      detail::write_report_files(dir, teacher.report, "train");
    }
    detail::fill_outcome(out.teacher, teacher.report);

    log("seed " + std::to_string(seed) + ": vanilla student");
    const TrainConfig student_cfg = config_for(scale_.student_epochs, seed);
    AutoencoderResult vanilla = [&] {
      Autoencoder init = make_autoencoder(student_enc_spec(), decoder_spec(), seed, d1_.meta);
      return train_vanilla(std::move(init), d1_, student_cfg);
    }();
    {
      const std::string dir = seed_dir("vanilla", seed);
      detail::save_model(vanilla.model.encoder, dir + "/enc.ckpt", vanilla.meta);
      detail::save_model(vanilla.model.decoder, dir + "/dec.ckpt", vanilla.meta);
      detail::write_report_files(dir, vanilla.report, "train");
    }
    detail::fill_outcome(out.vanilla, vanilla.report);

    log("seed " + std::to_string(seed) + ": autoencoder KD");
    AutoencoderResult aekd = [&] {
      Autoencoder init = make_autoencoder(student_enc_spec(), decoder_spec(), seed, d1_.meta);
      return distill_autoencoder(teacher.model, std::move(init), d1_, student_cfg,
                                 {.alpha = 0.3, .temperature = 5.0});
    }();
    {
      const std::string dir = seed_dir("aekd", seed);
      detail::save_model(aekd.model.encoder, dir + "/enc.ckpt", aekd.meta);
      detail::save_model(aekd.model.decoder, dir + "/dec.ckpt", aekd.meta);
      detail::write_report_files(dir, aekd.report, "train");
    }
    detail::fill_outcome(out.aekd, aekd.report);

    log("seed " + std::to_string(seed) + ": encoder KD");
    const TrainConfig ekd_cfg = config_for(scale_.encoder_kd_epochs, seed);
    EncoderResult ekd = distill_encoder(teacher.model.encoder,
                                        make_encoder(student_enc_spec(), seed, d1_.meta), d1_,
                                        ekd_cfg);
    AutoencoderResult ekd_ft = fine_tune_end_to_end(
        combine(ekd.model.clone(), teacher.model.decoder.clone()), d1_, ekd_cfg,
        scale_.fine_tune_budget);
    {
      const std::string dir = seed_dir("ekd", seed);
      detail::save_model(ekd.model, dir + "/enc_distilled.ckpt", ekd.meta);
      detail::save_model(ekd_ft.model.encoder, dir + "/enc.ckpt", ekd_ft.meta);
      detail::save_model(ekd_ft.model.decoder, dir + "/dec.ckpt", ekd_ft.meta);
      detail::write_report_files(dir, ekd.report, "distill");
      detail::write_report_files(dir, ekd_ft.report, "finetune");
    }
    detail::fill_outcome(out.ekd_distill, ekd.report);
    detail::fill_outcome(out.ekd_finetuned, ekd_ft.report);
    out.ekd_total_wall = ekd.report.wall_seconds + ekd_ft.report.wall_seconds;
    out.measured_speedup = out.aekd.wall_seconds / out.ekd_total_wall;
    {
      TrainingTimeModel ttm;
      ttm.n_autoencoder_epochs = out.aekd.epochs;
      ttm.n_encoder_distill_epochs = out.ekd_distill.epochs;
      ttm.n_fine_tune_epochs = out.ekd_finetuned.epochs;
      ttm.student_encoder_flops = model_flops(student_enc_spec()).total;
      ttm.student_decoder_flops = model_flops(decoder_spec()).total;
      ttm.teacher_decoder_flops = ttm.student_decoder_flops;
      out.predicted_speedup = training_time_ratio(ttm);
    }

    log("seed " + std::to_string(seed) + ": variant encoder KD");
    run_variant(out, teacher.model, d1_, seed, seed_dir("variant", seed));

    log("seed " + std::to_string(seed) + ": sequential training");
    {
      // BS-first sequential baseline with the same lightweight encoder
      // architecture on both sides; the vanilla run doubles as the
      // BS-side autoencoder training.
      SequentialResult seq = run_sequential_training(
          vanilla.model.clone(), make_encoder(student_enc_spec(), seed + 7777, d1_.meta), d1_,
          ekd_cfg, /*bs_is_pretrained=*/true);
      Autoencoder deployed = combine(seq.deploy_encoder.model.clone(),
                                     seq.bs_autoencoder.model.decoder.clone());
      const NmseResult n = evaluate_autoencoder(deployed, d1_);
      const std::string dir = seed_dir("sequential", seed);
      save_pairs(seq.pairs, dir + "/pairs.csip");
      detail::save_model(seq.deploy_encoder.model, dir + "/deploy_enc.ckpt",
                         seq.deploy_encoder.meta);
      detail::write_report_files(dir, seq.deploy_encoder.report, "deploy");
      detail::fill_outcome(out.sequential, seq.deploy_encoder.report);
      out.sequential.nmse_db = n.db;
      out.sequential.nmse_linear = n.linear;
    }
  }

  // Variant encoder KD through the on-disk pair exchange. With a self_exe
  // the three stages run as separate processes.
  void run_variant(SeedResults& out, Autoencoder& teacher, const CsiDataset& ds,
                   std::uint64_t seed, const std::string& dir) {
    const TrainConfig cfg = config_for(scale_.encoder_kd_epochs, seed);
    const std::string pairs_teacher_path = dir + "/pairs_teacher.csip";
    const std::string pairs_student_path = dir + "/pairs_student.csip";
    const std::string student_path = dir + "/student_enc.ckpt";
    const std::string dec_path = dir + "/dec_finetuned.ckpt";

    double total_wall = 0.0;
    if (!opt_.self_exe.empty()) {
      // dump the decoder and teacher encoder for the stage processes
      detail::save_model(teacher.encoder, dir + "/teacher_enc.ckpt", {});
      detail::save_model(teacher.decoder, dir + "/teacher_dec.ckpt", {});
      std::ofstream cfg_out(dir + "/train_config.json");
      cfg_out << train_config_to_json(cfg).dump(2) << "\n";
      cfg_out.close();
      const std::string base = "\"" + opt_.self_exe + "\" variant-distill";
      auto stage = [&](const std::string& args) {
        const std::string cmd = base + " " + args + " >> \"" + dir + "/stages.log\" 2>&1";
        const auto t0 = std::chrono::steady_clock::now();
        const int rc = detail::run_command(cmd);
        total_wall += std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (rc != 0)
          throw std::runtime_error("variant stage failed (exit " + std::to_string(rc) +
                                   "): " + cmd);
      };
      stage("--stage emit-pairs --encoder \"" + dir + "/teacher_enc.ckpt\" --data \"" +
            opt_.out_dir + "/datasets/" + dataset_file_for(ds) + "\" --pairs \"" +
            pairs_teacher_path + "\"");
      stage("--stage train-student --pairs \"" + pairs_teacher_path + "\" --train-config \"" +
            dir + "/train_config.json\" --val-count " + std::to_string(ds.n_val) +
            " --out \"" + student_path + "\" --report \"" + dir + "/student_report.json\"");
      stage("--stage reencode-pairs --encoder \"" + student_path + "\" --pairs \"" +
            pairs_teacher_path + "\" --out \"" + pairs_student_path + "\"");
      stage("--stage finetune-decoder --decoder \"" + dir + "/teacher_dec.ckpt\" --pairs \"" +
            pairs_student_path + "\" --train-config \"" + dir + "/train_config.json\"" +
            " --budget " + std::to_string(scale_.fine_tune_budget) + " --val-count " +
            std::to_string(ds.n_val) + " --out \"" + dec_path + "\" --report \"" + dir +
            "/decoder_report.json\"");

      Model student = load_model_with_spec(student_path);
      Model dec = load_model_with_spec(dec_path);
      Autoencoder deployed = combine(std::move(student), std::move(dec));
      const NmseResult n = evaluate_autoencoder(deployed, ds);
      // reload the stage reports for epoch counts
      nlohmann::json sj, dj;
      std::ifstream(dir + "/student_report.json") >> sj;
      std::ifstream(dir + "/decoder_report.json") >> dj;
      out.variant.nmse_db = n.db;
      out.variant.nmse_linear = n.linear;
      out.variant.epochs = sj.at("epochs_run").get<int>() + dj.at("epochs_run").get<int>();
      out.variant.wall_seconds = total_wall;
    } else {
      VariantKdResult var = run_variant_encoder_kd(
          teacher, make_encoder(student_enc_spec(), seed, ds.meta), ds, cfg,
          scale_.fine_tune_budget);
      save_pairs(var.pairs_teacher, pairs_teacher_path);
      save_pairs(var.pairs_student, pairs_student_path);
      detail::save_model(var.student.model, student_path, var.student.meta);
      detail::save_model(var.decoder.model, dec_path, var.decoder.meta);
      detail::write_report_files(dir, var.student.report, "student");
      detail::write_report_files(dir, var.decoder.report, "decoder");
      Autoencoder deployed = combine(var.student.model.clone(), var.decoder.model.clone());
      const NmseResult n = evaluate_autoencoder(deployed, ds);
      out.variant.nmse_db = n.db;
      out.variant.nmse_linear = n.linear;
      out.variant.epochs = var.student.report.epochs_run() + var.decoder.report.epochs_run();
      out.variant.wall_seconds = var.total_wall_seconds;
    }
  }

  std::string dataset_file_for(const CsiDataset& ds) const {
    if (&ds == &d1_) return "d1.csid";
    if (&ds == &gen_d1_) return "gen_d1.csid";
    throw std::logic_error("unknown dataset");
  }

  // Teacher on mixed LOS+NLOS data, variant KD with the LOS dataset only,
  // vanilla LOS-only baseline; all evaluated on the NLOS test split.
  void run_generalization_chain(SeedResults& out) {
    const std::uint64_t seed = out.seed;
    log("seed " + std::to_string(seed) + ": generalization teacher (mixed)");
    AutoencoderResult teacher = [&] {
      Autoencoder init = make_autoencoder(teacher_enc_spec(), decoder_spec(), seed + 50,
                                          gen_mixed_.meta);
      return train_vanilla(std::move(init), gen_mixed_, config_for(scale_.teacher_epochs, seed + 50));
    }();
    {
      const std::string dir = seed_dir("gen_teacher", seed);
      detail::save_model(teacher.model.encoder, dir + "/enc.ckpt", teacher.meta);
      detail::save_model(teacher.model.decoder, dir + "/dec.ckpt", teacher.meta);
      detail::write_report_files(dir, teacher.report, "train");
    }
    {
      const NmseResult d2 = evaluate_autoencoder(teacher.model, gen_d2_);
      out.gen_teacher_d2.nmse_db = d2.db;
      out.gen_teacher_d2.nmse_linear = d2.linear;
    }

    log("seed " + std::to_string(seed) + ": generalization vanilla (d1 only)");
    AutoencoderResult vanilla = [&] {
      Autoencoder init = make_autoencoder(student_enc_spec(), decoder_spec(), seed + 51,
                                          gen_d1_.meta);
      return train_vanilla(std::move(init), gen_d1_, config_for(scale_.student_epochs, seed + 51));
    }();
    {
      const std::string dir = seed_dir("gen_vanilla", seed);
      detail::save_model(vanilla.model.encoder, dir + "/enc.ckpt", vanilla.meta);
      detail::save_model(vanilla.model.decoder, dir + "/dec.ckpt", vanilla.meta);
      detail::write_report_files(dir, vanilla.report, "train");
      const NmseResult d1 = evaluate_autoencoder(vanilla.model, gen_d1_);
      const NmseResult d2 = evaluate_autoencoder(vanilla.model, gen_d2_);
      out.gen_vanilla_d1.nmse_db = d1.db;
      out.gen_vanilla_d1.nmse_linear = d1.linear;
      out.gen_vanilla_d2.nmse_db = d2.db;
      out.gen_vanilla_d2.nmse_linear = d2.linear;
    }

    log("seed " + std::to_string(seed) + ": generalization variant KD (d1 only)");
    {
      VariantKdResult var = run_variant_encoder_kd(
          teacher.model, make_encoder(student_enc_spec(), seed + 52, gen_d1_.meta), gen_d1_,
          config_for(scale_.encoder_kd_epochs, seed + 52), scale_.fine_tune_budget);
      const std::string dir = seed_dir("gen_variant", seed);
      save_pairs(var.pairs_teacher, dir + "/pairs_teacher.csip");
      save_pairs(var.pairs_student, dir + "/pairs_student.csip");
      detail::save_model(var.student.model, dir + "/student_enc.ckpt", var.student.meta);
      detail::save_model(var.decoder.model, dir + "/dec_finetuned.ckpt", var.decoder.meta);
      Autoencoder deployed = combine(var.student.model.clone(), var.decoder.model.clone());
      const NmseResult d1 = evaluate_autoencoder(deployed, gen_d1_);
      const NmseResult d2 = evaluate_autoencoder(deployed, gen_d2_);
      out.gen_variant_d1.nmse_db = d1.db;
      out.gen_variant_d1.nmse_linear = d1.linear;
      out.gen_variant_d2.nmse_db = d2.db;
      out.gen_variant_d2.nmse_linear = d2.linear;
    }
  }

  void fill_flops(SuiteSummary& s) {
    s.flops_student_encoder_116 = model_flops(build_student_encoder(scale_.n_t, scale_.n_c,
                                                                    2 * scale_.n_t * scale_.n_c / 16))
                                      .total;
    s.flops_student_encoder_132 = model_flops(build_student_encoder(scale_.n_t, scale_.n_c,
                                                                    2 * scale_.n_t * scale_.n_c / 32))
                                      .total;
    s.flops_teacher_encoder = model_flops(teacher_enc_spec()).total;
    s.flops_decoder = model_flops(decoder_spec()).total;
  }

  void run_bench(SuiteSummary& s) {
    log("inference benchmark");
    Model student = make_encoder(student_enc_spec(), opt_.base_seed, d1_.meta);
    Model teacher = make_encoder(teacher_enc_spec(), opt_.base_seed, d1_.meta);
    const TimingReport sr =
        inference_benchmark(student, scale_.bench_repetitions, scale_.bench_warmups);
    const TimingReport tr =
        inference_benchmark(teacher, scale_.bench_repetitions, scale_.bench_warmups);
    s.bench_student_median = sr.median_seconds;
    s.bench_teacher_median = tr.median_seconds;
    CsvTable t;
    t.header = {"component", "host", "repetitions", "warmups", "median_s", "mean_s", "p95_s"};
    for (const TimingReport* r : {&sr, &tr})
      t.add_row({r->component, r->host, std::to_string(r->repetitions),
                 std::to_string(r->warmups), csv_f64(r->median_seconds), csv_f64(r->mean_seconds),
                 csv_f64(r->p95_seconds)});
    t.save(opt_.out_dir + "/reports/bench.csv");  // timing: non-deterministic
    CsvTable raw;
    raw.header = {"component", "repetition", "seconds"};
    for (const TimingReport* r : {&sr, &tr})
      for (std::size_t i = 0; i < r->raw_seconds.size(); ++i)
        raw.add_row({r->component, std::to_string(i), csv_f64(r->raw_seconds[i])});
    raw.save(opt_.out_dir + "/reports/bench_raw.csv");
  }

  void run_sweeps(SuiteSummary& s) {
    log("hyperparameter sweeps");
    const std::uint64_t seed = opt_.base_seed;
    const TrainConfig cfg = config_for(scale_.sweep_epochs, seed);
    AutoencoderResult teacher = [&] {
      Autoencoder init = make_autoencoder(teacher_enc_spec(), decoder_spec(), seed + 90,
                                          sweep_ds_.meta);
      return train_vanilla(std::move(init), sweep_ds_, config_for(scale_.teacher_epochs, seed + 90));
    }();

    std::vector<double> alphas;
    for (int i = 0; i <= 10; ++i) alphas.push_back(i / 10.0);
    std::vector<double> temps;
    for (int i = 1; i <= 10; ++i) temps.push_back(static_cast<double>(i));

    std::mutex m;
    std::vector<std::function<void()>> tasks;
    s.alpha_sweep.resize(alphas.size());
    s.temperature_sweep.resize(temps.size());
    for (std::size_t i = 0; i < alphas.size(); ++i) {
      tasks.push_back([this, &s, &teacher, &m, &cfg, alphas, i, seed] {
        Autoencoder init = make_autoencoder(student_enc_spec(), decoder_spec(), seed + 91,
                                            sweep_ds_.meta);
        AutoencoderResult r = distill_autoencoder(teacher.model, std::move(init), sweep_ds_, cfg,
                                                  {.alpha = alphas[i], .temperature = 5.0});
        std::lock_guard<std::mutex> lock(m);
        s.alpha_sweep[i] = {alphas[i], r.report.final_nmse_db};
      });
    }
    for (std::size_t i = 0; i < temps.size(); ++i) {
      tasks.push_back([this, &s, &teacher, &m, &cfg, temps, i, seed] {
        Autoencoder init = make_autoencoder(student_enc_spec(), decoder_spec(), seed + 91,
                                            sweep_ds_.meta);
        AutoencoderResult r = distill_autoencoder(teacher.model, std::move(init), sweep_ds_, cfg,
                                                  {.alpha = 0.3, .temperature = temps[i]});
        std::lock_guard<std::mutex> lock(m);
        s.temperature_sweep[i] = {temps[i], r.report.final_nmse_db};
      });
    }
    run_tasks(tasks);
  }

  void write_reports(const SuiteSummary& s);

  SuiteOptions opt_;
  SuiteScale scale_;
  ScenarioConfig sc_d1_, sc_d2_;
  CsiDataset d1_, gen_d1_, gen_d2_, gen_mixed_, sweep_ds_;
  std::mutex log_mutex_;
};

inline void DeskSuite::write_reports(const SuiteSummary& s) {
  const std::string rep = opt_.out_dir + "/reports";
  auto collect = [&](auto getter) {
    std::vector<double> v;
    for (const SeedResults& r : s.seeds) v.push_back(getter(r));
    return v;
  };

  // NMSE per regime per seed (autoencoder-KD and encoder-KD views)
  {
    CsvTable t;
    t.header = {"regime", "network", "seed", "nmse_db", "nmse_linear", "epochs"};
    for (const SeedResults& r : s.seeds) {
      auto row = [&](const std::string& regime, const std::string& net, const RegimeOutcome& o) {
        t.add_row({regime, net, std::to_string(r.seed), csv_f64(o.nmse_db),
                   csv_f64(o.nmse_linear), std::to_string(o.epochs)});
      };
      row("vanilla", "crnet_teacher", r.teacher);
      row("vanilla", "crnet_se", r.vanilla);
      row("autoencoder_kd", "crnet_se", r.aekd);
      row("encoder_kd", "crnet_se", r.ekd_finetuned);
      row("variant_encoder_kd", "crnet_se", r.variant);
      row("sequential", "crnet_se", r.sequential);
    }
    t.save(rep + "/nmse.csv");
  }
  // medians table
  {
    CsvTable t;
    t.header = {"metric", "median"};
    t.add_row({"teacher_nmse_db", csv_f64(median3(collect([](auto& r) { return r.teacher.nmse_db; })))});
    t.add_row({"vanilla_nmse_db", csv_f64(median3(collect([](auto& r) { return r.vanilla.nmse_db; })))});
    t.add_row({"aekd_nmse_db", csv_f64(median3(collect([](auto& r) { return r.aekd.nmse_db; })))});
    t.add_row({"ekd_nmse_db", csv_f64(median3(collect([](auto& r) { return r.ekd_finetuned.nmse_db; })))});
    t.add_row({"variant_nmse_db", csv_f64(median3(collect([](auto& r) { return r.variant.nmse_db; })))});
    t.add_row({"sequential_nmse_db", csv_f64(median3(collect([](auto& r) { return r.sequential.nmse_db; })))});
    t.save(rep + "/nmse_medians.csv");
  }
  // FLOPs (Table III shape)
  {
    CsvTable t;
    t.header = {"network", "component", "flops"};
    t.add_row({"crnet_se", "encoder_gamma_1_16", std::to_string(s.flops_student_encoder_116)});
    t.add_row({"crnet_se", "encoder_gamma_1_32", std::to_string(s.flops_student_encoder_132)});
    t.add_row({"crnet", "encoder", std::to_string(s.flops_teacher_encoder)});
    t.add_row({"shared", "decoder", std::to_string(s.flops_decoder)});
    t.save(rep + "/flops.csv");
  }
  // training time (Table VIII shape) — wall clock, excluded from the
  // determinism comparison
  {
    CsvTable t;
    t.header = {"seed", "aekd_seconds", "ekd_distill_seconds", "ekd_finetune_seconds",
                "ekd_total_seconds", "measured_speedup", "predicted_speedup"};
    for (const SeedResults& r : s.seeds)
      t.add_row({std::to_string(r.seed), csv_f64(r.aekd.wall_seconds),
                 csv_f64(r.ekd_distill.wall_seconds), csv_f64(r.ekd_finetuned.wall_seconds),
                 csv_f64(r.ekd_total_wall), csv_f64(r.measured_speedup),
                 csv_f64(r.predicted_speedup)});
    t.save(rep + "/timing.csv");
  }
  // deterministic run metadata
  {
    CsvTable t;
    t.header = {"regime", "seed", "epochs", "best_epoch", "best_val_loss"};
    for (const SeedResults& r : s.seeds) {
      auto row = [&](const std::string& regime, const RegimeOutcome& o) {
        t.add_row({regime, std::to_string(r.seed), std::to_string(o.epochs),
                   std::to_string(o.best_epoch), csv_f64(o.best_val_loss)});
      };
      row("teacher", r.teacher);
      row("vanilla", r.vanilla);
      row("aekd", r.aekd);
      row("ekd_distill", r.ekd_distill);
      row("ekd_finetune", r.ekd_finetuned);
      row("sequential", r.sequential);
    }
    t.save(rep + "/epochs.csv");
  }
  if (opt_.with_generalization) {
    CsvTable t;
    t.header = {"network", "train_data", "seed", "nmse_d1_db", "nmse_d2_db"};
    for (const SeedResults& r : s.seeds) {
      t.add_row({"crnet_teacher", "d1+d2", std::to_string(r.seed), "",
                 csv_f64(r.gen_teacher_d2.nmse_db)});
      t.add_row({"crnet_se_vanilla", "d1", std::to_string(r.seed),
                 csv_f64(r.gen_vanilla_d1.nmse_db), csv_f64(r.gen_vanilla_d2.nmse_db)});
      t.add_row({"crnet_se_variant_kd", "d1", std::to_string(r.seed),
                 csv_f64(r.gen_variant_d1.nmse_db), csv_f64(r.gen_variant_d2.nmse_db)});
    }
    t.save(rep + "/generalization_scenario.csv");
  }
  if (opt_.with_sweeps) {
    CsvTable a;
    a.header = {"alpha", "nmse_db"};
    for (const auto& [alpha, db] : s.alpha_sweep) a.add_row({csv_f64(alpha), csv_f64(db)});
    a.save(rep + "/alpha_sweep.csv");
    CsvTable t;
    t.header = {"temperature", "nmse_db"};
    for (const auto& [temp, db] : s.temperature_sweep) t.add_row({csv_f64(temp), csv_f64(db)});
    t.save(rep + "/temperature_sweep.csv");
  }

  // machine-readable summary for downstream checks
  {
    nlohmann::json j;
    j["seeds"] = nlohmann::json::array();
    for (const SeedResults& r : s.seeds) {
      nlohmann::json e;
      e["seed"] = r.seed;
      auto put = [&e](const std::string& k, const RegimeOutcome& o) {
        e[k] = {{"nmse_db", o.nmse_db},
                {"nmse_linear", o.nmse_linear},
                {"wall_seconds", o.wall_seconds},
                {"epochs", o.epochs}};
      };
      put("teacher", r.teacher);
      put("vanilla", r.vanilla);
      put("aekd", r.aekd);
      put("ekd_distill", r.ekd_distill);
      put("ekd", r.ekd_finetuned);
      put("variant", r.variant);
      put("sequential", r.sequential);
      e["ekd_total_wall"] = r.ekd_total_wall;
      e["measured_speedup"] = r.measured_speedup;
      e["predicted_speedup"] = r.predicted_speedup;
      if (opt_.with_generalization) {
        e["gen"] = {{"teacher_d2_db", r.gen_teacher_d2.nmse_db},
                    {"vanilla_d1_db", r.gen_vanilla_d1.nmse_db},
                    {"vanilla_d2_db", r.gen_vanilla_d2.nmse_db},
                    {"variant_d1_db", r.gen_variant_d1.nmse_db},
                    {"variant_d2_db", r.gen_variant_d2.nmse_db}};
      }
      j["seeds"].push_back(e);
    }
    j["flops"] = {{"student_encoder_gamma_1_16", s.flops_student_encoder_116},
                  {"student_encoder_gamma_1_32", s.flops_student_encoder_132},
                  {"teacher_encoder", s.flops_teacher_encoder},
                  {"decoder", s.flops_decoder}};
    if (opt_.with_bench)
      j["bench"] = {{"student_median_s", s.bench_student_median},
                    {"teacher_median_s", s.bench_teacher_median}};
    if (opt_.with_sweeps) {
      j["alpha_sweep"] = s.alpha_sweep;
      j["temperature_sweep"] = s.temperature_sweep;
    }
    std::ofstream out(rep + "/summary.json");
    out << j.dump(2) << "\n";
  }

  // human-readable summary
  {
    MarkdownWriter md(rep + "/summary.md");
    md.heading("Desk-scale results", 1);
    md.heading("NMSE by training method (median over seeds, dB)");
    md.table({"Network", "Method", "NMSE (dB)"},
             {{"CRNet (teacher)", "vanilla",
               md_f64(median3(collect([](auto& r) { return r.teacher.nmse_db; })))},
              {"CRNet-SE (baseline)", "vanilla",
               md_f64(median3(collect([](auto& r) { return r.vanilla.nmse_db; })))},
              {"CRNet-SE (student)", "autoencoder KD",
               md_f64(median3(collect([](auto& r) { return r.aekd.nmse_db; })))},
              {"CRNet-SE (student)", "encoder KD",
               md_f64(median3(collect([](auto& r) { return r.ekd_finetuned.nmse_db; })))},
              {"CRNet-SE (student)", "variant encoder KD",
               md_f64(median3(collect([](auto& r) { return r.variant.nmse_db; })))},
              {"CRNet-SE (student)", "sequential training",
               md_f64(median3(collect([](auto& r) { return r.sequential.nmse_db; })))}});
    md.heading("Inference FLOPs");
    md.table({"Component", "FLOPs"},
             {{"CRNet-SE encoder (gamma 1/16)", std::to_string(s.flops_student_encoder_116)},
              {"CRNet-SE encoder (gamma 1/32)", std::to_string(s.flops_student_encoder_132)},
              {"CRNet encoder (this implementation)", std::to_string(s.flops_teacher_encoder)},
              {"decoder", std::to_string(s.flops_decoder)}});
    md.heading("Training cost (seconds, median over seeds)");
    md.table({"Method", "Distill/direct", "Fine-tune", "Total"},
             {{"autoencoder KD",
               md_f64(median3(collect([](auto& r) { return r.aekd.wall_seconds; }))), "0",
               md_f64(median3(collect([](auto& r) { return r.aekd.wall_seconds; })))},
              {"encoder KD",
               md_f64(median3(collect([](auto& r) { return r.ekd_distill.wall_seconds; }))),
               md_f64(median3(collect([](auto& r) { return r.ekd_finetuned.wall_seconds; }))),
               md_f64(median3(collect([](auto& r) { return r.ekd_total_wall; })))}});
  }
}

}  // namespace csikd
