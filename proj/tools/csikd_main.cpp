// csikd: dataset generation, training regimes, evaluation, FLOPs and
// timing analysis for lightweight CSI-feedback autoencoders.
//
// Exit codes: 0 success, 2 usage error, 3 invalid config, 4 missing
// artifact, 5 runtime failure.

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "csikd/experiments.hpp"

namespace fs = std::filesystem;
using namespace csikd;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitConfig = 3;
constexpr int kExitMissing = 4;
constexpr int kExitRuntime = 5;

struct MissingArtifact : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void require_file(const std::string& path) {
  if (!fs::exists(path)) throw MissingArtifact("missing artifact: " + path);
}

double parse_gamma(const std::string& text) {
  const auto slash = text.find('/');
  if (slash == std::string::npos) return std::stod(text);
  const double num = std::stod(text.substr(0, slash));
  const double den = std::stod(text.substr(slash + 1));
  if (den == 0.0) throw std::invalid_argument("gamma denominator is zero");
  return num / den;
}

int codeword_length(int n_t, int n_c, const std::string& gamma_text) {
  const double gamma = parse_gamma(gamma_text);
  const double ns = 2.0 * n_t * n_c * gamma;
  if (ns < 1.0 || ns != std::floor(ns))
    throw std::invalid_argument("gamma " + gamma_text + " does not yield an integer codeword length");
  return static_cast<int>(ns);
}

TrainConfig load_train_config(const std::string& path, std::uint64_t seed_override,
                              bool has_seed) {
  TrainConfig cfg;
  if (!path.empty()) {
    require_file(path);
    std::ifstream in(path);
    nlohmann::json j;
    in >> j;
    cfg = train_config_from_json(j);
  }
  if (has_seed) cfg.seed = seed_override;
  cfg.validate();
  return cfg;
}

ScenarioConfig load_scenario(const std::string& config_path, const std::string& preset,
                             int n_t, int n_c) {
  if (!config_path.empty()) {
    require_file(config_path);
    std::ifstream in(config_path);
    nlohmann::json j;
    in >> j;
    ScenarioConfig sc = scenario_from_json(j.contains("scenario") ? j.at("scenario") : j);
    sc.validate();
    return sc;
  }
  if (preset == "desk-los") return desk_scenario_los(n_t, n_c, 20251);
  if (preset == "desk-nlos") return desk_scenario_nlos(n_t, n_c, 20252);
  throw std::invalid_argument("unknown scenario preset: " + preset);
}

std::string file_digest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  Sha256 h;
  char buf[65536];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0)
    h.update(buf, static_cast<std::size_t>(in.gcount()));
  return Sha256::hex(h.digest());
}

void write_json(const nlohmann::json& j, const std::string& path) {
  std::ofstream out(path);
  out << j.dump(2) << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Knowledge-distillation training and analysis for lightweight CSI feedback"};
  app.require_subcommand(1);

  // ---- gen-data ----
  auto* gen = app.add_subcommand("gen-data", "Generate a CSI dataset");
  std::string gen_config, gen_preset = "desk-los", gen_out = "dataset.csid";
  std::uint64_t gen_train = 4000, gen_val = 1000, gen_test = 1000, gen_seed = 0;
  bool gen_has_seed = false;
  int gen_nt = 32, gen_nc = 32;
  gen->add_option("--config", gen_config, "scenario JSON (a scenario object or {\"scenario\":...})");
  gen->add_option("--preset", gen_preset, "desk-los or desk-nlos (when no --config)");
  gen->add_option("--n-t", gen_nt, "transmit antennas for presets");
  gen->add_option("--n-c", gen_nc, "subcarriers for presets");
  gen->add_option("--train", gen_train, "training samples");
  gen->add_option("--val", gen_val, "validation samples");
  gen->add_option("--test", gen_test, "test samples");
  gen->add_option("--seed", gen_seed, "scenario seed override")->each([&](const std::string&) {
    gen_has_seed = true;
  });
  gen->add_option("--out", gen_out, "output .csid path")->required();

  // ---- train ----
  auto* train = app.add_subcommand("train", "Vanilla MSE training of an autoencoder");
  std::string train_data, train_arch = "student", train_out = "run", train_cfg_path,
              train_gamma = "1/16";
  int train_width = 8;
  std::uint64_t train_seed = 1000;
  bool train_has_seed = false;
  train->add_option("--data", train_data, "dataset .csid")->required();
  train->add_option("--arch", train_arch, "teacher or student encoder architecture");
  train->add_option("--gamma", train_gamma, "compression ratio, e.g. 1/16");
  train->add_option("--width", train_width, "decoder CRBlock width");
  train->add_option("--train-config", train_cfg_path, "TrainConfig JSON");
  train->add_option("--seed", train_seed, "training seed")->each([&](const std::string&) {
    train_has_seed = true;
  });
  train->add_option("--out", train_out, "output directory")->required();

  // ---- distill (autoencoder KD) ----
  auto* dis = app.add_subcommand("distill", "Autoencoder knowledge distillation");
  std::string dis_data, dis_tenc, dis_tdec, dis_out = "run", dis_cfg_path, dis_gamma = "1/16";
  int dis_width = 8;
  double dis_alpha = 0.3, dis_temp = 5.0;
  std::uint64_t dis_seed = 1000;
  bool dis_has_seed = false;
  dis->add_option("--data", dis_data)->required();
  dis->add_option("--teacher-enc", dis_tenc, "teacher encoder checkpoint")->required();
  dis->add_option("--teacher-dec", dis_tdec, "teacher decoder checkpoint")->required();
  dis->add_option("--alpha", dis_alpha, "MSE weight in the combined loss");
  dis->add_option("--temperature", dis_temp, "softmax temperature");
  dis->add_option("--gamma", dis_gamma);
  dis->add_option("--width", dis_width);
  dis->add_option("--train-config", dis_cfg_path);
  dis->add_option("--seed", dis_seed)->each([&](const std::string&) { dis_has_seed = true; });
  dis->add_option("--out", dis_out)->required();

  // ---- encoder-distill ----
  auto* ekd = app.add_subcommand("encoder-distill", "Encoder KD plus end-to-end fine-tune");
  std::string ekd_data, ekd_tenc, ekd_tdec, ekd_out = "run", ekd_cfg_path;
  int ekd_budget = -1;
  std::uint64_t ekd_seed = 1000;
  bool ekd_has_seed = false;
  ekd->add_option("--data", ekd_data)->required();
  ekd->add_option("--teacher-enc", ekd_tenc)->required();
  ekd->add_option("--teacher-dec", ekd_tdec)->required();
  ekd->add_option("--fine-tune-budget", ekd_budget, "epochs; default 15% of the distill epochs");
  ekd->add_option("--train-config", ekd_cfg_path);
  ekd->add_option("--seed", ekd_seed)->each([&](const std::string&) { ekd_has_seed = true; });
  ekd->add_option("--out", ekd_out)->required();

  // ---- variant-distill ----
  auto* var = app.add_subcommand("variant-distill",
                                 "Intellectual-property-protecting encoder KD stages");
  std::string var_stage = "all", var_encoder, var_decoder, var_data, var_pairs, var_pairs_out,
              var_out, var_report, var_cfg_path;
  std::uint64_t var_val_count = 0;
  int var_budget = 4;
  var->add_option("--stage", var_stage,
                  "emit-pairs | train-student | reencode-pairs | finetune-decoder | all");
  var->add_option("--encoder", var_encoder, "encoder checkpoint (emit/reencode stages)");
  var->add_option("--decoder", var_decoder, "decoder checkpoint (finetune stage)");
  var->add_option("--data", var_data, "dataset .csid (emit-pairs, all)");
  var->add_option("--pairs", var_pairs, "input pair dataset .csip");
  var->add_option("--train-config", var_cfg_path, "TrainConfig JSON");
  var->add_option("--val-count", var_val_count, "trailing pairs held out for validation");
  var->add_option("--budget", var_budget, "decoder fine-tune epochs");
  var->add_option("--out", var_out, "output checkpoint or pair file");
  var->add_option("--report", var_report, "training report JSON path");
  var->add_option("--pairs-out", var_pairs_out, "(all) student pair output path");

  // ---- seq-train ----
  auto* seq = app.add_subcommand("seq-train", "BS-first sequential training baseline");
  std::string seq_data, seq_out = "run", seq_cfg_path, seq_bs_enc;
  std::uint64_t seq_seed = 1000;
  bool seq_has_seed = false;
  seq->add_option("--data", seq_data)->required();
  seq->add_option("--bs-enc", seq_bs_enc,
                  "pretrained BS encoder ckpt (with .spec.json and matching dec.ckpt beside it); "
                  "trains from scratch when omitted");
  seq->add_option("--train-config", seq_cfg_path);
  seq->add_option("--seed", seq_seed)->each([&](const std::string&) { seq_has_seed = true; });
  seq->add_option("--out", seq_out)->required();

  // ---- eval ----
  auto* ev = app.add_subcommand("eval", "NMSE of an encoder/decoder pair on a dataset");
  std::string ev_data, ev_enc, ev_dec, ev_json;
  std::string ev_split = "test";
  ev->add_option("--data", ev_data)->required();
  ev->add_option("--encoder", ev_enc)->required();
  ev->add_option("--decoder", ev_dec)->required();
  ev->add_option("--split", ev_split, "train | val | test");
  ev->add_option("--json", ev_json, "also write the result as JSON");

  // ---- flops ----
  auto* fl = app.add_subcommand("flops", "Exact FLOPs of a model");
  std::string fl_model = "student-encoder", fl_gamma = "1/16";
  int fl_nt = 32, fl_nc = 32, fl_width = 8;
  bool fl_per_layer = false;
  fl->add_option("--model", fl_model, "student-encoder | teacher-encoder | decoder");
  fl->add_option("--gamma", fl_gamma, "compression ratio, e.g. 1/16");
  fl->add_option("--n-t", fl_nt);
  fl->add_option("--n-c", fl_nc);
  fl->add_option("--width", fl_width, "decoder CRBlock width");
  fl->add_flag("--per-layer", fl_per_layer, "print the per-layer breakdown");

  // ---- bench ----
  auto* be = app.add_subcommand("bench", "Batch-1 inference timing");
  std::string be_model = "student-encoder", be_gamma = "1/16", be_ckpt, be_csv;
  int be_reps = 300, be_warm = 30, be_nt = 32, be_nc = 32, be_width = 8;
  be->add_option("--model", be_model, "student-encoder | teacher-encoder | decoder");
  be->add_option("--gamma", be_gamma);
  be->add_option("--n-t", be_nt);
  be->add_option("--n-c", be_nc);
  be->add_option("--width", be_width);
  be->add_option("--ckpt", be_ckpt, "optional checkpoint to time instead of a fresh model");
  be->add_option("--repetitions", be_reps);
  be->add_option("--warmups", be_warm);
  be->add_option("--csv", be_csv, "write raw samples CSV");

  // ---- reproduce ----
  auto* re = app.add_subcommand("reproduce", "Run the full desk-scale experiment suite");
  std::string re_scale = "desk", re_out;
  int re_seeds = 3, re_workers = 2;
  std::uint64_t re_base_seed = 1000;
  bool re_skip_sweeps = false, re_skip_gen = false, re_skip_bench = false, re_inproc = false;
  re->add_option("--scale", re_scale, "desk | tiny");
  re->add_option("--out", re_out, "output directory")->required();
  re->add_option("--seeds", re_seeds, "number of training seeds");
  re->add_option("--base-seed", re_base_seed);
  re->add_option("--workers", re_workers, "parallel training runs");
  re->add_flag("--skip-sweeps", re_skip_sweeps);
  re->add_flag("--skip-generalization", re_skip_gen);
  re->add_flag("--skip-bench", re_skip_bench);
  re->add_flag("--in-process-variant", re_inproc,
               "run variant KD stages in process instead of separate invocations");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }

  try {
    if (*gen) {
      ScenarioConfig sc = load_scenario(gen_config, gen_preset, gen_nt, gen_nc);
      if (gen_has_seed) sc.seed = gen_seed;
      const CsiDataset ds = build_dataset(sc, {gen_train, gen_val, gen_test});
      save_dataset(ds, gen_out);
      std::cout << "dataset " << gen_out << " sha256 " << file_digest(gen_out) << "\n";
      return 0;
    }

    if (*train) {
      require_file(train_data);
      const CsiDataset ds = load_dataset(train_data);
      const int nt = ds.scenario.n_tx_antennas, nc = ds.scenario.n_subcarriers;
      const int ns = codeword_length(nt, nc, train_gamma);
      TrainConfig cfg = load_train_config(train_cfg_path, train_seed, train_has_seed);
      const ModelSpec enc_spec = train_arch == "teacher" ? build_teacher_encoder(nt, nc, ns)
                                                         : build_student_encoder(nt, nc, ns);
      fs::create_directories(train_out);
      Autoencoder init = make_autoencoder(enc_spec, build_decoder(nt, nc, ns, train_width),
                                          cfg.seed, ds.meta);
      AutoencoderResult res = train_vanilla(std::move(init), ds, cfg);
      detail::save_model(res.model.encoder, train_out + "/enc.ckpt", res.meta);
      detail::save_model(res.model.decoder, train_out + "/dec.ckpt", res.meta);
      detail::write_report_files(train_out, res.report, "train");
      std::cout << "final test NMSE " << md_f64(res.report.final_nmse_db) << " dB\n";
      return 0;
    }

    if (*dis) {
      require_file(dis_data);
      require_file(dis_tenc);
      require_file(dis_tdec);
      const CsiDataset ds = load_dataset(dis_data);
      const int nt = ds.scenario.n_tx_antennas, nc = ds.scenario.n_subcarriers;
      Autoencoder teacher = combine(load_model_with_spec(dis_tenc), load_model_with_spec(dis_tdec));
      const int ns = teacher.encoder.codeword_length();
      TrainConfig cfg = load_train_config(dis_cfg_path, dis_seed, dis_has_seed);
      KdConfig kd{dis_alpha, dis_temp};
      kd.validate();
      fs::create_directories(dis_out);
      Autoencoder init = make_autoencoder(build_student_encoder(nt, nc, ns),
                                          build_decoder(nt, nc, ns, dis_width), cfg.seed, ds.meta);
      AutoencoderResult res = distill_autoencoder(teacher, std::move(init), ds, cfg, kd);
      detail::save_model(res.model.encoder, dis_out + "/enc.ckpt", res.meta);
      detail::save_model(res.model.decoder, dis_out + "/dec.ckpt", res.meta);
      detail::write_report_files(dis_out, res.report, "train");
      std::cout << "final test NMSE " << md_f64(res.report.final_nmse_db) << " dB\n";
      return 0;
    }

    if (*ekd) {
      require_file(ekd_data);
      require_file(ekd_tenc);
      require_file(ekd_tdec);
      const CsiDataset ds = load_dataset(ekd_data);
      const int nt = ds.scenario.n_tx_antennas, nc = ds.scenario.n_subcarriers;
      Model teacher_enc = load_model_with_spec(ekd_tenc);
      Model teacher_dec = load_model_with_spec(ekd_tdec);
      const int ns = teacher_enc.codeword_length();
      TrainConfig cfg = load_train_config(ekd_cfg_path, ekd_seed, ekd_has_seed);
      const int budget = ekd_budget >= 0 ? ekd_budget : std::max(1, cfg.max_epochs * 15 / 100);
      fs::create_directories(ekd_out);
      EncoderResult distilled = distill_encoder(
          teacher_enc, make_encoder(build_student_encoder(nt, nc, ns), cfg.seed, ds.meta), ds, cfg);
      AutoencoderResult tuned = fine_tune_end_to_end(
          combine(distilled.model.clone(), teacher_dec.clone()), ds, cfg, budget);
      detail::save_model(distilled.model, ekd_out + "/enc_distilled.ckpt", distilled.meta);
      detail::save_model(tuned.model.encoder, ekd_out + "/enc.ckpt", tuned.meta);
      detail::save_model(tuned.model.decoder, ekd_out + "/dec.ckpt", tuned.meta);
      detail::write_report_files(ekd_out, distilled.report, "distill");
      detail::write_report_files(ekd_out, tuned.report, "finetune");
      std::cout << "final test NMSE " << md_f64(tuned.report.final_nmse_db) << " dB\n";
      return 0;
    }

    if (*var) {
      if (var_stage == "emit-pairs") {
        require_file(var_encoder);
        require_file(var_data);
        Model enc = load_model_with_spec(var_encoder);
        const CsiDataset ds = load_dataset(var_data);
        save_pairs(generate_codeword_pairs(enc, ds, PairSubset::train_val), var_out);
        std::cout << "pairs " << var_out << " sha256 " << file_digest(var_out) << "\n";
        return 0;
      }
      if (var_stage == "train-student") {
        require_file(var_pairs);
        const CodewordPairDataset pairs = load_pairs(var_pairs);
        TrainConfig cfg = load_train_config(var_cfg_path, 0, false);
        // the student side knows only the pair file and its own architecture
        Model student = make_encoder(build_student_encoder(pairs.n_t, pairs.n_c, pairs.n_s),
                                     cfg.seed, pairs.norm);
        EncoderResult res = train_encoder_on_pairs(std::move(student), pairs, cfg,
                                                   var_val_count);
        detail::save_model(res.model, var_out, res.meta);
        if (!var_report.empty()) write_json(train_report_to_json(res.report), var_report);
        return 0;
      }
      if (var_stage == "reencode-pairs") {
        require_file(var_encoder);
        require_file(var_pairs);
        Model enc = load_model_with_spec(var_encoder);
        save_pairs(reencode_pairs(enc, load_pairs(var_pairs)), var_out);
        return 0;
      }
      if (var_stage == "finetune-decoder") {
        require_file(var_decoder);
        require_file(var_pairs);
        Model dec = load_model_with_spec(var_decoder);
        TrainConfig cfg = load_train_config(var_cfg_path, 0, false);
        EncoderResult res = fine_tune_decoder_only(std::move(dec), load_pairs(var_pairs), cfg,
                                                   var_budget, var_val_count);
        detail::save_model(res.model, var_out, res.meta);
        if (!var_report.empty()) write_json(train_report_to_json(res.report), var_report);
        return 0;
      }
      if (var_stage == "all") {
        require_file(var_encoder);
        require_file(var_decoder);
        require_file(var_data);
        Autoencoder teacher = combine(load_model_with_spec(var_encoder),
                                      load_model_with_spec(var_decoder));
        const CsiDataset ds = load_dataset(var_data);
        TrainConfig cfg = load_train_config(var_cfg_path, 0, false);
        const int nt = ds.scenario.n_tx_antennas, nc = ds.scenario.n_subcarriers;
        VariantKdResult res = run_variant_encoder_kd(
            teacher,
            make_encoder(build_student_encoder(nt, nc, teacher.encoder.codeword_length()),
                         cfg.seed, ds.meta),
            ds, cfg, var_budget);
        fs::create_directories(var_out);
        save_pairs(res.pairs_teacher, var_out + "/pairs_teacher.csip");
        save_pairs(res.pairs_student, var_out + "/pairs_student.csip");
        detail::save_model(res.student.model, var_out + "/student_enc.ckpt", res.student.meta);
        detail::save_model(res.decoder.model, var_out + "/dec_finetuned.ckpt", res.decoder.meta);
        Autoencoder deployed = combine(res.student.model.clone(), res.decoder.model.clone());
        std::cout << "final test NMSE " << evaluate_autoencoder(deployed, ds).db_string()
                  << " dB\n";
        return 0;
      }
      throw std::invalid_argument("unknown variant stage: " + var_stage);
    }

    if (*seq) {
      require_file(seq_data);
      const CsiDataset ds = load_dataset(seq_data);
      const int nt = ds.scenario.n_tx_antennas, nc = ds.scenario.n_subcarriers;
      TrainConfig cfg = load_train_config(seq_cfg_path, seq_seed, seq_has_seed);
      fs::create_directories(seq_out);
      Autoencoder bs = [&] {
        if (!seq_bs_enc.empty()) {
          require_file(seq_bs_enc);
          const std::string dec_path = fs::path(seq_bs_enc).parent_path() / "dec.ckpt";
          require_file(dec_path);
          return combine(load_model_with_spec(seq_bs_enc), load_model_with_spec(dec_path));
        }
        const int ns = codeword_length(nt, nc, "1/16");
        return make_autoencoder(build_student_encoder(nt, nc, ns), build_decoder(nt, nc, ns, 8),
                                cfg.seed, ds.meta);
      }();
      const int ns = bs.encoder.codeword_length();
      SequentialResult res = run_sequential_training(
          std::move(bs), make_encoder(build_student_encoder(nt, nc, ns), cfg.seed + 7777, ds.meta),
          ds, cfg, !seq_bs_enc.empty());
      save_pairs(res.pairs, seq_out + "/pairs.csip");
      detail::save_model(res.deploy_encoder.model, seq_out + "/deploy_enc.ckpt",
                         res.deploy_encoder.meta);
      detail::save_model(res.bs_autoencoder.model.decoder, seq_out + "/dec.ckpt", {});
      Autoencoder deployed = combine(res.deploy_encoder.model.clone(),
                                     res.bs_autoencoder.model.decoder.clone());
      std::cout << "final test NMSE " << evaluate_autoencoder(deployed, ds).db_string() << " dB\n";
      return 0;
    }

    if (*ev) {
      require_file(ev_data);
      require_file(ev_enc);
      require_file(ev_dec);
      const CsiDataset ds = load_dataset(ev_data);
      Autoencoder ae = combine(load_model_with_spec(ev_enc), load_model_with_spec(ev_dec));
      const Split split = ev_split == "train" ? Split::train
                          : ev_split == "val" ? Split::val
                                              : Split::test;
      const NmseResult n = evaluate_autoencoder(ae, ds, split);
      std::cout << "NMSE " << n.db_string() << " dB (linear " << csv_f64(n.linear) << ", "
                << n.sample_count << " samples, " << n.excluded_count << " excluded)\n";
      if (!ev_json.empty())
        write_json({{"nmse_db", n.db_string()},
                    {"nmse_linear", n.linear},
                    {"sample_count", n.sample_count},
                    {"excluded_count", n.excluded_count},
                    {"split", ev_split}},
                   ev_json);
      return 0;
    }

    if (*fl) {
      const int ns = codeword_length(fl_nt, fl_nc, fl_gamma);
      const ModelSpec spec = fl_model == "teacher-encoder" ? build_teacher_encoder(fl_nt, fl_nc, ns)
                             : fl_model == "decoder" ? build_decoder(fl_nt, fl_nc, ns, fl_width)
                             : fl_model == "student-encoder"
                                 ? build_student_encoder(fl_nt, fl_nc, ns)
                                 : throw std::invalid_argument("unknown model: " + fl_model);
      const FlopsReport rep = model_flops(spec);
      if (fl_per_layer)
        for (const auto& [name, f] : rep.per_layer) std::cout << name << " " << f << "\n";
      std::cout << rep.total << "\n";
      return 0;
    }

    if (*be) {
      Model model = [&] {
        if (!be_ckpt.empty()) {
          require_file(be_ckpt);
          return load_model_with_spec(be_ckpt);
        }
        const int ns = codeword_length(be_nt, be_nc, be_gamma);
        const ModelSpec spec = be_model == "teacher-encoder"
                                   ? build_teacher_encoder(be_nt, be_nc, ns)
                               : be_model == "decoder" ? build_decoder(be_nt, be_nc, ns, be_width)
                                                       : build_student_encoder(be_nt, be_nc, ns);
        Model m(spec);
        Rng rng(7);
        m.init_params(rng);
        return m;
      }();
      const TimingReport rep = inference_benchmark(model, be_reps, be_warm);
      std::cout << rep.component << " on " << rep.host << ": median "
                << csv_f64(rep.median_seconds * 1e3) << " ms, mean "
                << csv_f64(rep.mean_seconds * 1e3) << " ms, p95 "
                << csv_f64(rep.p95_seconds * 1e3) << " ms over " << rep.repetitions
                << " repetitions (" << rep.warmups << " warmups discarded)\n";
      if (!be_csv.empty()) {
        CsvTable t;
        t.header = {"repetition", "seconds"};
        for (std::size_t i = 0; i < rep.raw_seconds.size(); ++i)
          t.add_row({std::to_string(i), csv_f64(rep.raw_seconds[i])});
        t.save(be_csv);
      }
      return 0;
    }

    if (*re) {
      SuiteOptions opt;
      opt.out_dir = re_out;
      opt.scale = re_scale == "tiny" ? SuiteScale::tiny() : SuiteScale::desk();
      if (re_scale != "tiny" && re_scale != "desk")
        throw std::invalid_argument("unknown scale: " + re_scale);
      opt.seeds = re_seeds;
      opt.base_seed = re_base_seed;
      opt.workers = re_workers;
      opt.with_sweeps = !re_skip_sweeps;
      opt.with_generalization = !re_skip_gen;
      opt.with_bench = !re_skip_bench;
      if (!re_inproc) opt.self_exe = fs::absolute(argv[0]).string();
      DeskSuite suite(opt);
      suite.run();
      std::cout << "suite complete: " << re_out << "/reports/summary.md\n";
      return 0;
    }
  } catch (const MissingArtifact& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitMissing;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}
