#include <CLI11.hpp>

#include <cstdio>
#include <iostream>

#include "seldsynth/pipeline.hpp"

namespace {

using namespace seld;

std::vector<Format> parse_formats(const std::vector<std::string>& names) {
  std::vector<Format> out;
  for (const auto& n : names) out.push_back(parse_format(n));
  return out;
}

void print_rank_table(const std::vector<RankedSystem>& ranked) {
  std::printf("%-4s %-24s %8s %8s %8s %8s  %4s %4s %4s %4s  %8s\n", "pos", "system", "ER", "F", "LE_CD", "LR_CD",
              "rER", "rF", "rLE", "rLR", "rank_sum");
  int pos = 1;
  for (const auto& s : ranked) {
    std::printf("%-4d %-24s %8.2f %7.1f%% %7.1f%s %7.1f%%  %4d %4d %4d %4d  %8d\n", pos++, s.system_id.c_str(),
                s.report.er, 100.0 * s.report.f, s.report.le_cd, "\xC2\xB0", 100.0 * s.report.lr_cd, s.rank_er,
                s.rank_f, s.rank_le, s.rank_lr, s.rank_sum);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spatial sound-scene synthesis and SELD evaluation"};
  app.require_subcommand(1, 1);

  auto* synth = app.add_subcommand("synthesize", "Render a dataset from a run configuration");
  std::string config_path, synth_out;
  SynthesisOptions sopt;
  bool no_ambience = false, no_interferers = false;
  std::uint64_t seed_override = 0;
  synth->add_option("--config", config_path, "Run configuration (JSON)")->required()->check(CLI::ExistingFile);
  synth->add_option("--out", synth_out, "Output directory")->required();
  synth->add_flag("--no-ambience", no_ambience, "Omit ambient noise");
  synth->add_flag("--no-interferers", no_interferers, "Omit the interferer layer");
  synth->add_flag("--anechoic", sopt.anechoic, "Replace bank responses by anechoic array responses");
  auto* seed_opt = synth->add_option("--seed", seed_override, "Override the config seed");
  synth->add_option("--jobs", sopt.jobs, "Worker threads")->check(CLI::Range(1, 64));

  auto* feat = app.add_subcommand("features", "Extract feature stacks from recordings");
  std::string feat_in, feat_out, feat_format = "foa";
  feat->add_option("--in", feat_in, "Directory with <fmt>_<id>.wav")->required();
  feat->add_option("--format", feat_format, "foa or mic")->check(CLI::IsMember({"foa", "mic"}));
  feat->add_option("--out", feat_out, "Output directory")->required();

  auto* orc = app.add_subcommand("oracle", "Write degraded copies of reference labels");
  std::string orc_ref, orc_spec, orc_out;
  bool orc_accdoa = false;
  orc->add_option("--ref", orc_ref, "Directory with meta_<id>.csv")->required();
  orc->add_option("--spec", orc_spec, "Degradation spec (JSON); identity when omitted");
  orc->add_option("--out", orc_out, "Output directory")->required();
  orc->add_flag("--accdoa", orc_accdoa, "Also write accdoa_<id>.skt targets");

  auto* ev = app.add_subcommand("evaluate", "Score predictions against references");
  std::string ev_ref, ev_pred, ev_out, ev_system = "system";
  double ev_threshold = kDefaultDoaThresholdDeg;
  int ev_segment = 1, ev_classes = ClassSet::defaults().size();
  ev->add_option("--ref", ev_ref, "Reference directory")->required();
  ev->add_option("--pred", ev_pred, "Prediction directory")->required();
  ev->add_option("--threshold", ev_threshold, "DOA threshold in degrees")->check(CLI::Range(0.0, 180.0));
  ev->add_option("--segment-frames", ev_segment, "Label frames pooled per segment")->check(CLI::PositiveNumber);
  ev->add_option("--classes", ev_classes, "Number of target classes")->check(CLI::PositiveNumber);
  ev->add_option("--out", ev_out, "Write the JSON report here");
  ev->add_option("--system-id", ev_system, "Identifier stored in the JSON report");

  auto* rk = app.add_subcommand("rank", "Rank systems by the sum of per-metric ranks");
  std::vector<std::string> rk_reports;
  rk->add_option("--reports", rk_reports, "JSON reports written by evaluate")->required()->check(CLI::ExistingFile);

  auto* mb = app.add_subcommand("make-bank", "Generate synthetic reverberant IR banks");
  BankBuildSpec bspec;
  std::string mb_out;
  std::vector<std::string> mb_formats{"foa", "mic"};
  double mb_spacing = 1.0;
  bool mb_circular_only = false;
  mb->add_option("--rooms", bspec.rooms, "Number of rooms")->check(CLI::PositiveNumber);
  mb->add_option("--rt60", bspec.rt60_s, "RT60 per room in seconds (cycled)")->check(CLI::PositiveNumber);
  mb->add_option("--drr", bspec.drr_db, "Direct-to-reverberant ratio per room in dB (cycled)");
  mb->add_option("--formats", mb_formats, "Formats to generate")->check(CLI::IsMember({"foa", "mic"}));
  mb->add_option("--spacing", mb_spacing, "Trajectory node spacing in degrees")->check(CLI::Range(0.1, 2.0));
  mb->add_flag("--circular-only", mb_circular_only, "Only the circular trajectory");
  mb->add_option("--ambience-seconds", bspec.ambience_s, "Length of the stored ambience")->check(CLI::PositiveNumber);
  mb->add_option("--seed", bspec.seed, "Seed");
  mb->add_option("--out", mb_out, "Output directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*synth) {
      RunConfig config = read_run_config(config_path);
      sopt.ambience = !no_ambience;
      sopt.interferers = !no_interferers;
      if (*seed_opt) sopt.seed = seed_override;
      const auto entries = synthesize_dataset(config, synth_out, sopt);
      std::printf("wrote %zu recordings to %s\n", entries.size(), synth_out.c_str());
    } else if (*feat) {
      const auto files = extract_features_dir(feat_in, parse_format(feat_format), feat_out);
      std::printf("wrote %zu feature dumps to %s\n", files.size(), feat_out.c_str());
    } else if (*orc) {
      DegradationSpec spec;
      if (!orc_spec.empty()) spec = parse_degradation_spec(read_text(orc_spec), orc_spec);
      const auto files = oracle_dir(orc_ref, spec, orc_out, orc_accdoa);
      std::printf("wrote %zu files to %s\n", files.size(), orc_out.c_str());
    } else if (*ev) {
      const MetricsReport r = evaluate_dirs(ev_ref, ev_pred, ev_classes, ev_threshold, ev_segment);
      std::printf("ER_%g: %.2f\nF_%g: %.1f%%\nLE_CD: %.1f\xC2\xB0\nLR_CD: %.1f%%\n", r.threshold_deg, r.er,
                  r.threshold_deg, 100.0 * r.f, r.le_cd, 100.0 * r.lr_cd);
      std::printf("TP %ld FP %ld FN %ld N %ld S %ld D %ld I %ld\n", r.tp, r.fp, r.fn, r.n_ref, r.substitutions,
                  r.deletions, r.insertions);
      for (const auto& n : r.notes) std::fprintf(stderr, "note: %s\n", n.c_str());
      if (!ev_out.empty()) write_text(ev_out, report_to_json(r, ev_system));
    } else if (*rk) {
      std::vector<std::pair<std::string, MetricsReport>> reports;
      for (const auto& path : rk_reports) reports.push_back(report_from_json(read_text(path), path));
      print_rank_table(rank_systems(reports));
    } else if (*mb) {
      bspec.formats = parse_formats(mb_formats);
      bspec.trajectories = default_trajectory_specs();
      if (mb_circular_only) bspec.trajectories.resize(1);
      for (auto& t : bspec.trajectories) t.spacing_deg = mb_spacing;
      const auto dirs = make_banks(bspec, mb_out);
      for (const auto& d : dirs) std::printf("%s\n", d.string().c_str());
    }
  } catch (const seld::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
