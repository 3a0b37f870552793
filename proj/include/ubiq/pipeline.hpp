#pragma once

// Stage functions behind the command-line tool. Each stage reads and writes only the files
// of the run directory layout:
//
//   resolved_manifest.json  weights.json  mass_<model>.npy (optional)  fused_mass.npy
//   bel.npy  pl.npy  unc.npy  conflict.npy  conflict_steps.npy (M >= 2)
//   stats.json  kde.json  kde_per_model.json (--per-model)
//   sweep_temperature.json  sweep_lambda.json  (*.csv with --csv)
//   render/{bel,pl,unc,conflict,composite}.ppm  render/overlay_{bel,pl,unc}.ppm (--overlay)

#include "ubiq/analytics.hpp"
#include "ubiq/fusion.hpp"
#include "ubiq/io.hpp"
#include "ubiq/reliability.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace ubiq::pipeline {

struct Options {
    bool dump_masses = false;
    bool per_model = false;
    bool csv = false;
    std::optional<fs::path> overlay;
};

// Loads the manifest, applies overrides, creates output_dir and writes resolved_manifest.json.
RunManifest prepare(const fs::path& manifest_path, const ManifestOverrides& overrides);

struct WeighResult {
    CountVector counts;
    DirichletPosterior posterior;
    WeightVector expected;
    WeightVector sampled;
};

CountVector gather_counts(const RunManifest& m);
WeighResult compute_weights(const RunManifest& m);
nlohmann::json to_json(const RunManifest& m, const WeighResult& w);
// Sampled weights recorded in weights.json, in model order.
std::vector<double> load_weights(const fs::path& out_dir, const RunManifest& m);

AttributionMap load_attribution(const RunManifest& m, std::size_t model_index);
std::vector<MassMap> compute_masses(const RunManifest& m, const std::vector<double>& weights);
MassMap load_mass(const fs::path& path, const std::string& model_id);
void save_mass(const fs::path& path, const MassMap& mass);

void write_epistemic(const fs::path& out_dir, const EpistemicMaps& maps);
EpistemicMaps load_epistemic(const fs::path& out_dir);

void write_analytics(const RunManifest& m, const EpistemicMaps& maps, const std::vector<double>& weights,
                     const std::vector<MassMap>* per_model, bool csv);
void write_sweeps(const RunManifest& m, const CountVector& counts, bool csv);
void write_renders(const fs::path& out_dir, const EpistemicMaps& maps, const std::optional<fs::path>& overlay);

// Individual stage commands (disk in, disk out).
void stage_weigh(const RunManifest& m);
void stage_bpa(const RunManifest& m);
void stage_fuse(const RunManifest& m);
void stage_analyze(const RunManifest& m, const Options& opts);
void stage_sweep(const RunManifest& m, const Options& opts);
void stage_render(const RunManifest& m, const Options& opts);

struct RunSummary {
    std::vector<std::string> model_ids;
    std::vector<double> weights;
    double mean_bel = 0.0;
    double mean_pl = 0.0;
    double mean_unc = 0.0;
    double mean_conflict = 0.0;
};

std::string format_summary(const RunSummary& s);

// All stages in order. On failure writes output_dir/FAILED naming the stage, then rethrows.
RunSummary run_pipeline(const RunManifest& m, const Options& opts);

struct VerifyReport {
    std::vector<std::string> missing;
    std::vector<std::pair<std::string, double>> violations;  // check name, max violation

    double worst() const;
    bool passed(double tolerance = 1e-9) const { return missing.empty() && worst() <= tolerance; }
    std::string format(double tolerance = 1e-9) const;
};

VerifyReport verify_run(const fs::path& out_dir);

}  // namespace ubiq::pipeline
