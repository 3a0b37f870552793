#include "ubiq/pipeline.hpp"

#include "ubiq/error.hpp"
#include "ubiq/evidence.hpp"
#include "ubiq/npy.hpp"
#include "ubiq/render.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <sstream>

namespace ubiq::pipeline {
namespace {

constexpr double kRepresentativePhis[] = {0.001, 0.002, 0.005, 0.01, 0.02, 0.05};

std::vector<double> as_vector(const Eigen::VectorXd& v) { return {v.begin(), v.end()}; }

std::span<const double> flat(const Plane& p) {
    return {p.data(), static_cast<std::size_t>(p.size())};
}

void warn_render(const std::string& name, const RenderResult& r) {
    if (r.clamped > 0) std::cerr << "warning: " << name << ": clamped " << r.clamped << " pixels to [0, 1]\n";
    if (r.nan_count > 0) std::cerr << "warning: " << name << ": " << r.nan_count << " NaN pixels rendered grey\n";
}

}  // namespace

RunManifest prepare(const fs::path& manifest_path, const ManifestOverrides& overrides) {
    RunManifest m = load_manifest(manifest_path);
    apply_overrides(m, overrides);
    fs::create_directories(m.output_dir);
    write_json(m.output_dir / "resolved_manifest.json", to_json(m));
    return m;
}

CountVector gather_counts(const RunManifest& m) {
    if (m.weight_mode == WeightMode::Scores) {
        Eigen::VectorXd scores(static_cast<Index>(m.models.size()));
        for (std::size_t j = 0; j < m.models.size(); ++j) scores(static_cast<Index>(j)) = *m.models[j].score;
        return counts_from_scores(scores, m.validation_size);
    }
    std::vector<ValidationLog> logs;
    for (const auto& model : m.models) {
        logs.push_back(read_validation_log(*model.validation_log, model.model_id));
        check_class_indices(logs.back(), static_cast<int>(m.class_names.size()));
    }
    return accumulate_counts(logs);
}

WeighResult compute_weights(const RunManifest& m) {
    WeighResult r;
    r.counts = gather_counts(m);
    r.posterior = tempered_posterior(r.counts, m.temperature, m.prior());
    r.expected = expected_weights(r.posterior);
    r.sampled = sample_weights(r.posterior, m.seed);
    return r;
}

nlohmann::json to_json(const RunManifest& m, const WeighResult& w) {
    std::vector<std::string> ids;
    for (const auto& model : m.models) ids.push_back(model.model_id);
    std::vector<int> counts(w.counts.counts.begin(), w.counts.counts.end());
    return {
        {"model_ids", ids},
        {"weight_mode", to_string(w.counts.mode)},
        {"counts", counts},
        {"validation_size", w.counts.validation_size},
        {"temperature", w.posterior.temperature},
        {"alpha0", as_vector(w.posterior.alpha0)},
        {"alpha", as_vector(w.posterior.alpha)},
        {"expected_weights", as_vector(w.expected.w)},
        {"weights", as_vector(w.sampled.w)},
        {"provenance", "sampled"},
        {"seed", *w.sampled.seed},
    };
}

std::vector<double> load_weights(const fs::path& out_dir, const RunManifest& m) {
    const auto doc = read_json(out_dir / "weights.json");
    auto weights = doc.at("weights").get<std::vector<double>>();
    if (weights.size() != m.models.size()) {
        throw ValidationError("weights.json lists " + std::to_string(weights.size()) + " weights for " +
                              std::to_string(m.models.size()) + " models");
    }
    return weights;
}

AttributionMap load_attribution(const RunManifest& m, std::size_t model_index) {
    const auto& model = m.models[model_index];
    const TensorFile t = read_tensor(model.attribution);
    const std::size_t channels = t.shape.size() == 3 ? t.shape[2] : 1;
    const auto values = t.values();
    AttributionMap a;
    a.model_id = model.model_id;
    a.target_class = m.target_class;
    a.source_shape = t.shape;
    try {
        a.values = channel_reduce(std::span<const double>(values), static_cast<Index>(t.shape[0]),
                                  static_cast<Index>(t.shape[1]), static_cast<Index>(channels), m.channel_mode);
    } catch (const DataError& e) {
        throw DataError(model.attribution.string() + ": " + e.what());
    }
    return a;
}

std::vector<MassMap> compute_masses(const RunManifest& m, const std::vector<double>& weights) {
    std::vector<MassMap> masses;
    for (std::size_t j = 0; j < m.models.size(); ++j) {
        const AttributionMap a = load_attribution(m, j);
        if (!masses.empty() && (a.values.rows() != masses.front().rows() || a.values.cols() != masses.front().cols())) {
            throw ShapeError("attribution map '" + a.model_id + "' differs in shape from '" +
                             masses.front().model_id + "'");
        }
        masses.push_back(attribution_to_mass(a, weights[j], m.lambda));
    }
    return masses;
}

void save_mass(const fs::path& path, const MassMap& mass) {
    const Plane planes[] = {mass.m_for, mass.m_against, mass.m_ignorance};
    write_tensor(path, TensorFile::from_planes(planes));
}

MassMap load_mass(const fs::path& path, const std::string& model_id) {
    const TensorFile t = read_tensor(path);
    if (t.shape.size() != 3 || t.shape[0] != 3) {
        throw ShapeError(path.string() + ": expected a (3, H, W) mass tensor");
    }
    MassMap m;
    m.model_id = model_id;
    m.m_for = t.slice(0);
    m.m_against = t.slice(1);
    m.m_ignorance = t.slice(2);
    return m;
}

void write_epistemic(const fs::path& out_dir, const EpistemicMaps& maps) {
    write_tensor(out_dir / "bel.npy", TensorFile::from_plane(maps.bel));
    write_tensor(out_dir / "pl.npy", TensorFile::from_plane(maps.pl));
    write_tensor(out_dir / "unc.npy", TensorFile::from_plane(maps.unc));
    write_tensor(out_dir / "conflict.npy", TensorFile::from_plane(maps.conflict.k_total));
    save_mass(out_dir / "fused_mass.npy", maps.fused_mass);
    if (!maps.conflict.per_step.empty()) {
        write_tensor(out_dir / "conflict_steps.npy", TensorFile::from_planes(maps.conflict.per_step));
    }
    const Plane& flags = maps.conflict.total_conflict_flags;
    if (flags.size() > 0 && (flags > 0.0).any()) {
        std::cerr << "warning: " << (flags > 0.0).count() << " pixels hit total conflict\n";
    }
}

EpistemicMaps load_epistemic(const fs::path& out_dir) {
    EpistemicMaps maps;
    maps.bel = read_tensor(out_dir / "bel.npy").plane();
    maps.pl = read_tensor(out_dir / "pl.npy").plane();
    maps.unc = read_tensor(out_dir / "unc.npy").plane();
    maps.conflict.k_total = read_tensor(out_dir / "conflict.npy").plane();
    maps.fused_mass = load_mass(out_dir / "fused_mass.npy", "fused");
    maps.conflict.total_conflict_flags = Plane::Zero(maps.bel.rows(), maps.bel.cols());
    if (fs::exists(out_dir / "conflict_steps.npy")) {
        const TensorFile steps = read_tensor(out_dir / "conflict_steps.npy");
        for (std::size_t k = 0; k < steps.shape[0]; ++k) maps.conflict.per_step.push_back(steps.slice(k));
    }
    maps.conflict.steps = static_cast<int>(maps.conflict.per_step.size());
    for (const auto& step : maps.conflict.per_step) {
        maps.conflict.total_conflict_flags = ((1.0 - step) <= kConflictEpsilon).select(1.0, maps.conflict.total_conflict_flags);
    }
    return maps;
}

void write_analytics(const RunManifest& m, const EpistemicMaps& maps, const std::vector<double>& weights,
                     const std::vector<MassMap>* per_model, bool csv) {
    const fs::path& out = m.output_dir;
    write_json(out / "stats.json", to_json(summary_stats(maps, weights)));

    const std::pair<const char*, const Plane*> metrics[] = {
        {"belief", &maps.bel}, {"plausibility", &maps.pl}, {"uncertainty", &maps.unc}};
    nlohmann::json curves = nlohmann::json::array();
    for (const auto& [name, plane] : metrics) {
        const DensityCurve curve = kde(flat(*plane), kDefaultGridSize, name, m.seed);
        curves.push_back(to_json(curve));
        if (csv) write_text(out / (std::string("kde_") + name + ".csv"), to_csv(curve));
    }
    write_json(out / "kde.json", {{"curves", curves}});

    if (per_model != nullptr) {
        nlohmann::json models = nlohmann::json::object();
        for (const auto& mass : *per_model) {
            const std::pair<const char*, const Plane*> planes[] = {
                {"belief", &mass.m_for}, {"disbelief", &mass.m_against}, {"ignorance", &mass.m_ignorance}};
            nlohmann::json list = nlohmann::json::array();
            for (const auto& [name, plane] : planes) list.push_back(to_json(kde(flat(*plane), kDefaultGridSize, name, m.seed)));
            models[mass.model_id] = std::move(list);
        }
        write_json(out / "kde_per_model.json", {{"models", models}});
    }
}

void write_sweeps(const RunManifest& m, const CountVector& counts, bool csv) {
    SweepCurve t = sweep_temperature(counts, logspace(0.1, 100.0, 25), m.prior());
    for (std::size_t j = 0; j < m.models.size(); ++j) t.series[j] = m.models[j].model_id;
    const Eigen::VectorXd phis = Eigen::Map<const Eigen::VectorXd>(kRepresentativePhis, std::size(kRepresentativePhis));
    const SweepCurve l = sweep_lambda(phis, logspace(1.0, 1000.0, 25));
    write_json(m.output_dir / "sweep_temperature.json", to_json(t));
    write_json(m.output_dir / "sweep_lambda.json", to_json(l));
    if (csv) {
        write_text(m.output_dir / "sweep_temperature.csv", to_csv(t));
        write_text(m.output_dir / "sweep_lambda.csv", to_csv(l));
    }
}

void write_renders(const fs::path& out_dir, const EpistemicMaps& maps, const std::optional<fs::path>& overlay) {
    const fs::path dir = out_dir / "render";
    fs::create_directories(dir);

    const Plane conflict_level =
        maps.conflict.steps > 0 ? Plane(maps.conflict.k_total / maps.conflict.steps)
                                : Plane(Plane::Zero(maps.bel.rows(), maps.bel.cols()));
    const std::tuple<const char*, const Plane*, const ColorScale*> layers[] = {
        {"bel", &maps.bel, &belief_green()},
        {"pl", &maps.pl, &plausibility_blue()},
        {"unc", &maps.unc, &uncertainty_viridis_like()},
        {"conflict", &conflict_level, &conflict_heat()},
    };
    std::optional<Image> base;
    if (overlay) {
        base = image_from_tensor(read_tensor(*overlay));
        if (base->width != maps.bel.cols() || base->height != maps.bel.rows()) {
            throw ShapeError(overlay->string() + ": overlay source differs in size from the maps");
        }
    }
    for (const auto& [name, plane, scale] : layers) {
        const RenderResult r = render_map(*plane, *scale);
        warn_render(name, r);
        write_image(r.image, dir / (std::string(name) + ".ppm"));
        if (base && std::string(name) != "conflict") {
            write_image(blend(*base, r.image, 0.5), dir / ("overlay_" + std::string(name) + ".ppm"));
        }
    }
    const RenderResult mix = composite(maps.bel, maps.pl, maps.unc);
    warn_render("composite", mix);
    write_image(mix.image, dir / "composite.ppm");
}

void stage_weigh(const RunManifest& m) {
    write_json(m.output_dir / "weights.json", to_json(m, compute_weights(m)));
}

void stage_bpa(const RunManifest& m) {
    const auto masses = compute_masses(m, load_weights(m.output_dir, m));
    for (const auto& mass : masses) save_mass(m.output_dir / ("mass_" + mass.model_id + ".npy"), mass);
}

void stage_fuse(const RunManifest& m) {
    std::vector<MassMap> masses;
    for (const auto& model : m.models) {
        masses.push_back(load_mass(m.output_dir / ("mass_" + model.model_id + ".npy"), model.model_id));
    }
    write_epistemic(m.output_dir, fuse_sequential(masses));
}

void stage_analyze(const RunManifest& m, const Options& opts) {
    const EpistemicMaps maps = load_epistemic(m.output_dir);
    std::vector<MassMap> masses;
    if (opts.per_model) {
        for (const auto& model : m.models) {
            masses.push_back(load_mass(m.output_dir / ("mass_" + model.model_id + ".npy"), model.model_id));
        }
    }
    write_analytics(m, maps, load_weights(m.output_dir, m), opts.per_model ? &masses : nullptr, opts.csv);
}

void stage_sweep(const RunManifest& m, const Options& opts) { write_sweeps(m, gather_counts(m), opts.csv); }

void stage_render(const RunManifest& m, const Options& opts) {
    write_renders(m.output_dir, load_epistemic(m.output_dir), opts.overlay);
}

std::string format_summary(const RunSummary& s) {
    std::ostringstream out;
    out.setf(std::ios::fixed);
    out.precision(4);
    out << "weights:";
    for (std::size_t j = 0; j < s.weights.size(); ++j) out << "  " << s.model_ids[j] << "=" << s.weights[j];
    out << "\nmean Bel=" << s.mean_bel << "  mean Pl=" << s.mean_pl << "  mean U=" << s.mean_unc
        << "\nmean conflict=" << s.mean_conflict << "\n";
    return out.str();
}

RunSummary run_pipeline(const RunManifest& m, const Options& opts) {
    std::string stage = "weigh";
    try {
        fs::remove(m.output_dir / "FAILED");
        const WeighResult w = compute_weights(m);
        write_json(m.output_dir / "weights.json", to_json(m, w));
        const std::vector<double> weights = as_vector(w.sampled.w);

        stage = "bpa";
        const std::vector<MassMap> masses = compute_masses(m, weights);
        if (opts.dump_masses) {
            for (const auto& mass : masses) save_mass(m.output_dir / ("mass_" + mass.model_id + ".npy"), mass);
        }

        stage = "fuse";
        const EpistemicMaps maps = fuse_sequential(masses);
        write_epistemic(m.output_dir, maps);

        stage = "analyze";
        write_analytics(m, maps, weights, opts.per_model ? &masses : nullptr, opts.csv);

        stage = "sweep";
        write_sweeps(m, w.counts, opts.csv);

        stage = "render";
        write_renders(m.output_dir, maps, opts.overlay);

        RunSummary s;
        for (const auto& model : m.models) s.model_ids.push_back(model.model_id);
        s.weights = weights;
        s.mean_bel = maps.bel.mean();
        s.mean_pl = maps.pl.mean();
        s.mean_unc = maps.unc.mean();
        s.mean_conflict = maps.conflict.mean();
        return s;
    } catch (const std::exception& e) {
        std::error_code ec;
        fs::create_directories(m.output_dir, ec);
        write_text(m.output_dir / "FAILED", "stage: " + stage + "\n" + e.what() + "\n");
        std::cerr << "pipeline failed in stage '" << stage << "'\n";
        throw;
    }
}

double VerifyReport::worst() const {
    double w = 0.0;
    for (const auto& [_, v] : violations) w = std::max(w, std::isnan(v) ? INFINITY : v);
    return w;
}

std::string VerifyReport::format(double tolerance) const {
    std::ostringstream out;
    for (const auto& name : missing) out << "MISSING  " << name << "\n";
    out.precision(3);
    out.setf(std::ios::scientific);
    for (const auto& [name, v] : violations) {
        out << (v <= tolerance ? "PASS     " : "FAIL     ") << name << "  max violation " << v << "\n";
    }
    out << (passed(tolerance) ? "verify: all checks passed\n" : "verify: FAILED\n");
    return out.str();
}

VerifyReport verify_run(const fs::path& out_dir) {
    VerifyReport report;
    for (const char* name : {"resolved_manifest.json", "weights.json", "bel.npy", "pl.npy", "unc.npy",
                             "conflict.npy", "fused_mass.npy", "stats.json"}) {
        if (!fs::exists(out_dir / name)) report.missing.emplace_back(name);
    }
    if (fs::exists(out_dir / "weights.json")) {
        const auto w = read_json(out_dir / "weights.json").at("weights").get<std::vector<double>>();
        double sum = 0.0, range = 0.0;
        for (double x : w) {
            sum += x;
            range = std::max({range, -x, x - 1.0});
        }
        report.violations.emplace_back("weights sum to one", std::abs(sum - 1.0));
        report.violations.emplace_back("weights in [0, 1]", std::max(range, 0.0));
    }
    if (!report.missing.empty()) return report;

    const EpistemicMaps maps = load_epistemic(out_dir);
    const MassMap& fused = maps.fused_mass;
    if (!same_shape(maps.bel, maps.pl) || !same_shape(maps.bel, maps.unc) || !same_shape(maps.bel, fused.m_for)) {
        report.violations.emplace_back("map shapes agree", INFINITY);
        return report;
    }
    report.violations.emplace_back("fused mass validity", mass_validity_violation(fused));
    for (const auto& entry : fs::directory_iterator(out_dir)) {
        const std::string name = entry.path().filename().string();
        if (name.rfind("mass_", 0) == 0 && entry.path().extension() == ".npy") {
            report.violations.emplace_back(name + " validity", mass_validity_violation(load_mass(entry.path(), name)));
        }
    }
    auto max_abs = [](const Plane& p) { return p.size() == 0 ? 0.0 : p.abs().maxCoeff(); };
    report.violations.emplace_back("Bel <= Pl", std::max(0.0, (maps.bel - maps.pl).maxCoeff()));
    report.violations.emplace_back("Bel, Pl in [0, 1]",
                                   std::max({0.0, -maps.bel.minCoeff(), maps.pl.maxCoeff() - 1.0}));
    report.violations.emplace_back("U = Pl - Bel", max_abs(maps.unc - (maps.pl - maps.bel)));
    report.violations.emplace_back("U = m(Omega)", max_abs(maps.unc - fused.m_ignorance));
    report.violations.emplace_back("duality Pl(theta) = 1 - Bel(not theta)", duality_check(maps));
    report.violations.emplace_back("duality Pl(not theta) = 1 - Bel(theta)",
                                   max_abs((fused.m_against + fused.m_ignorance) - (1.0 - maps.bel)));
    return report;
}

}  // namespace ubiq::pipeline
