// ubiq: evidential fusion of attribution maps from the command line.

#include "ubiq/error.hpp"
#include "ubiq/fixtures.hpp"
#include "ubiq/io.hpp"
#include "ubiq/pipeline.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

using namespace ubiq;

struct CommonArgs {
    std::string manifest;
    std::string out;
    std::optional<std::uint64_t> seed;
    std::optional<double> temperature;
    std::optional<double> lambda;
    pipeline::Options opts;
    std::string overlay;

    ManifestOverrides overrides() const {
        ManifestOverrides o;
        o.seed = seed;
        o.temperature = temperature;
        o.lambda = lambda;
        if (!out.empty()) o.output_dir = out;
        return o;
    }
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--manifest", args.manifest, "Run manifest (JSON)")->required()->check(CLI::ExistingFile);
    cmd->add_option("--out", args.out, "Output directory (overrides the manifest)");
    cmd->add_option("--seed", args.seed, "Weight-sampling seed (overrides the manifest)");
    cmd->add_option("--temperature", args.temperature, "Posterior temperature T");
    cmd->add_option("--lambda", args.lambda, "tanh sensitivity lambda");
}

int report(const std::exception& e, ExitCode code) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(code);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Evidential (Dempster-Shafer) fusion of per-model attribution maps"};
    app.require_subcommand(1);

    CommonArgs args;
    std::map<std::string, CLI::App*> stages;
    const std::pair<const char*, const char*> stage_list[] = {
        {"weigh", "Validation counts -> tempered Dirichlet posterior -> sampled model weights"},
        {"bpa", "Attribution maps -> per-model mass tensors (requires weights.json)"},
        {"fuse", "Dempster fusion of per-model masses -> Bel / Pl / U / conflict maps"},
        {"analyze", "Summary statistics and kernel density estimates of the fused maps"},
        {"sweep", "Temperature and lambda calibration sweeps"},
        {"render", "Colour-mapped PPM renders of the fused maps"},
        {"pipeline", "Run every stage in order"},
    };
    for (const auto& [name, help] : stage_list) {
        CLI::App* cmd = app.add_subcommand(name, help);
        add_common(cmd, args);
        stages[name] = cmd;
    }
    stages["pipeline"]->add_flag("--dump-masses", args.opts.dump_masses, "Also write mass_<model>.npy");
    for (const char* name : {"analyze", "pipeline"}) {
        stages[name]->add_flag("--per-model", args.opts.per_model, "KDE of each model's masses as well");
    }
    for (const char* name : {"analyze", "sweep", "pipeline"}) {
        stages[name]->add_flag("--csv", args.opts.csv, "Also write curves as CSV");
    }
    for (const char* name : {"render", "pipeline"}) {
        stages[name]->add_option("--overlay", args.overlay, "Source image tensor (H×W×3 NPY) for overlays")
            ->check(CLI::ExistingFile);
    }

    std::string verify_dir;
    CLI::App* verify = app.add_subcommand("verify", "Re-check mass validity, Bel <= Pl, U = Pl - Bel and duality");
    verify->add_option("output_dir", verify_dir, "Completed run directory")->required();

    CLI::App* fixtures_cmd = app.add_subcommand("fixtures", "Synthetic test ensembles");
    fixtures_cmd->require_subcommand(1);
    std::string fixture_spec_path, fixture_out;
    CLI::App* gen = fixtures_cmd->add_subcommand("gen", "Generate tensors, logs and a manifest");
    gen->add_option("--spec", fixture_spec_path, "Fixture spec (JSON)")->required()->check(CLI::ExistingFile);
    gen->add_option("--out", fixture_out, "Destination directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : static_cast<int>(ExitCode::Validation);
    }

    try {
        if (*verify) {
            const auto r = pipeline::verify_run(verify_dir);
            std::cout << r.format();
            if (!r.missing.empty()) return static_cast<int>(ExitCode::Data);
            return r.passed() ? 0 : static_cast<int>(ExitCode::Invariant);
        }
        if (*gen) {
            const auto spec = fixtures::spec_from_json(read_json(fixture_spec_path));
            const auto manifest = fixtures::write_fixture(spec, fixtures::generate(spec), fixture_out);
            std::cerr << "fixture written; manifest: " << manifest.string() << "\n";
            return 0;
        }

        if (!args.overlay.empty()) args.opts.overlay = fs::path(args.overlay);
        const RunManifest m = pipeline::prepare(args.manifest, args.overrides());
        if (*stages["weigh"]) pipeline::stage_weigh(m);
        if (*stages["bpa"]) pipeline::stage_bpa(m);
        if (*stages["fuse"]) pipeline::stage_fuse(m);
        if (*stages["analyze"]) pipeline::stage_analyze(m, args.opts);
        if (*stages["sweep"]) pipeline::stage_sweep(m, args.opts);
        if (*stages["render"]) pipeline::stage_render(m, args.opts);
        if (*stages["pipeline"]) {
            std::cout << pipeline::format_summary(pipeline::run_pipeline(m, args.opts));
            std::cerr << "outputs in " << m.output_dir.string() << "\n";
        }
        return 0;
    } catch (const Error& e) {
        return report(e, e.exit_code());
    } catch (const nlohmann::json::exception& e) {
        return report(e, ExitCode::Data);
    } catch (const std::filesystem::filesystem_error& e) {
        return report(e, ExitCode::Data);
    } catch (const std::exception& e) {
        return report(e, ExitCode::Invariant);
    }
}
