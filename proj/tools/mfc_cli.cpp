// Command-line runner for the benchmark scenarios: run/compare/catalog with
// key=value overrides and CSV trace output.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "mfc/bench.hpp"

namespace {

mfc::ScenarioConfig resolve_config(const std::string& ref) {
    if (std::filesystem::exists(ref) && !std::filesystem::is_directory(ref))
        return mfc::load_config_file(ref);
    return mfc::scenario_config(ref);
}

// "key=value" or "N:key=value" (1-based config index for compare)
struct Override {
    int index = 0;  // 0 = all configs
    std::string key, value;
};

Override parse_override(const std::string& spec) {
    Override o;
    const auto eq = spec.find('=');
    if (eq == std::string::npos)
        throw CLI::ValidationError("--set expects key=value, got '" + spec + "'");
    std::string key = spec.substr(0, eq);
    o.value = spec.substr(eq + 1);
    const auto colon = key.find(':');
    if (colon != std::string::npos && colon > 0 &&
        key.find_first_not_of("0123456789") >= colon) {
        o.index = std::stoi(key.substr(0, colon));
        key = key.substr(colon + 1);
    }
    o.key = key;
    return o;
}

mfc::ScenarioConfig apply_overrides(mfc::ScenarioConfig cfg, const std::vector<Override>& ovs,
                                    int index) {
    for (const auto& o : ovs)
        if (o.index == 0 || o.index == index) cfg = mfc::with_override(cfg, o.key, o.value);
    return cfg;
}

void print_metrics(const mfc::RunArtifact& art) {
    for (std::size_t j = 0; j < art.metrics.size(); ++j) {
        const auto& m = art.metrics[j];
        std::printf("  output %zu: rms %.6g  max |e| %.6g  (window %.2f..%.2f s)\n", j + 1,
                    m.rms_error, m.max_abs_error, m.eval_window.t_start, m.eval_window.t_end);
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"model-free control benchmark runner"};
    app.require_subcommand(1);
    app.fallthrough();

    std::vector<std::string> set_specs;
    std::string out_dir;
    std::uint64_t seed = 0;
    bool has_seed = false;
    bool noiseless = false;
    app.add_option("--set", set_specs, "override config keys (key=value or N:key=value)")
        ->take_all();
    app.add_option("--out", out_dir, "directory for CSV traces and metadata");
    app.add_option("--seed", seed, "noise seed override")->each([&](const std::string&) {
        has_seed = true;
    });
    app.add_flag("--noiseless", noiseless, "disable measurement noise");

    std::string run_ref;
    auto* cmd_run = app.add_subcommand("run", "run one scenario by label or config path");
    cmd_run->add_option("scenario", run_ref, "catalog label or config file")->required();

    std::vector<std::string> cmp_refs;
    auto* cmd_cmp = app.add_subcommand("compare", "run several scenarios and compare metrics");
    cmd_cmp->add_option("scenarios", cmp_refs, "catalog labels or config files")
        ->required()
        ->expected(-2);

    auto* cmd_cat = app.add_subcommand("catalog", "list the built-in scenarios");
    std::string dump_dir;
    cmd_cat->add_option("--dump", dump_dir, "write every built-in config to this directory");

    CLI11_PARSE(app, argc, argv);

    std::vector<Override> overrides;
    try {
        for (const auto& s : set_specs) overrides.push_back(parse_override(s));
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }

    auto finalize = [&](mfc::ScenarioConfig cfg, int index) {
        cfg = apply_overrides(std::move(cfg), overrides, index);
        if (has_seed) cfg.noise.seed = seed;
        if (noiseless) cfg.noise.variance = 0.0;
        return cfg;
    };

    try {
        if (*cmd_cat) {
            std::printf("%-28s %-10s %s\n", "label", "figure", "description");
            for (const auto& e : mfc::catalog())
                std::printf("%-28s %-10s %s\n", e.label.c_str(), e.figure.c_str(),
                            e.description.c_str());
            if (!dump_dir.empty()) {
                std::filesystem::create_directories(dump_dir);
                for (const auto& e : mfc::catalog()) {
                    std::string fname = e.label;
                    for (char& c : fname)
                        if (c == '/') c = '_';
                    std::ofstream f(dump_dir + "/" + fname + ".cfg");
                    f << mfc::serialize(mfc::scenario_config(e.label));
                }
                std::printf("wrote %zu config files to %s\n", mfc::catalog().size(),
                            dump_dir.c_str());
            }
            return 0;
        }
        if (*cmd_run) {
            const auto cfg = finalize(resolve_config(run_ref), 1);
            const auto art = mfc::run_scenario(cfg);
            if (!out_dir.empty()) {
                std::string sub = art.label.empty() ? "run" : art.label;
                for (char& c : sub)
                    if (c == '/') c = '_';
                mfc::write_run_artifact(art, out_dir + "/" + sub);
                std::printf("traces written to %s/%s\n", out_dir.c_str(), sub.c_str());
            }
            if (!art.ok()) {
                std::fprintf(stderr, "simulation diverged at t = %.4f s\n", *art.diverged_at);
                return 1;
            }
            std::printf("%s: ok (config hash %016llx)\n", art.label.c_str(),
                        static_cast<unsigned long long>(art.config_hash));
            print_metrics(art);
            return 0;
        }
        if (*cmd_cmp) {
            std::vector<mfc::ScenarioConfig> cfgs;
            int idx = 1;
            for (const auto& r : cmp_refs) cfgs.push_back(finalize(resolve_config(r), idx++));
            const auto cmp = mfc::compare(cfgs);
            for (std::size_t i = 0; i < cmp.rows.size(); ++i) {
                std::printf("[%zu] %s: mean rms %.6g\n", i + 1, cmp.rows[i].label.c_str(),
                            cmp.rows[i].mean_rms);
                for (std::size_t j = 0; j < cmp.rows[i].metrics.size(); ++j)
                    std::printf("      output %zu: rms %.6g  max |e| %.6g\n", j + 1,
                                cmp.rows[i].metrics[j].rms_error,
                                cmp.rows[i].metrics[j].max_abs_error);
            }
            std::printf("pairwise rms ratios:\n");
            for (std::size_t i = 0; i < cmp.rows.size(); ++i) {
                std::printf("  ");
                for (std::size_t j = 0; j < cmp.rows.size(); ++j)
                    std::printf("%8.4f", cmp.rms_ratio[i][j]);
                std::printf("\n");
            }
            if (!out_dir.empty()) {
                for (const auto& cfg : cfgs) {
                    auto art = mfc::run_scenario(cfg);
                    std::string sub = art.label.empty() ? "run" : art.label;
                    for (char& c : sub)
                        if (c == '/') c = '_';
                    mfc::write_run_artifact(art, out_dir + "/" + sub);
                }
            }
            return 0;
        }
    } catch (const mfc::SimulationDiverged& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
