#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "orf/container.hpp"
#include "orf/chunk_refine.hpp"
#include "orf/json_io.hpp"
#include "orf/pipeline.hpp"
#include "orf/retention_map.hpp"
#include "orf/scenario.hpp"
#include "orf/sweep.hpp"

namespace {

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw orf::IoError("cannot open '" + path + "' for reading");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw orf::IoError("cannot open '" + path + "' for writing");
    out << text;
    if (!out) throw orf::IoError("write failure on '" + path + "'");
}

orf::HyperParams load_params(const std::string& path) {
    if (path.empty()) return orf::HyperParams{};
    return orf::hyperparams_from_json(nlohmann::json::parse(read_text_file(path)));
}

// Prefer explicit --params, then parameters embedded in the container.
orf::HyperParams resolve_params(const std::string& params_path,
                                const orf::LoadedContainer& loaded) {
    if (!params_path.empty()) return load_params(params_path);
    if (loaded.params) return *loaded.params;
    return orf::HyperParams{};
}

int run(int argc, char** argv) {
    CLI::App app{"Two-stage audio-visual token compression engine"};
    app.require_subcommand(1);

    // --- gen ---
    auto* gen = app.add_subcommand("gen", "Generate a synthetic scenario container");
    orf::ScenarioSpec spec;
    std::string gen_out, gen_params;
    bool gen_embed_params = false;
    gen->add_option("--out", gen_out, "Output container path")->required();
    gen->add_option("--frames", spec.num_frames, "Frame count")->required();
    gen->add_option("--grid-h", spec.grid_h, "Patch rows per frame")->required();
    gen->add_option("--grid-w", spec.grid_w, "Patch columns per frame")->required();
    gen->add_option("--audio-tokens", spec.num_audio_tokens, "Audio token count")->required();
    gen->add_option("--dim", spec.dim, "Embedding dimensionality")->required();
    gen->add_option("--events", spec.num_events, "Latent cross-modal event count");
    gen->add_option("--jitter", spec.boundary_jitter, "Max event-boundary offset");
    gen->add_option("--noise", spec.noise_sigma, "Additive noise scale");
    gen->add_option("--seed", spec.seed, "RNG seed");
    gen->add_option("--params", gen_params, "Hyperparameter JSON (bucket size bounds)");
    gen->add_flag("--embed-params", gen_embed_params, "Store the parameters in the container");

    // --- compress ---
    auto* compress = app.add_subcommand("compress", "Compress a container");
    std::string c_in, c_out, c_report, c_params, c_chunks, c_trace, c_field;
    bool c_exact = false;
    compress->add_option("--in", c_in, "Input container")->required();
    compress->add_option("--out", c_out, "Compressed container output");
    compress->add_option("--report", c_report, "Report JSON output");
    compress->add_option("--params", c_params, "Hyperparameter JSON");
    compress->add_option("--chunks", c_chunks, "Chunking JSON output");
    compress->add_option("--trace", c_trace, "Per-chunk diagnostic trace JSON output");
    compress->add_option("--export-field", c_field,
                         "Write <prefix>.{sim,mask,masked}.csv of the correspondence field");
    std::string c_cost;
    compress->add_option("--cost", c_cost, "Cost model JSON (c_quad, c_lin, ...)");
    compress->add_flag("--exact", c_exact, "Disable the DP band (default: banded)");
    auto* banded_flag =
        compress->add_flag("--banded", "Keep the DP band enabled (default)");
    (void)banded_flag;

    // --- oracle-check ---
    auto* oracle = app.add_subcommand("oracle-check",
                                      "Cross-check DP against brute force on a small container");
    std::string o_in, o_params;
    oracle->add_option("--in", o_in, "Input container")->required();
    oracle->add_option("--params", o_params, "Hyperparameter JSON");

    // --- report ---
    auto* report_cmd = app.add_subcommand("report", "Pretty-print a report JSON");
    std::string r_in;
    report_cmd->add_option("--in", r_in, "Report JSON path")->required();

    // --- viz ---
    auto* viz = app.add_subcommand("viz", "Export a retention map for a container");
    std::string v_in, v_out, v_format = "csv", v_params;
    bool v_exact = false;
    viz->add_option("--in", v_in, "Input container")->required();
    viz->add_option("--out", v_out, "Output path")->required();
    viz->add_option("--format", v_format, "csv|svg")->required();
    viz->add_option("--params", v_params, "Hyperparameter JSON");
    viz->add_flag("--exact", v_exact, "Disable the DP band");

    // --- sweep ---
    auto* sweep_cmd = app.add_subcommand("sweep", "Run a hyperparameter grid");
    std::string s_in, s_grid, s_out, s_params;
    double s_budget = -1.0;
    bool s_exact = false;
    sweep_cmd->add_option("--in", s_in, "Input container")->required();
    sweep_cmd->add_option("--grid", s_grid, "Grid JSON path")->required();
    sweep_cmd->add_option("--out", s_out, "Rows JSON output");
    sweep_cmd->add_option("--params", s_params, "Base hyperparameter JSON");
    sweep_cmd->add_option("--constant-budget", s_budget,
                          "Tune rho_v per point to this overall retained ratio");
    sweep_cmd->add_flag("--exact", s_exact, "Disable the DP band");

    CLI11_PARSE(app, argc, argv);

    if (gen->parsed()) {
        const orf::HyperParams params = load_params(gen_params);
        const orf::GeneratedScenario scenario = orf::generate_scenario(spec, params);
        orf::save_container(scenario.video, scenario.audio,
                            gen_embed_params ? &params : nullptr, &scenario.truth, gen_out);
        std::cout << "wrote " << gen_out << " (" << scenario.video.num_frames << " frames, "
                  << scenario.audio.num_tokens << " audio tokens, "
                  << scenario.video.num_buckets() << " buckets)\n";
        return 0;
    }

    if (compress->parsed()) {
        const orf::LoadedContainer loaded = orf::load_container(c_in);
        const orf::HyperParams params = resolve_params(c_params, loaded);
        orf::CostModel cost;
        if (!c_cost.empty()) {
            cost = orf::cost_model_from_json(nlohmann::json::parse(read_text_file(c_cost)));
        }
        const orf::PipelineResult result =
            orf::run_pipeline(loaded.video, loaded.audio, params, !c_exact, cost);
        if (!c_out.empty()) {
            orf::save_container(result.compressed_video, result.compressed_audio, &params,
                                nullptr, c_out);
        }
        if (!c_report.empty()) {
            write_text_file(c_report, orf::report_to_json(result.report));
        }
        if (!c_trace.empty()) {
            write_text_file(c_trace, orf::pipeline_trace_json(result));
        }
        if (!c_chunks.empty() || !c_field.empty()) {
            const orf::BoundaryMode mode = params.one_sided_boundary
                                               ? orf::BoundaryMode::one_sided
                                               : orf::BoundaryMode::bucket_only;
            const orf::CorrespondenceField field =
                orf::build_field(loaded.video, loaded.audio, mode);
            if (!c_chunks.empty()) {
                write_text_file(c_chunks, orf::chunking_to_json(result.chunking, field,
                                                                params, !c_exact));
            }
            if (!c_field.empty()) {
                const auto write_csv = [&](const std::string& suffix, const auto& fn) {
                    std::ofstream out(c_field + suffix, std::ios::trunc);
                    if (!out) throw orf::IoError("cannot open '" + c_field + suffix + "'");
                    fn(out);
                };
                write_csv(".sim.csv",
                          [&](std::ostream& o) { orf::write_matrix_csv(o, field.sim); });
                write_csv(".mask.csv", [&](std::ostream& o) {
                    orf::write_mask_csv(o, field.mask, field.num_frames, field.num_audio);
                });
                write_csv(".masked.csv",
                          [&](std::ostream& o) { orf::write_matrix_csv(o, field.masked); });
            }
        }
        std::cout << "retained " << result.report.tokens_after << "/"
                  << result.report.tokens_before << " tokens (ratio "
                  << result.report.overall_retained_ratio << ", flops proxy "
                  << result.report.flops_proxy_ratio << ") over "
                  << result.chunking.chunks.size() << " chunks\n";
        return 0;
    }

    if (oracle->parsed()) {
        const orf::LoadedContainer loaded = orf::load_container(o_in);
        const orf::HyperParams params = resolve_params(o_params, loaded);
        const orf::BoundaryMode mode = params.one_sided_boundary
                                           ? orf::BoundaryMode::one_sided
                                           : orf::BoundaryMode::bucket_only;
        const orf::CorrespondenceField field =
            orf::build_field(loaded.video, loaded.audio, mode);
        const orf::RefinedChunking dp = orf::refine_chunks_dp(field, params, false);
        const orf::RefinedChunking oracle_result = orf::refine_chunks_bruteforce(field, params);
        const bool score_match = dp.score == oracle_result.score;
        const bool chunks_match = dp.chunks == oracle_result.chunks;
        std::cout << "dp score      " << dp.score << " (" << dp.chunks.size() << " chunks)\n"
                  << "oracle score  " << oracle_result.score << " ("
                  << oracle_result.chunks.size() << " chunks)\n"
                  << "score match   " << (score_match ? "yes" : "NO") << "\n"
                  << "chunk match   " << (chunks_match ? "yes" : "NO") << "\n";
        if (!score_match || !chunks_match) {
            throw orf::InvariantError("oracle-check: DP and brute force disagree");
        }
        return 0;
    }

    if (report_cmd->parsed()) {
        const nlohmann::json j = nlohmann::json::parse(read_text_file(r_in));
        std::cout << "report version " << j.value("report_version", 0) << ", config "
                  << j.value("config_digest", std::string("?")) << "\n"
                  << "chunks " << j["per_chunk"].size() << ", chunking score "
                  << j["chunking_score"].get<double>() << (j["banded"].get<bool>() ? " (banded)" : " (exact)")
                  << "\n"
                  << "retained " << j["tokens_after"].get<std::size_t>() << "/"
                  << j["tokens_before"].get<std::size_t>() << " = "
                  << j["overall_retained_ratio"].get<double>() << "\n"
                  << "flops proxy ratio " << j["flops_proxy_ratio"].get<double>() << "\n";
        for (const auto& c : j["per_chunk"]) {
            std::cout << "  chunk " << c["chunk_id"].get<int>() << ": frames ["
                      << c["f_lo"].get<std::size_t>() << ", " << c["f_hi"].get<std::size_t>()
                      << "], audio [" << c["t_lo"].get<std::size_t>() << ", "
                      << c["t_hi"].get<std::size_t>() << "], r_v " << c["r_v"].get<double>()
                      << ", m_a " << c["m_a"].get<double>() << ", R_a "
                      << c["R_a"].get<double>() << "\n";
        }
        return 0;
    }

    if (viz->parsed()) {
        const orf::LoadedContainer loaded = orf::load_container(v_in);
        const orf::HyperParams params = resolve_params(v_params, loaded);
        const orf::PipelineResult result =
            orf::run_pipeline(loaded.video, loaded.audio, params, !v_exact);
        orf::export_retention_map(loaded.video, loaded.audio, result, v_out, v_format);
        std::cout << "wrote " << v_out << "\n";
        return 0;
    }

    if (sweep_cmd->parsed()) {
        const orf::LoadedContainer loaded = orf::load_container(s_in);
        const orf::HyperParams params = resolve_params(s_params, loaded);
        const orf::SweepGrid grid = orf::SweepGrid::from_json_text(read_text_file(s_grid));
        std::optional<double> budget;
        if (s_budget >= 0.0) budget = s_budget;
        const std::vector<orf::SweepRow> rows =
            orf::sweep(loaded.video, loaded.audio, params, grid, budget, !s_exact);
        const std::string text = orf::sweep_rows_to_json(rows);
        if (!s_out.empty()) {
            write_text_file(s_out, text);
            std::cout << "wrote " << rows.size() << " rows to " << s_out << "\n";
        } else {
            std::cout << text << "\n";
        }
        return 0;
    }

    return 0;
}

} // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const orf::ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return 2;
    } catch (const orf::IoError& e) {
        std::cerr << "i/o error: " << e.what() << "\n";
        return 3;
    } catch (const orf::InvariantError& e) {
        std::cerr << "invariant failure: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    }
}
