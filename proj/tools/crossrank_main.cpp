// crossrank: cross-modal retrieval re-ranking toolkit.
//
// Subcommands:
//   synth    generate a deterministic two-modality synthetic dataset
//   rerank   run one re-ranker, write the score file, print the evaluation
//   eval     evaluate a previously written score file
//   sweep    grid-evaluate HHCR parameters, emit a sorted table
//   compare  run all methods with defaults on the same data
//
// Exit codes: 0 success, 1 I/O or data error, 2 usage or parameter error.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "crossrank/crossrank.hpp"

namespace {

using namespace crossrank;

constexpr int kExitOk = 0;
constexpr int kExitDataError = 1;
constexpr int kExitUsageError = 2;

struct MethodRow {
    std::string method;
    double rank1 = 0.0;
    double map = 0.0;
    double minp = 0.0;
};

struct SweepRow {
    HhcrParams params;
    double rank1 = 0.0;
    double map = 0.0;
    double minp = 0.0;
};

std::string format_double(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

std::string format_lambda(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%g", v);
    return buf;
}

void emit(const std::string& text, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << text;
    } else {
        crossrank::detail::write_file_atomic(out_path, text);
    }
}

std::string render_compare(const std::vector<MethodRow>& rows, const std::string& format) {
    if (format == "json") {
        nlohmann::ordered_json arr = nlohmann::ordered_json::array();
        for (const auto& r : rows) {
            nlohmann::ordered_json j;
            j["method"] = r.method;
            j["rank1"] = r.rank1;
            j["mAP"] = r.map;
            j["mINP"] = r.minp;
            arr.push_back(std::move(j));
        }
        return arr.dump(2) + "\n";
    }
    std::string out = "method\trank1\tmAP\tmINP\n";
    for (const auto& r : rows) {
        out += r.method + "\t" + format_double(r.rank1) + "\t" + format_double(r.map) + "\t" +
               format_double(r.minp) + "\n";
    }
    return out;
}

std::string render_sweep(const std::vector<SweepRow>& rows, const std::string& format) {
    if (format == "json") {
        nlohmann::ordered_json arr = nlohmann::ordered_json::array();
        for (const auto& r : rows) {
            nlohmann::ordered_json j;
            j["k1"] = r.params.k1;
            j["k2"] = r.params.k2;
            j["k3"] = r.params.k3;
            j["k4"] = r.params.k4;
            j["k5"] = r.params.k5;
            j["k6"] = r.params.k6;
            j["lambda"] = r.params.lambda;
            j["rtf"] = r.params.rtf_enabled;
            j["lqe"] = r.params.lqe_enabled;
            j["rank1"] = r.rank1;
            j["mAP"] = r.map;
            j["mINP"] = r.minp;
            arr.push_back(std::move(j));
        }
        return arr.dump(2) + "\n";
    }
    std::string out = "k1\tk2\tk3\tk4\tk5\tk6\tlambda\trtf\tlqe\trank1\tmAP\tmINP\n";
    for (const auto& r : rows) {
        out += std::to_string(r.params.k1) + "\t" + std::to_string(r.params.k2) + "\t" +
               std::to_string(r.params.k3) + "\t" + std::to_string(r.params.k4) + "\t" +
               std::to_string(r.params.k5) + "\t" + std::to_string(r.params.k6) + "\t" +
               format_lambda(r.params.lambda) + "\t" + (r.params.rtf_enabled ? "on" : "off") +
               "\t" + (r.params.lqe_enabled ? "on" : "off") + "\t" + format_double(r.rank1) +
               "\t" + format_double(r.map) + "\t" + format_double(r.minp) + "\n";
    }
    return out;
}

std::string render_report(const EvalReport& report, const std::string& format) {
    if (format == "json") return to_json(report, 2) + "\n";
    return to_kv_text(report);
}

struct MethodOutput {
    Matrix scores;
    bool higher_is_better = true;
};

MethodOutput run_method(const std::string& method, const FeatureSet& query,
                        const FeatureSet& gallery, const HhcrParams& hp,
                        const KReciprocalParams& kp, const EcnParams& ep) {
    if (method == "cosine") return {cosine_rank(query, gallery), true};
    if (method == "hhcr") return {hhcr_final(query, gallery, hp), true};
    if (method == "kreciprocal") return {kreciprocal_rerank(query, gallery, kp), false};
    if (method == "ecn") return {ecn_rerank(query, gallery, ep), false};
    throw ParameterError("unknown method: " + method);
}

int cmd_synth(const SynthSpec& spec, const std::string& out_vis, const std::string& out_ir) {
    auto [vis, ir] = synth_generate(spec);
    save_features(vis, out_vis);
    save_features(ir, out_ir);
    std::printf("synth: ids=%zu per=%zu dim=%zu noise=%g offset=%g seed=%llu\n",
                spec.num_identities, spec.per_identity_per_modality, spec.dim, spec.noise_sigma,
                spec.modality_offset_sigma, static_cast<unsigned long long>(spec.seed));
    std::printf("wrote %s (n=%zu, fnv1a64=%016llx)\n", out_vis.c_str(), vis.count,
                static_cast<unsigned long long>(fnv1a_digest(out_vis)));
    std::printf("wrote %s (n=%zu, fnv1a64=%016llx)\n", out_ir.c_str(), ir.count,
                static_cast<unsigned long long>(fnv1a_digest(out_ir)));
    return kExitOk;
}

int cmd_rerank(const std::string& method, const std::string& query_path,
               const std::string& gallery_path, const std::string& out_path,
               const std::string& report_path, const std::string& format, const HhcrParams& hp,
               const KReciprocalParams& kp, const EcnParams& ep) {
    const FeatureSet query = load_features(query_path);
    const FeatureSet gallery = load_features(gallery_path);
    const MethodOutput result = run_method(method, query, gallery, hp, kp, ep);

    ScoreFile sf;
    sf.nq = query.count;
    sf.ng = gallery.count;
    sf.method = method;
    sf.higher_is_better = result.higher_is_better;
    sf.scores = result.scores;
    save_scores(sf, out_path);

    const EvalReport report = evaluate(result.scores, query, gallery, result.higher_is_better);
    const std::string text = render_report(report, format);
    std::cout << text;
    if (!report_path.empty()) crossrank::detail::write_file_atomic(report_path, text);
    return kExitOk;
}

int cmd_eval(const std::string& scores_path, const std::string& query_path,
             const std::string& gallery_path, const std::string& report_path,
             const std::string& format) {
    const ScoreFile sf = load_scores(scores_path);
    const FeatureSet query = load_features(query_path);
    const FeatureSet gallery = load_features(gallery_path);
    if (sf.nq != query.count || sf.ng != gallery.count) {
        throw DimensionError("score file shape disagrees with the provided feature sets");
    }
    const EvalReport report = evaluate(sf.scores, query, gallery, sf.higher_is_better);
    const std::string text = render_report(report, format);
    std::cout << text;
    if (!report_path.empty()) crossrank::detail::write_file_atomic(report_path, text);
    return kExitOk;
}

int cmd_sweep(const std::string& query_path, const std::string& gallery_path,
              const std::vector<std::size_t>& k1s, const std::vector<std::size_t>& k2s,
              const std::vector<std::size_t>& k3s, const std::vector<std::size_t>& k4s,
              const std::vector<std::size_t>& k5s, const std::vector<std::size_t>& k6s,
              const std::vector<double>& lambdas, const std::vector<std::string>& rtfs,
              const std::vector<std::string>& lqes, const std::string& format,
              const std::string& out_path) {
    auto parse_toggle = [](const std::string& v) {
        if (v == "on" || v == "true" || v == "1") return true;
        if (v == "off" || v == "false" || v == "0") return false;
        throw ParameterError("toggle grid values must be on/off");
    };
    const FeatureSet query = load_features(query_path);
    const FeatureSet gallery = load_features(gallery_path);

    std::vector<SweepRow> rows;
    for (std::size_t k1 : k1s)
        for (std::size_t k2 : k2s)
            for (std::size_t k3 : k3s)
                for (std::size_t k4 : k4s)
                    for (std::size_t k5 : k5s)
                        for (std::size_t k6 : k6s)
                            for (double lambda : lambdas)
                                for (const auto& rtf : rtfs)
                                    for (const auto& lqe_v : lqes) {
                                        HhcrParams p;
                                        p.k1 = k1;
                                        p.k2 = k2;
                                        p.k3 = k3;
                                        p.k4 = k4;
                                        p.k5 = k5;
                                        p.k6 = k6;
                                        p.lambda = lambda;
                                        p.rtf_enabled = parse_toggle(rtf);
                                        p.lqe_enabled = parse_toggle(lqe_v);
                                        const Matrix s = hhcr_final(query, gallery, p);
                                        const EvalReport r = evaluate(s, query, gallery);
                                        rows.push_back({p, r.rank1, r.map, r.minp});
                                    }

    std::stable_sort(rows.begin(), rows.end(),
                     [](const SweepRow& a, const SweepRow& b) { return a.map > b.map; });
    emit(render_sweep(rows, format), out_path);
    return kExitOk;
}

int cmd_compare(const std::string& query_path, const std::string& gallery_path,
                const std::string& format, const std::string& out_path) {
    const FeatureSet query = load_features(query_path);
    const FeatureSet gallery = load_features(gallery_path);
    const HhcrParams hp;
    const KReciprocalParams kp;
    const EcnParams ep;

    std::vector<MethodRow> rows;
    for (const char* method : {"cosine", "kreciprocal", "ecn", "hhcr"}) {
        const MethodOutput r = run_method(method, query, gallery, hp, kp, ep);
        const EvalReport rep = evaluate(r.scores, query, gallery, r.higher_is_better);
        rows.push_back({method, rep.rank1, rep.map, rep.minp});
    }
    emit(render_compare(rows, format), out_path);
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"crossrank: cross-modal retrieval re-ranking toolkit"};
    app.option_defaults()->always_capture_default(); // show defaults in --help
    app.require_subcommand(1);

    // synth
    SynthSpec spec;
    std::string out_vis, out_ir;
    auto* synth = app.add_subcommand("synth", "Generate a synthetic two-modality dataset");
    synth->add_option("--ids", spec.num_identities, "Number of identities")->required();
    synth->add_option("--per", spec.per_identity_per_modality, "Samples per identity per modality")
        ->required();
    synth->add_option("--dim", spec.dim, "Embedding dimension")->required();
    synth->add_option("--noise", spec.noise_sigma, "Expected per-sample noise norm");
    synth->add_option("--offset", spec.modality_offset_sigma,
                      "Per-coordinate sigma of the fixed modality offset vector");
    synth->add_option("--seed", spec.seed, "PRNG seed");
    synth->add_option("--out-vis", out_vis, "Output path for the visible FEAT file")->required();
    synth->add_option("--out-ir", out_ir, "Output path for the infrared FEAT file")->required();

    // shared method options
    std::string method = "hhcr", query_path, gallery_path, out_path, report_path, format = "tsv";
    HhcrParams hp;
    KReciprocalParams kp;
    EcnParams ep;

    auto add_method_options = [&](CLI::App* cmd) {
        cmd->add_option("--k1", hp.k1, "HHCR joint adjacency size, visible rows");
        cmd->add_option("--k2", hp.k2, "HHCR candidate/intra-modal neighborhood, visible");
        cmd->add_option("--k3", hp.k3, "HHCR intra-modal value retention, visible");
        cmd->add_option("--k4", hp.k4, "HHCR joint adjacency size, infrared rows");
        cmd->add_option("--k5", hp.k5, "HHCR candidate/intra-modal neighborhood, infrared");
        cmd->add_option("--k6", hp.k6, "HHCR intra-modal value retention, infrared");
        cmd->add_option("--lambda", hp.lambda, "HHCR fusion weight");
        cmd->add_flag("--rtf,!--no-rtf", hp.rtf_enabled, "Symmetrize the adjacency (on)");
        cmd->add_flag("--lqe,!--no-lqe", hp.lqe_enabled, "Stage-1 local query expansion (on)");
        cmd->add_option("--kr-k1", kp.k1, "k-reciprocal neighborhood size");
        cmd->add_option("--kr-k2", kp.k2, "k-reciprocal query-expansion size");
        cmd->add_option("--kr-lambda", kp.lambda, "k-reciprocal fusion weight");
        cmd->add_option("--ecn-t", ep.t, "ECN immediate neighbor list length");
        cmd->add_option("--ecn-q", ep.q, "ECN expansion length");
    };

    auto* rerank = app.add_subcommand("rerank", "Run a re-ranker and evaluate it");
    rerank->add_option("--method", method, "cosine | hhcr | kreciprocal | ecn")
        ->check(CLI::IsMember({"cosine", "hhcr", "kreciprocal", "ecn"}));
    rerank->add_option("--query", query_path, "Query FEAT file")->required();
    rerank->add_option("--gallery", gallery_path, "Gallery FEAT file")->required();
    rerank->add_option("--out", out_path, "Output score file")->required();
    rerank->add_option("--report", report_path, "Optional report output file");
    rerank->add_option("--format", format, "Report format")->check(CLI::IsMember({"tsv", "json"}));
    add_method_options(rerank);

    auto* eval = app.add_subcommand("eval", "Evaluate a previously written score file");
    eval->add_option("--scores", out_path, "Score file to evaluate")->required();
    eval->add_option("--query", query_path, "Query FEAT file")->required();
    eval->add_option("--gallery", gallery_path, "Gallery FEAT file")->required();
    eval->add_option("--report", report_path, "Optional report output file");
    eval->add_option("--format", format, "Report format")->check(CLI::IsMember({"tsv", "json"}));

    std::vector<std::size_t> k1s{hp.k1}, k2s{hp.k2}, k3s{hp.k3}, k4s{hp.k4}, k5s{hp.k5},
        k6s{hp.k6};
    std::vector<double> lambdas{hp.lambda};
    std::vector<std::string> rtfs{"on"}, lqes{"on"};
    auto* sweep = app.add_subcommand("sweep", "Grid-evaluate HHCR parameters");
    sweep->add_option("--query", query_path, "Query FEAT file")->required();
    sweep->add_option("--gallery", gallery_path, "Gallery FEAT file")->required();
    sweep->add_option("--k1", k1s, "k1 grid")->delimiter(',');
    sweep->add_option("--k2", k2s, "k2 grid")->delimiter(',');
    sweep->add_option("--k3", k3s, "k3 grid")->delimiter(',');
    sweep->add_option("--k4", k4s, "k4 grid")->delimiter(',');
    sweep->add_option("--k5", k5s, "k5 grid")->delimiter(',');
    sweep->add_option("--k6", k6s, "k6 grid")->delimiter(',');
    sweep->add_option("--lambda", lambdas, "lambda grid")->delimiter(',');
    sweep->add_option("--rtf", rtfs, "rtf grid (on/off)")->delimiter(',');
    sweep->add_option("--lqe", lqes, "lqe grid (on/off)")->delimiter(',');
    sweep->add_option("--format", format, "Table format")->check(CLI::IsMember({"tsv", "json"}));
    sweep->add_option("--out", out_path, "Optional table output file");

    auto* compare = app.add_subcommand("compare", "Compare all methods with default parameters");
    compare->add_option("--query", query_path, "Query FEAT file")->required();
    compare->add_option("--gallery", gallery_path, "Gallery FEAT file")->required();
    compare->add_option("--format", format, "Table format")->check(CLI::IsMember({"tsv", "json"}));
    compare->add_option("--out", out_path, "Optional table output file");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsageError;
    }

    try {
        if (synth->parsed()) {
            if (spec.num_identities < 1 || spec.per_identity_per_modality < 1 || spec.dim < 2) {
                throw ParameterError("synth: ids/per must be >= 1 and dim >= 2");
            }
            return cmd_synth(spec, out_vis, out_ir);
        }
        if (rerank->parsed()) {
            return cmd_rerank(method, query_path, gallery_path, out_path, report_path, format, hp,
                              kp, ep);
        }
        if (eval->parsed()) {
            return cmd_eval(out_path, query_path, gallery_path, report_path, format);
        }
        if (sweep->parsed()) {
            if (k1s.empty() || k2s.empty() || k3s.empty() || k4s.empty() || k5s.empty() ||
                k6s.empty() || lambdas.empty() || rtfs.empty() || lqes.empty()) {
                throw ParameterError("sweep: every grid must be non-empty");
            }
            return cmd_sweep(query_path, gallery_path, k1s, k2s, k3s, k4s, k5s, k6s, lambdas,
                             rtfs, lqes, format, out_path);
        }
        if (compare->parsed()) {
            return cmd_compare(query_path, gallery_path, format, out_path);
        }
    } catch (const ParameterError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsageError;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitDataError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitDataError;
    }
    return kExitOk;
}
