// cspot: segmentation-free keyword spotting over character probability maps.
//
// Subcommands:
//   gen   synthesize a .cpmap corpus with ground truth from a spec file
//   spot  run the spotting pipeline for a query list over a corpus
//   eval  score a results file against ground truth (MAP at an overlap
//         threshold under iou / x_iou / iow)

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cspot/cspot.hpp"
#include "cspot/serialize.hpp"

namespace fs = std::filesystem;
using namespace cspot;

namespace {

// Exit codes, one per error class (0 = success).
int exit_code_for(Errc c) {
    switch (c) {
        case Errc::invalid_spec: return 3;
        case Errc::layout_overflow: return 4;
        case Errc::io_error: return 5;
        case Errc::bad_magic:
        case Errc::truncated_payload:
        case Errc::invariant_violation: return 6;
        case Errc::unknown_symbol:
        case Errc::empty_after_normalization: return 7;
        case Errc::mismatched_page_ids: return 8;
        default: return 9;
    }
}

struct GenArgs {
    std::string spec_path;
    std::string out_dir;
    uint64_t seed = 0;
    bool seed_set = false;
    int workers = 0;
};

int run_gen(const GenArgs& args) {
    SynthSpec spec = load_synth_spec(args.spec_path);
    if (args.seed_set) spec.seed = args.seed;
    const fs::path out(args.out_dir);
    fs::create_directories(out);

    const std::vector<SynthPage> pages = generate(spec, resolve_workers(args.workers));
    std::vector<GtWord> gts;
    for (const SynthPage& page : pages) {
        write_page_maps(page.maps, out / (page.maps.page_id + ".cpmap"));
        gts.insert(gts.end(), page.gts.begin(), page.gts.end());
    }
    save_gt_words(gts, out / "gt.json");
    detail::save_json_file(
        {{"tool_version", kToolVersion}, {"spec", to_json(spec)}, {"pages", spec.pages}},
        out / "manifest.json");
    std::cerr << "gen: " << spec.pages << " pages, " << gts.size() << " words -> " << out.string()
              << "\n";
    return 0;
}

struct SpotArgs {
    std::string corpus_dir;
    std::string queries_path;
    std::string out_path = "results.tsv";
    std::string config_path;
    int workers = 0;
    bool fold_case = true;
    // per-flag overrides; CLI11 marks which were provided
    SpotConfig overrides;
};

std::vector<fs::path> corpus_files(const fs::path& dir) {
    if (!fs::is_directory(dir))
        throw Error(Errc::io_error, "corpus directory " + dir.string() + " not found");
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.is_regular_file() && e.path().extension() == ".cpmap") files.push_back(e.path());
    std::sort(files.begin(), files.end());
    if (files.empty()) throw Error(Errc::io_error, "no .cpmap files in " + dir.string());
    return files;
}

int run_spot(const SpotArgs& args, const SpotConfig& cfg) {
    cfg.validate();
    const std::vector<fs::path> files = corpus_files(args.corpus_dir);
    const std::vector<std::string> raw_queries = load_queries(args.queries_path);

    // Normalized queries, deduplicated, in first-appearance order. The
    // alphabet comes from the corpus; every page must agree with it.
    const Alphabet alphabet = load_page_maps(files.front()).alphabet;
    std::vector<Query> queries;
    {
        std::vector<std::string> seen;
        for (const std::string& raw : raw_queries) {
            Query q = normalize_query(raw, alphabet, args.fold_case);
            if (std::find(seen.begin(), seen.end(), q.normalized) != seen.end()) continue;
            seen.push_back(q.normalized);
            queries.push_back(std::move(q));
        }
    }

    const int n_pages = static_cast<int>(files.size());
    std::vector<std::vector<Detection>> per_page(n_pages);  // all queries concatenated
    std::vector<std::vector<size_t>> per_page_query(n_pages);
    std::vector<int> per_page_downscale(n_pages, 1);

    const auto t0 = std::chrono::steady_clock::now();
    if (!queries.empty()) {
        parallel_for(n_pages, resolve_workers(args.workers), [&](int p) {
            const PageMaps page = load_page_maps(files[p]);
            if (page.alphabet.symbols != alphabet.symbols ||
                page.alphabet.blank_index != alphabet.blank_index)
                throw Error(Errc::invariant_violation,
                            page.page_id + ": alphabet differs from the rest of the corpus");
            per_page_downscale[p] = page.downscale;
            const IntegralStack stack = build_integrals(page);
            const HeightMap hmap = build_height_map(stack);
            for (size_t qi = 0; qi < queries.size(); ++qi) {
                for (Detection& d : spot(page, stack, hmap, queries[qi], cfg)) {
                    per_page[p].push_back(std::move(d));
                    per_page_query[p].push_back(qi);
                }
            }
        });
    }
    const auto t1 = std::chrono::steady_clock::now();

    // Merge ordered by (query, -score, page, box): deterministic ranking.
    struct Merged {
        size_t qi;
        int page_index;
        Detection det;
    };
    std::vector<Merged> merged;
    for (int p = 0; p < n_pages; ++p)
        for (size_t i = 0; i < per_page[p].size(); ++i)
            merged.push_back({per_page_query[p][i], p, per_page[p][i]});
    std::stable_sort(merged.begin(), merged.end(), [](const Merged& a, const Merged& b) {
        if (a.qi != b.qi) return a.qi < b.qi;
        if (a.det.score != b.det.score) return a.det.score > b.det.score;
        if (a.det.page_id != b.det.page_id) return a.det.page_id < b.det.page_id;
        if (a.det.box.row_start != b.det.box.row_start)
            return a.det.box.row_start < b.det.box.row_start;
        return a.det.box.col_start < b.det.box.col_start;
    });

    std::vector<ResultRow> rows;
    rows.reserve(merged.size());
    for (const Merged& m : merged) {
        ResultRow r;
        r.query = queries[m.qi].normalized;
        r.page_id = m.det.page_id;
        r.box = m.det.box.scaled(per_page_downscale[m.page_index]);
        r.score = m.det.score;
        r.stage = stage_name(m.det.stage);
        rows.push_back(std::move(r));
    }
    write_results_tsv(rows, args.out_path);

    RunManifest manifest;
    manifest.config = cfg;
    for (const fs::path& f : files) manifest.corpus_paths.push_back(f.string());
    for (const Query& q : queries) manifest.queries.push_back(q.normalized);
    manifest.output_path = args.out_path;
    save_manifest(manifest, args.out_path + ".manifest.json");

    const double total_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
    const size_t pairs = files.size() * std::max<size_t>(1, queries.size());
    std::fprintf(stderr,
                 "spot: %d pages x %zu queries, %zu detections, %.1f ms total, %.3f ms per "
                 "(image, query)\n",
                 n_pages, queries.size(), rows.size(), total_ms,
                 total_ms / static_cast<double>(pairs));
    return 0;
}

struct EvalArgs {
    std::string results_path;
    std::string gt_path;
    std::string metric = "iou";
    double threshold = 0.25;
    std::string out_path;
};

int run_eval(const EvalArgs& args) {
    const std::vector<ResultRow> rows = read_results_tsv(args.results_path);
    const std::vector<GtWord> gts = load_gt_words(args.gt_path);
    const OverlapMetric metric = parse_overlap_metric(args.metric);

    std::set<std::string> gt_pages;
    for (const GtWord& w : gts) gt_pages.insert(w.page_id);
    for (const ResultRow& r : rows)
        if (!gt_pages.count(r.page_id))
            throw Error(Errc::mismatched_page_ids,
                        "results reference page \"" + r.page_id + "\" absent from ground truth");

    // Rows are grouped per query in file order (already rank-sorted).
    std::vector<std::pair<std::string, std::vector<Detection>>> per_query;
    for (const ResultRow& r : rows) {
        if (per_query.empty() || per_query.back().first != r.query)
            per_query.push_back({r.query, {}});
        per_query.back().second.push_back(
            {r.box, r.score, r.page_id, Stage::counting});
    }
    for (auto& [q, dets] : per_query)
        std::stable_sort(dets.begin(), dets.end(),
                         [](const Detection& a, const Detection& b) { return a.score > b.score; });

    const EvalReport report = evaluate(per_query, gts, metric, args.threshold);

    std::printf("metric=%s threshold=%.2f queries=%zu\n", overlap_metric_name(metric),
                args.threshold, report.per_query_ap.size());
    std::printf("%-24s %s\n", "query", "AP");
    for (const auto& [q, ap] : report.per_query_ap) std::printf("%-24s %.4f\n", q.c_str(), ap);
    for (const std::string& q : report.skipped_queries)
        std::fprintf(stderr, "warning: query \"%s\" has no ground-truth instances, skipped\n",
                     q.c_str());
    std::printf("%-24s %.4f\n", "MAP", report.map_value);

    if (!args.out_path.empty()) save_eval_report(report, args.out_path);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"segmentation-free keyword spotting by character counting"};
    app.require_subcommand(1);

    GenArgs gen;
    CLI::App* cmd_gen = app.add_subcommand("gen", "generate a synthetic corpus");
    cmd_gen->add_option("--spec", gen.spec_path, "synth spec JSON")->required();
    cmd_gen->add_option("--out", gen.out_dir, "output corpus directory")->required();
    auto* seed_opt = cmd_gen->add_option("--seed", gen.seed, "override spec seed");
    cmd_gen->add_option("--workers", gen.workers, "worker threads (0 = auto)");

    SpotArgs spot_args;
    SpotConfig cfg;
    CLI::App* cmd_spot = app.add_subcommand("spot", "spot queries over a corpus");
    cmd_spot->add_option("--corpus", spot_args.corpus_dir, "corpus directory")->required();
    cmd_spot->add_option("--queries", spot_args.queries_path, "query list, one per line")
        ->required();
    cmd_spot->add_option("--out", spot_args.out_path, "results TSV path");
    cmd_spot->add_option("--config", spot_args.config_path, "SpotConfig JSON");
    cmd_spot->add_option("--workers", spot_args.workers, "worker threads (0 = auto)");
    cmd_spot->add_flag("--fold-case,!--no-fold-case", spot_args.fold_case,
                       "fold query case against the alphabet");
    auto* o_p = cmd_spot->add_option("--p-thres", cfg.p_thres, "first-char probability threshold");
    auto* o_r = cmd_spot->add_option("--r-thres", cfg.r_thres, "centering ratio threshold");
    auto* o_dil = cmd_spot->add_option("--dilation", cfg.dilation, "start dilation kernel");
    auto* o_lev = cmd_spot->add_option("--levels", cfg.levels, "pyramid levels");
    auto* o_nms = cmd_spot->add_option("--nms-iou", cfg.nms_iou, "NMS IoU threshold");
    auto* o_topk = cmd_spot->add_option("--top-k", cfg.top_k, "candidates re-scored per page");
    auto* o_end =
        cmd_spot->add_option("--end-overestimate", cfg.end_overestimate, "CTC width extension");
    auto* o_tol =
        cmd_spot->add_option("--count-tolerance", cfg.count_tolerance, "width search slack");
    auto* o_sig = cmd_spot->add_option("--sigma-frac", cfg.sigma_frac, "query pyramid Gaussian");
    std::string ctc_mode, descriptor;
    auto* o_ctc = cmd_spot->add_option("--ctc", ctc_mode, "off | one_way | two_way");
    auto* o_desc = cmd_spot->add_option("--descriptor", descriptor, "pcount | phoc");

    EvalArgs eval;
    CLI::App* cmd_eval = app.add_subcommand("eval", "evaluate results against ground truth");
    cmd_eval->add_option("--results", eval.results_path, "results TSV")->required();
    cmd_eval->add_option("--gt", eval.gt_path, "ground-truth JSON")->required();
    cmd_eval->add_option("--metric", eval.metric, "iou | x_iou | iow");
    cmd_eval->add_option("--threshold", eval.threshold, "overlap threshold");
    cmd_eval->add_option("--out", eval.out_path, "report JSON path");

    CLI11_PARSE(app, argc, argv);

    try {
        if (cmd_gen->parsed()) {
            gen.seed_set = seed_opt->count() > 0;
            return run_gen(gen);
        }
        if (cmd_spot->parsed()) {
            SpotConfig effective =
                spot_args.config_path.empty() ? SpotConfig{} : load_spot_config(spot_args.config_path);
            if (o_p->count()) effective.p_thres = cfg.p_thres;
            if (o_r->count()) effective.r_thres = cfg.r_thres;
            if (o_dil->count()) effective.dilation = cfg.dilation;
            if (o_lev->count()) effective.levels = cfg.levels;
            if (o_nms->count()) effective.nms_iou = cfg.nms_iou;
            if (o_topk->count()) effective.top_k = cfg.top_k;
            if (o_end->count()) effective.end_overestimate = cfg.end_overestimate;
            if (o_tol->count()) effective.count_tolerance = cfg.count_tolerance;
            if (o_sig->count()) effective.sigma_frac = cfg.sigma_frac;
            if (o_ctc->count()) effective.ctc = parse_ctc_mode(ctc_mode);
            if (o_desc->count()) {
                if (descriptor != "pcount" && descriptor != "phoc")
                    throw Error(Errc::invalid_spec, "descriptor must be pcount or phoc");
                effective.use_phoc = descriptor == "phoc";
            }
            return run_spot(spot_args, effective);
        }
        if (cmd_eval->parsed()) return run_eval(eval);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code_for(e.code());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 9;
    }
    return 0;
}
