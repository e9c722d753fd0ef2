#pragma once
// File formats around the engine: JSON for configs, ground truth, reports
// and run manifests; TSV for detection results. JSON goes through
// nlohmann::json; the TSV writer pins its float formatting so identical
// runs produce identical bytes.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cspot/metrics.hpp"
#include "cspot/spot_config.hpp"
#include "cspot/synth.hpp"
#include "cspot/types.hpp"

namespace cspot {

constexpr const char* kToolVersion = "0.1.0";

namespace detail {

inline nlohmann::json load_json_file(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw Error(Errc::io_error, "cannot open " + path.string());
    try {
        return nlohmann::json::parse(f);
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::invalid_spec, path.string() + ": " + e.what());
    }
}

inline void save_json_file(const nlohmann::json& j, const std::filesystem::path& path) {
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw Error(Errc::io_error, "cannot open " + path.string() + " for writing");
    f << j.dump(2) << "\n";
}

template <typename T>
void maybe_get(const nlohmann::json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

inline void maybe_get_range(const nlohmann::json& j, const char* key, IntRange& out) {
    if (!j.contains(key)) return;
    const auto& v = j.at(key);
    if (!v.is_array() || v.size() != 2)
        throw Error(Errc::invalid_spec, std::string(key) + " must be [lo, hi]");
    out.lo = v[0].get<int>();
    out.hi = v[1].get<int>();
}

}  // namespace detail

// ---- SpotConfig ----

inline nlohmann::json to_json(const SpotConfig& cfg) {
    return {
        {"p_thres", cfg.p_thres},
        {"r_thres", cfg.r_thres},
        {"dilation", cfg.dilation},
        {"levels", cfg.levels},
        {"nms_iou", cfg.nms_iou},
        {"top_k", cfg.top_k},
        {"end_overestimate", cfg.end_overestimate},
        {"count_tolerance", cfg.count_tolerance},
        {"sigma_frac", cfg.sigma_frac},
        {"ctc", ctc_mode_name(cfg.ctc)},
        {"descriptor", cfg.use_phoc ? "phoc" : "pcount"},
    };
}

inline SpotConfig spot_config_from_json(const nlohmann::json& j) {
    SpotConfig cfg;
    try {
        detail::maybe_get(j, "p_thres", cfg.p_thres);
        detail::maybe_get(j, "r_thres", cfg.r_thres);
        detail::maybe_get(j, "dilation", cfg.dilation);
        detail::maybe_get(j, "levels", cfg.levels);
        detail::maybe_get(j, "nms_iou", cfg.nms_iou);
        detail::maybe_get(j, "top_k", cfg.top_k);
        detail::maybe_get(j, "end_overestimate", cfg.end_overestimate);
        detail::maybe_get(j, "count_tolerance", cfg.count_tolerance);
        detail::maybe_get(j, "sigma_frac", cfg.sigma_frac);
        if (j.contains("ctc")) cfg.ctc = parse_ctc_mode(j.at("ctc").get<std::string>());
        if (j.contains("descriptor")) {
            const std::string d = j.at("descriptor").get<std::string>();
            if (d != "pcount" && d != "phoc")
                throw Error(Errc::invalid_spec, "descriptor must be pcount or phoc");
            cfg.use_phoc = d == "phoc";
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::invalid_spec, std::string("config: ") + e.what());
    }
    cfg.validate();
    return cfg;
}

inline SpotConfig load_spot_config(const std::filesystem::path& path) {
    return spot_config_from_json(detail::load_json_file(path));
}

// ---- SynthSpec ----

inline nlohmann::json to_json(const SynthSpec& spec) {
    nlohmann::json pairs = nlohmann::json::array();
    for (const auto& [a, b] : spec.distractor_pairs) pairs.push_back({a, b});
    return {
        {"seed", spec.seed},
        {"pages", spec.pages},
        {"page_height_cells", spec.page_height_cells},
        {"page_width_cells", spec.page_width_cells},
        {"lines_per_page", {spec.lines_per_page.lo, spec.lines_per_page.hi}},
        {"words_per_line", {spec.words_per_line.lo, spec.words_per_line.hi}},
        {"lexicon", spec.lexicon},
        {"char_width_cells", {spec.char_width_cells.lo, spec.char_width_cells.hi}},
        {"char_height_cells", {spec.char_height_cells.lo, spec.char_height_cells.hi}},
        {"noise", spec.noise},
        {"spacing", {spec.spacing.lo, spec.spacing.hi}},
        {"downscale", spec.downscale},
        {"distractor_fraction", spec.distractor_fraction},
        {"distractor_pairs", pairs},
    };
}

inline SynthSpec synth_spec_from_json(const nlohmann::json& j) {
    SynthSpec spec;
    try {
        detail::maybe_get(j, "seed", spec.seed);
        detail::maybe_get(j, "pages", spec.pages);
        detail::maybe_get(j, "page_height_cells", spec.page_height_cells);
        detail::maybe_get(j, "page_width_cells", spec.page_width_cells);
        detail::maybe_get_range(j, "lines_per_page", spec.lines_per_page);
        detail::maybe_get_range(j, "words_per_line", spec.words_per_line);
        detail::maybe_get(j, "lexicon", spec.lexicon);
        detail::maybe_get_range(j, "char_width_cells", spec.char_width_cells);
        detail::maybe_get_range(j, "char_height_cells", spec.char_height_cells);
        detail::maybe_get(j, "noise", spec.noise);
        detail::maybe_get_range(j, "spacing", spec.spacing);
        detail::maybe_get(j, "downscale", spec.downscale);
        detail::maybe_get(j, "distractor_fraction", spec.distractor_fraction);
        if (j.contains("distractor_pairs")) {
            spec.distractor_pairs.clear();
            for (const auto& p : j.at("distractor_pairs")) {
                if (!p.is_array() || p.size() != 2)
                    throw Error(Errc::invalid_spec, "distractor_pairs entries must be [a, b]");
                spec.distractor_pairs.emplace_back(p[0].get<std::string>(),
                                                   p[1].get<std::string>());
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::invalid_spec, std::string("synth spec: ") + e.what());
    }
    spec.validate();
    return spec;
}

inline SynthSpec load_synth_spec(const std::filesystem::path& path) {
    return synth_spec_from_json(detail::load_json_file(path));
}

// ---- ground truth ----

inline nlohmann::json to_json(const std::vector<GtWord>& gts) {
    nlohmann::json arr = nlohmann::json::array();
    for (const GtWord& w : gts)
        arr.push_back({{"page_id", w.page_id},
                       {"text", w.text},
                       {"box", {w.box.col_start, w.box.row_start, w.box.col_end, w.box.row_end}}});
    return arr;
}

inline std::vector<GtWord> gt_words_from_json(const nlohmann::json& j) {
    std::vector<GtWord> out;
    try {
        for (const auto& e : j) {
            GtWord w;
            w.page_id = e.at("page_id").get<std::string>();
            w.text = e.at("text").get<std::string>();
            const auto& b = e.at("box");
            if (!b.is_array() || b.size() != 4)
                throw Error(Errc::invalid_spec, "gt box must be [x0, y0, x1, y1]");
            w.box = Box{b[1].get<int>(), b[0].get<int>(), b[3].get<int>(), b[2].get<int>()};
            if (!w.box.valid() || w.text.empty())
                throw Error(Errc::invariant_violation, "invalid gt entry for " + w.page_id);
            out.push_back(std::move(w));
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::invalid_spec, std::string("gt json: ") + e.what());
    }
    return out;
}

inline std::vector<GtWord> load_gt_words(const std::filesystem::path& path) {
    return gt_words_from_json(detail::load_json_file(path));
}

inline void save_gt_words(const std::vector<GtWord>& gts, const std::filesystem::path& path) {
    detail::save_json_file(to_json(gts), path);
}

// ---- results TSV ----

struct ResultRow {
    std::string query;  // normalized form
    std::string page_id;
    Box box;  // pixel space
    double score = 0.0;
    std::string stage;
};

constexpr const char* kResultsHeader = "query\tpage_id\tx0\ty0\tx1\ty1\tscore\tstage";

inline void write_results_tsv(const std::vector<ResultRow>& rows,
                              const std::filesystem::path& path) {
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw Error(Errc::io_error, "cannot open " + path.string() + " for writing");
    f << kResultsHeader << "\n";
    char score_buf[32];
    for (const ResultRow& r : rows) {
        std::snprintf(score_buf, sizeof score_buf, "%.9f", r.score);
        f << r.query << '\t' << r.page_id << '\t' << r.box.col_start << '\t' << r.box.row_start
          << '\t' << r.box.col_end << '\t' << r.box.row_end << '\t' << score_buf << '\t'
          << r.stage << "\n";
    }
    if (!f) throw Error(Errc::io_error, "short write to " + path.string());
}

inline std::vector<ResultRow> read_results_tsv(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw Error(Errc::io_error, "cannot open " + path.string());
    std::string line;
    if (!std::getline(f, line))
        throw Error(Errc::invalid_spec, path.string() + ": missing header");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kResultsHeader)
        throw Error(Errc::invalid_spec, path.string() + ": unexpected header");
    std::vector<ResultRow> rows;
    size_t lineno = 1;
    while (std::getline(f, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::istringstream ss(line);
        ResultRow r;
        std::string x0, y0, x1, y1, score;
        if (!std::getline(ss, r.query, '\t') || !std::getline(ss, r.page_id, '\t') ||
            !std::getline(ss, x0, '\t') || !std::getline(ss, y0, '\t') ||
            !std::getline(ss, x1, '\t') || !std::getline(ss, y1, '\t') ||
            !std::getline(ss, score, '\t') || !std::getline(ss, r.stage))
            throw Error(Errc::invalid_spec,
                        path.string() + ":" + std::to_string(lineno) + ": malformed row");
        try {
            r.box = Box{std::stoi(y0), std::stoi(x0), std::stoi(y1), std::stoi(x1)};
            r.score = std::stod(score);
        } catch (const std::exception&) {
            throw Error(Errc::invalid_spec,
                        path.string() + ":" + std::to_string(lineno) + ": bad number");
        }
        rows.push_back(std::move(r));
    }
    return rows;
}

// ---- queries file: one query per line ----

inline std::vector<std::string> load_queries(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw Error(Errc::io_error, "cannot open " + path.string());
    std::vector<std::string> out;
    std::string line;
    while (std::getline(f, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!line.empty()) out.push_back(line);
    }
    return out;
}

// ---- evaluation report ----

inline nlohmann::json to_json(const EvalReport& report) {
    nlohmann::json per_query = nlohmann::json::object();
    for (const auto& [q, ap] : report.per_query_ap) per_query[q] = ap;
    return {
        {"metric", overlap_metric_name(report.metric)},
        {"threshold", report.threshold},
        {"map", report.map_value},
        {"per_query_ap", per_query},
        {"skipped_queries", report.skipped_queries},
    };
}

inline void save_eval_report(const EvalReport& report, const std::filesystem::path& path) {
    detail::save_json_file(to_json(report), path);
}

// ---- run manifest, written alongside every results file ----

struct RunManifest {
    SpotConfig config;
    std::vector<std::string> corpus_paths;
    std::vector<std::string> queries;
    std::string output_path;
};

inline nlohmann::json to_json(const RunManifest& m) {
    return {
        {"tool_version", kToolVersion},
        {"config", to_json(m.config)},
        {"corpus", m.corpus_paths},
        {"queries", m.queries},
        {"output", m.output_path},
    };
}

inline void save_manifest(const RunManifest& m, const std::filesystem::path& path) {
    detail::save_json_file(to_json(m), path);
}

}  // namespace cspot
