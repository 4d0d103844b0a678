// detpost — detection post-processing toolkit CLI.
//
// Subcommands: nms (filter detections), anchors (estimate anchor boxes),
// fitness (score an anchor set), eval (mAP report), bench (variant
// comparison grid), generate (synthetic scenes).

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "detpost/detpost.hpp"

namespace fs = std::filesystem;
using namespace detpost;

namespace {

/// Deletes declared output files unless commit() ran, so a failed command
/// never leaves partial outputs behind.
class OutputGuard {
  public:
    OutputGuard() = default;
    OutputGuard(const OutputGuard&) = delete;
    OutputGuard& operator=(const OutputGuard&) = delete;

    void track_file(const fs::path& p) { files_.push_back(p); }
    void track_created_dir(const fs::path& p) { dirs_.push_back(p); }
    void commit() { armed_ = false; }

    ~OutputGuard() {
        if (!armed_) {
            return;
        }
        std::error_code ec;
        for (const fs::path& p : files_) {
            fs::remove(p, ec);
        }
        for (auto it = dirs_.rbegin(); it != dirs_.rend(); ++it) {
            if (fs::is_directory(*it, ec) && fs::is_empty(*it, ec)) {
                fs::remove(*it, ec);
            }
        }
    }

  private:
    std::vector<fs::path> files_;
    std::vector<fs::path> dirs_;
    bool armed_ = true;
};

/// Creates the directory (and parents) if needed, tracking what was created
/// so the guard can roll it back.
void ensure_directory(const fs::path& dir, OutputGuard& guard) {
    if (dir.empty() || fs::exists(dir)) {
        return;
    }
    ensure_directory(dir.parent_path(), guard);
    fs::create_directory(dir);
    guard.track_created_dir(dir);
}

/// Buckets a flat record list by image, preserving first-appearance order.
std::vector<ImageDetections> group_by_image(const std::vector<ImageDetection>& recs) {
    std::vector<ImageDetections> groups;
    std::map<std::string, std::size_t> index;
    for (const ImageDetection& r : recs) {
        auto [it, inserted] = index.try_emplace(r.image_id, groups.size());
        if (inserted) {
            groups.push_back({r.image_id, {}});
        }
        groups[it->second].second.push_back(r.det);
    }
    return groups;
}

std::vector<double> parse_iou_thresholds(const std::string& s) {
    if (detail::trim(s) == "coco") {
        return coco_iou_thresholds();
    }
    std::vector<double> out;
    for (std::string_view field : detail::split(s, ',')) {
        double v = 0.0;
        if (!detail::parse_double(field, v)) {
            throw std::invalid_argument("--iou-thresholds: bad number '" +
                                        std::string(detail::trim(field)) + "'");
        }
        out.push_back(v);
    }
    return out;
}

/// An anchors/fitness box input is either a ground-truth CSV (projected to
/// dimensions) or a plain `w,h` file; the header decides.
std::vector<BoxWH> read_dims_any(const std::string& path) {
    {
        std::ifstream probe(path);
        if (!probe) {
            throw io_error(path, "cannot open for reading");
        }
        std::string first;
        std::getline(probe, first);
        if (detail::trim(first) == detail::kGroundTruthHeader) {
            const std::vector<GroundTruth> gts = read_ground_truth(path);
            return box_dims_from_ground_truth(gts);
        }
    }
    return read_box_dims(path);
}

// ---------------------------------------------------------------- nms ----

struct NmsOpts {
    std::string input;
    std::string output;
    std::string variant = "greedy";
    std::string kind = "iou";
    double eps = 0.5;
    bool class_agnostic = false;
    std::size_t jobs = 1;
    bool kind_given = false;
};

void run_nms_cmd(const NmsOpts& o) {
    const NmsVariant variant = parse_nms_variant(o.variant);
    const OverlapKind kind = parse_overlap_kind(o.kind);
    if (variant == NmsVariant::Greedy && o.kind_given && kind != OverlapKind::IoU) {
        std::fprintf(stderr, "warning: --kind is ignored for greedy NMS (plain IoU)\n");
    }
    NmsConfig cfg;
    cfg.kind = kind;
    cfg.threshold_eps = o.eps;
    cfg.class_agnostic = o.class_agnostic;

    const std::vector<ImageDetection> records = read_detections(o.input);
    const std::vector<ImageDetections> groups = group_by_image(records);
    const std::vector<ImageNmsResult> results =
        batched_nms(groups, cfg, variant, o.jobs);

    std::vector<ImageDetection> out;
    out.reserve(records.size());
    std::size_t kept_total = 0;
    bool all_converged = true;
    for (std::size_t i = 0; i < results.size(); ++i) {
        const auto& [image_id, res] = results[i];
        for (const Detection& d : res.kept) {
            out.push_back({image_id, d});
        }
        kept_total += res.kept.size();
        all_converged = all_converged && res.converged;
        std::printf("%s: kept %zu, suppressed %zu\n", image_id.c_str(),
                    res.kept.size(), groups[i].second.size() - res.kept.size());
    }
    if (!all_converged) {
        std::fprintf(stderr,
                     "warning: cluster iteration hit the iteration bound before "
                     "reaching a fixed point on at least one image\n");
    }

    OutputGuard guard;
    ensure_directory(fs::path(o.output).parent_path(), guard);
    guard.track_file(o.output);
    write_detections(out, o.output);
    guard.commit();
    std::printf("total: kept %zu of %zu -> %s\n", kept_total, records.size(),
                o.output.c_str());
}

// ------------------------------------------------------------ anchors ----

struct AnchorsOpts {
    std::string input;
    std::string output;
    std::string method = "hc";
    std::size_t k = kDefaultAnchorCount;
    std::uint64_t seed = 0;
};

void run_anchors_cmd(const AnchorsOpts& o) {
    const AnchorMethod method = parse_anchor_method(o.method);
    const std::vector<BoxWH> dims = read_dims_any(o.input);

    AnchorSet set;
    std::vector<LinkageStep> steps;
    if (method == AnchorMethod::HC) {
        std::tie(set, steps) = hc_anchors(dims, o.k);
    } else {
        set = kmeans_anchors(dims, o.k, o.seed, method);
    }

    OutputGuard guard;
    ensure_directory(fs::path(o.output).parent_path(), guard);
    guard.track_file(o.output);
    const std::string linkage_path = o.output + ".linkage.csv";
    if (method == AnchorMethod::HC) {
        guard.track_file(linkage_path);
    }
    write_anchor_file(set, o.output);
    if (method == AnchorMethod::HC) {
        write_linkage_csv(steps, linkage_path);
    }
    guard.commit();

    const FitnessReport fit = anchor_fitness(set, dims, 0.5);
    std::printf("%zu anchors (%s) -> %s\n", set.anchors.size(),
                to_string(set.method), o.output.c_str());
    if (method == AnchorMethod::HC) {
        std::printf("linkage -> %s\n", linkage_path.c_str());
    }
    std::printf("achievable recall: %s (%zu/%zu at shape-IoU threshold %s)\n",
                detail::format_double(fit.achievable_recall).c_str(), fit.matched,
                fit.total, detail::format_double(fit.match_threshold).c_str());
}

// ------------------------------------------------------------ fitness ----

struct FitnessOpts {
    std::string anchors;
    std::string boxes;
    std::string output;
};

void run_fitness_cmd(const FitnessOpts& o) {
    const std::vector<BoxWH> anchor_dims = read_box_dims(o.anchors);
    AnchorSet set;
    set.anchors = anchor_dims;
    set.k = anchor_dims.size();
    const std::vector<BoxWH> dims = read_dims_any(o.boxes);
    const FitnessReport fit = anchor_fitness(set, dims, 0.5);

    std::ostringstream body;
    body << "achievable_recall=" << detail::format_double(fit.achievable_recall)
         << "\nmatched=" << fit.matched << "\ntotal=" << fit.total
         << "\nmatch_threshold=" << detail::format_double(fit.match_threshold)
         << '\n';
    std::fputs(body.str().c_str(), stdout);
    if (!o.output.empty()) {
        OutputGuard guard;
        ensure_directory(fs::path(o.output).parent_path(), guard);
        guard.track_file(o.output);
        std::ofstream out = detail::open_for_write(o.output);
        out << body.str();
        if (!out) {
            throw io_error(o.output, "write failed");
        }
        guard.commit();
    }
}

// --------------------------------------------------------------- eval ----

struct EvalOpts {
    std::string detections;
    std::string ground_truth;
    std::string output;
    std::string thresholds = "coco";
};

void run_eval_cmd(const EvalOpts& o) {
    const std::vector<ImageDetection> dets = read_detections(o.detections);
    const std::vector<GroundTruth> gts = read_ground_truth(o.ground_truth);
    const std::vector<double> thresholds = parse_iou_thresholds(o.thresholds);
    const EvalReport report = evaluate(dets, gts, thresholds);
    const double base_threshold =
        *std::min_element(thresholds.begin(), thresholds.end());
    const std::map<int, PRCurve> curves = pr_curves(dets, gts, base_threshold);

    OutputGuard guard;
    const fs::path dir(o.output);
    ensure_directory(dir, guard);
    const fs::path report_txt = dir / "report.txt";
    const fs::path report_json = dir / "report.json";
    guard.track_file(report_txt);
    guard.track_file(report_json);
    write_report_text(report, report_txt.string());
    write_report_json(report, report_json.string());
    for (const auto& [cls, curve] : curves) {
        const fs::path csv = dir / ("pr_class_" + std::to_string(cls) + ".csv");
        guard.track_file(csv);
        write_pr_csv(curve, csv.string());
    }
    guard.commit();

    std::fputs(report_table(report).c_str(), stdout);
    std::printf("report -> %s\n", dir.string().c_str());
}

// ----------------------------------------------------------- generate ----

struct GenerateOpts {
    std::string output;
    SceneSpec spec;
};

void run_generate_cmd(const GenerateOpts& o) {
    const auto [gts, dets] = generate_scenes(o.spec);

    OutputGuard guard;
    const fs::path dir(o.output);
    ensure_directory(dir, guard);
    const fs::path gt_path = dir / "ground_truth.csv";
    const fs::path det_path = dir / "detections.csv";
    guard.track_file(gt_path);
    guard.track_file(det_path);
    write_ground_truth(gts, gt_path.string());
    write_detections(dets, det_path.string());
    guard.commit();

    std::printf("%zu images, %zu ground truths, %zu detections -> %s\n",
                o.spec.n_images, gts.size(), dets.size(), dir.string().c_str());
}

// -------------------------------------------------------------- bench ----

struct BenchRow {
    NmsVariant variant;
    OverlapKind kind;
    double eps;
    double map50 = 0.0;
    double map50_95 = 0.0;
    double ms_per_1k = 0.0;
};

struct BenchConfig {
    std::vector<std::pair<NmsVariant, OverlapKind>> variants;
    std::vector<double> eps{0.5};
    std::string detections;
    std::string ground_truth;
    bool generate = false;
    SceneSpec spec;
    std::vector<double> iou_thresholds = coco_iou_thresholds();
    std::string output;
};

const std::set<std::string>& bench_known_keys() {
    static const std::set<std::string> keys = {
        "variants",       "eps",
        "detections",     "ground_truth",
        "generate",       "iou_thresholds",
        "output",         "n_images",
        "min_boxes",      "max_boxes",
        "overlap_level",  "class_count",
        "image_w",        "image_h",
        "box_min",        "box_max",
        "center_jitter",  "size_jitter",
        "score_base",     "jitter_weight",
        "noise_sigma",    "dupes_min",
        "dupes_max",      "spurious_per_image",
        "seed"};
    return keys;
}

std::map<std::string, std::string> read_kv_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw io_error(path, "cannot open for reading");
    }
    std::map<std::string, std::string> kv;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string_view trimmed = detail::trim(line);
        if (trimmed.empty() || trimmed.front() == '#') {
            continue;
        }
        const std::size_t eq = trimmed.find('=');
        if (eq == std::string_view::npos) {
            throw io_error(path, line_no, "expected 'key = value'");
        }
        const std::string key(detail::trim(trimmed.substr(0, eq)));
        const std::string value(detail::trim(trimmed.substr(eq + 1)));
        if (!bench_known_keys().count(key)) {
            throw io_error(path, line_no, "unknown key '" + key + "'");
        }
        if (!kv.emplace(key, value).second) {
            throw io_error(path, line_no, "duplicate key '" + key + "'");
        }
    }
    return kv;
}

double config_double(const std::map<std::string, std::string>& kv,
                     const std::string& key, double fallback,
                     const std::string& path) {
    auto it = kv.find(key);
    if (it == kv.end()) {
        return fallback;
    }
    double v = 0.0;
    if (!detail::parse_double(it->second, v)) {
        throw io_error(path, "key '" + key + "': bad number '" + it->second + "'");
    }
    return v;
}

std::size_t config_count(const std::map<std::string, std::string>& kv,
                         const std::string& key, std::size_t fallback,
                         const std::string& path) {
    auto it = kv.find(key);
    if (it == kv.end()) {
        return fallback;
    }
    long long v = 0;
    if (!detail::parse_int(it->second, v) || v < 0) {
        throw io_error(path, "key '" + key + "': bad count '" + it->second + "'");
    }
    return static_cast<std::size_t>(v);
}

BenchConfig parse_bench_config(const std::string& path) {
    const std::map<std::string, std::string> kv = read_kv_config(path);
    BenchConfig cfg;

    auto vit = kv.find("variants");
    if (vit == kv.end() || detail::trim(vit->second).empty()) {
        throw io_error(path, "key 'variants' is required (e.g. greedy:iou, wcluster:eiou)");
    }
    for (std::string_view item : detail::split(vit->second, ',')) {
        const std::vector<std::string_view> parts = detail::split(detail::trim(item), ':');
        if (parts.size() != 2) {
            throw io_error(path, "variants entries must be variant:kind, got '" +
                                     std::string(detail::trim(item)) + "'");
        }
        cfg.variants.emplace_back(
            parse_nms_variant(std::string(detail::trim(parts[0]))),
            parse_overlap_kind(std::string(detail::trim(parts[1]))));
    }

    if (auto it = kv.find("eps"); it != kv.end()) {
        cfg.eps.clear();
        for (std::string_view field : detail::split(it->second, ',')) {
            double v = 0.0;
            if (!detail::parse_double(field, v)) {
                throw io_error(path, "key 'eps': bad number '" +
                                         std::string(detail::trim(field)) + "'");
            }
            cfg.eps.push_back(v);
        }
        if (cfg.eps.empty()) {
            throw io_error(path, "key 'eps' must list at least one threshold");
        }
    }

    if (auto it = kv.find("generate"); it != kv.end()) {
        if (it->second == "true" || it->second == "1") {
            cfg.generate = true;
        } else if (it->second != "false" && it->second != "0") {
            throw io_error(path, "key 'generate' must be true or false");
        }
    }
    if (auto it = kv.find("detections"); it != kv.end()) {
        cfg.detections = it->second;
    }
    if (auto it = kv.find("ground_truth"); it != kv.end()) {
        cfg.ground_truth = it->second;
    }
    if (cfg.generate) {
        SceneSpec& s = cfg.spec;
        s.n_images = config_count(kv, "n_images", s.n_images, path);
        s.min_boxes = config_count(kv, "min_boxes", s.min_boxes, path);
        s.max_boxes = config_count(kv, "max_boxes", s.max_boxes, path);
        s.overlap_level = config_double(kv, "overlap_level", s.overlap_level, path);
        s.class_count = static_cast<int>(
            config_count(kv, "class_count",
                         static_cast<std::size_t>(s.class_count), path));
        s.image_w = config_double(kv, "image_w", s.image_w, path);
        s.image_h = config_double(kv, "image_h", s.image_h, path);
        s.box_min = config_double(kv, "box_min", s.box_min, path);
        s.box_max = config_double(kv, "box_max", s.box_max, path);
        s.center_jitter = config_double(kv, "center_jitter", s.center_jitter, path);
        s.size_jitter = config_double(kv, "size_jitter", s.size_jitter, path);
        s.score.base = config_double(kv, "score_base", s.score.base, path);
        s.score.jitter_weight =
            config_double(kv, "jitter_weight", s.score.jitter_weight, path);
        s.score.noise_sigma =
            config_double(kv, "noise_sigma", s.score.noise_sigma, path);
        s.dupes_min = config_count(kv, "dupes_min", s.dupes_min, path);
        s.dupes_max = config_count(kv, "dupes_max", s.dupes_max, path);
        s.spurious_per_image =
            config_count(kv, "spurious_per_image", s.spurious_per_image, path);
        s.seed = config_count(kv, "seed", static_cast<std::size_t>(s.seed), path);
    } else if (cfg.detections.empty() || cfg.ground_truth.empty()) {
        throw io_error(path,
                       "need either generate = true or both 'detections' and "
                       "'ground_truth' paths");
    }

    if (auto it = kv.find("iou_thresholds"); it != kv.end()) {
        cfg.iou_thresholds = parse_iou_thresholds(it->second);
    }
    if (auto it = kv.find("output"); it != kv.end()) {
        cfg.output = it->second;
    }
    return cfg;
}

struct BenchOpts {
    std::string config;
    std::string output_override;
    std::size_t jobs = 1;
};

void run_bench_cmd(const BenchOpts& o) {
    BenchConfig cfg = parse_bench_config(o.config);
    if (!o.output_override.empty()) {
        cfg.output = o.output_override;
    }
    if (cfg.output.empty()) {
        throw std::invalid_argument(
            "bench: no output path (config key 'output' or --output)");
    }

    std::vector<GroundTruth> gts;
    std::vector<ImageDetection> det_records;
    if (cfg.generate) {
        std::tie(gts, det_records) = generate_scenes(cfg.spec);
    } else {
        det_records = read_detections(cfg.detections);
        gts = read_ground_truth(cfg.ground_truth);
    }
    const std::vector<ImageDetections> groups = group_by_image(det_records);
    const std::size_t n_boxes = det_records.size();

    std::vector<BenchRow> rows;
    for (const auto& [variant, kind] : cfg.variants) {
        for (double eps : cfg.eps) {
            const std::string label = std::string(to_string(variant)) + ":" +
                                      to_string(kind) + " eps " +
                                      detail::format_double(eps);
            try {
                NmsConfig nms_cfg;
                nms_cfg.kind = kind;
                nms_cfg.threshold_eps = eps;

                std::vector<ImageNmsResult> results;
                std::vector<double> times_ms;
                for (int rep = 0; rep < 5; ++rep) {
                    const auto t0 = std::chrono::steady_clock::now();
                    std::vector<ImageNmsResult> r =
                        batched_nms(groups, nms_cfg, variant, o.jobs);
                    const auto t1 = std::chrono::steady_clock::now();
                    times_ms.push_back(
                        std::chrono::duration<double, std::milli>(t1 - t0).count());
                    if (rep == 0) {
                        results = std::move(r);
                    }
                }
                std::sort(times_ms.begin(), times_ms.end());

                std::vector<ImageDetection> filtered;
                for (const auto& [image_id, res] : results) {
                    for (const Detection& d : res.kept) {
                        filtered.push_back({image_id, d});
                    }
                }
                const EvalReport report =
                    evaluate(filtered, gts, cfg.iou_thresholds);

                BenchRow row;
                row.variant = variant;
                row.kind = kind;
                row.eps = eps;
                row.map50 = report.map50;
                row.map50_95 = report.map50_95;
                row.ms_per_1k =
                    n_boxes > 0
                        ? times_ms[2] * 1000.0 / static_cast<double>(n_boxes)
                        : 0.0;
                rows.push_back(row);
            } catch (const std::exception& e) {
                throw std::runtime_error("bench variant " + label + ": " + e.what());
            }
        }
    }

    // Timing is inherently run-dependent, so it goes to stdout only; the
    // report file carries the reproducible columns.
    OutputGuard guard;
    ensure_directory(fs::path(cfg.output).parent_path(), guard);
    guard.track_file(cfg.output);
    {
        std::ofstream out = detail::open_for_write(cfg.output);
        out << "variant,kind,eps,map50,map50_95\n";
        for (const BenchRow& r : rows) {
            out << to_string(r.variant) << ',' << to_string(r.kind) << ','
                << detail::format_double(r.eps) << ','
                << detail::format_double(r.map50) << ','
                << detail::format_double(r.map50_95) << '\n';
        }
        if (!out) {
            throw io_error(cfg.output, "write failed");
        }
    }
    guard.commit();

    std::ostringstream table;
    table << std::left << std::setw(10) << "Variant" << std::setw(6) << "Kind"
          << std::right << std::setw(7) << "Eps" << std::setw(10) << "mAP@0.5"
          << std::setw(14) << "mAP@0.5:0.95" << std::setw(12) << "ms/1k boxes"
          << '\n';
    table << std::fixed;
    for (const BenchRow& r : rows) {
        table << std::left << std::setw(10) << to_string(r.variant) << std::setw(6)
              << to_string(r.kind) << std::right << std::setw(7)
              << std::setprecision(2) << r.eps << std::setw(10)
              << std::setprecision(4) << r.map50 << std::setw(14) << r.map50_95
              << std::setw(12) << std::setprecision(3) << r.ms_per_1k << '\n';
    }
    std::fputs(table.str().c_str(), stdout);
    std::printf("report -> %s\n", cfg.output.c_str());
}

}  // namespace

int run_app(int argc, char** argv) {
    CLI::App app{"Detection post-processing toolkit: NMS variants, anchor "
                 "estimation, anchor fitness, mAP evaluation, benchmarking, "
                 "and synthetic scene generation"};
    app.require_subcommand(1);

    NmsOpts nms_opts;
    CLI::App* nms = app.add_subcommand("nms", "Filter a detection file with an NMS variant");
    nms->add_option("input", nms_opts.input, "Detection CSV to filter")->required();
    nms->add_option("--variant", nms_opts.variant, "NMS variant: greedy|cluster|wcluster")
        ->capture_default_str();
    CLI::Option* kind_opt =
        nms->add_option("--kind", nms_opts.kind, "Overlap kind: iou|diou|ciou|eiou")
            ->capture_default_str();
    nms->add_option("--eps", nms_opts.eps, "Suppression threshold")->capture_default_str();
    nms->add_flag("--class-agnostic", nms_opts.class_agnostic,
                  "Suppress across classes instead of per class");
    nms->add_option("--jobs", nms_opts.jobs, "Images processed concurrently")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    nms->add_option("--output", nms_opts.output, "Filtered detection CSV to write")
        ->required();
    nms->callback([&nms_opts, kind_opt] {
        nms_opts.kind_given = kind_opt->count() > 0;
        run_nms_cmd(nms_opts);
    });

    AnchorsOpts anchors_opts;
    CLI::App* anchors = app.add_subcommand(
        "anchors", "Estimate anchor boxes from ground-truth dimensions");
    anchors->add_option("input", anchors_opts.input,
                        "Ground-truth CSV or plain w,h file")->required();
    anchors->add_option("--method", anchors_opts.method,
                        "Clustering method: hc|kmeans|kmeanspp")
        ->capture_default_str();
    anchors->add_option("--k", anchors_opts.k, "Number of anchors")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    anchors->add_option("--seed", anchors_opts.seed, "RNG seed (kmeans/kmeanspp)")
        ->capture_default_str();
    anchors->add_option("--output", anchors_opts.output,
                        "Anchor file to write (hc adds <output>.linkage.csv)")
        ->required();
    anchors->callback([&anchors_opts] { run_anchors_cmd(anchors_opts); });

    FitnessOpts fitness_opts;
    CLI::App* fitness = app.add_subcommand(
        "fitness", "Score an anchor set against ground-truth dimensions");
    fitness->add_option("anchors", fitness_opts.anchors, "Anchor file (w,h lines)")
        ->required();
    fitness->add_option("boxes", fitness_opts.boxes,
                        "Ground-truth CSV or plain w,h file")->required();
    fitness->add_option("--output", fitness_opts.output,
                        "Optional file for the fitness summary");
    fitness->callback([&fitness_opts] { run_fitness_cmd(fitness_opts); });

    EvalOpts eval_opts;
    CLI::App* eval = app.add_subcommand("eval", "Evaluate detections against ground truth");
    eval->add_option("detections", eval_opts.detections, "Detection CSV")->required();
    eval->add_option("ground_truth", eval_opts.ground_truth, "Ground-truth CSV")
        ->required();
    eval->add_option("--iou-thresholds", eval_opts.thresholds,
                     "Comma-separated IoU thresholds, or 'coco' for 0.50:0.05:0.95")
        ->capture_default_str();
    eval->add_option("--output", eval_opts.output,
                     "Directory for report.txt, report.json and PR CSVs")
        ->required();
    eval->callback([&eval_opts] { run_eval_cmd(eval_opts); });

    BenchOpts bench_opts;
    CLI::App* bench = app.add_subcommand(
        "bench", "Run an NMS variant comparison grid from a config file");
    bench->add_option("config", bench_opts.config, "Flat key=value grid config")
        ->required();
    bench->add_option("--jobs", bench_opts.jobs, "Images processed concurrently")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    bench->add_option("--output", bench_opts.output_override,
                      "Report CSV (overrides the config 'output' key)");
    bench->callback([&bench_opts] { run_bench_cmd(bench_opts); });

    GenerateOpts gen_opts;
    CLI::App* gen = app.add_subcommand(
        "generate", "Write a synthetic ground-truth/detection scene pair");
    gen->add_option("--n-images", gen_opts.spec.n_images, "Number of images")
        ->capture_default_str();
    gen->add_option("--min-boxes", gen_opts.spec.min_boxes, "Min boxes per image")
        ->capture_default_str();
    gen->add_option("--max-boxes", gen_opts.spec.max_boxes, "Max boxes per image")
        ->capture_default_str();
    gen->add_option("--overlap-level", gen_opts.spec.overlap_level,
                    "Probability a box is planted overlapping another")
        ->capture_default_str();
    gen->add_option("--class-count", gen_opts.spec.class_count, "Number of classes")
        ->capture_default_str();
    gen->add_option("--image-w", gen_opts.spec.image_w, "Image width")
        ->capture_default_str();
    gen->add_option("--image-h", gen_opts.spec.image_h, "Image height")
        ->capture_default_str();
    gen->add_option("--box-min", gen_opts.spec.box_min, "Min box side")
        ->capture_default_str();
    gen->add_option("--box-max", gen_opts.spec.box_max, "Max box side")
        ->capture_default_str();
    gen->add_option("--center-jitter", gen_opts.spec.center_jitter,
                    "Detection center jitter sigma (px)")
        ->capture_default_str();
    gen->add_option("--size-jitter", gen_opts.spec.size_jitter,
                    "Detection size jitter sigma (px)")
        ->capture_default_str();
    gen->add_option("--score-base", gen_opts.spec.score.base, "Base detection score")
        ->capture_default_str();
    gen->add_option("--jitter-weight", gen_opts.spec.score.jitter_weight,
                    "Score penalty per unit relative jitter")
        ->capture_default_str();
    gen->add_option("--noise-sigma", gen_opts.spec.score.noise_sigma,
                    "Score noise sigma")
        ->capture_default_str();
    gen->add_option("--dupes-min", gen_opts.spec.dupes_min,
                    "Min detections per ground truth")
        ->capture_default_str();
    gen->add_option("--dupes-max", gen_opts.spec.dupes_max,
                    "Max detections per ground truth")
        ->capture_default_str();
    gen->add_option("--spurious", gen_opts.spec.spurious_per_image,
                    "Spurious false positives per image")
        ->capture_default_str();
    gen->add_option("--seed", gen_opts.spec.seed, "RNG seed")->capture_default_str();
    gen->add_option("--output", gen_opts.output,
                    "Directory for ground_truth.csv and detections.csv")
        ->required();
    gen->callback([&gen_opts] { run_generate_cmd(gen_opts); });

    CLI11_PARSE(app, argc, argv);
    return 0;
}

int main(int argc, char** argv) {
    try {
        return run_app(argc, argv);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
