#ifndef DETPOST_DATASET_IO_HPP
#define DETPOST_DATASET_IO_HPP

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "detpost/anchors.hpp"
#include "detpost/detail/text.hpp"
#include "detpost/evaluation.hpp"
#include "detpost/geometry.hpp"
#include "detpost/nms.hpp"

namespace detpost {

/// File-level failure carrying the path and, when known, the line number.
class io_error : public std::runtime_error {
  public:
    io_error(const std::string& path, const std::string& message)
        : std::runtime_error(path + ": " + message) {}
    io_error(const std::string& path, std::size_t line, const std::string& message)
        : std::runtime_error(path + ":" + std::to_string(line) + ": " + message) {}
};

namespace detail {

constexpr std::string_view kDetectionHeader = "image_id,class_id,x1,y1,x2,y2,score";
constexpr std::string_view kGroundTruthHeader = "image_id,class_id,x1,y1,x2,y2";

inline std::ifstream open_for_read(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw io_error(path, "cannot open for reading");
    }
    return in;
}

inline std::ofstream open_for_write(const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        throw io_error(path, "cannot open for writing");
    }
    return out;
}

inline std::string parse_image_id(std::string_view field, const std::string& path,
                                  std::size_t line) {
    const std::string_view id = trim(field);
    if (id.empty()) {
        throw io_error(path, line, "empty image_id");
    }
    return std::string(id);
}

inline int parse_class_id(std::string_view field, const std::string& path,
                          std::size_t line) {
    long long v = 0;
    if (!parse_int(field, v) || v < std::numeric_limits<int>::min() ||
        v > std::numeric_limits<int>::max()) {
        throw io_error(path, line, "malformed class_id '" + std::string(trim(field)) + "'");
    }
    return static_cast<int>(v);
}

inline double parse_coord(std::string_view field, const std::string& path,
                          std::size_t line) {
    double v = 0.0;
    if (!parse_double(field, v)) {
        throw io_error(path, line, "malformed number '" + std::string(trim(field)) + "'");
    }
    return v;
}

inline Box parse_box(std::span<const std::string_view> fields, const std::string& path,
                     std::size_t line) {
    const double x1 = parse_coord(fields[0], path, line);
    const double y1 = parse_coord(fields[1], path, line);
    const double x2 = parse_coord(fields[2], path, line);
    const double y2 = parse_coord(fields[3], path, line);
    try {
        return Box(x1, y1, x2, y2);
    } catch (const std::invalid_argument& e) {
        throw io_error(path, line, e.what());
    }
}

inline double parse_score(std::string_view field, const std::string& path,
                          std::size_t line) {
    const double s = parse_coord(field, path, line);
    if (!(s >= 0.0 && s <= 1.0)) {
        throw io_error(path, line, "score " + format_double(s) + " outside [0,1]");
    }
    return s;
}

/// Writers refuse record fields that could not survive a round trip.
inline void check_writable_image_id(const std::string& id) {
    if (id.empty() || id.find(',') != std::string::npos ||
        id.find('\n') != std::string::npos || id.find('\r') != std::string::npos) {
        throw std::invalid_argument("image_id '" + id + "' is not CSV-safe");
    }
}

}  // namespace detail

inline std::vector<ImageDetection> read_detections(const std::string& path) {
    std::ifstream in = detail::open_for_read(path);
    std::string line;
    if (!std::getline(in, line) ||
        detail::trim(line) != detail::kDetectionHeader) {
        throw io_error(path, 1,
                       "expected header '" + std::string(detail::kDetectionHeader) + "'");
    }
    std::vector<ImageDetection> records;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (detail::trim(line).empty()) {
            continue;
        }
        const std::vector<std::string_view> fields = detail::split(line, ',');
        if (fields.size() != 7) {
            throw io_error(path, line_no,
                           "expected 7 fields, got " + std::to_string(fields.size()));
        }
        ImageDetection rec;
        rec.image_id = detail::parse_image_id(fields[0], path, line_no);
        rec.det.class_id = detail::parse_class_id(fields[1], path, line_no);
        rec.det.box = detail::parse_box({fields.data() + 2, 4}, path, line_no);
        rec.det.score = detail::parse_score(fields[6], path, line_no);
        records.push_back(std::move(rec));
    }
    return records;
}

inline void write_detections(std::span<const ImageDetection> records,
                             const std::string& path) {
    std::ofstream out = detail::open_for_write(path);
    out << detail::kDetectionHeader << '\n';
    for (const ImageDetection& rec : records) {
        detail::check_writable_image_id(rec.image_id);
        out << rec.image_id << ',' << rec.det.class_id << ','
            << detail::format_double(rec.det.box.x1) << ','
            << detail::format_double(rec.det.box.y1) << ','
            << detail::format_double(rec.det.box.x2) << ','
            << detail::format_double(rec.det.box.y2) << ','
            << detail::format_double(rec.det.score) << '\n';
    }
    if (!out) {
        throw io_error(path, "write failed");
    }
}

inline std::vector<GroundTruth> read_ground_truth(const std::string& path) {
    std::ifstream in = detail::open_for_read(path);
    std::string line;
    if (!std::getline(in, line) ||
        detail::trim(line) != detail::kGroundTruthHeader) {
        throw io_error(path, 1,
                       "expected header '" + std::string(detail::kGroundTruthHeader) + "'");
    }
    std::vector<GroundTruth> records;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (detail::trim(line).empty()) {
            continue;
        }
        const std::vector<std::string_view> fields = detail::split(line, ',');
        if (fields.size() != 6) {
            throw io_error(path, line_no,
                           "expected 6 fields, got " + std::to_string(fields.size()));
        }
        GroundTruth rec;
        rec.image_id = detail::parse_image_id(fields[0], path, line_no);
        rec.class_id = detail::parse_class_id(fields[1], path, line_no);
        rec.box = detail::parse_box({fields.data() + 2, 4}, path, line_no);
        records.push_back(std::move(rec));
    }
    return records;
}

inline void write_ground_truth(std::span<const GroundTruth> records,
                               const std::string& path) {
    std::ofstream out = detail::open_for_write(path);
    out << detail::kGroundTruthHeader << '\n';
    for (const GroundTruth& rec : records) {
        detail::check_writable_image_id(rec.image_id);
        out << rec.image_id << ',' << rec.class_id << ','
            << detail::format_double(rec.box.x1) << ','
            << detail::format_double(rec.box.y1) << ','
            << detail::format_double(rec.box.x2) << ','
            << detail::format_double(rec.box.y2) << '\n';
    }
    if (!out) {
        throw io_error(path, "write failed");
    }
}

/// Reads one `w,h` pair per line (the anchor-set format).
inline std::vector<BoxWH> read_box_dims(const std::string& path) {
    std::ifstream in = detail::open_for_read(path);
    std::vector<BoxWH> dims;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (detail::trim(line).empty()) {
            continue;
        }
        const std::vector<std::string_view> fields = detail::split(line, ',');
        if (fields.size() != 2) {
            throw io_error(path, line_no,
                           "expected 'w,h', got " + std::to_string(fields.size()) +
                               " fields");
        }
        const double w = detail::parse_coord(fields[0], path, line_no);
        const double h = detail::parse_coord(fields[1], path, line_no);
        try {
            dims.emplace_back(w, h);
        } catch (const std::invalid_argument& e) {
            throw io_error(path, line_no, e.what());
        }
    }
    return dims;
}

/// Projects ground-truth boxes onto their (width, height); degenerate boxes
/// are rejected because a zero dimension cannot seed an anchor.
inline std::vector<BoxWH> box_dims_from_ground_truth(std::span<const GroundTruth> gts) {
    std::vector<BoxWH> dims;
    dims.reserve(gts.size());
    for (std::size_t i = 0; i < gts.size(); ++i) {
        const double w = gts[i].box.width();
        const double h = gts[i].box.height();
        if (!(w > 0.0) || !(h > 0.0)) {
            throw std::invalid_argument("ground truth " + std::to_string(i) +
                                        " has zero width or height");
        }
        dims.emplace_back(w, h);
    }
    return dims;
}

// --- COCO-style structured-text converters -------------------------------

namespace detail {

inline nlohmann::json parse_json_file(const std::string& path) {
    std::ifstream in = open_for_read(path);
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw io_error(path, e.what());
    }
}

inline std::string json_image_id(const nlohmann::json& v, const std::string& path) {
    if (v.is_string()) {
        return v.get<std::string>();
    }
    if (v.is_number_integer()) {
        return std::to_string(v.get<long long>());
    }
    throw io_error(path, "image_id must be a string or integer");
}

inline Box json_bbox(const nlohmann::json& v, const std::string& path) {
    if (!v.is_array() || v.size() != 4 || !v[0].is_number() || !v[1].is_number() ||
        !v[2].is_number() || !v[3].is_number()) {
        throw io_error(path, "bbox must be [x,y,width,height]");
    }
    const double x = v[0].get<double>();
    const double y = v[1].get<double>();
    const double w = v[2].get<double>();
    const double h = v[3].get<double>();
    try {
        return Box(x, y, x + w, y + h);
    } catch (const std::invalid_argument& e) {
        throw io_error(path, std::string("bbox: ") + e.what());
    }
}

}  // namespace detail

/// Converts a COCO-style result file — a top-level array of
/// {image_id, category_id, bbox:[x,y,w,h], score} records.
inline std::vector<ImageDetection> read_coco_detections(const std::string& path) {
    const nlohmann::json root = detail::parse_json_file(path);
    if (!root.is_array()) {
        throw io_error(path, "expected a top-level array of detection records");
    }
    std::vector<ImageDetection> records;
    records.reserve(root.size());
    for (const nlohmann::json& rec : root) {
        if (!rec.is_object() || !rec.contains("image_id") ||
            !rec.contains("category_id") || !rec.contains("bbox") ||
            !rec.contains("score")) {
            throw io_error(path,
                           "each record needs image_id, category_id, bbox, score");
        }
        ImageDetection d;
        d.image_id = detail::json_image_id(rec["image_id"], path);
        d.det.class_id = rec["category_id"].get<int>();
        d.det.box = detail::json_bbox(rec["bbox"], path);
        d.det.score = rec["score"].get<double>();
        if (!(d.det.score >= 0.0 && d.det.score <= 1.0)) {
            throw io_error(path, "score outside [0,1]");
        }
        records.push_back(std::move(d));
    }
    return records;
}

/// Converts a COCO-style annotation file — a top-level object whose
/// "annotations" array holds {image_id, category_id, bbox:[x,y,w,h]}.
inline std::vector<GroundTruth> read_coco_ground_truth(const std::string& path) {
    const nlohmann::json root = detail::parse_json_file(path);
    if (!root.is_object() || !root.contains("annotations") ||
        !root["annotations"].is_array()) {
        throw io_error(path,
                       "expected a top-level object with an 'annotations' array");
    }
    std::vector<GroundTruth> records;
    records.reserve(root["annotations"].size());
    for (const nlohmann::json& rec : root["annotations"]) {
        if (!rec.is_object() || !rec.contains("image_id") ||
            !rec.contains("category_id") || !rec.contains("bbox")) {
            throw io_error(path,
                           "each annotation needs image_id, category_id, bbox");
        }
        GroundTruth g;
        g.image_id = detail::json_image_id(rec["image_id"], path);
        g.class_id = rec["category_id"].get<int>();
        g.box = detail::json_bbox(rec["bbox"], path);
        records.push_back(std::move(g));
    }
    return records;
}

/// SIXray-style dataset loader. Images are never read; the expected layout
/// is a directory holding `annotations.json` in the COCO-style annotation
/// format, which this defers to read_coco_ground_truth.
inline std::vector<GroundTruth> read_sixray_annotations(const std::string& dir) {
    const std::filesystem::path file =
        std::filesystem::path(dir) / "annotations.json";
    if (!std::filesystem::exists(file)) {
        throw io_error(dir,
                       "expected layout: <dir>/annotations.json — a COCO-style "
                       "object with an 'annotations' array of {image_id, "
                       "category_id, bbox} records (images are not read)");
    }
    return read_coco_ground_truth(file.string());
}

// --- Report serialization -------------------------------------------------

inline void write_pr_csv(const PRCurve& curve, const std::string& path) {
    std::ofstream out = detail::open_for_write(path);
    out << "recall,precision\n";
    for (const auto& [recall, precision] : curve.points) {
        out << detail::format_double(recall) << ','
            << detail::format_double(precision) << '\n';
    }
    if (!out) {
        throw io_error(path, "write failed");
    }
}

/// Human-readable summary: one row per class plus the Overall mean row.
inline std::string report_table(const EvalReport& report) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(4);
    os << std::left << std::setw(10) << "Class" << std::right << std::setw(11)
       << "Precision" << std::setw(11) << "Recall" << std::setw(11) << "AP"
       << std::setw(11) << "AP 50-95" << '\n';
    double p_sum = 0.0;
    double r_sum = 0.0;
    for (const auto& [cls, cm] : report.per_class) {
        p_sum += cm.precision;
        r_sum += cm.recall;
    }
    const double n = report.per_class.empty()
                         ? 1.0
                         : static_cast<double>(report.per_class.size());
    os << std::left << std::setw(10) << "Overall" << std::right << std::setw(11)
       << p_sum / n << std::setw(11) << r_sum / n << std::setw(11) << report.map50
       << std::setw(11) << report.map50_95 << '\n';
    for (const auto& [cls, cm] : report.per_class) {
        os << std::left << std::setw(10) << cls << std::right << std::setw(11)
           << cm.precision << std::setw(11) << cm.recall << std::setw(11) << cm.ap50
           << std::setw(11) << cm.ap50_95 << '\n';
    }
    return os.str();
}

inline void write_report_text(const EvalReport& report, const std::string& path) {
    std::ofstream out = detail::open_for_write(path);
    out << report_table(report);
    if (!out) {
        throw io_error(path, "write failed");
    }
}

/// Machine-readable counterpart of report_table.
inline void write_report_json(const EvalReport& report, const std::string& path) {
    nlohmann::json doc;
    doc["map50"] = report.map50;
    doc["map50_95"] = report.map50_95;
    nlohmann::json classes = nlohmann::json::array();
    for (const auto& [cls, cm] : report.per_class) {
        classes.push_back({{"class_id", cls},
                           {"ap50", cm.ap50},
                           {"ap50_95", cm.ap50_95},
                           {"precision", cm.precision},
                           {"recall", cm.recall}});
    }
    doc["classes"] = std::move(classes);
    std::ofstream out = detail::open_for_write(path);
    out << doc.dump(2) << '\n';
    if (!out) {
        throw io_error(path, "write failed");
    }
}

}  // namespace detpost

#endif  // DETPOST_DATASET_IO_HPP
