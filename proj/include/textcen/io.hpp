#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>

#include "json.hpp"
#include "textcen/attention.hpp"
#include "textcen/metrics.hpp"
#include "textcen/simulator.hpp"

namespace textcen {

using Json = nlohmann::json;

/// "x0,y0,x1,y1" or a preset name ("golden", "center").
Region parse_region(std::string_view spec);

/// Strict scene JSON: unknown keys and invalid values are rejected with the
/// offending line number.
Scene parse_scene(std::string_view text, std::string_view source_name = "scene");
Scene load_scene(const std::filesystem::path& path);
Json scene_to_json(const Scene& scene);

/// Line (1-based) of every value in a JSON document, keyed by JSON pointer.
std::map<std::string, int> json_value_lines(std::string_view text);

/// Rounds to the 9 significant digits written to reports.
double round_sig9(double v);
std::string format_sig9(double v);

/// Sorted keys, two-space indent, floats as %.9g, trailing newline.
std::string canonical_dump(const Json& doc);

Json params_to_json(const GuidanceParams& params);
Json metrics_to_json(const MetricsReport& m);
MetricsReport metrics_from_json(const Json& doc);

Json report_to_json(const GuidanceReport& report, const Scene& scene, const Region& region,
                    const GuidanceParams& params, const std::vector<std::string>& renders);

/// Metrics of both trajectories, read back from a report document.
struct RunSummary {
  MetricsReport guided;
  MetricsReport unguided;
  int steps = 0;
};

Json parse_report(std::string_view text);
RunSummary summary_from_report(const Json& doc);

std::string metrics_csv(const GuidanceReport& report);
inline constexpr std::string_view kMetricsCsvHeader =
    "step,conflicts,max_displacement,loss_total,loss_main,loss_norm,mean_attn_in_R";

/// 8-bit binary PGM, max value mapped to 255 with round-half-up.
std::string encode_pgm(const AttentionMap& map);
/// Values scaled back to [0,1] by maxval.
AttentionMap decode_pgm(std::string_view bytes);

void write_render(const AttentionMap& map, const std::filesystem::path& path);
AttentionMap read_pgm(const std::filesystem::path& path);

/// Writes to a sibling temp file, then renames over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);
std::string read_file(const std::filesystem::path& path);

}  // namespace textcen
