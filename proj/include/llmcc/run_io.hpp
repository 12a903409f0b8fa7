#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "llmcc/comparison.hpp"
#include "llmcc/config.hpp"
#include "llmcc/simulator.hpp"

namespace llmcc {

// Fixed file names inside a run directory.
namespace run_files {
inline constexpr std::string_view kTrace = "trace.csv";
inline constexpr std::string_view kPerSecond = "per_second.csv";
inline constexpr std::string_view kSummary = "summary.txt";
inline constexpr std::string_view kControllerLog = "controller_log.csv";
inline constexpr std::string_view kEffectiveConfig = "effective_config";
inline constexpr std::string_view kRequests = "requests.csv";
}  // namespace run_files

inline constexpr std::string_view kPerSecondHeader =
    "second,rps_in,queue_depth,avg_queueing_ms,avg_ttft_ms,avg_tbt_ms,avg_e2e_ms,active_r,completions,energy_j";
inline constexpr std::string_view kControllerLogHeader = "second,ma_tbt_ms,r,active";
inline constexpr std::string_view kRequestsHeader =
    "id,arrival_ms,class,input_words,unbounded_output_words,realized_output_words,target_words,r_applied,"
    "queueing_ms,ttft_ms,e2e_ms";

// Throw IoError with the path on failure.
std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view content);

// Floating cells use the shortest round-trip form so reading back is exact.
std::string format_per_second(std::span<const SecondAggregate> rows);
std::vector<SecondAggregate> parse_per_second(std::string_view text);  // in_flight is not stored

std::string format_controller_log(std::span<const ControllerLogEntry> rows);
std::vector<ControllerLogEntry> parse_controller_log(std::string_view text);

std::string format_requests(std::span<const RequestRecord> rows);
std::vector<RequestRecord> parse_requests(std::string_view text);

std::string format_summary(const RunResult& run);
// key: value lines; blank lines and '#' comments are skipped.
std::map<std::string, std::string> parse_summary(std::string_view text);

// Writes every fixed file; controller_log.csv only for controlled runs.
void write_run_dir(const std::filesystem::path& dir, const Trace& trace, const RunResult& run,
                   const RunConfig& cfg);
RunRecord read_run_dir(const std::filesystem::path& dir);

std::string format_comparison(const RunComparison& c);
// Both per-second series joined on second, columns suffixed _unbounded / _bounded.
std::string format_side_by_side(const RunRecord& unbounded, const RunRecord& bounded);

}  // namespace llmcc
