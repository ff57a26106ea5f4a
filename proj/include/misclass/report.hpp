#ifndef MISCLASS_REPORT_HPP
#define MISCLASS_REPORT_HPP

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "misclass/fit_result.hpp"
#include "misclass/mcmc.hpp"
#include "misclass/sim.hpp"

namespace misclass {

inline constexpr int kSchemaVersion = 1;

nlohmann::json fit_result_to_json(const FitResult& fit);
nlohmann::json study_report_to_json(const StudyReport& report);
nlohmann::json scenario_to_json(const ScenarioConfig& scenario);
nlohmann::json prior_to_json(const PriorSpec& prior);

// Aligned text summaries mirroring the study bias/rMSE and probability tables.
std::string render_fit_table(const FitResult& fit);
std::string render_study_tables(const StudyReport& report);

// Per-replicate estimate rows for figure reproduction.
void write_replicates_csv(const std::string& path, const StudyReport& report);

// Optional posterior draw dump: one CSV per chain.
std::vector<std::string> write_chain_draws_csv(const std::string& prefix,
                                               const PosteriorSample& sample);

// Run manifest, written atomically alongside every output.
nlohmann::json make_manifest(const std::string& command, const nlohmann::json& config,
                             std::uint64_t seed, const std::vector<std::string>& outputs,
                             double wall_clock_seconds);

void write_json_atomic(const std::string& path, const nlohmann::json& value);
void write_text_atomic(const std::string& path, const std::string& text);

std::uint64_t fnv1a64(std::string_view bytes);
std::string config_hash(const nlohmann::json& config);

// Structural validation against the shipped schema files (a small subset of
// JSON Schema: type / properties / required / items / enum / minimum).
std::vector<std::string> validate_schema(const nlohmann::json& value,
                                         const nlohmann::json& schema,
                                         const std::string& at = "$");

}  // namespace misclass

#endif
